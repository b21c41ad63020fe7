// csv.hpp - plot-data emission: labeled numeric tables as CSV.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "qk/scalar.hpp"

namespace qk {

struct PlotTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Deterministic column order, header row first. Empty tables are an error.
inline void emit_plot_data(const PlotTable& table, const std::string& path) {
    if (table.header.empty() || table.rows.empty())
        throw error(errc::io_error, "refusing to write an empty plot table");
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    out.precision(17);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw error(errc::io_error, "ragged plot table row");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

}  // namespace qk
