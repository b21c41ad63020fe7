// json_io.cpp - parsing and emission of the SOK / law / witness schemas.

#include "qk/json_io.hpp"

#include <fstream>

namespace qk {

namespace {

// exact mode iff every number position in the document is a string or a
// ["num","den"] pair; raw JSON numbers switch the file to float mode
bool all_numbers_are_strings(const json& j) {
    if (j.is_number()) return false;
    if (j.is_array())
        for (const auto& v : j)
            if (!all_numbers_are_strings(v)) return false;
    if (j.is_object())
        for (const auto& [k, v] : j.items())
            if (!all_numbers_are_strings(v)) return false;
    return true;
}

template <typename T>
T parse_number(const json& j);

template <>
Rat parse_number<Rat>(const json& j) {
    if (j.is_string()) return parse_rat(j.get<std::string>());
    if (j.is_array() && j.size() == 2)
        return parse_number<Rat>(j[0]) / parse_number<Rat>(j[1]);
    if (j.is_number_integer()) return Rat(j.get<long>());
    if (j.is_number()) {
        Rat r(j.get<double>());
        r.canonicalize();
        return r;
    }
    throw error(errc::parse_error, "expected a number, got " + j.dump());
}

template <>
double parse_number<double>(const json& j) {
    if (j.is_string()) return parse_rat(j.get<std::string>()).get_d();
    if (j.is_array() && j.size() == 2) return parse_number<double>(j[0]) / parse_number<double>(j[1]);
    if (j.is_number()) return j.get<double>();
    throw error(errc::parse_error, "expected a number, got " + j.dump());
}

template <typename T>
Cx<T> parse_complex(const json& j) {
    if (j.is_array() && j.size() == 2 && (j[0].is_number() || j[0].is_string()))
        return {parse_number<T>(j[0]), parse_number<T>(j[1])};
    return {parse_number<T>(j), T{}};
}

EnvSpace parse_env(const json& j) {
    if (!j.contains("env") || !j["env"].is_array())
        throw error(errc::parse_error, "missing env label list");
    std::vector<std::string> labels = j["env"].get<std::vector<std::string>>();
    if (!j.contains("registers")) return EnvSpace::simple(std::move(labels));

    std::vector<EnvFactor> factors;
    std::size_t product = 1;
    for (const auto& [name, size] : j["registers"].items()) {
        factors.push_back({name, std::vector<std::string>(size.get<std::size_t>())});
        product *= size.get<std::size_t>();
    }
    if (product != labels.size())
        throw error(errc::parse_error, "register sizes do not multiply to |env|");

    // recover component labels by splitting the flat labels on '|'
    bool consistent = true;
    EnvSpace probe = [&] {
        std::vector<EnvFactor> fs = factors;
        for (auto& f : fs)
            for (std::size_t i = 0; i < f.labels.size(); ++i) f.labels[i] = std::to_string(i);
        return EnvSpace::from_factors(fs);
    }();
    for (std::size_t idx = 0; idx < labels.size() && consistent; ++idx) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t pos = 0; pos <= labels[idx].size(); ++pos)
            if (pos == labels[idx].size() || labels[idx][pos] == '|') {
                parts.push_back(labels[idx].substr(start, pos - start));
                start = pos + 1;
            }
        if (parts.size() != factors.size()) {
            consistent = false;
            break;
        }
        auto comps = probe.components(idx);
        for (std::size_t k = 0; k < factors.size(); ++k) {
            auto& slot = factors[k].labels[comps[k]];
            if (slot.empty())
                slot = parts[k];
            else if (slot != parts[k])
                consistent = false;
        }
    }
    if (!consistent)
        for (auto& f : factors)
            for (std::size_t i = 0; i < f.labels.size(); ++i) f.labels[i] = std::to_string(i);
    return EnvSpace::from_factors(std::move(factors));
}

template <typename T>
ClassicalSok<T> parse_classical(const json& j, const EnvSpace& env) {
    if (!j.contains("columns") || !j["columns"].is_array())
        throw error(errc::parse_error, "classical SOK needs a columns array");
    std::vector<std::vector<T>> cols;
    for (const auto& cj : j["columns"]) {
        T weight = cj.contains("weight") ? parse_number<T>(cj["weight"]) : T(1);
        if (!cj.contains("p") || !cj["p"].is_array())
            throw error(errc::parse_error, "column needs a p vector");
        std::vector<T> col;
        for (const auto& v : cj["p"]) col.push_back(T(weight * parse_number<T>(v)));
        cols.push_back(std::move(col));
    }
    return ClassicalSok<T>::from_columns(env, cols);
}

template <typename T>
QuantumSok<T> parse_quantum(const json& j, const EnvSpace& env) {
    if (!j.contains("gram") || !j["gram"].is_array())
        throw error(errc::parse_error, "quantum SOK needs a gram matrix");
    const std::size_t n = env.size();
    if (j["gram"].size() != n) throw error(errc::parse_error, "gram row count != |env|");
    Mat<Cx<T>> g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = j["gram"][i];
        if (!row.is_array() || row.size() != n)
            throw error(errc::parse_error, "gram must be square");
        for (std::size_t k = 0; k < n; ++k) g(i, k) = parse_complex<T>(row[k]);
    }
    return QuantumSok<T>(env, std::move(g));
}

json emit_number(const Rat& v) { return json(format_rat(v)); }
json emit_number(double v) { return json(v); }

template <typename T>
json emit_complex(const Cx<T>& v) {
    if (scalar_traits<T>::is_zero(v.im)) return emit_number(v.re);
    return json::array({emit_number(v.re), emit_number(v.im)});
}

template <typename T>
json emit_env_fields(const EnvSpace& env, const char* kind) {
    json j;
    j["kind"] = kind;
    j["env"] = env.flat_labels();
    if (env.factors().size() > 1 ||
        (env.factors().size() == 1 && env.factors()[0].name != "E")) {
        json regs = json::object();
        for (const auto& f : env.factors()) regs[f.name] = f.labels.size();
        j["registers"] = std::move(regs);
    }
    return j;
}

template <typename T>
json emit_classical(const ClassicalSok<T>& s) {
    json j = emit_env_fields<T>(s.env(), "classical");
    json cols = json::array();
    for (const auto& c : s.columns()) {
        json cj;
        cj["weight"] = emit_number(c.weight);
        json p = json::array();
        for (const auto& v : c.dist) p.push_back(emit_number(v));
        cj["p"] = std::move(p);
        cols.push_back(std::move(cj));
    }
    j["columns"] = std::move(cols);
    return j;
}

template <typename T>
json emit_quantum(const QuantumSok<T>& s) {
    json j = emit_env_fields<T>(s.env(), "quantum");
    json g = json::array();
    for (std::size_t i = 0; i < s.gram().rows(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < s.gram().cols(); ++k) row.push_back(emit_complex(s.gram()(i, k)));
        g.push_back(std::move(row));
    }
    j["gram"] = std::move(g);
    return j;
}

template <typename T>
std::pair<EnvFactor, EnvFactor> parse_io_registers(const json& j) {
    auto labels_of = [&](const char* key, const char* fallback_prefix,
                         std::size_t n) -> std::vector<std::string> {
        std::string lk = std::string(key) + "_labels";
        if (j.contains(lk)) return j[lk].get<std::vector<std::string>>();
        std::vector<std::string> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = fallback_prefix + std::to_string(i);
        return out;
    };
    const std::size_t ni = j.at("I").get<std::size_t>(), no = j.at("O").get<std::size_t>();
    return {EnvFactor{"I", labels_of("I", "i", ni)}, EnvFactor{"O", labels_of("O", "o", no)}};
}

template <typename T>
ClassicalLaw<T> parse_classical_law(const json& j) {
    const std::size_t ne = j.at("E").get<std::size_t>();
    EnvSpace env = j.contains("E_labels")
                       ? EnvSpace::simple(j["E_labels"].get<std::vector<std::string>>())
                       : EnvSpace::indexed(ne);
    auto [in_reg, out_reg] = parse_io_registers<T>(j);
    const std::size_t rows = ne * in_reg.labels.size(), cols = ne * out_reg.labels.size();
    Mat<T> t(rows, cols);
    const auto& tj = j.at("T");
    if (tj.size() != rows) throw error(errc::parse_error, "law T row count != E*I");
    for (std::size_t r = 0; r < rows; ++r) {
        if (tj[r].size() != cols) throw error(errc::parse_error, "law T column count != E*O");
        for (std::size_t c = 0; c < cols; ++c) t(r, c) = parse_number<T>(tj[r][c]);
    }
    return ClassicalLaw<T>(std::move(env), std::move(in_reg), std::move(out_reg), std::move(t));
}

template <typename T>
QuantumLaw<T> parse_quantum_law(const json& j) {
    const std::size_t ne = j.at("E").get<std::size_t>();
    EnvSpace env = j.contains("E_labels")
                       ? EnvSpace::simple(j["E_labels"].get<std::vector<std::string>>())
                       : EnvSpace::indexed(ne);
    auto [in_reg, out_reg] = parse_io_registers<T>(j);
    const std::size_t rows = ne * in_reg.labels.size(), cols = ne * out_reg.labels.size();
    Mat<Cx<T>> t(rows, cols);
    const auto& tj = j.at("T");
    if (tj.size() != rows) throw error(errc::parse_error, "law T row count != E*I");
    for (std::size_t r = 0; r < rows; ++r) {
        if (tj[r].size() != cols) throw error(errc::parse_error, "law T column count != E*O");
        for (std::size_t c = 0; c < cols; ++c) t(r, c) = parse_complex<T>(tj[r][c]);
    }
    return QuantumLaw<T>(std::move(env), std::move(in_reg), std::move(out_reg), std::move(t));
}

}  // namespace

SokVariant parse_sok(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw error(errc::parse_error, "SOK file needs a kind field");
    const std::string kind = j["kind"].get<std::string>();
    // only the data payload decides the mode; register sizes are structural
    const bool exact = all_numbers_are_strings(j.contains("columns") ? j["columns"]
                                               : j.contains("gram")  ? j["gram"]
                                                                     : json());
    EnvSpace env = parse_env(j);
    if (kind == "classical")
        return exact ? SokVariant(parse_classical<Rat>(j, env))
                     : SokVariant(parse_classical<double>(j, env));
    if (kind == "quantum")
        return exact ? SokVariant(parse_quantum<Rat>(j, env))
                     : SokVariant(parse_quantum<double>(j, env));
    throw error(errc::parse_error, "unknown SOK kind: " + kind);
}

LawVariant parse_law(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw error(errc::parse_error, "law file needs a kind field");
    const std::string kind = j["kind"].get<std::string>();
    const bool exact = all_numbers_are_strings(j.contains("T") ? j["T"] : json());
    if (kind == "classical")
        return exact ? LawVariant(parse_classical_law<Rat>(j))
                     : LawVariant(parse_classical_law<double>(j));
    if (kind == "quantum")
        return exact ? LawVariant(parse_quantum_law<Rat>(j))
                     : LawVariant(parse_quantum_law<double>(j));
    throw error(errc::parse_error, "unknown law kind: " + kind);
}

json emit_sok(const ClassicalSok<Rat>& s) { return emit_classical(s); }
json emit_sok(const ClassicalSok<double>& s) { return emit_classical(s); }
json emit_sok(const QuantumSok<Rat>& s) { return emit_quantum(s); }
json emit_sok(const QuantumSok<double>& s) { return emit_quantum(s); }

namespace {

template <typename T>
json emit_law_impl(const ClassicalLaw<T>& l) {
    json j;
    j["kind"] = "classical";
    j["E"] = l.env().size();
    j["I"] = l.input().labels.size();
    j["O"] = l.output().labels.size();
    j["E_labels"] = l.env().flat_labels();
    j["I_labels"] = l.input().labels;
    j["O_labels"] = l.output().labels;
    json rows = json::array();
    for (std::size_t r = 0; r < l.matrix().rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < l.matrix().cols(); ++c) row.push_back(emit_number(l.matrix()(r, c)));
        rows.push_back(std::move(row));
    }
    j["T"] = std::move(rows);
    return j;
}

template <typename T>
json emit_witness_impl(const Witness<T>& w, const std::string& direction) {
    json j;
    j["direction"] = direction;
    if (w.kind == WitnessKind::classical_substochastic) {
        j["kind"] = "classical-substochastic";
        j["norm"] = emit_number(w.norm);
        json rows = json::array();
        for (std::size_t r = 0; r < w.t.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < w.t.cols(); ++c) row.push_back(emit_number(w.t(r, c)));
            rows.push_back(std::move(row));
        }
        j["T"] = std::move(rows);
    } else {
        j["kind"] = "psd-eigenvalue-report";
        j["eigenvalues"] = w.eigs;
    }
    return j;
}

}  // namespace

json emit_law(const ClassicalLaw<Rat>& l) { return emit_law_impl(l); }
json emit_law(const ClassicalLaw<double>& l) { return emit_law_impl(l); }

json emit_witness(const Witness<Rat>& w, const std::string& direction) {
    return emit_witness_impl(w, direction);
}
json emit_witness(const Witness<double>& w, const std::string& direction) {
    return emit_witness_impl(w, direction);
}

ClassicalSok<double> to_float(const ClassicalSok<Rat>& s) {
    std::vector<std::vector<double>> cols;
    for (const auto& c : s.columns()) {
        std::vector<double> col;
        for (const auto& v : c.dist) col.push_back(c.weight.get_d() * v.get_d());
        cols.push_back(std::move(col));
    }
    return ClassicalSok<double>::from_columns(s.env(), cols);
}

QuantumSok<double> to_float(const QuantumSok<Rat>& s) {
    return QuantumSok<double>(s.env(), to_double_gram(s.gram()), false);
}

ClassicalLaw<double> to_float(const ClassicalLaw<Rat>& l) {
    Mat<double> t(l.matrix().rows(), l.matrix().cols());
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) t(i, j) = l.matrix()(i, j).get_d();
    return ClassicalLaw<double>(l.env(), l.input(), l.output(), std::move(t));
}

QuantumLaw<double> to_float(const QuantumLaw<Rat>& l) {
    return QuantumLaw<double>(l.env(), l.input(), l.output(), to_double_gram(l.matrix()));
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::parse_error, path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

}  // namespace qk
