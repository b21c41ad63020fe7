// json_io.hpp - file formats: SOK, law, and witness JSON (see docs/formats.md).
//
// Files whose numbers are all strings (or ["num","den"] pairs) parse in
// exact rational mode; any raw JSON number switches the file to float mode.
#pragma once

#include <string>
#include <variant>

#include "json.hpp"

#include "qk/evolution.hpp"
#include "qk/order.hpp"
#include "qk/sok.hpp"

namespace qk {

using json = nlohmann::ordered_json;

using SokVariant =
    std::variant<ClassicalSok<Rat>, ClassicalSok<double>, QuantumSok<Rat>, QuantumSok<double>>;
using LawVariant =
    std::variant<ClassicalLaw<Rat>, ClassicalLaw<double>, QuantumLaw<Rat>, QuantumLaw<double>>;

SokVariant parse_sok(const json& j);
LawVariant parse_law(const json& j);

json emit_sok(const ClassicalSok<Rat>& s);
json emit_sok(const ClassicalSok<double>& s);
json emit_sok(const QuantumSok<Rat>& s);
json emit_sok(const QuantumSok<double>& s);

json emit_law(const ClassicalLaw<Rat>& l);
json emit_law(const ClassicalLaw<double>& l);

json emit_witness(const Witness<Rat>& w, const std::string& direction);
json emit_witness(const Witness<double>& w, const std::string& direction);

// Mode bridges (exact -> float).
ClassicalSok<double> to_float(const ClassicalSok<Rat>& s);
QuantumSok<double> to_float(const QuantumSok<Rat>& s);
ClassicalLaw<double> to_float(const ClassicalLaw<Rat>& l);
QuantumLaw<double> to_float(const QuantumLaw<Rat>& l);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace qk
