#ifndef BLACKMODEL_BUILTIN_DATA_HPP
#define BLACKMODEL_BUILTIN_DATA_HPP

#include <string>

namespace blackmodel {

// Embedded copies of the shipped data assets (machine files and reference
// table CSVs); generated from core/data at configure time so the built-in
// text stays byte-identical to the files.
const std::string& builtin_machine_text(const std::string& name); // "B200" | "H200"
const std::string& builtin_table_csv(const std::string& id);      // "T1".."T14"

} // namespace blackmodel

#endif
