#ifndef BLACKMODEL_TABLES_HPP
#define BLACKMODEL_TABLES_HPP

#include <string>
#include <vector>

#include "blackmodel/machine.hpp"

namespace blackmodel::tables {

struct Cell {
    enum class Kind { number, text, na } kind = Kind::na;
    double num = 0.0;
    std::string text;

    static Cell number_cell(double v) { return {Kind::number, v, {}}; }
    static Cell text_cell(std::string s) { return {Kind::text, 0.0, std::move(s)}; }
    static Cell na() { return {}; }
    std::string render() const;
};

struct ReferenceTable {
    std::string id; // T1..T14
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Parses a reference CSV (header row, quoted cells allowed, "N/A" sentinel).
ReferenceTable parse_reference_csv(const std::string& id, const std::string& text);

const ReferenceTable& builtin_table(const std::string& id);
const std::vector<std::string>& table_ids();

struct CellComparison {
    std::string row_key;
    std::string column;
    Cell model;
    Cell reference;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::string table_id;
    std::vector<CellComparison> cells;
    double max_rel_error = 0.0;
    bool pass = false;
    std::string worst_cell; // "row/column" of the largest relative error
};

// Recompute every derivable cell of a bundled table through the model and
// compare against the reference at per-column tolerances.
ComparisonReport reproduce(const CalibrationSet& cal, const std::string& table_id);

} // namespace blackmodel::tables

#endif
