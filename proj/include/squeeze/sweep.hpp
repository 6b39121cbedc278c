#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace squeeze {

/// Tabular result of a parameter sweep: named columns of equal length plus
/// free-form metadata.
struct SweepResult {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json metadata = nlohmann::json::object();

    void add_row(std::vector<double> row);
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

/// Fixed formatting: 17 significant digits, '.' as
/// decimal separator, independent of the global locale.
std::string format_double(double value);

/// One header row, then one line per row, '\n' line endings.
std::string to_csv(const SweepResult& result);
nlohmann::json to_json(const SweepResult& result);

}  // namespace squeeze
