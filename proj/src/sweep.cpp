#include "squeeze/sweep.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "squeeze/errors.hpp"

namespace squeeze {

void SweepResult::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) {
        throw InvalidArgument("row has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

std::size_t SweepResult::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InvalidArgument("no column named '" + name + "'");
}

std::vector<double> SweepResult::column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) value = 0.0;  // drop the sign of -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

std::string to_csv(const SweepResult& result) {
    std::string out;
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (i) out += ',';
        out += result.columns[i];
    }
    out += '\n';
    for (const auto& row : result.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const SweepResult& result) {
    nlohmann::json cols = nlohmann::json::object();
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& r : result.rows) values.push_back(r[c]);
        cols[result.columns[c]] = std::move(values);
    }
    return {{"columns", result.columns}, {"data", std::move(cols)}, {"metadata", result.metadata}};
}

}  // namespace squeeze
