#include "grr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grr {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

std::size_t RawDataset::response_index() const {
    auto it = std::find(column_names.begin(), column_names.end(), response_name);
    if (it == column_names.end())
        throw std::runtime_error("response column '" + response_name + "' not found");
    return static_cast<std::size_t>(it - column_names.begin());
}

void RawDataset::validate() const {
    if (column_names.size() != columns.size())
        throw std::runtime_error("column name/data count mismatch");
    if (columns.size() < 2)
        throw std::runtime_error("need at least one predictor and one response column");
    const std::size_t n = n_rows();
    if (n < 2) throw std::runtime_error("need at least 2 rows");
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n)
            throw std::runtime_error("column '" + column_names[j] + "' has inconsistent length");
        for (double v : columns[j])
            if (!std::isfinite(v))
                throw std::runtime_error("non-finite value in column '" + column_names[j] + "'");
    }
    std::size_t hits = static_cast<std::size_t>(
        std::count(column_names.begin(), column_names.end(), response_name));
    if (hits != 1)
        throw std::runtime_error("response column '" + response_name + "' matches " +
                                 std::to_string(hits) + " columns, expected exactly 1");
}

RawDataset load_csv(const std::filesystem::path& path, const std::string& response) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty file: " + path.string());

    RawDataset ds;
    ds.response_name = response;
    ds.column_names = split_row(line);
    if (ds.column_names.empty())
        throw std::runtime_error("empty header row in " + path.string());
    ds.columns.resize(ds.column_names.size());

    // data rows are numbered from 1 (header excluded)
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto cells = split_row(line);
        if (cells.size() != ds.column_names.size())
            throw std::runtime_error("row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(ds.column_names.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string& cell = cells[j];
            char* end = nullptr;
            double v = cell.empty() ? 0.0 : std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw std::runtime_error("non-numeric cell at row " + std::to_string(row) +
                                         ", column '" + ds.column_names[j] + "'");
            ds.columns[j].push_back(v);
        }
    }

    ds.validate();
    return ds;
}

}  // namespace grr
