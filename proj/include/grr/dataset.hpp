#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace grr {

/// A parsed data table: all columns numeric, one of them designated as the
/// response. Row order is preserved from the source file.
struct RawDataset {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;  // all of equal length n
    std::string response_name;

    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t n_predictors() const { return columns.size() - 1; }
    std::size_t response_index() const;

    /// Validates: n >= 2, equal column lengths, finite values, response present.
    void validate() const;
};

/// Reads a headered CSV of decimal numerics (comma separated, no quoting,
/// no missing cells). Throws std::runtime_error naming the offending row and
/// column on malformed input.
RawDataset load_csv(const std::filesystem::path& path, const std::string& response);

}  // namespace grr
