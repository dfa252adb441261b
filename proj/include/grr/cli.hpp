#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grr/shrinkage.hpp"

namespace grr {

enum class Command { fit, trace, simulate };

/// One reproducible run: identical configs (and seed, for simulate) produce
/// byte-identical artifacts.
struct RunConfig {
    Command command = Command::fit;
    std::filesystem::path data;
    std::string response;
    PathSpec path;
    bool standardize_y = true;
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;  // simulate only
    std::vector<std::string> formats;   // subset of csv, json, svg

    /// Collects every validation failure into a single error message.
    void validate() const;
};

/// Executes the configured command and writes its artifacts under out_dir.
/// Returns 0 on success; failures are reported by exception.
int run(const RunConfig& config);

}  // namespace grr
