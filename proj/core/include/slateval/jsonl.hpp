#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "slateval/types.hpp"

namespace slateval {

/// Reads one impression per line:
/// {"context_id": str, "candidates": [str], "actions": [str],
///  "logging_propensities": [float], "rewards": [float]}
/// Empty lines are skipped. Validation errors name the offending line.
Dataset load_jsonl(const std::filesystem::path& path);
Dataset load_jsonl(std::istream& in, const std::string& source_name);

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path);
void save_jsonl(const Dataset& dataset, std::ostream& out);

}  // namespace slateval
