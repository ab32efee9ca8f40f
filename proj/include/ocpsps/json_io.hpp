#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace ocpsps {

using json = nlohmann::ordered_json;

/// Canonical float formatting: 6 decimal digits, trailing zeros dropped by
/// the shortest-representation printer.
double round6(double v);

/// Recursively rounds every floating-point value to 6 decimals.
json canonicalize(json j);

/// canonicalize + dump. indent < 0 gives single-line output (JSONL records).
std::string dump_canonical(const json& j, int indent = -1);

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace ocpsps
