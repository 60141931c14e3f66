#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gpd/scene/types.hpp"

namespace gpd::scene {

/// Text scenario format, version 1. See docs/scenario_format.md for the grammar.
void write_scenario(std::ostream& out, const Scenario& s);
Scenario read_scenario(std::istream& in);

void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

std::string format_double(double v);
/// Parses a full token as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view token);

}  // namespace gpd::scene
