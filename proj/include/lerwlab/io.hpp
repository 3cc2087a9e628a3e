// File formats: paths as one comma-separated point per line, JSON lines.
#pragma once

#include <string>
#include <vector>

#include "lerwlab/walk.hpp"

namespace lerwlab {

void save_path(const Path& p, const std::string& file);
Path load_path(const std::string& file, int d);

std::string path_to_text(const Path& p);
Path path_from_text(const std::string& text, int d);

// Parses "1,0,0" style point literals.
std::vector<Point> parse_point_list(const std::vector<std::string>& lines, int d);

}  // namespace lerwlab
