#include "lerwlab/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lerwlab {

std::string path_to_text(const Path& p) {
  std::string out;
  for (const auto& pt : p.pts) {
    out += format_point(pt, p.dim);
    out.push_back('\n');
  }
  return out;
}

Path path_from_text(const std::string& text, int d) {
  Path p;
  p.dim = d;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    p.pts.push_back(parse_point(line, d));
  }
  if (p.pts.empty()) throw std::runtime_error("path_from_text: no points");
  return p;
}

void save_path(const Path& p, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("save_path: cannot open " + file);
  out << path_to_text(p);
}

Path load_path(const std::string& file, int d) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_path: cannot open " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return path_from_text(ss.str(), d);
}

std::vector<Point> parse_point_list(const std::vector<std::string>& lines, int d) {
  std::vector<Point> out;
  out.reserve(lines.size());
  for (const auto& line : lines)
    if (!line.empty()) out.push_back(parse_point(line, d));
  return out;
}

}  // namespace lerwlab
