#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace finsler::harness {

std::string fmt(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);  // no "-0"
  return buf;
}

std::vector<std::string> Table::coordinate_header(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Table& Table::add(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) add(v[i]);
  return *this;
}

Table& Table::add_text(std::string text) {
  rows_.back().push_back(std::move(text));
  return *this;
}

void Table::write(const std::string& path) const {
  std::vector<std::string> lines;
  auto join = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += '\t';
      line += cells[i];
    }
    return line;
  };
  lines.push_back(join(header_));
  for (const auto& r : rows_) lines.push_back(join(r));
  write_lines(path, lines);
}

Check upper_check(std::string name, std::string statement, double observed, double bound, std::string detail) {
  Check c{std::move(name), std::move(statement), observed, bound, false, std::move(detail)};
  c.pass = std::isfinite(observed) && observed <= bound;
  return c;
}

Check lower_check(std::string name, std::string statement, double observed, double bound, std::string detail) {
  Check c{std::move(name), std::move(statement), observed, bound, false, std::move(detail), true};
  c.pass = std::isfinite(observed) && observed > bound;
  return c;
}

Check failed_check(std::string name, std::string statement, const std::string& error) {
  Check c{std::move(name), std::move(statement), std::nan(""), 0.0, false, "error: " + error};
  return c;
}

std::string record(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string line;
  for (const auto& [key, value] : fields) {
    if (!line.empty()) line += ' ';
    line += key;
    line += '=';
    const bool quote = value.empty() || value.find_first_of(" \t\"=") != std::string::npos;
    if (!quote) {
      line += value;
      continue;
    }
    line += '"';
    for (char ch : value) {
      if (ch == '"' || ch == '\\') line += '\\';
      line += ch == '\n' ? ' ' : ch;
    }
    line += '"';
  }
  return line;
}

std::string check_record(const Check& c) {
  std::vector<std::pair<std::string, std::string>> f = {
      {"check", c.name},
      {"verdict", c.pass ? "pass" : "fail"},
      {"observed", fmt(c.observed)},
      {"bound", fmt(c.bound)},
      {"slack", fmt(c.slack())},
      {"statement", c.statement},
  };
  if (!c.detail.empty()) f.emplace_back("detail", c.detail);
  return record(f);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FinslerError(ErrorCode::io, "cannot write " + path);
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw FinslerError(ErrorCode::io, "write failed for " + path);
}

}  // namespace finsler::harness
