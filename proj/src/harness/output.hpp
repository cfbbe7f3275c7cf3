#pragma once

#include "finsler/types.hpp"

#include <string>
#include <vector>

namespace finsler::harness {

/// %.12g, with "inf", "-inf" and "nan" spelled out.
std::string fmt(double value);

/// Tab-separated table with one header line.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  static std::vector<std::string> coordinate_header(const std::string& prefix, int n);

  Table& row() {
    rows_.emplace_back();
    return *this;
  }
  Table& add(double value) { return add_text(fmt(value)); }
  Table& add(const Vec& v);
  Table& add(int value) { return add_text(std::to_string(value)); }
  Table& add_text(std::string text);

  std::size_t size() const { return rows_.size(); }
  /// Throws FinslerError(io) when the file cannot be written.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One property check. slack = bound - observed for upper bounds and
/// observed - bound for lower bounds.
struct Check {
  std::string name;
  std::string statement;
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
  bool lower = false;

  double slack() const { return lower ? observed - bound : bound - observed; }
};

/// observed <= bound.
Check upper_check(std::string name, std::string statement, double observed, double bound, std::string detail = {});
/// observed > bound.
Check lower_check(std::string name, std::string statement, double observed, double bound, std::string detail = {});
Check failed_check(std::string name, std::string statement, const std::string& error);

/// key=value record, values with spaces or quotes are quoted.
std::string record(const std::vector<std::pair<std::string, std::string>>& fields);
std::string check_record(const Check& c);

/// Writes `lines` (each without newline) to path.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace finsler::harness
