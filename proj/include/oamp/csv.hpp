#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oamp {

/// Shortest round-trip-stable form at 12 significant digits ("%.12g").
std::string format_real(double x);

/// Minimal RFC-4180 writer: comma separated, LF line endings, fields
/// quoted only when they contain a comma, quote or newline.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) { row(names); }
  void row(const std::vector<std::string>& fields);

  static std::string quote(const std::string& field);

 private:
  std::ostream& os_;
};

}  // namespace oamp
