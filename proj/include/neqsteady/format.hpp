#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace neqsteady {

// All numeric text output goes through %.17g so every CSV/JSON value
// round-trips bit-exactly through strtod.
inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Minimal CSV assembly: fixed column set, rows of preformatted cells.
class CsvTable {
public:
  explicit CsvTable(const std::vector<std::string>& columns) : header_(join(columns)) {}

  void add_row(const std::vector<std::string>& cells) { rows_.push_back(join(cells)); }

  std::string str() const {
    std::ostringstream os;
    os << header_ << '\n';
    for (const auto& r : rows_) os << r << '\n';
    return os.str();
  }

  std::size_t row_count() const { return rows_.size(); }

private:
  static std::string join(const std::vector<std::string>& cells) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    return os.str();
  }

  std::string header_;
  std::vector<std::string> rows_;
};

}  // namespace neqsteady
