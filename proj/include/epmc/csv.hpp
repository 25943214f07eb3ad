#ifndef EPMC_CSV_HPP
#define EPMC_CSV_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace epmc::csv {

// All numeric output goes through one formatter: 17 significant digits,
// C locale, '\n' newlines. Identical values always produce identical bytes.
std::string format_double(double v);

class Writer {
 public:
  explicit Writer(const std::string& path);

  // Optional "# key=value ..." provenance line, written before the header.
  void comment(const std::string& text);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

  // Convenience for all-numeric rows.
  void row(const std::vector<double>& cells);

  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

// Minimal reader used for the target-profile files: splits lines on commas,
// skips blank lines and '#' comments, keeps 1-based line numbers.
struct Line {
  std::size_t number = 0;
  std::vector<std::string> cells;
};

std::vector<Line> read_file(const std::string& path);

}  // namespace epmc::csv

#endif  // EPMC_CSV_HPP
