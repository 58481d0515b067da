#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace twinrange::io {

// Column-oriented numeric table destined for a CSV file.  All columns must
// share the same length; the writer emits a provenance comment line first so
// a result file can be traced back to the exact config and seed it came from.
struct CsvTable {
  std::string label_name;          // optional leading text column
  std::vector<std::string> labels;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[c][row]

  void add_column(std::string name, std::vector<double> values);
  void set_labels(std::string name, std::vector<std::string> values);
  std::size_t rows() const;
  void validate() const;  // throws std::invalid_argument on ragged data
};

struct CsvStamp {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

// Comma separated, LF line endings, doubles at full round-trip precision
// (%.17g).  The stamp becomes a single leading line of the form
//   # config_hash=0x0123456789abcdef seed=42
void write_csv(std::ostream& out, const CsvTable& table, const CsvStamp& stamp);
void write_csv_file(const std::string& path, const CsvTable& table,
                    const CsvStamp& stamp);

std::string format_double(double v);  // shortest round-trip decimal text

}  // namespace twinrange::io
