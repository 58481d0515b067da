#include "twinrange/csvio.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace twinrange::io {

void CsvTable::add_column(std::string name, std::vector<double> values) {
  columns.push_back(std::move(name));
  data.push_back(std::move(values));
}

void CsvTable::set_labels(std::string name, std::vector<std::string> values) {
  label_name = std::move(name);
  labels = std::move(values);
}

std::size_t CsvTable::rows() const { return data.empty() ? 0 : data[0].size(); }

void CsvTable::validate() const {
  if (columns.size() != data.size())
    throw std::invalid_argument("csv: column name/data count mismatch");
  if (columns.empty()) throw std::invalid_argument("csv: table has no columns");
  for (std::size_t c = 1; c < data.size(); ++c) {
    if (data[c].size() != data[0].size())
      throw std::invalid_argument("csv: column '" + columns[c] +
                                  "' length differs from '" + columns[0] + "'");
  }
  if (!label_name.empty() && labels.size() != rows())
    throw std::invalid_argument("csv: label column length differs from data");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{})
    throw std::runtime_error("csv: failed to format double");
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const CsvTable& table, const CsvStamp& stamp) {
  table.validate();
  char head[96];
  if (stamp.has_seed) {
    std::snprintf(head, sizeof(head), "# config_hash=0x%016" PRIx64 " seed=%" PRIu64,
                  stamp.config_hash, stamp.seed);
  } else {
    std::snprintf(head, sizeof(head), "# config_hash=0x%016" PRIx64,
                  stamp.config_hash);
  }
  out << head << '\n';
  const bool labeled = !table.label_name.empty();
  if (labeled) out << table.label_name << ',';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  const std::size_t n = table.rows();
  for (std::size_t r = 0; r < n; ++r) {
    if (labeled) out << table.labels[r] << ',';
    for (std::size_t c = 0; c < table.data.size(); ++c) {
      if (c) out << ',';
      out << format_double(table.data[c][r]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("csv: stream write failed");
}

void write_csv_file(const std::string& path, const CsvTable& table,
                    const CsvStamp& stamp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  write_csv(out, table, stamp);
}

}  // namespace twinrange::io
