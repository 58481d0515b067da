#include "twinrange/pgm.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace twinrange::io {

void write_pgm16(std::ostream& out, const Eigen::MatrixXd& values,
                 const std::string& comment) {
  if (values.rows() == 0 || values.cols() == 0)
    throw std::invalid_argument("pgm: empty matrix");
  if (comment.find('\n') != std::string::npos)
    throw std::invalid_argument("pgm: comment must be a single line");
  double mx = 0.0;
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("pgm: values must be finite and >= 0");
      if (v > mx) mx = v;
    }
  const double scale = mx > 0.0 ? 65535.0 / mx : 0.0;

  out << "P5\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  out << values.cols() << ' ' << values.rows() << "\n65535\n";

  std::vector<unsigned char> row(static_cast<std::size_t>(values.cols()) * 2);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const auto q = static_cast<std::uint16_t>(
          std::lround(values(r, c) * scale));
      row[2 * static_cast<std::size_t>(c)] = static_cast<unsigned char>(q >> 8);
      row[2 * static_cast<std::size_t>(c) + 1] = static_cast<unsigned char>(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("pgm: stream write failed");
}

void write_pgm16_file(const std::string& path, const Eigen::MatrixXd& values,
                      const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot open '" + path + "' for writing");
  write_pgm16(out, values, comment);
}

}  // namespace twinrange::io
