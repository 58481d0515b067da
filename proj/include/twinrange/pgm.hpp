#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>

namespace twinrange::io {

// Binary (P5) 16-bit PGM export of a nonnegative real matrix, used for
// joint-spectrum magnitude images.  Values are scaled so the matrix maximum
// maps to 65535; an all-zero matrix produces an all-zero image.  Row 0 of the
// matrix becomes the top image row.  A provenance comment is embedded after
// the magic number.  16-bit PGM samples are big-endian per the format.
void write_pgm16(std::ostream& out, const Eigen::MatrixXd& values,
                 const std::string& comment);
void write_pgm16_file(const std::string& path, const Eigen::MatrixXd& values,
                      const std::string& comment);

}  // namespace twinrange::io
