#pragma once

// Plain-text columnar matrix files.
//
//   # oblmp-matrix key=value key=value ...
//   name_0,name_1,...
//   1.0,2.0,...
//
// One row per grid point, one column per atom (or a single column for a
// signal). Lines starting with '#' after the first are ignored.

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "oblmp/errors.hpp"

namespace oblmp {

class ParseError : public Error {
 public:
  using Error::Error;
};

struct MatrixFile {
  Eigen::MatrixXd data;
  std::vector<std::string> column_names;
  std::map<std::string, std::string> metadata;
};

MatrixFile read_matrix_csv(std::istream& in);
MatrixFile read_matrix_csv(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& out, const MatrixFile& file);
void write_matrix_csv(const std::filesystem::path& path, const MatrixFile& file);

/// Column names prefix_0, prefix_1, ...
std::vector<std::string> numbered_columns(const std::string& prefix, Eigen::Index count);

}  // namespace oblmp
