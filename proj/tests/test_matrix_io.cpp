#include <sstream>

#include "doctest.h"
#include "oblmp/matrix_io.hpp"

using namespace oblmp;

TEST_CASE("round trip keeps every bit") {
  MatrixFile m;
  m.data = Eigen::MatrixXd::Random(5, 3);
  m.data(0, 0) = 1.0 / 3.0;
  m.data(1, 1) = -1e-300;
  m.column_names = numbered_columns("atom", 3);
  m.metadata = {{"kind", "bspline"}, {"knot_step", "0.065"}};
  std::stringstream ss;
  write_matrix_csv(ss, m);
  const auto back = read_matrix_csv(ss);
  CHECK(back.data == m.data);
  CHECK(back.column_names == m.column_names);
  CHECK(back.metadata.at("kind") == "bspline");
  CHECK(back.metadata.at("rows") == "5");
  CHECK(back.metadata.at("cols") == "3");
}

TEST_CASE("plain CSV without metadata") {
  std::istringstream in("x,y\n1,2\n3,4.5\n\n# comment\n-1e3,+2\n");
  const auto m = read_matrix_csv(in);
  REQUIRE(m.data.rows() == 3);
  CHECK(m.data(1, 1) == 4.5);
  CHECK(m.data(2, 0) == -1000.0);
  CHECK(m.data(2, 1) == 2.0);
}

TEST_CASE("matrices with no columns") {
  MatrixFile m;
  m.data.resize(4, 0);
  std::stringstream ss;
  write_matrix_csv(ss, m);
  const auto back = read_matrix_csv(ss);
  CHECK(back.data.rows() == 4);
  CHECK(back.data.cols() == 0);
}

TEST_CASE("parse errors") {
  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv(ragged), ParseError);
  std::istringstream bad("a\nnope\n");
  CHECK_THROWS_AS(read_matrix_csv(bad), ParseError);
  std::istringstream trailing("a\n1.5x\n");
  CHECK_THROWS_AS(read_matrix_csv(trailing), ParseError);
  std::istringstream rows("# oblmp-matrix rows=3 cols=1\na\n1\n2\n");
  CHECK_THROWS_AS(read_matrix_csv(rows), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_matrix_csv(empty), ParseError);
  CHECK_THROWS_AS(read_matrix_csv(std::filesystem::path("/nonexistent/file.csv")), ParseError);
}
