#include <complex>

#include "doctest.h"
#include "oblmp/linalg.hpp"

using namespace oblmp;
using Eigen::Vector3d;

TEST_CASE("inner product") {
  CHECK(inner(Vector3d(1, -1, 0), Vector3d(3, 1, 4)) == doctest::Approx(2.0));
  CHECK(inner(Vector3d(1, 0, 0), Vector3d(0, 1, 0)) == 0.0);
  CHECK_THROWS_AS(inner(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2)), DimensionMismatch);
  CHECK(norm(Vector3d(1, 1, 0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("inner product is conjugate-linear in the first slot") {
  using cd = std::complex<double>;
  Eigen::VectorXcd f(2), g(2);
  f << cd(1, 2), cd(0, -1);
  g << cd(3, 0), cd(1, 1);
  const cd fg = inner(f, g);
  // <f, g> = conj(f1) g1 + conj(f2) g2 = (1-2i)3 + (i)(1+i) = 3 - 6i + i - 1
  CHECK(std::abs(fg - cd(2, -5)) < 1e-15);
  const Eigen::VectorXcd i_f = cd(0, 1) * f;
  CHECK(std::abs(inner(i_f, g) - cd(0, -1) * fg) < 1e-14);
  CHECK(std::abs(inner(g, f) - std::conj(fg)) < 1e-14);
}

TEST_CASE("mgs drops exact dependence") {
  Eigen::Matrix3d vs;
  vs.col(0) << 1, 0, 0;
  vs.col(1) << 2, 0, 0;
  vs.col(2) << 0, 0, 5;
  const auto set = mgs_orthonormalize(vs);
  REQUIRE(set.size() == 2);
  CHECK(set.orthonormality_defect() < 1e-15);
  // span{e1, e3}
  const Vector3d e2(0, 1, 0);
  CHECK(orthogonal_project(set, e2).norm() < 1e-15);
  CHECK((orthogonal_project(set, Vector3d(1, 0, 1)) - Vector3d(1, 0, 1)).norm() < 1e-15);
}

TEST_CASE("mgs is the identity on an orthonormal vector") {
  Eigen::MatrixXd vs(2, 1);
  vs << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const auto set = mgs_orthonormalize(vs);
  REQUIRE(set.size() == 1);
  CHECK((set.vector(0) - vs.col(0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mgs edge cases") {
  CHECK(mgs_orthonormalize(Eigen::MatrixXd(4, 0)).empty());
  CHECK(mgs_orthonormalize(Eigen::MatrixXd::Zero(4, 3)).empty());
  CHECK(mgs_orthonormalize(Eigen::MatrixXd::Random(5, 4), 1e-8, Index{2}).size() == 2);
  CHECK(mgs_orthonormalize(Eigen::MatrixXd::Random(3, 6)).size() == 3);
  CHECK_THROWS_AS(mgs_orthonormalize(Eigen::MatrixXd::Random(3, 2), 0.0), Error);
}

TEST_CASE("orthogonal projection") {
  Eigen::MatrixXd e3(3, 1);
  e3 << 0, 0, 1;
  const OrthonormalSet<double> b3(e3, 1e-8);
  CHECK((orthogonal_project(b3, Vector3d(3, 1, 4)) - Vector3d(0, 0, 4)).norm() < 1e-15);

  const OrthonormalSet<double> none(3);
  CHECK(orthogonal_project(none, Vector3d(3, 1, 4)).norm() == 0.0);

  Eigen::MatrixXd d(3, 1);
  d << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
  const OrthonormalSet<double> bd(d, 1e-8);
  CHECK((orthogonal_project(bd, Vector3d(1, 0, 0)) - Vector3d(0.5, 0.5, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(orthogonal_project(bd, Eigen::VectorXd::Ones(4)), DimensionMismatch);
}

TEST_CASE("mgs keeps nearly parallel vectors orthonormal") {
  // Coherence 1 - 5e-7 between the two inputs.
  Eigen::MatrixXd vs(3, 2);
  vs.col(0) << 1, 0, 0;
  vs.col(1) << 1, 1e-3, 0;
  vs.col(1).normalize();
  const auto set = mgs_orthonormalize(vs);
  REQUIRE(set.size() == 2);
  CHECK(set.orthonormality_defect() < 1e-10);
}
