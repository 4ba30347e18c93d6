#include "doctest.h"
#include "oblmp/oblique.hpp"

using namespace oblmp;
using Eigen::Vector3d;

namespace {

BackgroundModel<double> diagonal_background() {
  Eigen::MatrixXd d(3, 1);
  d << 1, 1, 0;
  return BackgroundModel<double>::from_sources(d);
}

Eigen::MatrixXd cols(std::initializer_list<Vector3d> vs) {
  Eigen::MatrixXd m(3, static_cast<Index>(vs.size()));
  Index j = 0;
  for (const auto& v : vs) m.col(j++) = v;
  return m;
}

}  // namespace

TEST_CASE("background model") {
  const auto bg = diagonal_background();
  CHECK(bg.size() == 1);
  CHECK(bg.source_count() == 1);
  CHECK(BackgroundModel<double>::empty(3).empty());
  Eigen::MatrixXd five(3, 5);
  five << 1, 2, 0, 1, 3, 1, 2, 0, 1, 3, 0, 0, 1, 1, 0;
  const auto bg5 = BackgroundModel<double>::from_sources(five, 1e-8, Index{1});
  CHECK(bg5.size() == 1);
  CHECK(bg5.source_count() == 5);
}

TEST_CASE("subtract_background") {
  const auto bg = diagonal_background();
  const auto u = subtract_background(cols({Vector3d(1, 0, 0), Vector3d(1, 1, 0)}), bg);
  CHECK((u.col(0) - Vector3d(0.5, -0.5, 0)).norm() < 1e-15);
  CHECK(u.col(1).norm() < 1e-15);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(3, 4);
  CHECK(subtract_background(v, BackgroundModel<double>::empty(3)) == v);
  CHECK_THROWS_AS(subtract_background(Eigen::MatrixXd::Ones(4, 2), bg), DimensionMismatch);
}

TEST_CASE("init_dual") {
  const auto ds = init_dual<double>(Vector3d(0.5, -0.5, 0));
  CHECK((ds.w().col(0) - Vector3d(1, -1, 0)).norm() < 1e-15);
  CHECK((ds.q().col(0) - Vector3d(0.70710678118654752, -0.70710678118654752, 0)).norm() < 1e-15);

  const auto e3 = init_dual<double>(Vector3d(0, 0, 1));
  CHECK(e3.w().col(0) == Vector3d(0, 0, 1));
  CHECK(e3.q().col(0) == Vector3d(0, 0, 1));

  const auto two = init_dual<double>(Eigen::Vector2d(2, 0));
  CHECK(two.w().col(0) == Eigen::Vector2d(0.5, 0));
  CHECK(two.q().col(0) == Eigen::Vector2d(1, 0));

  CHECK_THROWS_AS(init_dual<double>(Vector3d::Zero()), DegenerateAtom);
}

TEST_CASE("extend_duals") {
  auto ds = extend_duals(init_dual<double>(Vector3d(0.5, -0.5, 0)), Eigen::VectorXd(Vector3d(0, 0, 1)));
  REQUIRE(ds.size() == 2);
  CHECK((ds.q().col(1) - Vector3d(0, 0, 1)).norm() < 1e-15);
  CHECK((ds.w().col(1) - Vector3d(0, 0, 1)).norm() < 1e-15);
  CHECK((ds.w().col(0) - Vector3d(1, -1, 0)).norm() < 1e-15);

  const auto e1 = init_dual<double>(Vector3d(1, 0, 0));
  CHECK_THROWS_AS(extend_duals(e1, Eigen::VectorXd(Vector3d(1, 0, 0))), DependentAtom);
  CHECK_THROWS_AS(extend_duals(e1, Eigen::VectorXd(Eigen::Vector2d(1, 0))), DimensionMismatch);
}

TEST_CASE("extend_duals matches the closed form on a fixed 8-dim instance") {
  Eigen::MatrixXd u(8, 3);
  u << 1, 0, 2, 0, 1, 1, 3, 0, -1, 1, 1, 0, 0, 2, 1, -1, 0, 1, 2, 1, 0, 0, 0, 3;
  auto ds = init_dual<double>(Eigen::VectorXd(u.col(0)));
  ds = extend_duals(ds, Eigen::VectorXd(u.col(1)));
  ds = extend_duals(ds, Eigen::VectorXd(u.col(2)));
  // Closed form U (U^T U)^{-1} computed here with an LDLT solve.
  const Eigen::MatrixXd g = u.transpose() * u;
  const Eigen::MatrixXd w_ref = u * g.ldlt().solve(Eigen::MatrixXd::Identity(3, 3));
  CHECK((ds.w() - w_ref).norm() / w_ref.norm() < 1e-12);
  CHECK((ds.w().transpose() * u - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("extend_duals fault hook breaks biorthogonality") {
  Eigen::MatrixXd u(3, 2);
  u << 1, 1, 0, 1, 0, 0;
  ExtendOptions bad;
  bad.fault_flip_update_sign = true;
  const auto ds = extend_duals(init_dual<double>(Eigen::VectorXd(u.col(0))), Eigen::VectorXd(u.col(1)), -1, bad);
  CHECK(std::abs(ds.w().col(0).dot(u.col(1))) > 0.5);
}

TEST_CASE("apply_oblique") {
  const auto bg = diagonal_background();
  const Vector3d f(3, 1, 4);
  const auto ds = init_dual<double>(Vector3d(0.5, -0.5, 0));
  const Eigen::MatrixXd v = cols({Vector3d(1, 0, 0)});
  CHECK((apply_oblique(ds, v, f) - Vector3d(2, 0, 0)).norm() < 1e-15);
  // Annihilates the background, fixes the atom.
  CHECK(apply_oblique(ds, v, Vector3d(1, 1, 0)).norm() < 1e-15);
  CHECK((apply_oblique(ds, v, Vector3d(1, 0, 0)) - Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(apply_oblique(ds, cols({Vector3d(1, 0, 0), Vector3d(0, 1, 0)}), f), DimensionMismatch);
  (void)bg;
}

TEST_CASE("oracle_duals") {
  Eigen::MatrixXd u(3, 1);
  u << 0.5, -0.5, 0;
  CHECK((oracle_duals(u).col(0) - Vector3d(1, -1, 0)).norm() < 1e-14);
  const Eigen::MatrixXd e12 = cols({Vector3d(1, 0, 0), Vector3d(0, 1, 0)});
  CHECK((oracle_duals(e12) - e12).norm() < 1e-15);
  CHECK_THROWS_AS(oracle_duals(cols({Vector3d(1, 0, 0), Vector3d(2, 0, 0)})), SingularGram);
  try {
    oracle_duals(cols({Vector3d(1, 0, 0), Vector3d(2, 0, 0)}));
  } catch (const SingularGram& e) {
    CHECK(e.condition() > 1e12);
  }
}

TEST_CASE("oracle_duals agrees with the recursive chain on 10-dim k=4") {
  Eigen::MatrixXd u(10, 4);
  for (Index j = 0; j < 4; ++j)
    for (Index i = 0; i < 10; ++i) u(i, j) = std::sin(1.0 + i * 0.7 + j * j * 1.3) + (i == j ? 1.0 : 0.0);
  DualSet<double> ds;
  for (Index j = 0; j < 4; ++j) ds.extend(Eigen::VectorXd(u.col(j)), j);
  CHECK((ds.w() - oracle_duals(u)).norm() / ds.w().norm() < 1e-8);
}

TEST_CASE("oracle_oblique_projection") {
  const auto bg = diagonal_background();
  const Vector3d f(3, 1, 4);
  const auto one = oracle_oblique_projection(cols({Vector3d(1, 0, 0)}), bg, f);
  CHECK((one.projection - Vector3d(2, 0, 0)).norm() < 1e-14);
  const auto two = oracle_oblique_projection(cols({Vector3d(1, 0, 0), Vector3d(0, 0, 1)}), bg, f);
  CHECK((two.projection - Vector3d(2, 0, 4)).norm() < 1e-14);
  CHECK(((f - two.projection) - Vector3d(1, 1, 0)).norm() < 1e-14);

  const Eigen::MatrixXd singular = cols({Vector3d(1, 0, 0), Vector3d(0, 1, 0)});  // u_2 = -u_1
  CHECK_THROWS_AS(oracle_oblique_projection(singular, bg, f), SingularGram);
  OracleOptions loose;
  loose.require_full_rank = false;
  const auto flagged = oracle_oblique_projection(singular, bg, f, loose);
  CHECK(flagged.rank_deficient);
  CHECK(flagged.gram_condition > 1e12);
}

TEST_CASE("gram_condition") {
  CHECK(gram_condition(Eigen::MatrixXd::Identity(4, 3)) == doctest::Approx(1.0));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 2);
  d(0, 0) = 10;
  d(1, 1) = 1;
  CHECK(gram_condition(d) == doctest::Approx(100.0));
}
