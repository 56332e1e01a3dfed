#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fdakit/expansions.hpp"
#include "fdakit/sim.hpp"
#include "test_util.hpp"

using namespace fdakit;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double gram_dev(const ExpansionResult& r) {
  const Eigen::MatrixXd g = gram_matrix(r.functions, QuadRule::trapezoidal);
  return max_abs(g - Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

// Naive orthonormal DCT-II of an n1 x n2 image, straight from the definition.
Eigen::MatrixXd naive_dct2(const Eigen::MatrixXd& img) {
  const auto n1 = img.rows(), n2 = img.cols();
  auto c = [](Eigen::Index k, Eigen::Index j, Eigen::Index n) {
    const double a = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    return a * std::cos(std::numbers::pi * (j + 0.5) * k / n);
  };
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n1, n2);
  for (Eigen::Index k1 = 0; k1 < n1; ++k1)
    for (Eigen::Index k2 = 0; k2 < n2; ++k2)
      for (Eigen::Index j1 = 0; j1 < n1; ++j1)
        for (Eigen::Index j2 = 0; j2 < n2; ++j2) out(k1, k2) += img(j1, j2) * c(k1, j1, n1) * c(k2, j2, n2);
  return out;
}

}  // namespace

TEST_CASE("expand_given") {
  const Axis a = Axis::equispaced(0, 1, 1001);
  const auto basis = eval_basis(BasisKind::fourier, 7, a);

  SUBCASE("projection onto an orthonormal basis") {
    const auto x = extract_obs(basis, std::vector<std::size_t>{2});
    const auto r = expand_given(x, basis, std::nullopt, true);
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(7);
    e(2) = 1.0;
    CHECK(max_abs(r.scores - e) <= 1e-4);
    CHECK(r.orthonormal);
  }
  SUBCASE("scores pass through") {
    const auto x = testing::random_dense({a}, 3, 1);
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(3, 7);
    const auto r = expand_given(x, basis, s);
    CHECK(r.scores == s);
    CHECK_THROWS_AS(expand_given(x, basis, Eigen::MatrixXd::Zero(3, 6)), ValidationError);
  }
  SUBCASE("least squares on a non-orthonormal basis") {
    // Monomials 1, t, t^2, t^3 on a coarse grid; data exactly in their span.
    const Axis g = Axis::equispaced(0, 2, 41);
    Eigen::MatrixXd mono(4, 41);
    for (Eigen::Index k = 0; k < 4; ++k)
      for (Eigen::Index j = 0; j < 41; ++j) mono(k, j) = std::pow(g[static_cast<std::size_t>(j)], static_cast<double>(k));
    const DenseFunData b({g}, mono);
    Rng rng(2);
    Eigen::MatrixXd coef(5, 4);
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef.data()[i] = rng.normal();
    const DenseFunData x({g}, coef * mono);
    const auto r = expand_given(x, b);
    CHECK_FALSE(r.orthonormal);
    CHECK(max_abs(r.scores - coef) <= 1e-8);
    CHECK(max_abs(reconstruct(r).values() - x.values()) <= 1e-8);
  }
  SUBCASE("guards") {
    Eigen::MatrixXd dup(2, 1001);
    dup.row(0) = basis.values().row(1);
    dup.row(1) = basis.values().row(1);
    const auto x = testing::random_dense({a}, 2, 1);
    CHECK_THROWS_AS(expand_given(x, DenseFunData({a}, dup)), NumericError);
    CHECK_THROWS_AS(expand_given(testing::random_dense({Axis::equispaced(0, 1, 11)}, 2, 1), basis), ValidationError);
  }
}

TEST_CASE("orthonormalize") {
  const Axis a = Axis::equispaced(0, 1, 501);
  const auto basis = eval_basis(BasisKind::legendre, 5, a);
  const auto x = testing::random_dense({a}, 6, 3);

  const auto r = expand_given(x, basis, std::nullopt, true);
  const auto o = orthonormalize(r);
  CHECK(max_abs(o.functions.values() - r.functions.values()) <= 1e-10);
  CHECK(max_abs(o.scores - r.scores) <= 1e-10);

  const DenseFunData doubled({a}, 2.0 * basis.values());
  const auto d = orthonormalize(expand_given(x, doubled));
  CHECK(d.orthonormal);
  CHECK(max_abs(d.functions.values() - basis.values()) <= 1e-10);

  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd mix(5, 5);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = rng.normal();
    mix.diagonal().array() += 3.0;
    const DenseFunData skew({a}, mix * basis.values());
    const auto before = expand_given(x, skew);
    const auto after = orthonormalize(before);
    CHECK(max_abs(reconstruct(after).values() - reconstruct(before).values()) <= 1e-10);
    CHECK(gram_dev(after) <= 1e-10);
  }
}

TEST_CASE("expand_fpca") {
  const Axis a = Axis::equispaced(0, 1, 101);

  SUBCASE("recovers simulated eigenvalues") {
    const auto s = sim_fundata({a}, {5}, {BasisKind::fourier}, DecayKind::linear, 200, 11);
    const auto centered = arith(ArithOp::sub, s.data, mean_function(s.data));
    const auto r = expand_fpca(centered, 0.99, std::size_t{5});
    REQUIRE(r.values);
    for (Eigen::Index m = 0; m < 3; ++m) {
      CHECK(std::abs((*r.values)(m) - s.true_values(m)) <= 0.15 * s.true_values(m));
    }
    CHECK(gram_dev(r) <= 1e-3);
    for (Eigen::Index m = 1; m < r.values->size(); ++m) CHECK((*r.values)(m) <= (*r.values)(m - 1));
    CHECK(r.values->minCoeff() >= 0.0);
    // Scores are projections on the estimated functions.
    const Eigen::MatrixXd proj = centered.values() * quad_weights(a, QuadRule::trapezoidal).asDiagonal() *
                                 r.functions.values().transpose();
    CHECK(max_abs(proj - r.scores) <= 1e-10);
  }
  SUBCASE("span recovery") {
    const auto s = sim_fundata({a}, {4}, {BasisKind::wiener}, Eigen::Vector4d(4.0, 2.0, 1.0, 0.5), 500, 12);
    const auto r = expand_fpca(arith(ArithOp::sub, s.data, mean_function(s.data)), 0.99, std::size_t{4});
    const Eigen::VectorXd w = quad_weights(a, QuadRule::trapezoidal);
    const Eigen::MatrixXd cross = s.true_functions.values() * w.asDiagonal() * r.functions.values().transpose();
    for (Eigen::Index m = 0; m < 4; ++m) CHECK(cross.row(m).norm() >= 0.95);
  }
  SUBCASE("npc overrides pve") {
    const auto x = testing::random_dense({a}, 30, 4);
    CHECK(expand_fpca(x, 0.01, std::size_t{2}).scores.cols() == 2);
    CHECK(expand_fpca(x, 0.01).scores.cols() == 1);
    CHECK_THROWS_AS(expand_fpca(testing::random_dense({a}, 3, 4), 0.99, std::size_t{10}), NumericError);
  }
  SUBCASE("rank one") {
    Eigen::MatrixXd shape(1, 101);
    for (Eigen::Index j = 0; j < 101; ++j) shape(0, j) = std::sin(3.0 * a[static_cast<std::size_t>(j)]);
    Eigen::VectorXd amp(6);
    amp << -2, -1, 0.5, 0.7, 0.8, 1.0;
    const auto r = expand_fpca(DenseFunData({a}, amp * shape), 0.99);
    CHECK(r.scores.cols() == 1);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(expand_fpca(testing::random_dense({a}, 1, 4)), ValidationError);
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 101);
    m(1, 5) = kMissing;
    CHECK_THROWS_AS(expand_fpca(DenseFunData({a}, m)), ValidationError);
    CHECK_THROWS_AS(expand_fpca(testing::random_dense({a, a}, 3, 4)), ValidationError);
  }
}

TEST_CASE("expand_dct") {
  const Axis x = Axis::equispaced(0, 1, 8), y = Axis::equispaced(0, 3, 6);
  const auto img = testing::random_dense({x, y}, 4, 7);

  SUBCASE("coefficients match the naive transform") {
    const auto r = expand_dct(img, 0.0);
    REQUIRE(r.scores.cols() == 48);
    const double vol = (1.0 / 7.0) * (3.0 / 5.0);
    for (Eigen::Index i = 0; i < 4; ++i) {
      Eigen::MatrixXd pic(8, 6);
      for (Eigen::Index j = 0; j < 48; ++j) pic(j / 6, j % 6) = img.values()(i, j);
      const Eigen::MatrixXd ref = naive_dct2(pic) * std::sqrt(vol);
      double dev = 0.0;
      for (Eigen::Index j = 0; j < 48; ++j) dev = std::max(dev, std::abs(r.scores(i, j) - ref(j / 6, j % 6)));
      CHECK(dev <= 1e-10);
    }
    CHECK(max_abs(reconstruct(r).values() - img.values()) <= 1e-8);
  }
  SUBCASE("thresholding") {
    const auto big = testing::random_dense({Axis::equispaced(0, 1, 10), Axis::equispaced(0, 1, 12)}, 5, 8);
    const auto r = expand_dct(big, 0.9);
    const auto nonzero = (r.scores.array() != 0.0).count();
    CHECK(static_cast<double>(nonzero) <= 0.1 * 600.0);
    double prev = -1.0;
    for (double q : {0.0, 0.2, 0.5, 0.7, 0.9, 0.95}) {
      const double err = max_abs(reconstruct(expand_dct(big, q)).values() - big.values());
      CHECK(err >= prev - 1e-12);
      prev = err;
    }
  }
  SUBCASE("three dimensions") {
    const auto cube = testing::random_dense({Axis::equispaced(0, 1, 4), Axis::equispaced(0, 1, 5), Axis::equispaced(0, 1, 3)}, 2, 9);
    CHECK(max_abs(reconstruct(expand_dct(cube, 0.0)).values() - cube.values()) <= 1e-8);
  }
  SUBCASE("orthonormal under the rectangle rule") {
    const auto r = expand_dct(img, 0.0, QuadRule::midpoint);
    CHECK(r.scores.cols() == 48);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(expand_dct(testing::random_dense({x}, 2, 1), 0.5), ValidationError);
    CHECK_THROWS_AS(expand_dct(testing::random_dense({Axis({0, 0.1, 1}), y}, 2, 1), 0.5), ValidationError);
    CHECK_THROWS_AS(expand_dct(img, 1.0), ValidationError);
  }
}

TEST_CASE("expand dispatch") {
  const Axis a = Axis::equispaced(0, 1, 51);
  const auto x = testing::random_dense({a}, 10, 1);
  const auto r = expand(x, FpcaSpec{0.99, 3});
  CHECK(r.scores.cols() == 3);
  const auto basis = eval_basis(BasisKind::fourier, 3, a);
  CHECK(expand(x, GivenSpec{basis, std::nullopt, true}).scores.cols() == 3);
}
