#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fdakit/mfpca.hpp"
#include "fdakit/sim.hpp"
#include "test_util.hpp"

using namespace fdakit;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

MultiFunData split_sample(std::size_t n, std::uint64_t seed, std::size_t m = 5) {
  const std::vector<ElementSystem> els = {{{Axis::equispaced(0, 1, 101)}, {m}, {BasisKind::fourier}},
                                          {{Axis::equispaced(0, 1, 101)}, {m}, {BasisKind::fourier}}};
  return sim_multifundata(MultiConstruction::split, els, DecayKind::linear, n, seed).data;
}

std::vector<ExpansionSpec> fpca_specs(std::size_t p, std::size_t npc) {
  return std::vector<ExpansionSpec>(p, FpcaSpec{0.99, npc});
}

// Trapezoid weights written out directly.
Eigen::VectorXd trap(const Axis& a) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a.size()));
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    w(static_cast<Eigen::Index>(j)) += 0.5 * (a[j + 1] - a[j]);
    w(static_cast<Eigen::Index>(j + 1)) += 0.5 * (a[j + 1] - a[j]);
  }
  return w;
}

}  // namespace

TEST_CASE("integrated_variance_weights") {
  const Axis a = Axis::equispaced(0, 1, 21);
  Eigen::MatrixXd pm(2, 21);
  pm.row(0).setConstant(std::sqrt(0.5));
  pm.row(1).setConstant(-std::sqrt(0.5));
  const auto unit = make_multi({DenseFunData({a}, pm)});
  CHECK(integrated_variance_weights(unit).values()[0] == doctest::Approx(1.0).epsilon(1e-12));

  const auto x = testing::random_dense({a}, 10, 3);
  const auto w = integrated_variance_weights(make_multi({x, 2.0 * x}));
  CHECK(rel(w.values()[1], w.values()[0] / 4.0) <= 1e-12);

  const auto s = split_sample(300, 4);
  const auto ws = integrated_variance_weights(s);
  CHECK(rel(ws.values()[0], ws.values()[1]) <= 0.2);

  CHECK_THROWS_AS(integrated_variance_weights(make_multi({DenseFunData({a}, Eigen::MatrixXd::Ones(3, 21))})),
                  NumericError);
}

TEST_CASE("mfpca matches the kernel eigenproblem") {
  // With full-rank univariate expansions the MFPCA spectrum equals that of the
  // N x N matrix sum_j w_j X_j W_j X_j^T / (N - 1) on centred data.
  const std::size_t n = 12;
  const auto a = testing::random_dense({Axis::equispaced(0, 1, 31)}, n, 1);
  const auto b = testing::random_dense({Axis::equispaced(-1, 2, 17)}, n, 2);
  const auto data = make_multi({a, b});
  const WeightVector w({0.7, 2.5});
  MFPCAOptions opts;
  opts.weights = w;
  const auto fit = mfpca(data, 6, fpca_specs(2, n - 1), opts);

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& el = data[j];
    const Eigen::MatrixXd c = el.values().rowwise() - el.values().colwise().mean();
    k += w.values()[j] * c * trap(el.argvals()[0]).asDiagonal() * c.transpose();
  }
  k /= static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  for (Eigen::Index m = 0; m < 6; ++m) {
    CHECK(rel(fit.values(m), es.eigenvalues()(static_cast<Eigen::Index>(n) - 1 - m)) <= 1e-8);
  }
  // Scores are eigenvectors of K scaled by sqrt((N - 1) nu).
  for (Eigen::Index m = 0; m < 6; ++m) {
    const Eigen::VectorXd u = es.eigenvectors().col(static_cast<Eigen::Index>(n) - 1 - m);
    const Eigen::VectorXd s = fit.scores.col(m) / std::sqrt(static_cast<double>(n - 1) * fit.values(m));
    CHECK(std::abs(std::abs(u.dot(s)) - 1.0) <= 1e-8);
  }
}

TEST_CASE("mfpca internal consistency") {
  // Noise keeps all ten joint eigenvalues away from zero.
  const auto data = add_error(split_sample(60, 5), {0.2, 0.2}, 1);
  const auto fit = mfpca(data, 10, fpca_specs(2, 5));
  const Eigen::Index mp = fit.joint_covariance.rows();
  CHECK(mp == 10);
  CHECK(fit.combined_scores.rows() == 60);
  CHECK(fit.vectors.rows() == 10);
  CHECK(fit.vectors.cols() == 10);
  CHECK(max_abs(fit.joint_covariance - fit.joint_covariance.transpose()) == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(fit.joint_covariance).eigenvalues().minCoeff() >= -1e-10);
  CHECK(rel(fit.values.sum(), fit.joint_covariance.trace()) <= 1e-8);
  const double nm1 = 59.0;
  const Eigen::MatrixXd sc = fit.scores.transpose() * fit.scores / nm1;
  for (Eigen::Index m = 0; m < 10; ++m) {
    CHECK(rel(sc(m, m), fit.values(m)) <= 1e-8);
    for (Eigen::Index l = 0; l < 10; ++l)
      if (l != m) CHECK(std::abs(sc(m, l)) <= 1e-8 * fit.values.maxCoeff());
  }
  for (Eigen::Index m = 1; m < 10; ++m) CHECK(fit.values(m) <= fit.values(m - 1));
  for (std::size_t m = 0; m < 10; ++m)
    for (std::size_t l = 0; l < 10; ++l) {
      const double ip = weighted_inner(fit.functions, m, fit.functions, l, fit.weights, QuadRule::trapezoidal);
      CHECK(std::abs(ip - (m == l ? 1.0 : 0.0)) <= 1e-2);
    }
  for (Eigen::Index m = 0; m < 10; ++m) {
    Eigen::Index arg;
    fit.vectors.col(m).cwiseAbs().maxCoeff(&arg);
    CHECK(fit.vectors(arg, m) > 0.0);
  }
  CHECK(fit.norm_factors == Eigen::VectorXd::Ones(10));
  CHECK(fit.block_sizes == std::vector<std::size_t>{5, 5});
}

TEST_CASE("single element with the true basis") {
  const Axis a = Axis::equispaced(0, 1, 201);
  const auto sim = sim_fundata({a}, {4}, {BasisKind::fourier}, DecayKind::linear, 80, 9);
  const auto data = make_multi({sim.data});
  const auto fit = mfpca(data, 4, {GivenSpec{sim.true_functions, std::nullopt, true}});
  // Z is the covariance of the basis projections of the centred data.
  const Eigen::MatrixXd c = sim.data.values().rowwise() - sim.data.values().colwise().mean();
  const Eigen::MatrixXd xi = c * trap(a).asDiagonal() * sim.true_functions.values().transpose();
  CHECK(max_abs(fit.joint_covariance - xi.transpose() * xi / 79.0) <= 1e-10);
  const auto back = predict(fit);
  CHECK(max_abs(back[0].values() - sim.data.values()) <= 1e-6);
}

TEST_CASE("weight scaling") {
  const auto data = split_sample(50, 6);
  MFPCAOptions o1, o4;
  o1.weights = WeightVector({1.0, 3.0});
  o4.weights = WeightVector({4.0, 12.0});
  const auto f1 = mfpca(data, 4, fpca_specs(2, 4), o1);
  const auto f4 = mfpca(data, 4, fpca_specs(2, 4), o4);
  for (Eigen::Index m = 0; m < 4; ++m) CHECK(rel(f4.values(m), 4.0 * f1.values(m)) <= 1e-8);
  for (std::size_t j = 0; j < 2; ++j) {
    const Eigen::MatrixXd d = f4.functions[j].values() - f1.functions[j].values() / 2.0;
    CHECK(max_abs(d) <= 1e-8 * max_abs(f1.functions[j].values()));
  }
}

TEST_CASE("predict") {
  const auto data = split_sample(40, 7);
  const auto fit = mfpca(data, 10, fpca_specs(2, 5));
  SUBCASE("zero scores give the mean") {
    const auto z = predict(fit, Eigen::MatrixXd::Zero(3, 10));
    CHECK(n_obs(z) == 3);
    for (std::size_t j = 0; j < 2; ++j)
      for (Eigen::Index i = 0; i < 3; ++i) CHECK(max_abs(z[j].values().row(i) - fit.mean_function[j].values()) == 0.0);
    CHECK_THROWS_AS(predict(fit, Eigen::MatrixXd::Zero(3, 9)), ValidationError);
  }
  SUBCASE("complete basis reproduces the data") {
    const auto p = predict(fit);
    for (std::size_t j = 0; j < 2; ++j) CHECK(max_abs(p[j].values() - data[j].values()) <= 1e-6);
    MFPCAOptions o;
    o.fit = true;
    const auto with_fit = mfpca(data, 10, fpca_specs(2, 5), o);
    REQUIRE(with_fit.fit);
    CHECK(identical(*with_fit.fit, p));
  }
  SUBCASE("error is non-increasing in M") {
    const auto noisy = add_error(data, {0.3, 0.3}, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= 10; ++m) {
      const auto f = mfpca(noisy, m, fpca_specs(2, 5));
      const auto r = arith(ArithOp::sub, predict(f), noisy);
      const double err = norm(r, true).sum();
      CHECK(err <= prev * (1 + 1e-12));
      prev = err;
    }
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(mfpca(data, 11, fpca_specs(2, 5)), ValidationError);
    CHECK_THROWS_AS(mfpca(data, 0, fpca_specs(2, 5)), ValidationError);
    CHECK_THROWS_AS(mfpca(data, 2, fpca_specs(1, 5)), ValidationError);
  }
}

TEST_CASE("scree and score tables") {
  const auto data = split_sample(35, 8);
  auto fit = mfpca(data, 4, fpca_specs(2, 3));
  const auto rows = screeplot_data(fit);
  CHECK(rows.size() == 4);
  CHECK(rows.back().cumulative == 1.0);
  CHECK(rows.front().proportion > 0.5 * 0 + rows.back().proportion);

  auto two = fit;
  two.values = Eigen::Vector2d(3.0, 1.0);
  const auto tr = screeplot_data(two);
  CHECK(tr[0].proportion == 0.75);
  CHECK(tr[1].proportion == 0.25);
  CHECK(tr[1].cumulative == 1.0);

  const auto sp = scoreplot_data(fit, 1, 2);
  CHECK(sp.size() == 35);
  for (std::size_t i = 0; i < 35; ++i) {
    CHECK(sp[i].first == fit.scores(static_cast<Eigen::Index>(i), 0));
    CHECK(sp[i].second == fit.scores(static_cast<Eigen::Index>(i), 1));
  }
  CHECK(sp[0].label == "1");
  const auto same = scoreplot_data(fit, 3, 3);
  for (const auto& r : same) CHECK(r.first == r.second);
  CHECK_THROWS_AS(scoreplot_data(fit, 0, 1), ValidationError);
  CHECK_THROWS_AS(scoreplot_data(fit, 1, 5), ValidationError);

  // Rapid decay puts most variance in the first component.
  const std::vector<ElementSystem> els = {{{Axis::equispaced(0, 1, 51)}, {6}, {BasisKind::fourier}},
                                          {{Axis::equispaced(0, 1, 51)}, {6}, {BasisKind::fourier}}};
  const auto fast = sim_multifundata(MultiConstruction::split, els, DecayKind::wiener, 100, 3).data;
  CHECK(screeplot_data(mfpca(fast, 4, fpca_specs(2, 4)))[0].proportion > 0.5);
}

TEST_CASE("recovery on the split design") {
  // Large N: sampling error of the eigenvalues is about 3%.
  const std::vector<ElementSystem> els = {{{Axis::equispaced(0, 1, 101)}, {5}, {BasisKind::fourier}},
                                          {{Axis::equispaced(0, 1, 101)}, {5}, {BasisKind::fourier}}};
  const auto sim = sim_multifundata(MultiConstruction::split, els, DecayKind::linear, 2000, 10);
  const auto fit = mfpca(sim.data, 5, fpca_specs(2, 5));
  for (Eigen::Index m = 0; m < 3; ++m) CHECK(rel(fit.values(m), sim.true_values(m)) <= 0.15);
  for (std::size_t m = 0; m < 3; ++m) {
    const double ip = weighted_inner(fit.functions, m, sim.true_functions, m, fit.weights, QuadRule::trapezoidal);
    CHECK(std::abs(ip) >= 0.95);
  }
}

TEST_CASE("bootstrap") {
  const auto data = split_sample(30, 11);
  const auto uni = fpca_specs(2, 3);
  const auto fit = mfpca(data, 3, uni);

  SUBCASE("identical resamples give zero-width bands") {
    std::vector<std::size_t> id(30);
    for (std::size_t i = 0; i < 30; ++i) id[i] = i;
    const auto bands = bootstrap_bands_from_indices(data, 3, uni, {}, {id, id}, 0.05);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(max_abs(bands.lower[j].values() - fit.functions[j].values()) <= 1e-12);
      CHECK(max_abs(bands.upper[j].values() - fit.functions[j].values()) <= 1e-12);
    }
    CHECK(max_abs(bands.values_ci.col(0) - fit.values) <= 1e-12);
    CHECK(max_abs(bands.values_ci.col(1) - fit.values) <= 1e-12);
  }
  SUBCASE("bands are ordered and reproducible") {
    const BootstrapOptions bo{20, 0.1, 5};
    const auto b1 = bootstrap_bands(data, 3, uni, {}, bo);
    const auto b2 = bootstrap_bands(data, 3, uni, {}, bo);
    CHECK(identical(b1.lower, b2.lower));
    CHECK(identical(b1.upper, b2.upper));
    CHECK(b1.replicates == 20);
    CHECK(b1.alpha == 0.1);
    for (std::size_t j = 0; j < 2; ++j) CHECK((b1.upper[j].values() - b1.lower[j].values()).minCoeff() >= 0.0);
    CHECK((b1.values_ci.col(1) - b1.values_ci.col(0)).minCoeff() >= 0.0);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(bootstrap_bands(data, 3, uni, {}, {1, 0.05, 1}), ValidationError);
    CHECK_THROWS_AS(bootstrap_bands(data, 3, uni, {}, {10, 1.0, 1}), ValidationError);
  }
}
