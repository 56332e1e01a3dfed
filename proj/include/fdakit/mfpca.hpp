#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdakit/core.hpp"
#include "fdakit/expansions.hpp"
#include "fdakit/ops.hpp"

namespace fdakit {

/// Estimated multivariate principal components.
struct MFPCAFit {
  MultiFunData mean_function;      // N = 1
  MultiFunData functions;          // M observations
  Eigen::VectorXd values;          // M, non-increasing
  Eigen::MatrixXd scores;          // N x M
  Eigen::MatrixXd vectors;         // M_+ x M
  Eigen::VectorXd norm_factors;    // M, all ones
  WeightVector weights;
  std::optional<MultiFunData> fit;
  std::vector<std::string> labels;  // observation labels, length N

  // Intermediates of the estimator, kept for diagnostics; not serialized.
  Eigen::MatrixXd combined_scores;   // Xi, N x M_+
  Eigen::MatrixXd joint_covariance;  // Z = Xi^T Xi / (N - 1)
  std::vector<std::size_t> block_sizes;  // M_j per element
};

WeightVector integrated_variance_weights(const MultiFunData& data, QuadRule rule = QuadRule::trapezoidal);

struct MFPCAOptions {
  std::optional<WeightVector> weights;  // defaults to all ones
  bool fit = false;
  QuadRule rule = QuadRule::trapezoidal;
};

MFPCAFit mfpca(const MultiFunData& data, std::size_t m, const std::vector<ExpansionSpec>& uni,
               const MFPCAOptions& opts = {});

/// mean + sum_m scores(i, m) psi_m; scores default to fit.scores.
MultiFunData predict(const MFPCAFit& fit, const std::optional<Eigen::MatrixXd>& scores = std::nullopt);

struct ScreeRow {
  std::size_t component;
  double value;
  double proportion;
  double cumulative;
};
std::vector<ScreeRow> screeplot_data(const MFPCAFit& fit);

struct ScoreRow {
  std::string label;
  double first;
  double second;
};
/// dims are 1-based component indices.
std::vector<ScoreRow> scoreplot_data(const MFPCAFit& fit, std::size_t a = 1, std::size_t b = 2);

struct BootstrapBands {
  MultiFunData lower;
  MultiFunData upper;
  Eigen::MatrixXd values_ci;  // M x 2
  double alpha;
  std::size_t replicates;
};

struct BootstrapOptions {
  std::size_t replicates = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

/// Nonparametric bootstrap over observations. Replicate b draws its indices
/// from Rng::substream(seed, b).
BootstrapBands bootstrap_bands(const MultiFunData& data, std::size_t m, const std::vector<ExpansionSpec>& uni,
                               const MFPCAOptions& opts, const BootstrapOptions& boot);

/// Bootstrap on caller-supplied resamples; each entry lists N observation indices.
BootstrapBands bootstrap_bands_from_indices(const MultiFunData& data, std::size_t m,
                                            const std::vector<ExpansionSpec>& uni, const MFPCAOptions& opts,
                                            const std::vector<std::vector<std::size_t>>& resamples, double alpha);

/// Weighted multivariate inner product between component a of x and component b of y.
double weighted_inner(const MultiFunData& x, std::size_t a, const MultiFunData& y, std::size_t b,
                      const WeightVector& w, QuadRule rule);

}  // namespace fdakit
