#pragma once

#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "fdakit/core.hpp"
#include "fdakit/ops.hpp"

namespace fdakit {

/// Fixed basis functions on the element's grid, optionally with precomputed scores.
struct GivenSpec {
  DenseFunData functions;
  std::optional<Eigen::MatrixXd> scores;
  bool ortho = false;
};

/// Unsmoothed grid FPCA; npc, when set, overrides pve.
struct FpcaSpec {
  double pve = 0.99;
  std::optional<std::size_t> npc;
};

/// Orthonormal tensor cosine basis with the q_thresh share of coefficients zeroed.
struct DctSpec {
  double q_thresh = 0.0;
};

using ExpansionSpec = std::variant<GivenSpec, FpcaSpec, DctSpec>;

/// Univariate representation x_i ~ sum_k scores(i, k) functions_k.
struct ExpansionResult {
  Eigen::MatrixXd scores;  // N x M_j
  DenseFunData functions;  // M_j observations
  std::optional<Eigen::VectorXd> values;
  bool orthonormal = false;
};

/// Gram matrix G(k, l) = <B_k, B_l> of the observations of a dense container.
Eigen::MatrixXd gram_matrix(const DenseFunData& functions, QuadRule rule);

ExpansionResult expand_given(const DenseFunData& data, const DenseFunData& functions,
                             const std::optional<Eigen::MatrixXd>& scores = std::nullopt, bool ortho = false,
                             QuadRule rule = QuadRule::trapezoidal);

/// Cholesky orthonormalization; fitted values are unchanged.
ExpansionResult orthonormalize(const ExpansionResult& r, QuadRule rule = QuadRule::trapezoidal);

ExpansionResult expand_fpca(const DenseFunData& data, double pve = 0.99, std::optional<std::size_t> npc = std::nullopt,
                            QuadRule rule = QuadRule::trapezoidal);

ExpansionResult expand_dct(const DenseFunData& data, double q_thresh, QuadRule rule = QuadRule::trapezoidal);

/// Dispatches on the spec variant.
ExpansionResult expand(const DenseFunData& data, const ExpansionSpec& spec, QuadRule rule = QuadRule::trapezoidal);

/// Fitted values scores * functions as a dense container on the basis grid.
DenseFunData reconstruct(const ExpansionResult& r);

}  // namespace fdakit
