#include "fdakit/expansions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fdakit {

namespace {

using Eigen::Index;

void require_complete(const DenseFunData& x, const char* what) {
  if (x.has_missing()) throw ValidationError(std::string(what) + ": missing values are not supported");
}

// Orthonormal DCT-II matrix: row k is c_k cos(pi k (2j + 1) / 2S).
Eigen::MatrixXd dct_matrix(std::size_t s) {
  Eigen::MatrixXd c(static_cast<Index>(s), static_cast<Index>(s));
  const double n = static_cast<double>(s);
  for (std::size_t k = 0; k < s; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t j = 0; j < s; ++j) {
      c(static_cast<Index>(k), static_cast<Index>(j)) =
          scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(j) + 1.0) / (2.0 * n));
    }
  }
  return c;
}

// Applies m along dimension k of a row-major tensor with the given shape.
Eigen::VectorXd apply_along(const Eigen::VectorXd& v, const std::vector<std::size_t>& shape, std::size_t k,
                            const Eigen::MatrixXd& m) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < k; ++a) outer *= shape[a];
  for (std::size_t a = k + 1; a < shape.size(); ++a) inner *= shape[a];
  const std::size_t s = shape[k];
  Eigen::VectorXd out(v.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      for (std::size_t r = 0; r < s; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
          acc += m(static_cast<Index>(r), static_cast<Index>(j)) * v(static_cast<Index>((o * s + j) * inner + in));
        }
        out(static_cast<Index>((o * s + r) * inner + in)) = acc;
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd gram_matrix(const DenseFunData& functions, QuadRule rule) {
  require_complete(functions, "gram matrix");
  const Eigen::VectorXd w = grid_weights(functions.argvals(), rule);
  const Eigen::MatrixXd& b = functions.values();
  Eigen::MatrixXd g = b * w.asDiagonal() * b.transpose();
  return (g + g.transpose()) / 2.0;
}

ExpansionResult expand_given(const DenseFunData& data, const DenseFunData& functions,
                             const std::optional<Eigen::MatrixXd>& scores, bool ortho, QuadRule rule) {
  if (data.argvals() != functions.argvals()) {
    throw ValidationError("given basis: functions must share the data's observation points");
  }
  const Index n = static_cast<Index>(data.n_obs());
  const Index k = static_cast<Index>(functions.n_obs());
  if (scores) {
    if (scores->rows() != n || scores->cols() != k) {
      throw ValidationError("given basis: scores must be " + std::to_string(n) + " x " + std::to_string(k));
    }
    return {*scores, functions, std::nullopt, ortho};
  }
  require_complete(data, "given basis");
  require_complete(functions, "given basis");
  const Eigen::VectorXd w = grid_weights(data.argvals(), rule);
  // Column i holds <x_i, B_k> for all k.
  const Eigen::MatrixXd proj = functions.values() * w.asDiagonal() * data.values().transpose();
  if (ortho) return {proj.transpose(), functions, std::nullopt, true};

  const Eigen::MatrixXd g = gram_matrix(functions, rule);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) throw NumericError("given basis: Gram matrix is singular or ill-conditioned");
  const Eigen::MatrixXd coef = g.ldlt().solve(proj);
  return {coef.transpose(), functions, std::nullopt, false};
}

ExpansionResult orthonormalize(const ExpansionResult& r, QuadRule rule) {
  const Eigen::MatrixXd g = gram_matrix(r.functions, rule);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw NumericError("orthonormalize: Gram matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd f = llt.matrixL().solve(r.functions.values());
  Eigen::MatrixXd s = r.scores * l;
  return {std::move(s), DenseFunData(r.functions.argvals(), std::move(f)), r.values, true};
}

ExpansionResult expand_fpca(const DenseFunData& data, double pve, std::optional<std::size_t> npc, QuadRule rule) {
  if (data.dim() != 1) throw ValidationError("fpca: only one-dimensional domains are supported");
  if (data.n_obs() < 2) throw ValidationError("fpca: needs at least two observations");
  require_complete(data, "fpca");
  if (!npc && !(pve > 0.0 && pve <= 1.0)) throw ValidationError("fpca: pve must lie in (0, 1]");
  if (npc && *npc == 0) throw ValidationError("fpca: npc must be positive");

  const Eigen::MatrixXd& x = data.values();
  const Index s = x.cols();
  const Eigen::VectorXd w = quad_weights(data.argvals()[0], rule);
  const Eigen::VectorXd sw = w.array().sqrt();
  Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(x.rows() - 1);
  cov = ((cov + cov.transpose()) / 2.0).eval();
  const Eigen::MatrixXd a = sw.asDiagonal() * cov * sw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericError("fpca: eigendecomposition failed");

  // Descending order.
  Eigen::VectorXd lambda = es.eigenvalues().reverse();
  const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
  const double top = lambda(0);
  if (!(top > 0.0)) throw NumericError("fpca: data has no variation");
  Index positive = 0;
  for (Index m = 0; m < s; ++m) {
    if (lambda(m) > top * 1e-12) {
      ++positive;
    } else {
      lambda(m) = std::max(lambda(m), 0.0);
    }
  }

  Index keep = 0;
  if (npc) {
    if (static_cast<Index>(*npc) > positive) {
      throw NumericError("fpca: npc = " + std::to_string(*npc) + " exceeds the " + std::to_string(positive) +
                         " positive eigenvalues");
    }
    keep = static_cast<Index>(*npc);
  } else {
    const double total = lambda.head(positive).sum();
    double cum = 0.0;
    for (Index m = 0; m < positive; ++m) {
      cum += lambda(m);
      keep = m + 1;
      if (cum / total >= pve - 1e-12) break;
    }
  }
  keep = std::max<Index>(keep, 1);

  Eigen::MatrixXd phi(keep, s);
  for (Index m = 0; m < keep; ++m) {
    const Eigen::VectorXd v = vecs.col(m);
    Eigen::VectorXd nystrom;
    for (Index j = 0; j < s; ++j) {
      if (w(j) > 0.0) {
        phi(m, j) = v(j) / sw(j);
      } else {
        if (nystrom.size() == 0) nystrom = cov * (sw.asDiagonal() * v) / lambda(m);
        phi(m, j) = nystrom(j);
      }
    }
    Index arg = 0;
    phi.row(m).cwiseAbs().maxCoeff(&arg);
    if (phi(m, arg) < 0.0) phi.row(m) *= -1.0;
  }
  Eigen::MatrixXd scores = x * w.asDiagonal() * phi.transpose();
  return {std::move(scores), DenseFunData(data.argvals(), std::move(phi)), lambda.head(keep), true};
}

ExpansionResult expand_dct(const DenseFunData& data, double q_thresh, QuadRule rule) {
  if (data.dim() != 2 && data.dim() != 3) throw ValidationError("dct: only 2- and 3-dimensional domains are supported");
  if (!(q_thresh >= 0.0 && q_thresh < 1.0)) throw ValidationError("dct: q_thresh must lie in [0, 1)");
  require_complete(data, "dct");
  const auto shape = data.shape();
  std::vector<Eigen::MatrixXd> c;
  double cell_volume = 1.0;
  for (const auto& a : data.argvals()) {
    if (a.size() < 2) throw ValidationError("dct: every axis needs at least two points");
    if (!a.is_equispaced()) throw ValidationError("dct: axes must be equispaced");
    c.push_back(dct_matrix(a.size()));
    cell_volume *= (a.back() - a.front()) / static_cast<double>(a.size() - 1);
  }

  const Index n = static_cast<Index>(data.n_obs());
  const Index p = static_cast<Index>(data.n_cells());
  Eigen::MatrixXd coef(n, p);
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = data.values().row(i).transpose();
    for (std::size_t k = 0; k < shape.size(); ++k) v = apply_along(v, shape, k, c[k]);
    coef.row(i) = v.transpose();
  }

  // Zero the ceil(q * n) smallest magnitudes across all observations; ties break by position.
  const std::size_t total = static_cast<std::size_t>(coef.size());
  const auto n_zero = static_cast<std::size_t>(std::max(0.0, std::ceil(q_thresh * static_cast<double>(total) - 1e-9)));
  if (n_zero > 0) {
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    const double* d = coef.data();
    std::stable_sort(order.begin(), order.end(),
                     [d](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
    for (std::size_t k = 0; k < n_zero; ++k) coef.data()[order[k]] = 0.0;
  }

  std::vector<Index> retained;
  for (Index cell = 0; cell < p; ++cell) {
    if ((coef.col(cell).array() != 0.0).any()) retained.push_back(cell);
  }
  if (retained.empty()) retained.push_back(0);

  const double scale = std::sqrt(cell_volume);
  const Index m = static_cast<Index>(retained.size());
  Eigen::MatrixXd funs(m, p);
  Eigen::MatrixXd scores(n, m);
  for (Index r = 0; r < m; ++r) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(p);
    unit(retained[static_cast<std::size_t>(r)]) = 1.0;
    // Inverse transform of a unit coefficient: C^T along every axis.
    for (std::size_t k = 0; k < shape.size(); ++k) unit = apply_along(unit, shape, k, c[k].transpose());
    funs.row(r) = unit.transpose() / scale;
    scores.col(r) = coef.col(retained[static_cast<std::size_t>(r)]) * scale;
  }

  // The cosine basis is orthonormal for the uniform rectangle rule; under the
  // chosen rule the Gram matrix factorizes over axes.
  std::vector<Eigen::MatrixXd> g1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const Eigen::VectorXd w = quad_weights(data.argvals()[k], rule);
    const double h = (data.argvals()[k].back() - data.argvals()[k].front()) / static_cast<double>(shape[k] - 1);
    g1.push_back(c[k] * w.asDiagonal() * c[k].transpose() / h);
  }
  double dev = 0.0;
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      std::size_t ia = static_cast<std::size_t>(retained[static_cast<std::size_t>(a)]);
      std::size_t ib = static_cast<std::size_t>(retained[static_cast<std::size_t>(b)]);
      double g = 1.0;
      for (std::size_t k = shape.size(); k-- > 0;) {
        g *= g1[k](static_cast<Index>(ia % shape[k]), static_cast<Index>(ib % shape[k]));
        ia /= shape[k];
        ib /= shape[k];
      }
      dev = std::max(dev, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  return {std::move(scores), DenseFunData(data.argvals(), std::move(funs)), std::nullopt, dev <= 1e-3};
}

ExpansionResult expand(const DenseFunData& data, const ExpansionSpec& spec, QuadRule rule) {
  return std::visit(
      [&](const auto& s) -> ExpansionResult {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GivenSpec>) {
          return expand_given(data, s.functions, s.scores, s.ortho, rule);
        } else if constexpr (std::is_same_v<T, FpcaSpec>) {
          return expand_fpca(data, s.pve, s.npc, rule);
        } else {
          return expand_dct(data, s.q_thresh, rule);
        }
      },
      spec);
}

DenseFunData reconstruct(const ExpansionResult& r) {
  return DenseFunData(r.functions.argvals(), r.scores * r.functions.values());
}

}  // namespace fdakit
