#include "fdakit/ops.hpp"

#include <cmath>

namespace fdakit {

namespace {

using Eigen::Index;

double apply(ArithOp op, double a, double b) {
  if (is_missing(a) || is_missing(b)) return kMissing;
  switch (op) {
    case ArithOp::add: return a + b;
    case ArithOp::sub: return a - b;
    case ArithOp::mul: return a * b;
    case ArithOp::div:
      if (b == 0.0) throw NumericError("arith: division by zero");
      return a / b;
    case ArithOp::pow: return std::pow(a, b);
  }
  return kMissing;
}

double checked(double r, std::size_t obs) {
  if (std::isinf(r) || std::isnan(r)) {
    throw NumericError("non-finite result for observation " + std::to_string(obs + 1));
  }
  return r;
}

std::size_t broadcast_n(std::size_t na, std::size_t nb) {
  if (na == nb || nb == 1) return na;
  if (na == 1) return nb;
  throw ValidationError("arith: incompatible observation counts " + std::to_string(na) + " and " +
                        std::to_string(nb));
}

const std::vector<std::string>& result_names(std::size_t n, const std::vector<std::string>& a,
                                             std::size_t na, const std::vector<std::string>& b) {
  return na == n ? a : b;
}

Eigen::VectorXd integrate_rows(const Eigen::MatrixXd& values, const Eigen::VectorXd& w) {
  Eigen::VectorXd out(values.rows());
  for (Index i = 0; i < values.rows(); ++i) {
    double s = 0.0;
    for (Index c = 0; c < values.cols(); ++c) s += values(i, c) * w(c);
    out(i) = s;
  }
  return out;
}

double integrate_curve(const Axis& t, const std::vector<double>& x, QuadRule rule,
                       const IrregIntegrationPolicy& policy) {
  double s = 0.0;
  if (t.size() >= 2) {
    const Eigen::VectorXd w = quad_weights(t, rule);
    for (std::size_t j = 0; j < t.size(); ++j) s += w(static_cast<Index>(j)) * x[j];
  }
  if (const auto* full = std::get_if<FullDomain>(&policy)) {
    if (t.front() < full->lo || t.back() > full->hi) {
      throw ValidationError("integrate: observation points outside the full domain");
    }
    s += x.front() * (t.front() - full->lo) + x.back() * (full->hi - t.back());
  }
  return s;
}

Eigen::VectorXd finish_norm(Eigen::VectorXd sq, bool squared) {
  for (Index i = 0; i < sq.size(); ++i) {
    if (sq(i) < -1e-12) throw NumericError("norm: negative squared norm for observation " + std::to_string(i + 1));
    if (sq(i) < 0.0) sq(i) = 0.0;
  }
  if (!squared) sq = sq.array().sqrt();
  return sq;
}

}  // namespace

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw ValidationError("weights: empty weight vector");
  for (double v : w_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("weights: all weights must be positive and finite");
  }
}

// ---------------------------------------------------------------- maps

DenseFunData elementwise_map(const DenseFunData& x, const ScalarFn& fn) {
  Eigen::MatrixXd v = x.values();
  for (Index i = 0; i < v.rows(); ++i) {
    for (Index c = 0; c < v.cols(); ++c) {
      if (is_missing(v(i, c))) continue;
      v(i, c) = checked(fn(v(i, c)), static_cast<std::size_t>(i));
    }
  }
  return DenseFunData(x.argvals(), std::move(v), x.names());
}

IrregFunData elementwise_map(const IrregFunData& x, const ScalarFn& fn) {
  std::vector<std::vector<double>> t, v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    t.push_back(x.argvals()[i].points());
    for (double& e : v[i]) e = checked(fn(e), i);
  }
  return IrregFunData(std::move(t), std::move(v), x.names());
}

MultiFunData elementwise_map(const MultiFunData& x, const ScalarFn& fn) {
  std::vector<DenseFunData> el;
  for (const auto& e : x.elements()) el.push_back(elementwise_map(e, fn));
  return MultiFunData(std::move(el));
}

// ---------------------------------------------------------------- arithmetic

DenseFunData arith(ArithOp op, const DenseFunData& a, const DenseFunData& b) {
  if (a.argvals() != b.argvals()) throw ValidationError("arith: functions must share observation points");
  const std::size_t na = a.n_obs(), nb = b.n_obs();
  const std::size_t n = broadcast_n(na, nb);
  Eigen::MatrixXd v(static_cast<Index>(n), static_cast<Index>(a.n_cells()));
  for (std::size_t i = 0; i < n; ++i) {
    const Index ia = static_cast<Index>(na == 1 ? 0 : i);
    const Index ib = static_cast<Index>(nb == 1 ? 0 : i);
    for (Index c = 0; c < v.cols(); ++c) {
      const double r = apply(op, a.values()(ia, c), b.values()(ib, c));
      v(static_cast<Index>(i), c) = is_missing(a.values()(ia, c)) || is_missing(b.values()(ib, c)) ? r : checked(r, i);
    }
  }
  return DenseFunData(a.argvals(), std::move(v), result_names(n, a.names(), na, b.names()));
}

DenseFunData arith(ArithOp op, const DenseFunData& a, double b) {
  return elementwise_map(a, [&](double x) { return apply(op, x, b); });
}

DenseFunData arith(ArithOp op, double a, const DenseFunData& b) {
  return elementwise_map(b, [&](double x) { return apply(op, a, x); });
}

IrregFunData arith(ArithOp op, const IrregFunData& a, const IrregFunData& b) {
  const std::size_t na = a.n_obs(), nb = b.n_obs();
  const std::size_t n = broadcast_n(na, nb);
  std::vector<std::vector<double>> t(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ia = na == 1 ? 0 : i, ib = nb == 1 ? 0 : i;
    if (a.argvals()[ia] != b.argvals()[ib]) {
      throw ValidationError("arith: functions must share observation points (observation " + std::to_string(i + 1) + ")");
    }
    t[i] = a.argvals()[ia].points();
    for (std::size_t j = 0; j < t[i].size(); ++j) v[i].push_back(checked(apply(op, a.values()[ia][j], b.values()[ib][j]), i));
  }
  return IrregFunData(std::move(t), std::move(v), result_names(n, a.names(), na, b.names()));
}

IrregFunData arith(ArithOp op, const IrregFunData& a, double b) {
  return elementwise_map(a, [&](double x) { return apply(op, x, b); });
}

IrregFunData arith(ArithOp op, double a, const IrregFunData& b) {
  return elementwise_map(b, [&](double x) { return apply(op, a, x); });
}

MultiFunData arith(ArithOp op, const MultiFunData& a, const MultiFunData& b) {
  if (a.size() != b.size()) throw ValidationError("arith: multivariate objects differ in element count");
  std::vector<DenseFunData> el;
  for (std::size_t j = 0; j < a.size(); ++j) el.push_back(arith(op, a[j], b[j]));
  return MultiFunData(std::move(el));
}

MultiFunData arith(ArithOp op, const MultiFunData& a, double b) {
  std::vector<DenseFunData> el;
  for (const auto& e : a.elements()) el.push_back(arith(op, e, b));
  return MultiFunData(std::move(el));
}

MultiFunData arith(ArithOp op, double a, const MultiFunData& b) {
  std::vector<DenseFunData> el;
  for (const auto& e : b.elements()) el.push_back(arith(op, a, e));
  return MultiFunData(std::move(el));
}

DenseFunData operator+(const DenseFunData& a, const DenseFunData& b) { return arith(ArithOp::add, a, b); }
DenseFunData operator-(const DenseFunData& a, const DenseFunData& b) { return arith(ArithOp::sub, a, b); }
DenseFunData operator*(const DenseFunData& a, const DenseFunData& b) { return arith(ArithOp::mul, a, b); }
DenseFunData operator*(double a, const DenseFunData& b) { return arith(ArithOp::mul, a, b); }

// ---------------------------------------------------------------- means and products

DenseFunData mean_function(const DenseFunData& x) {
  Eigen::MatrixXd m(1, x.values().cols());
  for (Index c = 0; c < x.values().cols(); ++c) {
    double s = 0.0;
    std::size_t k = 0;
    for (Index i = 0; i < x.values().rows(); ++i) {
      const double v = x.values()(i, c);
      if (is_missing(v)) continue;
      s += v;
      ++k;
    }
    if (k == 0) throw ValidationError("mean: grid cell " + std::to_string(c + 1) + " has no observed value");
    m(0, c) = s / static_cast<double>(k);
  }
  return DenseFunData(x.argvals(), std::move(m));
}

IrregFunData mean_function(const IrregFunData& x) {
  const auto& t0 = x.argvals().front();
  std::vector<double> m(t0.size(), 0.0);
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    if (x.argvals()[i] != t0) throw ValidationError("mean: irregular curves must share observation points");
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += x.values()[i][j];
  }
  for (double& v : m) v /= static_cast<double>(x.n_obs());
  return IrregFunData({t0.points()}, {std::move(m)});
}

MultiFunData mean_function(const MultiFunData& x) {
  std::vector<DenseFunData> el;
  for (const auto& e : x.elements()) el.push_back(mean_function(e));
  return MultiFunData(std::move(el));
}

DenseFunData tensor_product(const DenseFunData& f, const DenseFunData& g) {
  if (f.dim() != 1 || g.dim() != 1) throw ValidationError("tensor product: both arguments must be one-dimensional");
  if (f.has_missing() || g.has_missing()) throw ValidationError("tensor product: missing values are not supported");
  const Index nf = f.values().rows(), ng = g.values().rows();
  const Index sf = f.values().cols(), sg = g.values().cols();
  Eigen::MatrixXd v(nf * ng, sf * sg);
  for (Index i = 0; i < nf; ++i) {
    for (Index k = 0; k < ng; ++k) {
      for (Index j = 0; j < sf; ++j) {
        for (Index l = 0; l < sg; ++l) v(i * ng + k, j * sg + l) = f.values()(i, j) * g.values()(k, l);
      }
    }
  }
  return DenseFunData({f.argvals()[0], g.argvals()[0]}, std::move(v));
}

// ---------------------------------------------------------------- quadrature

Eigen::VectorXd quad_weights(const Axis& axis, QuadRule rule) {
  const std::size_t s = axis.size();
  if (s < 2) throw ValidationError("quadrature: axis needs at least two points");
  Eigen::VectorXd w(static_cast<Index>(s));
  const auto& t = axis.points();
  switch (rule) {
    case QuadRule::trapezoidal:
      w(0) = (t[1] - t[0]) / 2.0;
      w(static_cast<Index>(s - 1)) = (t[s - 1] - t[s - 2]) / 2.0;
      for (std::size_t i = 1; i + 1 < s; ++i) w(static_cast<Index>(i)) = (t[i + 1] - t[i - 1]) / 2.0;
      break;
    case QuadRule::midpoint:
      for (std::size_t i = 0; i + 1 < s; ++i) w(static_cast<Index>(i)) = t[i + 1] - t[i];
      w(static_cast<Index>(s - 1)) = 0.0;
      break;
  }
  return w;
}

Eigen::VectorXd grid_weights(const std::vector<Axis>& axes, QuadRule rule) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  for (const auto& a : axes) {
    const Eigen::VectorXd wk = quad_weights(a, rule);
    Eigen::VectorXd next(w.size() * wk.size());
    for (Index i = 0; i < w.size(); ++i) {
      for (Index j = 0; j < wk.size(); ++j) next(i * wk.size() + j) = w(i) * wk(j);
    }
    w = std::move(next);
  }
  return w;
}

Eigen::VectorXd integrate(const DenseFunData& x, QuadRule rule) {
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    if (x.row_has_missing(i)) {
      throw ValidationError("integrate: observation " + std::to_string(i + 1) + " contains missing values");
    }
  }
  return integrate_rows(x.values(), grid_weights(x.argvals(), rule));
}

Eigen::VectorXd integrate(const IrregFunData& x, QuadRule rule, const IrregIntegrationPolicy& policy) {
  Eigen::VectorXd out(static_cast<Index>(x.n_obs()));
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    out(static_cast<Index>(i)) = integrate_curve(x.argvals()[i], x.values()[i], rule, policy);
  }
  return out;
}

Eigen::VectorXd integrate(const MultiFunData& x, QuadRule rule) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(x.n_obs()));
  for (const auto& e : x.elements()) out += integrate(e, rule);
  return out;
}

// ---------------------------------------------------------------- scalar products

Eigen::VectorXd scalar_product(const DenseFunData& f, const DenseFunData& g, QuadRule rule) {
  return integrate(arith(ArithOp::mul, f, g), rule);
}

Eigen::VectorXd scalar_product(const IrregFunData& f, const IrregFunData& g, QuadRule rule,
                               const IrregIntegrationPolicy& policy) {
  return integrate(arith(ArithOp::mul, f, g), rule, policy);
}

Eigen::VectorXd scalar_product(const MultiFunData& f, const MultiFunData& g, const std::optional<WeightVector>& weights,
                               QuadRule rule) {
  if (f.size() != g.size()) throw ValidationError("scalar product: element counts differ");
  if (weights && weights->size() != f.size()) {
    throw ValidationError("scalar product: expected " + std::to_string(f.size()) + " weights, got " +
                          std::to_string(weights->size()));
  }
  Eigen::VectorXd out;
  for (std::size_t j = 0; j < f.size(); ++j) {
    Eigen::VectorXd sp = scalar_product(f[j], g[j], rule);
    if (weights) sp *= (*weights)[j];
    if (j == 0) {
      out = std::move(sp);
    } else {
      out += sp;
    }
  }
  return out;
}

Eigen::VectorXd norm(const DenseFunData& x, bool squared, QuadRule rule) {
  return finish_norm(scalar_product(x, x, rule), squared);
}

Eigen::VectorXd norm(const IrregFunData& x, bool squared, QuadRule rule, const IrregIntegrationPolicy& policy) {
  return finish_norm(scalar_product(x, x, rule, policy), squared);
}

Eigen::VectorXd norm(const MultiFunData& x, bool squared, const std::optional<WeightVector>& weights, QuadRule rule) {
  return finish_norm(scalar_product(x, x, weights, rule), squared);
}

}  // namespace fdakit
