#include "fdakit/sim.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace fdakit {

namespace {

using Eigen::Index;
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Fourier index (0-based) 2k-1 is sin(2 pi k s), 2k is cos(2 pi k s), 0 is the constant.
double fourier_unit(std::size_t idx, double s) {
  if (idx == 0) return 1.0;
  const double k = static_cast<double>((idx + 1) / 2);
  return idx % 2 == 1 ? kSqrt2 * std::sin(2.0 * kPi * k * s) : kSqrt2 * std::cos(2.0 * kPi * k * s);
}

// s minus its L2 projection onto the first `size` Fourier functions, normalized.
// <s, 1> = 1/2, <s, sqrt2 sin(2 pi k s)> = -sqrt2 / (2 pi k), <s, sqrt2 cos(2 pi k s)> = 0.
double fourier_lin_unit(std::size_t size, double s) {
  double r = s;
  double sq = 1.0 / 3.0;
  if (size >= 1) {
    r -= 0.5;
    sq -= 0.25;
  }
  for (std::size_t idx = 1; idx < size; idx += 2) {
    const double k = static_cast<double>((idx + 1) / 2);
    r += std::sin(2.0 * kPi * k * s) / (kPi * k);
    sq -= 1.0 / (2.0 * kPi * kPi * k * k);
  }
  return r / std::sqrt(sq);
}

Eigen::MatrixXd basis_unit(BasisKind kind, std::size_t m, const std::vector<double>& s) {
  const Index n = static_cast<Index>(s.size());
  Eigen::MatrixXd v(static_cast<Index>(m), n);
  switch (kind) {
    case BasisKind::fourier:
      for (std::size_t k = 0; k < m; ++k)
        for (Index j = 0; j < n; ++j) v(static_cast<Index>(k), j) = fourier_unit(k, s[j]);
      break;
    case BasisKind::fourier_lin:
      for (std::size_t k = 0; k + 1 < m; ++k)
        for (Index j = 0; j < n; ++j) v(static_cast<Index>(k), j) = fourier_unit(k, s[j]);
      for (Index j = 0; j < n; ++j) v(static_cast<Index>(m - 1), j) = fourier_lin_unit(m - 1, s[j]);
      break;
    case BasisKind::wiener:
      for (std::size_t k = 0; k < m; ++k) {
        const double f = (2.0 * static_cast<double>(k + 1) - 1.0) * kPi / 2.0;
        for (Index j = 0; j < n; ++j) v(static_cast<Index>(k), j) = kSqrt2 * std::sin(f * s[j]);
      }
      break;
    case BasisKind::legendre:
      if (m > kLegendreMaxM) {
        throw ValidationError("legendre basis: at most " + std::to_string(kLegendreMaxM) + " functions supported");
      }
      for (Index j = 0; j < n; ++j) {
        const double x = 2.0 * s[j] - 1.0;
        double prev = 1.0, cur = x;
        for (std::size_t k = 0; k < m; ++k) {
          double p;
          if (k == 0) {
            p = 1.0;
          } else if (k == 1) {
            p = x;
          } else {
            const double d = static_cast<double>(k - 1);
            const double next = ((2.0 * d + 1.0) * x * cur - d * prev) / (d + 1.0);
            prev = cur;
            cur = next;
            p = next;
          }
          v(static_cast<Index>(k), j) = std::sqrt(2.0 * static_cast<double>(k) + 1.0) * p;
        }
      }
      break;
  }
  return v;
}

Eigen::MatrixXd draw_scores(const Eigen::VectorXd& values, std::size_t n, Rng& rng) {
  Eigen::MatrixXd xi(static_cast<Index>(n), values.size());
  for (Index m = 0; m < values.size(); ++m) {
    const double sd = std::sqrt(values(m));
    for (std::size_t i = 0; i < n; ++i) xi(static_cast<Index>(i), m) = sd * rng.normal();
  }
  return xi;
}

void check_values(const Eigen::VectorXd& values) {
  for (Index m = 0; m < values.size(); ++m) {
    if (!(values(m) >= 0.0) || !std::isfinite(values(m))) throw ValidationError("eigenvalues must be non-negative");
    if (m > 0 && values(m) > values(m - 1)) throw ValidationError("eigenvalues must be non-increasing");
  }
}

std::size_t total_size(const std::vector<std::size_t>& m) {
  std::size_t t = 1;
  for (std::size_t k : m) t *= k;
  return t;
}

}  // namespace

BasisKind parse_basis_kind(std::string_view s) {
  if (s == "fourier" || s == "Fourier") return BasisKind::fourier;
  if (s == "fourier_lin" || s == "FourierLin") return BasisKind::fourier_lin;
  if (s == "legendre" || s == "Poly") return BasisKind::legendre;
  if (s == "wiener" || s == "Wiener") return BasisKind::wiener;
  throw ValidationError("unknown basis kind '" + std::string(s) + "'");
}

DecayKind parse_decay_kind(std::string_view s) {
  if (s == "linear") return DecayKind::linear;
  if (s == "exponential") return DecayKind::exponential;
  if (s == "wiener") return DecayKind::wiener;
  throw ValidationError("unknown eigenvalue decay '" + std::string(s) + "'");
}

std::string_view to_string(BasisKind k) {
  switch (k) {
    case BasisKind::fourier: return "fourier";
    case BasisKind::fourier_lin: return "fourier_lin";
    case BasisKind::legendre: return "legendre";
    case BasisKind::wiener: return "wiener";
  }
  return "";
}

std::string_view to_string(DecayKind k) {
  switch (k) {
    case DecayKind::linear: return "linear";
    case DecayKind::exponential: return "exponential";
    case DecayKind::wiener: return "wiener";
  }
  return "";
}

// ---------------------------------------------------------------- bases

Eigen::MatrixXd eval_basis_at(BasisKind kind, std::size_t m, double lo, double hi, const std::vector<double>& t) {
  if (m == 0) throw ValidationError("basis: need at least one function");
  if (!(hi > lo)) throw ValidationError("basis: domain must have positive length");
  std::vector<double> s(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) s[j] = (t[j] - lo) / (hi - lo);
  return basis_unit(kind, m, s) / std::sqrt(hi - lo);
}

namespace {

// Legendre and fourier_lin are Gram-Schmidt constructions. On a grid the
// Gram-Schmidt step is redone in the grid's trapezoidal inner product, so the
// sampled system is orthonormal up to rounding instead of up to O(h^2). Grids
// too coarse to carry the system keep the closed forms.
Eigen::MatrixXd grid_basis(BasisKind kind, std::size_t m, const Axis& axis) {
  Eigen::MatrixXd v = eval_basis_at(kind, m, axis.front(), axis.back(), axis.points());
  if (kind != BasisKind::legendre && kind != BasisKind::fourier_lin) return v;
  if (axis.size() < 2 * m) return v;
  const std::size_t n = axis.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Index>(n));
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = 0.5 * (axis[j + 1] - axis[j]);
    w(static_cast<Index>(j)) += h;
    w(static_cast<Index>(j + 1)) += h;
  }
  Eigen::MatrixXd out = v;
  const Index first = kind == BasisKind::legendre ? 0 : static_cast<Index>(m - 1);
  for (Index r = first; r < out.rows(); ++r) {
    Eigen::RowVectorXd f = out.row(r);
    for (Index q = 0; q < r; ++q) f -= (f.cwiseProduct(w.transpose()).dot(out.row(q))) * out.row(q);
    const double sq = f.cwiseProduct(w.transpose()).dot(f);
    if (!(sq > 1e-6)) return v;
    out.row(r) = f / std::sqrt(sq);
  }
  return out;
}

}  // namespace

DenseFunData eval_basis(BasisKind kind, std::size_t m, const Axis& axis) {
  return DenseFunData({axis}, grid_basis(kind, m, axis));
}

DenseFunData eval_tensor_basis(const std::vector<BasisKind>& kinds, const std::vector<std::size_t>& m,
                               const std::vector<Axis>& argvals) {
  if (argvals.empty() || kinds.size() != argvals.size() || m.size() != argvals.size()) {
    throw ValidationError("basis: argvals, M and kinds must have one entry per dimension");
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t k = 0; k < argvals.size(); ++k) {
    const auto& a = argvals[k];
    const Eigen::MatrixXd b = grid_basis(kinds[k], m[k], a);
    Eigen::MatrixXd next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Index f = 0; f < acc.rows(); ++f)
      for (Index g = 0; g < b.rows(); ++g)
        for (Index c = 0; c < acc.cols(); ++c)
          for (Index e = 0; e < b.cols(); ++e) next(f * b.rows() + g, c * b.cols() + e) = acc(f, c) * b(g, e);
    acc = std::move(next);
  }
  return DenseFunData(argvals, std::move(acc));
}

Eigen::VectorXd eigenvalues(DecayKind decay, std::size_t m) {
  if (m == 0) throw ValidationError("eigenvalues: need at least one");
  Eigen::VectorXd v(static_cast<Index>(m));
  const double mm = static_cast<double>(m);
  for (std::size_t k = 1; k <= m; ++k) {
    const double kk = static_cast<double>(k);
    double val = 0.0;
    switch (decay) {
      case DecayKind::linear: val = (mm - kk + 1.0) / mm; break;
      case DecayKind::exponential: val = std::exp(-(kk + 1.0) / 2.0); break;
      case DecayKind::wiener: val = 4.0 / ((2.0 * kk - 1.0) * (2.0 * kk - 1.0) * kPi * kPi); break;
    }
    v(static_cast<Index>(k - 1)) = val;
  }
  return v;
}

// ---------------------------------------------------------------- simulation

SimResult<DenseFunData> sim_fundata(const std::vector<Axis>& argvals, const std::vector<std::size_t>& m,
                                    const std::vector<BasisKind>& kinds, const Eigen::VectorXd& values,
                                    std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("simulation: N must be positive");
  DenseFunData phi = eval_tensor_basis(kinds, m, argvals);
  if (static_cast<std::size_t>(values.size()) != phi.n_obs()) {
    throw ValidationError("simulation: expected " + std::to_string(phi.n_obs()) + " eigenvalues");
  }
  check_values(values);
  Rng rng(seed);
  const Eigen::MatrixXd xi = draw_scores(values, n, rng);
  Eigen::MatrixXd x = xi * phi.values();
  return {DenseFunData(argvals, std::move(x)), values, std::move(phi)};
}

SimResult<DenseFunData> sim_fundata(const std::vector<Axis>& argvals, const std::vector<std::size_t>& m,
                                    const std::vector<BasisKind>& kinds, DecayKind decay, std::size_t n,
                                    std::uint64_t seed) {
  if (m.empty()) throw ValidationError("simulation: M must have one entry per dimension");
  return sim_fundata(argvals, m, kinds, eigenvalues(decay, total_size(m)), n, seed);
}

MultiFunData multi_eigenfunctions(MultiConstruction construction, const std::vector<ElementSystem>& elements,
                                  Rng& rng) {
  if (elements.empty()) throw ValidationError("simulation: need at least one element");
  std::vector<DenseFunData> psi;
  if (construction == MultiConstruction::split) {
    const auto& first = elements.front();
    if (first.m.size() != 1 || first.kinds.size() != 1) {
      throw ValidationError("split construction works only for one-dimensional elements");
    }
    double total = 0.0;
    for (const auto& e : elements) {
      if (e.argvals.size() != 1 || e.m.size() != 1 || e.kinds.size() != 1) {
        throw ValidationError("split construction works only for one-dimensional elements");
      }
      if (e.m[0] != first.m[0] || e.kinds[0] != first.kinds[0]) {
        throw ValidationError("split construction needs a single shared M and basis kind");
      }
      total += e.argvals[0].back() - e.argvals[0].front();
    }
    double offset = 0.0;
    for (const auto& e : elements) {
      const auto& a = e.argvals[0];
      std::vector<double> s(a.size());
      for (std::size_t j = 0; j < a.size(); ++j) s[j] = offset + (a[j] - a.front());
      psi.emplace_back(e.argvals, eval_basis_at(first.kinds[0], first.m[0], 0.0, total, s));
      offset += a.back() - a.front();
    }
    return MultiFunData(std::move(psi));
  }

  std::vector<DenseFunData> phi;
  for (const auto& e : elements) phi.push_back(eval_tensor_basis(e.kinds, e.m, e.argvals));
  for (const auto& f : phi) {
    if (f.n_obs() != phi.front().n_obs()) {
      throw ValidationError("weighted construction needs equally sized eigenfunction systems per element");
    }
  }
  std::vector<double> alpha(elements.size());
  double sq = 0.0;
  for (double& a : alpha) {
    a = rng.uniform_open();
    sq += a * a;
  }
  for (std::size_t j = 0; j < phi.size(); ++j) {
    psi.emplace_back(phi[j].argvals(), phi[j].values() * (alpha[j] / std::sqrt(sq)));
  }
  return MultiFunData(std::move(psi));
}

SimResult<MultiFunData> sim_multifundata(MultiConstruction construction, const std::vector<ElementSystem>& elements,
                                         DecayKind decay, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("simulation: N must be positive");
  Rng rng(seed);
  MultiFunData psi = multi_eigenfunctions(construction, elements, rng);
  const Eigen::VectorXd values = eigenvalues(decay, psi.n_obs());
  const Eigen::MatrixXd rho = draw_scores(values, n, rng);
  std::vector<DenseFunData> data;
  for (const auto& e : psi.elements()) data.emplace_back(e.argvals(), rho * e.values());
  return {MultiFunData(std::move(data)), values, std::move(psi)};
}

// ---------------------------------------------------------------- perturbation

namespace {

void check_sd(double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd)) throw ValidationError("noise: standard deviation must be positive");
}

DenseFunData noisy(const DenseFunData& x, double sd, Rng& rng) {
  check_sd(sd);
  Eigen::MatrixXd v = x.values();
  for (Index i = 0; i < v.rows(); ++i)
    for (Index c = 0; c < v.cols(); ++c)
      if (!is_missing(v(i, c))) v(i, c) += sd * rng.normal();
  return DenseFunData(x.argvals(), std::move(v), x.names());
}

DenseFunData sparse(const DenseFunData& x, SparsifySpec spec, Rng& rng) {
  const std::size_t cells = x.n_cells();
  if (spec.min_obs < 1 || spec.min_obs > spec.max_obs) {
    throw ValidationError("sparsify: bounds must satisfy 1 <= min <= max");
  }
  if (spec.max_obs > cells) {
    throw ValidationError("sparsify: max " + std::to_string(spec.max_obs) + " exceeds the " + std::to_string(cells) +
                          " grid cells");
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(x.values().rows(), x.values().cols(), kMissing);
  std::vector<std::size_t> idx(cells);
  for (Index i = 0; i < v.rows(); ++i) {
    const std::size_t k = rng.between(spec.min_obs, spec.max_obs);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(idx[j], idx[j + rng.index(cells - j)]);
      const auto c = static_cast<Index>(idx[j]);
      v(i, c) = x.values()(i, c);
    }
  }
  return DenseFunData(x.argvals(), std::move(v), x.names());
}

}  // namespace

DenseFunData add_error(const DenseFunData& x, double sd, std::uint64_t seed) {
  Rng rng(seed);
  return noisy(x, sd, rng);
}

IrregFunData add_error(const IrregFunData& x, double sd, std::uint64_t seed) {
  check_sd(sd);
  Rng rng(seed);
  std::vector<std::vector<double>> t, v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    t.push_back(x.argvals()[i].points());
    for (double& e : v[i]) e += sd * rng.normal();
  }
  return IrregFunData(std::move(t), std::move(v), x.names());
}

MultiFunData add_error(const MultiFunData& x, const std::vector<double>& sd, std::uint64_t seed) {
  if (sd.size() != x.size()) throw ValidationError("noise: need one standard deviation per element");
  Rng rng(seed);
  std::vector<DenseFunData> el;
  for (std::size_t j = 0; j < x.size(); ++j) el.push_back(noisy(x[j], sd[j], rng));
  return MultiFunData(std::move(el));
}

DenseFunData sparsify(const DenseFunData& x, SparsifySpec spec, std::uint64_t seed) {
  Rng rng(seed);
  return sparse(x, spec, rng);
}

MultiFunData sparsify(const MultiFunData& x, const std::vector<SparsifySpec>& spec, std::uint64_t seed) {
  if (spec.size() != x.size()) throw ValidationError("sparsify: need one bound pair per element");
  Rng rng(seed);
  std::vector<DenseFunData> el;
  for (std::size_t j = 0; j < x.size(); ++j) el.push_back(sparse(x[j], spec[j], rng));
  return MultiFunData(std::move(el));
}

}  // namespace fdakit
