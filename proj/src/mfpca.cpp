#include "fdakit/mfpca.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "fdakit/random.hpp"

namespace fdakit {

namespace {

using Eigen::Index;

// Linear-interpolation sample quantile (R type 7) of a sorted range.
double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<ExpansionSpec> subset_specs(const std::vector<ExpansionSpec>& uni, const std::vector<std::size_t>& idx) {
  std::vector<ExpansionSpec> out = uni;
  for (auto& s : out) {
    if (auto* g = std::get_if<GivenSpec>(&s); g && g->scores) {
      Eigen::MatrixXd sub(static_cast<Index>(idx.size()), g->scores->cols());
      for (std::size_t r = 0; r < idx.size(); ++r) sub.row(static_cast<Index>(r)) = g->scores->row(static_cast<Index>(idx[r]));
      g->scores = std::move(sub);
    }
  }
  return out;
}

}  // namespace

WeightVector integrated_variance_weights(const MultiFunData& data, QuadRule rule) {
  const std::size_t n = data.n_obs();
  if (n < 2) throw ValidationError("weights: need at least two observations");
  std::vector<double> w;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto& e = data[j];
    if (e.has_missing()) throw ValidationError("weights: missing values are not supported");
    const Eigen::RowVectorXd mean = e.values().colwise().mean();
    const Eigen::MatrixXd centered = e.values().rowwise() - mean;
    const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / static_cast<double>(n - 1);
    const double integral = grid_weights(e.argvals(), rule).dot(var);
    if (!(integral > 0.0)) {
      throw NumericError("weights: element " + std::to_string(j + 1) + " has zero integrated variance");
    }
    w.push_back(1.0 / integral);
  }
  return WeightVector(std::move(w));
}

MFPCAFit mfpca(const MultiFunData& data, std::size_t m, const std::vector<ExpansionSpec>& uni,
               const MFPCAOptions& opts) {
  const std::size_t n = data.n_obs();
  const std::size_t p = data.size();
  if (n < 2) throw ValidationError("mfpca: needs at least two observations");
  if (m < 1) throw ValidationError("mfpca: M must be positive");
  if (uni.size() != p) {
    throw ValidationError("mfpca: expected " + std::to_string(p) + " univariate expansions, got " +
                          std::to_string(uni.size()));
  }
  const WeightVector weights = opts.weights.value_or(WeightVector::ones(p));
  if (weights.size() != p) throw ValidationError("mfpca: weight vector length differs from element count");

  MultiFunData mean = mean_function(data);

  // Steps 1-2: univariate expansions of the demeaned, sqrt(w)-scaled elements.
  std::vector<ExpansionResult> exps;
  std::vector<std::size_t> blocks;
  for (std::size_t j = 0; j < p; ++j) {
    const double sw = std::sqrt(weights[j]);
    DenseFunData centered = arith(ArithOp::mul, arith(ArithOp::sub, data[j], mean[j]), sw);
    ExpansionSpec spec = uni[j];
    if (auto* g = std::get_if<GivenSpec>(&spec); g && g->scores) *g->scores *= sw;
    ExpansionResult r = expand(centered, spec, opts.rule);
    if (!r.orthonormal) r = orthonormalize(r, opts.rule);
    blocks.push_back(static_cast<std::size_t>(r.scores.cols()));
    exps.push_back(std::move(r));
  }
  std::size_t m_plus = 0;
  for (std::size_t b : blocks) m_plus += b;
  if (m > m_plus) {
    throw ValidationError("mfpca: M = " + std::to_string(m) + " exceeds the " + std::to_string(m_plus) +
                          " univariate basis functions");
  }
  Eigen::MatrixXd xi(static_cast<Index>(n), static_cast<Index>(m_plus));
  {
    Index off = 0;
    for (const auto& r : exps) {
      xi.middleCols(off, r.scores.cols()) = r.scores;
      off += r.scores.cols();
    }
  }
  Eigen::MatrixXd z = xi.transpose() * xi / static_cast<double>(n - 1);
  z = ((z + z.transpose()) / 2.0).eval();

  // Step 3.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z);
  if (es.info() != Eigen::Success) throw NumericError("mfpca: eigendecomposition failed");
  const Index mm = static_cast<Index>(m);
  Eigen::VectorXd values = es.eigenvalues().reverse().head(mm);
  Eigen::MatrixXd vectors = es.eigenvectors().rowwise().reverse().leftCols(mm);
  for (Index k = 0; k < mm; ++k) {
    values(k) = std::max(values(k), 0.0);
    Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }

  // Step 4.
  std::vector<DenseFunData> psi;
  {
    Index off = 0;
    for (std::size_t j = 0; j < p; ++j) {
      const auto& r = exps[j];
      const Index mj = r.scores.cols();
      Eigen::MatrixXd f = vectors.middleRows(off, mj).transpose() * r.functions.values() / std::sqrt(weights[j]);
      psi.emplace_back(data[j].argvals(), std::move(f));
      off += mj;
    }
  }
  Eigen::MatrixXd scores = xi * vectors;

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(data[0].label(i));

  MFPCAFit fit{std::move(mean),
               MultiFunData(std::move(psi)),
               std::move(values),
               std::move(scores),
               std::move(vectors),
               Eigen::VectorXd::Ones(mm),
               weights,
               std::nullopt,
               std::move(labels),
               std::move(xi),
               std::move(z),
               std::move(blocks)};
  if (opts.fit) fit.fit = predict(fit);
  return fit;
}

MultiFunData predict(const MFPCAFit& fit, const std::optional<Eigen::MatrixXd>& scores) {
  const Eigen::MatrixXd& s = scores ? *scores : fit.scores;
  if (s.cols() != fit.values.size()) {
    throw ValidationError("predict: scores need " + std::to_string(fit.values.size()) + " columns");
  }
  if (s.rows() < 1) throw ValidationError("predict: need at least one row of scores");
  std::vector<DenseFunData> el;
  for (std::size_t j = 0; j < fit.functions.size(); ++j) {
    Eigen::MatrixXd v = s * fit.functions[j].values();
    v.rowwise() += fit.mean_function[j].values().row(0);
    el.emplace_back(fit.functions[j].argvals(), std::move(v));
  }
  return MultiFunData(std::move(el));
}

std::vector<ScreeRow> screeplot_data(const MFPCAFit& fit) {
  double total = 0.0;
  for (Index k = 0; k < fit.values.size(); ++k) total += fit.values(k);
  std::vector<ScreeRow> rows;
  double cum = 0.0;
  for (Index k = 0; k < fit.values.size(); ++k) {
    cum += fit.values(k);
    rows.push_back({static_cast<std::size_t>(k + 1), fit.values(k), fit.values(k) / total, cum / total});
  }
  return rows;
}

std::vector<ScoreRow> scoreplot_data(const MFPCAFit& fit, std::size_t a, std::size_t b) {
  const auto m = static_cast<std::size_t>(fit.scores.cols());
  if (a < 1 || b < 1 || a > m || b > m) {
    throw ValidationError("scoreplot: component indices must lie in 1.." + std::to_string(m));
  }
  std::vector<ScoreRow> rows;
  for (Index i = 0; i < fit.scores.rows(); ++i) {
    rows.push_back({fit.labels[static_cast<std::size_t>(i)], fit.scores(i, static_cast<Index>(a - 1)),
                    fit.scores(i, static_cast<Index>(b - 1))});
  }
  return rows;
}

double weighted_inner(const MultiFunData& x, std::size_t a, const MultiFunData& y, std::size_t b,
                      const WeightVector& w, QuadRule rule) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const Eigen::VectorXd gw = grid_weights(x[j].argvals(), rule);
    const auto ra = x[j].values().row(static_cast<Index>(a));
    const auto rb = y[j].values().row(static_cast<Index>(b));
    double e = 0.0;
    for (Index c = 0; c < gw.size(); ++c) e += ra(c) * rb(c) * gw(c);
    s += w[j] * e;
  }
  return s;
}

// ---------------------------------------------------------------- bootstrap

namespace {

struct Aligned {
  std::vector<Eigen::MatrixXd> functions;  // per element, M x cells
  Eigen::VectorXd values;
};

Aligned align(const MFPCAFit& ref, const MFPCAFit& rep, QuadRule rule) {
  const std::size_t m = static_cast<std::size_t>(ref.values.size());
  const std::size_t cand = static_cast<std::size_t>(rep.values.size());
  std::vector<bool> used(cand, false);
  Aligned out;
  out.values.resize(static_cast<Index>(m));
  for (std::size_t j = 0; j < ref.functions.size(); ++j) {
    out.functions.emplace_back(static_cast<Index>(m), ref.functions[j].values().cols());
  }
  for (std::size_t r = 0; r < m; ++r) {
    std::size_t best = cand;
    double best_abs = -1.0, best_ip = 0.0;
    for (std::size_t c = 0; c < cand; ++c) {
      if (used[c]) continue;
      const double ip = weighted_inner(ref.functions, r, rep.functions, c, ref.weights, rule);
      if (std::abs(ip) > best_abs) {
        best_abs = std::abs(ip);
        best_ip = ip;
        best = c;
      }
    }
    used[best] = true;
    const double sign = best_ip >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < ref.functions.size(); ++j) {
      out.functions[j].row(static_cast<Index>(r)) = sign * rep.functions[j].values().row(static_cast<Index>(best));
    }
    out.values(static_cast<Index>(r)) = rep.values(static_cast<Index>(best));
  }
  return out;
}

std::size_t distinct(const std::vector<std::size_t>& idx) { return std::set<std::size_t>(idx.begin(), idx.end()).size(); }

BootstrapBands summarize(const MFPCAFit& ref, const std::vector<Aligned>& reps, double alpha) {
  const std::size_t m = static_cast<std::size_t>(ref.values.size());
  const std::size_t b = reps.size();
  std::vector<double> buf(b);
  std::vector<DenseFunData> lower, upper;
  for (std::size_t j = 0; j < ref.functions.size(); ++j) {
    const Index cells = ref.functions[j].values().cols();
    Eigen::MatrixXd lo(static_cast<Index>(m), cells), hi(static_cast<Index>(m), cells);
    for (Index k = 0; k < static_cast<Index>(m); ++k) {
      for (Index c = 0; c < cells; ++c) {
        for (std::size_t r = 0; r < b; ++r) buf[r] = reps[r].functions[j](k, c);
        std::sort(buf.begin(), buf.end());
        lo(k, c) = quantile_sorted(buf, alpha / 2.0);
        hi(k, c) = quantile_sorted(buf, 1.0 - alpha / 2.0);
      }
    }
    lower.emplace_back(ref.functions[j].argvals(), std::move(lo));
    upper.emplace_back(ref.functions[j].argvals(), std::move(hi));
  }
  Eigen::MatrixXd ci(static_cast<Index>(m), 2);
  for (Index k = 0; k < static_cast<Index>(m); ++k) {
    for (std::size_t r = 0; r < b; ++r) buf[r] = reps[r].values(k);
    std::sort(buf.begin(), buf.end());
    ci(k, 0) = quantile_sorted(buf, alpha / 2.0);
    ci(k, 1) = quantile_sorted(buf, 1.0 - alpha / 2.0);
  }
  return {MultiFunData(std::move(lower)), MultiFunData(std::move(upper)), std::move(ci), alpha, b};
}

void check_boot_args(std::size_t b, double alpha) {
  if (b < 2) throw ValidationError("bootstrap: need at least two replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("bootstrap: alpha must lie in (0, 1)");
}

MFPCAFit replicate_fit(const MultiFunData& data, std::size_t m, const std::vector<ExpansionSpec>& uni,
                       const MFPCAOptions& opts, const std::vector<std::size_t>& idx) {
  MFPCAOptions o = opts;
  o.fit = false;
  return mfpca(extract_obs(data, idx), m, subset_specs(uni, idx), o);
}

}  // namespace

BootstrapBands bootstrap_bands_from_indices(const MultiFunData& data, std::size_t m,
                                            const std::vector<ExpansionSpec>& uni, const MFPCAOptions& opts,
                                            const std::vector<std::vector<std::size_t>>& resamples, double alpha) {
  check_boot_args(resamples.size(), alpha);
  MFPCAOptions o = opts;
  o.fit = false;
  const MFPCAFit ref = mfpca(data, m, uni, o);
  std::vector<Aligned> reps;
  for (const auto& idx : resamples) {
    if (idx.size() != data.n_obs()) throw ValidationError("bootstrap: resample size must equal N");
    if (distinct(idx) < 2) throw ValidationError("bootstrap: resample has fewer than two distinct observations");
    reps.push_back(align(ref, replicate_fit(data, m, uni, o, idx), o.rule));
  }
  return summarize(ref, reps, alpha);
}

BootstrapBands bootstrap_bands(const MultiFunData& data, std::size_t m, const std::vector<ExpansionSpec>& uni,
                               const MFPCAOptions& opts, const BootstrapOptions& boot) {
  check_boot_args(boot.replicates, boot.alpha);
  MFPCAOptions o = opts;
  o.fit = false;
  const MFPCAFit ref = mfpca(data, m, uni, o);
  const std::size_t n = data.n_obs();
  const std::size_t max_attempts = 10 * boot.replicates;
  std::size_t attempts = 0;
  std::vector<Aligned> reps;
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < boot.replicates; ++b) {
    Rng rng = Rng::substream(boot.seed, b);
    for (;;) {
      if (++attempts > max_attempts) {
        throw NumericError("bootstrap: too many degenerate resamples (" + std::to_string(max_attempts) + " attempts)");
      }
      for (auto& i : idx) i = rng.index(n);
      if (distinct(idx) < 2) continue;
      try {
        reps.push_back(align(ref, replicate_fit(data, m, uni, o, idx), o.rule));
        break;
      } catch (const NumericError&) {
        // Rank-deficient resample; draw again from the same substream.
      }
    }
  }
  return summarize(ref, reps, boot.alpha);
}

}  // namespace fdakit
