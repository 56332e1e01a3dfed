#include "fdakit/core.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace fdakit {

namespace {

void check_names(const std::vector<std::string>& names, std::size_t n) {
  if (names.empty()) return;
  if (names.size() != n) {
    throw ValidationError("names: expected " + std::to_string(n) + " labels, got " +
                          std::to_string(names.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& s : names) {
    if (!seen.insert(s).second) throw ValidationError("names: duplicate label '" + s + "'");
  }
}

std::size_t grid_size(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

bool same_bits(double a, double b) {
  if (is_missing(a) && is_missing(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool in_window(double t, const Window& w) { return t >= w.lo && t <= w.hi; }

}  // namespace

// ---------------------------------------------------------------- Axis

Axis::Axis(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("axis: needs at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw ValidationError("axis: non-finite point");
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw ValidationError("axis: points must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

Axis Axis::equispaced(double a, double b, std::size_t n) {
  if (n == 0) throw ValidationError("axis: needs at least one point");
  if (n == 1) return Axis({a});
  std::vector<double> p(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) p[i] = a + h * static_cast<double>(i);
  p.back() = b;
  return Axis(std::move(p));
}

bool Axis::is_equispaced(double rel_tol) const noexcept {
  if (points_.size() < 3) return true;
  const double h = (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (std::abs((points_[i] - points_[i - 1]) - h) > rel_tol * std::abs(h)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- DenseFunData

DenseFunData::DenseFunData(std::vector<Axis> argvals, Eigen::MatrixXd values,
                           std::vector<std::string> names)
    : argvals_(std::move(argvals)), values_(std::move(values)), names_(std::move(names)) {
  if (argvals_.empty()) throw ValidationError("dense: domain dimension must be >= 1");
  if (values_.rows() < 1) throw ValidationError("dense: needs at least one observation");
  if (static_cast<std::size_t>(values_.cols()) != grid_size(argvals_)) {
    throw ValidationError("dense: value shape does not match argvals (" + std::to_string(values_.cols()) +
                          " cells vs grid of " + std::to_string(grid_size(argvals_)) + ")");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (std::isinf(v)) throw ValidationError("dense: infinite value");
  }
  check_names(names_, n_obs());
}

std::vector<std::size_t> DenseFunData::shape() const {
  std::vector<std::size_t> s;
  s.reserve(argvals_.size());
  for (const auto& a : argvals_) s.push_back(a.size());
  return s;
}

std::string DenseFunData::label(std::size_t i) const {
  return names_.empty() ? std::to_string(i + 1) : names_[i];
}

bool DenseFunData::has_missing() const noexcept { return values_.hasNaN(); }

bool DenseFunData::row_has_missing(std::size_t i) const noexcept {
  return values_.row(static_cast<Eigen::Index>(i)).hasNaN();
}

std::vector<double> DenseFunData::coordinates(std::size_t cell) const {
  std::vector<double> c(argvals_.size());
  for (std::size_t k = argvals_.size(); k-- > 0;) {
    const std::size_t s = argvals_[k].size();
    c[k] = argvals_[k][cell % s];
    cell /= s;
  }
  return c;
}

// ---------------------------------------------------------------- IrregFunData

IrregFunData::IrregFunData(std::vector<std::vector<double>> argvals,
                           std::vector<std::vector<double>> values, std::vector<std::string> names)
    : names_(std::move(names)) {
  if (argvals.size() != values.size()) {
    throw ValidationError("irregular: argvals and values differ in length");
  }
  if (argvals.empty()) throw ValidationError("irregular: needs at least one observation");
  argvals_.reserve(argvals.size());
  values_.reserve(values.size());
  for (std::size_t i = 0; i < argvals.size(); ++i) {
    auto& t = argvals[i];
    auto& x = values[i];
    if (t.size() != x.size()) {
      throw ValidationError("irregular: curve " + std::to_string(i + 1) + " has " + std::to_string(t.size()) +
                            " points but " + std::to_string(x.size()) + " values");
    }
    if (t.empty()) throw ValidationError("irregular: curve " + std::to_string(i + 1) + " is empty");
    for (double v : x) {
      if (!std::isfinite(v)) {
        throw ValidationError("irregular: curve " + std::to_string(i + 1) + " contains a missing value");
      }
    }
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    std::vector<double> ts(t.size()), xs(t.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
      ts[j] = t[order[j]];
      xs[j] = x[order[j]];
      if (j > 0 && ts[j] == ts[j - 1]) {
        throw ValidationError("irregular: curve " + std::to_string(i + 1) + " has duplicate points");
      }
    }
    argvals_.emplace_back(std::move(ts));
    values_.push_back(std::move(xs));
  }
  check_names(names_, argvals_.size());
}

std::string IrregFunData::label(std::size_t i) const {
  return names_.empty() ? std::to_string(i + 1) : names_[i];
}

// ---------------------------------------------------------------- MultiFunData

MultiFunData::MultiFunData(std::vector<DenseFunData> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw ValidationError("multi: needs at least one element");
  const std::size_t n = elements_.front().n_obs();
  for (std::size_t j = 1; j < elements_.size(); ++j) {
    if (elements_[j].n_obs() != n) {
      throw ValidationError("multi: element " + std::to_string(j + 1) + " has " +
                            std::to_string(elements_[j].n_obs()) + " observations, expected " +
                            std::to_string(n));
    }
  }
}

// ---------------------------------------------------------------- constructors

DenseFunData make_dense(std::vector<Axis> argvals, const std::vector<std::size_t>& shape,
                        std::span<const double> flat, std::vector<std::string> names) {
  if (shape.size() != argvals.size() + 1) {
    throw ValidationError("dense: value array has " + std::to_string(shape.size()) +
                          " dimensions, expected " + std::to_string(argvals.size() + 1));
  }
  for (std::size_t k = 0; k < argvals.size(); ++k) {
    if (shape[k + 1] != argvals[k].size()) {
      throw ValidationError("dense: dimension " + std::to_string(k + 1) + " has extent " +
                            std::to_string(shape[k + 1]) + " but axis has " +
                            std::to_string(argvals[k].size()) + " points");
    }
  }
  const std::size_t cells = grid_size(argvals);
  if (flat.size() != shape[0] * cells) throw ValidationError("dense: value count does not match shape");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(cells));
  for (std::size_t i = 0; i < shape[0]; ++i) {
    for (std::size_t c = 0; c < cells; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = flat[i * cells + c];
    }
  }
  return DenseFunData(std::move(argvals), std::move(m), std::move(names));
}

DenseFunData make_dense(std::vector<Axis> argvals, Eigen::MatrixXd values, std::vector<std::string> names) {
  return DenseFunData(std::move(argvals), std::move(values), std::move(names));
}

IrregFunData make_irreg(std::vector<std::vector<double>> argvals, std::vector<std::vector<double>> values,
                        std::vector<std::string> names) {
  return IrregFunData(std::move(argvals), std::move(values), std::move(names));
}

MultiFunData make_multi(std::vector<DenseFunData> elements) { return MultiFunData(std::move(elements)); }

// ---------------------------------------------------------------- inspection

std::size_t n_obs(const DenseFunData& x) { return x.n_obs(); }
std::size_t n_obs(const IrregFunData& x) { return x.n_obs(); }
std::size_t n_obs(const MultiFunData& x) { return x.n_obs(); }

std::vector<std::size_t> n_obs_points(const DenseFunData& x) { return x.shape(); }

std::vector<std::size_t> n_obs_points(const IrregFunData& x) {
  std::vector<std::size_t> s;
  s.reserve(x.n_obs());
  for (const auto& a : x.argvals()) s.push_back(a.size());
  return s;
}

std::vector<std::vector<std::size_t>> n_obs_points(const MultiFunData& x) {
  std::vector<std::vector<std::size_t>> s;
  for (const auto& e : x.elements()) s.push_back(e.shape());
  return s;
}

std::size_t dim_supp(const DenseFunData& x) { return x.dim(); }
std::size_t dim_supp(const IrregFunData&) { return 1; }

std::vector<std::size_t> dim_supp(const MultiFunData& x) {
  std::vector<std::size_t> d;
  for (const auto& e : x.elements()) d.push_back(e.dim());
  return d;
}

// ---------------------------------------------------------------- subsetting

namespace {

std::vector<std::size_t> resolve_obs(const std::optional<std::vector<std::size_t>>& obs, std::size_t n) {
  std::vector<std::size_t> idx;
  if (!obs) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  for (std::size_t i : *obs) {
    if (i >= n) {
      throw ValidationError("extract: observation index " + std::to_string(i + 1) + " outside 1.." +
                            std::to_string(n));
    }
  }
  if (obs->empty()) throw ValidationError("extract: empty selection");
  return *obs;
}

std::vector<std::string> pick_names(const std::vector<std::string>& names, const std::vector<std::size_t>& idx) {
  if (names.empty()) return {};
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(names[i]);
  // Repeated indices would duplicate labels; fall back to defaults then.
  std::unordered_set<std::string> seen(out.begin(), out.end());
  if (seen.size() != out.size()) return {};
  return out;
}

}  // namespace

DenseFunData extract_obs(const DenseFunData& x, const std::optional<std::vector<std::size_t>>& obs,
                         const std::vector<Window>& windows) {
  const auto idx = resolve_obs(obs, x.n_obs());
  if (!windows.empty() && windows.size() != x.dim()) {
    throw ValidationError("extract: expected " + std::to_string(x.dim()) + " windows, got " +
                          std::to_string(windows.size()));
  }
  std::vector<Axis> axes;
  std::vector<std::vector<std::size_t>> keep(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) {
    const auto& a = x.argvals()[k];
    std::vector<double> pts;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (windows.empty() || in_window(a[j], windows[k])) {
        keep[k].push_back(j);
        pts.push_back(a[j]);
      }
    }
    if (pts.empty()) throw ValidationError("extract: window leaves dimension " + std::to_string(k + 1) + " empty");
    axes.emplace_back(std::move(pts));
  }
  // Map each new cell to the old flattened index.
  const auto old_shape = x.shape();
  std::size_t new_cells = grid_size(axes);
  std::vector<std::size_t> cell_map(new_cells);
  for (std::size_t c = 0; c < new_cells; ++c) {
    std::size_t rem = c, old = 0, stride = 1;
    for (std::size_t k = x.dim(); k-- > 0;) {
      const std::size_t j = keep[k][rem % keep[k].size()];
      rem /= keep[k].size();
      old += j * stride;
      stride *= old_shape[k];
    }
    cell_map[c] = old;
  }
  Eigen::MatrixXd v(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(new_cells));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < new_cells; ++c) {
      v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          x.values()(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(cell_map[c]));
    }
  }
  return DenseFunData(std::move(axes), std::move(v), pick_names(x.names(), idx));
}

IrregSelection extract_obs(const IrregFunData& x, const std::optional<std::vector<std::size_t>>& obs,
                           const std::optional<Window>& window) {
  const auto idx = resolve_obs(obs, x.n_obs());
  std::vector<std::vector<double>> t, v;
  std::vector<std::size_t> kept, dropped;
  for (std::size_t i : idx) {
    std::vector<double> ti, vi;
    const auto& a = x.argvals()[i];
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (!window || in_window(a[j], *window)) {
        ti.push_back(a[j]);
        vi.push_back(x.values()[i][j]);
      }
    }
    if (ti.empty()) {
      dropped.push_back(i);
      continue;
    }
    kept.push_back(i);
    t.push_back(std::move(ti));
    v.push_back(std::move(vi));
  }
  if (kept.empty()) throw ValidationError("extract: no observations left after filtering");
  return {IrregFunData(std::move(t), std::move(v), pick_names(x.names(), kept)), std::move(dropped)};
}

MultiFunData extract_obs(const MultiFunData& x, const std::optional<std::vector<std::size_t>>& obs) {
  std::vector<DenseFunData> el;
  for (const auto& e : x.elements()) el.push_back(extract_obs(e, obs));
  return MultiFunData(std::move(el));
}

DenseFunData rename(const DenseFunData& x, std::vector<std::string> names) {
  return DenseFunData(x.argvals(), x.values(), std::move(names));
}

IrregFunData rename(const IrregFunData& x, std::vector<std::string> names) {
  std::vector<std::vector<double>> t;
  for (const auto& a : x.argvals()) t.push_back(a.points());
  return IrregFunData(std::move(t), x.values(), std::move(names));
}

// ---------------------------------------------------------------- coercion

IrregFunData dense_to_irreg(const DenseFunData& x) {
  if (x.dim() != 1) throw ValidationError("coercion to irregular supports one-dimensional domains only");
  const auto& a = x.argvals()[0];
  std::vector<std::vector<double>> t(x.n_obs()), v(x.n_obs());
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double val = x.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (is_missing(val)) continue;
      t[i].push_back(a[j]);
      v[i].push_back(val);
    }
    if (t[i].empty()) throw ValidationError("coercion: curve " + std::to_string(i + 1) + " is entirely missing");
  }
  return IrregFunData(std::move(t), std::move(v), x.names());
}

DenseFunData irreg_to_dense(const IrregFunData& x) {
  std::set<double> all;
  for (const auto& a : x.argvals()) all.insert(a.points().begin(), a.points().end());
  std::vector<double> grid(all.begin(), all.end());
  std::map<double, std::size_t> pos;
  for (std::size_t j = 0; j < grid.size(); ++j) pos.emplace(grid[j], j);
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(x.n_obs()),
                                                static_cast<Eigen::Index>(grid.size()), kMissing);
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    const auto& a = x.argvals()[i];
    for (std::size_t j = 0; j < a.size(); ++j) {
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pos.at(a[j]))) = x.values()[i][j];
    }
  }
  return DenseFunData({Axis(std::move(grid))}, std::move(v), x.names());
}

MultiFunData dense_to_multi(const DenseFunData& x) { return MultiFunData({x}); }

std::size_t LongTable::n_args() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rows) n = std::max(n, r.args.size());
  return n;
}

namespace {

void append_long(const DenseFunData& x, std::size_t element, LongTable& t) {
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    for (std::size_t c = 0; c < x.n_cells(); ++c) {
      const double v = x.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      if (is_missing(v)) continue;
      t.rows.push_back({i + 1, element, x.coordinates(c), v});
    }
  }
}

void check_unique(const LongTable& t) {
  std::set<std::tuple<std::size_t, std::size_t, std::vector<double>>> seen;
  for (const auto& r : t.rows) {
    if (!seen.emplace(r.obs, r.element, r.args).second) {
      throw ValidationError("long table: duplicate row for obs " + std::to_string(r.obs) + ", element " +
                            std::to_string(r.element));
    }
  }
}

DenseFunData dense_from_rows(const std::vector<const LongRow*>& rows, std::size_t n_obs, bool fill_missing,
                             const std::optional<std::vector<Axis>>& axes_in) {
  if (rows.empty()) throw ValidationError("long table: no rows");
  const std::size_t d = rows.front()->args.size();
  if (d == 0) throw ValidationError("long table: rows need at least one argument column");
  for (const auto* r : rows) {
    if (r->args.size() != d) throw ValidationError("long table: inconsistent argument count within an element");
    if (!std::isfinite(r->value)) throw ValidationError("long table: rows must not carry missing values");
  }
  std::vector<Axis> axes;
  if (axes_in) {
    if (axes_in->size() != d) throw ValidationError("long table: axes do not match argument count");
    axes = *axes_in;
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      std::set<double> s;
      for (const auto* r : rows) s.insert(r->args[k]);
      axes.emplace_back(std::vector<double>(s.begin(), s.end()));
    }
  }
  std::vector<std::map<double, std::size_t>> pos(d);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < axes[k].size(); ++j) pos[k].emplace(axes[k][j], j);
  }
  const std::size_t cells = grid_size(axes);
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_obs),
                                                static_cast<Eigen::Index>(cells), kMissing);
  for (const auto* r : rows) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < d; ++k) {
      auto it = pos[k].find(r->args[k]);
      if (it == pos[k].end()) throw ValidationError("long table: coordinate not on the supplied axis");
      c = c * axes[k].size() + it->second;
    }
    v(static_cast<Eigen::Index>(r->obs - 1), static_cast<Eigen::Index>(c)) = r->value;
  }
  if (!fill_missing && v.hasNaN()) {
    throw ValidationError("long table: coordinates do not form a full grid (enable missing fill)");
  }
  return DenseFunData(std::move(axes), std::move(v));
}

std::size_t max_obs(const LongTable& t) {
  std::size_t n = 0;
  for (const auto& r : t.rows) {
    if (r.obs == 0 || r.element == 0) throw ValidationError("long table: obs and element indices are 1-based");
    n = std::max(n, r.obs);
  }
  return n;
}

}  // namespace

LongTable to_long(const DenseFunData& x) {
  LongTable t;
  append_long(x, 1, t);
  return t;
}

LongTable to_long(const IrregFunData& x) {
  LongTable t;
  for (std::size_t i = 0; i < x.n_obs(); ++i) {
    const auto& a = x.argvals()[i];
    for (std::size_t j = 0; j < a.size(); ++j) t.rows.push_back({i + 1, 1, {a[j]}, x.values()[i][j]});
  }
  return t;
}

LongTable to_long(const MultiFunData& x) {
  LongTable t;
  for (std::size_t j = 0; j < x.size(); ++j) append_long(x[j], j + 1, t);
  return t;
}

DenseFunData dense_from_long(const LongTable& t, bool fill_missing, const std::optional<std::vector<Axis>>& axes) {
  check_unique(t);
  const std::size_t n = max_obs(t);
  std::vector<const LongRow*> rows;
  for (const auto& r : t.rows) {
    if (r.element != 1) throw ValidationError("long table: dense kind expects a single element");
    rows.push_back(&r);
  }
  return dense_from_rows(rows, n, fill_missing, axes);
}

IrregFunData irreg_from_long(const LongTable& t) {
  check_unique(t);
  const std::size_t n = max_obs(t);
  std::vector<std::vector<double>> ts(n), vs(n);
  for (const auto& r : t.rows) {
    if (r.element != 1) throw ValidationError("long table: irregular kind expects a single element");
    if (r.args.size() != 1) throw ValidationError("long table: irregular data needs exactly one argument");
    ts[r.obs - 1].push_back(r.args[0]);
    vs[r.obs - 1].push_back(r.value);
  }
  return IrregFunData(std::move(ts), std::move(vs));
}

MultiFunData multi_from_long(const LongTable& t, bool fill_missing) {
  check_unique(t);
  const std::size_t n = max_obs(t);
  std::map<std::size_t, std::vector<const LongRow*>> by_element;
  for (const auto& r : t.rows) by_element[r.element].push_back(&r);
  if (by_element.empty()) throw ValidationError("long table: no rows");
  if (by_element.rbegin()->first != by_element.size()) {
    throw ValidationError("long table: element indices must be contiguous from 1");
  }
  std::vector<DenseFunData> el;
  for (const auto& [j, rows] : by_element) el.push_back(dense_from_rows(rows, n, fill_missing, std::nullopt));
  return MultiFunData(std::move(el));
}

// ---------------------------------------------------------------- comparison

bool identical(const DenseFunData& a, const DenseFunData& b) {
  if (a.argvals() != b.argvals() || a.names() != b.names()) return false;
  if (a.values().rows() != b.values().rows() || a.values().cols() != b.values().cols()) return false;
  for (Eigen::Index i = 0; i < a.values().size(); ++i) {
    if (!same_bits(a.values().data()[i], b.values().data()[i])) return false;
  }
  return true;
}

bool identical(const IrregFunData& a, const IrregFunData& b) {
  if (a.argvals() != b.argvals() || a.names() != b.names() || a.n_obs() != b.n_obs()) return false;
  for (std::size_t i = 0; i < a.n_obs(); ++i) {
    const auto& x = a.values()[i];
    const auto& y = b.values()[i];
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!same_bits(x[j], y[j])) return false;
    }
  }
  return true;
}

bool identical(const MultiFunData& a, const MultiFunData& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!identical(a[j], b[j])) return false;
  }
  return true;
}

}  // namespace fdakit
