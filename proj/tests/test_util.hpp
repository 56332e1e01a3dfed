#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <tuple>
#include <vector>

#include "fdakit/core.hpp"
#include "fdakit/random.hpp"

namespace fdakit::testing {

inline DenseFunData random_dense(std::vector<Axis> axes, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t cells = 1;
  for (const auto& a : axes) cells *= a.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cells));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return DenseFunData(std::move(axes), std::move(m));
}

/// Sparse longitudinal design: N subjects on a monthly grid from -18 to 54,
/// each observed at 1 to 11 distinct months.
inline IrregFunData cd4_like(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> t(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.between(1, 11);
    std::vector<std::size_t> months(73);
    for (std::size_t j = 0; j < months.size(); ++j) months[j] = j;
    for (std::size_t j = 0; j < k; ++j) std::swap(months[j], months[j + rng.index(months.size() - j)]);
    for (std::size_t j = 0; j < k; ++j) {
      t[i].push_back(static_cast<double>(months[j]) - 18.0);
      x[i].push_back(std::exp(6.0 + 0.5 * rng.normal()));
    }
  }
  return IrregFunData(std::move(t), std::move(x));
}

inline std::vector<double> random_points(Rng& rng, std::size_t k) {
  std::vector<double> p;
  while (p.size() < k) {
    const double v = std::round(rng.uniform() * 1000.0) / 100.0;
    if (std::find(p.begin(), p.end(), v) == p.end()) p.push_back(v);
  }
  std::sort(p.begin(), p.end());
  return p;
}

/// Random long table with p elements of dimension 1 or 2 on partly observed grids.
/// Every observation has at least one row in every element.
inline LongTable random_long_table(Rng& rng, std::size_t p) {
  LongTable t;
  const std::size_t n = 1 + rng.index(5);
  for (std::size_t e = 1; e <= p; ++e) {
    const std::size_t d = 1 + rng.index(2);
    std::vector<std::vector<double>> axes;
    for (std::size_t k = 0; k < d; ++k) axes.push_back(random_points(rng, 1 + rng.index(4)));
    std::size_t cells = 1;
    for (const auto& a : axes) cells *= a.size();
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t forced = rng.index(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        if (c != forced && rng.uniform() < 0.3) continue;
        std::vector<double> args(d);
        std::size_t rem = c;
        for (std::size_t k = d; k-- > 0;) {
          args[k] = axes[k][rem % axes[k].size()];
          rem /= axes[k].size();
        }
        t.rows.push_back({i, e, std::move(args), rng.normal()});
      }
    }
  }
  return t;
}

inline LongTable random_irreg_table(Rng& rng) {
  LongTable t;
  const std::size_t n = 1 + rng.index(6);
  for (std::size_t i = 1; i <= n; ++i) {
    for (double a : random_points(rng, 1 + rng.index(6))) t.rows.push_back({i, 1, {a}, rng.normal()});
  }
  return t;
}

inline bool same_rows(const LongTable& a, const LongTable& b) {
  auto key = [](const LongTable& t) {
    std::vector<std::tuple<std::size_t, std::size_t, std::vector<double>, std::uint64_t>> k;
    for (const auto& r : t.rows) k.emplace_back(r.obs, r.element, r.args, std::bit_cast<std::uint64_t>(r.value));
    std::sort(k.begin(), k.end());
    return k;
  };
  return key(a) == key(b);
}

}  // namespace fdakit::testing
