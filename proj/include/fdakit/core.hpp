#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdakit {

/// Raised when an input violates a container or operation contract.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a computation produces a non-finite or ill-conditioned result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing cells in dense containers are quiet NaNs.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Strictly increasing, finite observation points along one domain dimension.
class Axis {
 public:
  explicit Axis(std::vector<double> points);

  /// n equispaced points from a to b inclusive.
  static Axis equispaced(double a, double b, std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] double front() const noexcept { return points_.front(); }
  [[nodiscard]] double back() const noexcept { return points_.back(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return points_[i]; }
  [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
  [[nodiscard]] bool is_equispaced(double rel_tol = 1e-8) const noexcept;

  friend bool operator==(const Axis&, const Axis&) = default;

 private:
  std::vector<double> points_;
};

/// N observations sampled on one rectangular grid over a d-dimensional domain.
///
/// Values are held as an N x (S_1 * ... * S_d) matrix; row i is observation i
/// flattened row-major over the grid (last axis varies fastest). Missing cells
/// carry kMissing.
class DenseFunData {
 public:
  DenseFunData(std::vector<Axis> argvals, Eigen::MatrixXd values,
               std::vector<std::string> names = {});

  [[nodiscard]] std::size_t n_obs() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  [[nodiscard]] std::size_t dim() const noexcept { return argvals_.size(); }
  [[nodiscard]] std::size_t n_cells() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  [[nodiscard]] std::vector<std::size_t> shape() const;

  [[nodiscard]] const std::vector<Axis>& argvals() const noexcept { return argvals_; }
  [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
  /// Explicit labels; empty when defaults are in use.
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  /// Label of observation i (0-based); defaults to the 1-based index.
  [[nodiscard]] std::string label(std::size_t i) const;

  [[nodiscard]] bool has_missing() const noexcept;
  [[nodiscard]] bool row_has_missing(std::size_t i) const noexcept;

  /// Grid coordinates of a flattened cell index.
  [[nodiscard]] std::vector<double> coordinates(std::size_t cell) const;

 private:
  std::vector<Axis> argvals_;
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

/// N curves on one-dimensional domains, each with its own observation points.
class IrregFunData {
 public:
  /// Curves are sorted by argument; duplicate points within a curve are rejected.
  IrregFunData(std::vector<std::vector<double>> argvals, std::vector<std::vector<double>> values,
               std::vector<std::string> names = {});

  [[nodiscard]] std::size_t n_obs() const noexcept { return argvals_.size(); }
  [[nodiscard]] const std::vector<Axis>& argvals() const noexcept { return argvals_; }
  [[nodiscard]] const std::vector<std::vector<double>>& values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] std::string label(std::size_t i) const;

 private:
  std::vector<Axis> argvals_;
  std::vector<std::vector<double>> values_;
  std::vector<std::string> names_;
};

/// Ordered tuple of p dense elements sharing the observation count.
class MultiFunData {
 public:
  explicit MultiFunData(std::vector<DenseFunData> elements);

  [[nodiscard]] std::size_t n_obs() const noexcept { return elements_.front().n_obs(); }
  [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }
  [[nodiscard]] const DenseFunData& operator[](std::size_t j) const noexcept { return elements_[j]; }
  [[nodiscard]] const std::vector<DenseFunData>& elements() const noexcept { return elements_; }

 private:
  std::vector<DenseFunData> elements_;
};

// Constructors mirroring the container contracts.

/// Dense container from an explicit (N, S_1, ..., S_d) shape and row-major flat values.
DenseFunData make_dense(std::vector<Axis> argvals, const std::vector<std::size_t>& shape,
                        std::span<const double> flat, std::vector<std::string> names = {});
DenseFunData make_dense(std::vector<Axis> argvals, Eigen::MatrixXd values,
                        std::vector<std::string> names = {});
IrregFunData make_irreg(std::vector<std::vector<double>> argvals,
                        std::vector<std::vector<double>> values,
                        std::vector<std::string> names = {});
MultiFunData make_multi(std::vector<DenseFunData> elements);

// Inspection.

std::size_t n_obs(const DenseFunData& x);
std::size_t n_obs(const IrregFunData& x);
std::size_t n_obs(const MultiFunData& x);

std::vector<std::size_t> n_obs_points(const DenseFunData& x);
std::vector<std::size_t> n_obs_points(const IrregFunData& x);
std::vector<std::vector<std::size_t>> n_obs_points(const MultiFunData& x);

std::size_t dim_supp(const DenseFunData& x);
std::size_t dim_supp(const IrregFunData& x);
std::vector<std::size_t> dim_supp(const MultiFunData& x);

// Subsetting.

/// Closed interval applied to one domain dimension.
struct Window {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Irregular extraction result; curves emptied by the window are dropped and reported.
struct IrregSelection {
  IrregFunData data;
  std::vector<std::size_t> dropped;  // 0-based indices into the input
  [[nodiscard]] bool warning() const noexcept { return !dropped.empty(); }
};

/// obs: 0-based indices (nullopt selects all). windows: one per dimension or empty.
DenseFunData extract_obs(const DenseFunData& x, const std::optional<std::vector<std::size_t>>& obs,
                         const std::vector<Window>& windows = {});
IrregSelection extract_obs(const IrregFunData& x, const std::optional<std::vector<std::size_t>>& obs,
                           const std::optional<Window>& window = std::nullopt);
MultiFunData extract_obs(const MultiFunData& x, const std::optional<std::vector<std::size_t>>& obs);

DenseFunData rename(const DenseFunData& x, std::vector<std::string> names);
IrregFunData rename(const IrregFunData& x, std::vector<std::string> names);

// Coercion.

IrregFunData dense_to_irreg(const DenseFunData& x);
DenseFunData irreg_to_dense(const IrregFunData& x);
MultiFunData dense_to_multi(const DenseFunData& x);

/// One observed value in long format. obs and element are 1-based.
struct LongRow {
  std::size_t obs = 1;
  std::size_t element = 1;
  std::vector<double> args;
  double value = 0.0;
};

struct LongTable {
  std::vector<LongRow> rows;
  /// Widest argument count over all rows.
  [[nodiscard]] std::size_t n_args() const noexcept;
};

LongTable to_long(const DenseFunData& x);
LongTable to_long(const IrregFunData& x);
LongTable to_long(const MultiFunData& x);

/// Rebuilds a dense container. Axes are the sorted unique coordinates per
/// dimension unless given. Gaps in the grid are an error unless fill_missing.
DenseFunData dense_from_long(const LongTable& t, bool fill_missing = false,
                             const std::optional<std::vector<Axis>>& axes = std::nullopt);
IrregFunData irreg_from_long(const LongTable& t);
MultiFunData multi_from_long(const LongTable& t, bool fill_missing = false);

// Bitwise comparison; missing cells compare equal to each other.
bool identical(const DenseFunData& a, const DenseFunData& b);
bool identical(const IrregFunData& a, const IrregFunData& b);
bool identical(const MultiFunData& a, const MultiFunData& b);

}  // namespace fdakit
