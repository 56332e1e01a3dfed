#pragma once

#include <functional>
#include <optional>
#include <variant>

#include <Eigen/Dense>

#include "fdakit/core.hpp"

namespace fdakit {

enum class QuadRule { midpoint, trapezoidal };

/// Irregular curves integrate over their own observed range unless a full
/// domain is given; boundary values are then held constant out to the domain ends.
struct ObservedDomain {};
struct FullDomain {
  double lo;
  double hi;
};
using IrregIntegrationPolicy = std::variant<ObservedDomain, FullDomain>;

/// Positive per-element weights for the multivariate scalar product.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> w);
  static WeightVector ones(std::size_t p) { return WeightVector(std::vector<double>(p, 1.0)); }

  [[nodiscard]] std::size_t size() const noexcept { return w_.size(); }
  [[nodiscard]] double operator[](std::size_t j) const noexcept { return w_[j]; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

enum class ArithOp { add, sub, mul, div, pow };

// Pointwise maps. Missing cells stay missing; a non-finite result on an
// observed value is a NumericError.
using ScalarFn = std::function<double(double)>;
DenseFunData elementwise_map(const DenseFunData& x, const ScalarFn& fn);
IrregFunData elementwise_map(const IrregFunData& x, const ScalarFn& fn);
MultiFunData elementwise_map(const MultiFunData& x, const ScalarFn& fn);

// Pointwise arithmetic. A single-observation operand broadcasts.
DenseFunData arith(ArithOp op, const DenseFunData& a, const DenseFunData& b);
DenseFunData arith(ArithOp op, const DenseFunData& a, double b);
DenseFunData arith(ArithOp op, double a, const DenseFunData& b);
IrregFunData arith(ArithOp op, const IrregFunData& a, const IrregFunData& b);
IrregFunData arith(ArithOp op, const IrregFunData& a, double b);
IrregFunData arith(ArithOp op, double a, const IrregFunData& b);
MultiFunData arith(ArithOp op, const MultiFunData& a, const MultiFunData& b);
MultiFunData arith(ArithOp op, const MultiFunData& a, double b);
MultiFunData arith(ArithOp op, double a, const MultiFunData& b);

DenseFunData operator+(const DenseFunData& a, const DenseFunData& b);
DenseFunData operator-(const DenseFunData& a, const DenseFunData& b);
DenseFunData operator*(const DenseFunData& a, const DenseFunData& b);
DenseFunData operator*(double a, const DenseFunData& b);

DenseFunData mean_function(const DenseFunData& x);
IrregFunData mean_function(const IrregFunData& x);
MultiFunData mean_function(const MultiFunData& x);

/// All pairwise products f_i(s) g_k(t); f index varies slowest.
DenseFunData tensor_product(const DenseFunData& f, const DenseFunData& g);

Eigen::VectorXd quad_weights(const Axis& axis, QuadRule rule);
/// Tensor product of the per-axis weights, flattened like DenseFunData cells.
Eigen::VectorXd grid_weights(const std::vector<Axis>& axes, QuadRule rule);

Eigen::VectorXd integrate(const DenseFunData& x, QuadRule rule = QuadRule::trapezoidal);
Eigen::VectorXd integrate(const IrregFunData& x, QuadRule rule = QuadRule::trapezoidal,
                          const IrregIntegrationPolicy& policy = ObservedDomain{});
Eigen::VectorXd integrate(const MultiFunData& x, QuadRule rule = QuadRule::trapezoidal);

Eigen::VectorXd scalar_product(const DenseFunData& f, const DenseFunData& g, QuadRule rule = QuadRule::trapezoidal);
Eigen::VectorXd scalar_product(const IrregFunData& f, const IrregFunData& g, QuadRule rule = QuadRule::trapezoidal,
                               const IrregIntegrationPolicy& policy = ObservedDomain{});
Eigen::VectorXd scalar_product(const MultiFunData& f, const MultiFunData& g,
                               const std::optional<WeightVector>& weights = std::nullopt,
                               QuadRule rule = QuadRule::trapezoidal);

Eigen::VectorXd norm(const DenseFunData& x, bool squared = false, QuadRule rule = QuadRule::trapezoidal);
Eigen::VectorXd norm(const IrregFunData& x, bool squared = false, QuadRule rule = QuadRule::trapezoidal,
                     const IrregIntegrationPolicy& policy = ObservedDomain{});
Eigen::VectorXd norm(const MultiFunData& x, bool squared = false,
                     const std::optional<WeightVector>& weights = std::nullopt,
                     QuadRule rule = QuadRule::trapezoidal);

}  // namespace fdakit
