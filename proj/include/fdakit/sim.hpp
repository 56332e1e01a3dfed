#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fdakit/core.hpp"
#include "fdakit/random.hpp"

namespace fdakit {

enum class BasisKind { fourier, fourier_lin, legendre, wiener };
enum class DecayKind { linear, exponential, wiener };

BasisKind parse_basis_kind(std::string_view s);
DecayKind parse_decay_kind(std::string_view s);
std::string_view to_string(BasisKind k);
std::string_view to_string(DecayKind k);

/// Simulated data with the eigenvalues and eigenfunctions that generated it.
template <typename Data>
struct SimResult {
  Data data;
  Eigen::VectorXd true_values;
  Data true_functions;
};

inline constexpr std::size_t kLegendreMaxM = 25;

/// M orthonormal functions on [axis.front(), axis.back()] evaluated on the axis.
///
/// On s = (t - a) / (b - a), scaled by (b - a)^(-1/2):
///   fourier      1, sqrt2 sin(2 pi k s), sqrt2 cos(2 pi k s), ...
///   wiener       sqrt2 sin((2m - 1) pi s / 2)
///   legendre     orthonormal shifted Legendre polynomials, degree m - 1
///   fourier_lin  fourier of size M - 1, then s orthonormalized against it
///
/// legendre and fourier_lin redo their Gram-Schmidt step in the trapezoidal
/// inner product of the axis when it has at least 2M points, so the sampled
/// functions are orthonormal on the grid; they differ from the closed forms by
/// O(h^2).
DenseFunData eval_basis(BasisKind kind, std::size_t m, const Axis& axis);

/// Same system evaluated at arbitrary points of [lo, hi].
Eigen::MatrixXd eval_basis_at(BasisKind kind, std::size_t m, double lo, double hi, const std::vector<double>& t);

/// Tensor-product system over a rectangular grid; first marginal index varies slowest.
DenseFunData eval_tensor_basis(const std::vector<BasisKind>& kinds, const std::vector<std::size_t>& m,
                               const std::vector<Axis>& argvals);

Eigen::VectorXd eigenvalues(DecayKind decay, std::size_t m);

SimResult<DenseFunData> sim_fundata(const std::vector<Axis>& argvals, const std::vector<std::size_t>& m,
                                    const std::vector<BasisKind>& kinds, DecayKind decay, std::size_t n,
                                    std::uint64_t seed);

/// Variant with an explicit eigenvalue sequence (length prod(m), non-negative, non-increasing).
SimResult<DenseFunData> sim_fundata(const std::vector<Axis>& argvals, const std::vector<std::size_t>& m,
                                    const std::vector<BasisKind>& kinds, const Eigen::VectorXd& values,
                                    std::size_t n, std::uint64_t seed);

/// Marginal description of one multivariate element's eigenfunction system.
struct ElementSystem {
  std::vector<Axis> argvals;
  std::vector<std::size_t> m;
  std::vector<BasisKind> kinds;
};

enum class MultiConstruction { split, weighted };

SimResult<MultiFunData> sim_multifundata(MultiConstruction construction, const std::vector<ElementSystem>& elements,
                                         DecayKind decay, std::size_t n, std::uint64_t seed);

/// Multivariate eigenfunctions alone; weighted draws its element weights from rng.
MultiFunData multi_eigenfunctions(MultiConstruction construction, const std::vector<ElementSystem>& elements,
                                  Rng& rng);

DenseFunData add_error(const DenseFunData& x, double sd, std::uint64_t seed);
IrregFunData add_error(const IrregFunData& x, double sd, std::uint64_t seed);
MultiFunData add_error(const MultiFunData& x, const std::vector<double>& sd, std::uint64_t seed);

struct SparsifySpec {
  std::size_t min_obs;
  std::size_t max_obs;
};

DenseFunData sparsify(const DenseFunData& x, SparsifySpec spec, std::uint64_t seed);
MultiFunData sparsify(const MultiFunData& x, const std::vector<SparsifySpec>& spec, std::uint64_t seed);

}  // namespace fdakit
