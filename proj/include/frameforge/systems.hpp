#pragma once

// Finite vector systems and the parametric families they are drawn from.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "frameforge/linalg.hpp"

namespace frameforge {

// An ordered list of vectors in C^ambient_dim. External indexing is 1-based (g_1, g_2, ...),
// storage is 0-based.
class VectorSystem {
 public:
  VectorSystem(std::size_t ambient_dim, std::vector<CVector> vectors, std::string label = {});

  std::size_t ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  const std::string& label() const { return label_; }

  /// g_k for k = 1..size().
  const CVector& at(std::size_t k) const;
  const std::vector<CVector>& vectors() const { return vectors_; }
  std::vector<double> norms() const;

  /// Synthesis matrix: ambient_dim x size, column k-1 is g_k.
  CMatrix synthesis() const;

  VectorSystem relabeled(std::string label) const;
  /// The vectors at the given 1-based indices, in the given order.
  VectorSystem select(std::span<const std::size_t> indices) const;
  /// The system with the given 1-based indices removed, order preserved.
  VectorSystem without(std::span<const std::size_t> indices) const;

  bool operator==(const VectorSystem&) const = default;

 private:
  std::size_t ambient_dim_;
  std::vector<CVector> vectors_;
  std::string label_;
};

HermitianMatrix gram(const VectorSystem& system);
HermitianMatrix frame_operator(const VectorSystem& system);

namespace family {

struct OrthonormalBasis {};
// {delta e_1, delta/sqrt2 e_2, delta/sqrt2 e_2, delta/sqrt3 e_3 (x3), ...}; level l has l copies.
struct BlockTight {
  double delta = 1.0;
};
// g_k = sum_l lambda_l^k sqrt(1 - lambda_l^2) e_l with lambda_l = 1 - alpha^l.
struct Carleson {
  double alpha = 0.5;
};
// g_k = 2k e_{2k}.
struct ScaledEvenBasis {};
// {e_1, e_1, e_2, e_3, ...}.
struct DuplicatedFirst {};
// g_k = T^k phi, k = 1, 2, ...
struct OperatorOrbit {
  CMatrix matrix;
  CVector seed;
};
struct Custom {
  std::vector<CVector> vectors;
};

}  // namespace family

using GeneratorFamily =
    std::variant<family::OrthonormalBasis, family::BlockTight, family::Carleson,
                 family::ScaledEvenBasis, family::DuplicatedFirst, family::OperatorOrbit,
                 family::Custom>;

struct TruncationCertificate {
  std::size_t prefix_length = 0;
  std::size_t ambient_dim = 0;
  // Bound on the squared mass of coordinates beyond ambient_dim, summed over emitted vectors.
  double tail_mass_bound = 0.0;
};

struct Materialized {
  VectorSystem system;
  TruncationCertificate certificate;
};

/// First n vectors of the family, truncated to C^ambient.
Materialized materialize(const GeneratorFamily& family, std::size_t n, std::size_t ambient);

/// Number of complete BlockTight levels needed to cover C^levels: levels (levels + 1) / 2.
std::size_t block_tight_count(std::size_t levels);

/// g_k + deltas_k, order preserved.
VectorSystem perturb(const VectorSystem& system, std::span<const CVector> deltas);

/// Displaces every vector by a seeded random vector of norm at most delta_cap. The draw for
/// vector k depends only on (seed, k).
VectorSystem random_perturbation(const VectorSystem& system, double delta_cap, std::uint64_t seed);

/// Random unit-norm direction of the given dimension from a (seed, index) stream.
CVector random_direction(std::size_t dim, std::uint64_t seed, std::uint64_t index);

/// Orthonormal basis of C^dim obtained by orthonormalizing a seeded Gaussian matrix.
std::vector<CVector> random_orthonormal_basis(std::size_t dim, std::uint64_t seed);

}  // namespace frameforge
