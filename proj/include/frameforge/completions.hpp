#pragma once

// Completion of incomplete systems by small norm-perturbations.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "frameforge/analysis.hpp"
#include "frameforge/systems.hpp"

namespace frameforge {

struct CompletionOutput {
  VectorSystem psi;
  // Compares g with psi on the indices g has; appended vectors are not part of it.
  PerturbationReport report;
  std::string method;
  Classification witness;
  std::vector<std::size_t> modified_indices;     // 1-based, psi_k != g_k by construction
  std::vector<std::size_t> appended_indices;     // 1-based, no counterpart in g
  std::vector<std::size_t> exceptional_indices;  // 1-based, perturbation above the budget
  std::map<std::string, double> diagnostics;
};

// Finite model of a Bessel system as an operator image. The coordinate space is C^count with
// its standard basis; U maps e_k to g_k. V acts on C^count (+) K^perp, equal to U on the first
// summand and to the identity on the complement K^perp of K = span{g_k}.
struct OperatorFactorization {
  std::vector<CVector> coordinate_ons;
  CMatrix synthesis;                      // U: ambient x count
  std::vector<CVector> complement;        // orthonormal basis of K^perp in C^ambient
  CMatrix extension;                      // V: ambient x (count + complement.size())
  double operator_norm_V = 0.0;
};

namespace completer {
// Keeps the orthonormal system and appends a basis of its complement under fresh indices.
struct TrivialAppend {};
// Feeds each complement direction through a chain of blocks of the system by plane rotations,
// so each block vector moves by at most sqrt(2 - 2 cos(angle)) / sqrt(block size). The final
// carry of every chain is appended under a fresh index.
struct SpreadRotation {
  std::vector<std::size_t> block_sizes;
  double angle = std::numbers::pi / 2;
};
}  // namespace completer

using Completer = std::variant<completer::TrivialAppend, completer::SpreadRotation>;

struct CompletedBasis {
  std::vector<CVector> chi;                    // orthonormal basis of the ambient space
  std::vector<double> per_index_perturbation;  // ||ons_k - chi_k|| for each input index
  std::vector<std::size_t> appended_indices;   // 1-based
};

CompletedBasis complete_orthonormal(const Completer& completer, std::span<const CVector> ons,
                                    std::size_t ambient);

// A block of consecutive entries [first, first + size) of a vector list.
struct RotationBlock {
  std::size_t first = 0;
  std::size_t size = 0;
};

/// Passes `carry` through the blocks in order. For each block with unit mean direction u, the
/// block vectors and the carry are rotated by `angle` in span{u, carry}; the rotated carry
/// moves on to the next block. Block vectors must be orthonormal and orthogonal to the carry.
/// Returns the final carry.
CVector run_rotation_chain(std::vector<CVector>& vectors, std::span<const RotationBlock> blocks,
                           CVector carry, double angle);

std::string completer_name(const Completer& completer);

/// Replaces a subsequence g_{k_n} of small vectors by f_n + g_{k_n}, where {f_n} is the
/// block-tight frame of lower bound delta^2 covering the ambient space.
CompletionOutput complete_not_bounded_below(const VectorSystem& g, double delta);

/// Displaces the first M = deficit(g) removable vectors by (delta / j) times the j-th vector of
/// an orthonormal basis of the complement of the span. Needs excess(g) >= deficit(g).
CompletionOutput complete_excess_ge_codim(const VectorSystem& g, double delta);

/// For a system with ||limit - g_k|| <= delta/2 for k >= K (1-based): psi_k = g_k for k < K,
/// psi_K = limit, psi_k = limit + delta 2^{K-k} e_{k-K} for k > K, cycling through the
/// standard basis of the ambient space.
CompletionOutput complete_convergent(const VectorSystem& g, std::span<const Complex> limit,
                                     std::size_t K, double delta);

OperatorFactorization factorize_bessel(const VectorSystem& g);

/// psi_k = V chi_k with chi from the completer applied to the coordinate basis. Throws
/// HypothesisError if the completer moves an original index by more than delta / ||V||.
CompletionOutput complete_via_operator(const VectorSystem& g, const Completer& completer,
                                       double delta);

// Largest perturbation size for which the scaled-even obstruction applies: 2 sqrt(6) / pi.
inline const double kObstructionDeltaLimit = 2.0 * std::sqrt(6.0) / std::numbers::pi;

/// pi^2 delta^2 / 24, the bound on sum_k ||e_{2k} - psi_k / (2k)||^2.
double obstruction_bound(double delta);

struct ObstructionTrial {
  std::uint64_t seed = 0;
  double scaled_sum = 0.0;  // sum_k ||g_k - psi_k||^2 / (4 k^2)
  double max_perturbation = 0.0;
  bool fired = false;
  bool verified = false;
  std::size_t deficit_g = 0;
  std::size_t deficit_h = 0;
};

struct ObstructionReport {
  double delta = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double bound = 0.0;
  std::vector<ObstructionTrial> trials;
  double max_scaled_sum = 0.0;
  bool all_within_bound = true;
  bool all_fired = true;
  bool all_deficit_preserved = true;
  bool passed() const { return all_within_bound && all_fired && all_deficit_preserved; }
};

/// Perturbs {2k e_{2k}} (n vectors in C^{2n}) within delta per index and certifies, for every
/// trial, that the rescaled system stays a Riesz sequence of deficit n, so psi is not complete.
ObstructionReport obstruction_demo(double delta, std::size_t trials, std::size_t n,
                                   std::uint64_t seed, std::size_t jobs = 1);

}  // namespace frameforge
