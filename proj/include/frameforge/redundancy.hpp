#pragma once

// Redundancy removal: turning redundant frames into Riesz systems by small perturbations.

#include <numbers>
#include <utility>
#include <vector>

#include "frameforge/analysis.hpp"
#include "frameforge/completions.hpp"
#include "frameforge/systems.hpp"

namespace frameforge {

/// n = ambient vectors required. K is the first index after which every ||g_k|| < delta/2.
/// Head vectors (k < K) stay put when their residual from the earlier head span is at least
/// delta/2 and are pushed out of it by delta/2 otherwise; the tail becomes (delta/2) times an
/// orthonormal basis of the complement of the head span. Result is a Riesz basis.
CompletionOutput riesz_from_vanishing(const VectorSystem& g, double delta);

struct NaiveNearRiesz {
  VectorSystem g;
  VectorSystem psi;
  double epsilon = 0.0;
};

/// g = {e_1, e_1, e_2, ..., e_d} and psi_1 = e_1, psi_k = e_{k-1}/2 + (1/2 + epsilon) e_k for
/// k >= 2, both d + 1 vectors in C^{d+1}.
NaiveNearRiesz naive_near_riesz(double epsilon, std::size_t d);

struct DeficitSpreadOutput {
  std::vector<CVector> ons;                    // ambient - N vectors
  std::vector<std::size_t> indices;            // 1-based coordinate each ons vector replaces
  // One entry per coordinate 1..ambient: ||e_k - eps_k||. Seeds have no output vector and
  // report 1, the norm of the removed e_k.
  std::vector<double> per_index_perturbation;
  std::vector<double> per_index_budget;        // sqrt(2 - 2 cos angle) / sqrt(m), 0 if untouched
  std::vector<std::size_t> exceptional_indices;  // the seeds 1..N
  std::vector<std::size_t> block_sizes;
  double angle = std::numbers::pi / 2;
  std::size_t deficit = 0;
};

/// Coordinates 1..N seed N chains. The blocks (consecutive, after the seeds) are dealt to the
/// chains round-robin; each chain rotates its carry through its blocks and the final carry is
/// dropped, which lowers the dimension of the span by N.
DeficitSpreadOutput spread_deficit(std::size_t ambient, std::size_t N,
                                   std::span<const std::size_t> block_sizes,
                                   double angle = std::numbers::pi / 2);

/// g has n = N + d vectors in C^D, D >= n, and g_{N+1..n} is a Riesz sequence. The tail is
/// mapped through V = [q_1 .. q_N | g_{N+1} .. g_n] from a deficit-spread basis; then
/// g_N, ..., g_1 are reinserted, each displaced by delta out of the current span when its
/// residual is below delta.
CompletionOutput near_riesz_to_riesz(const VectorSystem& g, std::size_t N, double delta,
                                     std::span<const std::size_t> block_sizes,
                                     double angle = std::numbers::pi / 2);

struct PartitionPlan {
  double threshold = 0.0;
  std::vector<std::vector<std::size_t>> classes;  // 1-based indices, increasing
  std::vector<double> per_class_lower_bound;      // RieszGram lower bound
};

/// Greedy first fit: each index joins the first class whose RieszGram lower bound stays at or
/// above threshold, otherwise it opens a new class.
PartitionPlan feichtinger_partition(const VectorSystem& g, double threshold);

/// Completes each class of the plan to a Riesz basis with complete_via_operator.
std::vector<CompletionOutput> partition_to_riesz_bases(const VectorSystem& g,
                                                       const PartitionPlan& plan, double delta,
                                                       const Completer& completer = {});

struct OrbitFactorization {
  CMatrix operator_T;
  CVector seed_phi;
  double operator_norm = 0.0;
  double reconstruction_residual = 0.0;  // max_k ||psi_k - T^k phi||, k = 0..d-1
};

/// For a basis psi_0..psi_{d-1}: T psi_k = psi_{k+1}, T psi_{d-1} = 0, phi = psi_0.
OrbitFactorization orbit_factorization(const VectorSystem& psi);

/// T^k phi for k = 0..count-1.
std::vector<CVector> orbit(const OrbitFactorization& f, std::size_t count);

struct SubsampleReport {
  double alpha = 0.0;
  std::size_t step = 1;
  std::size_t count = 0;
  std::size_t ambient_dim = 0;
  SpectralBounds bounds;
  std::size_t rank = 0;
  std::size_t excess = 0;
  std::vector<double> norms;
  bool norms_below_first = true;  // ||g_k|| < ||g_1|| for every k >= 2
};

/// Bounds, excess and norm profile of {g_N, g_2N, ..., g_nN} from the Carleson family.
SubsampleReport carleson_subsample_check(double alpha, std::size_t N, std::size_t n,
                                         std::size_t ambient);

}  // namespace frameforge
