#pragma once

// Spectral bounds, classification, excess/deficit, and perturbation certificates.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frameforge/systems.hpp"

namespace frameforge {

// Relative threshold: a spectral quantity counts as positive when it exceeds
// max(count, ambient) * kDefaultTol times the corresponding maximum.
inline constexpr double kDefaultTol = 1e-9;

enum class BoundConvention {
  // min / max nonzero eigenvalue of the frame operator (frame bounds on the span)
  FrameOnSpan,
  // min / max eigenvalue of the Gram matrix, zeros included (Riesz bounds)
  RieszGram,
};

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  BoundConvention convention = BoundConvention::FrameOnSpan;
  double tol = kDefaultTol;
};

struct Classification {
  bool is_bessel = true;  // every finite system is Bessel; bessel_bound is its B
  double bessel_bound = 0.0;
  bool is_frame_for_ambient = false;
  bool is_frame_sequence = false;
  bool is_riesz_sequence = false;
  bool is_riesz_basis = false;
  std::size_t rank = 0;
  std::size_t count = 0;
  std::size_t ambient_dim = 0;
};

enum class CertificateMode { FramePerturbation, RieszPerturbation };

struct Certificate {
  CertificateMode mode = CertificateMode::FramePerturbation;
  double sum_sq = 0.0;
  double lower_bound_A = 0.0;
  bool fired = false;
  std::string conclusion;
  // (deficit of g, deficit of h); present iff mode is RieszPerturbation and fired.
  std::optional<std::pair<std::size_t, std::size_t>> codim_check;
  // Whether the recomputed properties of h agree with the guaranteed conclusion (fired only).
  std::optional<bool> verified;
};

struct PerturbationReport {
  std::vector<double> per_index;  // ||g_k - psi_k||
  double sup = 0.0;
  double sum_sq = 0.0;
  std::optional<double> floor_A;
  std::optional<bool> floor_satisfied;
};

std::size_t rank(const VectorSystem& system, double tol = kDefaultTol);

SpectralBounds bounds(const VectorSystem& system, BoundConvention convention,
                      double tol = kDefaultTol);

Classification classify(const VectorSystem& system, double tol = kDefaultTol);

/// count - rank: the number of vectors removable without shrinking the span.
std::size_t excess(const VectorSystem& system, double tol = kDefaultTol);

/// ambient - rank: the codimension of the span.
std::size_t deficit(const VectorSystem& system, double tol = kDefaultTol);

/// Maximal removable index set (1-based). Scans left to right, keeping each vector that is
/// independent of the vectors already kept; the rest are removable.
std::vector<std::size_t> removable_set(const VectorSystem& system, double tol = kDefaultTol);

/// Tests sum ||g_k - h_k||^2 < A for the lower bound A of g under the mode's convention and,
/// when it holds, recomputes h's properties to verify the guaranteed conclusion.
Certificate certify_perturbation(const VectorSystem& g, const VectorSystem& h, CertificateMode mode,
                                 double tol = kDefaultTol);

PerturbationReport perturbation_report(const VectorSystem& g, const VectorSystem& psi,
                                       std::optional<double> floor_A = std::nullopt);

std::string to_string(BoundConvention c);
std::string to_string(CertificateMode m);

}  // namespace frameforge
