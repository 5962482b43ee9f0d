#include "frameforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "frameforge/error.hpp"

namespace frameforge {

namespace {

void require_nonempty(const VectorSystem& s) {
  if (s.empty()) throw InvalidArgument("empty system");
}

void require_matching(const VectorSystem& g, const VectorSystem& h) {
  if (g.size() != h.size() || g.ambient_dim() != h.ambient_dim()) {
    throw InvalidArgument(fmt::format("systems do not match: {} vectors in C^{} vs {} in C^{}",
                                      g.size(), g.ambient_dim(), h.size(), h.ambient_dim()));
  }
}

double positivity_threshold(const VectorSystem& s, double tol, double upper) {
  return static_cast<double>(std::max(s.size(), s.ambient_dim())) * tol * upper;
}

// Spectrum of whichever of Gram / frame operator is smaller; both share the nonzero part.
std::vector<double> compact_spectrum(const VectorSystem& s) {
  if (s.size() <= s.ambient_dim()) return hermitian_eig(gram(s)).eigenvalues;
  return hermitian_eig(frame_operator(s)).eigenvalues;
}

}  // namespace

std::string to_string(BoundConvention c) {
  return c == BoundConvention::FrameOnSpan ? "FrameOnSpan" : "RieszGram";
}

std::string to_string(CertificateMode m) {
  return m == CertificateMode::FramePerturbation ? "FramePerturbation" : "RieszPerturbation";
}

std::size_t rank(const VectorSystem& system, double tol) {
  if (system.empty()) return 0;
  return numerical_rank(system.synthesis(), tol);
}

SpectralBounds bounds(const VectorSystem& system, BoundConvention convention, double tol) {
  require_nonempty(system);
  SpectralBounds out;
  out.convention = convention;
  out.tol = tol;
  if (convention == BoundConvention::RieszGram) {
    const auto ev = hermitian_eig(gram(system)).eigenvalues;
    out.lower = std::max(0.0, ev.front());
    out.upper = std::max(0.0, ev.back());
    return out;
  }
  const std::size_t r = rank(system, tol);
  if (r == 0) throw HypothesisError("zero span");
  const auto ev = compact_spectrum(system);
  out.lower = std::max(0.0, ev[ev.size() - r]);
  out.upper = ev.back();
  return out;
}

Classification classify(const VectorSystem& system, double tol) {
  require_nonempty(system);
  Classification c;
  c.count = system.size();
  c.ambient_dim = system.ambient_dim();
  c.rank = rank(system, tol);
  const auto ev = compact_spectrum(system);
  c.bessel_bound = std::max(0.0, ev.back());
  c.is_frame_for_ambient = c.rank == c.ambient_dim;
  c.is_frame_sequence = c.rank > 0;
  if (c.rank == c.count) {
    const auto riesz = bounds(system, BoundConvention::RieszGram, tol);
    c.is_riesz_sequence = riesz.lower > positivity_threshold(system, tol, riesz.upper);
  }
  c.is_riesz_basis = c.is_riesz_sequence && c.is_frame_for_ambient;
  return c;
}

std::size_t excess(const VectorSystem& system, double tol) {
  require_nonempty(system);
  return system.size() - rank(system, tol);
}

std::size_t deficit(const VectorSystem& system, double tol) {
  require_nonempty(system);
  return system.ambient_dim() - rank(system, tol);
}

std::vector<std::size_t> removable_set(const VectorSystem& system, double tol) {
  require_nonempty(system);
  const auto full = singular_values(system.synthesis());
  if (full.empty() || full.front() == 0.0) {
    std::vector<std::size_t> all(system.size());
    std::iota(all.begin(), all.end(), std::size_t{1});
    return all;
  }
  const double cutoff =
      static_cast<double>(std::max(system.size(), system.ambient_dim())) * tol * full.front();
  // Prefix ranks grow by at most one per step (interlacing), so |J| = excess exactly.
  std::vector<CVector> prefix;
  std::vector<std::size_t> removable;
  std::size_t prefix_rank = 0;
  for (std::size_t k = 1; k <= system.size(); ++k) {
    prefix.push_back(system.at(k));
    const auto sv = singular_values(CMatrix::from_columns(prefix, system.ambient_dim()));
    const auto r = static_cast<std::size_t>(
        std::count_if(sv.begin(), sv.end(), [&](double s) { return s > cutoff; }));
    if (r == prefix_rank) {
      removable.push_back(k);
    } else {
      prefix_rank = r;
    }
  }
  return removable;
}

Certificate certify_perturbation(const VectorSystem& g, const VectorSystem& h, CertificateMode mode,
                                 double tol) {
  require_nonempty(g);
  require_matching(g, h);
  const Classification cg = classify(g, tol);

  Certificate cert;
  cert.mode = mode;
  if (mode == CertificateMode::FramePerturbation) {
    if (!cg.is_frame_for_ambient) {
      throw HypothesisError(fmt::format(
          "frame perturbation needs g to be a frame for C^{} (rank {} < {})", g.ambient_dim(),
          cg.rank, g.ambient_dim()));
    }
    cert.lower_bound_A = bounds(g, BoundConvention::FrameOnSpan, tol).lower;
  } else {
    if (!cg.is_riesz_sequence) {
      throw HypothesisError("Riesz perturbation needs g to be a Riesz sequence");
    }
    cert.lower_bound_A = bounds(g, BoundConvention::RieszGram, tol).lower;
  }

  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = norm(subtract(g.vectors()[k], h.vectors()[k]));
    cert.sum_sq += d * d;
  }
  cert.fired = cert.sum_sq < cert.lower_bound_A;
  if (!cert.fired) {
    cert.conclusion = "inconclusive";
    return cert;
  }

  const Classification ch = classify(h, tol);
  if (mode == CertificateMode::FramePerturbation) {
    cert.verified = ch.is_frame_for_ambient;
    cert.conclusion =
        *cert.verified
            ? fmt::format("h is a frame for C^{} (recomputed lower bound {:.6g})", h.ambient_dim(),
                          bounds(h, BoundConvention::FrameOnSpan, tol).lower)
            : fmt::format("VIOLATION: h has rank {} < {}", ch.rank, h.ambient_dim());
  } else {
    const std::size_t dg = g.ambient_dim() - cg.rank;
    const std::size_t dh = h.ambient_dim() - ch.rank;
    cert.codim_check = std::make_pair(dg, dh);
    cert.verified = ch.is_riesz_sequence && dg == dh;
    cert.conclusion =
        *cert.verified
            ? fmt::format("h is a Riesz sequence with deficit {} (recomputed lower bound {:.6g})",
                          dh, bounds(h, BoundConvention::RieszGram, tol).lower)
            : fmt::format("VIOLATION: riesz={} deficit(g)={} deficit(h)={}",
                          ch.is_riesz_sequence, dg, dh);
  }
  return cert;
}

PerturbationReport perturbation_report(const VectorSystem& g, const VectorSystem& psi,
                                       std::optional<double> floor_A) {
  require_matching(g, psi);
  PerturbationReport r;
  r.per_index.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = norm(subtract(g.vectors()[k], psi.vectors()[k]));
    r.per_index.push_back(d);
    r.sup = std::max(r.sup, d);
    r.sum_sq += d * d;
  }
  if (floor_A) {
    r.floor_A = floor_A;
    r.floor_satisfied = r.sum_sq >= *floor_A;
  }
  return r;
}

}  // namespace frameforge
