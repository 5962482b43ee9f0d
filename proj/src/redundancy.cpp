#include "frameforge/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "frameforge/error.hpp"

namespace frameforge {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(fmt::format("{} must be a positive finite number, got {}", name, value));
  }
}

// x minus its projection onto span(basis); two passes keep it orthogonal to working precision.
CVector residual(std::span<const CVector> basis, std::span<const Complex> x) {
  CVector r(x.begin(), x.end());
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) axpy(-inner(r, q), q, r);
  }
  return r;
}

// Unit vector along the residual of x, or the first complement direction when the residual
// is too small to carry a reliable direction.
CVector escape_direction(std::span<const CVector> basis, std::span<const Complex> x,
                         std::size_t ambient) {
  const CVector r = residual(basis, x);
  const double rn = norm(r);
  if (rn > 1e-8 * std::max(1.0, norm(x))) return scaled(r, 1.0 / rn);
  return complement_basis(basis, ambient).front();
}

void append_unit(std::vector<CVector>& basis, std::span<const Complex> x) {
  const CVector r = residual(basis, x);
  const double rn = norm(r);
  if (rn == 0.0) throw NumericalError("vector lies in the span it should extend");
  basis.push_back(scaled(r, 1.0 / rn));
}

std::optional<double> floor_for(const VectorSystem& g) {
  // Only guaranteed when g also spans the ambient space; reported for any redundant input.
  if (rank(g) == 0 || excess(g) == 0) return std::nullopt;
  return bounds(g, BoundConvention::FrameOnSpan).lower;
}

CompletionOutput assemble(const VectorSystem& g, std::vector<CVector> psi, std::string method,
                          std::optional<double> floor_A) {
  VectorSystem out(g.ambient_dim(), std::move(psi), g.label());
  PerturbationReport report = perturbation_report(g, out, floor_A);
  Classification witness = classify(out);
  return CompletionOutput{std::move(out), std::move(report), std::move(method), witness,
                          {}, {}, {}, {}};
}

}  // namespace

// ---------------------------------------------------------------------------

CompletionOutput riesz_from_vanishing(const VectorSystem& g, double delta) {
  require_positive(delta, "delta");
  const std::size_t d = g.ambient_dim();
  const std::size_t n = g.size();
  if (n != d) {
    throw HypothesisError(fmt::format(
        "need as many vectors as the ambient dimension, got {} vectors in C^{}", n, d));
  }
  const auto norms = g.norms();
  const double half = delta / 2.0;
  if (norms.back() >= half) {
    throw HypothesisError(fmt::format(
        "no index K with ||g_k|| < delta/2 = {} for all k >= K: the last norm is {:.6g}, the "
        "smallest norm is {:.6g}",
        half, norms.back(), *std::min_element(norms.begin(), norms.end())));
  }
  std::size_t K = n;  // 1-based
  while (K > 1 && norms[K - 2] < half) --K;

  std::vector<CVector> psi;
  std::vector<CVector> head_basis;
  std::vector<std::size_t> modified;
  for (std::size_t k = 1; k < K; ++k) {
    const CVector& x = g.at(k);
    CVector v = x;
    if (norm(residual(head_basis, x)) < half) {
      axpy(half, escape_direction(head_basis, x, d), v);
      modified.push_back(k);
    }
    append_unit(head_basis, v);
    psi.push_back(std::move(v));
  }
  const auto tail = complement_basis(head_basis, d);
  if (tail.size() != n - K + 1) {
    throw NumericalError("head span has the wrong dimension");
  }
  for (std::size_t k = K; k <= n; ++k) {
    psi.push_back(scaled(tail[k - K], half));
    modified.push_back(k);
  }

  auto out = assemble(g, std::move(psi), "thm3.2", floor_for(g));
  out.modified_indices = std::move(modified);
  out.diagnostics["K"] = static_cast<double>(K);
  out.diagnostics["input_excess"] = static_cast<double>(excess(g));
  return out;
}

NaiveNearRiesz naive_near_riesz(double epsilon, std::size_t d) {
  require_positive(epsilon, "epsilon");
  if (d < 2) throw InvalidArgument(fmt::format("d must be at least 2, got {}", d));
  const std::size_t dim = d + 1;
  std::vector<CVector> g;
  std::vector<CVector> psi;
  g.push_back(basis_vector(dim, 0));
  psi.push_back(basis_vector(dim, 0));
  for (std::size_t k = 2; k <= dim; ++k) {
    g.push_back(basis_vector(dim, k - 2));
    CVector v(dim);
    v[k - 2] = 0.5;
    v[k - 1] = 0.5 + epsilon;
    psi.push_back(std::move(v));
  }
  return {VectorSystem(dim, std::move(g), "duplicated-first"),
          VectorSystem(dim, std::move(psi), "naive-near-riesz"), epsilon};
}

// ---------------------------------------------------------------------------

DeficitSpreadOutput spread_deficit(std::size_t ambient, std::size_t N,
                                   std::span<const std::size_t> block_sizes, double angle) {
  if (ambient == 0) throw InvalidArgument("ambient dimension must be positive");
  if (!std::isfinite(angle)) throw InvalidArgument("angle must be finite");
  std::size_t covered = N;
  for (std::size_t m : block_sizes) {
    if (m == 0) throw InvalidArgument("block sizes must be at least 1");
    covered += m;
  }
  if (covered > ambient) {
    throw HypothesisError(fmt::format(
        "budget infeasible: {} seeds plus blocks need {} coordinates, ambient is {}", N, covered,
        ambient));
  }

  std::vector<CVector> vectors;
  for (std::size_t k = 0; k < ambient; ++k) vectors.push_back(basis_vector(ambient, k));

  DeficitSpreadOutput out;
  out.block_sizes.assign(block_sizes.begin(), block_sizes.end());
  out.angle = angle;
  out.deficit = N;
  out.per_index_budget.assign(ambient, 0.0);

  std::vector<RotationBlock> blocks;
  std::size_t offset = N;
  for (std::size_t m : block_sizes) {
    blocks.push_back({offset, m});
    offset += m;
  }
  const double chord = std::sqrt(2.0 - 2.0 * std::cos(angle));
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<RotationBlock> chain;
    for (std::size_t b = j; b < blocks.size(); b += N) {
      chain.push_back(blocks[b]);
      for (std::size_t i = 0; i < blocks[b].size; ++i) {
        out.per_index_budget[blocks[b].first + i] =
            chord / std::sqrt(static_cast<double>(blocks[b].size));
      }
    }
    run_rotation_chain(vectors, chain, vectors[j], angle);
  }

  for (std::size_t k = 0; k < ambient; ++k) {
    if (k < N) {
      out.per_index_perturbation.push_back(1.0);
      out.exceptional_indices.push_back(k + 1);
      continue;
    }
    out.per_index_perturbation.push_back(norm(subtract(basis_vector(ambient, k), vectors[k])));
    out.ons.push_back(std::move(vectors[k]));
    out.indices.push_back(k + 1);
  }
  return out;
}

CompletionOutput near_riesz_to_riesz(const VectorSystem& g, std::size_t N, double delta,
                                     std::span<const std::size_t> block_sizes, double angle) {
  require_positive(delta, "delta");
  const std::size_t n = g.size();
  const std::size_t D = g.ambient_dim();
  if (N >= n) {
    throw InvalidArgument(fmt::format("N = {} leaves no tail in a system of {} vectors", N, n));
  }
  const std::size_t d = n - N;
  if (D < n) {
    throw HypothesisError(fmt::format(
        "ambient C^{} is too small: deficit spreading needs at least N + d = {}", D, n));
  }
  std::vector<std::size_t> tail_indices(d);
  std::iota(tail_indices.begin(), tail_indices.end(), N + 1);
  const VectorSystem tail = g.select(tail_indices);
  if (!classify(tail).is_riesz_sequence) {
    throw HypothesisError(
        fmt::format("g_{}..g_{} is not a Riesz sequence", N + 1, n));
  }
  const auto floor_A = floor_for(g);
  if (N == 0) {
    auto out = assemble(g, g.vectors(), "thm3.5", floor_A);
    out.diagnostics["operator_norm_V"] = operator_norm(tail.synthesis());
    return out;
  }

  const auto complement = complement_basis(orthonormalize(tail.vectors()).ons, D);
  std::vector<CVector> columns(complement.begin(), complement.begin() + N);
  columns.insert(columns.end(), tail.vectors().begin(), tail.vectors().end());
  const CMatrix V = CMatrix::from_columns(columns, D);
  const double norm_V = operator_norm(V);

  if (!block_sizes.empty()) {
    const std::size_t m_min = *std::min_element(block_sizes.begin(), block_sizes.end());
    if (m_min == 0) throw InvalidArgument("block sizes must be at least 1");
    const double step = std::sqrt(2.0 - 2.0 * std::cos(angle)) / std::sqrt(double(m_min)) * norm_V;
    if (step > delta) {
      throw HypothesisError(fmt::format(
          "budget infeasible: sqrt(2 - 2 cos angle)/sqrt({}) * ||V|| = {:.6g} exceeds delta = {}",
          m_min, step, delta));
    }
  }
  const auto spread = spread_deficit(n, N, block_sizes, angle);

  std::vector<CVector> psi(n);
  std::vector<CVector> span_basis;
  for (std::size_t i = 0; i < spread.ons.size(); ++i) {
    psi[spread.indices[i] - 1] = V.apply(spread.ons[i]);
  }
  for (std::size_t k = N + 1; k <= n; ++k) append_unit(span_basis, psi[k - 1]);

  std::vector<std::size_t> modified;
  for (std::size_t j = N; j >= 1; --j) {
    const CVector& x = g.at(j);
    CVector v = x;
    if (norm(residual(span_basis, x)) < delta) {
      axpy(delta, escape_direction(span_basis, x, D), v);
      modified.push_back(j);
    }
    append_unit(span_basis, v);
    psi[j - 1] = std::move(v);
  }
  std::reverse(modified.begin(), modified.end());

  auto out = assemble(g, std::move(psi), "thm3.5", floor_A);
  for (std::size_t k = N + 1; k <= n; ++k) {
    if (spread.per_index_perturbation[k - 1] > 0.0) modified.push_back(k);
  }
  out.modified_indices = std::move(modified);
  for (std::size_t k = 1; k <= n; ++k) {
    if (out.report.per_index[k - 1] > delta * (1.0 + 1e-12)) out.exceptional_indices.push_back(k);
  }
  out.diagnostics["operator_norm_V"] = norm_V;
  out.diagnostics["tail_deficit_in_model"] = static_cast<double>(spread.deficit);
  out.diagnostics["final_rank"] = static_cast<double>(out.witness.rank);
  return out;
}

// ---------------------------------------------------------------------------

PartitionPlan feichtinger_partition(const VectorSystem& g, double threshold) {
  require_positive(threshold, "threshold");
  if (g.empty()) throw InvalidArgument("empty system");
  const auto norms = g.norms();
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (norms[k] == 0.0) {
      throw HypothesisError(fmt::format("not norm-bounded below: g_{} = 0", k + 1));
    }
    if (norms[k] * norms[k] < threshold) {
      throw HypothesisError(fmt::format(
          "||g_{}||^2 = {:.6g} is below the threshold {}, so no class can hold it", k + 1,
          norms[k] * norms[k], threshold));
    }
  }

  PartitionPlan plan;
  plan.threshold = threshold;
  std::vector<std::vector<CVector>> members;
  for (std::size_t k = 1; k <= g.size(); ++k) {
    bool placed = false;
    for (std::size_t c = 0; c < members.size() && !placed; ++c) {
      members[c].push_back(g.at(k));
      const double lower = hermitian_eig(gram(members[c])).eigenvalues.front();
      if (lower >= threshold) {
        plan.classes[c].push_back(k);
        plan.per_class_lower_bound[c] = lower;
        placed = true;
      } else {
        members[c].pop_back();
      }
    }
    if (!placed) {
      members.push_back({g.at(k)});
      plan.classes.push_back({k});
      plan.per_class_lower_bound.push_back(norms[k - 1] * norms[k - 1]);
    }
  }
  return plan;
}

std::vector<CompletionOutput> partition_to_riesz_bases(const VectorSystem& g,
                                                       const PartitionPlan& plan, double delta,
                                                       const Completer& completer) {
  std::vector<int> seen(g.size(), 0);
  for (const auto& cls : plan.classes) {
    if (cls.empty()) throw InvalidArgument("partition has an empty class");
    for (std::size_t k : cls) {
      if (k < 1 || k > g.size()) {
        throw InvalidArgument(fmt::format("partition index {} out of range 1..{}", k, g.size()));
      }
      ++seen[k - 1];
    }
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k] != 1) {
      throw InvalidArgument(fmt::format("index {} appears {} times in the partition", k + 1, seen[k]));
    }
  }

  std::vector<CompletionOutput> out;
  for (std::size_t c = 0; c < plan.classes.size(); ++c) {
    const auto part = g.select(plan.classes[c]).relabeled(fmt::format("class-{}", c + 1));
    out.push_back(complete_via_operator(part, completer, delta));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CVector> orbit(const OrbitFactorization& f, std::size_t count) {
  std::vector<CVector> out;
  CVector x = f.seed_phi;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(x);
    x = f.operator_T.apply(x);
  }
  return out;
}

OrbitFactorization orbit_factorization(const VectorSystem& psi) {
  if (psi.empty()) throw InvalidArgument("empty system");
  if (!classify(psi).is_riesz_basis) {
    throw HypothesisError(fmt::format("orbit factorization needs a basis of C^{}; got {} vectors",
                                      psi.ambient_dim(), psi.size()));
  }
  const std::size_t d = psi.size();
  const CMatrix basis = psi.synthesis();
  CMatrix shifted(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k + 1 < d; ++k) shifted(i, k) = basis(i, k + 1);
  }
  OrbitFactorization f;
  f.operator_T = shifted * inverse(basis);
  f.seed_phi = psi.vectors().front();
  f.operator_norm = operator_norm(f.operator_T);
  const auto generated = orbit(f, d);
  for (std::size_t k = 0; k < d; ++k) {
    f.reconstruction_residual =
        std::max(f.reconstruction_residual, norm(subtract(psi.vectors()[k], generated[k])));
  }
  return f;
}

SubsampleReport carleson_subsample_check(double alpha, std::size_t N, std::size_t n,
                                         std::size_t ambient) {
  if (N == 0 || n == 0) throw InvalidArgument("step and count must be at least 1");
  const auto full = materialize(family::Carleson{alpha}, N * n, ambient).system;
  std::vector<std::size_t> picks;
  for (std::size_t k = 1; k <= n; ++k) picks.push_back(k * N);
  const auto sub = full.select(picks);

  SubsampleReport r;
  r.alpha = alpha;
  r.step = N;
  r.count = n;
  r.ambient_dim = ambient;
  r.rank = rank(sub);
  r.excess = n - r.rank;
  r.bounds = bounds(sub, BoundConvention::FrameOnSpan);
  r.norms = sub.norms();
  for (std::size_t k = 1; k < r.norms.size(); ++k) {
    r.norms_below_first = r.norms_below_first && r.norms[k] < r.norms[0];
  }
  return r;
}

}  // namespace frameforge
