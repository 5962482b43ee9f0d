#include "frameforge/completions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "frameforge/error.hpp"
#include "frameforge/parallel.hpp"
#include "frameforge/random.hpp"

namespace frameforge {

namespace {

void require_positive_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument(fmt::format("delta must be a positive finite number, got {}", delta));
  }
}

std::vector<std::size_t> iota_indices(std::size_t first, std::size_t count) {
  std::vector<std::size_t> v(count);
  std::iota(v.begin(), v.end(), first);
  return v;
}

CompletionOutput make_output(const VectorSystem& g, VectorSystem psi, std::string method) {
  const auto head_indices = iota_indices(1, g.size());
  const VectorSystem head = psi.size() == g.size() ? psi : psi.select(head_indices);
  PerturbationReport report = perturbation_report(g, head);
  Classification witness = classify(psi);
  return CompletionOutput{std::move(psi), std::move(report), std::move(method), witness,
                          {}, {}, {}, {}};
}

struct CompleterName {
  std::string operator()(const completer::TrivialAppend&) const { return "trivial-append"; }
  std::string operator()(const completer::SpreadRotation&) const { return "spread-rotation"; }
};

}  // namespace

std::string completer_name(const Completer& completer) {
  return std::visit(CompleterName{}, completer);
}

// ---------------------------------------------------------------------------
// Orthonormal completers

CVector run_rotation_chain(std::vector<CVector>& vectors, std::span<const RotationBlock> blocks,
                           CVector carry, double angle) {
  for (const auto& block : blocks) {
    if (block.size == 0 || block.first + block.size > vectors.size()) {
      throw InvalidArgument("rotation block out of range");
    }
    CVector mean(carry.size());
    for (std::size_t i = 0; i < block.size; ++i) axpy(1.0, vectors[block.first + i], mean);
    const double mean_norm = norm(mean);
    if (mean_norm == 0.0) throw NumericalError("rotation block has zero mean direction");
    const CVector u = scaled(mean, 1.0 / mean_norm);
    for (std::size_t i = 0; i < block.size; ++i) {
      auto& v = vectors[block.first + i];
      v = rotate_plane(v, u, carry, angle);
    }
    carry = rotate_plane(carry, u, carry, angle);
  }
  return carry;
}

CompletedBasis complete_orthonormal(const Completer& completer, std::span<const CVector> ons,
                                    std::size_t ambient) {
  const auto extras = complement_basis(ons, ambient);
  const std::size_t n = ons.size();

  CompletedBasis out;
  out.chi.assign(ons.begin(), ons.end());
  out.appended_indices = iota_indices(n + 1, extras.size());

  if (const auto* spread = std::get_if<completer::SpreadRotation>(&completer)) {
    std::vector<RotationBlock> blocks;
    std::size_t offset = 0;
    for (std::size_t size : spread->block_sizes) {
      if (size == 0) throw InvalidArgument("block sizes must be at least 1");
      blocks.push_back({offset, size});
      offset += size;
    }
    if (offset > n) {
      throw InvalidArgument(
          fmt::format("blocks cover {} indices but the system has only {}", offset, n));
    }
    // Chain j takes blocks j, j + c, j + 2c, ... where c is the number of complement directions.
    const std::size_t chains = extras.size();
    for (std::size_t j = 0; j < chains; ++j) {
      std::vector<RotationBlock> chain_blocks;
      for (std::size_t b = j; b < blocks.size(); b += chains) chain_blocks.push_back(blocks[b]);
      out.chi.push_back(run_rotation_chain(out.chi, chain_blocks, extras[j], spread->angle));
    }
  } else {
    out.chi.insert(out.chi.end(), extras.begin(), extras.end());
  }

  out.per_index_perturbation.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.per_index_perturbation.push_back(norm(subtract(ons[k], out.chi[k])));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Completions with same index set

CompletionOutput complete_not_bounded_below(const VectorSystem& g, double delta) {
  require_positive_delta(delta);
  if (g.empty()) throw InvalidArgument("empty system");
  const std::size_t d = g.ambient_dim();
  const std::size_t needed = block_tight_count(d);
  const auto frame = materialize(family::BlockTight{delta}, needed, d).system;
  const double A = delta * delta;

  // Earliest admissible index for each n; thresholds shrink with n, so earliest is optimal.
  const auto norms = g.norms();
  std::vector<std::size_t> picks;
  std::size_t k = 0;
  for (std::size_t n = 1; n <= needed; ++n) {
    const double limit =
        3.0 * A / (std::numbers::pi * std::numbers::pi * static_cast<double>(n * n));
    while (k < norms.size() && norms[k] * norms[k] > limit) ++k;
    if (k == norms.size()) {
      throw HypothesisError(fmt::format(
          "not enough small vectors: need {} indices with ||g_(k_n)||^2 <= 3 delta^2/(pi^2 n^2), "
          "largest achievable n is {}",
          needed, n - 1));
    }
    picks.push_back(k);
    ++k;
  }

  std::vector<CVector> psi = g.vectors();
  double replaced_sum_sq = 0.0;
  for (std::size_t n = 0; n < picks.size(); ++n) {
    psi[picks[n]] = add(frame.vectors()[n], g.vectors()[picks[n]]);
    replaced_sum_sq += norms[picks[n]] * norms[picks[n]];
  }

  auto out = make_output(g, VectorSystem(d, std::move(psi), g.label()), "prop2.1(i)");
  for (std::size_t p : picks) out.modified_indices.push_back(p + 1);
  out.diagnostics["frame_lower_bound_A"] = A;
  // sum_n ||f_n - psi_(k_n)||^2 = sum_n ||g_(k_n)||^2, bounded by A / 2.
  out.diagnostics["replaced_sum_sq"] = replaced_sum_sq;
  out.diagnostics["replaced_budget"] = A / 2.0;
  return out;
}

CompletionOutput complete_excess_ge_codim(const VectorSystem& g, double delta) {
  require_positive_delta(delta);
  const std::size_t M = deficit(g);
  const std::size_t E = excess(g);
  if (E < M) {
    throw HypothesisError(fmt::format(
        "completion needs excess >= deficit, got excess {} < deficit {}", E, M));
  }
  std::vector<CVector> psi = g.vectors();
  auto removable = removable_set(g);
  removable.resize(M);
  const auto span_basis = orthonormalize(g.vectors()).ons;
  const auto complement = complement_basis(span_basis, g.ambient_dim());
  for (std::size_t j = 0; j < M; ++j) {
    axpy(delta / static_cast<double>(j + 1), complement[j], psi[removable[j] - 1]);
  }
  auto out = make_output(g, VectorSystem(g.ambient_dim(), std::move(psi), g.label()), "prop2.1(ii)");
  out.modified_indices = removable;
  out.diagnostics["excess"] = static_cast<double>(E);
  out.diagnostics["deficit"] = static_cast<double>(M);
  return out;
}

CompletionOutput complete_convergent(const VectorSystem& g, std::span<const Complex> limit,
                                     std::size_t K, double delta) {
  require_positive_delta(delta);
  const std::size_t d = g.ambient_dim();
  const std::size_t n = g.size();
  if (limit.size() != d) throw InvalidArgument("limit vector has the wrong dimension");
  if (K < 1 || K > n) throw InvalidArgument(fmt::format("K must lie in 1..{}, got {}", n, K));
  if (n - K < d) {
    throw HypothesisError(fmt::format(
        "need at least {} indices after K = {} to reach every basis direction, have {}", d, K,
        n - K));
  }
  double worst = 0.0;
  for (std::size_t k = K; k <= n; ++k) worst = std::max(worst, norm(subtract(limit, g.at(k))));
  if (worst > delta / 2.0) {
    throw HypothesisError(fmt::format(
        "tail is not within delta/2 = {} of the limit (max distance {})", delta / 2.0, worst));
  }

  std::vector<CVector> psi = g.vectors();
  psi[K - 1].assign(limit.begin(), limit.end());
  for (std::size_t k = K + 1; k <= n; ++k) {
    CVector v(limit.begin(), limit.end());
    const std::size_t j = (k - K - 1) % d;
    v[j] += delta * std::ldexp(1.0, -static_cast<int>(k - K));
    psi[k - 1] = std::move(v);
  }
  auto out = make_output(g, VectorSystem(d, std::move(psi), g.label()), "prop2.1(iii)");
  out.modified_indices = iota_indices(K, n - K + 1);
  out.diagnostics["K"] = static_cast<double>(K);
  out.diagnostics["tail_distance_to_limit"] = worst;
  return out;
}

// ---------------------------------------------------------------------------
// Operator factorization

OperatorFactorization factorize_bessel(const VectorSystem& g) {
  if (g.empty()) throw InvalidArgument("empty system");
  const std::size_t n = g.size();
  const std::size_t d = g.ambient_dim();
  OperatorFactorization f;
  for (std::size_t k = 0; k < n; ++k) f.coordinate_ons.push_back(basis_vector(n, k));
  f.synthesis = g.synthesis();
  const auto span_basis = orthonormalize(g.vectors()).ons;
  f.complement = complement_basis(span_basis, d);

  f.extension = CMatrix(d, n + f.complement.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < n; ++k) f.extension(i, k) = f.synthesis(i, k);
    for (std::size_t j = 0; j < f.complement.size(); ++j) f.extension(i, n + j) = f.complement[j][i];
  }
  f.operator_norm_V = operator_norm(f.extension);
  return f;
}

CompletionOutput complete_via_operator(const VectorSystem& g, const Completer& completer,
                                       double delta) {
  require_positive_delta(delta);
  const auto f = factorize_bessel(g);
  const std::size_t n = g.size();
  const std::size_t model_dim = f.extension.cols();

  std::vector<CVector> ons;
  for (std::size_t k = 0; k < n; ++k) ons.push_back(basis_vector(model_dim, k));
  const auto basis = complete_orthonormal(completer, ons, model_dim);

  const double budget = delta / f.operator_norm_V;
  for (std::size_t k = 0; k < n; ++k) {
    if (basis.per_index_perturbation[k] > budget * (1.0 + 1e-12)) {
      throw HypothesisError(fmt::format(
          "completer moves index {} by {:.6g}, above the budget delta/||V|| = {:.6g}", k + 1,
          basis.per_index_perturbation[k], budget));
    }
  }

  std::vector<CVector> psi;
  psi.reserve(basis.chi.size());
  for (const auto& chi : basis.chi) psi.push_back(f.extension.apply(chi));

  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lhs = norm(subtract(g.vectors()[k], psi[k]));
    const double rhs = f.operator_norm_V * basis.per_index_perturbation[k];
    if (lhs > rhs * (1.0 + 1e-8) + 1e-12) ++violations;
    if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
  }

  const bool riesz_in = classify(g).is_riesz_sequence;
  auto out = make_output(g, VectorSystem(g.ambient_dim(), std::move(psi), g.label()),
                         "thm2.4/" + completer_name(completer));
  out.appended_indices = basis.appended_indices;
  for (std::size_t k = 0; k < n; ++k) {
    if (basis.per_index_perturbation[k] > 0.0) out.modified_indices.push_back(k + 1);
  }
  out.diagnostics["operator_norm_V"] = f.operator_norm_V;
  out.diagnostics["bessel_bound_psi"] = out.witness.bessel_bound;
  out.diagnostics["chain_inequality_violations"] = static_cast<double>(violations);
  out.diagnostics["chain_inequality_worst_ratio"] = worst_ratio;
  out.diagnostics["input_is_riesz_sequence"] = riesz_in ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Scaled even basis obstruction

double obstruction_bound(double delta) {
  return std::numbers::pi * std::numbers::pi * delta * delta / 24.0;
}

ObstructionReport obstruction_demo(double delta, std::size_t trials, std::size_t n,
                                   std::uint64_t seed, std::size_t jobs) {
  if (!(delta >= 0.0 && delta < kObstructionDeltaLimit)) {
    throw HypothesisError(fmt::format("delta must lie in [0, 2 sqrt(6)/pi = {:.6f}), got {}",
                                      kObstructionDeltaLimit, delta));
  }
  if (n == 0) throw InvalidArgument("n must be at least 1");
  const auto g = materialize(family::ScaledEvenBasis{}, n, 2 * n).system;

  std::vector<CVector> even;
  for (std::size_t k = 1; k <= n; ++k) even.push_back(basis_vector(2 * n, 2 * k - 1));
  const VectorSystem unit_even(2 * n, std::move(even), "even-basis");

  ObstructionReport report;
  report.delta = delta;
  report.n = n;
  report.seed = seed;
  report.bound = obstruction_bound(delta);
  report.trials.resize(trials);

  parallel_for(trials, jobs, [&](std::size_t t) {
    ObstructionTrial& trial = report.trials[t];
    trial.seed = SplitMix64::stream(seed, t).next();
    const auto psi = random_perturbation(g, delta, trial.seed);
    std::vector<CVector> rescaled;
    for (std::size_t k = 1; k <= n; ++k) {
      const double diff = norm(subtract(g.at(k), psi.at(k)));
      trial.max_perturbation = std::max(trial.max_perturbation, diff);
      trial.scaled_sum += diff * diff / (4.0 * static_cast<double>(k * k));
      rescaled.push_back(scaled(psi.at(k), 1.0 / (2.0 * static_cast<double>(k))));
    }
    const VectorSystem h(2 * n, std::move(rescaled), "rescaled-psi");
    const auto cert = certify_perturbation(unit_even, h, CertificateMode::RieszPerturbation);
    trial.fired = cert.fired;
    trial.verified = cert.verified.value_or(false);
    if (cert.codim_check) {
      trial.deficit_g = cert.codim_check->first;
      trial.deficit_h = cert.codim_check->second;
    }
  });

  for (const auto& trial : report.trials) {
    report.max_scaled_sum = std::max(report.max_scaled_sum, trial.scaled_sum);
    report.all_within_bound = report.all_within_bound && trial.scaled_sum <= report.bound;
    report.all_fired = report.all_fired && trial.fired;
    report.all_deficit_preserved =
        report.all_deficit_preserved && trial.verified && trial.deficit_h == n;
  }
  return report;
}

}  // namespace frameforge
