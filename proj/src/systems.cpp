#include "frameforge/systems.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "frameforge/error.hpp"
#include "frameforge/random.hpp"

namespace frameforge {

VectorSystem::VectorSystem(std::size_t ambient_dim, std::vector<CVector> vectors, std::string label)
    : ambient_dim_(ambient_dim), vectors_(std::move(vectors)), label_(std::move(label)) {
  if (ambient_dim_ == 0) throw InvalidArgument("ambient dimension must be positive");
  for (std::size_t k = 0; k < vectors_.size(); ++k) {
    if (vectors_[k].size() != ambient_dim_) {
      throw InvalidArgument(fmt::format("vector g_{} has length {}, expected ambient dimension {}",
                                        k + 1, vectors_[k].size(), ambient_dim_));
    }
    if (!all_finite(vectors_[k])) {
      throw InvalidArgument(fmt::format("vector g_{} has non-finite entries", k + 1));
    }
  }
}

const CVector& VectorSystem::at(std::size_t k) const {
  if (k == 0 || k > vectors_.size()) {
    throw InvalidArgument(fmt::format("index {} out of range 1..{}", k, vectors_.size()));
  }
  return vectors_[k - 1];
}

std::vector<double> VectorSystem::norms() const {
  std::vector<double> out;
  out.reserve(vectors_.size());
  for (const auto& v : vectors_) out.push_back(norm(v));
  return out;
}

CMatrix VectorSystem::synthesis() const { return CMatrix::from_columns(vectors_, ambient_dim_); }

VectorSystem VectorSystem::relabeled(std::string label) const {
  return VectorSystem(ambient_dim_, vectors_, std::move(label));
}

VectorSystem VectorSystem::select(std::span<const std::size_t> indices) const {
  std::vector<CVector> out;
  out.reserve(indices.size());
  for (std::size_t k : indices) out.push_back(at(k));
  return VectorSystem(ambient_dim_, std::move(out), label_);
}

VectorSystem VectorSystem::without(std::span<const std::size_t> indices) const {
  const std::unordered_set<std::size_t> drop(indices.begin(), indices.end());
  std::vector<CVector> out;
  for (std::size_t k = 1; k <= vectors_.size(); ++k) {
    if (!drop.contains(k)) out.push_back(vectors_[k - 1]);
  }
  return VectorSystem(ambient_dim_, std::move(out), label_);
}

HermitianMatrix gram(const VectorSystem& system) { return gram(system.vectors()); }

HermitianMatrix frame_operator(const VectorSystem& system) {
  return frame_operator(system.vectors(), system.ambient_dim());
}

// ---------------------------------------------------------------------------
// Families

std::size_t block_tight_count(std::size_t levels) { return levels * (levels + 1) / 2; }

namespace {

std::size_t block_tight_level(std::size_t k) {
  std::size_t level = 1;
  while (block_tight_count(level) < k) ++level;
  return level;
}

void require_ambient(std::size_t ambient, std::size_t required, std::string_view family) {
  if (ambient < required) {
    throw InvalidArgument(fmt::format("{} prefix needs ambient dimension at least {}, got {}",
                                      family, required, ambient));
  }
}

// Fits a vector of arbitrary length into C^ambient, returning the discarded squared mass.
double fit(const CVector& v, std::size_t ambient, CVector& out) {
  out.assign(ambient, Complex{});
  double tail = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i < ambient) {
      out[i] = v[i];
    } else {
      tail += std::norm(v[i]);
    }
  }
  return tail;
}

struct Materializer {
  std::size_t n;
  std::size_t ambient;

  Materialized operator()(const family::OrthonormalBasis&) const {
    require_ambient(ambient, n, "orthonormal basis");
    std::vector<CVector> v;
    for (std::size_t k = 0; k < n; ++k) v.push_back(basis_vector(ambient, k));
    return finish(std::move(v), "onb", 0.0);
  }

  Materialized operator()(const family::BlockTight& f) const {
    if (!(f.delta > 0.0)) throw InvalidArgument("block-tight family needs delta > 0");
    require_ambient(ambient, block_tight_level(n), "block-tight");
    std::vector<CVector> v;
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t level = block_tight_level(k);
      CVector e = basis_vector(ambient, level - 1);
      v.push_back(scaled(e, f.delta / std::sqrt(static_cast<double>(level))));
    }
    return finish(std::move(v), fmt::format("block-tight(delta={})", f.delta), 0.0);
  }

  Materialized operator()(const family::Carleson& f) const {
    if (!(f.alpha > 0.0 && f.alpha < 1.0)) {
      throw InvalidArgument("carleson family needs 0 < alpha < 1");
    }
    std::vector<double> lambda(ambient);
    std::vector<double> weight(ambient);
    for (std::size_t l = 1; l <= ambient; ++l) {
      const double a_pow = std::pow(f.alpha, static_cast<double>(l));
      lambda[l - 1] = 1.0 - a_pow;
      weight[l - 1] = std::sqrt(a_pow * (2.0 - a_pow));  // sqrt(1 - lambda^2)
    }
    std::vector<CVector> v;
    for (std::size_t k = 1; k <= n; ++k) {
      CVector g(ambient);
      for (std::size_t l = 0; l < ambient; ++l) {
        g[l] = std::pow(lambda[l], static_cast<double>(k)) * weight[l];
      }
      v.push_back(std::move(g));
    }
    // Each neglected coordinate carries at most 1 - lambda_l^2 <= 2 alpha^l.
    const double per_vector =
        2.0 * std::pow(f.alpha, static_cast<double>(ambient + 1)) / (1.0 - f.alpha);
    return finish(std::move(v), fmt::format("carleson(alpha={})", f.alpha),
                  static_cast<double>(n) * per_vector);
  }

  Materialized operator()(const family::ScaledEvenBasis&) const {
    require_ambient(ambient, 2 * n, "scaled even basis");
    std::vector<CVector> v;
    for (std::size_t k = 1; k <= n; ++k) {
      v.push_back(scaled(basis_vector(ambient, 2 * k - 1), 2.0 * static_cast<double>(k)));
    }
    return finish(std::move(v), "scaled-even", 0.0);
  }

  Materialized operator()(const family::DuplicatedFirst&) const {
    require_ambient(ambient, std::max<std::size_t>(1, n - 1), "duplicated-first");
    std::vector<CVector> v;
    v.push_back(basis_vector(ambient, 0));
    for (std::size_t k = 2; k <= n; ++k) v.push_back(basis_vector(ambient, k - 2));
    return finish(std::move(v), "duplicated-first", 0.0);
  }

  Materialized operator()(const family::OperatorOrbit& f) const {
    const std::size_t m = f.matrix.rows();
    if (f.matrix.cols() != m || f.seed.size() != m) {
      throw InvalidArgument("operator orbit needs a square matrix matching the seed length");
    }
    std::vector<CVector> v;
    double tail = 0.0;
    CVector current = f.seed;
    for (std::size_t k = 1; k <= n; ++k) {
      current = f.matrix.apply(current);
      CVector g;
      tail += fit(current, ambient, g);
      v.push_back(std::move(g));
    }
    return finish(std::move(v), "operator-orbit", tail);
  }

  Materialized operator()(const family::Custom& f) const {
    if (f.vectors.size() < n) {
      throw InvalidArgument(
          fmt::format("custom family has {} vectors, {} requested", f.vectors.size(), n));
    }
    std::vector<CVector> v;
    double tail = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      CVector g;
      tail += fit(f.vectors[k], ambient, g);
      v.push_back(std::move(g));
    }
    return finish(std::move(v), "custom", tail);
  }

  Materialized finish(std::vector<CVector> v, std::string label, double tail) const {
    return {VectorSystem(ambient, std::move(v), std::move(label)), {n, ambient, tail}};
  }
};

}  // namespace

Materialized materialize(const GeneratorFamily& family, std::size_t n, std::size_t ambient) {
  if (n == 0) throw InvalidArgument("prefix length must be at least 1");
  if (ambient == 0) throw InvalidArgument("ambient dimension must be positive");
  return std::visit(Materializer{n, ambient}, family);
}

// ---------------------------------------------------------------------------
// Perturbations

VectorSystem perturb(const VectorSystem& system, std::span<const CVector> deltas) {
  if (deltas.size() != system.size()) {
    throw InvalidArgument(fmt::format("perturbation count {} does not match system size {}",
                                      deltas.size(), system.size()));
  }
  std::vector<CVector> out;
  out.reserve(system.size());
  for (std::size_t k = 0; k < system.size(); ++k) {
    if (deltas[k].size() != system.ambient_dim()) {
      throw InvalidArgument(fmt::format("perturbation {} has wrong length", k + 1));
    }
    out.push_back(add(system.vectors()[k], deltas[k]));
  }
  return VectorSystem(system.ambient_dim(), std::move(out), system.label());
}

CVector random_direction(std::size_t dim, std::uint64_t seed, std::uint64_t index) {
  auto rng = SplitMix64::stream(seed, index);
  CVector d(dim);
  double n2 = 0.0;
  while (n2 == 0.0) {
    for (auto& z : d) z = Complex(rng.gaussian(), rng.gaussian());
    n2 = norm(d);
  }
  return scaled(d, 1.0 / n2);
}

VectorSystem random_perturbation(const VectorSystem& system, double delta_cap, std::uint64_t seed) {
  if (!(delta_cap >= 0.0)) throw InvalidArgument("delta_cap must be non-negative");
  if (delta_cap == 0.0) return system;
  std::vector<CVector> out;
  out.reserve(system.size());
  for (std::size_t k = 0; k < system.size(); ++k) {
    auto rng = SplitMix64::stream(seed ^ 0x5851F42D4C957F2DULL, k);
    const double magnitude = delta_cap * rng.uniform();
    const CVector dir = random_direction(system.ambient_dim(), seed, k);
    CVector v = system.vectors()[k];
    axpy(magnitude, dir, v);
    out.push_back(std::move(v));
  }
  return VectorSystem(system.ambient_dim(), std::move(out), system.label());
}

std::vector<CVector> random_orthonormal_basis(std::size_t dim, std::uint64_t seed) {
  std::vector<CVector> cols;
  cols.reserve(dim);
  for (std::size_t j = 0; j < dim; ++j) cols.push_back(random_direction(dim, seed, j));
  auto q = orthonormalize(cols);
  if (q.rank != dim) throw NumericalError("random basis draw was rank deficient");
  return q.ons;
}

}  // namespace frameforge
