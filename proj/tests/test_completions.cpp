#include "doctest.h"

#include <cmath>
#include <numbers>

#include "frameforge/completions.hpp"
#include "frameforge/error.hpp"

using namespace frameforge;

namespace {

double gram_identity_residual(const std::vector<CVector>& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      worst = std::max(worst, std::abs(inner(v[i], v[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

std::vector<CVector> standard_ons(std::size_t count, std::size_t dim) {
  std::vector<CVector> v;
  for (std::size_t k = 0; k < count; ++k) v.push_back(basis_vector(dim, k));
  return v;
}

// g_k = e_{k mod d} / k^2
VectorSystem vanishing(std::size_t d, std::size_t n) {
  std::vector<CVector> v;
  for (std::size_t k = 1; k <= n; ++k) {
    CVector x(d);
    x[k % d] = 1.0 / static_cast<double>(k * k);
    v.push_back(std::move(x));
  }
  return VectorSystem(d, std::move(v));
}

}  // namespace

TEST_CASE("trivial append completes an orthonormal system") {
  const auto ons = standard_ons(3, 5);
  const auto out = complete_orthonormal(completer::TrivialAppend{}, ons, 5);
  CHECK(out.chi.size() == 5);
  CHECK(gram_identity_residual(out.chi) < 1e-12);
  CHECK(out.appended_indices == std::vector<std::size_t>{4, 5});
  for (double p : out.per_index_perturbation) CHECK(p == 0.0);
}

TEST_CASE("rotation chain at a right angle") {
  // One block {e_1, e_2}, carry e_3: u = (e_1 + e_2)/sqrt2 and the carry ends at -u.
  std::vector<CVector> v = standard_ons(2, 3);
  const RotationBlock block{0, 2};
  const auto carry = run_rotation_chain(v, std::span(&block, 1), basis_vector(3, 2),
                                        std::numbers::pi / 2);
  CVector minus_u{-1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
  CHECK(norm(subtract(carry, minus_u)) < 1e-15);
  std::vector<CVector> all = v;
  all.push_back(carry);
  CHECK(gram_identity_residual(all) < 1e-14);
  CHECK(norm(subtract(v[0], basis_vector(3, 0))) == doctest::Approx(1.0));  // sqrt(2/2)
}

TEST_CASE("spread rotation keeps perturbations within the block budget") {
  const std::size_t n = 4 + 9 + 16;
  const auto ons = standard_ons(n, n + 1);
  const auto out =
      complete_orthonormal(completer::SpreadRotation{{4, 9, 16}}, ons, n + 1);
  CHECK(out.chi.size() == n + 1);
  CHECK(gram_identity_residual(out.chi) < 1e-12);
  for (std::size_t k = 0; k < n; ++k) {
    const double m = k < 4 ? 4.0 : k < 13 ? 9.0 : 16.0;
    CHECK(out.per_index_perturbation[k] <= std::sqrt(2.0 / m) + 1e-12);
    CHECK(out.per_index_perturbation[k] == doctest::Approx(std::sqrt(2.0 / m)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(complete_orthonormal(completer::SpreadRotation{{40}}, ons, n + 1), InvalidArgument);
  CHECK_THROWS_AS(complete_orthonormal(completer::SpreadRotation{{0}}, ons, n + 1), InvalidArgument);
}

TEST_CASE("not bounded below: replaced indices stay within A/2") {
  const double delta = 0.5;
  const auto g = vanishing(4, 400);
  const auto out = complete_not_bounded_below(g, delta);
  CHECK(out.witness.rank == 4);
  CHECK(out.witness.is_frame_for_ambient);
  CHECK(out.modified_indices.size() == block_tight_count(4));
  CHECK(out.diagnostics.at("replaced_sum_sq") <= delta * delta / 2.0 + 1e-12);
  double sum = 0.0;
  for (std::size_t k : out.modified_indices) sum += std::pow(norm(g.at(k)), 2);
  CHECK(sum == doctest::Approx(out.diagnostics.at("replaced_sum_sq")));
  // picks are increasing
  CHECK(std::is_sorted(out.modified_indices.begin(), out.modified_indices.end()));
}

TEST_CASE("not bounded below: too few small vectors") {
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  CHECK_THROWS_AS(complete_not_bounded_below(onb, 0.5), HypothesisError);
  CHECK_THROWS_AS(complete_not_bounded_below(onb, -1.0), InvalidArgument);
}

TEST_CASE("excess at least deficit") {
  const auto g = materialize(family::DuplicatedFirst{}, 8, 8).system;  // excess 1, deficit 1
  const auto out = complete_excess_ge_codim(g, 0.3);
  CHECK(out.witness.is_frame_for_ambient);
  CHECK(out.modified_indices == std::vector<std::size_t>{2});
  CHECK(out.report.sup == doctest::Approx(0.3));
  const auto ons = materialize(family::OrthonormalBasis{}, 3, 5).system;
  CHECK_THROWS_AS(complete_excess_ge_codim(ons, 0.3), HypothesisError);
  // Nothing to do for a frame.
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  CHECK(complete_excess_ge_codim(onb, 0.3).report.sup == 0.0);
}

TEST_CASE("convergent tail") {
  const std::size_t d = 4;
  const double delta = 0.4;
  const CVector limit = basis_vector(d, 0);
  std::vector<CVector> v;
  for (std::size_t k = 1; k <= 12; ++k) {
    CVector x = limit;
    x[1] = 0.1 / static_cast<double>(k);
    v.push_back(x);
  }
  const VectorSystem g(d, v);
  const auto out = complete_convergent(g, limit, 3, delta);
  CHECK(out.witness.is_frame_for_ambient);
  CHECK(out.report.sup <= delta);
  CHECK(out.psi.at(1) == g.at(1));
  CHECK(out.psi.at(3) == limit);
  CHECK_THROWS_AS(complete_convergent(g, limit, 10, delta), HypothesisError);  // 12 - 10 < d
  CHECK_THROWS_AS(complete_convergent(g, limit, 3, 0.05), HypothesisError);   // tail too far
  CHECK_THROWS_AS(complete_convergent(g, limit, 0, delta), InvalidArgument);
}

TEST_CASE("bessel factorization") {
  const auto g = materialize(family::DuplicatedFirst{}, 3, 3).system;
  const auto f = factorize_bessel(g);
  CHECK(f.extension.rows() == 3);
  CHECK(f.extension.cols() == 4);
  CHECK(f.complement.size() == 1);
  CHECK(f.operator_norm_V == doctest::Approx(std::sqrt(2.0)));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(norm(subtract(f.extension.apply(basis_vector(4, k)), g.vectors()[k])) == 0.0);
  }
}

TEST_CASE("operator completion with the trivial completer appends the complement") {
  const auto g = materialize(family::OrthonormalBasis{}, 3, 5).system;
  const auto out = complete_via_operator(g, completer::TrivialAppend{}, 0.1);
  CHECK(out.witness.is_riesz_basis);
  CHECK(out.report.sup == 0.0);
  CHECK(out.appended_indices == std::vector<std::size_t>{4, 5});
}

TEST_CASE("operator completion with spreading stays within delta") {
  const auto g = materialize(family::OrthonormalBasis{}, 32, 33).system;
  const double delta = 0.5;
  const auto out = complete_via_operator(g, completer::SpreadRotation{{16, 16}}, delta);
  CHECK(out.witness.is_riesz_basis);
  CHECK(out.report.sup <= delta);
  CHECK(out.diagnostics.at("chain_inequality_violations") == 0.0);
  CHECK(out.appended_indices == std::vector<std::size_t>{33});
  CHECK_THROWS_AS(complete_via_operator(g, completer::SpreadRotation{{16, 16}}, 0.2), HypothesisError);
}

TEST_CASE("obstruction constants") {
  // mpmath values
  CHECK(kObstructionDeltaLimit == doctest::Approx(1.5593936024673522158).epsilon(1e-15));
  CHECK(obstruction_bound(0.7) == doctest::Approx(0.20150442318890773847).epsilon(1e-15));
  CHECK(obstruction_bound(1.5) == doctest::Approx(0.92527541260212737052).epsilon(1e-15));
}

TEST_CASE("obstruction demo") {
  for (double delta : {0.7, 1.5}) {
    const auto r = obstruction_demo(delta, 20, 16, 7);
    CHECK(r.passed());
    CHECK(r.max_scaled_sum <= r.bound);
  }
  const auto zero = obstruction_demo(0.0, 2, 4, 1);
  CHECK(zero.passed());
  CHECK(zero.max_scaled_sum == 0.0);
  CHECK_THROWS_AS(obstruction_demo(1.6, 1, 4, 1), HypothesisError);
  CHECK_THROWS_AS(obstruction_demo(-0.1, 1, 4, 1), HypothesisError);
}

TEST_CASE("obstruction demo does not depend on the thread count") {
  const auto a = obstruction_demo(1.2, 12, 8, 99, 1);
  const auto b = obstruction_demo(1.2, 12, 8, 99, 4);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].seed == b.trials[t].seed);
    CHECK(a.trials[t].scaled_sum == b.trials[t].scaled_sum);
  }
}
