#include "doctest.h"

#include <cmath>
#include <numeric>

#include "frameforge/error.hpp"
#include "frameforge/random.hpp"
#include "frameforge/redundancy.hpp"

using namespace frameforge;

namespace {

double gram_identity_residual(const std::vector<CVector>& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      worst = std::max(worst, std::abs(inner(v[i], v[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

VectorSystem two_bases(std::size_t d, std::uint64_t seed) {
  std::vector<CVector> v;
  for (std::size_t k = 0; k < d; ++k) v.push_back(basis_vector(d, k));
  for (auto& q : random_orthonormal_basis(d, seed)) v.push_back(q);
  return VectorSystem(d, std::move(v));
}

}  // namespace

TEST_CASE("riesz from vanishing on a carleson prefix") {
  const double delta = 0.5;
  const auto g = materialize(family::Carleson{0.5}, 32, 32).system;
  const auto out = riesz_from_vanishing(g, delta);
  CHECK(out.witness.is_riesz_basis);
  CHECK(out.witness.rank == 32);
  CHECK(out.report.sup <= delta);
  CHECK(bounds(out.psi, BoundConvention::RieszGram).lower > 0.0);
  REQUIRE(out.report.floor_A.has_value());
  CHECK(*out.report.floor_A == doctest::Approx(bounds(g, BoundConvention::FrameOnSpan).lower));
  CHECK(out.report.floor_satisfied.value());
  const auto K = static_cast<std::size_t>(out.diagnostics.at("K"));
  for (std::size_t k = K; k <= 32; ++k) {
    CHECK(norm(g.at(k)) < delta / 2);
    CHECK(norm(out.psi.at(k)) == doctest::Approx(delta / 2));
  }
}

TEST_CASE("riesz from vanishing on zero vectors") {
  const VectorSystem zeros(5, std::vector<CVector>(5, CVector(5)));
  const auto out = riesz_from_vanishing(zeros, 0.8);
  CHECK(out.diagnostics.at("K") == 1.0);
  CHECK(out.witness.is_riesz_basis);
  CHECK(out.report.sup == doctest::Approx(0.4));
  CHECK_FALSE(out.report.floor_A.has_value());
}

TEST_CASE("riesz from vanishing: the floor can fail when the input does not span") {
  // {e1, e1, e2, e3, e2/10, e3/10} in C^6: redundant on a 3-dimensional span. The
  // unused directions let a Riesz basis sit closer than the span's lower bound 1.01.
  std::vector<CVector> v;
  const std::size_t d = 6;
  v.push_back(basis_vector(d, 0));
  v.push_back(basis_vector(d, 0));
  for (std::size_t k = 1; k + 3 < d; ++k) v.push_back(basis_vector(d, k));
  v.push_back(scaled(basis_vector(d, 1), 0.1));
  v.push_back(scaled(basis_vector(d, 2), 0.1));
  const VectorSystem g(d, v);
  REQUIRE(excess(g) > 0);
  const auto out = riesz_from_vanishing(g, 0.5);
  CHECK(out.witness.is_riesz_basis);
  CHECK(out.report.sup <= 0.5 + 1e-12);
  REQUIRE(out.report.floor_A.has_value());
  CHECK(*out.report.floor_A == doctest::Approx(1.01));
  CHECK_FALSE(out.report.floor_satisfied.value());
}

TEST_CASE("riesz from vanishing errors") {
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  CHECK_THROWS_AS(riesz_from_vanishing(onb, 0.5), HypothesisError);  // last norm 1 >= delta/2
  const auto ons = materialize(family::OrthonormalBasis{}, 3, 4).system;
  CHECK_THROWS_AS(riesz_from_vanishing(ons, 0.5), HypothesisError);
}

TEST_CASE("naive near-riesz construction") {
  const double eps = 0.1;
  const auto sys = naive_near_riesz(eps, 128);
  CHECK(sys.g.size() == 129);
  CHECK(sys.psi.size() == 129);
  const auto r = perturbation_report(sys.g, sys.psi);
  CHECK(r.per_index[0] == 0.0);
  for (std::size_t k = 1; k < r.per_index.size(); ++k) {
    CHECK(std::abs(r.per_index[k] - 0.78102496759066543941) <= 1e-12);  // sqrt(0.61)
  }
  CHECK(classify(sys.psi).is_riesz_basis);
  CHECK_THROWS_AS(naive_near_riesz(0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(naive_near_riesz(0.1, 1), InvalidArgument);
}

TEST_CASE("naive near-riesz gram spectrum matches a high-precision oracle") {
  const auto sys = naive_near_riesz(0.1, 4);
  const auto e = hermitian_eig(gram(sys.psi)).eigenvalues;
  const double expected[] = {0.060063748760665079912, 0.29321479426034670041, 0.6651597919468014829,
                             1.0313380381327053453, 1.3902236268994813915};
  for (std::size_t i = 0; i < 5; ++i) CHECK(e[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("naive near-riesz coefficient identity") {
  const double eps = 0.25;
  const auto sys = naive_near_riesz(eps, 16);
  const std::size_t dim = sys.psi.ambient_dim();
  for (std::uint64_t s = 0; s < 100; ++s) {
    SplitMix64 rng(s);
    CVector acc(dim);
    double coeff_sq = 0.0;
    for (std::size_t k = 2; k <= sys.psi.size(); ++k) {
      const Complex c(rng.gaussian(), rng.gaussian());
      coeff_sq += std::norm(c);
      CVector term = scaled(basis_vector(dim, k - 1), 0.5 + eps);
      axpy(-1.0, sys.psi.at(k), term);
      axpy(c, term, acc);
    }
    CHECK(std::abs(std::pow(norm(acc), 2) - coeff_sq / 4) <= 1e-10 * coeff_sq / 4);
  }
}

TEST_CASE("spread deficit") {
  const std::vector<std::size_t> blocks{4, 9, 16};
  const auto s = spread_deficit(30, 1, blocks);
  CHECK(s.ons.size() == 29);
  CHECK(s.deficit == 1);
  CHECK(s.exceptional_indices == std::vector<std::size_t>{1});
  CHECK(gram_identity_residual(s.ons) <= 1e-10);
  CHECK(30 - rank(VectorSystem(30, s.ons)) == 1);
  for (std::size_t k = 2; k <= 30; ++k) {
    CHECK(s.per_index_perturbation[k - 1] <= s.per_index_budget[k - 1] + 1e-12);
  }
  CHECK(s.per_index_budget[1] == doctest::Approx(std::sqrt(2.0 / 4)));
  CHECK(s.per_index_budget[5] == doctest::Approx(std::sqrt(2.0 / 9)));
  CHECK(s.per_index_budget[14] == doctest::Approx(std::sqrt(2.0 / 16)));
  const auto wider = spread_deficit(31, 1, blocks);
  CHECK(wider.per_index_perturbation[30] == 0.0);  // coordinate 31 is outside every block
}

TEST_CASE("spread deficit with no seeds is the identity") {
  const std::vector<std::size_t> none;
  const auto s = spread_deficit(5, 0, none);
  CHECK(s.ons.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(norm(subtract(s.ons[k], basis_vector(5, k))) == 0.0);
  CHECK(s.exceptional_indices.empty());
}

TEST_CASE("spread deficit with two chains") {
  const std::vector<std::size_t> blocks{8, 8, 8, 8};
  const auto s = spread_deficit(40, 2, blocks);
  CHECK(gram_identity_residual(s.ons) <= 1e-10);
  CHECK(40 - rank(VectorSystem(40, s.ons)) == 2);
  CHECK(s.exceptional_indices == std::vector<std::size_t>{1, 2});
}

TEST_CASE("spread deficit: larger blocks move vectors less") {
  double previous = 10.0;
  for (std::size_t m : {4u, 16u, 64u}) {
    const std::vector<std::size_t> blocks{m, m};
    const auto s = spread_deficit(2 * m + 1, 1, blocks);
    double worst = 0.0;
    for (std::size_t k = 2; k <= 2 * m + 1; ++k) worst = std::max(worst, s.per_index_perturbation[k - 1]);
    CHECK(worst < previous);
    CHECK(worst <= std::sqrt(2.0 / static_cast<double>(m)) + 1e-12);
    previous = worst;
  }
}

TEST_CASE("spread deficit budget") {
  const std::vector<std::size_t> blocks{4, 4};
  CHECK_THROWS_AS(spread_deficit(8, 1, blocks), HypothesisError);
  const std::vector<std::size_t> zero{0};
  CHECK_THROWS_AS(spread_deficit(8, 1, zero), InvalidArgument);
}

TEST_CASE("near riesz to riesz") {
  const auto g = materialize(family::DuplicatedFirst{}, 65, 66).system;  // {e1, e1, e2..e64} in C^66
  const std::vector<std::size_t> blocks{16, 16, 16, 15};
  const double delta = 0.6;
  const auto out = near_riesz_to_riesz(g, 1, delta, blocks);
  CHECK(out.witness.is_riesz_sequence);
  CHECK(out.witness.rank == 65);
  CHECK(out.exceptional_indices.empty());
  CHECK(out.report.sup <= delta * (1 + 1e-12));
  REQUIRE(out.report.floor_A.has_value());
  CHECK(*out.report.floor_A == doctest::Approx(1.0));
  CHECK(out.report.sum_sq >= *out.report.floor_A * (1 - 1e-6));
}

TEST_CASE("near riesz to riesz: trivial and failing cases") {
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  const std::vector<std::size_t> none;
  const auto same = near_riesz_to_riesz(onb, 0, 0.5, none);
  CHECK(same.psi == onb);
  // Tail {e1, e1, e2} is not a Riesz sequence.
  const VectorSystem bad(5, {basis_vector(5, 0), basis_vector(5, 0), basis_vector(5, 0),
                             basis_vector(5, 1)});
  CHECK_THROWS_AS(near_riesz_to_riesz(bad, 1, 0.5, none), HypothesisError);
  const auto g = materialize(family::DuplicatedFirst{}, 9, 9).system;
  const std::vector<std::size_t> tiny{2};
  CHECK_THROWS_AS(near_riesz_to_riesz(g, 1, 0.5, tiny), HypothesisError);  // sqrt(2/2) > 0.5
}

TEST_CASE("feichtinger partition of a duplicated basis") {
  const VectorSystem g(2, {basis_vector(2, 0), basis_vector(2, 0), basis_vector(2, 1),
                           basis_vector(2, 1)});
  const auto plan = feichtinger_partition(g, 0.5);
  REQUIRE(plan.classes.size() == 2);
  CHECK(plan.classes[0] == std::vector<std::size_t>{1, 3});
  CHECK(plan.classes[1] == std::vector<std::size_t>{2, 4});
  for (double b : plan.per_class_lower_bound) CHECK(b == doctest::Approx(1.0));

  const auto onb = materialize(family::OrthonormalBasis{}, 6, 6).system;
  CHECK(feichtinger_partition(onb, 0.5).classes.size() == 1);

  const VectorSystem with_zero(2, {basis_vector(2, 0), CVector(2)});
  CHECK_THROWS_AS(feichtinger_partition(with_zero, 0.5), HypothesisError);
  CHECK_THROWS_AS(feichtinger_partition(onb, 2.0), HypothesisError);
}

TEST_CASE("feichtinger partition of two bases") {
  const auto g = two_bases(16, 3);
  std::size_t previous = 0;
  for (double threshold : {0.6, 0.45, 0.3}) {
    const auto plan = feichtinger_partition(g, threshold);
    std::vector<std::size_t> all;
    for (std::size_t c = 0; c < plan.classes.size(); ++c) {
      all.insert(all.end(), plan.classes[c].begin(), plan.classes[c].end());
      const auto part = g.select(plan.classes[c]);
      CHECK(bounds(part, BoundConvention::RieszGram).lower >= threshold);
      CHECK(plan.per_class_lower_bound[c] >= threshold);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(g.size());
    std::iota(expected.begin(), expected.end(), 1);
    CHECK(all == expected);
    if (previous > 0) CHECK(plan.classes.size() <= previous);
    previous = plan.classes.size();
  }
}

TEST_CASE("partition to riesz bases") {
  const VectorSystem g(3, {basis_vector(3, 0), basis_vector(3, 0), basis_vector(3, 1),
                           basis_vector(3, 1)});
  const auto plan = feichtinger_partition(g, 0.5);
  const auto bases = partition_to_riesz_bases(g, plan, 0.5);
  REQUIRE(bases.size() == 2);
  for (const auto& b : bases) {
    CHECK(b.witness.is_riesz_basis);
    CHECK(b.psi.size() == 3);
    CHECK(b.report.sup == 0.0);
  }
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  const auto single = partition_to_riesz_bases(onb, feichtinger_partition(onb, 0.5), 0.5);
  REQUIRE(single.size() == 1);
  CHECK(single[0].psi.vectors() == onb.vectors());

  PartitionPlan broken;
  broken.classes = {{1, 2}, {2, 3, 4}};
  CHECK_THROWS_AS(partition_to_riesz_bases(g, broken, 0.5), InvalidArgument);
}

TEST_CASE("orbit factorization of an orthonormal basis is the shift") {
  const auto onb = materialize(family::OrthonormalBasis{}, 4, 4).system;
  const auto f = orbit_factorization(onb);
  CHECK(f.operator_norm == doctest::Approx(1.0));
  CHECK(norm(subtract(f.seed_phi, basis_vector(4, 0))) == 0.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(f.operator_T(i, j) - (i == j + 1 ? 1.0 : 0.0)) < 1e-14);
  CHECK(f.reconstruction_residual <= 1e-8);
}

TEST_CASE("orbit factorization edge cases") {
  const VectorSystem one(1, {CVector{Complex(2.0, 1.0)}});
  const auto f = orbit_factorization(one);
  CHECK(std::abs(f.operator_T(0, 0)) == 0.0);
  CHECK(f.seed_phi == one.at(1));
  const auto dup = materialize(family::DuplicatedFirst{}, 3, 3).system;
  CHECK_THROWS_AS(orbit_factorization(dup), HypothesisError);
}

TEST_CASE("orbit factorization reproduces a random basis") {
  const auto q = random_orthonormal_basis(12, 4);
  std::vector<CVector> v;
  for (std::size_t k = 0; k < q.size(); ++k) v.push_back(scaled(q[k], 1.0 + 0.1 * static_cast<double>(k)));
  const auto f = orbit_factorization(VectorSystem(12, v));
  CHECK(f.reconstruction_residual <= 1e-8);
}

TEST_CASE("carleson subsample") {
  const auto r = carleson_subsample_check(0.5, 2, 64, 24);
  CHECK(r.bounds.lower > 0.0);
  CHECK(r.excess > 0);
  CHECK(r.norms_below_first);
  const auto plain = carleson_subsample_check(0.5, 1, 20, 10);
  const auto g = materialize(family::Carleson{0.5}, 20, 10).system;
  const auto b = bounds(g, BoundConvention::FrameOnSpan);
  CHECK(plain.bounds.lower == b.lower);
  CHECK(plain.bounds.upper == b.upper);
  CHECK(plain.excess == excess(g));
}
