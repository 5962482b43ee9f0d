#include "frameforge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "frameforge/error.hpp"
#include "frameforge/parallel.hpp"
#include "frameforge/random.hpp"

namespace frameforge::cli {

namespace {

struct Config {
  std::string command;
  std::string demo;
  std::string family;
  std::string input;
  std::string perturbed;
  std::string method;
  std::string completer = "trivial";
  std::string mode = "frame";
  std::optional<std::size_t> n;
  std::optional<std::size_t> ambient;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> alpha;
  std::optional<double> threshold;
  std::optional<std::size_t> n_excess;
  std::optional<std::size_t> step;
  std::optional<std::size_t> k_start;
  std::vector<std::size_t> blocks;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool complete = false;
  std::string output;
  std::string format = "json";
  std::size_t jobs = 1;
};

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json config_json(const Config& c) {
  return Json{{"command", c.command},
              {"demo", c.demo},
              {"family", c.family},
              {"input", c.input},
              {"perturbed", c.perturbed},
              {"method", c.method},
              {"completer", c.completer},
              {"mode", c.mode},
              {"n", optional_json(c.n)},
              {"ambient", optional_json(c.ambient)},
              {"delta", optional_json(c.delta)},
              {"epsilon", optional_json(c.epsilon)},
              {"alpha", optional_json(c.alpha)},
              {"threshold", optional_json(c.threshold)},
              {"n_excess", optional_json(c.n_excess)},
              {"step", optional_json(c.step)},
              {"k", optional_json(c.k_start)},
              {"blocks", c.blocks},
              {"trials", c.trials},
              {"seed", c.seed},
              {"complete", c.complete},
              {"output", c.output},
              {"format", c.format},
              {"jobs", c.jobs}};
}

// Splits `total` into `parts` near-equal sizes, larger ones first.
std::vector<std::size_t> even_blocks(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t size = total / parts + (i < total % parts ? 1 : 0);
    if (size > 0) out.push_back(size);
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return SplitMix64::stream(seed, trial).next();
}

Json checks_summary(Json results, const Json& checks) {
  bool passed = true;
  for (const auto& [name, ok] : checks.items()) passed = passed && ok.get<bool>();
  results["checks"] = checks;
  results["passed"] = passed;
  return results;
}

// ---------------------------------------------------------------------------
// Inputs

Materialized load_system(const Config& c) {
  if (!c.input.empty()) {
    if (!c.family.empty()) throw InvalidArgument("give either --family or --input, not both");
    auto s = read_system(c.input);
    TruncationCertificate cert{s.size(), s.ambient_dim(), 0.0};
    return {std::move(s), cert};
  }
  if (c.family.empty()) throw InvalidArgument("give --family or --input");
  const std::size_t d = c.ambient.value_or(16);
  if (c.family == "orthonormal") {
    return materialize(family::OrthonormalBasis{}, c.n.value_or(d), d);
  }
  if (c.family == "block-tight") {
    return materialize(family::BlockTight{c.delta.value_or(1.0)},
                       c.n.value_or(block_tight_count(d)), d);
  }
  if (c.family == "carleson") {
    return materialize(family::Carleson{c.alpha.value_or(0.5)}, c.n.value_or(d), d);
  }
  if (c.family == "scaled-even") {
    return materialize(family::ScaledEvenBasis{}, c.n.value_or(d / 2), d);
  }
  if (c.family == "duplicated-first") {
    return materialize(family::DuplicatedFirst{}, c.n.value_or(d + 1), d);
  }
  throw InvalidArgument(fmt::format("unknown family '{}'", c.family));
}

Completer make_completer(const Config& c, std::size_t count) {
  if (c.completer == "trivial") return completer::TrivialAppend{};
  if (c.completer == "spread") {
    auto blocks = c.blocks.empty() ? even_blocks(count, 4) : c.blocks;
    return completer::SpreadRotation{std::move(blocks)};
  }
  throw InvalidArgument(fmt::format("unknown completer '{}'", c.completer));
}

// N copies of e_1 followed by e_1..e_d in C^D.
VectorSystem near_riesz_input(std::size_t N, std::size_t d, std::size_t D) {
  std::vector<CVector> v(N, basis_vector(D, 0));
  for (std::size_t k = 0; k < d; ++k) v.push_back(basis_vector(D, k));
  return VectorSystem(D, std::move(v), "near-riesz");
}

// g_k = (u_k / k) times a random unit vector, u_k uniform in [1/2, 1).
VectorSystem vanishing_system(std::size_t d, std::size_t count, std::uint64_t seed) {
  std::vector<CVector> v;
  for (std::size_t k = 1; k <= count; ++k) {
    auto rng = SplitMix64::stream(seed ^ 0x5DEECE66DULL, k);
    const double scale = (0.5 + 0.5 * rng.uniform()) / static_cast<double>(k);
    v.push_back(scaled(random_direction(d, seed, k), scale));
  }
  return VectorSystem(d, std::move(v), "vanishing");
}

Json system_summary(const VectorSystem& s) {
  return Json{{"label", s.label()}, {"count", s.size()}, {"ambient_dim", s.ambient_dim()}};
}

// ---------------------------------------------------------------------------
// Subcommands

Json cmd_analyze(const Config& c) {
  const auto m = load_system(c);
  const auto& g = m.system;
  const auto cls = classify(g);
  const auto removable = removable_set(g);
  Json r{{"system", system_summary(g)},
         {"truncation", m.certificate},
         {"classification", cls},
         {"bounds_frame_on_span", nullptr},
         {"bounds_riesz_gram", bounds(g, BoundConvention::RieszGram)},
         {"excess", excess(g)},
         {"deficit", deficit(g)},
         {"removable_set", removable},
         {"removable_set_keeps_rank", rank(g.without(removable)) == cls.rank},
         {"norms", g.norms()}};
  if (cls.rank > 0) r["bounds_frame_on_span"] = bounds(g, BoundConvention::FrameOnSpan);
  return r;
}

Json cmd_certify(const Config& c) {
  const auto g = load_system(c).system;
  const CertificateMode mode = c.mode == "riesz"   ? CertificateMode::RieszPerturbation
                               : c.mode == "frame" ? CertificateMode::FramePerturbation
                                                   : throw InvalidArgument("--mode must be frame or riesz");
  Json trials = Json::array();
  if (!c.perturbed.empty()) {
    const auto h = read_system(c.perturbed);
    trials.push_back({{"seed", nullptr}, {"certificate", certify_perturbation(g, h, mode)}});
  } else {
    if (!c.delta) throw InvalidArgument("give --perturbed or a perturbation size --delta");
    std::vector<Json> slots(c.trials);
    parallel_for(c.trials, c.jobs, [&](std::size_t t) {
      const auto seed = trial_seed(c.seed, t);
      const auto h = random_perturbation(g, *c.delta, seed);
      slots[t] = Json{{"seed", seed}, {"certificate", certify_perturbation(g, h, mode)}};
    });
    for (auto& s : slots) trials.push_back(std::move(s));
  }
  std::size_t fired = 0, verified = 0;
  for (const auto& t : trials) {
    fired += t["certificate"]["fired"].get<bool>();
    verified += t["certificate"]["verified"].is_boolean() && t["certificate"]["verified"].get<bool>();
  }
  return Json{{"system", system_summary(g)},
              {"mode", to_string(mode)},
              {"trials", trials},
              {"fired", fired},
              {"verified", verified},
              {"violations", fired - verified}};
}

Json cmd_complete(const Config& c) {
  const auto g = load_system(c).system;
  const double delta = c.delta.value_or(0.5);
  const std::string method = c.method.empty() ? "operator" : c.method;
  if (method == "not-bounded-below") return complete_not_bounded_below(g, delta);
  if (method == "excess") return complete_excess_ge_codim(g, delta);
  if (method == "operator") return complete_via_operator(g, make_completer(c, g.size()), delta);
  if (method == "convergent") {
    const CVector& limit = g.at(g.size());
    std::size_t K = c.k_start.value_or(0);
    if (K == 0) {
      K = g.size();
      while (K > 1 && norm(subtract(limit, g.at(K - 1))) <= delta / 2.0) --K;
      if (g.size() < K + g.ambient_dim()) {
        K = g.size() >= g.ambient_dim() ? g.size() - g.ambient_dim() : 1;
      }
    }
    return complete_convergent(g, limit, K, delta);
  }
  throw InvalidArgument(fmt::format("unknown completion method '{}'", method));
}

Json cmd_deredundify(const Config& c) {
  const auto g = load_system(c).system;
  const std::string method = c.method.empty() ? "vanishing" : c.method;
  if (method == "vanishing") return riesz_from_vanishing(g, c.delta.value_or(0.5));
  if (method == "near-riesz") {
    const std::size_t N = c.n_excess.value_or(1);
    const std::size_t d = g.size() > N ? g.size() - N : 0;
    const auto blocks = c.blocks.empty() ? even_blocks(d > 0 ? d - 1 : 0, 4) : c.blocks;
    return near_riesz_to_riesz(g, N, c.delta.value_or(0.6), blocks);
  }
  throw InvalidArgument(fmt::format("unknown deredundify method '{}'", method));
}

Json cmd_partition(const Config& c) {
  const auto g = load_system(c).system;
  const auto plan = feichtinger_partition(g, c.threshold.value_or(0.5));
  Json r{{"system", system_summary(g)}, {"plan", plan}, {"class_count", plan.classes.size()},
         {"completions", nullptr}};
  if (c.complete) {
    r["completions"] = partition_to_riesz_bases(g, plan, c.delta.value_or(0.5),
                                                make_completer(c, 0));
  }
  return r;
}

Json cmd_orbit(const Config& c) {
  const auto psi = load_system(c).system;
  return Json{{"system", system_summary(psi)}, {"factorization", orbit_factorization(psi)}};
}

// ---------------------------------------------------------------------------
// Demos

Json demo_prop21i(const Config& c) {
  const std::size_t d = c.ambient.value_or(8);
  const std::size_t count = c.n.value_or(256);
  const double delta = c.delta.value_or(0.5);
  std::vector<Json> slots(c.trials);
  std::vector<char> ok(c.trials, 0);
  parallel_for(c.trials, c.jobs, [&](std::size_t t) {
    const auto seed = trial_seed(c.seed, t);
    const auto out = complete_not_bounded_below(vanishing_system(d, count, seed), delta);
    const double sum = out.diagnostics.at("replaced_sum_sq");
    ok[t] = sum <= delta * delta / 2.0 + 1e-12 && out.witness.rank == d;
    slots[t] = Json{{"seed", seed},
                    {"replaced_sum_sq", sum},
                    {"replaced_budget", delta * delta / 2.0},
                    {"witness", out.witness},
                    {"modified_indices", out.modified_indices}};
  });
  const bool all = std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; });
  return checks_summary(Json{{"trials", slots}}, {{"budget_and_rank_every_trial", all}});
}

Json demo_prop21ii(const Config& c) {
  const std::size_t d = c.ambient.value_or(16);
  const double delta = c.delta.value_or(0.5);
  const auto g = materialize(family::DuplicatedFirst{}, c.n.value_or(d), d).system;
  const auto out = complete_excess_ge_codim(g, delta);
  return checks_summary(Json{{"completion", out}},
                        {{"frame_for_ambient", out.witness.is_frame_for_ambient},
                         {"sup_within_delta", out.report.sup <= delta}});
}

Json demo_prop21iii(const Config& c) {
  const std::size_t d = c.ambient.value_or(8);
  const std::size_t count = c.n.value_or(32);
  const double delta = c.delta.value_or(0.5);
  const std::size_t K = c.k_start.value_or(5);
  const CVector limit = basis_vector(d, 0);
  std::vector<CVector> v;
  for (std::size_t k = 1; k <= count; ++k) {
    if (k < K) {
      v.push_back(random_direction(d, c.seed, k));
    } else {
      v.push_back(add(limit, scaled(random_direction(d, c.seed, k),
                                    delta / (2.0 * static_cast<double>(k - K + 1)))));
    }
  }
  const auto out = complete_convergent(VectorSystem(d, std::move(v), "convergent"), limit, K, delta);
  return checks_summary(Json{{"completion", out}},
                        {{"frame_for_ambient", out.witness.is_frame_for_ambient},
                         {"sup_within_delta", out.report.sup <= delta * (1.0 + 1e-12)}});
}

Json demo_thm24(const Config& c) {
  const std::size_t count = c.n.value_or(64);
  const std::size_t d = c.ambient.value_or(count + 2);
  const double delta = c.delta.value_or(0.5);
  const auto g = materialize(family::OrthonormalBasis{}, count, d).system;
  Config spread = c;
  if (c.completer == "trivial" && c.method.empty()) spread.completer = "spread";
  const auto out = complete_via_operator(g, make_completer(spread, count), delta);
  return checks_summary(
      Json{{"completion", out}},
      {{"riesz_basis", out.witness.is_riesz_basis},
       {"sup_within_delta", out.report.sup <= delta * (1.0 + 1e-12)},
       {"chain_inequality", out.diagnostics.at("chain_inequality_violations") == 0.0}});
}

Json demo_ex25(const Config& c) {
  const auto report = obstruction_demo(c.delta.value_or(0.7), c.trials, c.n.value_or(16), c.seed,
                                       c.jobs);
  return checks_summary(Json{{"obstruction", report}},
                        {{"scaled_sum_within_bound", report.all_within_bound},
                         {"certificate_fired", report.all_fired},
                         {"deficit_preserved", report.all_deficit_preserved}});
}

Json demo_thm32(const Config& c) {
  const std::size_t d = c.ambient.value_or(c.n.value_or(32));
  const double delta = c.delta.value_or(0.5);
  const auto g = materialize(family::Carleson{c.alpha.value_or(0.5)}, d, d).system;
  const auto out = riesz_from_vanishing(g, delta);
  return checks_summary(Json{{"completion", out}},
                        {{"riesz_basis", out.witness.is_riesz_basis},
                         {"sup_within_delta", out.report.sup <= delta},
                         {"floor", out.report.floor_satisfied.value_or(true)}});
}

Json demo_ex33ii(const Config& c) {
  const auto r = carleson_subsample_check(c.alpha.value_or(0.5), c.step.value_or(2),
                                          c.n.value_or(64), c.ambient.value_or(24));
  return checks_summary(Json{{"subsample", r}}, {{"positive_lower_bound", r.bounds.lower > 0.0},
                                                 {"positive_excess", r.excess > 0},
                                                 {"norms_below_first", r.norms_below_first}});
}

struct NearRieszRun {
  VectorSystem g;
  CompletionOutput out;
};

NearRieszRun run_near_riesz(const Config& c) {
  const std::size_t N = c.n_excess.value_or(1);
  const std::size_t d = c.n.value_or(64);
  const std::size_t D = c.ambient.value_or(d + N);
  const auto blocks = c.blocks.empty() ? even_blocks(d - 1, 4) : c.blocks;
  auto g = near_riesz_input(N, d, D);
  auto out = near_riesz_to_riesz(g, N, c.delta.value_or(0.6), blocks);
  return {std::move(g), std::move(out)};
}

Json demo_thm35(const Config& c) {
  const auto run = run_near_riesz(c);
  const auto& out = run.out;
  return checks_summary(Json{{"completion", out}},
                        {{"riesz_sequence", out.witness.is_riesz_sequence},
                         {"no_exceptional_indices", out.exceptional_indices.empty()},
                         {"floor", out.report.floor_satisfied.value_or(true)}});
}

Json demo_ex36(const Config& c) {
  const double eps = c.epsilon.value_or(0.1);
  const std::size_t d = c.ambient.value_or(128);
  const auto sys = naive_near_riesz(eps, d);
  const double expected = std::sqrt(0.25 + (0.5 + eps) * (0.5 + eps));
  const auto report = perturbation_report(sys.g, sys.psi);
  double worst = 0.0;
  for (std::size_t k = 1; k < report.per_index.size(); ++k) {
    worst = std::max(worst, std::abs(report.per_index[k] - expected));
  }
  // ||sum_k c_k ((1/2 + eps) e_k - psi_k)||^2 against sum_k |c_k|^2 / 4, k >= 2.
  const std::size_t samples = 100;
  const std::size_t dim = sys.psi.ambient_dim();
  double worst_identity = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    auto rng = SplitMix64::stream(c.seed, s);
    CVector acc(dim);
    double coeff_sq = 0.0;
    for (std::size_t k = 2; k <= sys.psi.size(); ++k) {
      const Complex ck(rng.gaussian(), rng.gaussian());
      coeff_sq += std::norm(ck);
      CVector term = scaled(basis_vector(dim, k - 1), 0.5 + eps);
      axpy(-1.0, sys.psi.at(k), term);
      axpy(ck, term, acc);
    }
    const double lhs = norm(acc) * norm(acc);
    worst_identity = std::max(worst_identity, std::abs(lhs - coeff_sq / 4.0) / (coeff_sq / 4.0));
  }
  const auto cls = classify(sys.psi);
  return checks_summary(
      Json{{"epsilon", eps},
           {"d", d},
           {"expected_perturbation", expected},
           {"report", report},
           {"max_perturbation_error", worst},
           {"coefficient_identity_max_rel_error", worst_identity},
           {"witness", cls},
           {"riesz_bounds_psi", bounds(sys.psi, BoundConvention::RieszGram)}},
      {{"perturbation_formula", worst <= 1e-12},
       {"coefficient_identity", worst_identity <= 1e-10},
       {"riesz_basis", cls.is_riesz_basis}});
}

Json demo_cor37(const Config& c) {
  const auto run = run_near_riesz(c);
  const double delta = c.delta.value_or(0.6);
  const auto f = orbit_factorization(run.out.psi);
  const auto generated = orbit(f, run.g.size());
  std::vector<double> distance;
  double worst = 0.0;
  for (std::size_t k = 0; k < generated.size(); ++k) {
    distance.push_back(norm(subtract(run.g.vectors()[k], generated[k])));
    const auto& exc = run.out.exceptional_indices;
    if (std::find(exc.begin(), exc.end(), k + 1) == exc.end()) worst = std::max(worst, distance.back());
  }
  return checks_summary(Json{{"completion", run.out},
                             {"factorization", f},
                             {"orbit_distance", distance},
                             {"max_orbit_distance", worst}},
                        {{"orbit_within_delta", worst <= delta * (1.0 + 1e-12)},
                         {"reconstruction", f.reconstruction_residual <= 1e-8}});
}

Json demo_thm38(const Config& c) {
  const std::size_t d = c.ambient.value_or(32);
  const double threshold = c.threshold.value_or(0.3);
  std::vector<CVector> v;
  for (std::size_t k = 0; k < d; ++k) v.push_back(basis_vector(d, k));
  for (auto& q : random_orthonormal_basis(d, c.seed)) v.push_back(std::move(q));
  const VectorSystem g(d, std::move(v), "two-bases");
  const auto plan = feichtinger_partition(g, threshold);
  const auto completions = partition_to_riesz_bases(g, plan, c.delta.value_or(0.5),
                                                    make_completer(c, 0));
  bool bounds_ok = true;
  for (double b : plan.per_class_lower_bound) bounds_ok = bounds_ok && b >= threshold;
  std::vector<std::size_t> all;
  for (const auto& cls : plan.classes) all.insert(all.end(), cls.begin(), cls.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(g.size());
  std::iota(expected.begin(), expected.end(), 1);
  bool bases_ok = true;
  for (const auto& out : completions) bases_ok = bases_ok && out.witness.is_riesz_basis;
  return checks_summary(Json{{"plan", plan}, {"class_count", plan.classes.size()},
                             {"completions", completions}},
                        {{"class_bounds", bounds_ok},
                         {"partition", all == expected},
                         {"riesz_bases", bases_ok}});
}

Json cmd_demo(const Config& c) {
  Json r;
  if (c.demo == "prop2.1i") r = demo_prop21i(c);
  else if (c.demo == "prop2.1ii") r = demo_prop21ii(c);
  else if (c.demo == "prop2.1iii") r = demo_prop21iii(c);
  else if (c.demo == "thm2.4") r = demo_thm24(c);
  else if (c.demo == "ex2.5") r = demo_ex25(c);
  else if (c.demo == "thm3.2") r = demo_thm32(c);
  else if (c.demo == "ex3.3ii") r = demo_ex33ii(c);
  else if (c.demo == "thm3.5") r = demo_thm35(c);
  else if (c.demo == "ex3.6") r = demo_ex36(c);
  else if (c.demo == "cor3.7") r = demo_cor37(c);
  else if (c.demo == "thm3.8") r = demo_thm38(c);
  else throw InvalidArgument(fmt::format("unknown demo '{}'", c.demo));
  r["demo"] = c.demo;
  return r;
}

Json dispatch(const Config& c) {
  if (c.command == "analyze") return cmd_analyze(c);
  if (c.command == "certify") return cmd_certify(c);
  if (c.command == "complete") return cmd_complete(c);
  if (c.command == "deredundify") return cmd_deredundify(c);
  if (c.command == "partition") return cmd_partition(c);
  if (c.command == "orbit") return cmd_orbit(c);
  return cmd_demo(c);
}

// ---------------------------------------------------------------------------
// CSV

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

bool scalar_array(const Json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& e) { return !e.is_structured(); });
}

std::string scalar_text(const Json& j) {
  return j.is_string() ? j.get<std::string>() : j.dump();
}

void flatten(const Json& j, const std::string& path, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten(value, path.empty() ? key : path + "." + key, out);
  } else if (scalar_array(j)) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << csv_field(path) << ',' << i + 1 << ',' << csv_field(scalar_text(j[i])) << '\n';
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], fmt::format("{}[{}]", path, i + 1), out);
  } else {
    out << csv_field(path) << ",," << csv_field(scalar_text(j)) << '\n';
  }
}

}  // namespace

const std::vector<std::string>& demo_ids() {
  static const std::vector<std::string> ids{"prop2.1i", "prop2.1ii", "prop2.1iii", "thm2.4",
                                            "ex2.5",    "thm3.2",    "ex3.3ii",    "thm3.5",
                                            "ex3.6",    "cor3.7",    "thm3.8"};
  return ids;
}

std::string to_csv(const Json& report) {
  std::ostringstream out;
  out << "path,index,value\n";
  flatten(report, "", out);
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Frame completion and redundancy removal experiments", "frameforge"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--family", c.family, "orthonormal | block-tight | carleson | scaled-even | duplicated-first")
        ->check(CLI::IsMember({"orthonormal", "block-tight", "carleson", "scaled-even", "duplicated-first"}));
    sub->add_option("--input", c.input, "VectorSystem JSON file");
    sub->add_option("--n", c.n, "Number of vectors");
    sub->add_option("--ambient,--d", c.ambient, "Ambient dimension");
    sub->add_option("--delta", c.delta, "Perturbation size")->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", c.epsilon)->check(CLI::PositiveNumber);
    sub->add_option("--alpha", c.alpha, "Carleson parameter")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--threshold", c.threshold, "Partition lower bound")->check(CLI::PositiveNumber);
    sub->add_option("--n-excess", c.n_excess, "Number of extra vectors N");
    sub->add_option("--step", c.step, "Subsampling step")->check(CLI::PositiveNumber);
    sub->add_option("--k", c.k_start, "First index of the convergent tail (1-based)");
    sub->add_option("--blocks", c.blocks, "Rotation block sizes")->delimiter(',');
    sub->add_option("--completer", c.completer)->check(CLI::IsMember({"trivial", "spread"}));
    sub->add_option("--trials", c.trials)->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Base seed (default: $FRAMEFORGE_SEED)");
    sub->add_option("--output", c.output, "Write the report here instead of stdout");
    sub->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--jobs", c.jobs, "Threads for independent trials")->check(CLI::PositiveNumber);
  };

  auto* analyze = app.add_subcommand("analyze", "Bounds, classification, excess and deficit");
  auto* certify = app.add_subcommand("certify", "Perturbation certificates");
  auto* complete = app.add_subcommand("complete", "Complete a system by small perturbations");
  auto* deredundify = app.add_subcommand("deredundify", "Perturb a redundant frame into a Riesz system");
  auto* partition = app.add_subcommand("partition", "Greedy partition into Riesz sequences");
  auto* orbit_cmd = app.add_subcommand("orbit", "Factor a basis as an operator orbit");
  auto* demo = app.add_subcommand("demo", "Run a preset experiment");
  for (auto* sub : {analyze, certify, complete, deredundify, partition, orbit_cmd, demo}) add_common(sub);

  certify->add_option("--perturbed", c.perturbed, "Perturbed system h (JSON file)");
  certify->add_option("--mode", c.mode)->check(CLI::IsMember({"frame", "riesz"}));
  complete->add_option("--method", c.method)
      ->check(CLI::IsMember({"not-bounded-below", "excess", "convergent", "operator"}));
  deredundify->add_option("--method", c.method)->check(CLI::IsMember({"vanishing", "near-riesz"}));
  partition->add_flag("--complete", c.complete, "Also complete every class to a Riesz basis");
  demo->add_option("id", c.demo, "Experiment id")->required()->check(CLI::IsMember(demo_ids()));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  c.command = app.get_subcommands().front()->get_name();

  if (seed) {
    c.seed = *seed;
  } else if (const char* env = std::getenv("FRAMEFORGE_SEED")) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: FRAMEFORGE_SEED is not an unsigned integer: " << env << '\n';
      return 1;
    }
  } else if (c.trials > 1) {
    err << "error: --trials > 1 needs --seed or FRAMEFORGE_SEED\n";
    return 1;
  }

  const auto start = std::chrono::steady_clock::now();
  Json results;
  try {
    results = dispatch(c);
  } catch (const HypothesisError& e) {
    err << "hypothesis violated: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const Json report{{"version", std::string(kVersion)},
                    {"config", config_json(c)},
                    {"results", std::move(results)},
                    {"wall_time", wall}};
  const std::string text = c.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
  if (c.output.empty()) {
    out << text;
  } else {
    std::ofstream file(c.output);
    if (!file) {
      err << "error: cannot write " << c.output << '\n';
      return 1;
    }
    file << text;
  }
  return 0;
}

}  // namespace frameforge::cli
