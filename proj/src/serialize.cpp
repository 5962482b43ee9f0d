#include "frameforge/serialize.hpp"

#include <fstream>

#include <fmt/format.h>

#include "frameforge/error.hpp"

void nlohmann::adl_serializer<std::complex<double>>::from_json(const json& j,
                                                                std::complex<double>& z) {
  if (j.is_number()) {
    z = {j.get<double>(), 0.0};
    return;
  }
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw frameforge::InvalidArgument("complex entries must be numbers or [re, im] pairs");
  }
  z = {j[0].get<double>(), j[1].get<double>()};
}

namespace frameforge {

Json system_to_json(const VectorSystem& s) {
  return Json{{"ambient_dim", s.ambient_dim()}, {"label", s.label()}, {"vectors", s.vectors()}};
}

VectorSystem system_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("vectors")) {
    throw InvalidArgument("system JSON needs \"ambient_dim\" and \"vectors\"");
  }
  const auto d = j.at("ambient_dim").get<std::size_t>();
  std::vector<CVector> vectors;
  for (const auto& row : j.at("vectors")) {
    if (!row.is_array() || row.size() != d) {
      throw InvalidArgument(fmt::format("vector {} has {} entries, expected {}",
                                        vectors.size() + 1, row.is_array() ? row.size() : 0, d));
    }
    vectors.push_back(row.get<CVector>());
  }
  return VectorSystem(d, std::move(vectors), j.value("label", std::string{}));
}

VectorSystem read_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("cannot open {}", path.string()));
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(fmt::format("{}: {}", path.string(), e.what()));
  }
  return system_from_json(j);
}

void write_system(const std::filesystem::path& path, const VectorSystem& s) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument(fmt::format("cannot write {}", path.string()));
  out << system_to_json(s).dump(2) << '\n';
}

void to_json(Json& j, const CMatrix& m) {
  j = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(std::move(row));
  }
}

void to_json(Json& j, const SpectralBounds& b) {
  j = Json{{"lower", b.lower}, {"upper", b.upper}, {"convention", to_string(b.convention)},
           {"tol", b.tol}};
}

void to_json(Json& j, const Classification& c) {
  j = Json{{"is_bessel", c.is_bessel},
           {"bessel_bound", c.bessel_bound},
           {"is_frame_for_ambient", c.is_frame_for_ambient},
           {"is_frame_sequence", c.is_frame_sequence},
           {"is_riesz_sequence", c.is_riesz_sequence},
           {"is_riesz_basis", c.is_riesz_basis},
           {"rank", c.rank},
           {"count", c.count},
           {"ambient_dim", c.ambient_dim}};
}

void to_json(Json& j, const Certificate& c) {
  j = Json{{"mode", to_string(c.mode)},
           {"sum_sq", c.sum_sq},
           {"lower_bound_A", c.lower_bound_A},
           {"fired", c.fired},
           {"conclusion", c.conclusion},
           {"codim_check", nullptr},
           {"verified", nullptr}};
  if (c.codim_check) {
    j["codim_check"] = {{"deficit_g", c.codim_check->first}, {"deficit_h", c.codim_check->second}};
  }
  if (c.verified) j["verified"] = *c.verified;
}

void to_json(Json& j, const PerturbationReport& r) {
  j = Json{{"per_index", r.per_index},
           {"sup", r.sup},
           {"sum_sq", r.sum_sq},
           {"floor_A", nullptr},
           {"floor_satisfied", nullptr}};
  if (r.floor_A) j["floor_A"] = *r.floor_A;
  if (r.floor_satisfied) j["floor_satisfied"] = *r.floor_satisfied;
}

void to_json(Json& j, const TruncationCertificate& c) {
  j = Json{{"prefix_length", c.prefix_length},
           {"ambient_dim", c.ambient_dim},
           {"tail_mass_bound", c.tail_mass_bound}};
}

void to_json(Json& j, const CompletionOutput& c) {
  j = Json{{"psi", system_to_json(c.psi)},
           {"report", c.report},
           {"method", c.method},
           {"witness", c.witness},
           {"modified_indices", c.modified_indices},
           {"appended_indices", c.appended_indices},
           {"exceptional_indices", c.exceptional_indices},
           {"diagnostics", c.diagnostics}};
}

void to_json(Json& j, const DeficitSpreadOutput& s) {
  j = Json{{"ons", s.ons},
           {"indices", s.indices},
           {"per_index_perturbation", s.per_index_perturbation},
           {"per_index_budget", s.per_index_budget},
           {"exceptional_indices", s.exceptional_indices},
           {"block_sizes", s.block_sizes},
           {"angle", s.angle},
           {"deficit", s.deficit}};
}

void to_json(Json& j, const PartitionPlan& p) {
  j = Json{{"threshold", p.threshold},
           {"classes", p.classes},
           {"per_class_lower_bound", p.per_class_lower_bound}};
}

void to_json(Json& j, const OrbitFactorization& f) {
  j = Json{{"operator_T", f.operator_T},
           {"seed_phi", f.seed_phi},
           {"operator_norm", f.operator_norm},
           {"reconstruction_residual", f.reconstruction_residual}};
}

void to_json(Json& j, const ObstructionTrial& t) {
  j = Json{{"seed", t.seed},
           {"scaled_sum", t.scaled_sum},
           {"max_perturbation", t.max_perturbation},
           {"fired", t.fired},
           {"verified", t.verified},
           {"deficit_g", t.deficit_g},
           {"deficit_h", t.deficit_h}};
}

void to_json(Json& j, const ObstructionReport& r) {
  j = Json{{"delta", r.delta},
           {"n", r.n},
           {"seed", r.seed},
           {"bound", r.bound},
           {"trials", r.trials},
           {"max_scaled_sum", r.max_scaled_sum},
           {"all_within_bound", r.all_within_bound},
           {"all_fired", r.all_fired},
           {"all_deficit_preserved", r.all_deficit_preserved},
           {"passed", r.passed()}};
}

void to_json(Json& j, const SubsampleReport& r) {
  j = Json{{"alpha", r.alpha},
           {"step", r.step},
           {"count", r.count},
           {"ambient_dim", r.ambient_dim},
           {"bounds", r.bounds},
           {"rank", r.rank},
           {"excess", r.excess},
           {"norms", r.norms},
           {"norms_below_first", r.norms_below_first}};
}

}  // namespace frameforge
