#pragma once

// JSON encoding of systems and results. Complex numbers are [re, im] pairs.

#include <complex>
#include <filesystem>

#include "json.hpp"

#include "frameforge/analysis.hpp"
#include "frameforge/completions.hpp"
#include "frameforge/linalg.hpp"
#include "frameforge/redundancy.hpp"
#include "frameforge/systems.hpp"

namespace nlohmann {
template <>
struct adl_serializer<std::complex<double>> {
  static void to_json(json& j, const std::complex<double>& z) { j = json::array({z.real(), z.imag()}); }
  static void from_json(const json& j, std::complex<double>& z);
};
}  // namespace nlohmann

namespace frameforge {

using Json = nlohmann::json;

/// {"ambient_dim": d, "label": "...", "vectors": [[[re, im], ...], ...]}
Json system_to_json(const VectorSystem& s);
VectorSystem system_from_json(const Json& j);
VectorSystem read_system(const std::filesystem::path& path);
void write_system(const std::filesystem::path& path, const VectorSystem& s);

void to_json(Json& j, const CMatrix& m);
void to_json(Json& j, const SpectralBounds& b);
void to_json(Json& j, const Classification& c);
void to_json(Json& j, const Certificate& c);
void to_json(Json& j, const PerturbationReport& r);
void to_json(Json& j, const TruncationCertificate& c);
void to_json(Json& j, const CompletionOutput& c);
void to_json(Json& j, const DeficitSpreadOutput& s);
void to_json(Json& j, const PartitionPlan& p);
void to_json(Json& j, const OrbitFactorization& f);
void to_json(Json& j, const ObstructionTrial& t);
void to_json(Json& j, const ObstructionReport& r);
void to_json(Json& j, const SubsampleReport& r);

}  // namespace frameforge
