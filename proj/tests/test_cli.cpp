#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frameforge/cli.hpp"

using namespace frameforge;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Outcome invoke(std::vector<std::string> args) {
  ::unsetenv("FRAMEFORGE_SEED");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  const auto unknown = invoke({"analyze", "--family", "carleson", "--bogus", "3"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"demo", "nope"}).code == 1);
  CHECK(invoke({"analyze"}).code == 1);  // no system given
  const auto seedless = invoke({"demo", "ex2.5", "--trials", "3"});
  CHECK(seedless.code == 1);
  CHECK(seedless.err.find("seed") != std::string::npos);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("hypothesis violations exit with 2") {
  const auto r = invoke({"deredundify", "--family", "orthonormal", "--ambient", "4"});
  CHECK(r.code == 2);
  CHECK(r.err.find("hypothesis") != std::string::npos);
}

TEST_CASE("analyze a carleson prefix") {
  const auto r = invoke({"analyze", "--family", "carleson", "--alpha", "0.5", "--n", "64", "--ambient", "32"});
  REQUIRE(r.code == 0);
  const auto j = r.json();
  CHECK(j["version"] == std::string(cli::kVersion));
  CHECK(j["config"]["alpha"] == 0.5);
  const auto& res = j["results"];
  CHECK(res["system"]["count"] == 64);
  CHECK(res["excess"].get<int>() > 0);
  CHECK(res["norms"].size() == 64);
  CHECK(res["bounds_frame_on_span"]["lower"].get<double>() > 0.0);
  CHECK(res["removable_set"].size() == res["excess"].get<std::size_t>());
}

TEST_CASE("demo ex3.6 echoes the per-index perturbation") {
  const auto r = invoke({"demo", "ex3.6", "--epsilon", "0.1", "--d", "128"});
  REQUIRE(r.code == 0);
  const auto res = r.json()["results"];
  CHECK(res["expected_perturbation"].get<double>() == doctest::Approx(std::sqrt(0.61)));
  CHECK(res["report"]["per_index"][5].get<double>() == doctest::Approx(std::sqrt(0.61)));
  CHECK(res["passed"] == true);
}

TEST_CASE("demo ex2.5 passes and is reproducible under threads") {
  const auto a = invoke({"demo", "ex2.5", "--delta", "0.7", "--n", "16", "--trials", "100", "--seed", "7"});
  const auto b = invoke({"demo", "ex2.5", "--delta", "0.7", "--n", "16", "--trials", "100", "--seed", "7",
                         "--jobs", "4"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.json()["results"]["passed"] == true);
  CHECK(a.json()["results"].dump() == b.json()["results"].dump());
}

TEST_CASE("seed comes from the environment when not given") {
  ::setenv("FRAMEFORGE_SEED", "11", 1);
  std::ostringstream out, err;
  const int code = cli::run({"demo", "ex2.5", "--trials", "2", "--n", "4"}, out, err);
  ::unsetenv("FRAMEFORGE_SEED");
  REQUIRE(code == 0);
  CHECK(Json::parse(out.str())["config"]["seed"] == 11);
}

TEST_CASE("every demo runs and passes with defaults") {
  for (const auto& id : cli::demo_ids()) {
    CAPTURE(id);
    const auto r = invoke({"demo", id});
    REQUIRE(r.code == 0);
    CHECK(r.json()["results"]["passed"] == true);
    CHECK(r.json()["results"]["demo"] == id);
  }
}

TEST_CASE("subcommands") {
  CHECK(invoke({"certify", "--family", "block-tight", "--ambient", "4", "--delta", "0.1", "--trials", "5",
                "--seed", "3"}).code == 0);
  CHECK(invoke({"complete", "--family", "orthonormal", "--n", "8", "--ambient", "9", "--completer", "spread",
                "--blocks", "4,4", "--delta", "0.8"}).code == 0);
  CHECK(invoke({"complete", "--family", "duplicated-first", "--n", "6", "--ambient", "6", "--method",
                "excess"}).code == 0);
  CHECK(invoke({"deredundify", "--family", "carleson", "--ambient", "32", "--n", "32"}).code == 0);
  CHECK(invoke({"partition", "--family", "duplicated-first", "--ambient", "5", "--complete"}).code == 0);
  CHECK(invoke({"orbit", "--family", "orthonormal", "--ambient", "4"}).code == 0);
}

TEST_CASE("input files, output files, csv and config files") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto input = dir / "frameforge_cli_input.json";
  write_system(input, materialize(family::OrthonormalBasis{}, 3, 3).system);
  const auto output = dir / "frameforge_cli_output.csv";
  const auto r = invoke({"analyze", "--input", input.string(), "--format", "csv", "--output", output.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(output);
  std::string header;
  std::getline(in, header);
  CHECK(header == "path,index,value");
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body.find("results.norms,3,1.0") != std::string::npos);

  const auto config = dir / "frameforge_cli.toml";
  std::ofstream(config) << "[demo]\nepsilon = 0.3\nd = 8\n";
  const auto c = invoke({"--config", config.string(), "demo", "ex3.6"});
  REQUIRE(c.code == 0);
  CHECK(c.json()["config"]["epsilon"] == 0.3);
  CHECK(c.json()["results"]["d"] == 8);

  CHECK(invoke({"analyze", "--input", (dir / "missing.json").string()}).code == 1);
  std::filesystem::remove(input);
  std::filesystem::remove(output);
  std::filesystem::remove(config);
}

TEST_CASE("csv flattening") {
  const Json j{{"a", {{"b", Json::array({1, 2})}}}, {"s", "x,y"}};
  CHECK(cli::to_csv(j) == "path,index,value\na.b,1,1\na.b,2,2\ns,,\"x,y\"\n");
}
