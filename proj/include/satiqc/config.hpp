#pragma once

#include "satiqc/iqc.hpp"
#include "satiqc/lft.hpp"
#include "satiqc/sim.hpp"
#include "satiqc/synthesis.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace satiqc {

using json = nlohmann::ordered_json;

// Schema violation; what() starts with the offending field path.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FactorizeSpec {
  IqcKind kind = IqcKind::popov;
  double alpha = 1.0;
  double eps = 0.01;
  std::optional<StateSpace> h;
};

struct SweepSpec {
  std::vector<double> values;
  std::vector<Strategy> strategies{Strategy::popov, Strategy::zames_falb, Strategy::sector, Strategy::mixed};
};

struct ProblemConfig {
  std::string name;
  std::string method = "iqc";  // "iqc" or "antiwindup"
  std::optional<SaturatedLFTPlant> plant;
  std::vector<IqcSpec> iqcs;
  SynthesisOptions synthesis;
  SdpOptions solver;
  FactorOptions factor;
  std::optional<FactorizeSpec> factorize;
  std::optional<SweepSpec> sweep;
  std::vector<Scenario> scenarios;
};

ProblemConfig parse_config(const json& j);
ProblemConfig load_config(const std::string& path);

json to_json(const Mat& M);
json to_json(const CVec& v);  // [[re, im], ...]
json to_json(const StateSpace& g);
Mat matrix_from_json(const json& j, const std::string& field);

json synthesis_result_json(const SynthesisResult& r, double round_trip);
json antiwindup_result_json(const AntiWindupResult& r);

// Reads back a result written by synthesis_result_json (optionally wrapped in
// {"result": ...}). F_c, H_c and gamma are required; Q, Gamma and lambdas are
// read when present and left empty otherwise.
SynthesisResult synthesis_result_from_json(const json& j);

}  // namespace satiqc
