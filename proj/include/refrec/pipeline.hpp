#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "refrec/baselines.hpp"
#include "refrec/dataset.hpp"
#include "refrec/features.hpp"
#include "refrec/metrics.hpp"
#include "refrec/synthgen.hpp"
#include "refrec/xmlc.hpp"

namespace refrec {

struct ModelSpec {
  std::string type;  // xml | popularity | mf | hybrid_mf
  XmlTrainConfig xml;
  MfConfig mf;
  HybridMfConfig hybrid;
  std::optional<std::uint64_t> explicit_seed;  // else the global seed
  bool uses_features() const { return type == "xml" || type == "hybrid_mf"; }
};

struct ExperimentManifest {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool use_generator = true;
  GeneratorConfig generator;
  struct SourcePaths {
    std::string interactions, patients, doctors, hospitals;
  } source;
  SplitParams split;
  std::optional<std::uint64_t> split_seed;  // else the global seed
  std::vector<ScenarioConfig> scenarios;
  double r_min = 0.0;
  std::vector<ModelSpec> models;
  EvalConfig eval;
  int top_b = 30;  // stored predictions per patient, every method
};

ExperimentManifest parse_manifest(const nlohmann::json& j);
ExperimentManifest load_manifest(const std::string& path);
nlohmann::json manifest_to_json(const ExperimentManifest& m);

extern const std::vector<std::string> kStageNames;  // pipeline order

struct RunOptions {
  std::string stage;  // empty means the full cached run
  bool strict = true;
  int threads = 1;
  std::optional<std::uint64_t> seed_override;
};

// Executes the pipeline against manifest.output_dir. A full run checks each
// stage's input content hash and skips stages whose inputs and outputs are
// unchanged; naming a single stage always re-runs just that stage.
void run_pipeline(const ExperimentManifest& manifest, const RunOptions& opts);

}  // namespace refrec
