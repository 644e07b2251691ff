#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mtsysid/analysis.hpp"
#include "mtsysid/model.hpp"
#include "mtsysid/solver.hpp"
#include "mtsysid/types.hpp"

// nlohmann/json ships as the single vendored header; the fwd header is not
// available, so pull the full one.
#if !defined(NLOHMANN_JSON_VERSION_MAJOR)
#include <json.hpp>
#endif

namespace mtsysid {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "mtsysid 0.1.0";
inline constexpr const char* kSchemaVersion = "1";

// --- Text round-trip helpers ---------------------------------------------

/// Formats with 17 significant digits, enough for exact double round-trips.
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& where);

// --- Trajectory CSV --------------------------------------------------------
//
// Header `x1,...,xn,u1,...,up`; row t holds x(t) and u(t); the final row's
// input fields are empty (there is no u(P+1)). Values carry full round-trip
// precision.

void export_trajectory(const Trajectory& trajectory, const std::string& path);
Trajectory ingest_trajectory(const std::string& path);

/// Plain numeric CSV without header (used for B matrices).
void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

// --- Experiment configuration ---------------------------------------------

enum class Method { Ls, MtGroup, MtDeviation, MtNuclear, MtComposite };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct CvSettings {
  int folds = 5;
  std::vector<double> grid;  // empty -> data-driven default grid

  bool operator==(const CvSettings&) const = default;
};

struct ExperimentConfig {
  enum class Mode { Generate, Ingest };

  Mode mode = Mode::Generate;
  std::optional<SimilarFamilySpec> family;  // generate mode
  double noise_std = 0.1;                   // generate mode: process noise of the simulated systems
  std::vector<std::string> data_paths;      // ingest mode: one trajectory CSV per system
  std::vector<std::string> b_paths;         // ingest mode: optional B matrix CSVs

  Method method = Method::Ls;
  SolverConfig solver;
  std::optional<CvSettings> cv;

  std::vector<int> train_lengths;  // per-system training transition counts
  int test_length = 0;             // test pairs taken from the trajectory tail
  std::string output_path;
  std::uint64_t seed = 0;

  void validate() const;
};

Json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& j);

// --- Results record ---------------------------------------------------------

struct SolverSummary {
  int iterations = 0;
  bool converged = false;
  double objective_first = 0.0;
  double objective_last = 0.0;
  double final_step = 0.0;

  bool operator==(const SolverSummary&) const = default;
};

struct CvSummary {
  std::vector<double> grid;
  std::vector<double> scores;
  double best_lambda = 0.0;

  bool operator==(const CvSummary&) const = default;
};

/// One self-describing document per run; everything needed to regenerate the
/// error-vs-case curves with any plotting tool.
struct ResultsRecord {
  std::string schema_version = kSchemaVersion;
  std::string tool_version = kToolVersion;
  Json config_echo;
  std::string method;
  std::optional<double> lambda;                     // resolved weight (non-composite)
  std::optional<double> lambda1;                    // composite weights
  std::optional<double> lambda2;
  std::vector<double> e_scores;                     // per-system E(A)
  std::optional<std::vector<double>> frob_errors;   // per-system, only when truth is known
  std::optional<SolverSummary> solver;              // absent for the plain LS method
  std::optional<CvSummary> cv;
  double runtime_seconds = 0.0;

  bool operator==(const ResultsRecord&) const = default;
};

Json record_to_json(const ResultsRecord& record);
ResultsRecord record_from_json(const Json& j);

void export_results(const ResultsRecord& record, const std::string& path);
ResultsRecord parse_results(const std::string& path);

// --- Runner -----------------------------------------------------------------

struct RunOutput {
  ResultsRecord record;
  MatrixBundle estimates;
  MultiSystemDataset train;                 // the training split actually fitted
  std::optional<MatrixBundle> truth;
};

/// Builds or loads the dataset, splits train/test (test pairs from the
/// trajectory tail), runs the chosen method (with CV when configured),
/// computes metrics, writes the record to config.output_path when set, and
/// returns it. Deterministic given config + seed.
RunOutput run_experiment(const ExperimentConfig& config);

/// Generate-mode dataset assembly without fitting: simulated trajectories of
/// length train+test per system, plus the ground-truth family.
struct GeneratedData {
  FamilyResult family;
  std::vector<Trajectory> trajectories;  // full length (train + test)
};
GeneratedData build_generated(const ExperimentConfig& config);

}  // namespace mtsysid
