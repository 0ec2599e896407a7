#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "refrec/labels.hpp"
#include "refrec/ranking.hpp"

namespace refrec {

// Ranked labels only; scores have already fixed the order.
using RankedLabels = std::vector<std::uint32_t>;
// Ascending label indices.
using RelevantSet = std::vector<std::uint32_t>;

double precision_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k);
double ndcg_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k);
double recall_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k);

// Inverse-propensity weights following the sigmoid-in-log-frequency model
// p_l = 1 / (1 + C e^{-A ln(n_l + B)}) with C = (ln N - 1)(B + 1)^A.
struct PropensityModel {
  double a = 0.55;
  double b = 1.5;
  double c = 0.0;
  std::vector<double> p;  // per label, in (0, 1]
};

PropensityModel fit_propensities(const std::vector<std::uint64_t>& label_counts,
                                 std::size_t n_points, double a = 0.55,
                                 double b = 1.5);

// Propensity-scored precision/nDCG, normalized per row by the best value any
// ranking of the same relevant set can reach at k, clipped into [0, 1].
double ps_precision_at_k(const RankedLabels& pred, const RelevantSet& relevant,
                         const std::vector<double>& propensities, int k);
double ps_ndcg_at_k(const RankedLabels& pred, const RelevantSet& relevant,
                    const std::vector<double>& propensities, int k);

struct EvalConfig {
  std::vector<int> ks{1, 3, 5, 10};
  int min_predictions_per_specialty = 3;
  double propensity_a = 0.55;
  double propensity_b = 1.5;
};

struct EvalCell {
  std::string specialty;  // "All" or a specialty id
  std::string metric;     // P, nDCG, Recall, PSP, PSnDCG
  int k = 0;
  double value = 0.0;
  std::size_t n_patients = 0;  // rows that entered the average
};

// Results for one (method, scenario, partition); the caller attaches those.
struct EvalBlock {
  std::vector<EvalCell> cells;
  std::size_t dropped_no_positives = 0;       // for the "All" column
  const EvalCell* find(const std::string& specialty, const std::string& metric,
                       int k) const;
};

// Macro-averaged metrics over patients, for "All" plus every specialty
// submatrix: labels and predictions restricted to that specialty's doctors,
// rows without positives dropped, rows with fewer than
// min_predictions_per_specialty surviving predictions dropped.
EvalBlock evaluate(const std::vector<RankedPrediction>& preds,
                   const LabelMatrix& truth,
                   const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
                   const std::vector<std::string>& specialty_names,
                   const PropensityModel& propensities, const EvalConfig& cfg);

struct DiversityReport {
  std::vector<std::uint64_t> test_label_counts;   // per doctor
  std::vector<std::uint64_t> prediction_counts;   // per doctor
  // Patients with at least one predicted doctor of each specialty.
  std::vector<std::uint64_t> patients_covered_per_specialty;
  // Histogram over the per-patient number of distinct predicted specialties.
  std::vector<std::uint64_t> distinct_specialty_histogram;
};

DiversityReport diversity_report(
    const std::vector<RankedPrediction>& preds, const LabelMatrix& truth,
    const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
    std::size_t n_specialties);

double gini_coefficient(const std::vector<std::uint64_t>& counts);

// Flattened report rows for CSV/JSON export.
struct ReportRow {
  std::string method;
  std::string scenario;
  std::string partition;
  EvalCell cell;
};

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::string& path);
nlohmann::json report_to_json(const std::vector<ReportRow>& rows,
                              const EvalConfig& cfg, double r_min);

}  // namespace refrec
