#include "refrec/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "refrec/errors.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

namespace {

bool is_relevant(const RelevantSet& relevant, std::uint32_t label) {
  return std::binary_search(relevant.begin(), relevant.end(), label);
}

double log2_rank(std::size_t position) {  // 0-based
  return std::log2(static_cast<double>(position) + 2.0);
}

}  // namespace

double precision_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::size_t hits = 0;
  const std::size_t top = std::min<std::size_t>(pred.size(), k);
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(relevant, pred[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t top = std::min<std::size_t>(pred.size(), k);
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(relevant, pred[i])) dcg += 1.0 / log2_rank(i);
  double ideal = 0.0;
  const std::size_t n_ideal = std::min<std::size_t>(relevant.size(), k);
  for (std::size_t i = 0; i < n_ideal; ++i) ideal += 1.0 / log2_rank(i);
  return dcg / ideal;
}

double recall_at_k(const RankedLabels& pred, const RelevantSet& relevant, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  std::size_t hits = 0;
  const std::size_t top = std::min<std::size_t>(pred.size(), k);
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(relevant, pred[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

PropensityModel fit_propensities(const std::vector<std::uint64_t>& label_counts,
                                 std::size_t n_points, double a, double b) {
  if (n_points < 2) throw ValidationError("propensities need at least 2 points");
  PropensityModel model;
  model.a = a;
  model.b = b;
  model.c = (std::log(static_cast<double>(n_points)) - 1.0) * std::pow(b + 1.0, a);
  model.p.reserve(label_counts.size());
  for (std::uint64_t n : label_counts) {
    double p = 1.0 / (1.0 + model.c * std::exp(-a * std::log(
                                          static_cast<double>(n) + b)));
    model.p.push_back(std::clamp(p, 1e-12, 1.0));
  }
  return model;
}

namespace {

// Sorted descending inverse propensities of the relevant labels; the best
// ranking puts the heaviest weights first.
std::vector<double> relevant_weights_desc(const RelevantSet& relevant,
                                          const std::vector<double>& prop) {
  std::vector<double> w;
  w.reserve(relevant.size());
  for (std::uint32_t l : relevant) w.push_back(1.0 / prop.at(l));
  std::sort(w.begin(), w.end(), std::greater<>());
  return w;
}

}  // namespace

double ps_precision_at_k(const RankedLabels& pred, const RelevantSet& relevant,
                         const std::vector<double>& propensities, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  double got = 0.0;
  const std::size_t top = std::min<std::size_t>(pred.size(), k);
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(relevant, pred[i])) got += 1.0 / propensities.at(pred[i]);
  const auto weights = relevant_weights_desc(relevant, propensities);
  double best = 0.0;
  const std::size_t n_best = std::min<std::size_t>(weights.size(), k);
  for (std::size_t i = 0; i < n_best; ++i) best += weights[i];
  return best > 0.0 ? std::clamp(got / best, 0.0, 1.0) : 0.0;
}

double ps_ndcg_at_k(const RankedLabels& pred, const RelevantSet& relevant,
                    const std::vector<double>& propensities, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  double got = 0.0;
  const std::size_t top = std::min<std::size_t>(pred.size(), k);
  for (std::size_t i = 0; i < top; ++i)
    if (is_relevant(relevant, pred[i]))
      got += 1.0 / (propensities.at(pred[i]) * log2_rank(i));
  const auto weights = relevant_weights_desc(relevant, propensities);
  double best = 0.0;
  const std::size_t n_best = std::min<std::size_t>(weights.size(), k);
  for (std::size_t i = 0; i < n_best; ++i) best += weights[i] / log2_rank(i);
  return best > 0.0 ? std::clamp(got / best, 0.0, 1.0) : 0.0;
}

const EvalCell* EvalBlock::find(const std::string& specialty,
                                const std::string& metric, int k) const {
  for (const auto& c : cells)
    if (c.specialty == specialty && c.metric == metric && c.k == k) return &c;
  return nullptr;
}

namespace {

struct MetricAccumulator {
  double sum = 0.0;
  std::size_t n = 0;
};

void eval_column(const std::vector<RankedPrediction>& preds,
                 const LabelMatrix& truth, const std::vector<char>* mask,
                 const std::string& column_name, int min_predictions,
                 const PropensityModel& prop, const EvalConfig& cfg,
                 EvalBlock& out) {
  static const char* kMetrics[] = {"P", "nDCG", "Recall", "PSP", "PSnDCG"};
  std::vector<std::vector<MetricAccumulator>> acc(
      5, std::vector<MetricAccumulator>(cfg.ks.size()));
  std::size_t kept = 0, dropped_no_pos = 0;

  for (std::size_t r = 0; r < truth.rows.size(); ++r) {
    RelevantSet relevant;
    if (mask) {
      for (std::uint32_t l : truth.rows[r])
        if ((*mask)[l]) relevant.push_back(l);
    } else {
      relevant = truth.rows[r];
    }
    if (relevant.empty()) {
      ++dropped_no_pos;
      continue;
    }
    RankedLabels ranked;
    for (const auto& [l, s] : preds[r].items)
      if (!mask || (*mask)[l]) ranked.push_back(l);
    if (mask && ranked.size() < static_cast<std::size_t>(min_predictions))
      continue;
    ++kept;
    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
      const int k = cfg.ks[ki];
      acc[0][ki].sum += precision_at_k(ranked, relevant, k);
      acc[1][ki].sum += ndcg_at_k(ranked, relevant, k);
      acc[2][ki].sum += recall_at_k(ranked, relevant, k);
      acc[3][ki].sum += ps_precision_at_k(ranked, relevant, prop.p, k);
      acc[4][ki].sum += ps_ndcg_at_k(ranked, relevant, prop.p, k);
    }
  }
  if (!mask) out.dropped_no_positives = dropped_no_pos;
  if (kept == 0) return;  // absent cell group
  for (std::size_t m = 0; m < 5; ++m)
    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
      EvalCell cell;
      cell.specialty = column_name;
      cell.metric = kMetrics[m];
      cell.k = cfg.ks[ki];
      cell.value = acc[m][ki].sum / static_cast<double>(kept);
      cell.n_patients = kept;
      out.cells.push_back(std::move(cell));
    }
}

}  // namespace

EvalBlock evaluate(const std::vector<RankedPrediction>& preds,
                   const LabelMatrix& truth,
                   const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
                   const std::vector<std::string>& specialty_names,
                   const PropensityModel& propensities, const EvalConfig& cfg) {
  if (preds.size() != truth.rows.size())
    throw ValidationError("predictions and labels are not row-aligned (" +
                          std::to_string(preds.size()) + " vs " +
                          std::to_string(truth.rows.size()) + " rows)");
  for (std::size_t r = 0; r < preds.size(); ++r)
    if (!truth.patient_ids.empty() && !preds[r].patient_id.empty() &&
        preds[r].patient_id != truth.patient_ids[r])
      throw ValidationError("prediction row " + std::to_string(r) +
                            " is for patient '" + preds[r].patient_id +
                            "' but labels row is '" + truth.patient_ids[r] + "'");
  if (propensities.p.size() != truth.n_doctors)
    throw ValidationError("propensity vector does not cover the label space");

  EvalBlock block;
  eval_column(preds, truth, nullptr, "All", 0, propensities, cfg, block);
  for (std::uint32_t s = 0; s < specialty_names.size(); ++s) {
    const auto mask =
        make_specialty_mask(doctor_specialties, s, specialty_names.size());
    eval_column(preds, truth, &mask, specialty_names[s],
                cfg.min_predictions_per_specialty, propensities, cfg, block);
  }
  return block;
}

DiversityReport diversity_report(
    const std::vector<RankedPrediction>& preds, const LabelMatrix& truth,
    const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
    std::size_t n_specialties) {
  DiversityReport rep;
  rep.test_label_counts.assign(truth.n_doctors, 0);
  rep.prediction_counts.assign(truth.n_doctors, 0);
  rep.patients_covered_per_specialty.assign(n_specialties, 0);

  for (const auto& row : truth.rows)
    for (std::uint32_t l : row) ++rep.test_label_counts[l];

  for (const auto& pred : preds) {
    std::vector<char> spec_seen(n_specialties, 0);
    for (const auto& [l, s] : pred.items) {
      ++rep.prediction_counts[l];
      for (std::uint32_t spec : doctor_specialties[l]) spec_seen[spec] = 1;
    }
    std::size_t distinct = 0;
    for (std::size_t s = 0; s < n_specialties; ++s)
      if (spec_seen[s]) {
        ++distinct;
        ++rep.patients_covered_per_specialty[s];
      }
    if (rep.distinct_specialty_histogram.size() <= distinct)
      rep.distinct_specialty_histogram.resize(distinct + 1, 0);
    ++rep.distinct_specialty_histogram[distinct];
  }
  return rep;
}

double gini_coefficient(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) return 0.0;
  std::vector<double> x(counts.begin(), counts.end());
  std::sort(x.begin(), x.end());
  double total = 0.0, weighted = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += x[i];
    weighted += (static_cast<double>(i) + 1.0) * x[i];
  }
  if (total <= 0.0) return 0.0;
  return (2.0 * weighted) / (n * total) - (n + 1.0) / n;
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "method,scenario,partition,specialty,metric,K,value,n_patients\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.scenario << ',' << r.partition << ','
        << r.cell.specialty << ',' << r.cell.metric << ',' << r.cell.k << ','
        << format_double(r.cell.value) << ',' << r.cell.n_patients << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty report");
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f.size() != 8)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": bad row");
    ReportRow r;
    r.method = f[0];
    r.scenario = f[1];
    r.partition = f[2];
    r.cell.specialty = f[3];
    r.cell.metric = f[4];
    r.cell.k = std::stoi(f[5]);
    r.cell.value = std::stod(f[6]);
    r.cell.n_patients = std::stoull(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json report_to_json(const std::vector<ReportRow>& rows,
                              const EvalConfig& cfg, double r_min) {
  nlohmann::json j;
  j["metadata"] = {
      {"propensity_a", cfg.propensity_a},
      {"propensity_b", cfg.propensity_b},
      {"ps_normalization", "per-row best-achievable, clipped to [0,1]"},
      {"averaging", "macro over patients; rows without positives dropped"},
      {"min_predictions_per_specialty", cfg.min_predictions_per_specialty},
      {"r_min", r_min}};
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& r : rows) {
    cells.push_back({{"method", r.method},
                     {"scenario", r.scenario},
                     {"partition", r.partition},
                     {"specialty", r.cell.specialty},
                     {"metric", r.cell.metric},
                     {"K", r.cell.k},
                     {"value", r.cell.value},
                     {"n_patients", r.cell.n_patients}});
  }
  j["cells"] = std::move(cells);
  return j;
}

}  // namespace refrec
