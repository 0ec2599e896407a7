#include "refrec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "refrec/errors.hpp"
#include "refrec/random.hpp"

namespace refrec {

namespace {

constexpr double kMfInitScale = 0.1;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Truncates a complete (score, label) ranking to k with the shared tie rule.
RankedPrediction rank_topk(std::vector<double> scores, int k) {
  RankedPrediction pred;
  pred.items.reserve(scores.size());
  for (std::uint32_t l = 0; l < scores.size(); ++l)
    pred.items.emplace_back(l, scores[l]);
  std::stable_sort(pred.items.begin(), pred.items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (pred.items.size() > static_cast<std::size_t>(k)) pred.items.resize(k);
  return pred;
}

}  // namespace

PopularityModel train_popularity(const std::vector<std::uint64_t>& doctor_counts) {
  PopularityModel m;
  m.counts = doctor_counts;
  m.ranking.resize(doctor_counts.size());
  std::iota(m.ranking.begin(), m.ranking.end(), 0);
  std::stable_sort(m.ranking.begin(), m.ranking.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return doctor_counts[a] > doctor_counts[b];
                   });
  return m;
}

RankedPrediction popularity_topk(const PopularityModel& model, int k) {
  RankedPrediction pred;
  const std::size_t n = std::min<std::size_t>(model.ranking.size(), k);
  for (std::size_t i = 0; i < n; ++i)
    pred.items.emplace_back(model.ranking[i],
                            static_cast<double>(model.counts[model.ranking[i]]));
  return pred;
}

RankedPrediction popularity_topk_specialty(const PopularityModel& model,
                                           const std::vector<char>& mask, int k) {
  RankedPrediction pred;
  for (std::uint32_t l : model.ranking) {
    if (!mask[l]) continue;
    pred.items.emplace_back(l, static_cast<double>(model.counts[l]));
    if (pred.items.size() == static_cast<std::size_t>(k)) break;
  }
  return pred;
}

MfModel train_mf(const RatingMatrix& ratings, const MfConfig& cfg) {
  if (ratings.rows.empty() || ratings.n_doctors == 0)
    throw ValidationError("cannot train matrix factorization on an empty rating matrix");
  std::size_t nnz = 0;
  for (const auto& row : ratings.rows) nnz += row.size();
  if (nnz == 0) throw ValidationError("rating matrix has no entries");

  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  const std::size_t n_pat = ratings.rows.size();
  const std::uint32_t n_doc = ratings.n_doctors;

  MfModel m;
  m.dim = cfg.dim;
  m.patient_ids = ratings.patient_ids;
  for (std::uint32_t i = 0; i < m.patient_ids.size(); ++i)
    m.patient_row[m.patient_ids[i]] = i;

  Rng rng(cfg.seed);
  m.patient_factors.resize(n_pat * d);
  for (double& v : m.patient_factors) v = rand_range(rng, -kMfInitScale, kMfInitScale);
  m.doctor_factors.resize(static_cast<std::size_t>(n_doc) * d);
  for (double& v : m.doctor_factors) v = rand_range(rng, -kMfInitScale, kMfInitScale);
  m.doctor_bias.assign(n_doc, 0.0);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (row, doctor)
  pairs.reserve(nnz);
  for (std::uint32_t r = 0; r < ratings.rows.size(); ++r)
    for (const auto& [doc, rating] : ratings.rows[r]) pairs.emplace_back(r, doc);

  std::vector<char> positive(n_doc, 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_inplace(pairs, rng);
    for (const auto& [row, pos] : pairs) {
      for (const auto& [doc, rating] : ratings.rows[row]) positive[doc] = 1;
      bool found = false;
      std::uint32_t neg = 0;
      for (int t = 0; t < 50 && !found; ++t) {
        neg = static_cast<std::uint32_t>(rand_index(rng, n_doc));
        found = !positive[neg];
      }
      for (const auto& [doc, rating] : ratings.rows[row]) positive[doc] = 0;
      if (!found) continue;

      double* u = &m.patient_factors[static_cast<std::size_t>(row) * d];
      double* vp = &m.doctor_factors[static_cast<std::size_t>(pos) * d];
      double* vn = &m.doctor_factors[static_cast<std::size_t>(neg) * d];
      double diff = m.doctor_bias[pos] - m.doctor_bias[neg];
      for (std::size_t j = 0; j < d; ++j) diff += u[j] * (vp[j] - vn[j]);
      const double g = stable_sigmoid(-diff);  // d(-ln sigma)/d diff
      const double lr = cfg.learning_rate;
      for (std::size_t j = 0; j < d; ++j) {
        const double uj = u[j];
        u[j] += lr * g * (vp[j] - vn[j]);
        vp[j] += lr * g * uj;
        vn[j] -= lr * g * uj;
      }
      m.doctor_bias[pos] += lr * g;
      m.doctor_bias[neg] -= lr * g;
    }
  }
  return m;
}

RankedPrediction mf_topk(const MfModel& model, const std::string& patient_id, int k) {
  RankedPrediction pred;
  pred.patient_id = patient_id;
  auto it = model.patient_row.find(patient_id);
  if (it == model.patient_row.end()) return pred;  // cold start: nothing to say
  const std::size_t d = static_cast<std::size_t>(model.dim);
  const double* u = &model.patient_factors[static_cast<std::size_t>(it->second) * d];
  std::vector<double> scores(model.doctor_bias.size());
  for (std::uint32_t l = 0; l < scores.size(); ++l) {
    double s = model.doctor_bias[l];
    const double* v = &model.doctor_factors[static_cast<std::size_t>(l) * d];
    for (std::size_t j = 0; j < d; ++j) s += u[j] * v[j];
    scores[l] = s;
  }
  auto ranked = rank_topk(std::move(scores), k);
  ranked.patient_id = patient_id;
  return ranked;
}

std::vector<double> HybridMfModel::represent(const SparseVector& x) const {
  const std::size_t d = static_cast<std::size_t>(dim);
  std::vector<double> r(d, 0.0);
  for (const auto& [idx, v] : x.entries)
    for (std::size_t j = 0; j < d; ++j)
      r[j] += v * feature_factors[idx * d + j];
  return r;
}

HybridMfModel train_hybrid_mf(const SparseMatrix& x_patients,
                              const SparseMatrix& x_doctors,
                              const LabelMatrix& labels,
                              const HybridMfConfig& cfg) {
  if (x_patients.n_cols != x_doctors.n_cols)
    throw ValidationError("patient and doctor features must share one space");
  if (x_patients.n_rows() != labels.rows.size() ||
      x_doctors.n_rows() != labels.n_doctors)
    throw ValidationError("feature matrices do not align with the label matrix");

  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  const std::uint32_t n_doc = labels.n_doctors;

  HybridMfModel m;
  m.dim = cfg.dim;
  m.n_features = x_patients.n_cols;
  Rng rng(cfg.seed);
  m.feature_factors.resize(static_cast<std::size_t>(m.n_features) * d);
  for (double& v : m.feature_factors) v = rand_range(rng, -kMfInitScale, kMfInitScale);
  m.doctor_bias.assign(n_doc, 0.0);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t r = 0; r < labels.rows.size(); ++r)
    for (std::uint32_t l : labels.rows[r]) pairs.emplace_back(r, l);
  if (pairs.empty()) throw ValidationError("label matrix has no positives");

  std::vector<char> positive(n_doc, 0);
  std::vector<double> grad(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_inplace(pairs, rng);
    for (const auto& [row, pos] : pairs) {
      const auto& xp = x_patients.rows[row];
      const std::vector<double> rp = m.represent(xp);
      const std::vector<double> rpos = m.represent(x_doctors.rows[pos]);
      double s_pos = m.doctor_bias[pos];
      for (std::size_t j = 0; j < d; ++j) s_pos += rp[j] * rpos[j];

      for (std::uint32_t l : labels.rows[row]) positive[l] = 1;
      std::uint32_t neg = n_doc;
      double s_neg = 0.0;
      int trials = 0;
      std::vector<double> rneg;
      while (trials < cfg.max_sampled) {
        ++trials;
        const std::uint32_t cand =
            static_cast<std::uint32_t>(rand_index(rng, n_doc));
        if (positive[cand]) continue;
        rneg = m.represent(x_doctors.rows[cand]);
        double s = m.doctor_bias[cand];
        for (std::size_t j = 0; j < d; ++j) s += rp[j] * rneg[j];
        if (s > s_pos - 1.0) {  // margin violated
          neg = cand;
          s_neg = s;
          break;
        }
      }
      for (std::uint32_t l : labels.rows[row]) positive[l] = 0;
      if (neg >= n_doc) continue;

      // WARP weight from the estimated rank of the positive.
      const double rank_est =
          std::floor(static_cast<double>(n_doc - 1) / trials);
      const double w = std::log(rank_est + 1.0);
      if (w <= 0.0 || s_neg <= s_pos - 1.0) continue;
      const double lr = cfg.learning_rate * w;

      // d(hinge)/d(feature row i) pulls the patient toward the positive
      // doctor and the doctors along the patient representation.
      for (std::size_t j = 0; j < d; ++j) grad[j] = rpos[j] - rneg[j];
      for (const auto& [idx, v] : xp.entries)
        for (std::size_t j = 0; j < d; ++j)
          m.feature_factors[idx * d + j] += lr * v * grad[j];
      for (const auto& [idx, v] : x_doctors.rows[pos].entries)
        for (std::size_t j = 0; j < d; ++j)
          m.feature_factors[idx * d + j] += lr * v * rp[j];
      for (const auto& [idx, v] : x_doctors.rows[neg].entries)
        for (std::size_t j = 0; j < d; ++j)
          m.feature_factors[idx * d + j] -= lr * v * rp[j];
      m.doctor_bias[pos] += lr;
      m.doctor_bias[neg] -= lr;
    }
  }

  m.doctor_repr.resize(static_cast<std::size_t>(n_doc) * d);
  for (std::uint32_t l = 0; l < n_doc; ++l) {
    const auto r = m.represent(x_doctors.rows[l]);
    std::copy(r.begin(), r.end(), &m.doctor_repr[static_cast<std::size_t>(l) * d]);
  }
  return m;
}

RankedPrediction hybrid_mf_topk(const HybridMfModel& model, const SparseVector& x,
                                int k) {
  const std::size_t d = static_cast<std::size_t>(model.dim);
  const std::vector<double> rp = model.represent(x);
  std::vector<double> scores(model.doctor_bias.size());
  for (std::uint32_t l = 0; l < scores.size(); ++l) {
    double s = model.doctor_bias[l];
    const double* v = &model.doctor_repr[static_cast<std::size_t>(l) * d];
    for (std::size_t j = 0; j < d; ++j) s += rp[j] * v[j];
    scores[l] = s;
  }
  return rank_topk(std::move(scores), k);
}

namespace {

constexpr std::uint32_t kBaselineMagic = 0x4D425252;  // "RRBM"

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
std::vector<double> read_doubles(std::ifstream& in) {
  std::uint64_t n = 0;
  read_pod(in, n);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

std::ofstream open_model_out(const std::string& path, std::uint8_t type) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  write_pod(out, kBaselineMagic);
  write_pod(out, type);
  return out;
}

std::ifstream open_model_in(const std::string& path, std::uint8_t type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::uint32_t magic = 0;
  std::uint8_t t = 0;
  read_pod(in, magic);
  read_pod(in, t);
  if (magic != kBaselineMagic || t != type)
    throw ValidationError(path + ": wrong model file type");
  return in;
}

}  // namespace

void save_popularity_model(const PopularityModel& m, const std::string& path) {
  auto out = open_model_out(path, 1);
  write_pod(out, static_cast<std::uint64_t>(m.counts.size()));
  out.write(reinterpret_cast<const char*>(m.counts.data()),
            static_cast<std::streamsize>(m.counts.size() * sizeof(std::uint64_t)));
  if (!out) throw ValidationError("write failed: " + path);
}

PopularityModel load_popularity_model(const std::string& path) {
  auto in = open_model_in(path, 1);
  std::uint64_t n = 0;
  read_pod(in, n);
  std::vector<std::uint64_t> counts(n);
  in.read(reinterpret_cast<char*>(counts.data()),
          static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
  if (!in) throw ValidationError(path + ": truncated model file");
  return train_popularity(counts);
}

void save_mf_model(const MfModel& m, const std::string& path) {
  auto out = open_model_out(path, 2);
  write_pod(out, static_cast<std::int32_t>(m.dim));
  write_pod(out, static_cast<std::uint64_t>(m.patient_ids.size()));
  for (const auto& id : m.patient_ids) {
    write_pod(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  write_doubles(out, m.patient_factors);
  write_doubles(out, m.doctor_factors);
  write_doubles(out, m.doctor_bias);
  if (!out) throw ValidationError("write failed: " + path);
}

MfModel load_mf_model(const std::string& path) {
  auto in = open_model_in(path, 2);
  MfModel m;
  std::int32_t dim = 0;
  read_pod(in, dim);
  m.dim = dim;
  std::uint64_t n = 0;
  read_pod(in, n);
  m.patient_ids.resize(n);
  for (auto& id : m.patient_ids) {
    std::uint32_t len = 0;
    read_pod(in, len);
    id.resize(len);
    in.read(id.data(), len);
  }
  for (std::uint32_t i = 0; i < m.patient_ids.size(); ++i)
    m.patient_row[m.patient_ids[i]] = i;
  m.patient_factors = read_doubles(in);
  m.doctor_factors = read_doubles(in);
  m.doctor_bias = read_doubles(in);
  if (!in) throw ValidationError(path + ": truncated model file");
  return m;
}

void save_hybrid_mf_model(const HybridMfModel& m, const std::string& path) {
  auto out = open_model_out(path, 3);
  write_pod(out, static_cast<std::int32_t>(m.dim));
  write_pod(out, m.n_features);
  write_doubles(out, m.feature_factors);
  write_doubles(out, m.doctor_bias);
  write_doubles(out, m.doctor_repr);
  if (!out) throw ValidationError("write failed: " + path);
}

HybridMfModel load_hybrid_mf_model(const std::string& path) {
  auto in = open_model_in(path, 3);
  HybridMfModel m;
  std::int32_t dim = 0;
  read_pod(in, dim);
  m.dim = dim;
  read_pod(in, m.n_features);
  m.feature_factors = read_doubles(in);
  m.doctor_bias = read_doubles(in);
  m.doctor_repr = read_doubles(in);
  if (!in) throw ValidationError(path + ": truncated model file");
  return m;
}

}  // namespace refrec
