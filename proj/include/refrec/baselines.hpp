#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "refrec/labels.hpp"
#include "refrec/ranking.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

// Control baseline: doctors ranked by train visit count, ties by index.
struct PopularityModel {
  std::vector<std::uint64_t> counts;      // per doctor
  std::vector<std::uint32_t> ranking;     // count desc, index asc
};

PopularityModel train_popularity(const std::vector<std::uint64_t>& doctor_counts);
RankedPrediction popularity_topk(const PopularityModel& model, int k);
RankedPrediction popularity_topk_specialty(const PopularityModel& model,
                                           const std::vector<char>& mask, int k);

struct MfConfig {
  int dim = 32;
  int epochs = 40;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

// Pairwise-ranking matrix factorization over the rating-matrix support.
// Patients unseen in training have no latent vector and get empty rankings.
struct MfModel {
  int dim = 32;
  std::vector<std::string> patient_ids;
  std::unordered_map<std::string, std::uint32_t> patient_row;
  std::vector<double> patient_factors;  // |patients| x dim
  std::vector<double> doctor_factors;   // L x dim
  std::vector<double> doctor_bias;      // L
};

MfModel train_mf(const RatingMatrix& ratings, const MfConfig& cfg);
RankedPrediction mf_topk(const MfModel& model, const std::string& patient_id, int k);

struct HybridMfConfig {
  int dim = 32;
  int epochs = 40;
  double learning_rate = 0.05;
  int max_sampled = 10;  // negative draws per positive before giving up
  std::uint64_t seed = 0;
};

// WARP-trained factorization over the shared feature space: one latent vector
// per feature coordinate, subject representation = feature-weighted sum,
// plus a per-doctor bias. Consumes the exact feature matrices the extreme
// classifier trains on.
struct HybridMfModel {
  int dim = 32;
  std::uint32_t n_features = 0;
  std::vector<double> feature_factors;  // N x dim
  std::vector<double> doctor_bias;      // L
  std::vector<double> doctor_repr;      // L x dim, from the doctor features

  std::vector<double> represent(const SparseVector& x) const;
};

HybridMfModel train_hybrid_mf(const SparseMatrix& x_patients,
                              const SparseMatrix& x_doctors,
                              const LabelMatrix& labels,
                              const HybridMfConfig& cfg);
RankedPrediction hybrid_mf_topk(const HybridMfModel& model, const SparseVector& x,
                                int k);

void save_popularity_model(const PopularityModel& m, const std::string& path);
PopularityModel load_popularity_model(const std::string& path);
void save_mf_model(const MfModel& m, const std::string& path);
MfModel load_mf_model(const std::string& path);
void save_hybrid_mf_model(const HybridMfModel& m, const std::string& path);
HybridMfModel load_hybrid_mf_model(const std::string& path);

}  // namespace refrec
