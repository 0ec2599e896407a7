#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refrec/random.hpp"
#include "refrec/ranking.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

struct LabelMatrix;  // labels.hpp

struct XmlTrainConfig {
  int embedding_dim = 32;
  int b_factors = 7;  // tree depth, up to 2^b leaf clusters
  int beam = 30;
  int epochs = 20;    // per training phase
  double learning_rate = 0.2;
  int negatives_per_positive = 2;
  int batch_size = 20;
  int top_b = 30;     // stored predictions per patient
  std::uint64_t seed = 0;
};

struct LabelTreeNode {
  std::int32_t parent = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t depth = 0;
  std::vector<std::uint32_t> labels;  // leaves only
  std::vector<double> scorer;         // routing weights in embedding space

  bool is_leaf() const { return left < 0; }
};

struct LabelTree {
  std::vector<LabelTreeNode> nodes;  // nodes[0] is the root
  std::vector<std::int32_t> leaf_of_label;

  std::size_t n_leaves() const;
  std::size_t max_leaf_size() const;
};

// Balanced 2-means bipartition of unit-ish vectors; restarts keep the best
// mean-cosine objective. Deterministic per rng state.
struct Bipartition {
  std::vector<int> side;  // 0/1 per point, halves differ by at most one
  double mean_cosine = 0.0;
};
Bipartition balanced_two_means(const std::vector<SparseVector>& points,
                               std::size_t dim, Rng& rng, int restarts = 4,
                               int max_iters = 50);

// Recursive balanced splits to depth b_factors; nodes with a single label
// stop early, so leaf sizes never differ by more than one within a split.
LabelTree cluster_labels(const std::vector<SparseVector>& label_reps,
                         std::size_t dim, int b_factors, std::uint64_t seed);

// Unit-normalized label feature vectors; labels with an all-zero feature row
// fall back to the (unit-normalized) centroid of their positive points.
std::vector<SparseVector> build_label_representations(const SparseMatrix& x_doctors,
                                                      const SparseMatrix& x_patients,
                                                      const LabelMatrix& labels);

// Linear analog of an embedding-plus-shortlister extreme classifier: a shared
// feature-to-embedding map with a relu nonlinearity, per-node routing scorers
// over a balanced label tree, and per-label classifiers that gate between the
// unit-normalized embedded label features and a free refinement vector.
struct XmlModel {
  std::uint32_t n_features = 0;
  std::uint32_t n_labels = 0;
  XmlTrainConfig config;
  std::vector<double> embedding;         // n_features x dim, row-major
  LabelTree tree;
  std::vector<double> gate;              // a_l (pre-sigmoid), per label
  std::vector<char> gate_locked;         // label feature vector was empty
  std::vector<double> refinement;        // n_labels x dim
  std::vector<double> label_embedding;   // unit E(x^d_l), n_labels x dim
  std::vector<double> classifier;        // composed w_l, n_labels x dim

  std::vector<double> embed(const SparseVector& x) const;
};

XmlModel train_xml(const SparseMatrix& x_patients, const SparseMatrix& x_doctors,
                   const LabelMatrix& labels, const XmlTrainConfig& config);

// Beam search down the tree keeping the `beam` best nodes per level; returns
// the union of labels in the surviving leaves, ascending.
std::vector<std::uint32_t> shortlist(const XmlModel& model, const SparseVector& x);

RankedPrediction predict_topk(const XmlModel& model, const SparseVector& x, int k);

// Every label scored, bypassing the shortlister (oracle route for tests).
std::vector<double> score_all_labels(const XmlModel& model, const SparseVector& x);

void save_xml_model(const XmlModel& model, const std::string& path);
XmlModel load_xml_model(const std::string& path);

}  // namespace refrec
