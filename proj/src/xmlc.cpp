#include "refrec/xmlc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "refrec/errors.hpp"
#include "refrec/labels.hpp"

namespace refrec {

namespace {

constexpr double kGradClipNorm = 5.0;
constexpr double kInitScale = 0.1;
// Decouples the training stream from the clustering stream, which consumes
// a data-dependent number of draws.
constexpr std::uint64_t kTrainSeedSalt = 0x9e3779b97f4a7c15ULL;

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void add_scaled(std::vector<double>& acc, std::size_t offset,
                const double* v, std::size_t n, double scale) {
  for (std::size_t j = 0; j < n; ++j) acc[offset + j] += scale * v[j];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

}  // namespace

std::size_t LabelTree::n_leaves() const {
  std::size_t n = 0;
  for (const auto& node : nodes)
    if (node.is_leaf()) ++n;
  return n;
}

std::size_t LabelTree::max_leaf_size() const {
  std::size_t n = 0;
  for (const auto& node : nodes)
    if (node.is_leaf()) n = std::max(n, node.labels.size());
  return n;
}

Bipartition balanced_two_means(const std::vector<SparseVector>& points,
                               std::size_t dim, Rng& rng, int restarts,
                               int max_iters) {
  const std::size_t n = points.size();
  if (n < 2) throw ValidationError("balanced_two_means needs at least 2 points");

  const auto objective = [&](const std::vector<int>& side) {
    std::vector<double> centers(2 * dim, 0.0);
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[side[i]];
      for (const auto& [idx, v] : points[i].entries)
        centers[side[i] * dim + idx] += v;
    }
    for (int c = 0; c < 2; ++c) {
      const double norm = std::sqrt(dot(&centers[c * dim], &centers[c * dim], dim));
      if (norm > 0.0)
        for (std::size_t j = 0; j < dim; ++j) centers[c * dim + j] /= norm;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (const auto& [idx, v] : points[i].entries)
        s += centers[side[i] * dim + idx] * v;
      total += s;
    }
    return total / static_cast<double>(n);
  };

  Bipartition best;
  best.mean_cosine = -2.0;
  std::vector<double> centers(2 * dim);
  std::vector<std::pair<double, std::uint32_t>> order(n);
  std::vector<int> side(n, 0);

  for (int r = 0; r < restarts; ++r) {
    std::size_t c0 = rand_index(rng, n);
    std::size_t c1 = c0;
    while (c1 == c0) c1 = rand_index(rng, n);
    std::fill(centers.begin(), centers.end(), 0.0);
    for (const auto& [idx, v] : points[c0].entries) centers[idx] = v;
    for (const auto& [idx, v] : points[c1].entries) centers[dim + idx] = v;

    double prev = -1e30;
    for (int iter = 0; iter < max_iters; ++iter) {
      double assigned_sim = 0.0;
      for (std::uint32_t i = 0; i < n; ++i) {
        double s0 = 0.0, s1 = 0.0;
        for (const auto& [idx, v] : points[i].entries) {
          s0 += centers[idx] * v;
          s1 += centers[dim + idx] * v;
        }
        order[i] = {s1 - s0, i};
      }
      // Most center-0-like points first; ties by index for determinism.
      std::sort(order.begin(), order.end());
      for (std::size_t i = 0; i < n; ++i)
        side[order[i].second] = i < n / 2 ? 0 : 1;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& [idx, v] : points[i].entries)
          s += centers[side[i] * dim + idx] * v;
        assigned_sim += s;
      }
      assigned_sim /= static_cast<double>(n);
      if (assigned_sim - prev < 1e-9) break;
      prev = assigned_sim;

      std::fill(centers.begin(), centers.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (const auto& [idx, v] : points[i].entries)
          centers[side[i] * dim + idx] += v;
      for (int c = 0; c < 2; ++c) {
        const double norm =
            std::sqrt(dot(&centers[c * dim], &centers[c * dim], dim));
        if (norm > 0.0)
          for (std::size_t j = 0; j < dim; ++j) centers[c * dim + j] /= norm;
      }
    }
    const double obj = objective(side);
    if (obj > best.mean_cosine) {
      best.mean_cosine = obj;
      best.side = side;
    }
  }
  return best;
}

LabelTree cluster_labels(const std::vector<SparseVector>& label_reps,
                         std::size_t dim, int b_factors, std::uint64_t seed) {
  if (label_reps.empty()) throw ValidationError("cannot cluster zero labels");
  Rng rng(seed);
  LabelTree tree;
  tree.leaf_of_label.assign(label_reps.size(), -1);

  LabelTreeNode root;
  root.labels.resize(label_reps.size());
  for (std::uint32_t l = 0; l < label_reps.size(); ++l) root.labels[l] = l;
  tree.nodes.push_back(std::move(root));

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    auto labels = std::move(tree.nodes[id].labels);
    tree.nodes[id].labels.clear();
    const std::int32_t depth = tree.nodes[id].depth;

    if (labels.size() < 2 || depth >= b_factors) {
      tree.nodes[id].labels = std::move(labels);
      for (std::uint32_t l : tree.nodes[id].labels) tree.leaf_of_label[l] = id;
      continue;
    }
    std::vector<SparseVector> pts;
    pts.reserve(labels.size());
    for (std::uint32_t l : labels) pts.push_back(label_reps[l]);
    const Bipartition part = balanced_two_means(pts, dim, rng);

    LabelTreeNode left, right;
    left.parent = right.parent = id;
    left.depth = right.depth = depth + 1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      (part.side[i] == 0 ? left : right).labels.push_back(labels[i]);

    const std::int32_t left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(std::move(left));
    const std::int32_t right_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(std::move(right));
    tree.nodes[id].left = left_id;
    tree.nodes[id].right = right_id;
    stack.push_back(right_id);
    stack.push_back(left_id);
  }
  return tree;
}

std::vector<SparseVector> build_label_representations(const SparseMatrix& x_doctors,
                                                      const SparseMatrix& x_patients,
                                                      const LabelMatrix& labels) {
  const std::size_t n_labels = x_doctors.n_rows();
  std::vector<SparseVector> reps(n_labels);
  std::vector<std::vector<double>> centroid;
  std::vector<std::size_t> counts(n_labels, 0);
  std::vector<std::size_t> needs_centroid;
  for (std::uint32_t l = 0; l < n_labels; ++l) {
    if (!x_doctors.rows[l].empty())
      reps[l] = x_doctors.rows[l].unit_normalized();
    else
      needs_centroid.push_back(l);
  }
  if (!needs_centroid.empty()) {
    centroid.assign(n_labels, {});
    for (std::size_t r = 0; r < labels.rows.size(); ++r) {
      for (std::uint32_t l : labels.rows[r]) {
        if (x_doctors.rows[l].empty()) {
          if (centroid[l].empty()) centroid[l].assign(x_doctors.n_cols, 0.0);
          for (const auto& [idx, v] : x_patients.rows[r].entries)
            centroid[l][idx] += v;
          ++counts[l];
        }
      }
    }
    for (std::uint32_t l : needs_centroid) {
      if (counts[l] == 0) continue;  // stays a zero vector
      SparseVector v;
      for (std::uint32_t i = 0; i < centroid[l].size(); ++i)
        v.push(i, centroid[l][i] / static_cast<double>(counts[l]));
      reps[l] = v.unit_normalized();
    }
  }
  return reps;
}

std::vector<double> XmlModel::embed(const SparseVector& x) const {
  const std::size_t d = static_cast<std::size_t>(config.embedding_dim);
  std::vector<double> e(d, 0.0);
  for (const auto& [idx, v] : x.entries)
    add_scaled(e, 0, &embedding[idx * d], d, v);
  for (double& c : e) c = std::max(c, 0.0);
  return e;
}

namespace {

// Pre-activation embedding plus the relu mask used to route gradients.
void embed_with_mask(const XmlModel& model, const SparseVector& x,
                     std::vector<double>& e, std::vector<char>& mask) {
  const std::size_t d = static_cast<std::size_t>(model.config.embedding_dim);
  e.assign(d, 0.0);
  for (const auto& [idx, v] : x.entries)
    add_scaled(e, 0, &model.embedding[idx * d], d, v);
  mask.assign(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    mask[j] = e[j] > 0.0;
    e[j] = std::max(e[j], 0.0);
  }
}

void refresh_label_embeddings(XmlModel& model, const SparseMatrix& x_doctors) {
  const std::size_t d = static_cast<std::size_t>(model.config.embedding_dim);
  for (std::uint32_t l = 0; l < model.n_labels; ++l) {
    double* out = &model.label_embedding[l * d];
    std::fill(out, out + d, 0.0);
    if (model.gate_locked[l]) continue;
    for (const auto& [idx, v] : x_doctors.rows[l].entries)
      for (std::size_t j = 0; j < d; ++j)
        out[j] += v * model.embedding[idx * d + j];
    for (std::size_t j = 0; j < d; ++j) out[j] = std::max(out[j], 0.0);
    const double norm = std::sqrt(dot(out, out, d));
    if (norm > 1e-12)
      for (std::size_t j = 0; j < d; ++j) out[j] /= norm;
    else
      std::fill(out, out + d, 0.0);
  }
}

void compose_classifier(XmlModel& model, std::uint32_t l, double* w) {
  const std::size_t d = static_cast<std::size_t>(model.config.embedding_dim);
  const double* z = &model.refinement[l * d];
  if (model.gate_locked[l]) {
    std::copy(z, z + d, w);
    return;
  }
  const double g = stable_sigmoid(model.gate[l]);
  const double* eh = &model.label_embedding[l * d];
  for (std::size_t j = 0; j < d; ++j) w[j] = g * eh[j] + (1.0 - g) * z[j];
}

void compose_all_classifiers(XmlModel& model) {
  const std::size_t d = static_cast<std::size_t>(model.config.embedding_dim);
  for (std::uint32_t l = 0; l < model.n_labels; ++l)
    compose_classifier(model, l, &model.classifier[l * d]);
}

// Scatters the point-embedding gradient back into the feature map rows.
void backprop_embedding(const SparseVector& x, const std::vector<char>& mask,
                        const std::vector<double>& grad_e,
                        std::vector<double>& grad_embedding, std::size_t d) {
  for (const auto& [idx, v] : x.entries)
    for (std::size_t j = 0; j < d; ++j)
      if (mask[j]) grad_embedding[idx * d + j] += v * grad_e[j];
}

void clip_and_apply(std::vector<std::pair<std::vector<double>*,
                                          std::vector<double>*>> params,
                    double lr, double inv_batch) {
  double sq = 0.0;
  for (auto& [p, g] : params)
    for (double v : *g) sq += (v * inv_batch) * (v * inv_batch);
  double scale = inv_batch;
  const double norm = std::sqrt(sq);
  if (norm > kGradClipNorm) scale *= kGradClipNorm / norm;
  for (auto& [p, g] : params) {
    for (std::size_t i = 0; i < p->size(); ++i) (*p)[i] -= lr * scale * (*g)[i];
    std::fill(g->begin(), g->end(), 0.0);
  }
}

}  // namespace

XmlModel train_xml(const SparseMatrix& x_patients, const SparseMatrix& x_doctors,
                   const LabelMatrix& labels, const XmlTrainConfig& config) {
  if (x_patients.n_cols != x_doctors.n_cols)
    throw ValidationError("patient and doctor features must share one space");
  if (x_patients.n_rows() != labels.rows.size())
    throw ValidationError("patient feature rows do not match label rows");
  if (x_doctors.n_rows() != labels.n_doctors)
    throw ValidationError("doctor feature rows do not match the label universe");
  std::size_t n_positives = 0;
  for (const auto& row : labels.rows) n_positives += row.size();
  if (n_positives == 0) throw ValidationError("label matrix has no positives");
  if (config.embedding_dim < 1 || config.b_factors < 0 || config.beam < 1 ||
      config.batch_size < 1 || config.top_b < 1)
    throw ValidationError("invalid training configuration");

  const std::size_t d = static_cast<std::size_t>(config.embedding_dim);
  const std::size_t n_points = x_patients.n_rows();

  XmlModel model;
  model.n_features = x_patients.n_cols;
  model.n_labels = static_cast<std::uint32_t>(x_doctors.n_rows());
  model.config = config;

  const auto reps = build_label_representations(x_doctors, x_patients, labels);
  model.tree = cluster_labels(reps, model.n_features, config.b_factors, config.seed);

  Rng rng(config.seed ^ kTrainSeedSalt);
  model.embedding.resize(model.n_features * d);
  for (double& v : model.embedding) v = rand_range(rng, -kInitScale, kInitScale);
  for (auto& node : model.tree.nodes) {
    node.scorer.resize(d);
    for (double& v : node.scorer) v = rand_range(rng, -kInitScale, kInitScale);
  }
  model.gate.assign(model.n_labels, 0.0);
  model.gate_locked.resize(model.n_labels);
  for (std::uint32_t l = 0; l < model.n_labels; ++l)
    model.gate_locked[l] = x_doctors.rows[l].empty();
  model.refinement.assign(model.n_labels * d, 0.0);
  model.label_embedding.assign(model.n_labels * d, 0.0);
  model.classifier.assign(model.n_labels * d, 0.0);

  std::vector<std::uint32_t> point_order(n_points);
  for (std::uint32_t i = 0; i < n_points; ++i) point_order[i] = i;

  std::vector<double> e;
  std::vector<char> mask;
  std::vector<double> grad_e(d);

  // Phase 1: embedding + tree scorers, so points route toward the leaves
  // holding their positive labels. Positive targets are the path nodes of
  // positive labels; negatives are the siblings hanging off those paths.
  const std::size_t n_nodes = model.tree.nodes.size();
  if (n_nodes > 1) {
    std::vector<double> scorers(n_nodes * d);
    for (std::size_t i = 0; i < n_nodes; ++i)
      std::copy(model.tree.nodes[i].scorer.begin(),
                model.tree.nodes[i].scorer.end(), &scorers[i * d]);
    std::vector<double> grad_scorers(n_nodes * d, 0.0);
    std::vector<double> grad_embedding(model.embedding.size(), 0.0);
    std::vector<char> node_flag(n_nodes, 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      shuffle_inplace(point_order, rng);
      std::size_t batch_fill = 0;
      for (std::size_t oi = 0; oi < n_points; ++oi) {
        const std::uint32_t p = point_order[oi];
        const auto& positives = labels.rows[p];
        if (positives.empty()) continue;

        std::vector<std::int32_t> pos_nodes, neg_nodes;
        for (std::uint32_t l : positives) {
          std::int32_t node = model.tree.leaf_of_label[l];
          while (node != 0) {
            if (!node_flag[node]) {
              node_flag[node] = 1;
              pos_nodes.push_back(node);
            }
            node = model.tree.nodes[node].parent;
          }
        }
        for (std::int32_t node : pos_nodes) {
          const auto& parent = model.tree.nodes[model.tree.nodes[node].parent];
          const std::int32_t sib = parent.left == node ? parent.right : parent.left;
          if (!node_flag[sib]) {
            node_flag[sib] = 2;
            neg_nodes.push_back(sib);
          }
        }

        embed_with_mask(model, x_patients.rows[p], e, mask);
        std::fill(grad_e.begin(), grad_e.end(), 0.0);
        const auto touch = [&](std::int32_t node, double y) {
          const double s = dot(&scorers[node * d], e.data(), d);
          const double g = -y * stable_sigmoid(-y * s);
          add_scaled(grad_scorers, node * d, e.data(), d, g);
          add_scaled(grad_e, 0, &scorers[node * d], d, g);
        };
        for (std::int32_t node : pos_nodes) touch(node, 1.0);
        for (std::int32_t node : neg_nodes) touch(node, -1.0);
        backprop_embedding(x_patients.rows[p], mask, grad_e, grad_embedding, d);
        for (std::int32_t node : pos_nodes) node_flag[node] = 0;
        for (std::int32_t node : neg_nodes) node_flag[node] = 0;

        if (++batch_fill == static_cast<std::size_t>(config.batch_size) ||
            oi + 1 == n_points) {
          clip_and_apply({{&model.embedding, &grad_embedding},
                          {&scorers, &grad_scorers}},
                         config.learning_rate, 1.0 / batch_fill);
          batch_fill = 0;
        }
      }
    }
    for (std::size_t i = 0; i < n_nodes; ++i)
      std::copy(&scorers[i * d], &scorers[i * d] + d,
                model.tree.nodes[i].scorer.begin());
  }

  // Phase 2: routing frozen; per-label gates and refinements plus embedding
  // fine-tuning under one-vs-all logistic loss. Negatives per point are the
  // shortlisted non-positives plus uniformly drawn extras.
  {
    std::vector<double> grad_embedding(model.embedding.size(), 0.0);
    std::vector<double> grad_refinement(model.refinement.size(), 0.0);
    std::vector<double> grad_gate(model.n_labels, 0.0);
    std::vector<char> is_positive(model.n_labels, 0);
    std::vector<double> w(d);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      refresh_label_embeddings(model, x_doctors);
      shuffle_inplace(point_order, rng);
      std::size_t batch_fill = 0;
      for (std::size_t oi = 0; oi < n_points; ++oi) {
        const std::uint32_t p = point_order[oi];
        const auto& positives = labels.rows[p];
        if (positives.empty()) continue;
        for (std::uint32_t l : positives) is_positive[l] = 1;

        embed_with_mask(model, x_patients.rows[p], e, mask);
        std::vector<std::uint32_t> negatives;
        for (std::uint32_t l : shortlist(model, x_patients.rows[p]))
          if (!is_positive[l]) {
            is_positive[l] = 2;  // marks membership in the negative pool too
            negatives.push_back(l);
          }
        const std::size_t n_random =
            positives.size() * static_cast<std::size_t>(
                                   std::max(config.negatives_per_positive, 0));
        for (std::size_t t = 0, drawn = 0;
             drawn < n_random && t < 10 * n_random + 10; ++t) {
          const std::uint32_t l =
              static_cast<std::uint32_t>(rand_index(rng, model.n_labels));
          if (is_positive[l]) continue;
          is_positive[l] = 2;
          negatives.push_back(l);
          ++drawn;
        }

        std::fill(grad_e.begin(), grad_e.end(), 0.0);
        const auto touch = [&](std::uint32_t l, double y) {
          compose_classifier(model, l, w.data());
          const double s = dot(w.data(), e.data(), d);
          const double g = -y * stable_sigmoid(-y * s);
          const double* z = &model.refinement[l * d];
          if (model.gate_locked[l]) {
            add_scaled(grad_refinement, l * d, e.data(), d, g);
          } else {
            const double sig = stable_sigmoid(model.gate[l]);
            add_scaled(grad_refinement, l * d, e.data(), d, g * (1.0 - sig));
            const double* eh = &model.label_embedding[l * d];
            double gap = 0.0;
            for (std::size_t j = 0; j < d; ++j) gap += (eh[j] - z[j]) * e[j];
            grad_gate[l] += g * sig * (1.0 - sig) * gap;
          }
          add_scaled(grad_e, 0, w.data(), d, g);
        };
        for (std::uint32_t l : positives) touch(l, 1.0);
        for (std::uint32_t l : negatives) touch(l, -1.0);
        backprop_embedding(x_patients.rows[p], mask, grad_e, grad_embedding, d);

        for (std::uint32_t l : positives) is_positive[l] = 0;
        for (std::uint32_t l : negatives) is_positive[l] = 0;

        if (++batch_fill == static_cast<std::size_t>(config.batch_size) ||
            oi + 1 == n_points) {
          clip_and_apply({{&model.embedding, &grad_embedding},
                          {&model.refinement, &grad_refinement},
                          {&model.gate, &grad_gate}},
                         config.learning_rate, 1.0 / batch_fill);
          batch_fill = 0;
        }
      }
    }
  }

  refresh_label_embeddings(model, x_doctors);
  compose_all_classifiers(model);
  return model;
}

std::vector<std::uint32_t> shortlist(const XmlModel& model, const SparseVector& x) {
  const std::vector<double> e = model.embed(x);
  const std::size_t d = e.size();

  std::vector<std::int32_t> frontier{0};
  for (;;) {
    bool any_internal = false;
    for (std::int32_t id : frontier)
      if (!model.tree.nodes[id].is_leaf()) any_internal = true;
    if (!any_internal) break;

    std::vector<std::int32_t> next;
    for (std::int32_t id : frontier) {
      const auto& node = model.tree.nodes[id];
      if (node.is_leaf()) {
        next.push_back(id);
      } else {
        next.push_back(node.left);
        next.push_back(node.right);
      }
    }
    std::vector<std::pair<double, std::int32_t>> scored;
    scored.reserve(next.size());
    for (std::int32_t id : next)
      scored.emplace_back(-dot(model.tree.nodes[id].scorer.data(), e.data(), d),
                          id);
    std::sort(scored.begin(), scored.end());
    const std::size_t keep =
        std::min<std::size_t>(scored.size(), model.config.beam);
    frontier.clear();
    for (std::size_t i = 0; i < keep; ++i) frontier.push_back(scored[i].second);
  }

  std::vector<std::uint32_t> candidates;
  for (std::int32_t id : frontier)
    candidates.insert(candidates.end(), model.tree.nodes[id].labels.begin(),
                      model.tree.nodes[id].labels.end());
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

RankedPrediction predict_topk(const XmlModel& model, const SparseVector& x, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (k > model.config.top_b)
    throw ValidationError("k exceeds the configured prediction budget B");
  const std::vector<double> e = model.embed(x);
  const std::size_t d = e.size();

  RankedPrediction pred;
  for (std::uint32_t l : shortlist(model, x))
    pred.items.emplace_back(l, dot(&model.classifier[l * d], e.data(), d));
  // Candidates arrive in ascending label order, so a stable sort on the score
  // gives the documented tie-break.
  std::stable_sort(pred.items.begin(), pred.items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (pred.items.size() > static_cast<std::size_t>(k)) pred.items.resize(k);
  return pred;
}

std::vector<double> score_all_labels(const XmlModel& model, const SparseVector& x) {
  const std::vector<double> e = model.embed(x);
  const std::size_t d = e.size();
  std::vector<double> scores(model.n_labels);
  for (std::uint32_t l = 0; l < model.n_labels; ++l)
    scores[l] = dot(&model.classifier[l * d], e.data(), d);
  return scores;
}

namespace {

constexpr std::uint32_t kXmlMagic = 0x4D585252;  // "RRXM"
constexpr std::uint32_t kXmlVersion = 1;

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

}  // namespace

void save_xml_model(const XmlModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  write_pod(out, kXmlMagic);
  write_pod(out, kXmlVersion);
  write_pod(out, model.n_features);
  write_pod(out, model.n_labels);
  write_pod(out, static_cast<std::int32_t>(model.config.embedding_dim));
  write_pod(out, static_cast<std::int32_t>(model.config.b_factors));
  write_pod(out, static_cast<std::int32_t>(model.config.beam));
  write_pod(out, static_cast<std::int32_t>(model.config.epochs));
  write_pod(out, model.config.learning_rate);
  write_pod(out, static_cast<std::int32_t>(model.config.negatives_per_positive));
  write_pod(out, static_cast<std::int32_t>(model.config.batch_size));
  write_pod(out, static_cast<std::int32_t>(model.config.top_b));
  write_pod(out, model.config.seed);

  write_doubles(out, model.embedding);
  write_pod(out, static_cast<std::uint64_t>(model.tree.nodes.size()));
  for (const auto& node : model.tree.nodes) {
    write_pod(out, node.parent);
    write_pod(out, node.left);
    write_pod(out, node.right);
    write_pod(out, node.depth);
    write_pod(out, static_cast<std::uint64_t>(node.labels.size()));
    out.write(reinterpret_cast<const char*>(node.labels.data()),
              static_cast<std::streamsize>(node.labels.size() * sizeof(std::uint32_t)));
    write_doubles(out, node.scorer);
  }
  write_doubles(out, model.gate);
  out.write(reinterpret_cast<const char*>(model.gate_locked.data()),
            static_cast<std::streamsize>(model.gate_locked.size()));
  write_doubles(out, model.refinement);
  write_doubles(out, model.label_embedding);
  write_doubles(out, model.classifier);
  if (!out) throw ValidationError("write failed: " + path);
}

XmlModel load_xml_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::uint32_t magic = 0, version = 0;
  read_pod(in, magic);
  read_pod(in, version);
  if (magic != kXmlMagic || version != kXmlVersion)
    throw ValidationError(path + ": not a model file of the expected version");

  XmlModel model;
  read_pod(in, model.n_features);
  read_pod(in, model.n_labels);
  std::int32_t i32;
  read_pod(in, i32); model.config.embedding_dim = i32;
  read_pod(in, i32); model.config.b_factors = i32;
  read_pod(in, i32); model.config.beam = i32;
  read_pod(in, i32); model.config.epochs = i32;
  read_pod(in, model.config.learning_rate);
  read_pod(in, i32); model.config.negatives_per_positive = i32;
  read_pod(in, i32); model.config.batch_size = i32;
  read_pod(in, i32); model.config.top_b = i32;
  read_pod(in, model.config.seed);

  model.embedding = read_doubles(in);
  std::uint64_t n_nodes = 0;
  read_pod(in, n_nodes);
  model.tree.nodes.resize(n_nodes);
  model.tree.leaf_of_label.assign(model.n_labels, -1);
  for (std::uint64_t i = 0; i < n_nodes; ++i) {
    auto& node = model.tree.nodes[i];
    read_pod(in, node.parent);
    read_pod(in, node.left);
    read_pod(in, node.right);
    read_pod(in, node.depth);
    std::uint64_t n_labels = 0;
    read_pod(in, n_labels);
    node.labels.resize(n_labels);
    in.read(reinterpret_cast<char*>(node.labels.data()),
            static_cast<std::streamsize>(n_labels * sizeof(std::uint32_t)));
    node.scorer = read_doubles(in);
    if (node.is_leaf())
      for (std::uint32_t l : node.labels)
        model.tree.leaf_of_label[l] = static_cast<std::int32_t>(i);
  }
  model.gate = read_doubles(in);
  model.gate_locked.resize(model.n_labels);
  in.read(reinterpret_cast<char*>(model.gate_locked.data()),
          static_cast<std::streamsize>(model.gate_locked.size()));
  model.refinement = read_doubles(in);
  model.label_embedding = read_doubles(in);
  model.classifier = read_doubles(in);
  if (!in) throw ValidationError(path + ": truncated model file");
  return model;
}

}  // namespace refrec
