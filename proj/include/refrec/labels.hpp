#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "refrec/dataset.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

// Sparse implicit ratings: entry (p, l) is the share of patient p's visits to
// doctor l within l's primary specialty, so each present entry is in (0, 1].
struct RatingMatrix {
  std::vector<std::string> patient_ids;  // active patients, table order
  std::uint32_t n_doctors = 0;           // columns follow the doctor table
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
};

struct LabelMatrix {
  std::vector<std::string> patient_ids;
  std::uint32_t n_doctors = 0;
  double r_min = 0.0;  // provenance
  std::vector<std::vector<std::uint32_t>> rows;  // ascending label indices

  std::size_t n_rows() const { return rows.size(); }
  // Per-label row counts, the frequency input for propensity fitting.
  std::vector<std::uint64_t> label_counts() const;
};

RatingMatrix build_ratings(const ConsultationDataset& data);
LabelMatrix threshold_labels(const RatingMatrix& ratings, double r_min);

SparseMatrix rating_matrix_to_sparse(const RatingMatrix& m);
SparseMatrix label_matrix_to_sparse(const LabelMatrix& m);
RatingMatrix rating_matrix_from_sparse(const SparseMatrix& m,
                                       std::vector<std::string> patient_ids);
LabelMatrix label_matrix_from_sparse(const SparseMatrix& m,
                                     std::vector<std::string> patient_ids,
                                     double r_min);

}  // namespace refrec
