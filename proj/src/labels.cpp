#include "refrec/labels.hpp"

#include <algorithm>
#include <map>

#include "refrec/errors.hpp"

namespace refrec {

RatingMatrix build_ratings(const ConsultationDataset& data) {
  for (const auto& d : data.doctors)
    if (d.specialties.empty())
      throw ValidationError("doctor '" + d.doctor_id + "' has no specialty");

  RatingMatrix m;
  m.n_doctors = static_cast<std::uint32_t>(data.doctors.size());

  // Visit counts per (patient row, doctor), patients in table order.
  std::vector<std::map<std::uint32_t, std::uint64_t>> counts(data.patients.size());
  for (const auto& it : data.interactions)
    ++counts[data.patient_index.at(it.patient_id)]
            [data.doctor_index.at(it.doctor_id)];

  for (std::size_t p = 0; p < data.patients.size(); ++p) {
    if (counts[p].empty()) continue;
    // n_ps per primary specialty of the visited doctors.
    std::map<std::string, std::uint64_t> per_specialty;
    for (const auto& [d, n] : counts[p])
      per_specialty[data.doctors[d].specialties.front()] += n;

    m.patient_ids.push_back(data.patients[p].patient_id);
    auto& row = m.rows.emplace_back();
    for (const auto& [d, n] : counts[p]) {
      const auto& spec = data.doctors[d].specialties.front();
      row.emplace_back(d, static_cast<double>(n) /
                              static_cast<double>(per_specialty.at(spec)));
    }
  }
  return m;
}

LabelMatrix threshold_labels(const RatingMatrix& ratings, double r_min) {
  if (r_min < 0.0 || r_min >= 1.0)
    throw ValidationError("r_min must be in [0, 1)");
  LabelMatrix out;
  out.patient_ids = ratings.patient_ids;
  out.n_doctors = ratings.n_doctors;
  out.r_min = r_min;
  out.rows.reserve(ratings.rows.size());
  for (const auto& row : ratings.rows) {
    auto& labels = out.rows.emplace_back();
    for (const auto& [d, r] : row)
      if (r > r_min) labels.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> LabelMatrix::label_counts() const {
  std::vector<std::uint64_t> counts(n_doctors, 0);
  for (const auto& row : rows)
    for (std::uint32_t l : row) ++counts[l];
  return counts;
}

SparseMatrix rating_matrix_to_sparse(const RatingMatrix& m) {
  SparseMatrix out;
  out.n_cols = m.n_doctors;
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    auto& r = out.rows.emplace_back();
    r.entries = row;
  }
  return out;
}

SparseMatrix label_matrix_to_sparse(const LabelMatrix& m) {
  SparseMatrix out;
  out.n_cols = m.n_doctors;
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    auto& r = out.rows.emplace_back();
    for (std::uint32_t l : row) r.entries.emplace_back(l, 1.0);
  }
  return out;
}

RatingMatrix rating_matrix_from_sparse(const SparseMatrix& m,
                                       std::vector<std::string> patient_ids) {
  if (patient_ids.size() != m.n_rows())
    throw ValidationError("rating matrix rows do not match the id manifest");
  RatingMatrix out;
  out.n_doctors = m.n_cols;
  out.patient_ids = std::move(patient_ids);
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) out.rows.push_back(row.entries);
  return out;
}

LabelMatrix label_matrix_from_sparse(const SparseMatrix& m,
                                     std::vector<std::string> patient_ids,
                                     double r_min) {
  if (patient_ids.size() != m.n_rows())
    throw ValidationError("label matrix rows do not match the id manifest");
  LabelMatrix out;
  out.n_doctors = m.n_cols;
  out.r_min = r_min;
  out.patient_ids = std::move(patient_ids);
  out.rows.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    auto& labels = out.rows.emplace_back();
    for (const auto& [i, v] : row.entries)
      if (v != 0.0) labels.push_back(i);
  }
  return out;
}

}  // namespace refrec
