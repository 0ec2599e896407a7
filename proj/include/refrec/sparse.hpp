#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace refrec {

// One sparse row: (index, value) pairs with strictly increasing indices.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  void push(std::uint32_t idx, double value) {
    if (value != 0.0) entries.emplace_back(idx, value);
  }
  std::size_t nnz() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  double dot_dense(const std::vector<double>& dense) const {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += dense[i] * v;
    return s;
  }
  double l2_norm() const;
  // Returns a copy scaled so the l2 norm is 1; zero vectors stay zero.
  SparseVector unit_normalized() const;
};

struct SparseMatrix {
  std::uint32_t n_cols = 0;
  std::vector<SparseVector> rows;

  std::size_t n_rows() const { return rows.size(); }
};

// Shortest round-trip decimal representation (std::to_chars), so identical
// doubles always serialize to identical bytes.
std::string format_double(double v);

// Text format: first line "n_rows n_cols", then one row per line of
// space-separated "index:value" pairs (empty line for an empty row).
void write_sparse_matrix(const std::string& path, const SparseMatrix& m);
SparseMatrix read_sparse_matrix(const std::string& path);

// Sidecar manifest mapping matrix rows to ids, one id per line.
void write_id_manifest(const std::string& path,
                       const std::vector<std::string>& ids);
std::vector<std::string> read_id_manifest(const std::string& path);

}  // namespace refrec
