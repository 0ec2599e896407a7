#include "refrec/sparse.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "refrec/errors.hpp"

namespace refrec {

double SparseVector::l2_norm() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * v;
  return std::sqrt(s);
}

SparseVector SparseVector::unit_normalized() const {
  SparseVector out = *this;
  const double n = l2_norm();
  if (n > 0.0)
    for (auto& [i, v] : out.entries) v /= n;
  return out;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sparse_matrix(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << m.n_rows() << ' ' << m.n_cols << '\n';
  for (const auto& row : m.rows) {
    bool first = true;
    for (const auto& [i, v] : row.entries) {
      if (!first) out << ' ';
      out << i << ':' << format_double(v);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
}

SparseMatrix read_sparse_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": missing header line");
  std::istringstream header(line);
  std::size_t n_rows = 0;
  SparseMatrix m;
  if (!(header >> n_rows >> m.n_cols))
    throw ValidationError(path + ": bad header '" + line + "'");
  m.rows.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!std::getline(in, line))
      throw ValidationError(path + ": truncated at row " + std::to_string(r));
    const char* p = line.data();
    const char* end = p + line.size();
    std::uint32_t prev = 0;
    bool any = false;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      std::uint32_t idx = 0;
      auto rc = std::from_chars(p, end, idx);
      if (rc.ec != std::errc() || rc.ptr == end || *rc.ptr != ':')
        throw ValidationError(path + ": bad entry in row " + std::to_string(r));
      double val = 0.0;
      auto rv = std::from_chars(rc.ptr + 1, end, val);
      if (rv.ec != std::errc())
        throw ValidationError(path + ": bad value in row " + std::to_string(r));
      p = rv.ptr;
      if (idx >= m.n_cols || (any && idx <= prev))
        throw ValidationError(path + ": index out of order in row " +
                              std::to_string(r));
      m.rows[r].entries.emplace_back(idx, val);
      prev = idx;
      any = true;
    }
  }
  return m;
}

void write_id_manifest(const std::string& path,
                       const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

std::vector<std::string> read_id_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace refrec
