#include "refrec/ranking.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "refrec/errors.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

RankedPrediction filter_prediction(const RankedPrediction& pred,
                                   const std::vector<char>& label_mask) {
  RankedPrediction out;
  out.patient_id = pred.patient_id;
  for (const auto& item : pred.items)
    if (item.first < label_mask.size() && label_mask[item.first])
      out.items.push_back(item);
  return out;
}

std::vector<char> make_specialty_mask(
    const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
    std::uint32_t specialty, std::size_t n_specialties) {
  if (specialty >= n_specialties)
    throw ValidationError("unknown specialty index " + std::to_string(specialty));
  std::vector<char> mask(doctor_specialties.size(), 0);
  for (std::size_t d = 0; d < doctor_specialties.size(); ++d)
    for (std::uint32_t s : doctor_specialties[d])
      if (s == specialty) mask[d] = 1;
  return mask;
}

void write_predictions(const std::string& path,
                       const std::vector<RankedPrediction>& preds,
                       const std::vector<std::string>& doctor_ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (const auto& p : preds) {
    out << p.patient_id;
    for (const auto& [label, score] : p.items)
      out << ' ' << doctor_ids.at(label) << ':' << format_double(score);
    out << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
}

std::vector<RankedPrediction> read_predictions(
    const std::string& path,
    const std::unordered_map<std::string, std::uint32_t>& doctor_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::vector<RankedPrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    RankedPrediction pred;
    ss >> pred.patient_id;
    std::string tok;
    while (ss >> tok) {
      const auto colon = tok.rfind(':');
      if (colon == std::string::npos)
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": bad prediction token '" + tok + "'");
      const std::string id = tok.substr(0, colon);
      auto it = doctor_index.find(id);
      if (it == doctor_index.end())
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": unknown doctor_id '" + id + "'");
      double score = 0.0;
      const char* b = tok.data() + colon + 1;
      auto rc = std::from_chars(b, tok.data() + tok.size(), score);
      if (rc.ec != std::errc())
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": bad score in '" + tok + "'");
      pred.items.emplace_back(it->second, score);
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace refrec
