#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace refrec {

// A ranked shortlist of doctors for one patient: scores non-increasing, ties
// broken by ascending label index.
struct RankedPrediction {
  std::string patient_id;
  std::vector<std::pair<std::uint32_t, double>> items;  // (label, score)
};

// Order-preserving subsequence of the prediction restricted to labels with a
// true mask entry; may be empty.
RankedPrediction filter_prediction(const RankedPrediction& pred,
                                   const std::vector<char>& label_mask);

// Mask of labels holding the given specialty; throws on an unknown index.
std::vector<char> make_specialty_mask(
    const std::vector<std::vector<std::uint32_t>>& doctor_specialties,
    std::uint32_t specialty, std::size_t n_specialties);

// One line per patient: "patient_id doctor_id:score ...", scores descending.
void write_predictions(const std::string& path,
                       const std::vector<RankedPrediction>& preds,
                       const std::vector<std::string>& doctor_ids);
std::vector<RankedPrediction> read_predictions(
    const std::string& path,
    const std::unordered_map<std::string, std::uint32_t>& doctor_index);

}  // namespace refrec
