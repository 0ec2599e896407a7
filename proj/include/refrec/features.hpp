#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "refrec/dataset.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

enum class Scenario { S1, S2, S3, S4, S5 };
enum class HospitalEncoding { None, Visits, Distances };

Scenario parse_scenario(const std::string& s);
const char* scenario_name(Scenario s);
const char* hospital_encoding_name(HospitalEncoding e);

struct ScenarioConfig {
  Scenario scenario = Scenario::S1;
  HospitalEncoding patient_hospital = HospitalEncoding::None;

  bool patient_specialty_block() const {
    return scenario == Scenario::S2 || scenario == Scenario::S5;
  }
  bool doctor_specialty_block() const { return patient_specialty_block(); }
  bool doctor_hospital_block() const {
    return scenario == Scenario::S3 || scenario == Scenario::S4 ||
           scenario == Scenario::S5;
  }
};

// The canonical encoding implied by the scenario: S1/S2 mask the hospital
// block, S3 uses visit fractions, S4/S5 use inverse distances.
ScenarioConfig make_scenario_config(Scenario s);
// Validates an explicitly requested patient encoding against the scenario.
ScenarioConfig make_scenario_config(Scenario s, HospitalEncoding requested);

// The shared space both roles are encoded into: three baseline coordinates,
// then education, specialty and hospital blocks. Dimensions and normalizers
// come from the train partition only.
struct FeatureSpace {
  static constexpr std::uint32_t kBaselineDim = 3;

  std::vector<std::string> institutions;  // sorted ids seen in train
  std::vector<std::string> specialties;   // sorted ids from the doctor table
  std::vector<std::string> hospitals;     // sorted ids from the hospital table
  std::vector<std::pair<double, double>> hospital_locations;  // aligned

  std::unordered_map<std::string, std::uint32_t> institution_idx;
  std::unordered_map<std::string, std::uint32_t> specialty_idx;
  std::unordered_map<std::string, std::uint32_t> hospital_idx;

  double max_patient_age = 0.0;
  double max_doctor_age = 0.0;
  double max_patient_occurrences = 0.0;
  double max_doctor_occurrences = 0.0;

  std::uint32_t education_offset() const { return kBaselineDim; }
  std::uint32_t specialty_offset() const {
    return education_offset() + static_cast<std::uint32_t>(institutions.size());
  }
  std::uint32_t hospital_offset() const {
    return specialty_offset() + static_cast<std::uint32_t>(specialties.size());
  }
  std::uint32_t dim() const {
    return hospital_offset() + static_cast<std::uint32_t>(hospitals.size());
  }
};

// Per-subject counts accumulated over train interactions.
struct TrainStats {
  std::unordered_map<std::string, std::uint64_t> patient_occurrences;
  std::unordered_map<std::string, std::uint64_t> doctor_occurrences;
  // patient -> specialty id -> visits to doctors holding that specialty
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>>
      patient_specialty_visits;
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>>
      patient_hospital_visits;
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>>
      doctor_hospital_visits;
};

FeatureSpace build_feature_space(const ConsultationDataset& train);
TrainStats build_train_stats(const ConsultationDataset& train);

SparseVector encode_doctor(const DoctorMeta& doctor, const TrainStats& stats,
                           const FeatureSpace& space, const ScenarioConfig& cfg);
SparseVector encode_patient(const PatientMeta& patient, const TrainStats& stats,
                            const FeatureSpace& space, const ScenarioConfig& cfg);

// Doctor matrix in table order (one row per label).
SparseMatrix encode_all_doctors(const ConsultationDataset& meta,
                                const TrainStats& stats,
                                const FeatureSpace& space,
                                const ScenarioConfig& cfg);
// Patient matrix for an explicit id list (row order = list order).
SparseMatrix encode_patients(const std::vector<std::string>& patient_ids,
                             const ConsultationDataset& meta,
                             const TrainStats& stats, const FeatureSpace& space,
                             const ScenarioConfig& cfg);

}  // namespace refrec
