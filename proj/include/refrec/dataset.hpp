#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <unordered_map>
#include <vector>

namespace refrec {

struct Interaction {
  std::string patient_id;
  std::string doctor_id;
  std::string hospital_id;
  std::int64_t timestamp = 0;  // epoch seconds, > 0
};

struct PatientMeta {
  std::string patient_id;
  int sex = 0;  // binary category, 1 = female in generated data
  int age = 0;
  bool has_location = false;
  double loc_x = 0.0, loc_y = 0.0;  // planar km
};

struct DoctorMeta {
  std::string doctor_id;
  int sex = 0;
  int age = 0;
  std::vector<std::string> specialties;    // non-empty; front() is primary
  std::vector<std::string> institutions;   // may be empty
};

struct HospitalMeta {
  std::string hospital_id;
  double loc_x = 0.0, loc_y = 0.0;
};

struct ConsultationDataset {
  std::vector<Interaction> interactions;
  std::vector<PatientMeta> patients;
  std::vector<DoctorMeta> doctors;
  std::vector<HospitalMeta> hospitals;

  std::unordered_map<std::string, std::uint32_t> patient_index;
  std::unordered_map<std::string, std::uint32_t> doctor_index;
  std::unordered_map<std::string, std::uint32_t> hospital_index;

  std::size_t n_patients() const { return patients.size(); }
  std::size_t n_doctors() const { return doctors.size(); }

  // Rebuilds the id -> table-row maps; throws ValidationError on duplicates.
  void build_index();
};

struct LoadOptions {
  int max_age = 120;
};

// Referential integrity, id resolution, age bounds, positive timestamps,
// non-empty specialty lists. Used by the loader and by the generator tests.
void validate_dataset(const ConsultationDataset& ds, const LoadOptions& opts);

ConsultationDataset load_dataset(const std::string& interactions_path,
                                 const std::string& patients_path,
                                 const std::string& doctors_path,
                                 const std::string& hospitals_path,
                                 const LoadOptions& opts = {});

// Writes interactions.csv, patients.csv, doctors.csv, hospitals.csv into dir.
void save_dataset_csv(const ConsultationDataset& ds, const std::string& dir);
void write_interactions_csv(const std::string& path,
                            const std::vector<Interaction>& interactions);
std::vector<Interaction> read_interactions_csv(const std::string& path);

// Patient ids that occur in at least one interaction, in table order.
std::vector<std::string> active_patients(const ConsultationDataset& ds);

enum class Partition { Train, TestSeen, TestNew };
const char* partition_name(Partition p);

struct PatientAssignment {
  Partition partition = Partition::Train;
  bool has_cutoff = false;
  std::int64_t cutoff = 0;  // train: timestamp < cutoff; test: >= cutoff
};

struct SplitParams {
  double test_fraction = 0.3;
  double new_patient_fraction = 0.15;  // share of multi-visit patients
  std::uint64_t seed = 0;
};

struct SplitDataset {
  ConsultationDataset train;
  ConsultationDataset test_seen;
  ConsultationDataset test_new;
  SplitParams params;
  // Active patients in table order with their routing decision.
  std::vector<std::pair<std::string, PatientAssignment>> assignments;
};

// Routes every interaction into exactly one partition. Multi-visit patients
// are sampled into the cold-start pool with probability new_patient_fraction;
// the rest get a per-patient cutoff timestamp placed so that the global test
// share lands near test_fraction. Single-visit patients always stay in train.
SplitDataset temporal_split(const ConsultationDataset& ds,
                            const SplitParams& params);

nlohmann::json split_manifest_to_json(const SplitDataset& split);
// Exact re-split from a manifest produced by split_manifest_to_json.
SplitDataset apply_split_manifest(const ConsultationDataset& ds,
                                  const nlohmann::json& manifest);

}  // namespace refrec
