#include "refrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "refrec/errors.hpp"

namespace refrec {

namespace {

constexpr double kMinDistanceKm = 0.1;

double norm_clip(double value, double max_value) {
  if (max_value <= 0.0) return 0.0;
  return std::min(value / max_value, 1.0);
}

// Appends one block's entries sorted by index.
void append_block(SparseVector& out, std::uint32_t offset,
                  std::vector<std::pair<std::uint32_t, double>>& entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [i, v] : entries)
    out.push(offset + i, v);
  entries.clear();
}

}  // namespace

Scenario parse_scenario(const std::string& s) {
  if (s == "S1") return Scenario::S1;
  if (s == "S2") return Scenario::S2;
  if (s == "S3") return Scenario::S3;
  if (s == "S4") return Scenario::S4;
  if (s == "S5") return Scenario::S5;
  throw ValidationError("unknown scenario '" + s + "' (expected S1..S5)");
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
    case Scenario::S5: return "S5";
  }
  return "?";
}

const char* hospital_encoding_name(HospitalEncoding e) {
  switch (e) {
    case HospitalEncoding::None: return "none";
    case HospitalEncoding::Visits: return "visits";
    case HospitalEncoding::Distances: return "distances";
  }
  return "?";
}

ScenarioConfig make_scenario_config(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  switch (s) {
    case Scenario::S1:
    case Scenario::S2: cfg.patient_hospital = HospitalEncoding::None; break;
    case Scenario::S3: cfg.patient_hospital = HospitalEncoding::Visits; break;
    case Scenario::S4:
    case Scenario::S5: cfg.patient_hospital = HospitalEncoding::Distances; break;
  }
  return cfg;
}

ScenarioConfig make_scenario_config(Scenario s, HospitalEncoding requested) {
  ScenarioConfig canonical = make_scenario_config(s);
  if (requested != canonical.patient_hospital)
    throw ValidationError(std::string("scenario ") + scenario_name(s) +
                          " requires patient hospital encoding '" +
                          hospital_encoding_name(canonical.patient_hospital) +
                          "', got '" + hospital_encoding_name(requested) + "'");
  return canonical;
}

TrainStats build_train_stats(const ConsultationDataset& train) {
  TrainStats stats;
  for (const auto& it : train.interactions) {
    ++stats.patient_occurrences[it.patient_id];
    ++stats.doctor_occurrences[it.doctor_id];
    ++stats.patient_hospital_visits[it.patient_id][it.hospital_id];
    ++stats.doctor_hospital_visits[it.doctor_id][it.hospital_id];
    const auto& doc = train.doctors[train.doctor_index.at(it.doctor_id)];
    for (const auto& spec : doc.specialties)
      ++stats.patient_specialty_visits[it.patient_id][spec];
  }
  return stats;
}

FeatureSpace build_feature_space(const ConsultationDataset& train) {
  if (train.interactions.empty())
    throw ValidationError("cannot build a feature space from an empty train set");

  FeatureSpace space;
  std::set<std::string> institutions;
  std::set<std::string> active_doctor_ids;
  std::set<std::string> active_patient_ids;
  std::unordered_map<std::string, std::uint64_t> patient_occ, doctor_occ;
  for (const auto& it : train.interactions) {
    active_doctor_ids.insert(it.doctor_id);
    active_patient_ids.insert(it.patient_id);
    ++patient_occ[it.patient_id];
    ++doctor_occ[it.doctor_id];
  }
  for (const auto& id : active_doctor_ids) {
    const auto& doc = train.doctors[train.doctor_index.at(id)];
    institutions.insert(doc.institutions.begin(), doc.institutions.end());
    space.max_doctor_age = std::max(space.max_doctor_age,
                                    static_cast<double>(doc.age));
  }
  for (const auto& id : active_patient_ids) {
    const auto& p = train.patients[train.patient_index.at(id)];
    space.max_patient_age = std::max(space.max_patient_age,
                                     static_cast<double>(p.age));
  }
  for (const auto& [id, n] : patient_occ)
    space.max_patient_occurrences =
        std::max(space.max_patient_occurrences, static_cast<double>(n));
  for (const auto& [id, n] : doctor_occ)
    space.max_doctor_occurrences =
        std::max(space.max_doctor_occurrences, static_cast<double>(n));

  space.institutions.assign(institutions.begin(), institutions.end());

  std::set<std::string> specialties;
  for (const auto& d : train.doctors)
    specialties.insert(d.specialties.begin(), d.specialties.end());
  space.specialties.assign(specialties.begin(), specialties.end());

  std::vector<std::pair<std::string, std::pair<double, double>>> hosp;
  for (const auto& h : train.hospitals)
    hosp.push_back({h.hospital_id, {h.loc_x, h.loc_y}});
  std::sort(hosp.begin(), hosp.end());
  for (const auto& [id, loc] : hosp) {
    space.hospitals.push_back(id);
    space.hospital_locations.push_back(loc);
  }

  for (std::uint32_t i = 0; i < space.institutions.size(); ++i)
    space.institution_idx[space.institutions[i]] = i;
  for (std::uint32_t i = 0; i < space.specialties.size(); ++i)
    space.specialty_idx[space.specialties[i]] = i;
  for (std::uint32_t i = 0; i < space.hospitals.size(); ++i)
    space.hospital_idx[space.hospitals[i]] = i;
  return space;
}

SparseVector encode_doctor(const DoctorMeta& doctor, const TrainStats& stats,
                           const FeatureSpace& space, const ScenarioConfig& cfg) {
  SparseVector out;
  out.push(0, static_cast<double>(doctor.sex));
  out.push(1, norm_clip(doctor.age, space.max_doctor_age));
  const auto occ = stats.doctor_occurrences.find(doctor.doctor_id);
  const double n_occ = occ == stats.doctor_occurrences.end()
                           ? 0.0
                           : static_cast<double>(occ->second);
  out.push(2, norm_clip(n_occ, space.max_doctor_occurrences));

  std::vector<std::pair<std::uint32_t, double>> block;
  // Education is present for doctors in every scenario; institutions outside
  // the train-derived space are dropped.
  for (const auto& inst : doctor.institutions) {
    auto it = space.institution_idx.find(inst);
    if (it != space.institution_idx.end()) block.emplace_back(it->second, 1.0);
  }
  std::sort(block.begin(), block.end());
  block.erase(std::unique(block.begin(), block.end()), block.end());
  append_block(out, space.education_offset(), block);

  if (cfg.doctor_specialty_block()) {
    for (const auto& spec : doctor.specialties) {
      auto it = space.specialty_idx.find(spec);
      if (it != space.specialty_idx.end()) block.emplace_back(it->second, 1.0);
    }
    std::sort(block.begin(), block.end());
    block.erase(std::unique(block.begin(), block.end()), block.end());
    append_block(out, space.specialty_offset(), block);
  }

  if (cfg.doctor_hospital_block()) {
    auto hv = stats.doctor_hospital_visits.find(doctor.doctor_id);
    if (hv != stats.doctor_hospital_visits.end()) {
      double total = 0.0;
      for (const auto& [hid, n] : hv->second) total += static_cast<double>(n);
      for (const auto& [hid, n] : hv->second) {
        auto it = space.hospital_idx.find(hid);
        if (it != space.hospital_idx.end())
          block.emplace_back(it->second, static_cast<double>(n) / total);
      }
      append_block(out, space.hospital_offset(), block);
    }
  }
  return out;
}

SparseVector encode_patient(const PatientMeta& patient, const TrainStats& stats,
                            const FeatureSpace& space, const ScenarioConfig& cfg) {
  SparseVector out;
  out.push(0, static_cast<double>(patient.sex));
  out.push(1, norm_clip(patient.age, space.max_patient_age));
  const auto occ = stats.patient_occurrences.find(patient.patient_id);
  const double n_occ = occ == stats.patient_occurrences.end()
                           ? 0.0
                           : static_cast<double>(occ->second);
  out.push(2, norm_clip(n_occ, space.max_patient_occurrences));

  // Education block stays zero for patients; it exists only so both roles
  // share the same space.

  std::vector<std::pair<std::uint32_t, double>> block;
  if (cfg.patient_specialty_block() && n_occ > 0.0) {
    auto sv = stats.patient_specialty_visits.find(patient.patient_id);
    if (sv != stats.patient_specialty_visits.end()) {
      for (const auto& [spec, n] : sv->second) {
        auto it = space.specialty_idx.find(spec);
        if (it != space.specialty_idx.end())
          block.emplace_back(it->second, static_cast<double>(n) / n_occ);
      }
      append_block(out, space.specialty_offset(), block);
    }
  }

  switch (cfg.patient_hospital) {
    case HospitalEncoding::None:
      break;
    case HospitalEncoding::Visits: {
      auto hv = stats.patient_hospital_visits.find(patient.patient_id);
      if (hv != stats.patient_hospital_visits.end()) {
        double total = 0.0;
        for (const auto& [hid, n] : hv->second) total += static_cast<double>(n);
        for (const auto& [hid, n] : hv->second) {
          auto it = space.hospital_idx.find(hid);
          if (it != space.hospital_idx.end())
            block.emplace_back(it->second, static_cast<double>(n) / total);
        }
        append_block(out, space.hospital_offset(), block);
      }
      break;
    }
    case HospitalEncoding::Distances: {
      if (!patient.has_location)
        throw ValidationError("patient '" + patient.patient_id +
                              "' has no location but the distance encoding needs one");
      std::vector<double> inv(space.hospitals.size());
      double max_inv = 0.0;
      for (std::size_t h = 0; h < space.hospitals.size(); ++h) {
        const auto& [hx, hy] = space.hospital_locations[h];
        const double dx = patient.loc_x - hx, dy = patient.loc_y - hy;
        const double d = std::max(std::sqrt(dx * dx + dy * dy), kMinDistanceKm);
        inv[h] = 1.0 / d;
        max_inv = std::max(max_inv, inv[h]);
      }
      for (std::uint32_t h = 0; h < inv.size(); ++h)
        block.emplace_back(h, inv[h] / max_inv);
      append_block(out, space.hospital_offset(), block);
      break;
    }
  }
  return out;
}

SparseMatrix encode_all_doctors(const ConsultationDataset& meta,
                                const TrainStats& stats,
                                const FeatureSpace& space,
                                const ScenarioConfig& cfg) {
  SparseMatrix m;
  m.n_cols = space.dim();
  m.rows.reserve(meta.doctors.size());
  for (const auto& d : meta.doctors)
    m.rows.push_back(encode_doctor(d, stats, space, cfg));
  return m;
}

SparseMatrix encode_patients(const std::vector<std::string>& patient_ids,
                             const ConsultationDataset& meta,
                             const TrainStats& stats, const FeatureSpace& space,
                             const ScenarioConfig& cfg) {
  SparseMatrix m;
  m.n_cols = space.dim();
  m.rows.reserve(patient_ids.size());
  for (const auto& id : patient_ids) {
    auto it = meta.patient_index.find(id);
    if (it == meta.patient_index.end())
      throw ValidationError("unknown patient '" + id + "'");
    m.rows.push_back(encode_patient(meta.patients[it->second], stats, space, cfg));
  }
  return m;
}

}  // namespace refrec
