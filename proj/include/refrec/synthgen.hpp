#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>

#include "refrec/dataset.hpp"

namespace refrec {

struct VisitsSpec {
  double mean = 8.0;
  // Negative-binomial overdispersion: variance = mean + dispersion * mean^2.
  // Zero means plain Poisson.
  double dispersion = 0.5;
};

struct GeneratorConfig {
  std::size_t n_patients = 5000;
  std::size_t n_doctors = 100;
  std::size_t n_hospitals = 8;
  std::size_t n_specialties = 5;
  std::size_t n_institutions = 12;
  // Doctor r (by popularity rank) is drawn with weight r^-exponent.
  double doctor_popularity_exponent = 1.0;
  VisitsSpec visits_per_patient;
  // Chance that a visit in a specialty the patient already knows returns to a
  // previously visited doctor of that specialty.
  double repeat_visit_affinity = 0.6;
  double female_fraction = 0.55;
  // When >= 0, every patient of this specialty is female (sex = 1).
  std::int32_t sex_restricted_specialty = -1;
  double geography_scale = 50.0;   // km, side of the square world
  std::int64_t time_horizon = 94608000;  // seconds (~3 years)
};

// Defaults shaped like the consultation data described alongside this
// pipeline: five specialties, one of them sex-restricted, mildly
// overdispersed visit counts and a unit power-law over doctor popularity.
GeneratorConfig paper_like_config();

void validate_config(const GeneratorConfig& cfg);

// Deterministic per (config, seed). Doctors practice at the 1-3 hospitals
// nearest their home point; patients pick a specialty from a personal
// preference mixture, then a doctor within it by popularity weight blended
// with inverse patient-hospital distance, revisiting known doctors with
// probability repeat_visit_affinity.
ConsultationDataset generate(const GeneratorConfig& cfg, std::uint64_t seed);

void to_json(nlohmann::json& j, const GeneratorConfig& cfg);
void from_json(const nlohmann::json& j, GeneratorConfig& cfg);

}  // namespace refrec
