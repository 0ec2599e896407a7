#include "refrec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "refrec/errors.hpp"
#include "refrec/random.hpp"

namespace refrec {

namespace {

constexpr double kMinDistanceKm = 0.1;

std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(i + 1);
  std::string out(1, prefix);
  out.append(width > digits.size() ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

double dist_km(double ax, double ay, double bx, double by) {
  const double dx = ax - bx, dy = ay - by;
  return std::sqrt(dx * dx + dy * dy);
}

long draw_visit_count(Rng& rng, const VisitsSpec& spec) {
  if (spec.mean <= 0.0) return 0;
  double lambda = spec.mean;
  if (spec.dispersion > 1e-9) {
    const double shape = 1.0 / spec.dispersion;
    lambda = rand_gamma(rng, shape) * spec.mean * spec.dispersion;
  }
  return rand_poisson(rng, lambda);
}

}  // namespace

GeneratorConfig paper_like_config() {
  GeneratorConfig cfg;
  cfg.sex_restricted_specialty = 2;
  return cfg;
}

void validate_config(const GeneratorConfig& cfg) {
  if (cfg.n_patients == 0 || cfg.n_doctors == 0 || cfg.n_hospitals == 0 ||
      cfg.n_specialties == 0 || cfg.n_institutions == 0)
    throw ValidationError("generator counts must be positive");
  if (cfg.n_doctors < cfg.n_specialties)
    throw ValidationError("n_doctors must be >= n_specialties");
  if (cfg.doctor_popularity_exponent <= 0.0)
    throw ValidationError("doctor_popularity_exponent must be positive");
  if (cfg.visits_per_patient.mean < 0.0 || cfg.visits_per_patient.dispersion < 0.0)
    throw ValidationError("visits_per_patient mean/dispersion must be non-negative");
  for (double p : {cfg.repeat_visit_affinity, cfg.female_fraction})
    if (p < 0.0 || p > 1.0)
      throw ValidationError("probabilities must be in [0, 1]");
  if (cfg.sex_restricted_specialty >= static_cast<std::int32_t>(cfg.n_specialties))
    throw ValidationError("sex_restricted_specialty out of range");
  if (cfg.geography_scale <= 0.0 || cfg.time_horizon <= 0)
    throw ValidationError("geography_scale and time_horizon must be positive");
}

ConsultationDataset generate(const GeneratorConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  Rng rng(seed);
  ConsultationDataset ds;

  // Hospitals scattered over the square world.
  std::vector<std::pair<double, double>> hospital_loc(cfg.n_hospitals);
  for (std::size_t h = 0; h < cfg.n_hospitals; ++h) {
    hospital_loc[h] = {rand_range(rng, 0.0, cfg.geography_scale),
                       rand_range(rng, 0.0, cfg.geography_scale)};
    ds.hospitals.push_back({padded_id('h', h, cfg.n_hospitals),
                            hospital_loc[h].first, hospital_loc[h].second});
  }

  // Popularity ranks are a random permutation so rank is independent of id.
  std::vector<std::uint32_t> rank_of(cfg.n_doctors);
  std::iota(rank_of.begin(), rank_of.end(), 0);
  shuffle_inplace(rank_of, rng);
  std::vector<double> popularity(cfg.n_doctors);
  for (std::size_t d = 0; d < cfg.n_doctors; ++d)
    popularity[d] = std::pow(static_cast<double>(rank_of[d]) + 1.0,
                             -cfg.doctor_popularity_exponent);

  struct DoctorState {
    std::size_t specialty;
    std::vector<std::uint32_t> hospitals;  // indices, nearest first
  };
  std::vector<DoctorState> dstate(cfg.n_doctors);
  std::vector<std::size_t> doctors_in_specialty_count(cfg.n_specialties, 0);

  for (std::size_t d = 0; d < cfg.n_doctors; ++d) {
    DoctorMeta meta;
    meta.doctor_id = padded_id('d', d, cfg.n_doctors);
    meta.sex = rand_unit(rng) < 0.5 ? 1 : 0;
    meta.age = 28 + static_cast<int>(rand_index(rng, 43));  // 28..70
    // First doctors cover every specialty so none is empty.
    const std::size_t spec = d < cfg.n_specialties
                                 ? d
                                 : rand_index(rng, cfg.n_specialties);
    dstate[d].specialty = spec;
    ++doctors_in_specialty_count[spec];
    meta.specialties.push_back(padded_id('s', spec, cfg.n_specialties));

    const std::size_t n_inst = 1 + (rand_unit(rng) < 0.4 ? 1 : 0);
    std::vector<std::size_t> inst;
    while (inst.size() < std::min(n_inst, cfg.n_institutions)) {
      std::size_t i = rand_index(rng, cfg.n_institutions);
      if (std::find(inst.begin(), inst.end(), i) == inst.end()) inst.push_back(i);
    }
    std::sort(inst.begin(), inst.end());
    for (std::size_t i : inst)
      meta.institutions.push_back(padded_id('i', i, cfg.n_institutions));

    const double hx = rand_range(rng, 0.0, cfg.geography_scale);
    const double hy = rand_range(rng, 0.0, cfg.geography_scale);
    const std::size_t n_hosp = std::min<std::size_t>(1 + rand_index(rng, 3),
                                                     cfg.n_hospitals);
    std::vector<std::uint32_t> order(cfg.n_hospitals);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return dist_km(hx, hy, hospital_loc[a].first, hospital_loc[a].second) <
             dist_km(hx, hy, hospital_loc[b].first, hospital_loc[b].second);
    });
    dstate[d].hospitals.assign(order.begin(), order.begin() + n_hosp);
    ds.doctors.push_back(std::move(meta));
  }

  std::vector<std::vector<std::uint32_t>> specialty_doctors(cfg.n_specialties);
  for (std::uint32_t d = 0; d < cfg.n_doctors; ++d)
    specialty_doctors[dstate[d].specialty].push_back(d);

  // Bigger specialties attract proportionally more visits.
  std::vector<double> specialty_weight(cfg.n_specialties);
  for (std::size_t s = 0; s < cfg.n_specialties; ++s)
    specialty_weight[s] = static_cast<double>(doctors_in_specialty_count[s]);

  std::vector<double> cum;  // reused sampling buffer
  for (std::size_t pidx = 0; pidx < cfg.n_patients; ++pidx) {
    PatientMeta meta;
    meta.patient_id = padded_id('p', pidx, cfg.n_patients);
    meta.sex = rand_unit(rng) < cfg.female_fraction ? 1 : 0;
    meta.age = static_cast<int>(rand_index(rng, 91));  // 0..90
    meta.has_location = true;
    meta.loc_x = rand_range(rng, 0.0, cfg.geography_scale);
    meta.loc_y = rand_range(rng, 0.0, cfg.geography_scale);

    // Personal preference mixture over specialties.
    std::vector<double> pref(cfg.n_specialties, 0.0);
    double pref_total = 0.0;
    for (std::size_t s = 0; s < cfg.n_specialties; ++s) {
      double w = specialty_weight[s] * rand_gamma(rng, 0.7);
      if (cfg.sex_restricted_specialty == static_cast<std::int32_t>(s) &&
          meta.sex != 1)
        w = 0.0;
      pref[s] = w;
      pref_total += w;
    }

    const long n_visits = draw_visit_count(rng, cfg.visits_per_patient);
    std::vector<std::int64_t> when(static_cast<std::size_t>(n_visits));
    for (auto& t : when)
      t = 1 + static_cast<std::int64_t>(
                  rand_index(rng, static_cast<std::size_t>(cfg.time_horizon)));
    std::sort(when.begin(), when.end());

    // First-visit order per specialty, for revisits.
    std::vector<std::vector<std::uint32_t>> visited(cfg.n_specialties);

    for (std::int64_t t : when) {
      if (pref_total <= 0.0) break;
      cum.assign(cfg.n_specialties, 0.0);
      double acc = 0.0;
      for (std::size_t s = 0; s < cfg.n_specialties; ++s)
        cum[s] = (acc += pref[s]);
      const std::size_t s = sample_cumulative(cum, rng);

      std::uint32_t doctor;
      if (!visited[s].empty() && rand_unit(rng) < cfg.repeat_visit_affinity) {
        doctor = visited[s][rand_index(rng, visited[s].size())];
      } else {
        const auto& cands = specialty_doctors[s];
        cum.assign(cands.size(), 0.0);
        acc = 0.0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
          double best = 1e300;
          for (std::uint32_t h : dstate[cands[i]].hospitals)
            best = std::min(best, dist_km(meta.loc_x, meta.loc_y,
                                          hospital_loc[h].first,
                                          hospital_loc[h].second));
          cum[i] = (acc += popularity[cands[i]] / std::max(best, kMinDistanceKm));
        }
        doctor = cands[sample_cumulative(cum, rng)];
        if (std::find(visited[s].begin(), visited[s].end(), doctor) ==
            visited[s].end())
          visited[s].push_back(doctor);
      }

      const auto& dh = dstate[doctor].hospitals;
      cum.assign(dh.size(), 0.0);
      acc = 0.0;
      for (std::size_t i = 0; i < dh.size(); ++i) {
        const double d = dist_km(meta.loc_x, meta.loc_y,
                                 hospital_loc[dh[i]].first,
                                 hospital_loc[dh[i]].second);
        cum[i] = (acc += 1.0 / std::max(d, kMinDistanceKm));
      }
      const std::uint32_t hosp = dh[sample_cumulative(cum, rng)];

      ds.interactions.push_back({meta.patient_id,
                                 ds.doctors[doctor].doctor_id,
                                 ds.hospitals[hosp].hospital_id, t});
    }
    ds.patients.push_back(std::move(meta));
  }

  ds.build_index();
  return ds;
}

void to_json(nlohmann::json& j, const GeneratorConfig& cfg) {
  j = nlohmann::json{
      {"n_patients", cfg.n_patients},
      {"n_doctors", cfg.n_doctors},
      {"n_hospitals", cfg.n_hospitals},
      {"n_specialties", cfg.n_specialties},
      {"n_institutions", cfg.n_institutions},
      {"doctor_popularity_exponent", cfg.doctor_popularity_exponent},
      {"visits_mean", cfg.visits_per_patient.mean},
      {"visits_dispersion", cfg.visits_per_patient.dispersion},
      {"repeat_visit_affinity", cfg.repeat_visit_affinity},
      {"female_fraction", cfg.female_fraction},
      {"sex_restricted_specialty", cfg.sex_restricted_specialty},
      {"geography_scale", cfg.geography_scale},
      {"time_horizon", cfg.time_horizon}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& cfg) {
  cfg = GeneratorConfig{};
  if (j.contains("n_patients")) j.at("n_patients").get_to(cfg.n_patients);
  if (j.contains("n_doctors")) j.at("n_doctors").get_to(cfg.n_doctors);
  if (j.contains("n_hospitals")) j.at("n_hospitals").get_to(cfg.n_hospitals);
  if (j.contains("n_specialties")) j.at("n_specialties").get_to(cfg.n_specialties);
  if (j.contains("n_institutions")) j.at("n_institutions").get_to(cfg.n_institutions);
  if (j.contains("doctor_popularity_exponent"))
    j.at("doctor_popularity_exponent").get_to(cfg.doctor_popularity_exponent);
  if (j.contains("visits_mean")) j.at("visits_mean").get_to(cfg.visits_per_patient.mean);
  if (j.contains("visits_dispersion"))
    j.at("visits_dispersion").get_to(cfg.visits_per_patient.dispersion);
  if (j.contains("repeat_visit_affinity"))
    j.at("repeat_visit_affinity").get_to(cfg.repeat_visit_affinity);
  if (j.contains("female_fraction")) j.at("female_fraction").get_to(cfg.female_fraction);
  if (j.contains("sex_restricted_specialty"))
    j.at("sex_restricted_specialty").get_to(cfg.sex_restricted_specialty);
  if (j.contains("geography_scale")) j.at("geography_scale").get_to(cfg.geography_scale);
  if (j.contains("time_horizon")) j.at("time_horizon").get_to(cfg.time_horizon);
}

}  // namespace refrec
