#include "refrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "refrec/errors.hpp"
#include "refrec/random.hpp"
#include "refrec/sparse.hpp"

namespace refrec {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> split_list(const std::string& field) {
  if (field.empty()) return {};
  return split_fields(field, '|');
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line_no) + ": " + what);
}

std::int64_t parse_i64(const std::string& s, const std::string& path,
                       std::size_t line_no, const std::string& field) {
  std::int64_t v = 0;
  auto rc = std::from_chars(s.data(), s.data() + s.size(), v);
  if (rc.ec != std::errc() || rc.ptr != s.data() + s.size())
    parse_fail(path, line_no, "bad integer in field '" + field + "': '" + s + "'");
  return v;
}

double parse_f64(const std::string& s, const std::string& path,
                 std::size_t line_no, const std::string& field) {
  double v = 0.0;
  auto rc = std::from_chars(s.data(), s.data() + s.size(), v);
  if (rc.ec != std::errc() || rc.ptr != s.data() + s.size())
    parse_fail(path, line_no, "bad number in field '" + field + "': '" + s + "'");
  return v;
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  std::size_t line_no = 0;

  CsvReader(const std::string& p, const std::string& expected_header)
      : in(p, std::ios::binary), path(p) {
    if (!in) throw ValidationError("cannot open: " + p);
    std::string header;
    if (!std::getline(in, header)) parse_fail(path, 1, "empty file");
    ++line_no;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header)
      parse_fail(path, 1, "expected header '" + expected_header + "', got '" +
                          header + "'");
  }

  bool next(std::vector<std::string>& fields, std::size_t n_fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_fields(line, ',');
      if (fields.size() != n_fields)
        parse_fail(path, line_no,
                   "expected " + std::to_string(n_fields) + " fields, got " +
                       std::to_string(fields.size()));
      return true;
    }
    return false;
  }
};

}  // namespace

void ConsultationDataset::build_index() {
  patient_index.clear();
  doctor_index.clear();
  hospital_index.clear();
  for (std::uint32_t i = 0; i < patients.size(); ++i)
    if (!patient_index.emplace(patients[i].patient_id, i).second)
      throw ValidationError("duplicate patient_id '" + patients[i].patient_id + "'");
  for (std::uint32_t i = 0; i < doctors.size(); ++i)
    if (!doctor_index.emplace(doctors[i].doctor_id, i).second)
      throw ValidationError("duplicate doctor_id '" + doctors[i].doctor_id + "'");
  for (std::uint32_t i = 0; i < hospitals.size(); ++i)
    if (!hospital_index.emplace(hospitals[i].hospital_id, i).second)
      throw ValidationError("duplicate hospital_id '" + hospitals[i].hospital_id + "'");
}

void validate_dataset(const ConsultationDataset& ds, const LoadOptions& opts) {
  for (const auto& p : ds.patients) {
    if (p.age < 0 || p.age > opts.max_age)
      throw ValidationError("patient '" + p.patient_id + "' age " +
                            std::to_string(p.age) + " outside [0, " +
                            std::to_string(opts.max_age) + "]");
    if (p.sex != 0 && p.sex != 1)
      throw ValidationError("patient '" + p.patient_id + "' sex must be 0 or 1");
  }
  for (const auto& d : ds.doctors) {
    if (d.age < 0 || d.age > opts.max_age)
      throw ValidationError("doctor '" + d.doctor_id + "' age out of range");
    if (d.specialties.empty())
      throw ValidationError("doctor '" + d.doctor_id + "' has no specialty");
  }
  for (std::size_t i = 0; i < ds.interactions.size(); ++i) {
    const auto& it = ds.interactions[i];
    if (!ds.patient_index.count(it.patient_id))
      throw ValidationError("interaction " + std::to_string(i + 1) +
                            " references unknown patient_id '" + it.patient_id + "'");
    if (!ds.doctor_index.count(it.doctor_id))
      throw ValidationError("interaction " + std::to_string(i + 1) +
                            " references unknown doctor_id '" + it.doctor_id + "'");
    if (!ds.hospital_index.count(it.hospital_id))
      throw ValidationError("interaction " + std::to_string(i + 1) +
                            " references unknown hospital_id '" + it.hospital_id + "'");
    if (it.timestamp <= 0)
      throw ValidationError("interaction " + std::to_string(i + 1) +
                            " has non-positive timestamp");
  }
}

ConsultationDataset load_dataset(const std::string& interactions_path,
                                 const std::string& patients_path,
                                 const std::string& doctors_path,
                                 const std::string& hospitals_path,
                                 const LoadOptions& opts) {
  ConsultationDataset ds;
  std::vector<std::string> f;

  {
    CsvReader r(patients_path, "patient_id,sex,age,loc_x,loc_y");
    while (r.next(f, 5)) {
      PatientMeta p;
      p.patient_id = f[0];
      p.sex = static_cast<int>(parse_i64(f[1], r.path, r.line_no, "sex"));
      p.age = static_cast<int>(parse_i64(f[2], r.path, r.line_no, "age"));
      if (f[3].empty() != f[4].empty())
        parse_fail(r.path, r.line_no, "loc_x/loc_y must both be set or both empty");
      if (!f[3].empty()) {
        p.has_location = true;
        p.loc_x = parse_f64(f[3], r.path, r.line_no, "loc_x");
        p.loc_y = parse_f64(f[4], r.path, r.line_no, "loc_y");
      }
      ds.patients.push_back(std::move(p));
    }
  }
  {
    CsvReader r(doctors_path, "doctor_id,sex,age,specialties,institutions");
    while (r.next(f, 5)) {
      DoctorMeta d;
      d.doctor_id = f[0];
      d.sex = static_cast<int>(parse_i64(f[1], r.path, r.line_no, "sex"));
      d.age = static_cast<int>(parse_i64(f[2], r.path, r.line_no, "age"));
      d.specialties = split_list(f[3]);
      d.institutions = split_list(f[4]);
      if (d.specialties.empty())
        parse_fail(r.path, r.line_no, "doctor '" + d.doctor_id + "' has no specialty");
      ds.doctors.push_back(std::move(d));
    }
  }
  {
    CsvReader r(hospitals_path, "hospital_id,loc_x,loc_y");
    while (r.next(f, 3)) {
      HospitalMeta h;
      h.hospital_id = f[0];
      h.loc_x = parse_f64(f[1], r.path, r.line_no, "loc_x");
      h.loc_y = parse_f64(f[2], r.path, r.line_no, "loc_y");
      ds.hospitals.push_back(std::move(h));
    }
  }
  ds.interactions = read_interactions_csv(interactions_path);

  ds.build_index();
  validate_dataset(ds, opts);
  return ds;
}

std::vector<Interaction> read_interactions_csv(const std::string& path) {
  CsvReader r(path, "patient_id,doctor_id,hospital_id,timestamp");
  std::vector<Interaction> out;
  std::vector<std::string> f;
  while (r.next(f, 4)) {
    Interaction it;
    it.patient_id = f[0];
    it.doctor_id = f[1];
    it.hospital_id = f[2];
    it.timestamp = parse_i64(f[3], r.path, r.line_no, "timestamp");
    out.push_back(std::move(it));
  }
  return out;
}

void write_interactions_csv(const std::string& path,
                            const std::vector<Interaction>& interactions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "patient_id,doctor_id,hospital_id,timestamp\n";
  for (const auto& it : interactions)
    out << it.patient_id << ',' << it.doctor_id << ',' << it.hospital_id << ','
        << it.timestamp << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

void save_dataset_csv(const ConsultationDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto join = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  write_interactions_csv(join("interactions.csv"), ds.interactions);
  {
    std::ofstream out(join("patients.csv"), std::ios::binary);
    out << "patient_id,sex,age,loc_x,loc_y\n";
    for (const auto& p : ds.patients) {
      out << p.patient_id << ',' << p.sex << ',' << p.age << ',';
      if (p.has_location)
        out << format_double(p.loc_x) << ',' << format_double(p.loc_y);
      else
        out << ',';
      out << '\n';
    }
    if (!out) throw ValidationError("write failed: patients.csv");
  }
  {
    std::ofstream out(join("doctors.csv"), std::ios::binary);
    out << "doctor_id,sex,age,specialties,institutions\n";
    for (const auto& d : ds.doctors) {
      out << d.doctor_id << ',' << d.sex << ',' << d.age << ',';
      for (std::size_t i = 0; i < d.specialties.size(); ++i)
        out << (i ? "|" : "") << d.specialties[i];
      out << ',';
      for (std::size_t i = 0; i < d.institutions.size(); ++i)
        out << (i ? "|" : "") << d.institutions[i];
      out << '\n';
    }
    if (!out) throw ValidationError("write failed: doctors.csv");
  }
  {
    std::ofstream out(join("hospitals.csv"), std::ios::binary);
    out << "hospital_id,loc_x,loc_y\n";
    for (const auto& h : ds.hospitals)
      out << h.hospital_id << ',' << format_double(h.loc_x) << ','
          << format_double(h.loc_y) << '\n';
    if (!out) throw ValidationError("write failed: hospitals.csv");
  }
}

std::vector<std::string> active_patients(const ConsultationDataset& ds) {
  std::vector<char> seen(ds.patients.size(), 0);
  for (const auto& it : ds.interactions)
    seen[ds.patient_index.at(it.patient_id)] = 1;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ds.patients.size(); ++i)
    if (seen[i]) out.push_back(ds.patients[i].patient_id);
  return out;
}

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::TestSeen: return "test_seen";
    case Partition::TestNew: return "test_new";
  }
  return "?";
}

namespace {

Partition partition_from_name(const std::string& s) {
  if (s == "train") return Partition::Train;
  if (s == "test_seen") return Partition::TestSeen;
  if (s == "test_new") return Partition::TestNew;
  throw ValidationError("unknown partition '" + s + "'");
}

// Routes interactions into the three partitions given per-patient decisions,
// and fills the partition datasets with shared metadata tables.
SplitDataset route_interactions(
    const ConsultationDataset& ds,
    const std::vector<std::pair<std::string, PatientAssignment>>& assignments,
    const SplitParams& params) {
  std::unordered_map<std::string, const PatientAssignment*> by_id;
  for (const auto& [id, a] : assignments) by_id.emplace(id, &a);

  SplitDataset split;
  split.params = params;
  split.assignments = assignments;
  for (ConsultationDataset* part : {&split.train, &split.test_seen, &split.test_new}) {
    part->patients = ds.patients;
    part->doctors = ds.doctors;
    part->hospitals = ds.hospitals;
  }
  for (const auto& it : ds.interactions) {
    const PatientAssignment& a = *by_id.at(it.patient_id);
    switch (a.partition) {
      case Partition::TestNew:
        split.test_new.interactions.push_back(it);
        break;
      case Partition::Train:
        split.train.interactions.push_back(it);
        break;
      case Partition::TestSeen:
        if (it.timestamp < a.cutoff)
          split.train.interactions.push_back(it);
        else
          split.test_seen.interactions.push_back(it);
        break;
    }
  }
  split.train.build_index();
  split.test_seen.build_index();
  split.test_new.build_index();
  return split;
}

}  // namespace

SplitDataset temporal_split(const ConsultationDataset& ds,
                            const SplitParams& params) {
  if (!(params.test_fraction > 0.0 && params.test_fraction < 1.0))
    throw ValidationError("test_fraction must be in (0, 1)");
  if (params.new_patient_fraction < 0.0 || params.new_patient_fraction > 1.0)
    throw ValidationError("new_patient_fraction must be in [0, 1]");

  // Timestamps per active patient, in table order.
  std::vector<std::vector<std::int64_t>> times(ds.patients.size());
  for (const auto& it : ds.interactions)
    times[ds.patient_index.at(it.patient_id)].push_back(it.timestamp);

  std::vector<std::uint32_t> active;
  std::vector<std::uint32_t> multi;
  for (std::uint32_t i = 0; i < ds.patients.size(); ++i) {
    if (times[i].empty()) continue;
    active.push_back(i);
    if (times[i].size() >= 2) multi.push_back(i);
  }

  Rng rng(params.seed);
  std::vector<std::uint32_t> pool = multi;
  shuffle_inplace(pool, rng);
  std::size_t n_new = static_cast<std::size_t>(
      std::llround(params.new_patient_fraction * static_cast<double>(pool.size())));
  n_new = std::min(n_new, pool.size());
  std::vector<char> is_new(ds.patients.size(), 0);
  std::size_t m_new = 0;
  for (std::size_t i = 0; i < n_new; ++i) {
    is_new[pool[i]] = 1;
    m_new += times[pool[i]].size();
  }

  const std::size_t m_total = ds.interactions.size();
  std::size_t m_splittable = 0;
  for (std::uint32_t i : multi)
    if (!is_new[i]) m_splittable += times[i].size();

  // Fraction of each remaining multi-visit patient's history that should land
  // in test_seen so the overall test share stays near test_fraction after the
  // interactions already routed to test_new.
  double seen_fraction = 0.0;
  if (m_splittable > 0) {
    const double target = params.test_fraction * static_cast<double>(m_total) -
                          static_cast<double>(m_new);
    seen_fraction = std::clamp(target / static_cast<double>(m_splittable), 0.0, 1.0);
  }

  std::vector<std::pair<std::string, PatientAssignment>> assignments;
  for (std::uint32_t i : active) {
    PatientAssignment a;
    if (is_new[i]) {
      a.partition = Partition::TestNew;
    } else if (times[i].size() < 2) {
      a.partition = Partition::Train;
    } else {
      auto& ts = times[i];
      std::sort(ts.begin(), ts.end());
      const std::size_t n = ts.size();
      std::size_t k = static_cast<std::size_t>(
          std::llround(seen_fraction * static_cast<double>(n)));
      k = std::min(k, n - 1);  // at least one train interaction
      if (k == 0) {
        a.partition = Partition::Train;
      } else {
        // Candidate cutoff at the (1 - fraction) quantile; ties go to test,
        // so if the cutoff value ties with the earliest visit we advance to
        // the next distinct timestamp (or give up and keep the patient whole).
        std::size_t c = n - k;
        while (c < n && ts[c] == ts[0]) ++c;
        if (c == n) {
          a.partition = Partition::Train;
        } else {
          a.partition = Partition::TestSeen;
          a.has_cutoff = true;
          a.cutoff = ts[c];
        }
      }
    }
    assignments.emplace_back(ds.patients[i].patient_id, a);
  }
  return route_interactions(ds, assignments, params);
}

nlohmann::json split_manifest_to_json(const SplitDataset& split) {
  nlohmann::json j;
  j["test_fraction"] = split.params.test_fraction;
  j["new_patient_fraction"] = split.params.new_patient_fraction;
  j["seed"] = split.params.seed;
  nlohmann::json patients = nlohmann::json::array();
  for (const auto& [id, a] : split.assignments) {
    nlohmann::json p;
    p["id"] = id;
    p["partition"] = a.partition == Partition::TestNew    ? "test_new"
                     : a.partition == Partition::TestSeen ? "test_seen"
                                                          : "train";
    if (a.has_cutoff) p["cutoff"] = a.cutoff;
    patients.push_back(std::move(p));
  }
  j["patients"] = std::move(patients);
  return j;
}

SplitDataset apply_split_manifest(const ConsultationDataset& ds,
                                  const nlohmann::json& manifest) {
  SplitParams params;
  params.test_fraction = manifest.at("test_fraction").get<double>();
  params.new_patient_fraction = manifest.at("new_patient_fraction").get<double>();
  params.seed = manifest.at("seed").get<std::uint64_t>();
  std::vector<std::pair<std::string, PatientAssignment>> assignments;
  for (const auto& p : manifest.at("patients")) {
    PatientAssignment a;
    a.partition = partition_from_name(p.at("partition").get<std::string>());
    if (p.contains("cutoff")) {
      a.has_cutoff = true;
      a.cutoff = p.at("cutoff").get<std::int64_t>();
    }
    const std::string id = p.at("id").get<std::string>();
    if (!ds.patient_index.count(id))
      throw ValidationError("split manifest references unknown patient '" + id + "'");
    assignments.emplace_back(id, a);
  }
  return route_interactions(ds, assignments, params);
}

}  // namespace refrec
