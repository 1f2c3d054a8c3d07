#include "agesig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "agesig/mathutil.hpp"
#include "agesig/textio.hpp"

namespace agesig {

namespace {

void validate_components(std::span<const ComponentSpec> components) {
  if (components.empty()) {
    throw std::invalid_argument("template has no components");
  }
  double total = 0.0;
  for (const auto& c : components) {
    if (c.weight < 0.0) throw std::invalid_argument("negative mixture weight");
    if (!(c.stddev > 0.0)) throw std::invalid_argument("component stddev must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
}

int sample_from_pmf(const std::array<double, kAgeBins>& pmf, std::mt19937_64& rng) {
  double u = uniform01(rng);
  double cum = 0.0;
  for (int a = 0; a < kAgeBins; ++a) {
    cum += pmf[static_cast<std::size_t>(a)];
    if (u < cum) return a;
  }
  return kAgeBins - 1;
}

std::vector<ComponentSpec> perturb_components(std::span<const ComponentSpec> tmpl,
                                              double noise_level,
                                              std::mt19937_64& rng) {
  std::vector<ComponentSpec> out(tmpl.begin(), tmpl.end());
  for (auto& c : out) {
    double mean_shift = noise_level * normal_draw(rng);
    double std_scale = std::exp(0.1 * noise_level * normal_draw(rng));
    c.mean = std::clamp(c.mean + mean_shift, 0.0, 99.0);
    c.stddev = std::max(0.3, c.stddev * std_scale);
  }
  return out;
}

long long choose2(long long n) { return n * (n - 1) / 2; }

}  // namespace

std::array<double, kAgeBins> discrete_age_pmf(
    std::span<const ComponentSpec> components,
    const std::array<double, kAgeBins>& profile) {
  validate_components(components);
  for (double w : profile) {
    if (w < 0.0) throw std::invalid_argument("negative profile weight");
  }

  std::array<double, kAgeBins> pmf{};
  for (const auto& c : components) {
    double lo_cdf = norm_cdf((0.0 - c.mean) / c.stddev);
    double hi_cdf = norm_cdf((100.0 - c.mean) / c.stddev);
    double z = hi_cdf - lo_cdf;
    if (z < 1e-12) {
      throw std::invalid_argument("component has no mass on [0, 100)");
    }
    double prev = lo_cdf;
    for (int a = 0; a < kAgeBins; ++a) {
      double next = norm_cdf((static_cast<double>(a) + 1.0 - c.mean) / c.stddev);
      pmf[static_cast<std::size_t>(a)] += c.weight * (next - prev) / z;
      prev = next;
    }
  }

  double total = 0.0;
  for (int a = 0; a < kAgeBins; ++a) {
    pmf[static_cast<std::size_t>(a)] *= profile[static_cast<std::size_t>(a)];
    total += pmf[static_cast<std::size_t>(a)];
  }
  if (total < 1e-12) {
    throw std::invalid_argument("profile leaves the template with no mass");
  }
  for (auto& p : pmf) p /= total;
  return pmf;
}

double truncated_mixture_pdf(std::span<const ComponentSpec> components, double x) {
  validate_components(components);
  if (x < 0.0 || x > 100.0) return 0.0;
  double f = 0.0;
  for (const auto& c : components) {
    double z = norm_cdf((100.0 - c.mean) / c.stddev) - norm_cdf((0.0 - c.mean) / c.stddev);
    if (z < 1e-12) continue;
    f += c.weight * norm_pdf((x - c.mean) / c.stddev) / (c.stddev * z);
  }
  return f;
}

Icd10Category synthetic_code(int index) {
  if (index < 0 || index >= 26 * 100) {
    throw std::invalid_argument("synthetic code index out of range");
  }
  char buf[4] = {static_cast<char>('A' + index / 100),
                 static_cast<char>('0' + (index / 10) % 10),
                 static_cast<char>('0' + index % 10), '\0'};
  return Icd10Category(buf);
}

GeneratedPopulation generate_population(const PopulationSpec& spec) {
  if (spec.clusters.empty()) throw std::invalid_argument("spec has no clusters");
  if (spec.noise_level < 0.0) throw std::invalid_argument("negative noise_level");
  if (spec.visits_min < 1 || spec.visits_max < spec.visits_min) {
    throw std::invalid_argument("bad visits range");
  }
  for (const auto& cl : spec.clusters) {
    validate_components(cl.components);
    if (cl.n_codes < 1) throw std::invalid_argument("cluster needs >= 1 code");
    if (cl.patients_min < 1 || cl.patients_max < cl.patients_min) {
      throw std::invalid_argument("bad patients range");
    }
  }

  GeneratedPopulation out;
  const Date window_start{2013, 3, 1};
  int code_index = 0;
  for (std::size_t cluster_id = 0; cluster_id < spec.clusters.size(); ++cluster_id) {
    const auto& cl = spec.clusters[cluster_id];
    for (int local = 0; local < cl.n_codes; ++local, ++code_index) {
      Icd10Category code = synthetic_code(code_index);
      std::mt19937_64 rng(splitmix64(spec.seed + static_cast<std::uint64_t>(code_index)));

      auto components = perturb_components(cl.components, spec.noise_level, rng);
      auto pmf = discrete_age_pmf(components, spec.population_age_profile);

      int n_patients = cl.patients_min;
      if (cl.patients_max > cl.patients_min) {
        n_patients += static_cast<int>(
            bounded(rng, static_cast<std::uint64_t>(cl.patients_max - cl.patients_min + 1)));
      }

      for (int p = 0; p < n_patients; ++p) {
        std::string patient = code.str() + "-" + std::to_string(p);
        int age = sample_from_pmf(pmf, rng);
        int day_offset = static_cast<int>(bounded(rng, 365));
        Date first{window_start.year, window_start.month, 1 + day_offset % 28};
        first.month = 1 + (window_start.month - 1 + day_offset / 28) % 12;

        int n_visits = spec.visits_min;
        if (spec.visits_max > spec.visits_min) {
          n_visits += static_cast<int>(bounded(
              rng, static_cast<std::uint64_t>(spec.visits_max - spec.visits_min + 1)));
        }
        out.records.push_back({patient, age, code, first});
        for (int v = 1; v < n_visits; ++v) {
          // Later visits may fall in the next year of life; dedup must keep
          // the first-visit age.
          int bump = static_cast<int>(bounded(rng, 2));
          Date later = first;
          later.month = 1 + (later.month - 1 + v) % 12;
          later.year += bump;
          out.records.push_back({patient, age + bump, code, later});
        }
      }

      out.truth.cluster_of.emplace(code, static_cast<int>(cluster_id));
      out.truth.components_of.emplace(code, std::move(components));
    }
  }
  return out;
}

double adjusted_rand_index(std::span<const int> labels_a,
                           std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw std::invalid_argument("partitions must have equal length");
  }
  auto n = static_cast<long long>(labels_a.size());
  if (n == 0) throw std::invalid_argument("empty partitions");
  if (n == 1) return 1.0;  // single-item partitions are identical

  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> rows, cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++cells[{labels_a[i], labels_b[i]}];
    ++rows[labels_a[i]];
    ++cols[labels_b[i]];
  }

  double index = 0.0, row_sum = 0.0, col_sum = 0.0;
  for (const auto& [key, count] : cells) index += static_cast<double>(choose2(count));
  for (const auto& [key, count] : rows) row_sum += static_cast<double>(choose2(count));
  for (const auto& [key, count] : cols) col_sum += static_cast<double>(choose2(count));

  double expected = row_sum * col_sum / static_cast<double>(choose2(n));
  double max_index = 0.5 * (row_sum + col_sum);
  double denom = max_index - expected;
  if (std::abs(denom) < 1e-12) {
    // Both partitions trivial (all singletons or one block): identical by
    // construction.
    return 1.0;
  }
  return (index - expected) / denom;
}

std::array<double, kAgeBins> uniform_age_profile() {
  std::array<double, kAgeBins> profile;
  profile.fill(1.0);
  return profile;
}

std::array<double, kAgeBins> adult_age_profile() {
  std::array<double, kAgeBins> profile;
  for (int a = 0; a < kAgeBins; ++a) {
    double z = (static_cast<double>(a) - 32.0) / 15.0;
    profile[static_cast<std::size_t>(a)] = 0.25 + std::exp(-0.5 * z * z);
  }
  return profile;
}

PopulationSpec default_six_cluster_spec(std::uint64_t seed) {
  PopulationSpec spec;
  spec.seed = seed;
  spec.noise_level = 1.0;
  spec.visits_min = 1;
  spec.visits_max = 3;
  spec.population_age_profile = adult_age_profile();

  auto cluster = [](std::string name, std::vector<ComponentSpec> comps) {
    ClusterTemplate t;
    t.name = std::move(name);
    t.components = std::move(comps);
    t.n_codes = 30;
    t.patients_min = 200;
    t.patients_max = 200;
    return t;
  };
  // Mixture means: 3, 19, 34, 50, 67, 85 -- consecutive gaps >= 15 years;
  // every component stddev <= 5.
  spec.clusters.push_back(cluster("infant", {{3.0, 4.0, 1.0}}));
  spec.clusters.push_back(cluster("youth", {{19.0, 5.0, 1.0}}));
  spec.clusters.push_back(cluster("thirties", {{34.0, 3.0, 1.0}}));
  spec.clusters.push_back(cluster("broad_adult", {{35.0, 5.0, 0.25},
                                                  {45.0, 5.0, 0.25},
                                                  {55.0, 5.0, 0.25},
                                                  {65.0, 5.0, 0.25}}));
  spec.clusters.push_back(cluster("sixties", {{67.0, 5.0, 1.0}}));
  spec.clusters.push_back(cluster("eighties", {{85.0, 4.0, 1.0}}));
  return spec;
}

void write_records_csv(std::ostream& out, std::span<const VisitRecord> records) {
  out << "patient_id,age,code,visit_date\n";
  for (const auto& r : records) {
    out << r.patient_id << ',' << r.age << ',' << r.code.str() << ','
        << (r.visit_date ? r.visit_date->str() : std::string()) << '\n';
  }
}

void write_truth_csv(std::ostream& out, const PlantedTruth& truth) {
  out << "code,cluster_id\n";
  for (const auto& [code, cluster] : truth.cluster_of) {
    out << code.str() << ',' << cluster << '\n';
  }
}

namespace {

nlohmann::json components_to_json(std::span<const ComponentSpec> comps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : comps) {
    arr.push_back({{"mean", c.mean}, {"std", c.stddev}, {"weight", c.weight}});
  }
  return arr;
}

std::vector<ComponentSpec> components_from_json(const nlohmann::json& arr) {
  std::vector<ComponentSpec> out;
  for (const auto& c : arr) {
    out.push_back({c.at("mean").get<double>(), c.at("std").get<double>(),
                   c.value("weight", 1.0)});
  }
  return out;
}

}  // namespace

std::string population_spec_to_json(const PopulationSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["noise_level"] = spec.noise_level;
  j["visits"] = {spec.visits_min, spec.visits_max};
  j["rng"] = kRngAlgorithm;
  j["profile"] = spec.population_age_profile;
  j["clusters"] = nlohmann::json::array();
  for (const auto& cl : spec.clusters) {
    j["clusters"].push_back({{"name", cl.name},
                             {"codes", cl.n_codes},
                             {"patients", {cl.patients_min, cl.patients_max}},
                             {"components", components_to_json(cl.components)}});
  }
  return j.dump(2);
}

PopulationSpec population_spec_from_json(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  PopulationSpec spec;
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.noise_level = j.value("noise_level", 0.0);
  if (j.contains("visits")) {
    spec.visits_min = j["visits"].at(0).get<int>();
    spec.visits_max = j["visits"].at(1).get<int>();
  }
  if (!j.contains("profile") || j["profile"] == "adult") {
    spec.population_age_profile = adult_age_profile();
  } else if (j["profile"] == "uniform") {
    spec.population_age_profile = uniform_age_profile();
  } else {
    auto values = j["profile"].get<std::vector<double>>();
    if (values.size() != kAgeBins) {
      throw std::invalid_argument("profile must list exactly 100 weights");
    }
    std::copy(values.begin(), values.end(), spec.population_age_profile.begin());
  }
  for (const auto& cl : j.at("clusters")) {
    ClusterTemplate t;
    t.name = cl.value("name", std::string("cluster"));
    t.n_codes = cl.at("codes").get<int>();
    t.patients_min = cl.at("patients").at(0).get<int>();
    t.patients_max = cl.at("patients").at(1).get<int>();
    t.components = components_from_json(cl.at("components"));
    spec.clusters.push_back(std::move(t));
  }
  return spec;
}

}  // namespace agesig
