#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "agesig/types.hpp"

namespace agesig {

// One truncated-normal component of an age-distribution template.
struct ComponentSpec {
  double mean = 0.0;
  double stddev = 1.0;
  double weight = 1.0;
};

// A planted cluster: codes in it share one template, perturbed per code.
struct ClusterTemplate {
  std::string name;
  std::vector<ComponentSpec> components;  // weights sum to 1
  int n_codes = 1;
  int patients_min = 1;
  int patients_max = 1;
};

struct PopulationSpec {
  std::vector<ClusterTemplate> clusters;
  // Sampling weights over integer ages; scales each template so generated
  // cohorts reflect a non-uniform population pyramid.
  std::array<double, kAgeBins> population_age_profile{};
  std::uint64_t seed = 0;
  double noise_level = 0.0;  // scale of per-code template perturbation
  int visits_min = 1;        // visits per patient; extra visits exercise dedup
  int visits_max = 1;
};

struct PlantedTruth {
  std::map<Icd10Category, int> cluster_of;
  std::map<Icd10Category, std::vector<ComponentSpec>> components_of;
};

struct GeneratedPopulation {
  std::vector<VisitRecord> records;
  PlantedTruth truth;
};

// Recorded in output metadata so runs can be reproduced.
inline constexpr const char* kRngAlgorithm = "mt19937_64(splitmix64(seed+code_index))";

// Discrete age distribution of one template under a population profile:
// the mass of each truncated-normal component over [a, a+1), scaled by
// profile[a] and normalized. Throws std::invalid_argument for bad weights,
// nonpositive stddev, or a template with no mass on [0, 100).
std::array<double, kAgeBins> discrete_age_pmf(
    std::span<const ComponentSpec> components,
    const std::array<double, kAgeBins>& profile);

// Continuous density of the mixture truncated to [0, 100]; ground truth for
// density-estimation checks.
double truncated_mixture_pdf(std::span<const ComponentSpec> components, double x);

// Per-code ages are drawn from the cluster template perturbed by
// noise_level; every code derives its own RNG stream from (seed, code
// index), so output is a pure function of the spec. Codes are assigned
// sequentially: A00, A01, ... Patients get one or more visits; repeated
// visits never lower the first-visit age.
GeneratedPopulation generate_population(const PopulationSpec& spec);

// Chance-corrected pair-counting agreement between two partitions of the
// same items; 1 for identical partitions (up to label renaming).
double adjusted_rand_index(std::span<const int> labels_a,
                           std::span<const int> labels_b);

// Six templates with well-separated mixture means (>= 15 years apart):
// infant-skewed, youth, narrow thirties, broad adulthood, sixties, eighties.
// 30 codes per cluster, 200 patients per code.
PopulationSpec default_six_cluster_spec(std::uint64_t seed = 1337);

std::array<double, kAgeBins> uniform_age_profile();
// Hump centered on early/middle adulthood.
std::array<double, kAgeBins> adult_age_profile();

// The same delimited-text record format ingest consumes:
// "patient_id,age,code,visit_date".
void write_records_csv(std::ostream& out, std::span<const VisitRecord> records);
// "code,cluster_id".
void write_truth_csv(std::ostream& out, const PlantedTruth& truth);

PopulationSpec population_spec_from_json(std::istream& in);
std::string population_spec_to_json(const PopulationSpec& spec);

// Sequential synthetic code namespace: index 0 -> A00, 1 -> A01, ...
Icd10Category synthetic_code(int index);

}  // namespace agesig
