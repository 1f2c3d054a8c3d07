#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "agesig/ingest.hpp"
#include "agesig/mathutil.hpp"
#include "agesig/signature.hpp"
#include "agesig/synth.hpp"

using namespace agesig;

namespace {

PopulationSpec small_spec(std::uint64_t seed, int clusters, int codes, int patients) {
  PopulationSpec spec = default_six_cluster_spec(seed);
  spec.clusters.resize(static_cast<std::size_t>(clusters));
  for (auto& cl : spec.clusters) {
    cl.n_codes = codes;
    cl.patients_min = patients;
    cl.patients_max = patients;
  }
  return spec;
}

// Independent pair-counting route: classify every item pair as together or
// apart in each partition.
double pairwise_ari(std::span<const int> a, std::span<const int> b) {
  auto n = a.size();
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool same_a = a[i] == a[j];
      bool same_b = b[i] == b[j];
      n11 += same_a && same_b;
      n00 += !same_a && !same_b;
      n10 += same_a && !same_b;
      n01 += !same_a && same_b;
    }
  }
  double total = n11 + n00 + n10 + n01;
  double expected = (n11 + n10) * (n11 + n01) / total;
  double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
  if (std::abs(max_index - expected) < 1e-12) return 1.0;
  return (n11 - expected) / (max_index - expected);
}

}  // namespace

TEST_CASE("synthetic codes enumerate the category space") {
  CHECK(synthetic_code(0).str() == "A00");
  CHECK(synthetic_code(99).str() == "A99");
  CHECK(synthetic_code(100).str() == "B00");
  CHECK(synthetic_code(599).str() == "F99");
  CHECK(synthetic_code(2599).str() == "Z99");
  CHECK_THROWS_AS(synthetic_code(2600), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_code(-1), std::invalid_argument);
}

TEST_CASE("generation is a pure function of the spec") {
  PopulationSpec spec = small_spec(99, 3, 4, 30);
  GeneratedPopulation a = generate_population(spec);
  GeneratedPopulation b = generate_population(spec);

  std::ostringstream csv_a, csv_b;
  write_records_csv(csv_a, a.records);
  write_records_csv(csv_b, b.records);
  CHECK(csv_a.str() == csv_b.str());

  GeneratedPopulation c = generate_population(small_spec(100, 3, 4, 30));
  std::ostringstream csv_c;
  write_records_csv(csv_c, c.records);
  CHECK(csv_a.str() != csv_c.str());
}

TEST_CASE("generated cardinality matches the spec") {
  PopulationSpec spec = small_spec(7, 6, 30, 500);
  spec.visits_min = 1;
  spec.visits_max = 1;
  GeneratedPopulation population = generate_population(spec);

  CHECK(population.truth.cluster_of.size() == 180);
  CHECK(population.records.size() == 180u * 500u);

  auto build = build_cohorts(population.records, 1);
  REQUIRE(build.cohorts.size() == 180);
  for (const auto& [code, cohort] : build.cohorts) {
    CHECK(cohort.patient_count() == 500);
  }
}

TEST_CASE("duplicate visits keep the first-visit age after dedup") {
  PopulationSpec spec = small_spec(21, 2, 3, 50);
  spec.visits_min = 2;
  spec.visits_max = 4;
  GeneratedPopulation population = generate_population(spec);
  CHECK(population.records.size() > 2u * 3u * 50u);

  // Per (code, patient): min age over the visit group, and the age on the
  // chronologically earliest visit. Both must match the deduped cohort.
  std::map<std::pair<std::string, std::string>, std::pair<int, std::pair<Date, int>>>
      groups;
  for (const auto& rec : population.records) {
    REQUIRE(rec.visit_date.has_value());
    auto key = std::make_pair(rec.code.str(), rec.patient_id);
    auto it = groups.find(key);
    if (it == groups.end()) {
      groups.emplace(key, std::make_pair(rec.age, std::make_pair(*rec.visit_date, rec.age)));
    } else {
      it->second.first = std::min(it->second.first, rec.age);
      if (*rec.visit_date < it->second.second.first) {
        it->second.second = {*rec.visit_date, rec.age};
      }
    }
  }

  auto build = build_cohorts(population.records, 1);
  std::size_t checked = 0;
  for (const auto& [code, cohort] : build.cohorts) {
    for (const auto& member : cohort.members()) {
      const auto& group = groups.at({code.str(), member.patient_id});
      CHECK(member.age == group.first);                // min age
      CHECK(member.age == group.second.second);        // earliest-visit age
      ++checked;
    }
  }
  CHECK(checked == groups.size());
}

TEST_CASE("same-cluster signatures converge as patients grow") {
  PopulationSpec spec = small_spec(5, 1, 2, 10000);
  spec.noise_level = 0.0;
  spec.visits_min = 1;
  spec.visits_max = 1;

  auto distance_at = [&](int patients) {
    for (auto& cl : spec.clusters) {
      cl.patients_min = patients;
      cl.patients_max = patients;
    }
    GeneratedPopulation population = generate_population(spec);
    auto build = build_cohorts(population.records, 1);
    std::vector<AgeSignature> sigs;
    for (const auto& [code, cohort] : build.cohorts) {
      sigs.push_back(build_signature(cohort));
    }
    REQUIRE(sigs.size() == 2);
    return signature_distance(sigs[0], sigs[1]);
  };

  double d_small = distance_at(10000);
  double d_large = distance_at(100000);
  CHECK(d_large < d_small);
  CHECK(d_large < 0.02);
}

TEST_CASE("discrete pmf respects the population profile") {
  std::vector<ComponentSpec> comps{{50.0, 10.0, 1.0}};
  auto uniform_pmf = discrete_age_pmf(comps, uniform_age_profile());
  double sum = 0.0;
  for (double p : uniform_pmf) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  std::array<double, kAgeBins> gated{};
  for (int a = 40; a < 60; ++a) gated[static_cast<std::size_t>(a)] = 1.0;
  auto gated_pmf = discrete_age_pmf(comps, gated);
  for (int a = 0; a < kAgeBins; ++a) {
    if (a < 40 || a >= 60) CHECK(gated_pmf[static_cast<std::size_t>(a)] == 0.0);
  }
}

TEST_CASE("invalid specs are rejected") {
  std::vector<ComponentSpec> bad_weights{{30.0, 5.0, 0.4}, {60.0, 5.0, 0.4}};
  CHECK_THROWS_AS(discrete_age_pmf(bad_weights, uniform_age_profile()),
                  std::invalid_argument);

  PopulationSpec spec = small_spec(1, 1, 1, 10);
  spec.clusters[0].components[0].weight = 0.5;
  CHECK_THROWS_AS(generate_population(spec), std::invalid_argument);

  PopulationSpec empty;
  empty.population_age_profile = uniform_age_profile();
  CHECK_THROWS_AS(generate_population(empty), std::invalid_argument);

  PopulationSpec bad_range = small_spec(1, 1, 1, 10);
  bad_range.clusters[0].patients_max = 5;
  CHECK_THROWS_AS(generate_population(bad_range), std::invalid_argument);
}

TEST_CASE("truncated mixture pdf integrates to one") {
  std::vector<ComponentSpec> comps{{3.0, 4.0, 0.6}, {85.0, 4.0, 0.4}};
  double integral = 0.0;
  double step = 0.01;
  for (double x = 0.0; x < 100.0; x += step) {
    integral += step * 0.5 *
                (truncated_mixture_pdf(comps, x) +
                 truncated_mixture_pdf(comps, std::min(100.0, x + step)));
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("adjusted rand index matches hand-computed cases") {
  std::vector<int> a{0, 0, 1, 1};
  CHECK(adjusted_rand_index(a, a) == 1.0);

  std::vector<int> renamed{7, 7, 3, 3};
  CHECK(adjusted_rand_index(a, renamed) == 1.0);

  std::vector<int> crossed{0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, crossed) == doctest::Approx(-0.5).epsilon(1e-12));

  std::vector<int> b{0, 1, 2};
  CHECK_THROWS_AS(adjusted_rand_index(a, b), std::invalid_argument);
}

TEST_CASE("adjusted rand index agrees with pairwise counting") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + bounded(rng, 40);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(bounded(rng, 5));
      b[i] = static_cast<int>(bounded(rng, 5));
    }
    double fast = adjusted_rand_index(a, b);
    double slow = pairwise_ari(a, b);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    CHECK(adjusted_rand_index(b, a) == doctest::Approx(fast).epsilon(1e-12));
    CHECK(fast >= -1.0);
    CHECK(fast <= 1.0);
  }
}

TEST_CASE("population spec json round-trips") {
  PopulationSpec spec = default_six_cluster_spec(42);
  std::string json = population_spec_to_json(spec);
  std::istringstream in(json);
  PopulationSpec back = population_spec_from_json(in);

  CHECK(back.seed == spec.seed);
  CHECK(back.noise_level == spec.noise_level);
  CHECK(back.visits_min == spec.visits_min);
  CHECK(back.visits_max == spec.visits_max);
  CHECK(back.population_age_profile == spec.population_age_profile);
  REQUIRE(back.clusters.size() == spec.clusters.size());
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    CHECK(back.clusters[c].name == spec.clusters[c].name);
    CHECK(back.clusters[c].n_codes == spec.clusters[c].n_codes);
    REQUIRE(back.clusters[c].components.size() == spec.clusters[c].components.size());
    for (std::size_t i = 0; i < spec.clusters[c].components.size(); ++i) {
      CHECK(back.clusters[c].components[i].mean == spec.clusters[c].components[i].mean);
      CHECK(back.clusters[c].components[i].stddev ==
            spec.clusters[c].components[i].stddev);
    }
  }

  GeneratedPopulation p1 = generate_population(spec);
  GeneratedPopulation p2 = generate_population(back);
  CHECK(p1.records.size() == p2.records.size());
  CHECK(p1.truth.cluster_of == p2.truth.cluster_of);
}
