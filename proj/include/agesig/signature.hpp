#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "agesig/types.hpp"

namespace agesig {

// Length-100 probability-mass vector over integer ages 0..99. Index i is
// age i (bin 0 = infants under one year); ages >= 100 are clamped into the
// last bin so total mass is preserved.
struct AgeSignature {
  Icd10Category code;
  std::array<double, kAgeBins> mass{};
  int support = 0;  // patients behind the estimate
};

// mass[i] = (# members with min(age,99) == i) / patient_count.
// Throws EmptyCohortError for an empty cohort.
AgeSignature build_signature(const Cohort& cohort);

// Euclidean distance between the two mass vectors.
double signature_distance(const AgeSignature& a, const AgeSignature& b);

double squared_signature_distance(const AgeSignature& a, const AgeSignature& b);

// "code,mass_0,...,mass_99,support" with a header row; stable column order.
void write_signatures_csv(std::ostream& out, std::span<const AgeSignature> sigs);
std::vector<AgeSignature> read_signatures_csv(std::istream& in);

}  // namespace agesig
