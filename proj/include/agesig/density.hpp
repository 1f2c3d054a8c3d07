#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "agesig/signature.hpp"

namespace agesig {

// Gaussian-kernel density estimate sampled on an even grid over [0, 100].
// No boundary correction at age 0, so the trapezoidal integral may fall
// slightly short of 1 (kernel tails leak past the grid).
struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

// f(x) = 1/(n h) * sum_i K((x - age_i)/h) with a Gaussian kernel.
// bandwidth == nullopt selects Silverman's rule
//   h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5)
// which requires >= 2 ages; a sample whose spread collapses the rule to zero
// raises ZeroBandwidthError (pass an explicit bandwidth instead).
DensityCurve kde(std::span<const int> ages, double grid_step,
                 std::optional<double> bandwidth);

double trapezoid_integral(const DensityCurve& curve);

// Running sum of an age signature's mass; nondecreasing with final value 1.
struct EcdfVector {
  std::array<double, kAgeBins> values{};
};

EcdfVector ecdf(const AgeSignature& signature);

// Pointwise arithmetic mean; the mean of valid ECDFs is itself valid.
EcdfVector cluster_mean_ecdf(std::span<const EcdfVector> members);

// "x,y" rows for plotting.
void write_curve_csv(std::ostream& out, const DensityCurve& curve);

}  // namespace agesig
