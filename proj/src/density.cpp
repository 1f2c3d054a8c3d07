#include "agesig/density.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "agesig/mathutil.hpp"
#include "agesig/textio.hpp"

namespace agesig {

namespace {

double silverman_bandwidth(std::span<const int> ages) {
  auto n = static_cast<double>(ages.size());
  std::vector<double> xs(ages.begin(), ages.end());
  double sigma = sample_stddev(xs);
  std::sort(xs.begin(), xs.end());
  double iqr = quantile_sorted(xs, 0.75) - quantile_sorted(xs, 0.25);
  return 0.9 * std::min(sigma, iqr / 1.34) * std::pow(n, -0.2);
}

}  // namespace

DensityCurve kde(std::span<const int> ages, double grid_step,
                 std::optional<double> bandwidth) {
  if (ages.empty()) throw std::invalid_argument("kde: empty age sample");
  if (!(grid_step > 0.0) || grid_step > 100.0) {
    throw std::invalid_argument("kde: grid_step must be in (0, 100]");
  }

  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  } else {
    if (ages.size() < 2) {
      throw std::invalid_argument("kde: automatic bandwidth needs >= 2 ages");
    }
    h = silverman_bandwidth(ages);
    if (!(h > 0.0)) {
      throw ZeroBandwidthError(
          "sample spread is degenerate; pass an explicit bandwidth");
    }
  }

  // Ages are small integers: accumulate a histogram once so evaluation is
  // O(#distinct ages * grid) and independent of sample order.
  int max_age = *std::max_element(ages.begin(), ages.end());
  int min_age = *std::min_element(ages.begin(), ages.end());
  if (min_age < 0) throw std::invalid_argument("kde: negative age");
  std::vector<double> hist(static_cast<std::size_t>(max_age) + 1, 0.0);
  for (int a : ages) hist[static_cast<std::size_t>(a)] += 1.0;

  DensityCurve curve;
  curve.bandwidth = h;
  auto npts = static_cast<std::size_t>(std::floor(100.0 / grid_step)) + 1;
  curve.grid.resize(npts);
  curve.values.resize(npts);
  double norm = 1.0 / (static_cast<double>(ages.size()) * h);
  for (std::size_t g = 0; g < npts; ++g) {
    double x = static_cast<double>(g) * grid_step;
    double acc = 0.0;
    for (std::size_t a = 0; a < hist.size(); ++a) {
      if (hist[a] == 0.0) continue;
      acc += hist[a] * norm_pdf((x - static_cast<double>(a)) / h);
    }
    curve.grid[g] = x;
    curve.values[g] = acc * norm;
  }
  return curve;
}

double trapezoid_integral(const DensityCurve& curve) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < curve.grid.size(); ++i) {
    acc += 0.5 * (curve.values[i] + curve.values[i + 1]) *
           (curve.grid[i + 1] - curve.grid[i]);
  }
  return acc;
}

EcdfVector ecdf(const AgeSignature& signature) {
  EcdfVector out;
  double running = 0.0;
  for (int i = 0; i < kAgeBins; ++i) {
    running += signature.mass[static_cast<std::size_t>(i)];
    out.values[static_cast<std::size_t>(i)] = running;
  }
  return out;
}

EcdfVector cluster_mean_ecdf(std::span<const EcdfVector> members) {
  if (members.empty()) {
    throw std::invalid_argument("cluster_mean_ecdf: no members");
  }
  EcdfVector out;
  for (const auto& m : members) {
    for (int i = 0; i < kAgeBins; ++i) out.values[i] += m.values[i];
  }
  for (int i = 0; i < kAgeBins; ++i) {
    out.values[i] /= static_cast<double>(members.size());
  }
  return out;
}

void write_curve_csv(std::ostream& out, const DensityCurve& curve) {
  out << "x,y\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << format_double(curve.grid[i]) << ',' << format_double(curve.values[i])
        << '\n';
  }
}

}  // namespace agesig
