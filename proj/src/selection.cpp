#include "agesig/selection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "agesig/textio.hpp"

namespace agesig {

double within_cluster_sse(std::span<const AgeSignature> signatures,
                          std::span<const int> labels) {
  if (signatures.size() != labels.size()) {
    throw std::invalid_argument("labels must cover all signatures");
  }
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);

  std::vector<std::array<double, kAgeBins>> centroids(
      static_cast<std::size_t>(k), std::array<double, kAgeBins>{});
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (int j = 0; j < kAgeBins; ++j) centroids[c][j] += signatures[i].mass[j];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    for (int j = 0; j < kAgeBins; ++j) {
      centroids[c][j] /= static_cast<double>(counts[c]);
    }
  }

  double sse = 0.0;
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    const auto& centroid = centroids[static_cast<std::size_t>(labels[i])];
    for (int j = 0; j < kAgeBins; ++j) {
      double d = signatures[i].mass[j] - centroid[j];
      sse += d * d;
    }
  }
  return sse;
}

ElbowCurve dispersion_curve(std::span<const AgeSignature> signatures,
                            const Dendrogram& dendrogram, int k_max) {
  if (static_cast<int>(signatures.size()) != dendrogram.n_leaves) {
    throw std::invalid_argument("dendrogram does not match signature count");
  }
  if (k_max < 1 || k_max > dendrogram.n_leaves) {
    throw std::invalid_argument("k_max must be in [1, n_leaves]");
  }

  ElbowCurve curve;
  for (int k = 1; k <= k_max; ++k) {
    auto labels = cut_tree(dendrogram, k);
    curve.k_values.push_back(k);
    curve.dispersion.push_back(within_cluster_sse(signatures, labels));
  }
  return curve;
}

std::vector<double> chord_distances(const ElbowCurve& curve) {
  std::size_t m = curve.k_values.size();
  std::vector<double> out(m, 0.0);
  if (m < 3) return out;

  double x_range = static_cast<double>(curve.k_values.back() - curve.k_values.front());
  double y_range = curve.dispersion.front() - curve.dispersion.back();
  if (x_range <= 0.0 || y_range <= 0.0) return out;  // flat curve: no knee

  // Normalized chord runs from (0,1) to (1,0); the perpendicular distance of
  // (x,y) to it is |x + y - 1| / sqrt(2).
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    double x = static_cast<double>(curve.k_values[i] - curve.k_values.front()) / x_range;
    double y = (curve.dispersion[i] - curve.dispersion.back()) / y_range;
    out[i] = std::abs(x + y - 1.0) * inv_sqrt2;
  }
  return out;
}

int select_k(const ElbowCurve& curve) {
  if (curve.k_values.size() < 3) {
    throw std::invalid_argument("elbow selection needs at least 3 curve points");
  }
  auto dists = chord_distances(curve);
  std::size_t best = 0;
  double best_dist = 0.0;
  for (std::size_t i = 1; i + 1 < dists.size(); ++i) {
    if (dists[i] > best_dist) {
      best_dist = dists[i];
      best = i;
    }
  }
  if (best_dist < 1e-12) {
    throw DegenerateElbowError("dispersion curve has no knee");
  }
  return curve.k_values[best];
}

void write_elbow_csv(std::ostream& out, const ElbowCurve& curve) {
  auto dists = chord_distances(curve);
  out << "k,dispersion,chord_distance,selected\n";
  for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
    bool selected = curve.selected_k && *curve.selected_k == curve.k_values[i];
    out << curve.k_values[i] << ',' << format_double(curve.dispersion[i]) << ','
        << format_double(dists[i]) << ',' << (selected ? 1 : 0) << '\n';
  }
}

}  // namespace agesig
