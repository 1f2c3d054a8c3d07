#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "agesig/hac.hpp"

namespace agesig {

// Within-cluster dispersion over candidate cluster counts.
struct ElbowCurve {
  std::vector<int> k_values;       // 1..k_max
  std::vector<double> dispersion;  // W(k), nonincreasing
  std::optional<int> selected_k;
};

// W(k) = sum over the k-cut's clusters of the squared distances of members
// to their cluster centroid, computed directly from the signatures. Ward
// heights telescope against it: W(k) = W(k+1) + height of the undone merge.
// Requires k_max <= n_leaves and a dendrogram built from these signatures.
ElbowCurve dispersion_curve(std::span<const AgeSignature> signatures,
                            const Dendrogram& dendrogram, int k_max);

// Distance of each curve point to the chord between the curve's endpoints,
// after min-max normalization of both axes. Zero at the endpoints.
std::vector<double> chord_distances(const ElbowCurve& curve);

// Knee of the curve: the interior k with maximal chord distance, ties toward
// smaller k. Throws std::invalid_argument for curves with fewer than three
// points and DegenerateElbowError when every interior chord distance is
// below 1e-12 (exactly linear or flat curve).
int select_k(const ElbowCurve& curve);

// "k,dispersion,chord_distance,selected" rows for plotting.
void write_elbow_csv(std::ostream& out, const ElbowCurve& curve);

// Total squared distance of each signature to its cluster centroid; the
// direct route used by dispersion_curve, shared with tests.
double within_cluster_sse(std::span<const AgeSignature> signatures,
                          std::span<const int> labels);

}  // namespace agesig
