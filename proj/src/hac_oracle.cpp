#include <stdexcept>
#include <vector>

#include "agesig/hac.hpp"

namespace agesig {

namespace {

struct OracleCluster {
  int id = 0;
  std::vector<int> leaves;
};

// Ward merge cost from scratch: centroids are recomputed from the raw
// signature vectors on every evaluation.
double centroid_merge_cost(std::span<const AgeSignature> sigs,
                           const OracleCluster& a, const OracleCluster& b) {
  std::array<double, kAgeBins> ca{};
  std::array<double, kAgeBins> cb{};
  for (int leaf : a.leaves) {
    for (int i = 0; i < kAgeBins; ++i) ca[i] += sigs[leaf].mass[i];
  }
  for (int leaf : b.leaves) {
    for (int i = 0; i < kAgeBins; ++i) cb[i] += sigs[leaf].mass[i];
  }
  double na = static_cast<double>(a.leaves.size());
  double nb = static_cast<double>(b.leaves.size());
  double sq = 0.0;
  for (int i = 0; i < kAgeBins; ++i) {
    double d = ca[i] / na - cb[i] / nb;
    sq += d * d;
  }
  return na * nb / (na + nb) * sq;
}

}  // namespace

Dendrogram naive_ward_oracle(std::span<const AgeSignature> signatures) {
  int n = static_cast<int>(signatures.size());
  if (n == 0) throw EmptyInputError("no signatures to cluster");
  if (n > 64) throw std::invalid_argument("oracle is restricted to n <= 64");

  Dendrogram out;
  out.n_leaves = n;
  out.leaf_codes.reserve(signatures.size());
  for (const auto& sig : signatures) out.leaf_codes.push_back(sig.code);

  std::vector<OracleCluster> alive;
  alive.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) alive.push_back({i, {i}});

  for (int t = 0; t < n - 1; ++t) {
    std::size_t best_a = 0, best_b = 1;
    double best_cost = 0.0;
    bool have = false;
    for (std::size_t p = 0; p + 1 < alive.size(); ++p) {
      for (std::size_t q = p + 1; q < alive.size(); ++q) {
        double cost = centroid_merge_cost(signatures, alive[p], alive[q]);
        int lo = std::min(alive[p].id, alive[q].id);
        int hi = std::max(alive[p].id, alive[q].id);
        int cur_lo = std::min(alive[best_a].id, alive[best_b].id);
        int cur_hi = std::max(alive[best_a].id, alive[best_b].id);
        if (!have || cost < best_cost ||
            (cost == best_cost &&
             (lo < cur_lo || (lo == cur_lo && hi < cur_hi)))) {
          have = true;
          best_cost = cost;
          best_a = p;
          best_b = q;
        }
      }
    }

    OracleCluster& a = alive[best_a];
    OracleCluster& b = alive[best_b];
    out.steps.push_back({std::min(a.id, b.id), std::max(a.id, b.id), best_cost,
                         static_cast<int>(a.leaves.size() + b.leaves.size())});
    a.leaves.insert(a.leaves.end(), b.leaves.begin(), b.leaves.end());
    a.id = n + t;
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return out;
}

}  // namespace agesig
