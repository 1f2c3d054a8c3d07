#include "agesig/hac.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "agesig/textio.hpp"

namespace agesig {

namespace {

// Identifier pair in canonical (lo, hi) order; the tie-break key.
struct IdPair {
  int lo = 0;
  int hi = 0;
  friend auto operator<=>(const IdPair&, const IdPair&) = default;
};

IdPair make_pair_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

bool better(double cost, IdPair key, double ref_cost, IdPair ref_key) {
  return cost < ref_cost || (cost == ref_cost && key < ref_key);
}

// Condensed upper-triangular index for slots i < j over n initial slots.
class CostMatrix {
 public:
  explicit CostMatrix(std::size_t n)
      : n_(n), data_(n * (n - 1) / 2, 0.0) {}

  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return data_[(2 * n_ - 3 - i) * i / 2 + j - 1];
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace

Dendrogram ward_cluster(std::span<const AgeSignature> signatures) {
  int n = static_cast<int>(signatures.size());
  if (n == 0) throw EmptyInputError("no signatures to cluster");

  Dendrogram out;
  out.n_leaves = n;
  out.leaf_codes.reserve(signatures.size());
  for (const auto& sig : signatures) out.leaf_codes.push_back(sig.code);
  if (n == 1) return out;

  auto un = static_cast<std::size_t>(n);
  std::vector<int> ids(un);
  std::vector<int> sizes(un, 1);
  std::vector<char> alive(un, 1);
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;

  CostMatrix costs(un);
  for (std::size_t i = 0; i + 1 < un; ++i) {
    for (std::size_t j = i + 1; j < un; ++j) {
      // Singleton pair: delta = d^2 / 2.
      costs.at(i, j) = 0.5 * squared_signature_distance(signatures[i], signatures[j]);
    }
  }

  // Per-slot nearest neighbor under the (cost, id-pair) order.
  std::vector<std::size_t> nn_slot(un, 0);
  std::vector<double> nn_cost(un, 0.0);
  auto recompute_row = [&](std::size_t i) {
    bool have = false;
    double best_cost = 0.0;
    IdPair best_key{};
    std::size_t best_j = i;
    for (std::size_t j = 0; j < un; ++j) {
      if (j == i || !alive[j]) continue;
      double c = costs.at(i, j);
      IdPair key = make_pair_key(ids[i], ids[j]);
      if (!have || better(c, key, best_cost, best_key)) {
        have = true;
        best_cost = c;
        best_key = key;
        best_j = j;
      }
    }
    nn_slot[i] = best_j;
    nn_cost[i] = best_cost;
  };
  for (std::size_t i = 0; i < un; ++i) recompute_row(i);

  out.steps.reserve(un - 1);
  std::size_t alive_count = un;
  for (int t = 0; t < n - 1; ++t) {
    // Global minimum over row caches; ties resolve to the smallest id pair.
    std::size_t best_i = un;
    double best_cost = 0.0;
    IdPair best_key{};
    for (std::size_t i = 0; i < un; ++i) {
      if (!alive[i]) continue;
      IdPair key = make_pair_key(ids[i], ids[nn_slot[i]]);
      if (best_i == un || better(nn_cost[i], key, best_cost, best_key)) {
        best_i = i;
        best_cost = nn_cost[i];
        best_key = key;
      }
    }

    std::size_t a = best_i;
    std::size_t b = nn_slot[a];
    double cost_ab = best_cost;
    int size_a = sizes[a];
    int size_b = sizes[b];
    out.steps.push_back({std::min(ids[a], ids[b]), std::max(ids[a], ids[b]),
                         cost_ab, size_a + size_b});

    std::size_t keep = std::min(a, b);
    std::size_t dead = std::max(a, b);

    // Lance-Williams for Ward on merge costs:
    // d(A+B, C) = ((|A|+|C|) d(A,C) + (|B|+|C|) d(B,C) - |C| d(A,B)) / (|A|+|B|+|C|)
    for (std::size_t k = 0; k < un; ++k) {
      if (!alive[k] || k == a || k == b) continue;
      double size_k = static_cast<double>(sizes[k]);
      double updated = ((size_a + size_k) * costs.at(k, a) +
                        (size_b + size_k) * costs.at(k, b) -
                        size_k * cost_ab) /
                       (size_a + size_b + size_k);
      costs.at(k, keep) = updated;
    }

    alive[dead] = 0;
    --alive_count;
    ids[keep] = n + t;
    sizes[keep] = size_a + size_b;
    if (alive_count == 1) break;

    recompute_row(keep);
    for (std::size_t k = 0; k < un; ++k) {
      if (!alive[k] || k == keep) continue;
      if (nn_slot[k] == a || nn_slot[k] == b) {
        recompute_row(k);
      } else if (costs.at(k, keep) < nn_cost[k]) {
        // The new cluster carries the largest id, so it can displace the
        // cached neighbor only on strictly smaller cost.
        nn_cost[k] = costs.at(k, keep);
        nn_slot[k] = keep;
      }
    }
  }
  return out;
}

std::vector<int> cut_tree(const Dendrogram& dendrogram, int k) {
  int n = dendrogram.n_leaves;
  if (k < 1 || k > n) {
    throw std::invalid_argument("cut_tree: k must be in [1, " +
                                std::to_string(n) + "], got " + std::to_string(k));
  }
  int steps_applied = n - k;
  std::vector<int> parent(static_cast<std::size_t>(n + steps_applied), -1);
  for (int t = 0; t < steps_applied; ++t) {
    const MergeStep& s = dendrogram.steps[static_cast<std::size_t>(t)];
    parent[static_cast<std::size_t>(s.left_id)] = n + t;
    parent[static_cast<std::size_t>(s.right_id)] = n + t;
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> root_label(static_cast<std::size_t>(n + steps_applied), -1);
  int next_label = 0;
  for (int leaf = 0; leaf < n; ++leaf) {
    int node = leaf;
    while (parent[static_cast<std::size_t>(node)] != -1) {
      node = parent[static_cast<std::size_t>(node)];
    }
    auto idx = static_cast<std::size_t>(node);
    if (root_label[idx] == -1) root_label[idx] = next_label++;
    labels[static_cast<std::size_t>(leaf)] = root_label[idx];
  }
  return labels;
}

void write_dendrogram(std::ostream& out, const Dendrogram& dendrogram) {
  out << "# ward dendrogram\n";
  out << "# leaves " << dendrogram.n_leaves << '\n';
  for (int i = 0; i < dendrogram.n_leaves; ++i) {
    out << "# leaf " << i << ' '
        << dendrogram.leaf_codes[static_cast<std::size_t>(i)].str() << '\n';
  }
  out << "# merge: left_id right_id height new_size\n";
  for (const auto& s : dendrogram.steps) {
    out << s.left_id << ' ' << s.right_id << ' ' << format_double(s.height)
        << ' ' << s.new_size << '\n';
  }
}

namespace {

void newick_node(std::ostream& out, const Dendrogram& d, int node,
                 double parent_height) {
  int n = d.n_leaves;
  if (node < n) {
    out << d.leaf_codes[static_cast<std::size_t>(node)].str() << ':'
        << format_double(parent_height);
    return;
  }
  const MergeStep& s = d.steps[static_cast<std::size_t>(node - n)];
  out << '(';
  newick_node(out, d, s.left_id, s.height);
  out << ',';
  newick_node(out, d, s.right_id, s.height);
  out << "):" << format_double(std::max(0.0, parent_height - s.height));
}

}  // namespace

std::string to_newick(const Dendrogram& dendrogram) {
  std::ostringstream out;
  if (dendrogram.n_leaves == 1) {
    out << dendrogram.leaf_codes[0].str() << ";";
    return out.str();
  }
  const MergeStep& root = dendrogram.steps.back();
  out << '(';
  newick_node(out, dendrogram, root.left_id, root.height);
  out << ',';
  newick_node(out, dendrogram, root.right_id, root.height);
  out << ");";
  return out.str();
}

}  // namespace agesig
