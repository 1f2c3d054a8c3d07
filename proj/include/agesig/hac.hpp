#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agesig/signature.hpp"

namespace agesig {

// One agglomeration step. Cluster ids: 0..n-1 are leaves, n+t is the cluster
// created at step t. Height is the Ward merge cost, i.e. the increase in
// total within-cluster sum of squared distances to centroids:
//   delta(A,B) = |A|*|B| / (|A|+|B|) * ||centroid(A) - centroid(B)||^2
// so a pair of singletons at Euclidean distance d merges at height d^2/2.
struct MergeStep {
  int left_id = 0;   // left_id < right_id
  int right_id = 0;
  double height = 0.0;
  int new_size = 0;
};

struct Dendrogram {
  int n_leaves = 0;
  std::vector<MergeStep> steps;  // exactly n_leaves - 1
  std::vector<Icd10Category> leaf_codes;
};

// Ward minimum-variance agglomeration over age signatures. At every step the
// pair with minimal merge cost is merged; ties break toward the smallest
// (left_id, right_id) pair. Costs between merged and surviving clusters are
// maintained with the Lance-Williams recurrence. Deterministic.
// Throws EmptyInputError when signatures is empty.
Dendrogram ward_cluster(std::span<const AgeSignature> signatures);

// Reference implementation for tests: same contract as ward_cluster, but
// every candidate cost is recomputed from raw centroids at every step, with
// no recurrence. Restricted to n <= 64 inputs.
Dendrogram naive_ward_oracle(std::span<const AgeSignature> signatures);

// Undoes the last k-1 merges and returns one label per leaf. Clusters are
// numbered 0..k-1 in order of their smallest leaf index.
std::vector<int> cut_tree(const Dendrogram& dendrogram, int k);

// Line-oriented text form: a commented leaf table followed by one merge per
// line, "left_id right_id height new_size".
void write_dendrogram(std::ostream& out, const Dendrogram& dendrogram);

// Nested-parenthesis (Newick) form for external tree viewers. Branch length
// of a node is its parent's merge height minus its own (leaves sit at 0).
std::string to_newick(const Dendrogram& dendrogram);

}  // namespace agesig
