#pragma once

// Rankings and structure on top of fitted models: leaderboards, rank
// correlation, score-distance geometry, hierarchical clustering with optimal
// leaf ordering, and low-dimensional embeddings.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arenarank/models.hpp"

namespace arenarank {

struct LeaderboardEntry {
  int rank = 0;      // 1-based, dense
  int index = 0;     // roster index
  std::string name;
  double score = 0.0;
};

// Competitors sorted by descending score; exact score ties share the smaller
// roster index first (stable, deterministic).  Ranks are 1..m.
std::vector<LeaderboardEntry> leaderboard(
    const ParameterSet& params, const std::vector<std::string>& names);

// Kendall rank correlation with tie correction (tau-b):
//   tau_b = (n_c - n_d) / sqrt((n0 - n1)(n0 - n2))
// where n0 = n(n-1)/2 and n1, n2 count pairs tied in a resp. b.  Computed
// by merge-sort inversion counting, O(n log n).  Returns NaN when either
// vector is constant.
double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b);

// Pairwise tau-b between score vectors; unit diagonal.
Eigen::MatrixXd tau_matrix(const std::vector<Eigen::VectorXd>& scores);

// Pair-variance matrix from a covariance matrix:
//   S = diag(Sigma) 1^T + 1 diag(Sigma)^T - 2 Sigma   (s_ii = 0).
// Invariant under Sigma -> Sigma + v 1^T + 1 v^T (the kernel of the map).
Eigen::MatrixXd s_map(const Eigen::MatrixXd& sigma);

// P Sigma P with P = I - (1/m) 11^T; the gauge-fixed covariance.  Positive
// semidefinite whenever Sigma is.
Eigen::MatrixXd doubly_centered(const Eigen::MatrixXd& sigma);

// Full covariance matrix Sigma = D + Lambda Lambda^T of a parameter set
// (requires the covariance block).
Eigen::MatrixXd covariance_matrix(const ParameterSet& params);

// Antisymmetric standardized-margin matrix z_ij (diagonal zero); plain score
// differences when no covariance block is present.
Eigen::MatrixXd z_matrix(const ParameterSet& params);

enum class Linkage { kSingle, kComplete, kAverage };
Linkage linkage_from_name(const std::string& name);
std::string linkage_name(Linkage linkage);

// Agglomerative dendrogram over a symmetric dissimilarity matrix.  Nodes
// 0..m-1 are leaves; merge k creates node m+k.  Ties in the merge distance
// break on the smaller node ids, so the process is deterministic.  leaf_order
// is the optimal leaf ordering: among all orderings reachable by flipping
// subtrees it minimizes the sum of dissimilarities between adjacent leaves
// (computed by dynamic programming over the tree).
struct Dendrogram {
  struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int size = 0;  // leaves under the merged node
  };
  std::vector<Merge> merges;
  std::vector<int> leaf_order;
};
Dendrogram agglomerate(const Eigen::MatrixXd& dissimilarity, Linkage linkage);

// Cluster labels from cutting the dendrogram into k clusters (undo the last
// k-1 merges).  Labels are renumbered by first appearance in leaf order:
// scanning leaf_order, the first leaf seen gets label 0, the next new
// cluster label 1, and so on.
std::vector<int> cut(const Dendrogram& tree, int k);

// Low-dimensional embedding: coordinates is m x dims, eigenvalues holds the
// dims leading eigenvalues actually used (clamped at zero).  When fewer than
// dims nonnegative eigenvalues exist the remaining columns are zero-padded
// and padded is set.  Column signs are fixed: the entry of largest magnitude
// in each coordinate column is positive (first such index on exact ties).
struct Embedding {
  Eigen::MatrixXd coordinates;
  Eigen::VectorXd eigenvalues;
  bool padded = false;
};

// Classical multidimensional scaling of a symmetric dissimilarity matrix:
// B = -1/2 P (Delta o Delta) P, eigendecomposition, coordinates scaled by
// sqrt(eigenvalue).
Embedding classical_mds(const Eigen::MatrixXd& delta, int dims);

// Kernel PCA on the margin matrix with the Gaussian kernel
// K_ij = exp(-gamma z_ij^2), double-centered before the eigendecomposition.
Embedding kernel_pca(const Eigen::MatrixXd& z, double gamma, int dims);

}  // namespace arenarank
