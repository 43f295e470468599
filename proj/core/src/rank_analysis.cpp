#include "arenarank/rank_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace arenarank {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void check_square_symmetric(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    fail(std::string(what) + " must be a nonempty square matrix");
  }
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * (1.0 + std::abs(a(i, j)))) {
        fail(std::string(what) + " must be symmetric");
      }
    }
  }
}

// Counts pairs tied within sorted runs of equal keys: sum over runs of
// r (r - 1) / 2.
long long tied_pairs(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  long long total = 0;
  std::size_t run_start = 0;
  for (std::size_t k = 1; k <= values.size(); ++k) {
    if (k == values.size() || values[k] != values[run_start]) {
      const long long r = static_cast<long long>(k - run_start);
      total += r * (r - 1) / 2;
      run_start = k;
    }
  }
  return total;
}

// Merge-sort inversion count: number of index pairs k < l with
// values[k] > values[l] strictly.
long long count_inversions(std::vector<double>& values,
                           std::vector<double>& scratch, std::size_t lo,
                           std::size_t hi) {
  if (hi - lo <= 1) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inversions = count_inversions(values, scratch, lo, mid) +
                         count_inversions(values, scratch, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (values[a] <= values[b]) {
      scratch[out++] = values[a++];
    } else {
      inversions += static_cast<long long>(mid - a);
      scratch[out++] = values[b++];
    }
  }
  while (a < mid) scratch[out++] = values[a++];
  while (b < hi) scratch[out++] = values[b++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, values.begin() + lo);
  return inversions;
}

}  // namespace

std::vector<LeaderboardEntry> leaderboard(
    const ParameterSet& params, const std::vector<std::string>& names) {
  const int m = params.num_competitors();
  if (static_cast<int>(names.size()) != m) {
    fail("name list and scores disagree on the roster size");
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (params.mu[a] != params.mu[b]) return params.mu[a] > params.mu[b];
    return a < b;
  });
  std::vector<LeaderboardEntry> entries;
  entries.reserve(m);
  for (int r = 0; r < m; ++r) {
    entries.push_back({r + 1, order[r], names[order[r]], params.mu[order[r]]});
  }
  return entries;
}

double kendall_tau_b(const std::vector<double>& a,
                     const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (b.size() != n) fail("rank correlation needs vectors of equal length");
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  for (double v : a) {
    if (!std::isfinite(v)) fail("rank correlation needs finite values");
  }
  for (double v : b) {
    if (!std::isfinite(v)) fail("rank correlation needs finite values");
  }

  // Sort jointly by (a, b); discordant pairs are then exactly the strict
  // inversions of the b sequence.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a[x] != a[y]) return a[x] < a[y];
    return b[x] < b[y];
  });
  std::vector<double> b_sorted(n);
  for (std::size_t k = 0; k < n; ++k) b_sorted[k] = b[order[k]];
  std::vector<double> scratch(n);
  const long long discordant = count_inversions(b_sorted, scratch, 0, n);

  const long long n0 =
      static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long n1 = tied_pairs(a);
  const long long n2 = tied_pairs(b);
  // Pairs tied in both vectors, via runs of equal (a, b) records.
  long long n3 = 0;
  {
    std::vector<std::pair<double, double>> joint(n);
    for (std::size_t k = 0; k < n; ++k) joint[k] = {a[k], b[k]};
    std::sort(joint.begin(), joint.end());
    std::size_t run_start = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (k == n || joint[k] != joint[run_start]) {
        const long long r = static_cast<long long>(k - run_start);
        n3 += r * (r - 1) / 2;
        run_start = k;
      }
    }
  }
  const long long concordant = n0 - n1 - n2 + n3 - discordant;
  if (n0 == n1 || n0 == n2) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

Eigen::MatrixXd tau_matrix(const std::vector<Eigen::VectorXd>& scores) {
  const int k = static_cast<int>(scores.size());
  if (k < 1) fail("rank correlation matrix needs at least one score vector");
  for (const Eigen::VectorXd& s : scores) {
    if (s.size() != scores.front().size()) {
      fail("score vectors must share one roster");
    }
  }
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(k, k);
  for (int i = 0; i < k; ++i) {
    const std::vector<double> a(scores[i].data(),
                                scores[i].data() + scores[i].size());
    for (int j = i + 1; j < k; ++j) {
      const std::vector<double> b(scores[j].data(),
                                  scores[j].data() + scores[j].size());
      tau(i, j) = tau(j, i) = kendall_tau_b(a, b);
    }
  }
  return tau;
}

Eigen::MatrixXd s_map(const Eigen::MatrixXd& sigma) {
  check_square_symmetric(sigma, "covariance");
  const Eigen::VectorXd d = sigma.diagonal();
  const int m = static_cast<int>(sigma.rows());
  return d.replicate(1, m) + d.transpose().replicate(m, 1) - 2.0 * sigma;
}

Eigen::MatrixXd doubly_centered(const Eigen::MatrixXd& sigma) {
  check_square_symmetric(sigma, "covariance");
  const int m = static_cast<int>(sigma.rows());
  Eigen::MatrixXd out = sigma;
  const Eigen::VectorXd row_mean = sigma.rowwise().mean();
  const double total_mean = row_mean.mean();
  out.colwise() -= row_mean;
  out.rowwise() -= row_mean.transpose();
  out.array() += total_mean;
  return out;
}

Eigen::MatrixXd covariance_matrix(const ParameterSet& params) {
  if (!params.has_cov()) fail("model has no covariance block");
  Eigen::MatrixXd sigma = params.cov_log_diag.array().exp().matrix().asDiagonal();
  if (params.cov_factors.size() > 0) {
    sigma += params.cov_factors * params.cov_factors.transpose();
  }
  return sigma;
}

Eigen::MatrixXd z_matrix(const ParameterSet& params) {
  const int m = params.num_competitors();
  if (m < 1) fail("empty parameter set");
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double value = standardized_margin(params, i, j);
      z(i, j) = value;
      z(j, i) = -value;
    }
  }
  return z;
}

Linkage linkage_from_name(const std::string& name) {
  if (name == "single") return Linkage::kSingle;
  if (name == "complete") return Linkage::kComplete;
  if (name == "average") return Linkage::kAverage;
  fail("unknown linkage: " + name + " (expected single, complete or average)");
}

std::string linkage_name(Linkage linkage) {
  switch (linkage) {
    case Linkage::kSingle: return "single";
    case Linkage::kComplete: return "complete";
    case Linkage::kAverage: return "average";
  }
  fail("unknown linkage");
}

namespace {

// Optimal leaf ordering (dynamic programming over the merge tree): among the
// 2^(m-1) orderings reachable by flipping children, minimize the sum of
// dissimilarities between adjacent leaves.  For every node a table M(a, b)
// holds the best cost of laying out its leaves with a leftmost and b
// rightmost; combining children L, R uses
//   M(a, d) = min_{b in L, c in R} ML(a, b) + D(b, c) + MR(c, d)
// computed through the intermediate T(a, c) = min_b ML(a, b) + D(b, c).
class LeafOrderer {
 public:
  LeafOrderer(const std::vector<Dendrogram::Merge>& merges,
              const Eigen::MatrixXd& d)
      : dissimilarity_(d), num_leaves_(static_cast<int>(d.rows())) {
    const int total = num_leaves_ + static_cast<int>(merges.size());
    leaves_.resize(total);
    tables_.resize(total);
    children_.assign(total, {-1, -1});
    for (int v = 0; v < num_leaves_; ++v) {
      leaves_[v] = {v};
      tables_[v] = Eigen::MatrixXd::Zero(1, 1);
    }
    for (std::size_t k = 0; k < merges.size(); ++k) {
      const int v = num_leaves_ + static_cast<int>(k);
      children_[v] = {merges[k].left, merges[k].right};
      combine(v);
    }
  }

  std::vector<int> best_order() {
    const int root = static_cast<int>(tables_.size()) - 1;
    const Eigen::MatrixXd& table = tables_[root];
    int best_a = 0, best_b = 0;
    double best = kInf;
    for (int a = 0; a < table.rows(); ++a) {
      for (int b = 0; b < table.cols(); ++b) {
        if (table(a, b) < best) {
          best = table(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    std::vector<int> order;
    order.reserve(num_leaves_);
    emit(root, best_a, best_b, order);
    return order;
  }

 private:
  void combine(int v) {
    const auto [l, r] = children_[v];
    const std::vector<int>& ll = leaves_[l];
    const std::vector<int>& rl = leaves_[r];
    const int nl = static_cast<int>(ll.size());
    const int nr = static_cast<int>(rl.size());
    leaves_[v].reserve(nl + nr);
    leaves_[v].insert(leaves_[v].end(), ll.begin(), ll.end());
    leaves_[v].insert(leaves_[v].end(), rl.begin(), rl.end());

    // Positions in leaves_[v]: left child first, then right child.  The
    // table is filled for endpoints (a in L, d in R) and mirrored, because
    // reversing an ordering does not change the adjacency cost.
    const int n = nl + nr;
    Eigen::MatrixXd table = Eigen::MatrixXd::Constant(n, n, kInf);
    for (int a = 0; a < nl; ++a) {
      // T(c) = min_b ML(a, b) + D(b, c) for every entry leaf c of R.
      Eigen::VectorXd t = Eigen::VectorXd::Constant(nr, kInf);
      for (int b = 0; b < nl; ++b) {
        const double base = tables_[l](a, b);
        if (!(base < kInf)) continue;
        for (int c = 0; c < nr; ++c) {
          const double cost = base + dissimilarity_(ll[b], rl[c]);
          if (cost < t[c]) t[c] = cost;
        }
      }
      for (int d = 0; d < nr; ++d) {
        double best = kInf;
        for (int c = 0; c < nr; ++c) {
          const double cost = t[c] + tables_[r](c, d);
          if (cost < best) best = cost;
        }
        table(a, nl + d) = best;
        table(nl + d, a) = best;
      }
    }
    tables_[v] = std::move(table);
  }

  // Reconstructs the optimal order of node v with endpoint positions (a, b)
  // in leaves_[v] by re-finding the interior argmin, then recursing.
  void emit(int v, int a, int b, std::vector<int>& order) {
    if (children_[v].first < 0) {
      order.push_back(leaves_[v][0]);
      return;
    }
    const auto [l, r] = children_[v];
    const int nl = static_cast<int>(leaves_[l].size());
    const bool a_in_left = a < nl;
    // Work with (left endpoint in L, right endpoint in R); if the requested
    // endpoints are mirrored, emit the reverse order.
    const int pa = a_in_left ? a : b;
    const int pd = a_in_left ? b - nl : a - nl;
    int best_b = 0, best_c = 0;
    double best = kInf;
    for (int bb = 0; bb < nl; ++bb) {
      const double base = tables_[l](pa, bb);
      if (!(base < kInf)) continue;
      for (int cc = 0; cc < static_cast<int>(leaves_[r].size()); ++cc) {
        const double cost = base + dissimilarity_(leaves_[l][bb], leaves_[r][cc]) +
                            tables_[r](cc, pd);
        if (cost < best) {
          best = cost;
          best_b = bb;
          best_c = cc;
        }
      }
    }
    std::vector<int> forward;
    emit(l, pa, best_b, forward);
    emit(r, best_c, pd, forward);
    if (!a_in_left) std::reverse(forward.begin(), forward.end());
    order.insert(order.end(), forward.begin(), forward.end());
  }

  const Eigen::MatrixXd& dissimilarity_;
  int num_leaves_ = 0;
  std::vector<std::vector<int>> leaves_;
  std::vector<Eigen::MatrixXd> tables_;
  std::vector<std::pair<int, int>> children_;
};

}  // namespace

Dendrogram agglomerate(const Eigen::MatrixXd& dissimilarity, Linkage linkage) {
  check_square_symmetric(dissimilarity, "dissimilarity");
  const int m = static_cast<int>(dissimilarity.rows());
  Dendrogram tree;
  if (m == 1) {
    tree.leaf_order = {0};
    return tree;
  }

  // Active clusters carry their node id and leaf count; distances between
  // active clusters follow the Lance-Williams updates for the linkage.
  struct Cluster {
    int id = 0;
    int size = 1;
  };
  std::vector<Cluster> active(m);
  for (int v = 0; v < m; ++v) active[v] = {v, 1};
  Eigen::MatrixXd dist = dissimilarity;

  for (int step = 0; step < m - 1; ++step) {
    const int count = static_cast<int>(active.size());
    int best_a = 0, best_b = 1;
    double best = kInf;
    for (int a = 0; a < count; ++a) {
      for (int b = a + 1; b < count; ++b) {
        // Exact comparison with id tie-breaks keeps merges deterministic.
        const bool better =
            dist(a, b) < best ||
            (dist(a, b) == best &&
             std::make_pair(std::min(active[a].id, active[b].id),
                            std::max(active[a].id, active[b].id)) <
                 std::make_pair(std::min(active[best_a].id, active[best_b].id),
                                std::max(active[best_a].id, active[best_b].id)));
        if (better) {
          best = dist(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }

    const Cluster left = active[best_a];
    const Cluster right = active[best_b];
    tree.merges.push_back({std::min(left.id, right.id),
                           std::max(left.id, right.id), best,
                           left.size + right.size});

    // Replace position best_a with the merged cluster, drop best_b.
    Eigen::VectorXd merged_dist(count);
    for (int c = 0; c < count; ++c) {
      if (c == best_a || c == best_b) continue;
      double value = 0.0;
      switch (linkage) {
        case Linkage::kSingle:
          value = std::min(dist(best_a, c), dist(best_b, c));
          break;
        case Linkage::kComplete:
          value = std::max(dist(best_a, c), dist(best_b, c));
          break;
        case Linkage::kAverage:
          value = (left.size * dist(best_a, c) + right.size * dist(best_b, c)) /
                  (left.size + right.size);
          break;
      }
      merged_dist[c] = value;
    }
    active[best_a] = {m + step, left.size + right.size};
    for (int c = 0; c < count; ++c) {
      if (c == best_a || c == best_b) continue;
      dist(best_a, c) = dist(c, best_a) = merged_dist[c];
    }
    // Drop position best_b by swapping it with the last position in both
    // the active list and the distance matrix (best_a < best_b <= last, so
    // the merged cluster's slot is unaffected).
    const int last = count - 1;
    if (best_b != last) {
      std::swap(active[best_b], active[last]);
      dist.row(best_b).swap(dist.row(last));
      dist.col(best_b).swap(dist.col(last));
    }
    active.pop_back();
    dist.conservativeResize(last, last);
  }

  tree.leaf_order = LeafOrderer(tree.merges, dissimilarity).best_order();
  return tree;
}

std::vector<int> cut(const Dendrogram& tree, int k) {
  const int m = static_cast<int>(tree.merges.size()) + 1;
  if (k < 1 || k > m) fail("cluster count must lie in [1, number of leaves]");

  // Union-find over the first m - k merges.
  std::vector<int> parent(m + tree.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (int t = 0; t < m - k; ++t) {
    const int node = m + t;
    parent[find(tree.merges[t].left)] = node;
    parent[find(tree.merges[t].right)] = node;
  }

  // Renumber cluster labels by first appearance along the leaf order.
  std::vector<int> labels(m, -1);
  std::vector<int> root_label(parent.size(), -1);
  int next = 0;
  for (int leaf : tree.leaf_order) {
    const int root = find(leaf);
    if (root_label[root] < 0) root_label[root] = next++;
    labels[leaf] = root_label[root];
  }
  return labels;
}

namespace {

// Shared eigen pipeline for both embeddings: take the dims leading
// nonnegative eigenpairs of a symmetric matrix, scale by sqrt(eigenvalue),
// zero-pad when the spectrum runs out, and normalize column signs.
Embedding spectral_embedding(const Eigen::MatrixXd& b, int dims) {
  const int m = static_cast<int>(b.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  // Ascending from the solver; traverse from the top.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double scale =
      std::max({1e-300, std::abs(values[0]), std::abs(values[m - 1])});

  Embedding out;
  out.coordinates = Eigen::MatrixXd::Zero(m, dims);
  out.eigenvalues = Eigen::VectorXd::Zero(dims);
  for (int c = 0; c < dims; ++c) {
    const int source = m - 1 - c;
    if (source < 0) {
      out.padded = true;
      continue;
    }
    double lambda = values[source];
    if (lambda < -1e-10 * scale) {
      // Genuinely negative eigenvalue: no real coordinate carries it.
      out.padded = true;
      continue;
    }
    lambda = std::max(lambda, 0.0);
    out.eigenvalues[c] = lambda;
    out.coordinates.col(c) = std::sqrt(lambda) * vectors.col(source);

    // Deterministic sign: the first entry of (near-)largest magnitude is
    // positive.  The relative slack keeps rounding noise from flipping the
    // choice between entries that are equal in exact arithmetic.
    double top = 0.0;
    for (int i = 0; i < m; ++i) {
      top = std::max(top, std::abs(out.coordinates(i, c)));
    }
    int arg = 0;
    for (int i = 0; i < m; ++i) {
      if (std::abs(out.coordinates(i, c)) >= top * (1.0 - 1e-9)) {
        arg = i;
        break;
      }
    }
    if (out.coordinates(arg, c) < 0.0) out.coordinates.col(c) *= -1.0;
  }
  return out;
}

}  // namespace

Embedding classical_mds(const Eigen::MatrixXd& delta, int dims) {
  check_square_symmetric(delta, "dissimilarity");
  if (dims < 1) fail("embedding dimension must be positive");
  const Eigen::MatrixXd squared = delta.array().square().matrix();
  const Eigen::MatrixXd b = -0.5 * doubly_centered(squared);
  return spectral_embedding(b, dims);
}

Embedding kernel_pca(const Eigen::MatrixXd& z, double gamma, int dims) {
  if (z.rows() != z.cols() || z.rows() < 1) {
    fail("margin matrix must be square");
  }
  if (dims < 1) fail("embedding dimension must be positive");
  if (!(gamma > 0.0)) fail("kernel width must be positive");
  const Eigen::MatrixXd kernel =
      (-gamma * z.array().square()).exp().matrix();
  const Eigen::MatrixXd centered = doubly_centered(kernel);
  return spectral_embedding(centered, dims);
}

}  // namespace arenarank
