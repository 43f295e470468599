#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>

#include "arenarank/rank_analysis.hpp"
#include "support/oracles.hpp"

using arenarank::Dendrogram;
using arenarank::Linkage;
using arenarank::ParameterSet;

namespace {

// |x_i - x_j| distances for points on a line.
Eigen::MatrixXd line_distances(const std::vector<double>& x) {
  const int m = static_cast<int>(x.size());
  Eigen::MatrixXd d(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) d(i, j) = std::abs(x[i] - x[j]);
  }
  return d;
}

}  // namespace

TEST_SUITE("rank_analysis") {

TEST_CASE("leaderboard sorts by score with index tie-breaks") {
  ParameterSet params;
  params.mu.resize(4);
  params.mu << 0.3, 0.9, 0.3, -1.0;
  const auto board =
      arenarank::leaderboard(params, {"a", "b", "c", "d"});
  REQUIRE(board.size() == 4);
  CHECK(board[0].rank == 1);
  CHECK(board[0].name == "b");
  CHECK(board[1].name == "a");  // tied with c; smaller index wins
  CHECK(board[2].name == "c");
  CHECK(board[3].name == "d");
  CHECK(board[3].rank == 4);
  CHECK(board[1].score == 0.3);
  CHECK(board[1].index == 0);
}

TEST_CASE("rank correlation matches hand-computed values") {
  // One swapped neighbor pair out of four items: (5 - 1) / 6.
  CHECK(arenarank::kendall_tau_b({1, 2, 3, 4}, {1, 3, 2, 4}) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(arenarank::kendall_tau_b({1, 2, 3}, {3, 2, 1}) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(arenarank::kendall_tau_b({1, 2, 3}, {1, 2, 3}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // Ties in one vector: 2 / sqrt(2 * 3).
  CHECK(arenarank::kendall_tau_b({1, 1, 2}, {1, 2, 3}) ==
        doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-15));
  // Constant vectors have no defined correlation.
  CHECK(std::isnan(arenarank::kendall_tau_b({1, 1, 1}, {1, 2, 3})));
  CHECK(std::isnan(arenarank::kendall_tau_b({2}, {3})));
  CHECK_THROWS_AS(arenarank::kendall_tau_b({1, 2}, {1, 2, 3}),
                  std::invalid_argument);
}

TEST_CASE("rank correlation equals the quadratic enumeration bit for bit") {
  std::mt19937 gen(61);
  std::uniform_int_distribution<int> value(0, 9);  // many ties
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 40;
    std::vector<double> a(n), b(n);
    for (int k = 0; k < n; ++k) {
      a[k] = value(gen);
      b[k] = value(gen);
    }
    const double fast = arenarank::kendall_tau_b(a, b);
    const double naive = testsupport::naive_kendall_tau_b(a, b);
    if (std::isnan(naive)) {
      CHECK(std::isnan(fast));
    } else {
      // Same integer numerator and denominator, so the doubles are identical.
      CHECK(fast == naive);
    }
  }
}

TEST_CASE("correlation matrices have a unit diagonal and are symmetric") {
  std::mt19937 gen(62);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Eigen::VectorXd> scores;
  for (int s = 0; s < 4; ++s) {
    Eigen::VectorXd v(6);
    for (int k = 0; k < 6; ++k) v[k] = unit(gen);
    scores.push_back(v);
  }
  const Eigen::MatrixXd tau = arenarank::tau_matrix(scores);
  REQUIRE(tau.rows() == 4);
  for (int i = 0; i < 4; ++i) CHECK(tau(i, i) == 1.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(tau(i, j) == tau(j, i));
      const std::vector<double> a(scores[i].data(), scores[i].data() + 6);
      const std::vector<double> b(scores[j].data(), scores[j].data() + 6);
      if (i != j) CHECK(tau(i, j) == arenarank::kendall_tau_b(a, b));
    }
  }
}

TEST_CASE("pair-variance map and its shift kernel") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 2.0;
  const Eigen::MatrixXd s = arenarank::s_map(sigma);
  CHECK(s(0, 0) == 0.0);
  CHECK(s(1, 1) == 0.0);
  CHECK(s(0, 1) == doctest::Approx(2.0).epsilon(1e-15));  // 1 + 2 - 2*0.5
  CHECK(s(1, 0) == doctest::Approx(2.0).epsilon(1e-15));

  // Adding v 1^T + 1 v^T leaves the map unchanged.
  std::mt19937 gen(63);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  Eigen::MatrixXd big(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j <= i; ++j) big(i, j) = big(j, i) = unit(gen);
  }
  Eigen::VectorXd v(5);
  for (int i = 0; i < 5; ++i) v[i] = unit(gen);
  const Eigen::MatrixXd shifted =
      big + v * Eigen::RowVectorXd::Ones(5) + Eigen::VectorXd::Ones(5) * v.transpose();
  CHECK((arenarank::s_map(big) - arenarank::s_map(shifted))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("double centering zeroes row sums and is idempotent") {
  std::mt19937 gen(64);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  Eigen::MatrixXd sigma(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j <= i; ++j) sigma(i, j) = sigma(j, i) = unit(gen);
  }
  const Eigen::MatrixXd centered = arenarank::doubly_centered(sigma);
  CHECK(centered.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK((arenarank::doubly_centered(centered) - centered)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("covariance and margin matrices follow the parameter blocks") {
  ParameterSet params;
  params.mu.resize(3);
  params.mu << 1.0, 0.0, -1.0;
  params.cov_log_diag.resize(3);
  params.cov_log_diag << 0.0, 0.0, std::log(2.0);
  params.cov_factors.resize(3, 1);
  params.cov_factors << 1.0, 0.0, -1.0;

  const Eigen::MatrixXd sigma = arenarank::covariance_matrix(params);
  // D + Lambda Lambda^T with D = diag(1, 1, 2).
  CHECK(sigma(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sigma(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sigma(2, 2) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(sigma(0, 2) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(sigma(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

  // s_map of the covariance agrees with the per-pair variances.
  const Eigen::MatrixXd s = arenarank::s_map(sigma);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      CHECK(s(i, j) ==
            doctest::Approx(arenarank::pair_variance(params, i, j))
                .epsilon(1e-12));
    }
  }

  const Eigen::MatrixXd z = arenarank::z_matrix(params);
  CHECK((z + z.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      CHECK(z(i, j) ==
            doctest::Approx(arenarank::standardized_margin(params, i, j))
                .epsilon(1e-13));
    }
  }

  // Without a covariance block the margins are plain score differences.
  ParameterSet plain;
  plain.mu = params.mu;
  const Eigen::MatrixXd zp = arenarank::z_matrix(plain);
  CHECK(zp(0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(arenarank::covariance_matrix(plain), std::invalid_argument);
}

TEST_CASE("linkage names round-trip") {
  for (Linkage linkage :
       {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
    CHECK(arenarank::linkage_from_name(arenarank::linkage_name(linkage)) ==
          linkage);
  }
  CHECK_THROWS_AS(arenarank::linkage_from_name("ward"), std::invalid_argument);
}

TEST_CASE("agglomeration heights match hand merges on a line") {
  const Eigen::MatrixXd d = line_distances({0.0, 1.0, 3.0, 7.0});

  SUBCASE("single linkage chains at nearest distances") {
    const Dendrogram tree = arenarank::agglomerate(d, Linkage::kSingle);
    REQUIRE(tree.merges.size() == 3);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[0].height == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tree.merges[0].size == 2);
    CHECK(tree.merges[1].left == 2);
    CHECK(tree.merges[1].right == 4);
    CHECK(tree.merges[1].height == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(tree.merges[1].size == 3);
    CHECK(tree.merges[2].left == 3);
    CHECK(tree.merges[2].right == 5);
    CHECK(tree.merges[2].height == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(tree.merges[2].size == 4);
  }

  SUBCASE("complete linkage uses farthest distances") {
    const Dendrogram tree = arenarank::agglomerate(d, Linkage::kComplete);
    REQUIRE(tree.merges.size() == 3);
    CHECK(tree.merges[0].height == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tree.merges[1].height == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(tree.merges[2].height == doctest::Approx(7.0).epsilon(1e-15));
  }

  SUBCASE("average linkage weights by cluster size") {
    const Dendrogram tree = arenarank::agglomerate(d, Linkage::kAverage);
    REQUIRE(tree.merges.size() == 3);
    CHECK(tree.merges[0].height == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tree.merges[1].height == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(tree.merges[2].height ==
          doctest::Approx(17.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("equal distances merge in deterministic id order") {
  const Eigen::MatrixXd d =
      Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  const Dendrogram tree = arenarank::agglomerate(d, Linkage::kSingle);
  REQUIRE(tree.merges.size() == 3);
  CHECK(tree.merges[0].left == 0);
  CHECK(tree.merges[0].right == 1);
  CHECK(tree.merges[1].left == 2);
  CHECK(tree.merges[1].right == 3);
  CHECK(tree.merges[2].left == 4);
  CHECK(tree.merges[2].right == 5);
  for (const auto& merge : tree.merges) {
    CHECK(merge.height == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("leaf order minimizes adjacent dissimilarity over all flips") {
  std::mt19937 gen(65);
  std::uniform_real_distribution<double> unit(0.1, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + trial % 3;  // 3, 4, 5 leaves
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) d(i, j) = d(j, i) = unit(gen);
    }
    for (Linkage linkage :
         {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
      const Dendrogram tree = arenarank::agglomerate(d, linkage);
      const auto orderings = testsupport::all_flip_orderings(tree.merges, m);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& order : orderings) {
        best = std::min(best, testsupport::adjacency_cost(order, d));
      }
      // The reported order must itself be reachable by flips...
      CHECK(std::find(orderings.begin(), orderings.end(), tree.leaf_order) !=
            orderings.end());
      // ...and must attain the minimum adjacency cost.
      CHECK(testsupport::adjacency_cost(tree.leaf_order, d) ==
            doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("cutting the tree yields first-appearance labels") {
  const Eigen::MatrixXd d = line_distances({0.0, 1.0, 3.0, 7.0});
  const Dendrogram tree = arenarank::agglomerate(d, Linkage::kSingle);

  const std::vector<int> one = arenarank::cut(tree, 1);
  CHECK(one == std::vector<int>(4, 0));

  const std::vector<int> two = arenarank::cut(tree, 2);
  // Undoing the top merge separates {0, 1, 2} from {3}.
  CHECK(two[0] == two[1]);
  CHECK(two[1] == two[2]);
  CHECK(two[3] != two[0]);

  const std::vector<int> all = arenarank::cut(tree, 4);
  // Labels follow the leaf order: the t-th leaf in order has label t.
  for (int t = 0; t < 4; ++t) CHECK(all[tree.leaf_order[t]] == t);

  // First-appearance renumbering at every k: labels seen along leaf_order
  // are 0, 1, 2, ... in order.
  for (int k = 1; k <= 4; ++k) {
    const std::vector<int> labels = arenarank::cut(tree, k);
    int seen = 0;
    std::set<int> found;
    for (int leaf : tree.leaf_order) {
      if (!found.count(labels[leaf])) {
        CHECK(labels[leaf] == seen);
        found.insert(labels[leaf]);
        ++seen;
      }
    }
    CHECK(seen == k);
  }

  CHECK_THROWS_AS(arenarank::cut(tree, 0), std::invalid_argument);
  CHECK_THROWS_AS(arenarank::cut(tree, 5), std::invalid_argument);
}

TEST_CASE("cut respects merge heights under every linkage") {
  std::mt19937 gen(66);
  std::uniform_real_distribution<double> unit(0.1, 4.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) d(i, j) = d(j, i) = unit(gen);
  }
  const Dendrogram tree = arenarank::agglomerate(d, Linkage::kAverage);
  for (int k = 1; k <= 6; ++k) {
    const std::vector<int> labels = arenarank::cut(tree, k);
    CHECK(*std::max_element(labels.begin(), labels.end()) == k - 1);
    CHECK(*std::min_element(labels.begin(), labels.end()) == 0);
  }
}

TEST_CASE("two points embed at +-(distance/2)") {
  Eigen::MatrixXd d(2, 2);
  d << 0.0, 1.0, 1.0, 0.0;
  const arenarank::Embedding e = arenarank::classical_mds(d, 1);
  CHECK_FALSE(e.padded);
  REQUIRE(e.coordinates.rows() == 2);
  REQUIRE(e.coordinates.cols() == 1);
  CHECK(e.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.coordinates(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(e.coordinates(1, 0) == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("euclidean distances are reproduced exactly by the embedding") {
  std::mt19937 gen(67);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  Eigen::MatrixXd points(6, 2);
  for (int i = 0; i < 6; ++i) {
    points(i, 0) = unit(gen);
    points(i, 1) = unit(gen);
  }
  Eigen::MatrixXd d(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      d(i, j) = (points.row(i) - points.row(j)).norm();
    }
  }
  const arenarank::Embedding e = arenarank::classical_mds(d, 2);
  CHECK_FALSE(e.padded);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double back =
          (e.coordinates.row(i) - e.coordinates.row(j)).norm();
      CHECK(back == doctest::Approx(d(i, j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("a non-euclidean geometry pads once the spectrum runs out") {
  // d(0,1) = d(1,2) = 1 but d(0,2) = 3 violates the triangle inequality,
  // so one eigenvalue is negative (-5/6) and only two are usable.
  Eigen::MatrixXd d(3, 3);
  d << 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0;

  const arenarank::Embedding two = arenarank::classical_mds(d, 2);
  CHECK_FALSE(two.padded);
  CHECK(two.eigenvalues[0] == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(std::abs(two.eigenvalues[1]) < 1e-10);
  CHECK(two.coordinates(0, 0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(std::abs(two.coordinates(1, 0)) < 1e-9);
  CHECK(two.coordinates(2, 0) == doctest::Approx(-1.5).epsilon(1e-10));

  const arenarank::Embedding three = arenarank::classical_mds(d, 3);
  CHECK(three.padded);
  CHECK(three.eigenvalues[2] == 0.0);
  CHECK(three.coordinates.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("asking for more dimensions than points pads with zeros") {
  Eigen::MatrixXd d(2, 2);
  d << 0.0, 2.0, 2.0, 0.0;
  const arenarank::Embedding e = arenarank::classical_mds(d, 4);
  CHECK(e.padded);
  REQUIRE(e.coordinates.cols() == 4);
  CHECK(e.coordinates.col(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.coordinates.col(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel embedding of a two-point margin matrix") {
  const double z01 = 1.0;
  const double gamma = 0.5;
  Eigen::MatrixXd z(2, 2);
  z << 0.0, z01, -z01, 0.0;
  const arenarank::Embedding e = arenarank::kernel_pca(z, gamma, 1);
  // Centered 2x2 kernel has one eigenvalue 1 - exp(-gamma z01^2); the
  // coordinates are +-sqrt(lambda/2).
  const double lambda = 1.0 - std::exp(-gamma * z01 * z01);
  CHECK(e.eigenvalues[0] == doctest::Approx(lambda).epsilon(1e-12));
  CHECK(e.coordinates(0, 0) ==
        doctest::Approx(std::sqrt(lambda / 2.0)).epsilon(1e-10));
  CHECK(e.coordinates(1, 0) ==
        doctest::Approx(-std::sqrt(lambda / 2.0)).epsilon(1e-10));
}

TEST_CASE("a flat margin matrix embeds every point at the origin") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
  const arenarank::Embedding e = arenarank::kernel_pca(z, 1e-4, 2);
  CHECK(e.coordinates.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(e.eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding and clustering inputs are validated") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.0, 1.0, 2.0, 0.0;  // not symmetric
  CHECK_THROWS_AS(arenarank::classical_mds(bad, 1), std::invalid_argument);
  CHECK_THROWS_AS(arenarank::agglomerate(bad, Linkage::kSingle),
                  std::invalid_argument);
  Eigen::MatrixXd ok(2, 2);
  ok << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(arenarank::classical_mds(ok, 0), std::invalid_argument);
  CHECK_THROWS_AS(arenarank::kernel_pca(ok, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(arenarank::kernel_pca(Eigen::MatrixXd::Zero(2, 3), 1.0, 1),
                  std::invalid_argument);
}

}  // TEST_SUITE
