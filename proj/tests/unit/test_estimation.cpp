#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>
#include <Eigen/Dense>

#include "arenarank/estimation.hpp"
#include "arenarank/models.hpp"
#include "arenarank/rank_analysis.hpp"
#include "quasi_newton.hpp"
#include "support/oracles.hpp"

using arenarank::ComparisonDataset;
using arenarank::Family;
using arenarank::FitOptions;
using arenarank::FitReport;
using arenarank::ModelConfig;
using arenarank::ParameterSet;

namespace {

ModelConfig config_of(Family family, std::optional<int> k_cov,
                      std::optional<int> k_tie) {
  ModelConfig config;
  config.family = family;
  config.k_cov = k_cov;
  config.k_tie = k_tie;
  return config;
}

// Straightforward re-accumulation of the per-vote objective from the public
// probability API, mirroring each family's data convention.
double direct_nll(const ComparisonDataset& data, const ModelConfig& config,
                  const ParameterSet& params) {
  double sum = 0.0;
  double votes = 0.0;
  const bool ties_modeled = arenarank::family_has_ties(config.family);
  for (const arenarank::PairCounts& p : data.pairs()) {
    const arenarank::ProbabilityTriple t =
        arenarank::outcome_probabilities(config, params, p.i, p.j);
    sum += p.wins_i * std::log(t.p_win) + p.wins_j * std::log(t.p_loss);
    votes += p.wins_i + p.wins_j;
    if (ties_modeled) {
      if (p.ties > 0.0) sum += p.ties * std::log(t.p_tie);
      votes += p.ties;
    }
  }
  return -sum / votes;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("parameter counts add up block by block") {
  CHECK(arenarank::param_count(
            config_of(Family::kBt, std::nullopt, std::nullopt), 5) == 5);
  CHECK(arenarank::param_count(config_of(Family::kBt, 0, std::nullopt), 5) ==
        10);
  CHECK(arenarank::param_count(config_of(Family::kBt, 3, std::nullopt), 5) ==
        25);
  CHECK(arenarank::param_count(config_of(Family::kRaoKupper, std::nullopt, 0),
                               5) == 6);
  CHECK(arenarank::param_count(config_of(Family::kDavidson, 2, 3), 5) ==
        5 + 5 + 10 + 15);
}

TEST_CASE("initial parameters are centered and reproducible") {
  const ModelConfig config = config_of(Family::kRaoKupper, 2, 0);
  const ParameterSet a = arenarank::init_params(config, 6, 42);
  const ParameterSet b = arenarank::init_params(config, 6, 42);
  const ParameterSet c = arenarank::init_params(config, 6, 43);
  CHECK((a.mu.array() == b.mu.array()).all());
  CHECK_FALSE((a.mu.array() == c.mu.array()).all());
  CHECK(std::abs(a.mu.sum()) < 1e-12);
  CHECK(a.mu.cwiseAbs().maxCoeff() < 0.5);
  CHECK((a.cov_log_diag.array() == -std::log(6.0)).all());
  CHECK((a.cov_factors.array() == 0.0).all());
  CHECK(a.eta == 0.0);
}

TEST_CASE("pack and unpack are mutually inverse across configurations") {
  std::mt19937 gen(31);
  for (const ModelConfig& config : testsupport::all_test_configs()) {
    const int m = 5;
    const ParameterSet params = testsupport::random_params(config, m, gen);
    const Eigen::VectorXd theta = arenarank::pack_params(config, params);
    CHECK(theta.size() == arenarank::param_count(config, m));
    const ParameterSet back = arenarank::unpack_params(config, m, theta);
    const Eigen::VectorXd again = arenarank::pack_params(config, back);
    CHECK((theta.array() == again.array()).all());
    CHECK((back.mu.array() == params.mu.array()).all());
    if (config.has_cov()) {
      CHECK((back.cov_log_diag.array() == params.cov_log_diag.array()).all());
      if (*config.k_cov >= 1) {
        CHECK((back.cov_factors.array() == params.cov_factors.array()).all());
      }
    }
    if (config.has_tie()) {
      if (*config.k_tie == 0) {
        CHECK(back.eta == params.eta);
      } else {
        CHECK((back.tie_coeffs.array() == params.tie_coeffs.array()).all());
      }
    }
  }
}

TEST_CASE("objective equals a direct re-accumulation") {
  std::mt19937 gen(32);
  const ComparisonDataset with_ties = testsupport::random_dataset(5, gen, true);
  const ComparisonDataset no_ties = testsupport::random_dataset(5, gen, false);
  for (const ModelConfig& config : testsupport::all_test_configs()) {
    const ComparisonDataset& data =
        config.family == Family::kBtCollapsedTies ? no_ties : with_ties;
    const ParameterSet params = testsupport::random_params(config, 5, gen);
    const double lib = arenarank::nll(data, config, params);
    const double ref = direct_nll(data, config, params);
    CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("collapsed family refuses ties, plain bt drops them") {
  std::mt19937 gen(33);
  const ComparisonDataset with_ties = testsupport::random_dataset(4, gen, true);
  const ModelConfig collapsed =
      config_of(Family::kBtCollapsedTies, std::nullopt, std::nullopt);
  const ModelConfig plain = config_of(Family::kBt, std::nullopt, std::nullopt);
  const ParameterSet params = testsupport::random_params(plain, 4, gen);
  CHECK_THROWS_AS(arenarank::nll(with_ties, collapsed, params),
                  std::invalid_argument);

  // Dropping ties by hand must give the same plain-BT objective.
  std::vector<arenarank::PairCounts> stripped = with_ties.pairs();
  for (auto& p : stripped) p.ties = 0.0;
  const ComparisonDataset no_ties(with_ties.competitors(), stripped);
  CHECK(arenarank::nll(with_ties, plain, params) ==
        doctest::Approx(arenarank::nll(no_ties, plain, params))
            .epsilon(1e-14));
}

TEST_CASE("rao-kupper objective is infinite when ties get zero probability") {
  const ComparisonDataset data({"a", "b"}, {{0, 1, 2.0, 1.0, 3.0}});
  const ModelConfig config = config_of(Family::kRaoKupper, std::nullopt, 0);
  ParameterSet params;
  params.mu = Eigen::VectorXd::Zero(2);
  params.eta = 0.0;  // boundary: p_tie = 0 but ties observed
  CHECK(std::isinf(arenarank::nll(data, config, params)));
  params.eta = -0.2;  // invalid region
  CHECK(std::isinf(arenarank::nll(data, config, params)));
  params.eta = 0.3;
  CHECK(std::isfinite(arenarank::nll(data, config, params)));
}

TEST_CASE("analytic gradient matches central differences everywhere") {
  std::mt19937 gen(34);
  const ComparisonDataset with_ties = testsupport::random_dataset(5, gen, true);
  const ComparisonDataset no_ties = testsupport::random_dataset(5, gen, false);
  for (const ModelConfig& config : testsupport::all_test_configs()) {
    const ComparisonDataset& data =
        config.family == Family::kBtCollapsedTies ? no_ties : with_ties;
    const ParameterSet params = testsupport::random_params(config, 5, gen);
    const Eigen::VectorXd theta = arenarank::pack_params(config, params);
    const Eigen::VectorXd analytic =
        arenarank::nll_gradient(data, config, params);
    const Eigen::VectorXd fd = testsupport::finite_difference_gradient(
        [&](const Eigen::VectorXd& t) {
          return arenarank::nll(data, config,
                                arenarank::unpack_params(config, 5, t));
        },
        theta);
    REQUIRE(analytic.size() == fd.size());
    for (Eigen::Index k = 0; k < fd.size(); ++k) {
      CHECK(analytic[k] == doctest::Approx(fd[k]).epsilon(1e-5));
    }
  }
}

TEST_CASE("objective is invariant under the gauge transformations") {
  std::mt19937 gen(35);
  const ComparisonDataset data = testsupport::random_dataset(5, gen, true);
  const ModelConfig config = config_of(Family::kDavidson, 2, 1);
  const ParameterSet params = testsupport::random_params(config, 5, gen);
  const double base = arenarank::nll(data, config, params);

  ParameterSet shifted = params;
  shifted.mu.array() += 3.7;
  CHECK(arenarank::nll(data, config, shifted) ==
        doctest::Approx(base).epsilon(1e-12));

  // Scale gauge: s -> c s, mu -> sqrt(c) mu leaves every margin unchanged.
  const double c = 2.5;
  ParameterSet scaled = params;
  scaled.mu *= std::sqrt(c);
  scaled.cov_log_diag.array() += std::log(c);
  scaled.cov_factors *= std::sqrt(c);
  CHECK(arenarank::nll(data, config, scaled) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("gauge constraint equals its brute-force and spectral forms") {
  std::mt19937 gen(36);
  for (int k_cov : {0, 1, 3}) {
    const ModelConfig config = config_of(Family::kBt, k_cov, std::nullopt);
    const ParameterSet params = testsupport::random_params(config, 6, gen);
    const double c = arenarank::constraint_value(params);
    CHECK(c == doctest::Approx(testsupport::naive_constraint(params))
                   .epsilon(1e-12));
    const Eigen::MatrixXd centered = arenarank::doubly_centered(
        arenarank::covariance_matrix(params));
    CHECK(c == doctest::Approx(centered.trace()).epsilon(1e-12));
  }
}

TEST_CASE("constraint gradients match central differences") {
  std::mt19937 gen(37);
  const ModelConfig config = config_of(Family::kBt, 2, std::nullopt);
  const ParameterSet params = testsupport::random_params(config, 5, gen);

  const Eigen::VectorXd gd = arenarank::constraint_grad_diag(params);
  for (int i = 0; i < 5; ++i) {
    ParameterSet probe = params;
    const double step = 1e-6;
    probe.cov_log_diag[i] = params.cov_log_diag[i] + step;
    const double hi = arenarank::constraint_value(probe);
    probe.cov_log_diag[i] = params.cov_log_diag[i] - step;
    const double lo = arenarank::constraint_value(probe);
    // Gradient is reported per d_ii; chain through d_ii = exp(delta_i).
    const double fd_delta = (hi - lo) / (2 * step);
    CHECK(gd[i] * std::exp(params.cov_log_diag[i]) ==
          doctest::Approx(fd_delta).epsilon(1e-5));
  }

  const Eigen::MatrixXd gf = arenarank::constraint_grad_factors(params);
  for (int i = 0; i < 5; ++i) {
    for (int c = 0; c < 2; ++c) {
      ParameterSet probe = params;
      const double step = 1e-6;
      probe.cov_factors(i, c) = params.cov_factors(i, c) + step;
      const double hi = arenarank::constraint_value(probe);
      probe.cov_factors(i, c) = params.cov_factors(i, c) - step;
      const double lo = arenarank::constraint_value(probe);
      CHECK(gf(i, c) == doctest::Approx((hi - lo) / (2 * step)).epsilon(1e-5));
    }
  }
}

TEST_CASE("normalization centers, rescales to unit constraint, and is idempotent") {
  std::mt19937 gen(38);
  const ComparisonDataset data = testsupport::random_dataset(5, gen, true);
  for (const ModelConfig& config : testsupport::all_test_configs()) {
    const ParameterSet params = testsupport::random_params(config, 5, gen);
    const ComparisonDataset& eval_data =
        config.family == Family::kBtCollapsedTies
            ? arenarank::collapse_ties(data)
            : data;
    const double before = arenarank::nll(eval_data, config, params);
    const ParameterSet normed = arenarank::normalize(config, params);
    CHECK(std::abs(normed.mu.sum()) < 1e-10);
    if (config.has_cov()) {
      CHECK(arenarank::constraint_value(normed) ==
            doctest::Approx(1.0).epsilon(1e-10));
      if (*config.k_cov >= 1) {
        CHECK(normed.cov_factors.colwise().sum().cwiseAbs().maxCoeff() <
              1e-10);
      }
    }
    CHECK(arenarank::nll(eval_data, config, normed) ==
          doctest::Approx(before).epsilon(1e-10));
    const ParameterSet twice = arenarank::normalize(config, normed);
    CHECK((twice.mu - normed.mu).cwiseAbs().maxCoeff() < 1e-13);
    if (config.has_cov()) {
      CHECK((twice.cov_log_diag - normed.cov_log_diag).cwiseAbs().maxCoeff() <
            1e-13);
    }
  }
}

TEST_CASE("two-competitor maximum likelihood is the analytic solution") {
  const ComparisonDataset data({"a", "b"}, {{0, 1, 3.0, 1.0, 0.0}});
  const ModelConfig config = config_of(Family::kBt, std::nullopt, std::nullopt);
  const FitReport report = arenarank::fit(data, config);
  CHECK(report.converged);
  // Win odds 3:1 put the score gap at ln 3, centered to +-(ln 3)/2.
  CHECK(report.params.mu[0] ==
        doctest::Approx(0.5493061443340549).epsilon(1e-6));
  CHECK(report.params.mu[1] ==
        doctest::Approx(-0.5493061443340549).epsilon(1e-6));
  CHECK(report.nll == doctest::Approx(0.5623351446188083).epsilon(1e-9));
}

TEST_CASE("balanced data fits to equal scores and ln 2") {
  const ComparisonDataset data({"a", "b"}, {{0, 1, 5.0, 5.0, 0.0}});
  const FitReport report = arenarank::fit(
      data, config_of(Family::kBt, std::nullopt, std::nullopt));
  CHECK(report.converged);
  CHECK(std::abs(report.params.mu[0]) < 1e-6);
  CHECK(report.nll == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("symmetric tie data recovers the even three-way split") {
  const ComparisonDataset data({"a", "b"}, {{0, 1, 1.0, 1.0, 1.0}});

  SUBCASE("rao-kupper: threshold ln 2") {
    const FitReport report =
        arenarank::fit(data, config_of(Family::kRaoKupper, std::nullopt, 0));
    CHECK(report.converged);
    CHECK(std::abs(report.params.mu[0]) < 1e-5);
    CHECK(report.params.eta == doctest::Approx(std::log(2.0)).epsilon(1e-4));
    CHECK(report.nll == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  }

  SUBCASE("davidson: threshold 0") {
    const FitReport report =
        arenarank::fit(data, config_of(Family::kDavidson, std::nullopt, 0));
    CHECK(report.converged);
    CHECK(std::abs(report.params.mu[0]) < 1e-5);
    CHECK(std::abs(report.params.eta) < 1e-4);
    CHECK(report.nll == doctest::Approx(std::log(3.0)).epsilon(1e-8));
  }
}

TEST_CASE("fit matches a simplex search from a different start") {
  std::mt19937 gen(39);
  const ComparisonDataset data = testsupport::random_dataset(3, gen, true);
  const ModelConfig config = config_of(Family::kDavidson, std::nullopt, 0);
  const FitReport report = arenarank::fit(data, config);

  const Eigen::VectorXd start = Eigen::VectorXd::Constant(4, 0.1);
  const Eigen::VectorXd simplex_best = testsupport::nelder_mead(
      [&](const Eigen::VectorXd& theta) {
        return arenarank::nll(data, config,
                              arenarank::unpack_params(config, 3, theta));
      },
      start);
  const double simplex_nll = arenarank::nll(
      data, config, arenarank::unpack_params(config, 3, simplex_best));
  CHECK(report.nll == doctest::Approx(simplex_nll).epsilon(1e-6));
  CHECK(report.nll <= simplex_nll + 1e-8);
}

TEST_CASE("fit is deterministic and its trace is monotone") {
  std::mt19937 gen(40);
  const ComparisonDataset data = testsupport::random_dataset(4, gen, true);
  const ModelConfig config = config_of(Family::kRaoKupper, 1, 1);
  FitOptions options;
  options.seed = 7;
  const FitReport a = arenarank::fit(data, config, options);
  const FitReport b = arenarank::fit(data, config, options);
  CHECK(a.nll == b.nll);
  CHECK((arenarank::pack_params(config, a.params).array() ==
         arenarank::pack_params(config, b.params).array())
            .all());
  CHECK(a.iterations == b.iterations);
  for (std::size_t k = 1; k < a.nll_history.size(); ++k) {
    CHECK(a.nll_history[k] <= a.nll_history[k - 1] + 1e-12);
  }
}

TEST_CASE("infeasible tie starts are nudged and reported") {
  std::mt19937 gen(41);
  const ComparisonDataset data = testsupport::random_dataset(4, gen, true);

  SUBCASE("scalar threshold") {
    const ModelConfig config = config_of(Family::kRaoKupper, std::nullopt, 0);
    // The zero initialization is infeasible here: ties observed, p_tie = 0.
    CHECK(std::isinf(
        arenarank::nll(data, config, arenarank::init_params(config, 4, 0))));
    const FitReport report = arenarank::fit(data, config);
    CHECK(std::isfinite(report.nll));
    CHECK(report.converged);
    REQUIRE_FALSE(report.diagnostics.empty());
  }

  SUBCASE("factored threshold") {
    const ModelConfig config = config_of(Family::kRaoKupper, std::nullopt, 2);
    const FitReport report = arenarank::fit(data, config);
    CHECK(std::isfinite(report.nll));
    REQUIRE_FALSE(report.diagnostics.empty());
  }
}

TEST_CASE("iteration cap reports a non-converged best effort") {
  std::mt19937 gen(42);
  const ComparisonDataset data = testsupport::random_dataset(5, gen, true);
  const ModelConfig config = config_of(Family::kDavidson, 2, 2);
  FitOptions options;
  options.max_iter = 1;
  const FitReport report = arenarank::fit(data, config, options);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations <= 1);
  CHECK(std::isfinite(report.nll));
}

TEST_CASE("fitting with covariance lands on the unit-constraint gauge") {
  // Counts generated from a model with heterogeneous per-competitor
  // variances, so an interior optimum exists; arbitrary counts can push the
  // variance parameters toward the boundary instead.
  const int m = 6;
  Eigen::VectorXd mu(m), delta(m);
  mu << 0.8, 0.5, 0.2, -0.1, -0.5, -0.9;
  delta << 0.3, -0.2, 0.1, -0.4, 0.2, 0.0;
  std::vector<arenarank::PairCounts> pairs;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double s = std::exp(delta[i]) + std::exp(delta[j]);
      const double z = (mu[i] - mu[j]) / std::sqrt(s);
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double n = 2000.0;
      pairs.push_back({i, j, std::round(n * p), n - std::round(n * p), 0.0});
    }
  }
  std::vector<std::string> names;
  for (int k = 0; k < m; ++k) names.push_back("c" + std::to_string(k));
  const ComparisonDataset data(names, pairs);

  const ModelConfig config = config_of(Family::kBt, 0, std::nullopt);
  const FitReport report = arenarank::fit(data, config);
  CHECK(report.converged);
  CHECK(arenarank::constraint_value(report.params) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(report.params.mu.sum()) < 1e-8);
  // The generating model, rescaled to the unit-constraint gauge, is the
  // optimum the fit should land near.
  const double c = (1.0 - 1.0 / m) * delta.array().exp().sum();
  for (int i = 0; i < m; ++i) {
    CHECK(report.params.mu[i] ==
          doctest::Approx(mu[i] / std::sqrt(c)).epsilon(0.05));
  }
}

TEST_CASE("scores recover a planted strength ordering") {
  // Counts generated from p = sigma(mu_i - mu_j) with 20000 votes per pair,
  // rounded; the fit must land near the planted scores.
  const Eigen::Vector4d truth(0.9, 0.3, -0.3, -0.9);
  std::vector<arenarank::PairCounts> pairs;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double p = 1.0 / (1.0 + std::exp(-(truth[i] - truth[j])));
      const double n = 20000.0;
      pairs.push_back({i, j, std::round(n * p), n - std::round(n * p), 0.0});
    }
  }
  const ComparisonDataset data({"a", "b", "c", "d"}, pairs);
  const FitReport report = arenarank::fit(
      data, config_of(Family::kBt, std::nullopt, std::nullopt));
  CHECK(report.converged);
  for (int i = 0; i < 4; ++i) {
    CHECK(report.params.mu[i] == doctest::Approx(truth[i]).epsilon(0.02));
  }
}

TEST_CASE("minimizer handles a curved valley with both memory modes") {
  // Rosenbrock in 6 dimensions; minimum at the all-ones vector.
  const auto rosenbrock = [](const Eigen::VectorXd& x, double& f,
                             Eigen::VectorXd& g) {
    const int n = static_cast<int>(x.size());
    f = 0.0;
    g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i + 1 < n; ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      f += 100.0 * a * a + b * b;
      g[i] += -400.0 * a * x[i] - 2.0 * b;
      g[i + 1] += 200.0 * a;
    }
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(6, -1.2);

  arenarank::internal::MinimizeOptions dense;
  dense.tol = 1e-10;
  dense.max_iter = 5000;
  const auto dense_result =
      arenarank::internal::minimize(rosenbrock, nullptr, x0, dense);
  CHECK(dense_result.converged);
  CHECK((dense_result.x.array() - 1.0).abs().maxCoeff() < 1e-5);

  arenarank::internal::MinimizeOptions limited = dense;
  limited.dense_limit = 0;  // force the limited-memory path
  const auto lbfgs_result =
      arenarank::internal::minimize(rosenbrock, nullptr, x0, limited);
  CHECK(lbfgs_result.converged);
  CHECK((lbfgs_result.x.array() - 1.0).abs().maxCoeff() < 1e-5);
}

TEST_CASE("minimizer rejects a non-finite start") {
  const auto objective = [](const Eigen::VectorXd& x, double& f,
                            Eigen::VectorXd& g) {
    f = std::numeric_limits<double>::infinity();
    g = Eigen::VectorXd::Zero(x.size());
  };
  arenarank::internal::MinimizeOptions options;
  CHECK_THROWS_AS(arenarank::internal::minimize(
                      objective, nullptr, Eigen::VectorXd::Zero(2), options),
                  std::runtime_error);
}

}  // TEST_SUITE
