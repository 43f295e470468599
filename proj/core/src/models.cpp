#include "arenarank/models.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "effective_counts.hpp"

namespace arenarank {
namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

// log(1 + e^x) without overflow for large |x|.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

// Per-pair tie threshold without materializing the full matrix:
// eta_ij = g_i . phi_j + g_j . phi_i on the cached basis.
double pair_threshold(const ModelConfig& config, const ParameterSet& params,
                      const Eigen::MatrixXd& basis, int i, int j) {
  if (!config.has_tie()) return 0.0;
  if (*config.k_tie == 0) return params.eta;
  return params.tie_coeffs.row(i).dot(basis.row(j)) +
         params.tie_coeffs.row(j).dot(basis.row(i));
}

}  // namespace

bool family_has_ties(Family family) {
  return family == Family::kRaoKupper || family == Family::kDavidson;
}

std::string family_name(Family family) {
  switch (family) {
    case Family::kBtCollapsedTies: return "bt-collapsed";
    case Family::kBt: return "bt";
    case Family::kRaoKupper: return "rao-kupper";
    case Family::kDavidson: return "davidson";
  }
  fail("unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "bt-collapsed" || name == "bt-collapsed-ties") {
    return Family::kBtCollapsedTies;
  }
  if (name == "bt") return Family::kBt;
  if (name == "rao-kupper") return Family::kRaoKupper;
  if (name == "davidson") return Family::kDavidson;
  fail("unknown model family: " + name +
       " (expected bt-collapsed, bt, rao-kupper or davidson)");
}

void ModelConfig::validate(int m) const {
  if (m < 1) fail("roster size must be positive");
  if (family_has_ties(family)) {
    if (!k_tie) fail(family_name(family) + " requires a tie block (k_tie)");
  } else if (k_tie) {
    fail(family_name(family) + " does not take tie parameters");
  }
  if (k_tie && (*k_tie < 0 || *k_tie > m)) {
    fail("k_tie must lie in [0, m]");
  }
  if (k_cov && (*k_cov < 0 || *k_cov > m)) {
    fail("k_cov must lie in [0, m]");
  }
}

Eigen::MatrixXd dct_basis(int m, int k) {
  if (m < 1) fail("basis size must be positive");
  if (k < 1 || k > m) fail("basis column count must lie in [1, m]");
  Eigen::MatrixXd phi(m, k);
  const double scale = std::sqrt(2.0 / m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      phi(i, j) =
          scale * std::cos(kPi * (2.0 * i + 1.0) * (2.0 * j + 1.0) / (4.0 * m));
    }
  }
  return phi;
}

Eigen::MatrixXd cached_dct_basis(int m, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, Eigen::MatrixXd> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.try_emplace(std::make_pair(m, k));
  if (inserted) it->second = dct_basis(m, k);
  return it->second;
}

Eigen::MatrixXd tie_thresholds(const ModelConfig& config,
                               const ParameterSet& params) {
  if (!config.has_tie()) fail("model has no tie block");
  const int m = params.num_competitors();
  config.validate(m);
  if (*config.k_tie == 0) {
    return Eigen::MatrixXd::Constant(m, m, params.eta);
  }
  if (params.tie_coeffs.rows() != m || params.tie_coeffs.cols() != *config.k_tie) {
    fail("tie coefficient matrix has the wrong shape");
  }
  const Eigen::MatrixXd phi = cached_dct_basis(m, *config.k_tie);
  const Eigen::MatrixXd cross = params.tie_coeffs * phi.transpose();
  return cross + cross.transpose();
}

double pair_variance(const ParameterSet& params, int i, int j) {
  if (!params.has_cov()) fail("model has no covariance block");
  const int m = params.num_competitors();
  if (i < 0 || j < 0 || i >= m || j >= m || i == j) {
    fail("pair variance needs two distinct competitors");
  }
  double s = std::exp(params.cov_log_diag[i]) + std::exp(params.cov_log_diag[j]);
  if (params.cov_factors.size() > 0) {
    s += (params.cov_factors.row(i) - params.cov_factors.row(j)).squaredNorm();
  }
  return s;
}

double standardized_margin(const ParameterSet& params, int i, int j) {
  const double diff = params.mu[i] - params.mu[j];
  if (!params.has_cov()) return diff;
  return diff / std::sqrt(pair_variance(params, i, j));
}

LogProbabilityTriple log_outcome_probabilities(Family family, double z,
                                               double eta) {
  LogProbabilityTriple out;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  switch (family) {
    case Family::kBtCollapsedTies:
    case Family::kBt:
      out.log_win = -softplus(-z);
      out.log_loss = -softplus(z);
      out.log_tie = kNegInf;
      return out;
    case Family::kRaoKupper:
      out.log_win = -softplus(eta - z);
      out.log_loss = -softplus(z + eta);
      if (eta < 0.0) {
        out.valid = false;
        out.log_tie = kNegInf;
      } else if (eta == 0.0) {
        out.log_tie = kNegInf;
      } else {
        out.log_tie = std::log(std::expm1(2.0 * eta)) + out.log_win + out.log_loss;
      }
      return out;
    case Family::kDavidson: {
      const double a0 = 0.5 * z, a1 = -0.5 * z, a2 = eta;
      const double top = std::max(a0, std::max(a1, a2));
      const double lse = top + std::log(std::exp(a0 - top) + std::exp(a1 - top) +
                                        std::exp(a2 - top));
      out.log_win = a0 - lse;
      out.log_loss = a1 - lse;
      out.log_tie = a2 - lse;
      return out;
    }
  }
  fail("unknown family");
}

ProbabilityTriple outcome_probabilities_from_margin(Family family, double z,
                                                    double eta) {
  const LogProbabilityTriple logs = log_outcome_probabilities(family, z, eta);
  if (!logs.valid) {
    throw std::domain_error(
        "rao-kupper tie threshold must be nonnegative (eta = " +
        std::to_string(eta) + ")");
  }
  ProbabilityTriple out;
  out.p_win = std::exp(logs.log_win);
  out.p_loss = std::exp(logs.log_loss);
  out.p_tie = std::isinf(logs.log_tie) ? 0.0 : std::exp(logs.log_tie);
  return out;
}

LogProbGradients log_outcome_gradients(Family family, double z, double eta) {
  LogProbGradients g;
  switch (family) {
    case Family::kBtCollapsedTies:
    case Family::kBt:
      g.dwin_dz = sigmoid(-z);
      g.dloss_dz = -sigmoid(z);
      return g;
    case Family::kRaoKupper: {
      const double sw = sigmoid(eta - z);  // 1 - p_win-side slope
      const double sl = sigmoid(z + eta);
      g.dwin_dz = sw;
      g.dwin_deta = -sw;
      g.dloss_dz = -sl;
      g.dloss_deta = -sl;
      g.dtie_dz = sw - sl;
      // d/deta ln(e^{2 eta} - 1) = 2 / (1 - e^{-2 eta}); +inf at the
      // boundary eta = 0, where p_tie = 0 and the term is never used with
      // finite likelihoods.
      g.dtie_deta = 2.0 / (-std::expm1(-2.0 * eta)) - sw - sl;
      return g;
    }
    case Family::kDavidson: {
      const ProbabilityTriple p =
          outcome_probabilities_from_margin(family, z, eta);
      const double mean_dz = 0.5 * (p.p_win - p.p_loss);
      g.dwin_dz = 0.5 - mean_dz;
      g.dloss_dz = -0.5 - mean_dz;
      g.dtie_dz = -mean_dz;
      g.dwin_deta = -p.p_tie;
      g.dloss_deta = -p.p_tie;
      g.dtie_deta = 1.0 - p.p_tie;
      return g;
    }
  }
  fail("unknown family");
}

ProbabilityTriple outcome_probabilities(const ModelConfig& config,
                                        const ParameterSet& params, int i,
                                        int j) {
  const int m = params.num_competitors();
  config.validate(m);
  if (i < 0 || j < 0 || i >= m || j >= m || i == j) {
    fail("outcome probabilities need two distinct competitors");
  }
  const Eigen::MatrixXd basis =
      (config.has_tie() && *config.k_tie >= 1)
          ? cached_dct_basis(m, *config.k_tie)
          : Eigen::MatrixXd();
  const double z = standardized_margin(params, i, j);
  const double eta = pair_threshold(config, params, basis, i, j);
  return outcome_probabilities_from_margin(config.family, z, eta);
}

std::vector<PairCounts> predicted_counts(const ModelConfig& config,
                                         const ParameterSet& params,
                                         const ComparisonDataset& data) {
  const int m = params.num_competitors();
  config.validate(m);
  if (data.num_competitors() != m) {
    fail("dataset and parameters disagree on the roster size");
  }
  const internal::EffectiveCounts effective =
      internal::effective_counts(data, config.family);
  const Eigen::MatrixXd basis =
      (config.has_tie() && *config.k_tie >= 1)
          ? cached_dct_basis(m, *config.k_tie)
          : Eigen::MatrixXd();
  std::vector<PairCounts> predicted;
  predicted.reserve(effective.pairs.size());
  for (const internal::EffectivePair& p : effective.pairs) {
    const double z = standardized_margin(params, p.i, p.j);
    const double eta = pair_threshold(config, params, basis, p.i, p.j);
    const ProbabilityTriple triple =
        outcome_probabilities_from_margin(config.family, z, eta);
    const double n = p.total();
    predicted.push_back(
        {p.i, p.j, n * triple.p_win, n * triple.p_loss, n * triple.p_tie});
  }
  return predicted;
}

namespace internal {

EffectiveCounts effective_counts(const ComparisonDataset& data, Family family) {
  EffectiveCounts out;
  out.pairs.reserve(data.pairs().size());
  for (const PairCounts& p : data.pairs()) {
    EffectivePair e{p.i, p.j, p.wins_i, p.wins_j, p.ties};
    switch (family) {
      case Family::kBtCollapsedTies:
        if (p.ties > 0.0) {
          fail("collapsed-ties family requires pre-collapsed data (pair " +
               data.competitors()[p.i] + " vs " + data.competitors()[p.j] +
               " has tie votes)");
        }
        break;
      case Family::kBt:
        e.ties = 0.0;
        if (e.wins + e.losses <= 0.0) continue;  // pure-tie pair: dropped
        break;
      case Family::kRaoKupper:
      case Family::kDavidson:
        break;
    }
    out.total_votes += e.total();
    out.pairs.push_back(e);
  }
  return out;
}

}  // namespace internal

}  // namespace arenarank
