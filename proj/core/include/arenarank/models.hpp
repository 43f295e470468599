#pragma once

// Paired-comparison outcome models.  All families reduce each pair (i, j) to
// a standardized margin z_ij and (for tie-capable families) a tie threshold
// eta_ij, then map (z, eta) to win/loss/tie probabilities:
//
//   bt            p_win = sigma(z),            p_tie = 0
//   rao-kupper    p_win = sigma(z - eta),      p_loss = sigma(-z - eta),
//                 p_tie = (e^{2 eta} - 1) sigma(z - eta) sigma(-z - eta)
//   davidson      (p_win, p_loss, p_tie) = softmax(z/2, -z/2, eta)
//
// The margin is z_ij = mu_i - mu_j, or (mu_i - mu_j)/sqrt(s_ij) when a
// covariance structure Sigma = D + Lambda Lambda^T is present, with
// s_ij = d_ii + d_jj + ||lambda_i - lambda_j||^2.  Tie thresholds are either
// one shared scalar or the factored form eta_ij = g_i.phi_j + g_j.phi_i on a
// DCT-IV basis.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arenarank/dataset.hpp"

namespace arenarank {

enum class Family {
  kBtCollapsedTies,  // Bradley-Terry on pre-collapsed data (ties = half wins)
  kBt,               // Bradley-Terry, tie votes dropped
  kRaoKupper,
  kDavidson,
};

// True for families that assign positive probability to ties.
bool family_has_ties(Family family);

// Stable serialized spellings: bt-collapsed, bt, rao-kupper, davidson.
std::string family_name(Family family);
Family family_from_name(const std::string& name);

// Which parameter blocks a model carries.
//   k_cov: nullopt = no covariance; 0 = diagonal D only; k >= 1 adds an
//          m x k factor matrix Lambda.
//   k_tie: nullopt = no tie parameters (BT families only); 0 = one shared
//          scalar threshold; k >= 1 = factored thresholds with an m x k
//          coefficient matrix G.  Tie-capable families require k_tie.
struct ModelConfig {
  Family family = Family::kBt;
  std::optional<int> k_cov;
  std::optional<int> k_tie;

  bool has_cov() const { return k_cov.has_value(); }
  bool has_tie() const { return k_tie.has_value(); }

  // Throws std::invalid_argument unless the blocks are consistent with the
  // family and with the roster size m (factor counts in [0, m]).
  void validate(int m) const;
};

// Parameter values for one model instance.  Blocks not present in the
// configuration stay empty (size 0); eta is meaningful only for k_tie = 0.
// The covariance diagonal is stored in logs: d_ii = exp(cov_log_diag[i]).
struct ParameterSet {
  Eigen::VectorXd mu;           // competitor scores, length m
  double eta = 0.0;             // shared tie threshold (k_tie = 0)
  Eigen::MatrixXd tie_coeffs;   // G, m x k_tie (k_tie >= 1)
  Eigen::VectorXd cov_log_diag; // delta with d_ii = exp(delta_i), length m
  Eigen::MatrixXd cov_factors;  // Lambda, m x k_cov (k_cov >= 1)

  int num_competitors() const { return static_cast<int>(mu.size()); }
  bool has_cov() const { return cov_log_diag.size() > 0; }
};

struct ProbabilityTriple {
  double p_win = 0.0;
  double p_loss = 0.0;
  double p_tie = 0.0;
};

// Log-space probabilities; log_tie is -inf where p_tie = 0 (BT, or the
// Rao-Kupper boundary eta = 0).  Rao-Kupper requires eta >= 0: negative
// thresholds make the triple invalid and nll infinite.
struct LogProbabilityTriple {
  double log_win = 0.0;
  double log_loss = 0.0;
  double log_tie = 0.0;
  bool valid = true;  // false iff Rao-Kupper with eta < 0
};

// Orthonormal discrete cosine basis (DCT-IV), 1-based entries
//   phi[i][j] = sqrt(2/m) cos(pi (2i-1)(2j-1) / (4m)),  m x k, k <= m.
// Columns are orthonormal; the first column is strictly positive.
Eigen::MatrixXd dct_basis(int m, int k);

// Shared per-process cache keyed by (m, k); returns a copy.
Eigen::MatrixXd cached_dct_basis(int m, int k);

// Full m x m threshold matrix H: eta * ones for k_tie = 0, otherwise
// H = G Phi^T + Phi G^T (symmetric by construction).
Eigen::MatrixXd tie_thresholds(const ModelConfig& config,
                               const ParameterSet& params);

// s_ij = d_ii + d_jj + ||lambda_i - lambda_j||^2 (factors contribute only
// when present).  Requires a covariance block; i != j.
double pair_variance(const ParameterSet& params, int i, int j);

// z_ij = (mu_i - mu_j) / sqrt(s_ij), falling back to the plain difference
// mu_i - mu_j when no covariance block is present.
double standardized_margin(const ParameterSet& params, int i, int j);

// Per-family map from (z, eta) to the outcome triple; eta is ignored by the
// BT families.  The triple sums to 1 within 1e-12 (BT: p_tie = 0 exactly).
ProbabilityTriple outcome_probabilities_from_margin(Family family, double z,
                                                    double eta);
LogProbabilityTriple log_outcome_probabilities(Family family, double z,
                                               double eta);

// Derivatives of the log-probabilities with respect to z and eta, used by
// the analytic likelihood gradient.  For p_tie = 0 the tie entries are 0.
struct LogProbGradients {
  double dwin_dz = 0.0, dwin_deta = 0.0;
  double dloss_dz = 0.0, dloss_deta = 0.0;
  double dtie_dz = 0.0, dtie_deta = 0.0;
};
LogProbGradients log_outcome_gradients(Family family, double z, double eta);

// Triple for one pair under a full configuration (margin and threshold are
// derived from the parameter blocks).  i != j; swapping i and j swaps
// p_win and p_loss and preserves p_tie.
ProbabilityTriple outcome_probabilities(const ModelConfig& config,
                                        const ParameterSet& params, int i,
                                        int j);

// Expected counts: each pair's effective total multiplied by its triple.
// BT families predict zero ties; for the plain BT family the effective total
// excludes tie votes (which that family discards), so that
// wins_i + wins_j + ties always reproduces the effective pair total.
std::vector<PairCounts> predicted_counts(const ModelConfig& config,
                                         const ParameterSet& params,
                                         const ComparisonDataset& data);

}  // namespace arenarank
