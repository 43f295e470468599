#pragma once

// Maximum-likelihood estimation.  The objective is the per-vote negative
// log-likelihood
//
//   nll = -(1/n) sum_pairs [ w_ij ln p_win + l_ij ln p_loss + t_ij ln p_tie ]
//
// minimized by a quasi-Newton method (dense BFGS, or L-BFGS for large
// parameter vectors) with a strong-Wolfe line search and analytic gradients.
// Score shift and covariance scale are unidentified; iterates are projected
// back to the canonical gauge (normalize) after every accepted step.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arenarank/dataset.hpp"
#include "arenarank/models.hpp"

namespace arenarank {

struct FitOptions {
  double tol = 1e-8;       // gradient sup-norm target, also stagnation scale
  int max_iter = 5000;
  std::uint64_t seed = 0;  // seeds the score initialization
};

struct FitReport {
  ParameterSet params;
  double nll = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;           // sup-norm at the final iterate
  std::vector<double> nll_history;      // objective after each accepted step
  std::vector<std::string> diagnostics; // non-fatal notes (nudges, fallbacks)
};

// Number of free parameters: m scores, plus m log-diagonals and m*k_cov
// factor entries when covariance is present, plus 1 (scalar) or m*k_tie
// (factored) tie parameters when the family models ties.
int param_count(const ModelConfig& config, int m);

// Scores drawn uniformly from (-0.5, 0.5) via the seeded generator and then
// mean-centered; covariance starts at Sigma = (1/m) I (log-diagonal = -ln m,
// factors zero); tie parameters start at zero.
ParameterSet init_params(const ModelConfig& config, int m, std::uint64_t seed);

// Flat parameter vector layout (used by the optimizer, the gradient, and the
// finite-difference tests): [ mu | delta, Lambda row-major | eta or G
// row-major ], blocks present as configured.
Eigen::VectorXd pack_params(const ModelConfig& config,
                            const ParameterSet& params);
ParameterSet unpack_params(const ModelConfig& config, int m,
                           const Eigen::VectorXd& theta);

// Per-vote negative log-likelihood.  Returns +inf when a positive-count
// outcome has zero probability (Rao-Kupper with eta_ij <= 0 on a pair with
// ties).  The collapsed-BT family requires pre-collapsed data (throws on tie
// counts); the plain BT family drops tie votes.
double nll(const ComparisonDataset& data, const ModelConfig& config,
           const ParameterSet& params);

// Analytic gradient of nll in the pack_params layout.
Eigen::VectorXd nll_gradient(const ComparisonDataset& data,
                             const ModelConfig& config,
                             const ParameterSet& params);

// Gauge constraint on the covariance:
//   C = (1 - 1/m) tr(D) + ||Lambda||_F^2 - (1/m) ||Lambda^T 1||^2
// which equals (1/2m) sum_ij s_ij and tr(P Sigma P), P = I - (1/m) 11^T.
double constraint_value(const ParameterSet& params);

// dC/dd_ii = 1 - 1/m (as a vector), dC/dLambda = 2 P Lambda.
Eigen::VectorXd constraint_grad_diag(const ParameterSet& params);
Eigen::MatrixXd constraint_grad_factors(const ParameterSet& params);

// Canonical gauge: scores mean-centered; when covariance is present, factor
// columns are mean-centered (Lambda <- P Lambda) and the whole model is
// rescaled so C = 1 (mu /= sqrt(C), delta -= ln C, Lambda /= sqrt(C)).
// Leaves nll unchanged and is idempotent.
ParameterSet normalize(const ModelConfig& config, const ParameterSet& params);

// Full fit from init_params.  Convergence: gradient sup-norm <= tol, or
// relative objective decrease below tol*(1+|nll|) on three consecutive
// iterations; otherwise stops at max_iter with converged = false and the
// best iterate found.  Dense BFGS up to 1000 parameters, L-BFGS (history 20)
// above.  Deterministic for fixed inputs and options.
FitReport fit(const ComparisonDataset& data, const ModelConfig& config,
              const FitOptions& options = {});

}  // namespace arenarank
