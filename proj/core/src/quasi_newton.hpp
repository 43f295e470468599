#pragma once

// Internal quasi-Newton minimizer: dense BFGS for small problems, L-BFGS
// above dense_limit parameters, strong-Wolfe line search that treats
// non-finite trial objectives as sufficient-decrease failures (so +inf
// regions act as barriers), and an optional projection applied after every
// accepted step for objectives with exactly flat (gauge) directions.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace arenarank::internal {

// Evaluates f and its gradient at x in one pass.  When the returned f is not
// finite the gradient content is ignored.
using ObjectiveFn =
    std::function<void(const Eigen::VectorXd& x, double& f, Eigen::VectorXd& g)>;

// Maps an iterate to its canonical representative; must leave f unchanged.
using ProjectionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MinimizeOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  int dense_limit = 1000;   // parameters above this use L-BFGS
  int lbfgs_history = 20;
  int stagnation_runs = 3;  // consecutive tiny decreases that mean converged
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;  // f after each accepted step
  std::vector<std::string> diagnostics;
};

// x0 must have a finite objective (and be already projected).
MinimizeResult minimize(const ObjectiveFn& objective,
                        const ProjectionFn& projection,
                        const Eigen::VectorXd& x0,
                        const MinimizeOptions& options);

}  // namespace arenarank::internal
