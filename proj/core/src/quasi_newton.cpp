#include "quasi_newton.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace arenarank::internal {
namespace {

constexpr double kArmijo = 1e-4;    // sufficient-decrease constant
constexpr double kCurvature = 0.9;  // strong-Wolfe curvature constant

struct Evaluation {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd g;
};

class Evaluator {
 public:
  explicit Evaluator(const ObjectiveFn& objective) : objective_(objective) {}

  Evaluation at(const Eigen::VectorXd& x) {
    Evaluation e;
    e.x = x;
    objective_(x, e.f, e.g);
    return e;
  }

 private:
  const ObjectiveFn& objective_;
};

struct LineSearchResult {
  bool ok = false;        // strong Wolfe satisfied
  bool decreased = false; // at least sufficient decrease found
  Evaluation point;
  double step = 0.0;
};

// Strong-Wolfe search along d from e0 (phi(t) = f(x + t d)).  A non-finite
// phi(t) is handled exactly like a sufficient-decrease violation, so the
// search backs off from infeasible regions; shrinking is capped.
LineSearchResult line_search(Evaluator& eval, const Evaluation& e0,
                             const Eigen::VectorXd& d) {
  LineSearchResult result;
  const double phi0 = e0.f;
  const double dphi0 = e0.g.dot(d);
  if (!(dphi0 < 0.0)) return result;  // not a descent direction

  const auto sufficient = [&](double t, double f) {
    return std::isfinite(f) && f <= phi0 + kArmijo * t * dphi0;
  };

  // Bisection zoom on a bracket [lo, hi] where lo satisfies sufficient
  // decrease and the minimizer is trapped between them (Wolfe bracketing).
  const auto zoom = [&](double t_lo, Evaluation e_lo, double t_hi) {
    for (int k = 0; k < 50; ++k) {
      const double t = 0.5 * (t_lo + t_hi);
      Evaluation e = eval.at(e0.x + t * d);
      if (!sufficient(t, e.f) || e.f >= e_lo.f) {
        t_hi = t;
        continue;
      }
      const double dphi = e.g.dot(d);
      if (std::abs(dphi) <= -kCurvature * dphi0) {
        result.ok = result.decreased = true;
        result.point = std::move(e);
        result.step = t;
        return;
      }
      if (dphi * (t_hi - t_lo) >= 0.0) t_hi = t_lo;
      t_lo = t;
      e_lo = std::move(e);
    }
    // Wolfe not reached within the cap: accept the best sufficient-decrease
    // point so progress is still monotone.
    if (e_lo.f < phi0) {
      result.decreased = true;
      result.point = std::move(e_lo);
      result.step = t_lo;
    }
  };

  double t_prev = 0.0;
  Evaluation e_prev = e0;
  double t = 1.0;
  for (int k = 0; k < 50; ++k) {
    Evaluation e = eval.at(e0.x + t * d);
    if (!sufficient(t, e.f) || (k > 0 && e.f >= e_prev.f)) {
      zoom(t_prev, std::move(e_prev), t);
      return result;
    }
    const double dphi = e.g.dot(d);
    if (std::abs(dphi) <= -kCurvature * dphi0) {
      result.ok = result.decreased = true;
      result.point = std::move(e);
      result.step = t;
      return result;
    }
    if (dphi >= 0.0) {
      zoom(t, std::move(e), t_prev);
      return result;
    }
    t_prev = t;
    e_prev = std::move(e);
    t *= 2.1;
  }
  // Ran off the expansion cap while still decreasing: keep the last point.
  if (e_prev.f < phi0) {
    result.decreased = true;
    result.point = std::move(e_prev);
    result.step = t_prev;
  }
  return result;
}

// Two-loop recursion for the L-BFGS direction.
Eigen::VectorXd lbfgs_direction(const std::deque<Eigen::VectorXd>& s_hist,
                                const std::deque<Eigen::VectorXd>& y_hist,
                                const Eigen::VectorXd& g) {
  const int h = static_cast<int>(s_hist.size());
  Eigen::VectorXd q = g;
  std::vector<double> alpha(h), rho(h);
  for (int k = h - 1; k >= 0; --k) {
    rho[k] = 1.0 / y_hist[k].dot(s_hist[k]);
    alpha[k] = rho[k] * s_hist[k].dot(q);
    q -= alpha[k] * y_hist[k];
  }
  if (h > 0) {
    const double gamma =
        s_hist[h - 1].dot(y_hist[h - 1]) / y_hist[h - 1].squaredNorm();
    q *= gamma;
  }
  for (int k = 0; k < h; ++k) {
    const double beta = rho[k] * y_hist[k].dot(q);
    q += (alpha[k] - beta) * s_hist[k];
  }
  return -q;
}

}  // namespace

MinimizeResult minimize(const ObjectiveFn& objective,
                        const ProjectionFn& projection,
                        const Eigen::VectorXd& x0,
                        const MinimizeOptions& options) {
  const int n = static_cast<int>(x0.size());
  Evaluator eval(objective);
  MinimizeResult result;

  Evaluation current = eval.at(x0);
  if (!std::isfinite(current.f)) {
    throw std::runtime_error("objective is not finite at the start point");
  }

  const bool dense = n <= options.dense_limit;
  Eigen::MatrixXd hessian_inv;  // dense mode only
  if (dense) hessian_inv = Eigen::MatrixXd::Identity(n, n);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  bool scale_pending = true;  // rescale the metric after the first step

  int stagnant = 0;
  while (result.iterations < options.max_iter) {
    if (current.g.lpNorm<Eigen::Infinity>() <= options.tol) {
      result.converged = true;
      break;
    }

    const auto reset_metric = [&] {
      result.diagnostics.push_back("reset search metric at iteration " +
                                   std::to_string(result.iterations));
      if (dense) hessian_inv.setIdentity();
      s_hist.clear();
      y_hist.clear();
      scale_pending = true;
    };

    Eigen::VectorXd direction =
        dense ? Eigen::VectorXd(-(hessian_inv * current.g))
              : lbfgs_direction(s_hist, y_hist, current.g);
    bool plain_gradient = false;
    if (!(direction.dot(current.g) < 0.0)) {
      reset_metric();
      direction = -current.g;
      plain_gradient = true;
    }

    LineSearchResult ls = line_search(eval, current, direction);
    if (!ls.decreased && !plain_gradient) {
      // The curvature model may be stale (e.g. distorted by the gauge
      // projection); retry once from plain steepest descent.
      reset_metric();
      ls = line_search(eval, current, -current.g);
    }
    if (!ls.decreased) {
      result.diagnostics.push_back("line search found no decrease at iteration " +
                                   std::to_string(result.iterations));
      break;
    }

    // Project the accepted point back to the canonical gauge; the objective
    // is invariant, the gradient is re-evaluated at the representative.
    Evaluation next = ls.point;
    if (projection) {
      const Eigen::VectorXd projected = projection(ls.point.x);
      if (projected != ls.point.x) next = eval.at(projected);
    }

    const Eigen::VectorXd s = next.x - current.x;
    const Eigen::VectorXd y = next.g - current.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (dense) {
        if (scale_pending) {
          hessian_inv *= sy / y.squaredNorm();
          scale_pending = false;
        }
        const Eigen::VectorXd hy = hessian_inv * y;
        const double yhy = y.dot(hy);
        // BFGS inverse update in rank-two form.
        hessian_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                       (hy * s.transpose() + s * hy.transpose()) / sy;
      } else {
        s_hist.push_back(s);
        y_hist.push_back(y);
        if (static_cast<int>(s_hist.size()) > options.lbfgs_history) {
          s_hist.pop_front();
          y_hist.pop_front();
        }
      }
    }

    const double decrease = current.f - next.f;
    const bool tiny = decrease < options.tol * (1.0 + std::abs(next.f));
    stagnant = tiny ? stagnant + 1 : 0;

    current = std::move(next);
    ++result.iterations;
    result.history.push_back(current.f);

    if (stagnant >= options.stagnation_runs) {
      result.converged = true;
      break;
    }
  }

  if (current.g.lpNorm<Eigen::Infinity>() <= options.tol) {
    result.converged = true;
  }
  result.x = std::move(current.x);
  result.f = current.f;
  result.g = std::move(current.g);
  return result;
}

}  // namespace arenarank::internal
