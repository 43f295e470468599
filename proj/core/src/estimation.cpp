#include "arenarank/estimation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "effective_counts.hpp"
#include "quasi_newton.hpp"

namespace arenarank {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

// Offsets of the parameter blocks inside the flat vector:
// [ mu | delta, Lambda (row-major) | eta or G (row-major) ].
struct ParamLayout {
  int m = 0;
  int k_cov = -1;  // -1 = no covariance block
  int k_tie = -1;  // -1 = no tie block
  int delta_offset = -1;
  int lambda_offset = -1;
  int tie_offset = -1;
  int total = 0;

  ParamLayout(const ModelConfig& config, int m_in) : m(m_in) {
    config.validate(m);
    int offset = m;
    if (config.has_cov()) {
      k_cov = *config.k_cov;
      delta_offset = offset;
      offset += m;
      if (k_cov >= 1) {
        lambda_offset = offset;
        offset += m * k_cov;
      }
    }
    if (config.has_tie()) {
      k_tie = *config.k_tie;
      tie_offset = offset;
      offset += k_tie == 0 ? 1 : m * k_tie;
    }
    total = offset;
  }
};

void check_shapes(const ModelConfig& config, const ParameterSet& params) {
  const int m = params.num_competitors();
  config.validate(m);
  if (config.has_cov()) {
    if (params.cov_log_diag.size() != m) {
      fail("covariance log-diagonal must have one entry per competitor");
    }
    const int k = *config.k_cov;
    if (k >= 1 && (params.cov_factors.rows() != m || params.cov_factors.cols() != k)) {
      fail("covariance factor matrix has the wrong shape");
    }
  }
  if (config.has_tie() && *config.k_tie >= 1) {
    if (params.tie_coeffs.rows() != m ||
        params.tie_coeffs.cols() != *config.k_tie) {
      fail("tie coefficient matrix has the wrong shape");
    }
  }
}

// Shared objective pass: per-vote nll and (optionally) its gradient in the
// flat layout.  Counts of zero contribute nothing, so boundary log-probs
// (-inf with zero count) never poison the sums.
double nll_pass(const internal::EffectiveCounts& data,
                const ModelConfig& config, const ParameterSet& params,
                const ParamLayout& layout, const Eigen::MatrixXd& tie_basis,
                Eigen::VectorXd* grad_out) {
  const Family family = config.family;
  const bool with_grad = grad_out != nullptr;
  if (with_grad) grad_out->setZero(layout.total);
  if (data.pairs.empty() || data.total_votes <= 0.0) {
    fail("no votes to evaluate");
  }

  double sum_win = 0.0, sum_loss = 0.0, sum_tie = 0.0;
  for (const internal::EffectivePair& p : data.pairs) {
    const int i = p.i, j = p.j;
    double s = 0.0, z;
    if (layout.k_cov >= 0) {
      s = pair_variance(params, i, j);
      z = (params.mu[i] - params.mu[j]) / std::sqrt(s);
    } else {
      z = params.mu[i] - params.mu[j];
    }
    double eta = 0.0;
    if (layout.k_tie == 0) {
      eta = params.eta;
    } else if (layout.k_tie >= 1) {
      eta = params.tie_coeffs.row(i).dot(tie_basis.row(j)) +
            params.tie_coeffs.row(j).dot(tie_basis.row(i));
    }

    const LogProbabilityTriple logs =
        log_outcome_probabilities(family, z, eta);
    if (!logs.valid) return kInf;
    if (p.ties > 0.0 && std::isinf(logs.log_tie)) return kInf;
    if (p.wins > 0.0) sum_win += p.wins * logs.log_win;
    if (p.losses > 0.0) sum_loss += p.losses * logs.log_loss;
    if (p.ties > 0.0) sum_tie += p.ties * logs.log_tie;

    if (!with_grad) continue;
    const LogProbGradients d = log_outcome_gradients(family, z, eta);
    double gz = 0.0, geta = 0.0;
    if (p.wins > 0.0) {
      gz += p.wins * d.dwin_dz;
      geta += p.wins * d.dwin_deta;
    }
    if (p.losses > 0.0) {
      gz += p.losses * d.dloss_dz;
      geta += p.losses * d.dloss_deta;
    }
    if (p.ties > 0.0) {
      gz += p.ties * d.dtie_dz;
      geta += p.ties * d.dtie_deta;
    }

    Eigen::VectorXd& g = *grad_out;
    if (layout.k_cov >= 0) {
      const double inv_sqrt_s = 1.0 / std::sqrt(s);
      g[i] += gz * inv_sqrt_s;
      g[j] -= gz * inv_sqrt_s;
      const double gs = gz * (-0.5 * z / s);  // chain through s_ij
      g[layout.delta_offset + i] += gs * std::exp(params.cov_log_diag[i]);
      g[layout.delta_offset + j] += gs * std::exp(params.cov_log_diag[j]);
      if (layout.k_cov >= 1) {
        for (int c = 0; c < layout.k_cov; ++c) {
          const double diff =
              params.cov_factors(i, c) - params.cov_factors(j, c);
          g[layout.lambda_offset + i * layout.k_cov + c] += gs * 2.0 * diff;
          g[layout.lambda_offset + j * layout.k_cov + c] -= gs * 2.0 * diff;
        }
      }
    } else {
      g[i] += gz;
      g[j] -= gz;
    }
    if (layout.k_tie == 0) {
      g[layout.tie_offset] += geta;
    } else if (layout.k_tie >= 1) {
      for (int c = 0; c < layout.k_tie; ++c) {
        g[layout.tie_offset + i * layout.k_tie + c] += geta * tie_basis(j, c);
        g[layout.tie_offset + j * layout.k_tie + c] += geta * tie_basis(i, c);
      }
    }
  }

  const double n = data.total_votes;
  if (with_grad) *grad_out *= -1.0 / n;
  return -(sum_win + sum_loss + sum_tie) / n;
}

Eigen::MatrixXd basis_for(const ModelConfig& config, int m) {
  if (config.has_tie() && *config.k_tie >= 1) {
    return cached_dct_basis(m, *config.k_tie);
  }
  return {};
}

}  // namespace

int param_count(const ModelConfig& config, int m) {
  return ParamLayout(config, m).total;
}

ParameterSet init_params(const ModelConfig& config, int m, std::uint64_t seed) {
  config.validate(m);
  ParameterSet params;
  params.mu.resize(m);
  std::mt19937_64 gen(seed);
  for (int i = 0; i < m; ++i) {
    // 53-bit uniform in (-0.5, 0.5); explicit mapping keeps seeded fits
    // identical across standard libraries.
    params.mu[i] = static_cast<double>(gen() >> 11) * 0x1p-53 - 0.5;
  }
  params.mu.array() -= params.mu.mean();
  if (config.has_cov()) {
    params.cov_log_diag = Eigen::VectorXd::Constant(m, -std::log(double(m)));
    if (*config.k_cov >= 1) {
      params.cov_factors = Eigen::MatrixXd::Zero(m, *config.k_cov);
    }
  }
  if (config.has_tie() && *config.k_tie >= 1) {
    params.tie_coeffs = Eigen::MatrixXd::Zero(m, *config.k_tie);
  }
  return params;
}

Eigen::VectorXd pack_params(const ModelConfig& config,
                            const ParameterSet& params) {
  check_shapes(config, params);
  const ParamLayout layout(config, params.num_competitors());
  Eigen::VectorXd theta(layout.total);
  theta.head(layout.m) = params.mu;
  if (layout.k_cov >= 0) {
    theta.segment(layout.delta_offset, layout.m) = params.cov_log_diag;
    for (int i = 0; i < layout.m; ++i) {
      for (int c = 0; c < layout.k_cov; ++c) {
        theta[layout.lambda_offset + i * layout.k_cov + c] =
            params.cov_factors(i, c);
      }
    }
  }
  if (layout.k_tie == 0) {
    theta[layout.tie_offset] = params.eta;
  } else if (layout.k_tie >= 1) {
    for (int i = 0; i < layout.m; ++i) {
      for (int c = 0; c < layout.k_tie; ++c) {
        theta[layout.tie_offset + i * layout.k_tie + c] =
            params.tie_coeffs(i, c);
      }
    }
  }
  return theta;
}

ParameterSet unpack_params(const ModelConfig& config, int m,
                           const Eigen::VectorXd& theta) {
  const ParamLayout layout(config, m);
  if (theta.size() != layout.total) {
    fail("parameter vector has the wrong length");
  }
  ParameterSet params;
  params.mu = theta.head(m);
  if (layout.k_cov >= 0) {
    params.cov_log_diag = theta.segment(layout.delta_offset, m);
    if (layout.k_cov >= 1) {
      params.cov_factors.resize(m, layout.k_cov);
      for (int i = 0; i < m; ++i) {
        for (int c = 0; c < layout.k_cov; ++c) {
          params.cov_factors(i, c) =
              theta[layout.lambda_offset + i * layout.k_cov + c];
        }
      }
    }
  }
  if (layout.k_tie == 0) {
    params.eta = theta[layout.tie_offset];
  } else if (layout.k_tie >= 1) {
    params.tie_coeffs.resize(m, layout.k_tie);
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < layout.k_tie; ++c) {
        params.tie_coeffs(i, c) = theta[layout.tie_offset + i * layout.k_tie + c];
      }
    }
  }
  return params;
}

double nll(const ComparisonDataset& data, const ModelConfig& config,
           const ParameterSet& params) {
  check_shapes(config, params);
  if (data.num_competitors() != params.num_competitors()) {
    fail("dataset and parameters disagree on the roster size");
  }
  const ParamLayout layout(config, params.num_competitors());
  const internal::EffectiveCounts counts =
      internal::effective_counts(data, config.family);
  return nll_pass(counts, config, params, layout,
                  basis_for(config, params.num_competitors()), nullptr);
}

Eigen::VectorXd nll_gradient(const ComparisonDataset& data,
                             const ModelConfig& config,
                             const ParameterSet& params) {
  check_shapes(config, params);
  if (data.num_competitors() != params.num_competitors()) {
    fail("dataset and parameters disagree on the roster size");
  }
  const ParamLayout layout(config, params.num_competitors());
  const internal::EffectiveCounts counts =
      internal::effective_counts(data, config.family);
  Eigen::VectorXd grad;
  nll_pass(counts, config, params, layout,
           basis_for(config, params.num_competitors()), &grad);
  return grad;
}

double constraint_value(const ParameterSet& params) {
  if (!params.has_cov()) fail("model has no covariance block");
  const int m = params.num_competitors();
  double c = (1.0 - 1.0 / m) * params.cov_log_diag.array().exp().sum();
  if (params.cov_factors.size() > 0) {
    c += params.cov_factors.squaredNorm();
    c -= params.cov_factors.colwise().sum().squaredNorm() / m;
  }
  return c;
}

Eigen::VectorXd constraint_grad_diag(const ParameterSet& params) {
  if (!params.has_cov()) fail("model has no covariance block");
  const int m = params.num_competitors();
  return Eigen::VectorXd::Constant(m, 1.0 - 1.0 / m);
}

Eigen::MatrixXd constraint_grad_factors(const ParameterSet& params) {
  if (!params.has_cov() || params.cov_factors.size() == 0) {
    fail("model has no covariance factors");
  }
  const int m = params.num_competitors();
  Eigen::MatrixXd centered = params.cov_factors;
  centered.rowwise() -= params.cov_factors.colwise().mean();
  return 2.0 * centered;
}

ParameterSet normalize(const ModelConfig& config, const ParameterSet& params) {
  check_shapes(config, params);
  ParameterSet out = params;
  out.mu.array() -= out.mu.mean();
  if (!config.has_cov() || params.num_competitors() < 2) return out;
  if (out.cov_factors.size() > 0) {
    out.cov_factors.rowwise() -= out.cov_factors.colwise().mean().eval();
  }
  const double c = constraint_value(out);
  const double root = std::sqrt(c);
  out.mu /= root;
  out.cov_log_diag.array() -= std::log(c);
  if (out.cov_factors.size() > 0) out.cov_factors /= root;
  return out;
}

FitReport fit(const ComparisonDataset& data, const ModelConfig& config,
              const FitOptions& options) {
  const int m = data.num_competitors();
  config.validate(m);
  if (m < 2) fail("fitting needs at least two competitors");
  const ParamLayout layout(config, m);
  const internal::EffectiveCounts counts =
      internal::effective_counts(data, config.family);
  const Eigen::MatrixXd tie_basis = basis_for(config, m);

  const internal::ObjectiveFn objective = [&](const Eigen::VectorXd& theta,
                                              double& f, Eigen::VectorXd& g) {
    const ParameterSet p = unpack_params(config, m, theta);
    f = nll_pass(counts, config, p, layout, tie_basis, &g);
  };
  const internal::ProjectionFn projection = [&](const Eigen::VectorXd& theta) {
    return pack_params(config, normalize(config, unpack_params(config, m, theta)));
  };

  FitReport report;
  ParameterSet start = normalize(config, init_params(config, m, options.seed));

  // The specified start has zero tie thresholds; for Rao-Kupper on data with
  // ties that makes p_tie exactly zero and the objective infinite.  Nudge
  // the tie block into the feasible region before optimizing (the first
  // basis column is strictly positive, so every threshold becomes positive).
  {
    Eigen::VectorXd g;
    double f;
    objective(pack_params(config, start), f, g);
    if (!std::isfinite(f) && config.has_tie()) {
      if (*config.k_tie == 0) {
        start.eta = 0.5;
      } else {
        start.tie_coeffs.col(0).setConstant(0.5);
      }
      report.diagnostics.push_back(
          "tie thresholds nudged off zero to make the start point feasible");
    }
  }

  internal::MinimizeOptions mopts;
  mopts.tol = options.tol;
  mopts.max_iter = options.max_iter;
  internal::MinimizeResult mres = internal::minimize(
      objective, projection, pack_params(config, start), mopts);

  report.params = unpack_params(config, m, mres.x);
  report.nll = mres.f;
  report.converged = mres.converged;
  report.iterations = mres.iterations;
  report.gradient_norm = mres.g.lpNorm<Eigen::Infinity>();
  report.nll_history = std::move(mres.history);
  for (std::string& note : mres.diagnostics) {
    report.diagnostics.push_back(std::move(note));
  }
  return report;
}

}  // namespace arenarank
