#include "arenarank/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "arenarank/estimation.hpp"
#include "effective_counts.hpp"

namespace arenarank {
namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

// Per-pair context shared by all metrics: effective counts, total, and the
// model triple.
struct PairEval {
  internal::EffectivePair counts;
  LogProbabilityTriple logs;
  ProbabilityTriple probs;
};

std::vector<PairEval> evaluate_pairs(const internal::EffectiveCounts& counts,
                                     const ModelConfig& config,
                                     const ParameterSet& params) {
  const int m = params.num_competitors();
  const Eigen::MatrixXd basis = (config.has_tie() && *config.k_tie >= 1)
                                    ? cached_dct_basis(m, *config.k_tie)
                                    : Eigen::MatrixXd();
  std::vector<PairEval> evals;
  evals.reserve(counts.pairs.size());
  for (const internal::EffectivePair& p : counts.pairs) {
    PairEval e;
    e.counts = p;
    const double z = standardized_margin(params, p.i, p.j);
    double eta = 0.0;
    if (config.has_tie()) {
      eta = *config.k_tie == 0
                ? params.eta
                : params.tie_coeffs.row(p.i).dot(basis.row(p.j)) +
                      params.tie_coeffs.row(p.j).dot(basis.row(p.i));
    }
    e.logs = log_outcome_probabilities(config.family, z, eta);
    e.probs.p_win = std::exp(e.logs.log_win);
    e.probs.p_loss = std::exp(e.logs.log_loss);
    e.probs.p_tie = std::isinf(e.logs.log_tie) ? 0.0 : std::exp(e.logs.log_tie);
    evals.push_back(e);
  }
  return evals;
}

struct Prepared {
  internal::EffectiveCounts counts;
  std::vector<PairEval> evals;
};

Prepared prepare(const ComparisonDataset& data, const ModelConfig& config,
                 const ParameterSet& params) {
  config.validate(params.num_competitors());
  if (data.num_competitors() != params.num_competitors()) {
    fail("dataset and parameters disagree on the roster size");
  }
  Prepared out;
  out.counts = internal::effective_counts(data, config.family);
  if (out.counts.pairs.empty()) fail("no votes to evaluate");
  out.evals = evaluate_pairs(out.counts, config, params);
  return out;
}

// KL(p_e || p) over one outcome class, with 0 ln 0 = 0.
double kl_term(double pe, double p) {
  if (pe <= 0.0) return 0.0;
  return pe * (std::log(pe) - std::log(p));
}

}  // namespace

std::vector<ProbabilityTriple> empirical_triples(const ComparisonDataset& data) {
  std::vector<ProbabilityTriple> triples;
  triples.reserve(data.pairs().size());
  for (const PairCounts& p : data.pairs()) {
    const double n = p.total();
    triples.push_back({p.wins_i / n, p.wins_j / n, p.ties / n});
  }
  return triples;
}

CrossEntropies cross_entropies(const ComparisonDataset& data,
                               const ModelConfig& config,
                               const ParameterSet& params) {
  const Prepared prep = prepare(data, config, params);
  double sum_win = 0.0, sum_loss = 0.0, sum_tie = 0.0;
  for (const PairEval& e : prep.evals) {
    if (e.counts.wins > 0.0) sum_win += e.counts.wins * e.logs.log_win;
    if (e.counts.losses > 0.0) sum_loss += e.counts.losses * e.logs.log_loss;
    if (e.counts.ties > 0.0) sum_tie += e.counts.ties * e.logs.log_tie;
  }
  const double n = prep.counts.total_votes;
  CrossEntropies out;
  out.h_win = -sum_win / n;
  out.h_loss = -sum_loss / n;
  if (family_has_ties(config.family)) out.h_tie = -sum_tie / n;
  return out;
}

RmseBreakdown rmse(const ComparisonDataset& data, const ModelConfig& config,
                   const ParameterSet& params) {
  const Prepared prep = prepare(data, config, params);
  const double n = prep.counts.total_votes;
  double e2_win = 0.0, e2_loss = 0.0, e2_tie = 0.0;
  for (const PairEval& e : prep.evals) {
    const double np = e.counts.total();
    const double w = np / n;
    const double dw = e.counts.wins - np * e.probs.p_win;
    const double dl = e.counts.losses - np * e.probs.p_loss;
    e2_win += w * dw * dw;
    e2_loss += w * dl * dl;
    if (family_has_ties(config.family)) {
      const double dt = e.counts.ties - np * e.probs.p_tie;
      e2_tie += w * dt * dt;
    }
  }
  RmseBreakdown out;
  out.win = std::sqrt(e2_win);
  out.loss = std::sqrt(e2_loss);
  if (family_has_ties(config.family)) {
    out.tie = std::sqrt(e2_tie);
    out.all = std::sqrt((e2_win + e2_loss + e2_tie) / 3.0);
  } else {
    out.all = std::sqrt((e2_win + e2_loss) / 2.0);
  }
  return out;
}

Divergences divergences(const ComparisonDataset& data,
                        const ModelConfig& config, const ParameterSet& params) {
  const Prepared prep = prepare(data, config, params);
  const bool with_ties = family_has_ties(config.family);
  double kld_sum = 0.0, jsd_sum = 0.0;
  for (const PairEval& e : prep.evals) {
    const double np = e.counts.total();
    const double pe[3] = {e.counts.wins / np, e.counts.losses / np,
                          e.counts.ties / np};
    const double pm[3] = {e.probs.p_win, e.probs.p_loss, e.probs.p_tie};
    const int classes = with_ties ? 3 : 2;
    double kl = 0.0, js = 0.0;
    for (int c = 0; c < classes; ++c) {
      kl += kl_term(pe[c], pm[c]);
      const double mid = 0.5 * (pe[c] + pm[c]);
      js += 0.5 * (kl_term(pe[c], mid) + kl_term(pm[c], mid));
    }
    kld_sum += kl;
    jsd_sum += js;
  }
  const double edges = static_cast<double>(prep.evals.size());
  return {kld_sum / edges, jsd_sum / edges};
}

ProbabilityTriple model_marginals(const ComparisonDataset& data,
                                  const ModelConfig& config,
                                  const ParameterSet& params, int i) {
  const Prepared prep = prepare(data, config, params);
  if (i < 0 || i >= params.num_competitors()) fail("competitor index out of range");
  const double n = prep.counts.total_votes;
  ProbabilityTriple out;
  bool found = false;
  for (const PairEval& e : prep.evals) {
    if (e.counts.i != i && e.counts.j != i) continue;
    found = true;
    const double share = e.counts.total() / n;
    // Orient the triple toward competitor i.
    const double p_win = e.counts.i == i ? e.probs.p_win : e.probs.p_loss;
    const double p_loss = e.counts.i == i ? e.probs.p_loss : e.probs.p_win;
    out.p_win += share * p_win;
    out.p_loss += share * p_loss;
    out.p_tie += share * e.probs.p_tie;
  }
  if (!found) {
    fail("competitor " + data.competitors()[i] +
         " has no comparisons under this family");
  }
  return out;
}

ProbabilityTriple empirical_marginals(const ComparisonDataset& data,
                                      const ModelConfig& config, int i) {
  if (i < 0 || i >= data.num_competitors()) fail("competitor index out of range");
  const internal::EffectiveCounts counts =
      internal::effective_counts(data, config.family);
  if (counts.pairs.empty()) fail("no votes to evaluate");
  const double n = counts.total_votes;
  ProbabilityTriple out;
  bool found = false;
  for (const internal::EffectivePair& p : counts.pairs) {
    if (p.i != i && p.j != i) continue;
    found = true;
    out.p_win += (p.i == i ? p.wins : p.losses) / n;
    out.p_loss += (p.i == i ? p.losses : p.wins) / n;
    out.p_tie += p.ties / n;
  }
  if (!found) {
    fail("competitor " + data.competitors()[i] +
         " has no comparisons under this family");
  }
  return out;
}

EvaluationReport evaluate(const ComparisonDataset& data,
                          const ModelConfig& config,
                          const ParameterSet& params) {
  EvaluationReport report;
  report.nll = nll(data, config, params);
  report.cross_entropies = cross_entropies(data, config, params);
  report.rmse = rmse(data, config, params);
  report.divergences = divergences(data, config, params);
  return report;
}

}  // namespace arenarank
