#pragma once

// Goodness-of-fit metrics comparing model outcome probabilities with the
// empirical per-pair frequencies.  Every sum over pairs is weighted by the
// pair's share n_ij / n of the total vote count, and 0 * ln 0 = 0 throughout.
// Family data conventions match estimation: the collapsed-BT family requires
// pre-collapsed data, the plain BT family evaluates against tie-dropped
// empirical frequencies (so its win/loss frequencies use n_ij = w_ij + l_ij).

#include <optional>
#include <vector>

#include "arenarank/dataset.hpp"
#include "arenarank/models.hpp"

namespace arenarank {

// Per-pair empirical outcome frequencies (w/n, l/n, t/n), in pair order.
std::vector<ProbabilityTriple> empirical_triples(const ComparisonDataset& data);

// H_out = -sum_pairs (n_ij/n) sum over predicted outcome log-probs weighted
// by empirical frequencies; reported per outcome.  h_tie is absent for BT
// families.  h_win + h_loss (+ h_tie) equals nll up to roundoff.
struct CrossEntropies {
  double h_win = 0.0;
  double h_loss = 0.0;
  std::optional<double> h_tie;
};
CrossEntropies cross_entropies(const ComparisonDataset& data,
                               const ModelConfig& config,
                               const ParameterSet& params);

// Root-mean-square error between observed and predicted counts, per outcome:
//   e_out^2 = sum_pairs (n_ij/n) (observed - predicted)^2
// and rmse_all^2 averages the present per-outcome squares.
struct RmseBreakdown {
  double win = 0.0;
  double loss = 0.0;
  std::optional<double> tie;
  double all = 0.0;
};
RmseBreakdown rmse(const ComparisonDataset& data, const ModelConfig& config,
                   const ParameterSet& params);

// Mean per-pair divergences between empirical and model distributions:
//   kld = (1/|E|) sum_pairs KL(P_e || P)           (natural log)
//   jsd = (1/|E|) sum_pairs [KL(P_e||M) + KL(P||M)]/2,  M = (P_e + P)/2
// jsd is bounded by ln 2.
struct Divergences {
  double kld = 0.0;
  double jsd = 0.0;
};
Divergences divergences(const ComparisonDataset& data,
                        const ModelConfig& config, const ParameterSet& params);

// Vote-share-weighted marginal outcome probabilities of one competitor over
// its incident pairs: sum_{j in E(i)} P(outcome | i vs j) * n_ij / n.  The
// three marginals of a competitor sum to its share of the total vote count.
// Throws if the competitor has no pairs under the family's effective view.
ProbabilityTriple model_marginals(const ComparisonDataset& data,
                                  const ModelConfig& config,
                                  const ParameterSet& params, int i);
ProbabilityTriple empirical_marginals(const ComparisonDataset& data,
                                      const ModelConfig& config, int i);

// One-call summary used by the evaluation command.
struct EvaluationReport {
  double nll = 0.0;
  CrossEntropies cross_entropies;
  RmseBreakdown rmse;
  Divergences divergences;
};
EvaluationReport evaluate(const ComparisonDataset& data,
                          const ModelConfig& config,
                          const ParameterSet& params);

}  // namespace arenarank
