#pragma once

// Internal: per-family view of the count data used by likelihoods, metrics
// and predicted counts.
//   - collapsed BT requires pre-collapsed input (tie counts must be zero),
//   - plain BT discards tie votes (and pairs left with no win/loss votes),
//   - tie-capable families use the counts as stored.

#include <vector>

#include "arenarank/dataset.hpp"
#include "arenarank/models.hpp"

namespace arenarank::internal {

struct EffectivePair {
  int i = 0;
  int j = 0;
  double wins = 0.0;   // votes won by i
  double losses = 0.0; // votes won by j
  double ties = 0.0;

  double total() const { return wins + losses + ties; }
};

struct EffectiveCounts {
  std::vector<EffectivePair> pairs;
  double total_votes = 0.0;
};

EffectiveCounts effective_counts(const ComparisonDataset& data, Family family);

}  // namespace arenarank::internal
