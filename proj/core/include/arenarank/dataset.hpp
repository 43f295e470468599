#pragma once

// Paired-comparison count data: m competitors, and for each compared pair
// (i, j) with i < j the number of votes won by i, won by j, and tied.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace arenarank {

// Aggregated votes for one unordered pair, stored with i < j.
// Counts are doubles so that half-vote tie collapsing stays exact, but every
// raw dataset starts from nonnegative integers.
struct PairCounts {
  int i = 0;
  int j = 0;
  double wins_i = 0.0;
  double wins_j = 0.0;
  double ties = 0.0;

  double total() const { return wins_i + wins_j + ties; }
};

// One input record before pair merging; names are still unresolved.
struct VoteRecord {
  std::string first;
  std::string second;
  double wins_first = 0.0;
  double wins_second = 0.0;
  double ties = 0.0;
};

// Immutable comparison dataset.  Invariants enforced on construction:
//   - competitor names are unique and nonempty,
//   - every pair satisfies 0 <= i < j < m and appears at most once,
//   - all counts are finite and >= 0, and every stored pair has total() > 0.
// Graph connectivity is *not* enforced here; see validate().
class ComparisonDataset {
 public:
  ComparisonDataset() = default;
  ComparisonDataset(std::vector<std::string> competitors,
                    std::vector<PairCounts> pairs);

  const std::vector<std::string>& competitors() const { return competitors_; }
  const std::vector<PairCounts>& pairs() const { return pairs_; }

  int num_competitors() const { return static_cast<int>(competitors_.size()); }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }

  // Total vote count n = sum of pair totals.
  double total_votes() const;

  // Aggregate shares of the three outcomes (win-by-i, win-by-j, tie) in n.
  struct OutcomeTotals {
    double wins_i = 0.0, wins_j = 0.0, ties = 0.0;
  };
  OutcomeTotals outcome_totals() const;

  // Index of a competitor name, or -1 when unknown.
  int index_of(const std::string& name) const;

 private:
  std::vector<std::string> competitors_;
  std::vector<PairCounts> pairs_;
};

// Builds a dataset from raw records: the roster is the deduplicated names in
// first-appearance order (first name of a record before the second), duplicate
// unordered pairs are merged by summing with orientation-aware swapping, and
// merged pairs with zero total are dropped.  Throws std::invalid_argument on
// self-comparisons, negative or non-finite counts, or empty names.
ComparisonDataset build_dataset(const std::vector<VoteRecord>& records);

// CSV with header  model_a,model_b,wins_a,wins_b,ties  (extra whitespace
// tolerated, quoted names supported).  Throws on malformed rows.
ComparisonDataset parse_dataset_csv(std::istream& in);
ComparisonDataset parse_dataset_csv(const std::string& text);

// JSON array of objects with the same five keys.
ComparisonDataset parse_dataset_json(const std::string& text);

// Dispatches on extension: ".json" -> JSON, anything else -> CSV.
ComparisonDataset load_dataset(const std::string& path);

void write_dataset_csv(const ComparisonDataset& data, std::ostream& out);
std::string dataset_to_csv(const ComparisonDataset& data);
std::string dataset_to_json(const ComparisonDataset& data);

// Structural diagnosis beyond the constructor invariants.  ok is true iff the
// comparison graph over all m competitors is connected (votes on every edge
// are > 0 by construction).  When disconnected, components lists the vertex
// sets of each connected component and errors carries printable messages.
struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::vector<int>> components;
};
ValidationReport validate(const ComparisonDataset& data);

// Reassigns each tie as half a win to both sides:
//   wins_i += ties/2, wins_j += ties/2, ties = 0.
// Pair totals and the roster are unchanged.
ComparisonDataset collapse_ties(const ComparisonDataset& data);

// Splits vote-by-vote: each individual vote of every pair/outcome cell is
// assigned to the test partition with probability test_fraction using the
// seeded generator; counts are conserved cell-by-cell.  Pairs that end up
// with zero total in a partition are dropped from that partition; the roster
// is kept identical on both sides.  Requires integer counts.  Throws if the
// train comparison graph becomes disconnected.
std::pair<ComparisonDataset, ComparisonDataset> split_dataset(
    const ComparisonDataset& data, double test_fraction, std::uint64_t seed);

}  // namespace arenarank
