#include "arenarank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace arenarank {
namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void check_count(double value, const std::string& what,
                 const std::string& context) {
  if (!std::isfinite(value)) fail(what + " is not finite in " + context);
  if (value < 0.0) fail(what + " is negative in " + context);
}

// Breadth-first connected components over the pair graph.
std::vector<std::vector<int>> connected_components(
    const ComparisonDataset& data) {
  const int m = data.num_competitors();
  std::vector<std::vector<int>> adjacency(m);
  for (const PairCounts& p : data.pairs()) {
    adjacency[p.i].push_back(p.j);
    adjacency[p.j].push_back(p.i);
  }
  std::vector<int> component(m, -1);
  std::vector<std::vector<int>> components;
  for (int start = 0; start < m; ++start) {
    if (component[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    std::vector<int> queue = {start};
    component[start] = id;
    while (!queue.empty()) {
      const int v = queue.back();
      queue.pop_back();
      components[id].push_back(v);
      for (int w : adjacency[v]) {
        if (component[w] < 0) {
          component[w] = id;
          queue.push_back(w);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }
  return components;
}

std::string component_summary(const ComparisonDataset& data,
                              const std::vector<int>& members) {
  std::ostringstream out;
  out << "{";
  const std::size_t shown = std::min<std::size_t>(members.size(), 8);
  for (std::size_t k = 0; k < shown; ++k) {
    if (k > 0) out << ", ";
    out << data.competitors()[members[k]];
  }
  if (members.size() > shown) {
    out << ", ... (" << members.size() << " total)";
  }
  out << "}";
  return out.str();
}

// Minimal CSV field splitter: commas separate fields, double quotes group a
// field and "" escapes a quote, surrounding whitespace is trimmed.
std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          current.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) fail("unterminated quote on line " + std::to_string(line_no));
  fields.push_back(current);
  for (std::string& f : fields) {
    const auto begin = f.find_first_not_of(" \t\r");
    const auto end = f.find_last_not_of(" \t\r");
    f = begin == std::string::npos ? "" : f.substr(begin, end - begin + 1);
  }
  return fields;
}

double parse_number(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing text");
    return value;
  } catch (const std::exception&) {
    fail("malformed count '" + text + "' on line " + std::to_string(line_no));
  }
}

bool is_integral(double value) {
  return std::abs(value - std::round(value)) <= 1e-9;
}

// 53-bit uniform in [0, 1); fixed mapping so that seeded splits are
// identical across standard libraries.
double next_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1p-53;
}

}  // namespace

ComparisonDataset::ComparisonDataset(std::vector<std::string> competitors,
                                     std::vector<PairCounts> pairs)
    : competitors_(std::move(competitors)), pairs_(std::move(pairs)) {
  const int m = static_cast<int>(competitors_.size());
  std::unordered_map<std::string, int> seen;
  for (int k = 0; k < m; ++k) {
    if (competitors_[k].empty()) fail("empty competitor name");
    if (!seen.emplace(competitors_[k], k).second) {
      fail("duplicate competitor name: " + competitors_[k]);
    }
  }
  std::map<std::pair<int, int>, bool> pair_seen;
  for (const PairCounts& p : pairs_) {
    if (p.i < 0 || p.j >= m || p.i >= p.j) {
      fail("pair indices out of order or range");
    }
    const std::string context =
        competitors_[p.i] + " vs " + competitors_[p.j];
    check_count(p.wins_i, "win count", context);
    check_count(p.wins_j, "win count", context);
    check_count(p.ties, "tie count", context);
    if (p.total() <= 0.0) fail("pair with zero votes: " + context);
    if (!pair_seen.emplace(std::make_pair(p.i, p.j), true).second) {
      fail("duplicate pair: " + context);
    }
  }
}

double ComparisonDataset::total_votes() const {
  double n = 0.0;
  for (const PairCounts& p : pairs_) n += p.total();
  return n;
}

ComparisonDataset::OutcomeTotals ComparisonDataset::outcome_totals() const {
  OutcomeTotals totals;
  for (const PairCounts& p : pairs_) {
    totals.wins_i += p.wins_i;
    totals.wins_j += p.wins_j;
    totals.ties += p.ties;
  }
  return totals;
}

int ComparisonDataset::index_of(const std::string& name) const {
  const auto it = std::find(competitors_.begin(), competitors_.end(), name);
  return it == competitors_.end()
             ? -1
             : static_cast<int>(it - competitors_.begin());
}

ComparisonDataset build_dataset(const std::vector<VoteRecord>& records) {
  std::vector<std::string> roster;
  std::unordered_map<std::string, int> index;
  const auto intern = [&](const std::string& name) {
    if (name.empty()) fail("empty competitor name");
    const auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(roster.size());
    roster.push_back(name);
    index.emplace(name, id);
    return id;
  };

  // Merge duplicate unordered pairs, swapping counts with orientation.
  std::map<std::pair<int, int>, PairCounts> merged;
  std::vector<std::pair<int, int>> order;
  for (const VoteRecord& r : records) {
    const std::string context = r.first + " vs " + r.second;
    if (r.first == r.second) fail("self-comparison: " + context);
    check_count(r.wins_first, "win count", context);
    check_count(r.wins_second, "win count", context);
    check_count(r.ties, "tie count", context);
    const int a = intern(r.first);
    const int b = intern(r.second);
    const int i = std::min(a, b);
    const int j = std::max(a, b);
    auto [it, inserted] = merged.try_emplace(std::make_pair(i, j));
    if (inserted) {
      it->second.i = i;
      it->second.j = j;
      order.emplace_back(i, j);
    }
    if (a < b) {
      it->second.wins_i += r.wins_first;
      it->second.wins_j += r.wins_second;
    } else {
      it->second.wins_i += r.wins_second;
      it->second.wins_j += r.wins_first;
    }
    it->second.ties += r.ties;
  }

  std::vector<PairCounts> pairs;
  pairs.reserve(order.size());
  for (const auto& key : order) {
    const PairCounts& p = merged.at(key);
    if (p.total() > 0.0) pairs.push_back(p);
  }
  return ComparisonDataset(std::move(roster), std::move(pairs));
}

ComparisonDataset parse_dataset_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<VoteRecord> records;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line = line.substr(3);  // strip UTF-8 BOM
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(line, line_no);
    if (!header_seen) {
      const std::vector<std::string> expected = {"model_a", "model_b",
                                                "wins_a", "wins_b", "ties"};
      if (fields.size() != expected.size()) {
        fail("expected header model_a,model_b,wins_a,wins_b,ties");
      }
      for (std::size_t k = 0; k < expected.size(); ++k) {
        if (fields[k] != expected[k]) {
          fail("unexpected header field '" + fields[k] + "', expected '" +
               expected[k] + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) {
      fail("expected 5 fields on line " + std::to_string(line_no) + ", got " +
           std::to_string(fields.size()));
    }
    VoteRecord r;
    r.first = fields[0];
    r.second = fields[1];
    r.wins_first = parse_number(fields[2], line_no);
    r.wins_second = parse_number(fields[3], line_no);
    r.ties = parse_number(fields[4], line_no);
    records.push_back(std::move(r));
  }
  if (!header_seen) fail("missing header row");
  return build_dataset(records);
}

ComparisonDataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset_csv(in);
}

ComparisonDataset parse_dataset_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) fail("expected a JSON array of pair records");
  std::vector<VoteRecord> records;
  records.reserve(doc.size());
  for (const auto& entry : doc) {
    if (!entry.is_object()) fail("expected pair record objects");
    for (const char* key : {"model_a", "model_b", "wins_a", "wins_b", "ties"}) {
      if (!entry.contains(key)) fail(std::string("missing key: ") + key);
    }
    VoteRecord r;
    r.first = entry.at("model_a").get<std::string>();
    r.second = entry.at("model_b").get<std::string>();
    r.wins_first = entry.at("wins_a").get<double>();
    r.wins_second = entry.at("wins_b").get<double>();
    r.ties = entry.at("ties").get<double>();
    records.push_back(std::move(r));
  }
  return build_dataset(records);
}

ComparisonDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return parse_dataset_json(text);
  }
  return parse_dataset_csv(text);
}

namespace {

std::string format_count(double value) {
  if (is_integral(value)) {
    std::ostringstream out;
    out << static_cast<long long>(std::llround(value));
    return out.str();
  }
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

std::string csv_field(const std::string& name) {
  if (name.find_first_of(",\"\n") == std::string::npos) return name;
  std::string quoted = "\"";
  for (char c : name) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  quoted += "\"";
  return quoted;
}

}  // namespace

void write_dataset_csv(const ComparisonDataset& data, std::ostream& out) {
  out << "model_a,model_b,wins_a,wins_b,ties\n";
  for (const PairCounts& p : data.pairs()) {
    out << csv_field(data.competitors()[p.i]) << ','
        << csv_field(data.competitors()[p.j]) << ','
        << format_count(p.wins_i) << ',' << format_count(p.wins_j) << ','
        << format_count(p.ties) << '\n';
  }
}

std::string dataset_to_csv(const ComparisonDataset& data) {
  std::ostringstream out;
  write_dataset_csv(data, out);
  return out.str();
}

std::string dataset_to_json(const ComparisonDataset& data) {
  nlohmann::json doc = nlohmann::json::array();
  for (const PairCounts& p : data.pairs()) {
    nlohmann::json entry;
    entry["model_a"] = data.competitors()[p.i];
    entry["model_b"] = data.competitors()[p.j];
    entry["wins_a"] = p.wins_i;
    entry["wins_b"] = p.wins_j;
    entry["ties"] = p.ties;
    doc.push_back(std::move(entry));
  }
  return doc.dump(2);
}

ValidationReport validate(const ComparisonDataset& data) {
  ValidationReport report;
  if (data.num_competitors() <= 1) return report;
  const std::vector<std::vector<int>> components = connected_components(data);
  if (components.size() > 1) {
    report.ok = false;
    report.components = components;
    std::ostringstream msg;
    msg << "comparison graph is disconnected into " << components.size()
        << " components:";
    for (std::size_t k = 0; k < components.size(); ++k) {
      msg << " component " << (k + 1) << " = "
          << component_summary(data, components[k]);
      if (k + 1 < components.size()) msg << ";";
    }
    report.errors.push_back(msg.str());
  }
  return report;
}

ComparisonDataset collapse_ties(const ComparisonDataset& data) {
  std::vector<PairCounts> pairs = data.pairs();
  for (PairCounts& p : pairs) {
    p.wins_i += p.ties / 2.0;
    p.wins_j += p.ties / 2.0;
    p.ties = 0.0;
  }
  return ComparisonDataset(data.competitors(), std::move(pairs));
}

std::pair<ComparisonDataset, ComparisonDataset> split_dataset(
    const ComparisonDataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    fail("test fraction must lie in [0, 1]");
  }
  std::mt19937_64 gen(seed);
  std::vector<PairCounts> train_pairs;
  std::vector<PairCounts> test_pairs;
  for (const PairCounts& p : data.pairs()) {
    const double cells[3] = {p.wins_i, p.wins_j, p.ties};
    double test_cells[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
      if (!is_integral(cells[c])) {
        fail("splitting requires integer counts (pair " +
             data.competitors()[p.i] + " vs " + data.competitors()[p.j] + ")");
      }
      const long long count = std::llround(cells[c]);
      long long to_test = 0;
      for (long long v = 0; v < count; ++v) {
        if (next_uniform(gen) < test_fraction) ++to_test;
      }
      test_cells[c] = static_cast<double>(to_test);
    }
    PairCounts test_pair{p.i, p.j, test_cells[0], test_cells[1], test_cells[2]};
    PairCounts train_pair{p.i, p.j, p.wins_i - test_cells[0],
                          p.wins_j - test_cells[1], p.ties - test_cells[2]};
    if (train_pair.total() > 0.0) train_pairs.push_back(train_pair);
    if (test_pair.total() > 0.0) test_pairs.push_back(test_pair);
  }
  ComparisonDataset train(data.competitors(), std::move(train_pairs));
  ComparisonDataset test(data.competitors(), std::move(test_pairs));
  const ValidationReport train_check = validate(train);
  if (!train_check.ok) {
    throw std::runtime_error(
        "train partition " + train_check.errors.front() +
        " — retry with a different seed or a smaller test fraction");
  }
  return {std::move(train), std::move(test)};
}

}  // namespace arenarank
