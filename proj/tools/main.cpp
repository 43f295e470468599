// arena-rank: fit, evaluate and analyze paired-comparison ranking models.
//
// Human-readable tables go to stdout; machine-readable JSON goes to --out.
// Runs with identical inputs and flags produce byte-identical outputs.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "arenarank/dataset.hpp"
#include "arenarank/estimation.hpp"
#include "arenarank/evaluation.hpp"
#include "arenarank/model_io.hpp"
#include "arenarank/models.hpp"
#include "arenarank/rank_analysis.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- helpers

struct ConfigFlags {
  std::string family;
  int k_cov = -1;  // -1 = absent
  int k_tie = -1;

  arenarank::ModelConfig to_config() const {
    arenarank::ModelConfig config;
    config.family = arenarank::family_from_name(family);
    if (k_cov >= 0) config.k_cov = k_cov;
    if (k_tie >= 0) config.k_tie = k_tie;
    return config;
  }
};

void add_config_flags(CLI::App* cmd, ConfigFlags* flags) {
  cmd->add_option("--family", flags->family,
                  "Model family: bt-collapsed, bt, rao-kupper or davidson")
      ->required();
  cmd->add_option("--k-cov", flags->k_cov,
                  "Covariance factors (omit for none, 0 for diagonal only)");
  cmd->add_option("--k-tie", flags->k_tie,
                  "Tie-threshold factors (0 for one shared threshold)");
}

// Loads a dataset, pre-collapsing when the family demands collapsed counts.
arenarank::ComparisonDataset load_for_family(const std::string& path,
                                             arenarank::Family family) {
  arenarank::ComparisonDataset data = arenarank::load_dataset(path);
  if (family == arenarank::Family::kBtCollapsedTies) {
    const auto totals = data.outcome_totals();
    if (totals.ties > 0.0) {
      std::cerr << "note: collapsing " << totals.ties
                << " tie votes into half-wins for the collapsed-ties family\n";
      data = arenarank::collapse_ties(data);
    }
  }
  return data;
}

void require_connected(const arenarank::ComparisonDataset& data) {
  const arenarank::ValidationReport report = arenarank::validate(data);
  if (!report.ok) throw std::runtime_error(report.errors.front());
}

// Reindexes the dataset onto the model's roster by name (the model owns the
// index space).  Throws if the data mentions unknown competitors.
arenarank::ComparisonDataset align_to_roster(
    const arenarank::ComparisonDataset& data,
    const std::vector<std::string>& roster) {
  if (data.competitors() == roster) return data;
  std::vector<int> map(data.num_competitors(), -1);
  for (int k = 0; k < data.num_competitors(); ++k) {
    const auto it = std::find(roster.begin(), roster.end(),
                              data.competitors()[k]);
    if (it == roster.end()) {
      throw std::runtime_error("dataset competitor '" + data.competitors()[k] +
                               "' is not part of the model roster");
    }
    map[k] = static_cast<int>(it - roster.begin());
  }
  std::vector<arenarank::PairCounts> pairs;
  pairs.reserve(data.pairs().size());
  for (const arenarank::PairCounts& p : data.pairs()) {
    const int a = map[p.i], b = map[p.j];
    if (a < b) {
      pairs.push_back({a, b, p.wins_i, p.wins_j, p.ties});
    } else {
      pairs.push_back({b, a, p.wins_j, p.wins_i, p.ties});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const arenarank::PairCounts& x, const arenarank::PairCounts& y) {
              return std::make_pair(x.i, x.j) < std::make_pair(y.i, y.j);
            });
  return arenarank::ComparisonDataset(roster, std::move(pairs));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

std::string basename_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

int thread_budget() {
  const char* raw = std::getenv("ARENA_RANK_THREADS");
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (raw == nullptr || *raw == '\0') return static_cast<int>(hw);
  const long parsed = std::strtol(raw, nullptr, 10);
  if (parsed < 1) return 1;
  return static_cast<int>(std::min<long>(parsed, hw));
}

json evaluation_to_json(const arenarank::EvaluationReport& report) {
  json out;
  out["nll"] = report.nll;
  out["h_win"] = report.cross_entropies.h_win;
  out["h_loss"] = report.cross_entropies.h_loss;
  if (report.cross_entropies.h_tie) out["h_tie"] = *report.cross_entropies.h_tie;
  out["rmse_win"] = report.rmse.win;
  out["rmse_loss"] = report.rmse.loss;
  if (report.rmse.tie) out["rmse_tie"] = *report.rmse.tie;
  out["rmse_all"] = report.rmse.all;
  out["kld"] = report.divergences.kld;
  out["jsd"] = report.divergences.jsd;
  return out;
}

void print_evaluation(std::ostream& out, const arenarank::EvaluationReport& r) {
  out << std::setprecision(6) << std::fixed;
  out << "nll        " << r.nll << "\n";
  out << "h_win      " << r.cross_entropies.h_win << "\n";
  out << "h_loss     " << r.cross_entropies.h_loss << "\n";
  if (r.cross_entropies.h_tie) out << "h_tie      " << *r.cross_entropies.h_tie << "\n";
  out << "rmse_win   " << r.rmse.win << "\n";
  out << "rmse_loss  " << r.rmse.loss << "\n";
  if (r.rmse.tie) out << "rmse_tie   " << *r.rmse.tie << "\n";
  out << "rmse_all   " << r.rmse.all << "\n";
  out << "kld        " << r.divergences.kld << "\n";
  out << "jsd        " << r.divergences.jsd << "\n";
  out.unsetf(std::ios::fixed);
}

json dendrogram_to_json(const arenarank::Dendrogram& tree,
                        const std::vector<int>& ks) {
  json out;
  json merges = json::array();
  for (const auto& merge : tree.merges) {
    merges.push_back(json::array(
        {merge.left, merge.right, merge.height, merge.size}));
  }
  out["merges"] = std::move(merges);
  out["leaf_order"] = tree.leaf_order;
  json labels = json::object();
  for (int k : ks) {
    labels[std::to_string(k)] = arenarank::cut(tree, k);
  }
  out["labels_at_k"] = std::move(labels);
  return out;
}

// ------------------------------------------------------------ subcommands

struct TrainArgs {
  std::string data_path;
  ConfigFlags config;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 5000;
  std::string out_path;
};

int cmd_train(const TrainArgs& args) {
  const arenarank::ModelConfig config = args.config.to_config();
  const arenarank::ComparisonDataset data =
      load_for_family(args.data_path, config.family);
  require_connected(data);

  arenarank::FitOptions options;
  options.seed = args.seed;
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  const arenarank::FitReport report = arenarank::fit(data, config, options);
  for (const std::string& note : report.diagnostics) {
    std::cerr << "note: " << note << "\n";
  }

  arenarank::FittedModel model;
  model.config = config;
  model.competitors = data.competitors();
  model.params = report.params;
  model.nll = report.nll;
  model.converged = report.converged;
  model.iterations = report.iterations;
  model.seed = args.seed;
  model.tol = args.tol;
  arenarank::save_model(model, args.out_path);

  std::cout << "family      " << arenarank::family_name(config.family) << "\n";
  if (config.has_cov()) std::cout << "k_cov       " << *config.k_cov << "\n";
  if (config.has_tie()) std::cout << "k_tie       " << *config.k_tie << "\n";
  std::cout << "competitors " << data.num_competitors() << "\n";
  std::cout << "pairs       " << data.num_pairs() << "\n";
  std::cout << "votes       " << std::setprecision(17) << data.total_votes()
            << "\n";
  std::cout << "parameters  "
            << arenarank::param_count(config, data.num_competitors()) << "\n";
  std::cout << "nll         " << std::setprecision(10) << report.nll << "\n";
  std::cout << "converged   " << (report.converged ? "yes" : "no") << "\n";
  std::cout << "iterations  " << report.iterations << "\n";
  std::cout << "model       " << args.out_path << "\n";
  return 0;
}

struct RankArgs {
  std::string model_path;
  int top = 0;  // 0 = all
  std::string out_path;
  std::string csv_path;
};

int cmd_rank(const RankArgs& args) {
  const arenarank::FittedModel model = arenarank::load_model(args.model_path);
  const std::vector<arenarank::LeaderboardEntry> entries =
      arenarank::leaderboard(model.params, model.competitors);
  const int shown = args.top > 0
                        ? std::min<int>(args.top, static_cast<int>(entries.size()))
                        : static_cast<int>(entries.size());

  std::size_t width = 4;
  for (int k = 0; k < shown; ++k) {
    width = std::max(width, entries[k].name.size());
  }
  std::cout << std::left << std::setw(6) << "rank" << std::setw(width + 2)
            << "name" << "score\n";
  std::cout << std::setprecision(6) << std::fixed;
  for (int k = 0; k < shown; ++k) {
    std::cout << std::left << std::setw(6) << entries[k].rank
              << std::setw(width + 2) << entries[k].name << std::showpos
              << entries[k].score << std::noshowpos << "\n";
  }
  std::cout.unsetf(std::ios::fixed);

  if (!args.out_path.empty()) {
    json doc = json::array();
    for (int k = 0; k < shown; ++k) {
      json row;
      row["rank"] = entries[k].rank;
      row["name"] = entries[k].name;
      row["score"] = entries[k].score;
      doc.push_back(std::move(row));
    }
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "rank,name,score\n";
    csv << std::setprecision(17);
    for (int k = 0; k < shown; ++k) {
      csv << entries[k].rank << ',' << entries[k].name << ','
          << entries[k].score << '\n';
    }
    write_text_file(args.csv_path, csv.str());
  }
  return 0;
}

struct EvaluateArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  bool with_marginals = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const arenarank::FittedModel model = arenarank::load_model(args.model_path);
  const arenarank::ComparisonDataset data = align_to_roster(
      load_for_family(args.data_path, model.config.family), model.competitors);
  const arenarank::EvaluationReport report =
      arenarank::evaluate(data, model.config, model.params);
  print_evaluation(std::cout, report);

  if (!args.out_path.empty()) {
    json doc = evaluation_to_json(report);
    doc["family"] = arenarank::family_name(model.config.family);
    if (args.with_marginals) {
      json marginals = json::array();
      for (int i = 0; i < static_cast<int>(model.competitors.size()); ++i) {
        const arenarank::ProbabilityTriple fitted =
            arenarank::model_marginals(data, model.config, model.params, i);
        const arenarank::ProbabilityTriple observed =
            arenarank::empirical_marginals(data, model.config, i);
        json row;
        row["name"] = model.competitors[i];
        row["win"] = fitted.p_win;
        row["loss"] = fitted.p_loss;
        row["tie"] = fitted.p_tie;
        row["empirical_win"] = observed.p_win;
        row["empirical_loss"] = observed.p_loss;
        row["empirical_tie"] = observed.p_tie;
        marginals.push_back(std::move(row));
      }
      doc["marginals"] = std::move(marginals);
    }
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  return 0;
}

struct SplitEvalArgs {
  std::string data_path;
  ConfigFlags config;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 5000;
  std::string out_path;
};

int cmd_split_eval(const SplitEvalArgs& args) {
  const arenarank::ModelConfig config = args.config.to_config();
  const arenarank::ComparisonDataset data =
      load_for_family(args.data_path, config.family);
  require_connected(data);
  const auto [train, test] =
      arenarank::split_dataset(data, args.test_fraction, args.seed);

  arenarank::FitOptions options;
  options.seed = args.seed;
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  const arenarank::FitReport fit_report = arenarank::fit(train, config, options);
  for (const std::string& note : fit_report.diagnostics) {
    std::cerr << "note: " << note << "\n";
  }
  const arenarank::EvaluationReport train_report =
      arenarank::evaluate(train, config, fit_report.params);
  const arenarank::EvaluationReport test_report =
      arenarank::evaluate(test, config, fit_report.params);

  std::cout << "family " << arenarank::family_name(config.family)
            << ", train votes " << train.total_votes() << ", test votes "
            << test.total_votes() << "\n";
  std::cout << "-- train --\n";
  print_evaluation(std::cout, train_report);
  std::cout << "-- test --\n";
  print_evaluation(std::cout, test_report);

  if (!args.out_path.empty()) {
    json doc;
    doc["family"] = arenarank::family_name(config.family);
    if (config.has_cov()) doc["k_cov"] = *config.k_cov;
    if (config.has_tie()) doc["k_tie"] = *config.k_tie;
    doc["seed"] = args.seed;
    doc["test_fraction"] = args.test_fraction;
    doc["converged"] = fit_report.converged;
    doc["train"] = evaluation_to_json(train_report);
    doc["test"] = evaluation_to_json(test_report);
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  return 0;
}

struct CompareArgs {
  std::vector<std::string> model_paths;
  std::string linkage = "average";
  std::string out_path;
};

int cmd_compare(const CompareArgs& args) {
  if (args.model_paths.size() < 2) {
    throw std::runtime_error("compare needs at least two model files");
  }
  std::vector<arenarank::FittedModel> models;
  models.reserve(args.model_paths.size());
  for (const std::string& path : args.model_paths) {
    models.push_back(arenarank::load_model(path));
  }
  const std::vector<std::string>& roster = models.front().competitors;
  for (const arenarank::FittedModel& model : models) {
    if (model.competitors != roster) {
      throw std::runtime_error("models must share one competitor roster");
    }
  }

  const int count = static_cast<int>(models.size());
  std::vector<Eigen::VectorXd> scores;
  scores.reserve(count);
  for (const arenarank::FittedModel& model : models) scores.push_back(model.params.mu);

  // Pairwise rank correlations; entries are independent, so a small worker
  // pool (capped by ARENA_RANK_THREADS) fills the preallocated matrix in a
  // deterministic layout regardless of scheduling.
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(count, count);
  {
    std::vector<std::pair<int, int>> jobs;
    for (int i = 0; i < count; ++i) {
      for (int j = i + 1; j < count; ++j) jobs.emplace_back(i, j);
    }
    const int workers =
        std::max(1, std::min<int>(thread_budget(), static_cast<int>(jobs.size())));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t k = next.fetch_add(1); k < jobs.size();
           k = next.fetch_add(1)) {
        const auto [i, j] = jobs[k];
        const std::vector<double> a(scores[i].data(),
                                    scores[i].data() + scores[i].size());
        const std::vector<double> b(scores[j].data(),
                                    scores[j].data() + scores[j].size());
        tau(i, j) = tau(j, i) = arenarank::kendall_tau_b(a, b);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
  }

  std::vector<std::string> names;
  names.reserve(count);
  for (const std::string& path : args.model_paths) {
    names.push_back(basename_stem(path));
  }

  std::size_t width = 4;
  for (const std::string& name : names) width = std::max(width, name.size());
  std::cout << std::left << std::setw(width + 2) << "tau";
  for (const std::string& name : names) std::cout << std::setw(width + 2) << name;
  std::cout << "\n" << std::setprecision(4) << std::fixed;
  for (int i = 0; i < count; ++i) {
    std::cout << std::left << std::setw(width + 2) << names[i];
    for (int j = 0; j < count; ++j) {
      std::cout << std::setw(width + 2) << tau(i, j);
    }
    std::cout << "\n";
  }
  std::cout.unsetf(std::ios::fixed);

  // Cluster the models themselves with 1 - tau as the dissimilarity.
  Eigen::MatrixXd dissimilarity = Eigen::MatrixXd::Ones(count, count) - tau;
  dissimilarity.diagonal().setZero();
  const arenarank::Dendrogram tree = arenarank::agglomerate(
      dissimilarity, arenarank::linkage_from_name(args.linkage));

  if (!args.out_path.empty()) {
    json doc;
    doc["names"] = names;
    json rows = json::array();
    for (int i = 0; i < count; ++i) {
      json row = json::array();
      for (int j = 0; j < count; ++j) row.push_back(tau(i, j));
      rows.push_back(std::move(row));
    }
    doc["tau"] = std::move(rows);
    std::vector<int> ks;
    for (int k = 2; k <= std::min(count, 5); ++k) ks.push_back(k);
    if (ks.empty()) ks.push_back(1);
    doc["clustering"] = dendrogram_to_json(tree, ks);
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  return 0;
}

struct MapArgs {
  std::string model_path;
  std::string method = "mds";
  int dims = 2;
  double gamma = 1e-4;
  std::string out_path;
  std::string csv_path;
};

int cmd_map(const MapArgs& args) {
  const arenarank::FittedModel model = arenarank::load_model(args.model_path);
  if (!model.params.has_cov()) {
    std::cerr << "note: model has no covariance structure; margins fall back "
                 "to plain score differences\n";
  }
  const Eigen::MatrixXd z = arenarank::z_matrix(model.params);
  arenarank::Embedding embedding;
  if (args.method == "mds") {
    embedding = arenarank::classical_mds(z.cwiseAbs(), args.dims);
  } else if (args.method == "kpca") {
    embedding = arenarank::kernel_pca(z, args.gamma, args.dims);
  } else {
    throw std::runtime_error("unknown embedding method: " + args.method +
                             " (expected mds or kpca)");
  }
  if (embedding.padded) {
    std::cerr << "note: spectrum ran out of nonnegative eigenvalues; trailing "
                 "coordinates are zero\n";
  }

  std::cout << std::setprecision(6) << std::fixed;
  for (int i = 0; i < embedding.coordinates.rows(); ++i) {
    std::cout << std::left << std::setw(24) << model.competitors[i];
    for (int c = 0; c < embedding.coordinates.cols(); ++c) {
      std::cout << std::right << std::setw(12) << embedding.coordinates(i, c);
    }
    std::cout << "\n";
  }
  std::cout.unsetf(std::ios::fixed);

  if (!args.out_path.empty()) {
    json doc;
    doc["names"] = model.competitors;
    json coords = json::array();
    for (int i = 0; i < embedding.coordinates.rows(); ++i) {
      json row = json::array();
      for (int c = 0; c < embedding.coordinates.cols(); ++c) {
        row.push_back(embedding.coordinates(i, c));
      }
      coords.push_back(std::move(row));
    }
    doc["coordinates"] = std::move(coords);
    json values = json::array();
    for (int c = 0; c < embedding.eigenvalues.size(); ++c) {
      values.push_back(embedding.eigenvalues[c]);
    }
    doc["eigenvalues"] = std::move(values);
    doc["padded"] = embedding.padded;
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "name";
    for (int c = 0; c < embedding.coordinates.cols(); ++c) csv << ",dim" << c;
    csv << "\n" << std::setprecision(17);
    for (int i = 0; i < embedding.coordinates.rows(); ++i) {
      csv << model.competitors[i];
      for (int c = 0; c < embedding.coordinates.cols(); ++c) {
        csv << ',' << embedding.coordinates(i, c);
      }
      csv << "\n";
    }
    write_text_file(args.csv_path, csv.str());
  }
  return 0;
}

struct ClusterArgs {
  std::string model_path;
  std::vector<int> ks;
  std::string linkage = "average";
  std::string out_path;
};

int cmd_cluster(const ClusterArgs& args) {
  const arenarank::FittedModel model = arenarank::load_model(args.model_path);
  const int m = static_cast<int>(model.competitors.size());
  const Eigen::MatrixXd dissimilarity =
      arenarank::z_matrix(model.params).cwiseAbs();
  const arenarank::Dendrogram tree = arenarank::agglomerate(
      dissimilarity, arenarank::linkage_from_name(args.linkage));

  std::vector<int> ks = args.ks;
  if (ks.empty()) {
    for (int k = 2; k <= std::min(5, m); ++k) ks.push_back(k);
    if (ks.empty()) ks.push_back(1);
  }
  for (int k : ks) {
    if (k < 1 || k > m) {
      throw std::runtime_error("cluster count " + std::to_string(k) +
                               " must lie in [1, " + std::to_string(m) + "]");
    }
  }

  std::cout << "leaf order:";
  for (int leaf : tree.leaf_order) std::cout << ' ' << model.competitors[leaf];
  std::cout << "\n";
  for (int k : ks) {
    const std::vector<int> labels = arenarank::cut(tree, k);
    std::cout << "k=" << k << ":";
    for (int leaf : tree.leaf_order) {
      std::cout << ' ' << model.competitors[leaf] << '(' << labels[leaf] << ')';
    }
    std::cout << "\n";
  }

  if (!args.out_path.empty()) {
    json doc = dendrogram_to_json(tree, ks);
    doc["names"] = model.competitors;
    write_text_file(args.out_path, doc.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paired-comparison ranking toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Fit a model to count data");
  train->add_option("--data", train_args.data_path, "Counts CSV or JSON file")
      ->required();
  add_config_flags(train, &train_args.config);
  train->add_option("--seed", train_args.seed, "Initialization seed");
  train->add_option("--tol", train_args.tol, "Convergence tolerance");
  train->add_option("--max-iter", train_args.max_iter, "Iteration cap");
  train->add_option("--out", train_args.out_path, "Fitted model JSON path")
      ->required();

  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand("rank", "Print the leaderboard");
  rank->add_option("--model", rank_args.model_path, "Fitted model JSON")
      ->required();
  rank->add_option("--top", rank_args.top, "Show only the top N competitors");
  rank->add_option("--out", rank_args.out_path, "Leaderboard JSON path");
  rank->add_option("--csv", rank_args.csv_path, "Leaderboard CSV path");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a model on data");
  evaluate->add_option("--model", eval_args.model_path, "Fitted model JSON")
      ->required();
  evaluate->add_option("--data", eval_args.data_path, "Counts CSV or JSON file")
      ->required();
  evaluate->add_option("--out", eval_args.out_path, "Metrics JSON path");
  evaluate->add_flag("--marginals", eval_args.with_marginals,
                     "Include per-competitor marginals in the JSON report");

  SplitEvalArgs split_args;
  CLI::App* split_eval = app.add_subcommand(
      "split-eval", "Hold out votes, fit on the rest, evaluate both");
  split_eval->add_option("--data", split_args.data_path, "Counts CSV or JSON")
      ->required();
  add_config_flags(split_eval, &split_args.config);
  split_eval->add_option("--test-fraction", split_args.test_fraction,
                         "Held-out vote fraction");
  split_eval->add_option("--seed", split_args.seed,
                         "Split and initialization seed");
  split_eval->add_option("--tol", split_args.tol, "Convergence tolerance");
  split_eval->add_option("--max-iter", split_args.max_iter, "Iteration cap");
  split_eval->add_option("--out", split_args.out_path, "Metrics JSON path");

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Rank correlation and clustering across fitted models");
  compare->add_option("--models", compare_args.model_paths,
                      "Two or more fitted model JSON files")
      ->required()
      ->expected(-2);
  compare->add_option("--linkage", compare_args.linkage,
                      "single, complete or average");
  compare->add_option("--out", compare_args.out_path, "Comparison JSON path");

  MapArgs map_args;
  CLI::App* map = app.add_subcommand("map", "Embed competitors in 2D or more");
  map->add_option("--model", map_args.model_path, "Fitted model JSON")
      ->required();
  map->add_option("--method", map_args.method, "mds or kpca");
  map->add_option("--dims", map_args.dims, "Embedding dimension");
  map->add_option("--gamma", map_args.gamma, "Kernel width (kpca)");
  map->add_option("--out", map_args.out_path, "Embedding JSON path");
  map->add_option("--csv", map_args.csv_path, "Embedding CSV path");

  ClusterArgs cluster_args;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "Hierarchical clustering of competitors");
  cluster->add_option("--model", cluster_args.model_path, "Fitted model JSON")
      ->required();
  cluster->add_option("--k", cluster_args.ks, "Cluster counts to report");
  cluster->add_option("--linkage", cluster_args.linkage,
                      "single, complete or average");
  cluster->add_option("--out", cluster_args.out_path, "Clustering JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (rank->parsed()) return cmd_rank(rank_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (split_eval->parsed()) return cmd_split_eval(split_args);
    if (compare->parsed()) return cmd_compare(compare_args);
    if (map->parsed()) return cmd_map(map_args);
    if (cluster->parsed()) return cmd_cluster(cluster_args);
  } catch (const std::exception& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::cerr << "error: " << message << "\n";
    return 1;
  }
  return 0;
}
