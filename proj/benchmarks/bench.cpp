// Microbenchmarks for the hot paths: objective and gradient at full arena
// scale, the shared cosine basis, small fits, and the analysis routines.

#include <optional>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "arenarank/dataset.hpp"
#include "arenarank/estimation.hpp"
#include "arenarank/models.hpp"
#include "arenarank/rank_analysis.hpp"

namespace {

using arenarank::ComparisonDataset;
using arenarank::Family;
using arenarank::ModelConfig;
using arenarank::ParameterSet;

ModelConfig make_config(Family family, std::optional<int> k_cov,
                        std::optional<int> k_tie) {
  ModelConfig config;
  config.family = family;
  config.k_cov = k_cov;
  config.k_tie = k_tie;
  return config;
}

// Synthetic data shaped like the full arena export: 129 competitors with a
// dense-ish graph of about 3455 observed pairs.
ComparisonDataset arena_scale_dataset() {
  const int m = 129;
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> count(5.0, 400.0);
  std::bernoulli_distribution keep(3455.0 / (m * (m - 1) / 2.0));
  std::vector<arenarank::PairCounts> pairs;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (j == i + 1 || keep(gen)) {  // the chain keeps the graph connected
        pairs.push_back({i, j, std::floor(count(gen)), std::floor(count(gen)),
                         std::floor(count(gen))});
      }
    }
  }
  std::vector<std::string> names;
  for (int k = 0; k < m; ++k) names.push_back("M" + std::to_string(k));
  return ComparisonDataset(names, pairs);
}

ParameterSet arena_params(const ModelConfig& config, int m) {
  return arenarank::init_params(config, m, 7);
}

void bm_nll_arena(benchmark::State& state, ModelConfig config) {
  static const ComparisonDataset data = arena_scale_dataset();
  const ParameterSet params = arena_params(config, data.num_competitors());
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::nll(data, config, params));
  }
}

void bm_gradient_arena(benchmark::State& state, ModelConfig config) {
  static const ComparisonDataset data = arena_scale_dataset();
  const ParameterSet params = arena_params(config, data.num_competitors());
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::nll_gradient(data, config, params));
  }
}

void bm_dct_basis(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::dct_basis(m, m));
  }
}

void bm_small_fit(benchmark::State& state) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> count(5.0, 60.0);
  std::vector<arenarank::PairCounts> pairs;
  const int m = 8;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      pairs.push_back({i, j, std::floor(count(gen)), std::floor(count(gen)),
                       std::floor(count(gen))});
    }
  }
  std::vector<std::string> names;
  for (int k = 0; k < m; ++k) names.push_back("M" + std::to_string(k));
  const ComparisonDataset data(names, pairs);
  const ModelConfig config = make_config(Family::kDavidson, std::nullopt, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::fit(data, config));
  }
}

void bm_kendall(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 gen(9);
  std::uniform_int_distribution<int> value(0, n / 2);
  std::vector<double> a(n), b(n);
  for (int k = 0; k < n; ++k) {
    a[k] = value(gen);
    b[k] = value(gen);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::kendall_tau_b(a, b));
  }
}

void bm_agglomerate(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> unit(0.1, 4.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) d(i, j) = d(j, i) = unit(gen);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        arenarank::agglomerate(d, arenarank::Linkage::kAverage));
  }
}

void bm_classical_mds(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937 gen(13);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd points(m, 3);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < 3; ++c) points(i, c) = unit(gen);
  }
  Eigen::MatrixXd delta(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      delta(i, j) = (points.row(i) - points.row(j)).norm();
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(arenarank::classical_mds(delta, 2));
  }
}

}  // namespace

BENCHMARK_CAPTURE(bm_nll_arena, bt,
                  make_config(Family::kBt, std::nullopt, std::nullopt));
BENCHMARK_CAPTURE(bm_nll_arena, davidson_cov3_tie20,
                  make_config(Family::kDavidson, 3, 20));
BENCHMARK_CAPTURE(bm_gradient_arena, bt,
                  make_config(Family::kBt, std::nullopt, std::nullopt));
BENCHMARK_CAPTURE(bm_gradient_arena, davidson_cov3_tie20,
                  make_config(Family::kDavidson, 3, 20));
BENCHMARK(bm_dct_basis)->Arg(129);
BENCHMARK(bm_small_fit)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kendall)->Arg(129)->Arg(1024);
BENCHMARK(bm_agglomerate)->Arg(129);
BENCHMARK(bm_classical_mds)->Arg(129);

BENCHMARK_MAIN();
