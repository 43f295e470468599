#pragma once

// Fitted-model serialization.  One JSON document per model:
//   { "family": ..., "k_cov"?, "k_tie"?, "competitors": [...], "mu": [...],
//     "eta"? | "G"? , "delta"?, "lambda"?, "nll", "converged", "iterations",
//     "seed", "tol" }
// Matrices are row-major nested arrays; absent blocks are omitted entirely.

#include <cstdint>
#include <string>
#include <vector>

#include "arenarank/estimation.hpp"
#include "arenarank/models.hpp"

namespace arenarank {

struct FittedModel {
  ModelConfig config;
  std::vector<std::string> competitors;
  ParameterSet params;
  double nll = 0.0;
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  double tol = 1e-8;
};

std::string fitted_model_to_json(const FittedModel& model);
FittedModel fitted_model_from_json(const std::string& text);

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace arenarank
