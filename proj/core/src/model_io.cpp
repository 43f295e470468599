#include "arenarank/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace arenarank {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& doc, const std::string& key,
                                 Eigen::Index expected) {
  if (!doc.is_array()) fail("'" + key + "' must be an array");
  if (static_cast<Eigen::Index>(doc.size()) != expected) {
    fail("'" + key + "' must have " + std::to_string(expected) + " entries");
  }
  Eigen::VectorXd out(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    if (!doc[i].is_number()) fail("'" + key + "' must hold numbers");
    out[i] = doc[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& doc, const std::string& key,
                                 Eigen::Index rows, Eigen::Index cols) {
  if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != rows) {
    fail("'" + key + "' must be an array of " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = doc[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail("'" + key + "' rows must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!row[j].is_number()) fail("'" + key + "' must hold numbers");
      out(i, j) = row[j].get<double>();
    }
  }
  return out;
}

}  // namespace

std::string fitted_model_to_json(const FittedModel& model) {
  const int m = static_cast<int>(model.competitors.size());
  model.config.validate(m);
  if (model.params.num_competitors() != m) {
    fail("parameter set and competitor list disagree on the roster size");
  }

  json doc;
  doc["family"] = family_name(model.config.family);
  if (model.config.has_cov()) doc["k_cov"] = *model.config.k_cov;
  if (model.config.has_tie()) doc["k_tie"] = *model.config.k_tie;
  doc["competitors"] = model.competitors;
  doc["mu"] = vector_to_json(model.params.mu);
  if (model.config.has_tie()) {
    if (*model.config.k_tie == 0) {
      doc["eta"] = model.params.eta;
    } else {
      doc["G"] = matrix_to_json(model.params.tie_coeffs);
    }
  }
  if (model.config.has_cov()) {
    doc["delta"] = vector_to_json(model.params.cov_log_diag);
    if (*model.config.k_cov >= 1) {
      doc["lambda"] = matrix_to_json(model.params.cov_factors);
    }
  }
  doc["nll"] = model.nll;
  doc["converged"] = model.converged;
  doc["iterations"] = model.iterations;
  doc["seed"] = model.seed;
  doc["tol"] = model.tol;
  return doc.dump(2) + "\n";
}

FittedModel fitted_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    fail(std::string("invalid model JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("model document must be a JSON object");
  for (const char* key :
       {"family", "competitors", "mu", "nll", "converged", "iterations",
        "seed", "tol"}) {
    if (!doc.contains(key)) fail(std::string("missing model key: ") + key);
  }

  FittedModel model;
  model.config.family = family_from_name(doc.at("family").get<std::string>());
  if (doc.contains("k_cov")) model.config.k_cov = doc.at("k_cov").get<int>();
  if (doc.contains("k_tie")) model.config.k_tie = doc.at("k_tie").get<int>();
  model.competitors = doc.at("competitors").get<std::vector<std::string>>();
  const int m = static_cast<int>(model.competitors.size());
  model.config.validate(m);

  model.params.mu = vector_from_json(doc.at("mu"), "mu", m);
  if (model.config.has_tie()) {
    if (*model.config.k_tie == 0) {
      if (!doc.contains("eta")) fail("missing model key: eta");
      model.params.eta = doc.at("eta").get<double>();
    } else {
      if (!doc.contains("G")) fail("missing model key: G");
      model.params.tie_coeffs =
          matrix_from_json(doc.at("G"), "G", m, *model.config.k_tie);
    }
  }
  if (model.config.has_cov()) {
    if (!doc.contains("delta")) fail("missing model key: delta");
    model.params.cov_log_diag = vector_from_json(doc.at("delta"), "delta", m);
    if (*model.config.k_cov >= 1) {
      if (!doc.contains("lambda")) fail("missing model key: lambda");
      model.params.cov_factors =
          matrix_from_json(doc.at("lambda"), "lambda", m, *model.config.k_cov);
    }
  }
  model.nll = doc.at("nll").get<double>();
  model.converged = doc.at("converged").get<bool>();
  model.iterations = doc.at("iterations").get<int>();
  model.seed = doc.at("seed").get<std::uint64_t>();
  model.tol = doc.at("tol").get<double>();
  return model;
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write model file: " + path);
  out << fitted_model_to_json(model);
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open model file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fitted_model_from_json(buffer.str());
}

}  // namespace arenarank
