#pragma once
// Simulation scenario description and its JSON form.
//
// A scenario pins everything a run needs: family, dimension, how the true
// parameter is drawn, the covariate process, horizon and checkpoints, delta,
// replication count, seed, the forecaster, and which confidence sets to
// evaluate with their parameters. Identical config + seed reproduces output
// byte for byte.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glmcs/conf_sets.hpp"
#include "glmcs/glm_family.hpp"

namespace glmcs {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThetaStarSpec {
  enum class Kind { explicit_vector, sphere, sparse };
  Kind kind = Kind::sphere;
  Eigen::VectorXd value;  // explicit_vector
  double norm = 1.0;      // sphere / sparse
  int s = 1;              // sparse
};

struct CovariateSpec {
  enum class Kind { iid_gaussian, iid_rademacher, fixed, adaptive_greedy };
  Kind kind = Kind::iid_gaussian;
  double scale = 1.0;
  std::vector<Eigen::VectorXd> rows;  // fixed
  int pool = 16;                      // adaptive_greedy candidates per round
};

struct SetSpec {
  std::string type;  // analytic | transductive | det_algorithmic | ewa_algorithmic | sparse_ewa
  double gamma = 1.0;
  double b = 1.0;
  double norm_bound = 1.0;  // B
  double linf_bound = 1.0;
  int s = 1;
  WidthMode mode = WidthMode::oracle;
  std::optional<double> smoothness_override;         // M in the sparse width formula
  std::optional<double> strong_convexity_override;   // m in the sparse width formula
};

struct ForecasterSpec {
  double lambda = 1.0;
  double gamma = 1.0;
  std::optional<double> box_half_width;
  std::optional<int> nodes_per_dim;
  bool sparse_prior = false;
  bool point_mass_oracle = false;  // predict with a point mass at the true parameter
};

struct ScenarioConfig {
  std::string family = "gaussian";
  int d = 1;
  ThetaStarSpec theta_star;
  CovariateSpec covariates;
  long horizon = 100;
  std::vector<long> checkpoints;  // empty: geometric grid {1, 2, 4, ...} plus the horizon
  double delta = 0.05;
  long replications = 100;
  std::uint64_t seed = 1;
  double eta = 1.0;
  ForecasterSpec forecaster;
  std::vector<SetSpec> sets;

  std::vector<long> effective_checkpoints() const {
    if (!checkpoints.empty()) return checkpoints;
    std::vector<long> out;
    for (long n = 1; n < horizon; n *= 2) out.push_back(n);
    if (horizon >= 1) out.push_back(horizon);
    return out;
  }

  void validate() const {
    if (d < 1) throw ConfigError("config: d must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("config: delta must lie in (0, 1)");
    if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    if (!(eta > 0.0) || !(eta > 0.0 && eta <= 1.0))
      throw ConfigError("config: eta must lie in (0, 1]");
    if (family != "gaussian" && family != "logistic")
      throw ConfigError("config: unknown family '" + family + "'");
    if (theta_star.kind == ThetaStarSpec::Kind::explicit_vector &&
        theta_star.value.size() != d)
      throw ConfigError("config: explicit theta_star has the wrong dimension");
    if (theta_star.kind == ThetaStarSpec::Kind::sparse &&
        (theta_star.s < 1 || theta_star.s > d))
      throw ConfigError("config: sparse theta_star needs 1 <= s <= d");
    if (covariates.kind == CovariateSpec::Kind::fixed) {
      if (long(covariates.rows.size()) < horizon)
        throw ConfigError("config: fixed design has fewer rows than the horizon");
      for (const auto& row : covariates.rows)
        if (row.size() != d) throw ConfigError("config: fixed design row dimension mismatch");
    }
    const std::vector<long> cps = effective_checkpoints();
    for (long c : cps)
      if (c < 1 || c > horizon) throw ConfigError("config: checkpoint outside [1, horizon]");
    if (!std::is_sorted(cps.begin(), cps.end()))
      throw ConfigError("config: checkpoints must be ascending");
    for (const auto& set : sets) {
      if (set.type != "analytic" && set.type != "transductive" &&
          set.type != "det_algorithmic" && set.type != "ewa_algorithmic" &&
          set.type != "sparse_ewa")
        throw ConfigError("config: unknown set type '" + set.type + "'");
      if (set.type == "transductive" &&
          covariates.kind == CovariateSpec::Kind::adaptive_greedy)
        throw ConfigError(
            "config: transductive sets require obliviously chosen covariates; "
            "the adaptive-greedy process is not allowed");
      if (set.type == "det_algorithmic" && set.mode != WidthMode::oracle)
        throw ConfigError("config: det_algorithmic supports oracle mode only");
      if (set.type == "sparse_ewa" && (set.s < 1 || set.s > d))
        throw ConfigError("config: sparse_ewa needs 1 <= s <= d");
    }
  }

  static ScenarioConfig from_json(const nlohmann::json& j);
};

namespace detail {

inline WidthMode parse_mode(const std::string& text) {
  if (text == "oracle") return WidthMode::oracle;
  if (text == "bound") return WidthMode::bound;
  throw ConfigError("config: mode must be 'oracle' or 'bound'");
}

}  // namespace detail

inline ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    c.family = j.value("family", c.family);
    c.d = j.value("d", c.d);
    c.horizon = j.value("horizon", c.horizon);
    c.delta = j.value("delta", c.delta);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.eta = j.value("eta", c.eta);
    if (j.contains("checkpoints"))
      c.checkpoints = j.at("checkpoints").get<std::vector<long>>();
    if (j.contains("theta_star")) {
      const auto& t = j.at("theta_star");
      const std::string kind = t.value("kind", "sphere");
      if (kind == "explicit") {
        c.theta_star.kind = ThetaStarSpec::Kind::explicit_vector;
        const auto vals = t.at("value").get<std::vector<double>>();
        c.theta_star.value =
            Eigen::Map<const Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size()));
      } else if (kind == "sphere") {
        c.theta_star.kind = ThetaStarSpec::Kind::sphere;
        c.theta_star.norm = t.value("norm", 1.0);
      } else if (kind == "sparse") {
        c.theta_star.kind = ThetaStarSpec::Kind::sparse;
        c.theta_star.norm = t.value("norm", 1.0);
        c.theta_star.s = t.value("s", 1);
      } else {
        throw ConfigError("config: unknown theta_star kind '" + kind + "'");
      }
    }
    if (j.contains("covariates")) {
      const auto& v = j.at("covariates");
      const std::string kind = v.value("kind", "iid_gaussian");
      if (kind == "iid_gaussian") {
        c.covariates.kind = CovariateSpec::Kind::iid_gaussian;
      } else if (kind == "iid_rademacher") {
        c.covariates.kind = CovariateSpec::Kind::iid_rademacher;
      } else if (kind == "fixed") {
        c.covariates.kind = CovariateSpec::Kind::fixed;
        for (const auto& row : v.at("rows")) {
          const auto vals = row.get<std::vector<double>>();
          c.covariates.rows.push_back(
              Eigen::Map<const Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size())));
        }
      } else if (kind == "adaptive_greedy") {
        c.covariates.kind = CovariateSpec::Kind::adaptive_greedy;
        c.covariates.pool = v.value("pool", 16);
      } else {
        throw ConfigError("config: unknown covariate kind '" + kind + "'");
      }
      c.covariates.scale = v.value("scale", 1.0);
    }
    if (j.contains("forecaster")) {
      const auto& f = j.at("forecaster");
      c.forecaster.lambda = f.value("lambda", 1.0);
      c.forecaster.gamma = f.value("gamma", 1.0);
      if (f.contains("box_half_width") && !f.at("box_half_width").is_null())
        c.forecaster.box_half_width = f.at("box_half_width").get<double>();
      if (f.contains("nodes_per_dim") && !f.at("nodes_per_dim").is_null())
        c.forecaster.nodes_per_dim = f.at("nodes_per_dim").get<int>();
      c.forecaster.sparse_prior = f.value("sparse_prior", false);
      c.forecaster.point_mass_oracle = f.value("point_mass_oracle", false);
    }
    if (j.contains("sets")) {
      for (const auto& s : j.at("sets")) {
        SetSpec spec;
        spec.type = s.at("type").get<std::string>();
        spec.gamma = s.value("gamma", 1.0);
        spec.b = s.value("b", 1.0);
        spec.norm_bound = s.value("B", 1.0);
        spec.linf_bound = s.value("Linf", 1.0);
        spec.s = s.value("s", 1);
        if (s.contains("mode")) spec.mode = detail::parse_mode(s.at("mode").get<std::string>());
        if (s.contains("M")) spec.smoothness_override = s.at("M").get<double>();
        if (s.contains("m")) spec.strong_convexity_override = s.at("m").get<double>();
        c.sets.push_back(std::move(spec));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace glmcs
