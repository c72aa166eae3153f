#include "srl/experiment.hpp"

#include <stdexcept>

#include "srl/io.hpp"
#include "srl/reference.hpp"
#include "srl/rng.hpp"

namespace srl {

bool ExperimentReport::monitors_passed() const {
  if (!smoothness.passed || !smoothness.descent_holds || !regret_init.holds) return false;
  return !regret_reference || regret_reference->holds;
}

ExperimentReport run_experiment(const RegimeConfig& cfg) {
  ExperimentReport rep;
  rep.config = cfg;
  rep.data_seed = derive_seed(cfg.seed, stream::kData);
  rep.network_seed = derive_seed(cfg.seed, stream::kNetwork);
  rep.evaluation_seed = derive_seed(cfg.seed, stream::kEvaluation);
  rep.reference_seed = derive_seed(cfg.seed, stream::kReference);

  const auto dist = make_distribution(cfg.distribution, cfg.distribution_params);
  const std::size_t d = dist->dim() + (cfg.augment ? 1 : 0);
  if (d != cfg.d) {
    throw std::invalid_argument("run_experiment: config d = " + std::to_string(cfg.d) +
                                " but the distribution gives " + std::to_string(d));
  }
  const LabeledSample raw = sample(*dist, cfg.n, rep.data_seed);
  const LabeledSample data =
      cfg.augment ? LabeledSample{augment_rows(raw.points), raw.labels, raw.seed} : raw;

  Network net = Network::init(cfg.m, d, cfg.rho, rep.network_seed);
  std::optional<InfiniteWidthModel> model;
  std::vector<Matrix> probes{net.init_weights()};
  if (!cfg.reference.is_null()) {
    model.emplace(make_reference(cfg.reference, d, cfg.mc_features, rep.reference_seed));
    probes.push_back(sample_reference(*model, net, rep.reference_seed).ubar);
    rep.emp_ref_risk = frozen_empirical_risk(FrozenFeatures::at_init(net), probes.back(), data);
  }

  TrainConfig tc = train_config(cfg);
  rep.trajectory = train(net, data, tc, probes);
  rep.smoothness = monitor_smoothness(rep.trajectory);
  rep.regret_init = regret_certificate(rep.trajectory, 0);
  if (model) rep.regret_reference = regret_certificate(rep.trajectory, 1);
  if (rep.diverged()) return rep;

  const PopulationEvaluator eval = dist->default_evaluator(rep.evaluation_seed);
  const Matrix eval_points = cfg.augment ? augment_rows(eval.points) : eval.points;
  const Network selected(cfg.rho, net.signs(), rep.trajectory.selected
                                                   ? rep.trajectory.selected_weights
                                                   : net.init_weights());
  rep.population = population_risk(eval, selected.forward_batch(eval_points));

  if (model) {
    rep.ref_risk = population_risk(eval, model->forward_batch(eval_points)).breakdown.logistic_risk;
    rep.bounds = compute_bound_terms(cfg, effective_R(cfg.rho, model->norm_bound()), *rep.ref_risk,
                                     *rep.emp_ref_risk, rep.population.breakdown.bayes_risk);
  }
  return rep;
}

namespace {

nlohmann::json regret_json(const RegretCertificate& c) {
  return {{"lhs", c.lhs},
          {"rhs", c.rhs},
          {"worst_scaled_slack", c.worst_scaled_slack},
          {"holds", c.holds}};
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& r, bool with_trajectory) {
  nlohmann::json j;
  j["config"] = r.config;
  j["root_seed"] = r.config.seed;
  j["seeds"] = {{"data", r.data_seed},
                {"network", r.network_seed},
                {"evaluation", r.evaluation_seed},
                {"reference", r.reference_seed}};
  j["status"] = r.diverged() ? "diverged" : "ok";
  if (!r.trajectory.message.empty()) j["message"] = r.trajectory.message;
  j["selected"] = r.trajectory.selected ? nlohmann::json(*r.trajectory.selected) : nlohmann::json(nullptr);
  if (!r.diverged()) {
    j["population"] = r.population.breakdown;
    j["population_se"] = r.population.se;
    j["population_provenance"] = r.population.provenance;
  }
  j["monitors"] = {{"smoothness", {{"passed", r.smoothness.passed},
                                   {"descent_holds", r.smoothness.descent_holds},
                                   {"worst_scaled", r.smoothness.worst_scaled}}},
                   {"regret_init", regret_json(r.regret_init)},
                   {"passed", r.monitors_passed()}};
  if (r.regret_reference) j["monitors"]["regret_reference"] = regret_json(*r.regret_reference);
  if (r.ref_risk) j["ref_risk"] = *r.ref_risk;
  if (r.emp_ref_risk) j["emp_ref_risk"] = *r.emp_ref_risk;
  if (r.bounds) j["bounds"] = *r.bounds;
  if (with_trajectory) j["trajectory"] = trajectory_json(r.trajectory);
  return j;
}

}  // namespace srl
