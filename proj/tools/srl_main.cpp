// srl: command line front end for the shallow ReLU calibration experiments.
//
// Exit codes: 0 success, 1 usage or input error, 2 monitor or lemma-check
// violation, 3 training divergence.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srl/diagnostics.hpp"
#include "srl/distributions.hpp"
#include "srl/experiment.hpp"
#include "srl/idx.hpp"
#include "srl/interpolation.hpp"
#include "srl/io.hpp"
#include "srl/network.hpp"
#include "srl/reference.hpp"
#include "srl/regime.hpp"
#include "srl/rng.hpp"
#include "srl/trainer.hpp"

using namespace srl;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMonitor = 2;
constexpr int kExitDiverged = 3;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kRngNote =
    "std::mt19937_64; uniform = top 53 bits * 2^-53; Gaussian = Marsaglia polar; "
    "children via derive_seed(root, stream, index)";

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "json";
  unsigned threads = 0;
  std::string regime;
  double eps = 0.0;
  double xi = 0.0;
  std::size_t n = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "flat JSON file with RegimeConfig fields")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "root seed (overrides the config)");
  cmd->add_option("--out-dir", c.out_dir, "write results here instead of stdout");
  cmd->add_option("--format", c.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", c.threads, "worker threads, 0 = hardware");
  cmd->add_option("--regime", c.regime, "preset: easy, clairvoyant, worstcase, consistency")
      ->check(CLI::IsMember({"easy", "clairvoyant", "worstcase", "consistency"}));
  cmd->add_option("--eps", c.eps, "target error for easy/clairvoyant/worstcase");
  cmd->add_option("--xi", c.xi, "early stopping exponent for consistency");
  cmd->add_option("--n", c.n, "sample size for consistency");
}

// Small default run: logistic_1d with c = 2 and its affine teacher, m = 256,
// n = 512, t = 10.
RegimeConfig default_config() {
  RegimeConfig c;
  c.m = 256;
  c.rho = 0.5;
  c.eta = 16.0;
  c.n = 512;
  c.t = 10;
  c.eps_gd = 1.0 / 80.0;
  c.distribution = "logistic_1d";
  c.distribution_params = {{"c", 2.0}};
  c.reference = {{"kind", "affine_teacher"}, {"slope", {2.0}}, {"intercept", 0.0}};
  c.mc_features = 20000;
  return c;
}

// Presets named in the file or on the command line are derived first; every
// other field in the file then overrides the derived value.
RegimeConfig load_config(const Common& o) {
  json file = json::object();
  if (!o.config_path.empty()) file = read_json(o.config_path);
  if (!file.is_object()) throw std::invalid_argument("config: expected a JSON object");

  std::string regime = o.regime.empty() ? file.value("regime", std::string{}) : o.regime;
  RegimeExtras extras;
  extras.R = file.value("R", extras.R);
  extras.d = file.value("d", extras.d);

  RegimeConfig cfg = default_config();
  if (regime == "easy" || regime == "clairvoyant" || regime == "worstcase") {
    const double eps = o.eps > 0 ? o.eps : file.value("eps", 0.0);
    if (!(eps > 0)) throw std::invalid_argument("regime " + regime + " needs eps");
    const RegimeConfig derived = derive_regime(regime, eps, extras);
    cfg = derived;
    cfg.distribution = "logistic_1d";
    cfg.distribution_params = {{"c", 2.0}};
    cfg.reference = default_config().reference;
    cfg.mc_features = default_config().mc_features;
    file.erase("regime");
    file.erase("eps");
  } else if (regime == "consistency") {
    const std::size_t n = o.n > 0 ? o.n : file.value("n", std::size_t{1024});
    const double xi = o.xi > 0 ? o.xi : file.value("xi", 0.5);
    cfg = derive_consistency(n, xi, extras);
    cfg.distribution = "smooth_step_1d";
    cfg.distribution_params = {{"s", 0.1}};
    cfg.mc_features = default_config().mc_features;
    for (const char* k : {"regime", "n", "xi", "m", "rho", "eta", "t", "eps_gd"}) file.erase(k);
  }
  from_json(file, cfg);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

json metadata(const std::string& command, std::uint64_t root_seed) {
  return {{"tool", "srl"},
          {"version", kVersion},
          {"command", command},
          {"root_seed", root_seed},
          {"rng", kRngNote}};
}

// With --out-dir every product lands in a file; otherwise the product chosen
// by --format goes to stdout and the rest to stderr.
class Output {
 public:
  explicit Output(const Common& o) : dir_(o.out_dir), csv_(o.format == "csv") {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool csv() const { return csv_; }

  void json_doc(const std::string& name, const json& j, bool primary = true) {
    if (!dir_.empty()) {
      write_json(std::filesystem::path(dir_) / (name + ".json"), j);
    } else {
      (primary ? std::cout : std::cerr) << j.dump(2) << '\n';
    }
  }

  void csv_doc(const std::string& name, const std::string& text) {
    if (!dir_.empty()) {
      write_text(std::filesystem::path(dir_) / (name + ".csv"), text);
    } else {
      std::cout << text;
    }
  }

 private:
  std::string dir_;
  bool csv_;
};

std::string kv_csv(const json& flat) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [k, v] : flat.items()) {
    if (v.is_primitive()) out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return out.str();
}

std::vector<double> to_doubles(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

int exit_code(bool diverged, bool monitors_ok) {
  if (diverged) return kExitDiverged;
  return monitors_ok ? kExitOk : kExitMonitor;
}

// ---- train ---------------------------------------------------------------

struct IdxOptions {
  std::string images;
  std::string labels;
  std::vector<int> classes{1, 5};
  double stop_ratio = 0.5;
  std::size_t max_steps = 100000;
  std::size_t limit = 0;
};

int run_idx_fit(const Common& o, const IdxOptions& idx) {
  RegimeConfig cfg = load_config(o);
  LabeledSample data = load_idx(idx.images, idx.labels, idx.classes[0], idx.classes[1]);
  if (idx.limit > 0 && idx.limit < static_cast<std::size_t>(data.points.rows())) {
    const auto k = static_cast<Eigen::Index>(idx.limit);
    data.points = data.points.topRows(k).eval();
    data.labels = data.labels.head(k).eval();
  }
  const Matrix points = cfg.augment ? augment_rows(data.points) : data.points;
  const LabeledSample train_set{points, data.labels, data.seed};
  const std::size_t n = static_cast<std::size_t>(points.rows());
  const Network net = Network::init(cfg.m, static_cast<std::size_t>(points.cols()), cfg.rho,
                                    derive_seed(cfg.seed, stream::kNetwork));
  FrozenFitConfig fc;
  fc.eta = 4.0 / (cfg.rho * cfg.rho);
  fc.max_steps = idx.max_steps;
  fc.stop_norm_ratio = idx.stop_ratio;
  const FrozenFit fit = fit_frozen(net, train_set, fc);

  json j;
  j["metadata"] = metadata("train --idx-images", cfg.seed);
  j["metadata"]["preprocessing"] =
      "pixels / (255 sqrt(rows * cols)), rows with norm > 1 rescaled to the unit sphere" +
      std::string(cfg.augment ? ", then (x, 1) / sqrt(2)" : "");
  j["metadata"]["optimizer"] =
      "gradient descent on frozen features at W0, eta = 4 / rho^2, stopped once "
      "rho ||V - W0|| / sqrt(n) reaches the stop ratio";
  j["classes"] = idx.classes;
  j["n"] = n;
  j["m"] = cfg.m;
  j["rho"] = cfg.rho;
  j["steps"] = fit.steps;
  j["stopped_on"] = fit.stopped_on;
  j["emp_risk"] = fit.emp_risk;
  j["grad_norm"] = fit.grad_norm;
  j["R_estimate"] = fit.radius;
  j["R_over_sqrt_n"] = fit.radius / std::sqrt(static_cast<double>(n));

  Output out(o);
  if (out.csv()) {
    out.csv_doc("idx_fit", kv_csv(j));
  } else {
    out.json_doc("idx_fit", j);
  }
  return kExitOk;
}

int run_train(const Common& o, bool with_trajectory) {
  const RegimeConfig cfg = load_config(o);
  const ExperimentReport rep = run_experiment(cfg);
  json j = report_json(rep, with_trajectory);
  j["metadata"] = metadata("train", cfg.seed);

  Output out(o);
  if (out.csv()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, rep.trajectory);
    out.csv_doc("trajectory", csv.str());
    j.erase("trajectory");
    out.json_doc("report", j, false);
  } else {
    out.json_doc("report", j);
  }
  if (rep.diverged()) std::cerr << "srl: training diverged: " << rep.trajectory.message << '\n';
  return exit_code(rep.diverged(), rep.monitors_passed());
}

// ---- sweep / consistency -------------------------------------------------

int emit_sweep(const Common& o, const std::string& command, const SweepResult& s) {
  json j = sweep_json(s);
  j["metadata"] = metadata(command, s.root_seed);
  Output out(o);
  if (out.csv()) {
    out.csv_doc("sweep", sweep_csv(s));
    out.json_doc("sweep_summary", j, false);
  } else {
    out.json_doc("sweep", j);
  }
  bool diverged = false, monitors_ok = true;
  for (const auto& c : s.cells) {
    diverged = diverged || c.diverged > 0;
    monitors_ok = monitors_ok && c.monitors_passed;
  }
  return exit_code(diverged, monitors_ok);
}

struct SweepOptions {
  std::string axis = "n";
  std::vector<double> values;
  std::size_t seeds = 5;
};

int run_sweep(const Common& o, const SweepOptions& so) {
  const RegimeConfig base = load_config(o);
  return emit_sweep(o, "sweep", sweep(base, so.axis, so.values, so.seeds, base.seed, o.threads));
}

struct ConsistencyOptions {
  std::vector<std::size_t> n_grid{256, 1024, 4096};
  std::size_t seeds = 10;
};

int run_consistency(Common o, const ConsistencyOptions& co) {
  o.regime = "consistency";
  if (o.n == 0) o.n = co.n_grid.front();
  const RegimeConfig base = load_config(o);
  return emit_sweep(o, "consistency",
                    sweep(base, "n", to_doubles(co.n_grid), co.seeds, base.seed, o.threads));
}

// ---- interp-lb -----------------------------------------------------------

struct InterpOptions {
  std::string distribution = "constant_1d";
  std::string params = R"({"p": 0.75, "lo": 0.0, "hi": 1.0})";
  std::vector<std::size_t> n_grid{100, 1000, 10000};
  std::size_t trials = 50;
};

int run_interp(const Common& o, const InterpOptions& io) {
  const std::uint64_t root = o.seed.value_or(0);
  const auto dist = make_distribution(io.distribution, json::parse(io.params));
  const auto* uni = dynamic_cast<const UnivariateDistribution*>(dist.get());
  if (!uni) throw std::invalid_argument("interp-lb needs a univariate distribution");
  const ComparisonTable table = excess_risk_comparison(*uni, io.n_grid, io.trials, root, o.threads);

  json summary = comparison_summary_json(table);
  summary["metadata"] = metadata("interp-lb", root);
  summary["distribution"] = {{"name", dist->name()}, {"params", dist->params()}};
  Output out(o);
  if (out.csv()) {
    out.csv_doc("interp_lb", comparison_csv(table));
    out.json_doc("interp_lb_summary", summary, false);
  } else {
    out.json_doc("interp_lb_summary", summary);
  }
  return kExitOk;
}

// ---- lemma-check ---------------------------------------------------------

struct LemmaOptions {
  std::string lemma;
  std::size_t m = 1024;
  std::size_t d = 2;
  double tau = 0.01;
  std::size_t trials = 1000;
  double delta = 0.05;
  std::size_t resolution = 2048;
  double radius = 1.0;
  std::vector<std::size_t> n_grid{256, 1024, 4096, 16384};
  std::size_t seeds = 20;
};

struct Diverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Trained {
  RegimeConfig cfg;
  ExperimentReport rep;
  Network net;  // at initialization
};

Trained train_for_lemma(const Common& o) {
  RegimeConfig cfg = load_config(o);
  ExperimentReport rep = run_experiment(cfg);
  if (rep.diverged()) throw Diverged("training diverged: " + rep.trajectory.message);
  Network net = Network::init(cfg.m, cfg.d, cfg.rho, rep.network_seed);
  return {std::move(cfg), std::move(rep), std::move(net)};
}

const Matrix& final_weights(const Trajectory& traj) {
  return traj.selected ? traj.selected_weights : traj.probes.front();
}

json lemma_json(const Common& o, const LemmaOptions& lo, bool& passed) {
  const std::uint64_t root = o.seed.value_or(0);
  json j;
  if (lo.lemma == "gauss-count") {
    const auto r = gaussian_row_count_check(lo.m, lo.tau, lo.trials, lo.delta, root, lo.d, o.threads);
    j = r;
    passed = r.passed;
    j["passed"] = passed;
    j["metadata"] = metadata("lemma-check gauss-count", root);
    return j;
  }
  if (lo.lemma == "gen-gap") {
    const RegimeConfig cfg = load_config(o);
    const auto dist = make_distribution(cfg.distribution, cfg.distribution_params);
    const Network net = Network::init(cfg.m, cfg.d, cfg.rho, derive_seed(cfg.seed, stream::kNetwork));
    Rng rng(derive_seed(cfg.seed, stream::kProbe));
    Matrix dir(net.init_weights().rows(), net.init_weights().cols());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir.data()[i] = rng.gaussian();
    const Matrix v = net.init_weights() + lo.radius * dir / dir.norm();
    const auto sw = generalization_sweep(net, v, *dist, dist->default_evaluator(), cfg.augment,
                                         lo.n_grid, lo.seeds, cfg.seed, o.threads);
    json cells = json::array();
    passed = true;
    for (std::size_t c = 0; c < sw.n_grid.size(); ++c) {
      double worst = 0;
      for (const auto& r : sw.cells[c]) worst = std::max(worst, std::abs(r.gap) - r.bound);
      passed = passed && worst <= 0;
      cells.push_back({{"n", sw.n_grid[c]},
                       {"median_abs_gap", sw.median_abs_gap[c]},
                       {"bound", sw.cells[c].front().bound},
                       {"within_bound", worst <= 0}});
    }
    j = {{"lemma", "gen-gap"}, {"cells", cells}, {"slope", sw.slope}, {"passed", passed}};
    j["metadata"] = metadata("lemma-check gen-gap", cfg.seed);
    return j;
  }

  const Trained tr = train_for_lemma(o);
  const Trajectory& traj = tr.rep.trajectory;
  if (lo.lemma == "flip-count") {
    const auto dist = make_distribution(tr.cfg.distribution, tr.cfg.distribution_params);
    const LabeledSample raw = sample(*dist, tr.cfg.n, tr.rep.data_seed);
    const Matrix points = tr.cfg.augment ? augment_rows(raw.points) : raw.points;
    const auto f = activation_flip_count(traj.probes.front(), final_weights(traj), points, lo.delta);
    passed = f.within_bound;
    j = {{"lemma", "flip-count"},  {"max_flips", f.max_flips}, {"mean_flips", f.mean_flips},
         {"max_fraction", f.max_fraction}, {"radius", f.radius}, {"r", f.r},
         {"bound", f.bound},       {"passed", passed}};
  } else if (lo.lemma == "sphere-gap") {
    const auto g = sphere_linearization_gap(tr.net, final_weights(traj), lo.resolution, lo.delta,
                                            derive_seed(tr.cfg.seed, stream::kProbe));
    passed = g.sup_gap <= g.bound;
    j = {{"lemma", "sphere-gap"}, {"sup_gap", g.sup_gap}, {"points", g.points}, {"mode", g.mode},
         {"radius", g.radius},    {"bound", g.bound},     {"passed", passed}};
  } else if (lo.lemma == "risk-ratio") {
    const std::size_t probe = traj.probes.size() > 1 ? 1 : 0;
    const auto r = risk_ratio_check(traj, probe, tr.cfg.m, lo.delta);
    passed = r.within_bound;
    j = {{"lemma", "risk-ratio"},
         {"probe", probe == 1 ? "sampled reference" : "initialization"},
         {"max_ratio", r.max_ratio},
         {"argmax", {r.argmax_i, r.argmax_j}},
         {"radius_b", r.radius_b},
         {"radius_v", r.radius_v},
         {"bound", r.bound},
         {"passed", passed}};
  } else {
    throw std::invalid_argument("unknown lemma " + lo.lemma);
  }
  j["config"] = tr.cfg;
  j["metadata"] = metadata("lemma-check " + lo.lemma, tr.cfg.seed);
  return j;
}

int run_lemma(const Common& o, const LemmaOptions& lo) {
  bool passed = true;
  const json j = lemma_json(o, lo, passed);
  Output out(o);
  if (out.csv()) {
    json flat = j;
    flat.erase("metadata");
    flat.erase("config");
    out.csv_doc("lemma_check", kv_csv(flat));
    out.json_doc("lemma_check", j, false);
  } else {
    out.json_doc("lemma_check", j);
  }
  return passed ? kExitOk : kExitMonitor;
}

// ---- bound ---------------------------------------------------------------

struct BoundOptions {
  double R = 4.0;
  double ref_risk = 0.0;
  double emp_ref_risk = 0.0;
  std::optional<double> bayes_risk;
  std::optional<double> delta;
};

int run_bound(const Common& o, const BoundOptions& bo) {
  RegimeConfig cfg = load_config(o);
  if (bo.delta) cfg.delta = *bo.delta;
  const BoundTerms b = compute_bound_terms(cfg, bo.R, bo.ref_risk, bo.emp_ref_risk, bo.bayes_risk);
  json j = {{"config", cfg}, {"bounds", b}};
  j["metadata"] = metadata("bound", cfg.seed);
  Output out(o);
  if (out.csv()) {
    json flat = b;
    out.csv_doc("bound", kv_csv(flat));
  } else {
    out.json_doc("bound", j);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow ReLU calibration experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common train_o, sweep_o, cons_o, interp_o, lemma_o, bound_o;
  bool no_trajectory = false;
  IdxOptions idx;
  auto* train = app.add_subcommand("train", "one run: sample, train, evaluate, certify");
  add_common(train, train_o);
  train->add_flag("--no-trajectory", no_trajectory, "omit per-iterate records from the JSON report");
  auto* img = train->add_option("--idx-images", idx.images, "IDX image file (frozen-feature norm fit)")
                  ->check(CLI::ExistingFile);
  train->add_option("--idx-labels", idx.labels, "IDX label file")->check(CLI::ExistingFile)->needs(img);
  img->needs(train->get_option("--idx-labels"));
  train->add_option("--classes", idx.classes, "positive and negative class")->expected(2);
  train->add_option("--stop-ratio", idx.stop_ratio, "stop once rho ||V - W0|| / sqrt(n) reaches this");
  train->add_option("--max-steps", idx.max_steps, "frozen fit step limit");
  train->add_option("--limit", idx.limit, "use only the first N matching examples");

  SweepOptions so;
  auto* sw = app.add_subcommand("sweep", "grid over one axis with several seeds per cell");
  add_common(sw, sweep_o);
  sw->add_option("--axis", so.axis, "n, m or eps")->check(CLI::IsMember({"n", "m", "eps"}));
  sw->add_option("--values", so.values, "axis values")->required()->expected(2, 1 << 20);
  sw->add_option("--seeds", so.seeds, "runs per cell (>= 5)");

  ConsistencyOptions co;
  auto* cons = app.add_subcommand("consistency", "consistency schedule swept over n");
  add_common(cons, cons_o);
  cons->add_option("--n-grid", co.n_grid, "sample sizes")->expected(2, 1 << 20);
  cons->add_option("--seeds", co.seeds, "runs per cell (>= 5)");

  InterpOptions io;
  auto* interp = app.add_subcommand("interp-lb", "1-NN versus k-NN excess zero-one risk");
  add_common(interp, interp_o);
  interp->add_option("--distribution", io.distribution, "univariate catalog entry");
  interp->add_option("--params", io.params, "distribution parameters as JSON");
  interp->add_option("--n-grid", io.n_grid, "sample sizes")->expected(1, 1 << 20);
  interp->add_option("--trials", io.trials, "trials per sample size");

  LemmaOptions lo;
  auto* lemma = app.add_subcommand("lemma-check", "empirical check of one supporting inequality");
  add_common(lemma, lemma_o);
  lemma->add_option("--lemma", lo.lemma, "which check")
      ->required()
      ->check(CLI::IsMember({"gauss-count", "flip-count", "sphere-gap", "risk-ratio", "gen-gap"}));
  lemma->add_option("--m", lo.m, "width (gauss-count)");
  lemma->add_option("--d", lo.d, "dimension (gauss-count)");
  lemma->add_option("--tau", lo.tau, "band half-width (gauss-count)");
  lemma->add_option("--trials", lo.trials, "trials (gauss-count)");
  lemma->add_option("--delta", lo.delta, "confidence parameter");
  lemma->add_option("--resolution", lo.resolution, "grid points per angle (sphere-gap)");
  lemma->add_option("--radius", lo.radius, "||V - W0|| (gen-gap)");
  lemma->add_option("--n-grid", lo.n_grid, "sample sizes (gen-gap)")->expected(2, 1 << 20);
  lemma->add_option("--seeds", lo.seeds, "samples per n (gen-gap)");

  BoundOptions bo;
  auto* bound = app.add_subcommand("bound", "tau terms, effective radius and the excess risk bound");
  add_common(bound, bound_o);
  bound->add_option("--R", bo.R, "reference norm bound R")->check(CLI::PositiveNumber);
  bound->add_option("--ref-risk", bo.ref_risk, "population risk of the reference model")->required();
  bound->add_option("--emp-ref-risk", bo.emp_ref_risk, "empirical frozen risk of the sampled reference");
  bound->add_option("--bayes-risk", bo.bayes_risk, "Bayes logistic risk, for K_bin");
  bound->add_option("--delta", bo.delta, "confidence parameter (default from config, 0.05)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!idx.images.empty()) return run_idx_fit(train_o, idx);
      return run_train(train_o, !no_trajectory);
    }
    if (*sw) return run_sweep(sweep_o, so);
    if (*cons) return run_consistency(cons_o, co);
    if (*interp) return run_interp(interp_o, io);
    if (*lemma) return run_lemma(lemma_o, lo);
    if (*bound) return run_bound(bound_o, bo);
  } catch (const Diverged& e) {
    std::cerr << "srl: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "srl: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
