// Command-line front end: dataset generation, training, roadmap building,
// planning, action proposal, scoring and ablations.

#include "lsr/action_proposal.hpp"
#include "lsr/evaluation.hpp"
#include "lsr/io.hpp"
#include "lsr/pipeline.hpp"
#include "lsr/planner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Records inputs, outputs and seeds of one invocation next to its output.
class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) {
    doc_["tool"] = "lsr";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    json args = json::array();
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    doc_["arguments"] = args;
    doc_["seeds"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::object();
  }

  void seed(const std::string& name, std::uint64_t v) { doc_["seeds"][name] = v; }
  void input(const fs::path& p) { doc_["inputs"][p.string()] = lsr::file_hash(p); }
  void output(const fs::path& p) { doc_["outputs"][p.string()] = lsr::file_hash(p); }
  json& extra() { return doc_; }

  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json score_json(const lsr::ScoreReport& r) {
  return {{"pct_all", r.pct_all},         {"pct_any", r.pct_any},
          {"pct_trans", r.pct_trans},     {"n_queries", r.n_queries},
          {"unreachable", r.unreachable}, {"truncated", r.truncated},
          {"transitions", r.transitions}};
}

json action_json(const lsr::Action& a) {
  return {{"kind", lsr::action_code(a).substr(0, lsr::action_code(a).find(' '))},
          {"pick", {a.pick.row, a.pick.col}},
          {"release", {a.release.row, a.release.col}}};
}

const lsr::TaskState& state_by_id(lsr::TaskKind task, int id) {
  const auto& states = lsr::enumerate_states(task);
  if (id < 0 || id >= static_cast<int>(states.size()))
    throw std::invalid_argument("state id " + std::to_string(id) + " outside [0, " +
                                std::to_string(states.size()) + ")");
  return states[static_cast<std::size_t>(id)];
}

lsr::TaskKind model_task(const lsr::EncoderModel& model, const fs::path& path) {
  if (!model.task) throw std::runtime_error(path.string() + ": model does not record its task");
  return *model.task;
}

// Validators shared by several subcommands.
const auto kTaskCheck = CLI::IsMember({"ns", "hs", "rb"});
const auto kMetricCheck = CLI::IsMember({"l1", "l2", "linf"});
const auto kClusteringCheck = CLI::IsMember({"avg", "single", "complete", "epsilon"});

struct Context {
  int argc;
  char** argv;
};

// ---------------------------------------------------------------- gen
struct GenOptions {
  std::string task = "ns";
  int pairs = 2500;
  double action_frac = 0.65;
  std::uint64_t seed = 1;
  fs::path out;
};

void add_gen(CLI::App& app, GenOptions& o) {
  auto* c = app.add_subcommand("gen", "Generate a training dataset of observation pairs");
  c->add_option("--task", o.task, "Task: ns, hs or rb")->check(kTaskCheck)->capture_default_str();
  c->add_option("--pairs", o.pairs, "Number of pairs")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--action-frac", o.action_frac, "Fraction of action pairs")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  c->add_option("--out", o.out, "Output dataset path")->required();
}

void run_gen(const GenOptions& o, const Context& ctx) {
  lsr::DatasetFile data;
  data.task = lsr::parse_task(o.task);
  data.noise = lsr::NoiseModel::defaults(data.task);
  data.seed = o.seed;
  data.tuples = lsr::generate_dataset(data.task, o.pairs, o.action_frac, o.seed);
  lsr::write_dataset(o.out, data);
  Manifest m("gen", ctx.argc, ctx.argv);
  m.seed("data", o.seed);
  m.output(o.out);
  m.write(manifest_path(o.out));
  std::cout << "wrote " << data.tuples.size() << " pairs to " << o.out.string() << '\n';
}

// ---------------------------------------------------------------- train
struct TrainOptions {
  fs::path dataset;
  int ld = 12;
  std::string mode = "vae";
  double gamma = 100.0;
  bool baseline = false;
  std::string metric = "l1";
  int epochs = 200;
  double recon_weight = lsr::LossConfig{}.recon_weight;
  double beta = 2.0;
  double static_dm = -1.0;
  std::string optimizer = "sgd";
  double lr = 1e-3;
  double clip_norm = lsr::TrainConfig{}.clip_norm;
  std::uint64_t seed = 1;
  fs::path out;
  fs::path trace;
};

void add_train(CLI::App& app, TrainOptions& o) {
  auto* c = app.add_subcommand("train", "Train the mapping module (encoder and decoder)");
  c->add_option("--dataset", o.dataset, "Dataset from 'gen'")->required()->check(CLI::ExistingFile);
  c->add_option("--ld", o.ld, "Latent dimension")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--mode", o.mode, "vae or ae")->check(CLI::IsMember({"vae", "ae"}))->capture_default_str();
  c->add_option("--gamma", o.gamma, "Weight of the action term")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_flag("--baseline", o.baseline, "Shorthand for --gamma 0");
  c->add_option("--metric", o.metric, "Action-term metric")->check(kMetricCheck)->capture_default_str();
  c->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--recon-weight", o.recon_weight, "Reconstruction weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--beta", o.beta, "Final KL weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--static-dm", o.static_dm, "Fixed minimum distance instead of the dynamic schedule");
  c->add_option("--optimizer", o.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}))->capture_default_str();
  c->add_option("--lr", o.lr, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--clip-norm", o.clip_norm, "Gradient norm clip per batch (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  c->add_option("--out", o.out, "Output model path")->required();
  c->add_option("--trace", o.trace, "Optional CSV of the per-epoch training trace");
}

void write_trace(const fs::path& path, const lsr::TrainingTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,recon,kl,action,total,beta,dm,checked,max_no_action,min_action\n";
  for (const auto& e : trace.epochs)
    out << e.epoch << ',' << e.loss.recon << ',' << e.loss.kl << ',' << e.loss.action << ','
        << e.loss.total << ',' << e.beta << ',' << e.dm << ',' << e.checked << ','
        << e.max_no_action << ',' << e.min_action << '\n';
}

void run_train(const TrainOptions& o, const Context& ctx) {
  const auto data = lsr::read_dataset(o.dataset);
  const auto mode = lsr::parse_mode(o.mode);
  lsr::LossConfig loss;
  loss.gamma = o.baseline ? 0.0 : o.gamma;
  loss.metric = lsr::parse_metric(o.metric);
  loss.recon_weight = o.recon_weight;
  loss.beta_end = o.beta;
  loss.beta_ramp_epochs = o.epochs * 4 / 5;
  if (o.static_dm >= 0) {
    loss.dynamic_dm = false;
    loss.dm = o.static_dm;
  }
  auto tc = lsr::TrainConfig::defaults_for(mode);
  tc.epochs = o.epochs;
  tc.learning_rate = o.lr;
  tc.clip_norm = o.clip_norm;
  tc.optimizer = o.optimizer == "adam" ? lsr::OptimizerKind::Adam : lsr::OptimizerKind::Sgd;
  auto model = lsr::EncoderModel::create(mode, lsr::observation_dim(data.task), o.ld, o.seed);
  model.task = data.task;
  const auto result = lsr::train(std::move(model), data.tuples, loss, tc, o.seed);
  lsr::write_model(o.out, result.model);
  Manifest m("train", ctx.argc, ctx.argv);
  m.seed("model", o.seed);
  m.input(o.dataset);
  m.output(o.out);
  if (!o.trace.empty()) {
    write_trace(o.trace, result.trace);
    m.output(o.trace);
  }
  m.extra()["final_dm"] = result.trace.final_dm;
  m.extra()["max_no_action_distance"] = result.trace.final_max_no_action;
  m.extra()["min_action_distance"] = result.trace.final_min_action;
  m.extra()["clipped_steps"] = result.trace.clipped_steps;
  m.write(manifest_path(o.out));
  std::cout << "trained " << o.mode << " ld=" << o.ld << " final dm=" << result.trace.final_dm
            << " separation=" << result.trace.final_min_action - result.trace.final_max_no_action
            << '\n';
}

// ---------------------------------------------------------------- encode
struct EncodeOptions {
  fs::path dataset;
  fs::path model;
  fs::path out;
};

void add_encode(CLI::App& app, EncodeOptions& o) {
  auto* c = app.add_subcommand("encode", "Encode a dataset into a latent dataset");
  c->add_option("--dataset", o.dataset, "Dataset from 'gen'")->required()->check(CLI::ExistingFile);
  c->add_option("--model", o.model, "Model from 'train'")->required()->check(CLI::ExistingFile);
  c->add_option("--out", o.out, "Output latent dataset")->required();
}

void run_encode(const EncodeOptions& o, const Context& ctx) {
  const auto data = lsr::read_dataset(o.dataset);
  const auto model = lsr::read_model(o.model);
  auto latent = lsr::encode_dataset(model, data);
  latent.model_hash = lsr::file_hash(o.model);
  lsr::write_latent(o.out, latent);
  Manifest m("encode", ctx.argc, ctx.argv);
  m.input(o.dataset);
  m.input(o.model);
  m.output(o.out);
  m.write(manifest_path(o.out));
  std::cout << "encoded " << latent.tuples.size() << " pairs\n";
}

// ---------------------------------------------------------------- build
struct BuildOptions {
  fs::path latent;
  std::string metric = "l1";
  int cmax = 1;
  double tau_min = 0.0;
  double tau_max = 3.0;
  double tau = -1.0;
  std::string clustering = "avg";
  bool annotate = false;
  fs::path out;
};

void add_build(CLI::App& app, BuildOptions& o) {
  auto* c = app.add_subcommand("build", "Build a latent space roadmap");
  c->add_option("--latent", o.latent, "Latent dataset from 'encode'")->required()->check(CLI::ExistingFile);
  c->add_option("--metric", o.metric, "Latent metric")->check(kMetricCheck)->capture_default_str();
  c->add_option("--cmax", o.cmax, "Maximum number of graph-connected components")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--tau-min", o.tau_min, "Lower threshold bound")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--tau-max", o.tau_max, "Upper threshold bound")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--tau", o.tau, "Fixed threshold (skips the search)");
  c->add_option("--clustering", o.clustering, "avg, single, complete or epsilon")->check(kClusteringCheck)->capture_default_str();
  c->add_flag("--annotate", o.annotate, "Embed action averaging annotations");
  c->add_option("--out", o.out, "Output roadmap path")->required();
}

void run_build(const BuildOptions& o, const Context& ctx) {
  const auto latent = lsr::read_latent(o.latent);
  const auto metric = lsr::parse_metric(o.metric);
  const auto clustering = lsr::parse_clustering(o.clustering);
  lsr::Roadmap roadmap;
  double psi_value = 0.0;
  if (o.tau >= 0) {
    roadmap = lsr::build_lsr(latent.tuples, metric, o.tau, clustering);
    psi_value = lsr::psi(roadmap, o.cmax);
  } else {
    auto search = lsr::optimize_tau(latent.tuples, metric, clustering, o.tau_min, o.tau_max, o.cmax);
    roadmap = std::move(search.roadmap);
    psi_value = search.psi;
  }
  roadmap.task = latent.task;
  lsr::AabAnnotations aab;
  if (o.annotate) aab = lsr::aab_annotate(roadmap);
  lsr::write_roadmap(o.out, roadmap, o.annotate ? &aab : nullptr);
  Manifest m("build", ctx.argc, ctx.argv);
  m.input(o.latent);
  m.output(o.out);
  m.extra()["tau"] = roadmap.tau;
  m.extra()["psi"] = psi_value;
  m.extra()["regions"] = roadmap.region_count();
  m.extra()["edges"] = roadmap.edge_count();
  m.extra()["components"] = roadmap.components;
  m.write(manifest_path(o.out));
  std::cout << "roadmap tau=" << roadmap.tau << " regions=" << roadmap.region_count()
            << " edges=" << roadmap.edge_count() << " components=" << roadmap.components << '\n';
}

// ---------------------------------------------------------------- plan
struct PlanOptions {
  fs::path roadmap;
  fs::path model;
  fs::path apn;
  int start = 0;
  int goal = 0;
  int max_fallback = lsr::kDefaultMaxFallback;
  std::uint64_t seed = 1;
  fs::path out;
};

void add_plan(CLI::App& app, PlanOptions& o) {
  auto* c = app.add_subcommand("plan", "Plan between two rendered task states");
  c->add_option("--roadmap", o.roadmap, "Roadmap from 'build'")->required()->check(CLI::ExistingFile);
  c->add_option("--model", o.model, "Model from 'train'")->required()->check(CLI::ExistingFile);
  c->add_option("--apn", o.apn, "APN model; without it the roadmap's annotations are used")->check(CLI::ExistingFile);
  c->add_option("--start-state", o.start, "Start state id")->required();
  c->add_option("--goal-state", o.goal, "Goal state id")->required();
  c->add_option("--max-fallback", o.max_fallback, "Largest rank sum of substitute nodes")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--seed", o.seed, "Render seed")->capture_default_str();
  c->add_option("--out", o.out, "Output plan (JSON)")->required();
}

void run_plan(const PlanOptions& o, const Context& ctx) {
  lsr::AabAnnotations aab;
  const auto roadmap = lsr::read_roadmap(o.roadmap, &aab);
  const auto model = lsr::read_model(o.model);
  const auto task = model_task(model, o.model);
  const auto start = lsr::render(task, state_by_id(task, o.start), lsr::derive_seed(o.seed, 1));
  const auto goal = lsr::render(task, state_by_id(task, o.goal), lsr::derive_seed(o.seed, 2));
  const lsr::ModelMapping mapping(model);
  auto plans = lsr::plan(roadmap, mapping, start.features, goal.features, o.max_fallback);
  std::optional<lsr::ApnModel> apn;
  if (!o.apn.empty()) apn = lsr::read_apn(o.apn);
  if (!apn && aab.empty()) aab = lsr::aab_annotate(roadmap);

  json doc;
  doc["start_state"] = o.start;
  doc["goal_state"] = o.goal;
  doc["action_source"] = apn ? "apn" : "aab";
  doc["plans"] = json::array();
  for (auto& p : plans) {
    if (apn)
      lsr::fill_action_plan(p, *apn);
    else
      lsr::fill_action_plan(p, aab);
    json entry;
    entry["nodes"] = p.nodes;
    json states = json::array();
    for (const auto& x : p.decoded_plan) states.push_back(lsr::state_index(task, lsr::decode_state(task, x)));
    entry["decoded_states"] = states;
    json actions = json::array();
    for (const auto& a : p.action_plan) actions.push_back(action_json(a));
    entry["actions"] = actions;
    entry["fallback_depth"] = p.fallback_depth;
    entry["truncated"] = p.truncated;
    doc["plans"].push_back(entry);
  }
  write_json(o.out, doc);
  Manifest m("plan", ctx.argc, ctx.argv);
  m.seed("render", o.seed);
  m.input(o.roadmap);
  m.input(o.model);
  if (!o.apn.empty()) m.input(o.apn);
  m.output(o.out);
  m.write(manifest_path(o.out));
  std::cout << plans.size() << " shortest plan(s) of " << plans.front().nodes.size() << " nodes\n";
}

// ---------------------------------------------------------------- apm
struct ApmOptions {
  fs::path dataset;
  fs::path model;
  fs::path roadmap;
  int samples = 1;
  int epochs = 500;
  int test_pairs = 1600;
  std::uint64_t seed = 1;
  fs::path out;
};

void add_apm(CLI::App& app, ApmOptions& o, CLI::App*& train_cmd, CLI::App*& annotate_cmd) {
  auto* c = app.add_subcommand("apm", "Action proposal: train an APN or annotate roadmap edges");
  c->require_subcommand(1);
  train_cmd = c->add_subcommand("train", "Train the action proposal network");
  train_cmd->add_option("--dataset", o.dataset, "Dataset from 'gen'")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--model", o.model, "Model from 'train'")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--samples", o.samples, "Posterior samples per action pair")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--test-pairs", o.test_pairs, "Size of the generated held-out action set")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", o.out, "Output APN path")->required();
  annotate_cmd = c->add_subcommand("annotate", "Attach action averaging annotations to a roadmap");
  annotate_cmd->add_option("--roadmap", o.roadmap, "Roadmap from 'build'")->required()->check(CLI::ExistingFile);
  annotate_cmd->add_option("--model", o.model, "Model for the transition accuracy report")->check(CLI::ExistingFile);
  annotate_cmd->add_option("--out", o.out, "Output roadmap path")->required();
}

std::vector<lsr::LatentActionTuple> encoded_action_pairs(const lsr::EncoderModel& model,
                                                         const std::vector<lsr::DatasetTuple>& data) {
  return lsr::augment_apn_dataset(model, data, 0, 0);
}

void run_apm_train(const ApmOptions& o, const Context& ctx) {
  const auto data = lsr::read_dataset(o.dataset);
  const auto model = lsr::read_model(o.model);
  const int samples = model.stochastic() ? o.samples : 0;
  const auto tuples = lsr::augment_apn_dataset(model, data.tuples, samples, o.seed);
  lsr::ApnConfig cfg;
  cfg.epochs = o.epochs;
  const auto result = lsr::train_apn(tuples, data.task, cfg, o.seed);
  lsr::write_apn(o.out, result.model);
  Manifest m("apm train", ctx.argc, ctx.argv);
  m.seed("apn", o.seed);
  m.input(o.dataset);
  m.input(o.model);
  m.output(o.out);
  m.extra()["train_accuracy"] = result.train_accuracy;
  m.extra()["validation_accuracy"] = result.validation_accuracy;
  if (o.test_pairs > 0) {
    const auto test = lsr::generate_dataset(data.task, o.test_pairs, 1.0, lsr::derive_seed(o.seed, 103));
    const double acc = lsr::apn_accuracy(result.model, encoded_action_pairs(model, test));
    m.extra()["holdout_accuracy"] = acc;
    std::cout << "holdout accuracy " << 100.0 * acc << "%\n";
  }
  m.write(manifest_path(o.out));
  std::cout << "validation accuracy " << 100.0 * result.validation_accuracy << "%\n";
}

void run_apm_annotate(const ApmOptions& o, const Context& ctx) {
  const auto roadmap = lsr::read_roadmap(o.roadmap);
  const auto aab = lsr::aab_annotate(roadmap);
  lsr::write_roadmap(o.out, roadmap, &aab);
  Manifest m("apm annotate", ctx.argc, ctx.argv);
  m.input(o.roadmap);
  m.output(o.out);
  if (!o.model.empty()) {
    const auto model = lsr::read_model(o.model);
    const lsr::ModelMapping mapping(model);
    const double acc = lsr::aab_transition_accuracy(model_task(model, o.model), roadmap, aab, mapping);
    m.input(o.model);
    m.extra()["transition_accuracy"] = acc;
    std::cout << "transition accuracy " << 100.0 * acc << "%\n";
  }
  m.write(manifest_path(o.out));
  std::cout << "annotated " << aab.size() << " edges\n";
}

// ---------------------------------------------------------------- score
struct ScoreOptions {
  fs::path roadmap;
  fs::path model;
  int queries = 1000;
  int holdout = 2500;
  int max_fallback = lsr::kDefaultMaxFallback;
  bool coverage = false;
  std::uint64_t seed = 1;
  fs::path out;
};

void add_score(CLI::App& app, ScoreOptions& o) {
  auto* c = app.add_subcommand("score", "Score planning (and optionally coverage) on held-out renders");
  c->add_option("--roadmap", o.roadmap, "Roadmap from 'build'")->required()->check(CLI::ExistingFile);
  c->add_option("--model", o.model, "Model from 'train'")->required()->check(CLI::ExistingFile);
  c->add_option("--queries", o.queries, "Number of start/goal queries")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--holdout", o.holdout, "Number of held-out renders")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--max-fallback", o.max_fallback, "Largest rank sum of substitute nodes")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_flag("--coverage", o.coverage, "Also report coverage of held-out and out-of-distribution inputs");
  c->add_option("--seed", o.seed, "Seed of the held-out set and queries")->capture_default_str();
  c->add_option("--out", o.out, "Output report (JSON)")->required();
}

void run_score(const ScoreOptions& o, const Context& ctx) {
  const auto roadmap = lsr::read_roadmap(o.roadmap);
  const auto model = lsr::read_model(o.model);
  const auto task = model_task(model, o.model);
  const auto seeds = lsr::RunSeeds::from(o.seed);
  const auto holdout = lsr::render_holdout(task, o.holdout, seeds.holdout);
  const lsr::ModelMapping mapping(model);
  const auto report = lsr::score_planning(task, roadmap, mapping, holdout, o.queries, seeds.queries,
                                          o.max_fallback);
  json doc;
  doc["task"] = std::string(lsr::task_code(task));
  doc["planning"] = score_json(report);
  if (o.coverage) {
    std::vector<Eigen::VectorXd> in;
    for (const auto& h : holdout) in.push_back(h.features);
    const int dim = model.input_dim();
    std::vector<lsr::OodSource> ood;
    for (auto other : {lsr::TaskKind::NormalStacking, lsr::TaskKind::HardStacking, lsr::TaskKind::RopeBox}) {
      if (other == task) continue;
      lsr::OodSource src{std::string(lsr::task_code(other)), {}};
      for (const auto& h : lsr::render_holdout(other, o.holdout, seeds.holdout))
        src.observations.push_back(lsr::fit_dimension(h.features, dim));
      ood.push_back(std::move(src));
    }
    ood.push_back({"noise", lsr::uniform_noise(o.holdout, dim, seeds.holdout)});
    const auto cov = lsr::score_coverage(roadmap, mapping, in, ood);
    doc["coverage"]["in_distribution"] = cov.in_distribution;
    for (const auto& [name, rate] : cov.ood) doc["coverage"]["ood"][name] = rate;
  }
  write_json(o.out, doc);
  Manifest m("score", ctx.argc, ctx.argv);
  m.seed("evaluation", o.seed);
  m.input(o.roadmap);
  m.input(o.model);
  m.output(o.out);
  m.write(manifest_path(o.out));
  std::cout << "%All " << report.pct_all << "  %Any " << report.pct_any << "  %Trans "
            << report.pct_trans << "  unreachable " << report.unreachable << '\n';
}

// ---------------------------------------------------------------- ablate
struct AblateOptions {
  std::string kind;
  std::vector<std::string> values;
  std::string task = "ns";
  int pairs = 2500;
  int ld = 12;
  double gamma = 100.0;
  std::string metric = "l1";
  int cmax = 1;
  double tau_min = 0.0;
  double tau_max = 3.0;
  std::string clustering = "avg";
  int epochs = 200;
  int queries = 1000;
  int holdout = 2500;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  fs::path out_dir;
};

void add_ablate(CLI::App& app, AblateOptions& o) {
  auto* c = app.add_subcommand("ablate", "Run an ablation study over seeds and write CSV tables");
  c->add_option("--kind", o.kind, "cmax, dm, clustering, ld, size or mode")
      ->required()
      ->check(CLI::IsMember({"cmax", "dm", "clustering", "ld", "size", "mode"}));
  c->add_option("--values", o.values, "Settings, e.g. 1 5 20 100 or dynamic static:100")->required();
  c->add_option("--task", o.task, "Task")->check(kTaskCheck)->capture_default_str();
  c->add_option("--pairs", o.pairs, "Training pairs")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--ld", o.ld, "Latent dimension")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--gamma", o.gamma, "Action-term weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--metric", o.metric, "Metric")->check(kMetricCheck)->capture_default_str();
  c->add_option("--cmax", o.cmax, "Component bound")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--tau-min", o.tau_min, "Lower threshold bound")->capture_default_str();
  c->add_option("--tau-max", o.tau_max, "Upper threshold bound")->capture_default_str();
  c->add_option("--clustering", o.clustering, "Clustering")->check(kClusteringCheck)->capture_default_str();
  c->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--queries", o.queries, "Queries per run")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--holdout", o.holdout, "Held-out renders per run")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--seeds", o.seeds, "Seeds")->capture_default_str();
  c->add_option("--out-dir", o.out_dir, "Directory for rows.csv, summary.csv and the manifest")->required();
}

void run_ablate(const AblateOptions& o, const Context& ctx) {
  lsr::RunConfig cfg;
  cfg.task = lsr::parse_task(o.task);
  cfg.pairs = o.pairs;
  cfg.latent_dim = o.ld;
  cfg.loss.gamma = o.gamma;
  cfg.loss.metric = lsr::parse_metric(o.metric);
  cfg.loss.beta_ramp_epochs = o.epochs * 4 / 5;
  cfg.train.epochs = o.epochs;
  cfg.c_max = o.cmax;
  cfg.tau_min = o.tau_min;
  cfg.tau_max = o.tau_max;
  cfg.clustering = lsr::parse_clustering(o.clustering);
  cfg.queries = o.queries;
  cfg.holdout = o.holdout;
  cfg.seeds = o.seeds;
  const auto kind = lsr::parse_ablation(o.kind);
  const auto rows = lsr::run_ablation(cfg, kind, o.values);
  fs::create_directories(o.out_dir);
  const auto rows_path = o.out_dir / "rows.csv";
  const auto summary_path = o.out_dir / "summary.csv";
  lsr::write_rows_csv(rows_path, rows);
  lsr::write_summary_csv(summary_path, rows);
  Manifest m("ablate", ctx.argc, ctx.argv);
  for (auto s : o.seeds) m.seed("run_" + std::to_string(s), s);
  m.output(rows_path);
  m.output(summary_path);
  m.write(o.out_dir / "manifest.json");
  int failed = 0;
  for (const auto& r : rows) failed += !r.ok;
  std::cout << rows.size() << " runs, " << failed << " failed; summary in " << summary_path.string() << '\n';
}

/// Maps an alias program name (lsr-gen, ...) to its subcommand.
std::vector<std::string> normalized_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const std::string prog = fs::path(argv[0]).filename().string();
  static const std::map<std::string, std::string> aliases{
      {"lsr-gen", "gen"},     {"lsr-train", "train"}, {"lsr-encode", "encode"}, {"lsr-build", "build"},
      {"lsr-plan", "plan"},   {"lsr-apm", "apm"},     {"lsr-score", "score"},   {"lsr-ablate", "ablate"}};
  if (const auto it = aliases.find(prog); it != aliases.end()) args.insert(args.begin(), it->second);
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent space roadmap tools"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from a TOML/INI run file");
  app.require_subcommand(1);

  GenOptions gen;
  TrainOptions train;
  EncodeOptions encode;
  BuildOptions build;
  PlanOptions plan;
  ApmOptions apm;
  ScoreOptions score;
  AblateOptions ablate;
  CLI::App* apm_train = nullptr;
  CLI::App* apm_annotate = nullptr;
  add_gen(app, gen);
  add_train(app, train);
  add_encode(app, encode);
  add_build(app, build);
  add_plan(app, plan);
  add_apm(app, apm, apm_train, apm_annotate);
  add_score(app, score);
  add_ablate(app, ablate);

  auto args = normalized_args(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const Context ctx{argc, argv};
  try {
    if (app.got_subcommand("gen")) run_gen(gen, ctx);
    else if (app.got_subcommand("train")) run_train(train, ctx);
    else if (app.got_subcommand("encode")) run_encode(encode, ctx);
    else if (app.got_subcommand("build")) run_build(build, ctx);
    else if (app.got_subcommand("plan")) run_plan(plan, ctx);
    else if (apm_train->parsed()) run_apm_train(apm, ctx);
    else if (apm_annotate->parsed()) run_apm_annotate(apm, ctx);
    else if (app.got_subcommand("score")) run_score(score, ctx);
    else if (app.got_subcommand("ablate")) run_ablate(ablate, ctx);
  } catch (const lsr::UnreachableError& e) {
    std::cerr << "lsr: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lsr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
