#include "lsr/pipeline.hpp"

#include "lsr/random.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <stdexcept>

namespace lsr {

void RunConfig::validate() const {
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  if (action_fraction < 0 || action_fraction > 1)
    throw std::invalid_argument("action fraction must be in [0, 1]");
  if (latent_dim < 1) throw std::invalid_argument("latent dimension must be >= 1");
  if (c_max < 1) throw std::invalid_argument("c_max must be >= 1");
  if (!(tau_min < tau_max) || tau_min < 0) throw std::invalid_argument("need 0 <= tau_min < tau_max");
  if (holdout < 1 || queries < 1) throw std::invalid_argument("holdout and query counts must be >= 1");
  if (max_fallback < 0) throw std::invalid_argument("max_fallback must be >= 0");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  loss.validate();
}

RunSeeds RunSeeds::from(std::uint64_t seed) {
  return {seed, seed, derive_seed(seed, 101), derive_seed(seed, 102)};
}

TrainedMapping train_mapping(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto seeds = RunSeeds::from(seed);
  TrainedMapping out;
  out.data.task = cfg.task;
  out.data.noise = NoiseModel::defaults(cfg.task);
  out.data.seed = seeds.data;
  out.data.tuples = generate_dataset(cfg.task, cfg.pairs, cfg.action_fraction, seeds.data);
  auto model = EncoderModel::create(cfg.mode, observation_dim(cfg.task), cfg.latent_dim, seeds.model);
  model.task = cfg.task;
  out.result = train(std::move(model), out.data.tuples, cfg.loss, cfg.train, seeds.model);
  out.latent = encode_dataset(out.result.model, out.data);
  return out;
}

RunOutcome build_and_score(const RunConfig& cfg, const TrainedMapping& mapping, std::uint64_t seed) {
  const auto seeds = RunSeeds::from(seed);
  RunOutcome out;
  out.seed = seed;
  out.search = optimize_tau(mapping.latent.tuples, cfg.loss.metric, cfg.clustering, cfg.tau_min,
                            cfg.tau_max, cfg.c_max);
  out.search.roadmap.task = cfg.task;
  const auto holdout = render_holdout(cfg.task, cfg.holdout, seeds.holdout);
  const ModelMapping mm(mapping.result.model);
  out.score = score_planning(cfg.task, out.search.roadmap, mm, holdout, cfg.queries, seeds.queries,
                             cfg.max_fallback);
  return out;
}

RunOutcome run_pipeline(const RunConfig& cfg, std::uint64_t seed) {
  return build_and_score(cfg, train_mapping(cfg, seed), seed);
}

std::string_view ablation_name(AblationKind k) {
  switch (k) {
    case AblationKind::CmaxSweep: return "cmax";
    case AblationKind::DmMode: return "dm";
    case AblationKind::Clustering: return "clustering";
    case AblationKind::LatentDim: return "ld";
    case AblationKind::DatasetSize: return "size";
    case AblationKind::EncoderMode: return "mode";
  }
  return "?";
}

AblationKind parse_ablation(std::string_view name) {
  for (auto k : {AblationKind::CmaxSweep, AblationKind::DmMode, AblationKind::Clustering,
                 AblationKind::LatentDim, AblationKind::DatasetSize, AblationKind::EncoderMode})
    if (ablation_name(k) == name) return k;
  throw std::invalid_argument("unknown ablation '" + std::string(name) +
                              "' (expected cmax, dm, clustering, ld, size or mode)");
}

RunConfig apply_setting(RunConfig cfg, AblationKind kind, const std::string& setting) {
  switch (kind) {
    case AblationKind::CmaxSweep:
      cfg.c_max = std::stoi(setting);
      break;
    case AblationKind::DmMode:
      if (setting == "dynamic") {
        cfg.loss.dynamic_dm = true;
        cfg.loss.dm = 0.0;
      } else if (setting.rfind("static:", 0) == 0) {
        cfg.loss.dynamic_dm = false;
        cfg.loss.dm = std::stod(setting.substr(7));
      } else {
        throw std::invalid_argument("dm setting must be 'dynamic' or 'static:VALUE'");
      }
      break;
    case AblationKind::Clustering:
      cfg.clustering = parse_clustering(setting);
      break;
    case AblationKind::LatentDim:
      cfg.latent_dim = std::stoi(setting);
      break;
    case AblationKind::DatasetSize:
      cfg.pairs = std::stoi(setting);
      break;
    case AblationKind::EncoderMode:
      // "vae", "ae" (with action term) or "ae-b" (without).
      if (setting == "ae-b") {
        cfg.mode = EncoderMode::Deterministic;
        cfg.loss.gamma = 0.0;
      } else {
        cfg.mode = parse_mode(setting);
      }
      if (cfg.mode == EncoderMode::Deterministic) cfg.train.weight_decay = TrainConfig::defaults_for(cfg.mode).weight_decay;
      break;
  }
  cfg.validate();
  return cfg;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, AblationKind kind,
                                      const std::vector<std::string>& settings) {
  base.validate();
  // Sweeps over roadmap parameters share one trained mapping per seed.
  const bool shares_mapping = kind == AblationKind::CmaxSweep || kind == AblationKind::Clustering;
  std::map<std::uint64_t, TrainedMapping> shared;
  std::vector<AblationRow> rows;
  for (const auto& setting : settings) {
    for (auto seed : base.seeds) {
      AblationRow row;
      row.setting = setting;
      row.seed = seed;
      try {
        const RunConfig cfg = apply_setting(base, kind, setting);
        const TrainedMapping* mapping = nullptr;
        std::optional<TrainedMapping> own;
        if (shares_mapping) {
          auto it = shared.find(seed);
          if (it == shared.end()) it = shared.emplace(seed, train_mapping(cfg, seed)).first;
          mapping = &it->second;
        } else {
          own = train_mapping(cfg, seed);
          mapping = &*own;
        }
        row.final_dm = mapping->result.trace.final_dm;
        const auto outcome = build_and_score(cfg, *mapping, seed);
        row.ok = true;
        row.score = outcome.score;
        row.tau = outcome.search.tau;
        row.regions = outcome.search.roadmap.region_count();
        row.edges = outcome.search.roadmap.edge_count();
        row.components = outcome.search.roadmap.components;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_rows_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "setting,seed,status,pct_all,pct_any,pct_trans,unreachable,tau,regions,edges,components,final_dm,error\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows)
    out << csv_escape(r.setting) << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ','
        << r.score.pct_all << ',' << r.score.pct_any << ',' << r.score.pct_trans << ','
        << r.score.unreachable << ',' << r.tau << ',' << r.regions << ',' << r.edges << ','
        << r.components << ',' << r.final_dm << ',' << csv_escape(r.error) << '\n';
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "setting,runs,failed,pct_all_mean,pct_all_std,pct_any_mean,pct_any_std,pct_trans_mean,pct_trans_std\n";
  out << std::fixed << std::setprecision(4);
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AblationRow*>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.setting)) order.push_back(r.setting);
    groups[r.setting].push_back(&r);
  }
  for (const auto& setting : order) {
    std::vector<double> all, any, trans;
    int failed = 0;
    for (const auto* r : groups[setting]) {
      failed += !r->ok;
      all.push_back(r->score.pct_all);
      any.push_back(r->score.pct_any);
      trans.push_back(r->score.pct_trans);
    }
    const auto [am, as] = mean_std(all);
    const auto [ym, ys] = mean_std(any);
    const auto [tm, ts] = mean_std(trans);
    out << csv_escape(setting) << ',' << groups[setting].size() << ',' << failed << ',' << am << ','
        << as << ',' << ym << ',' << ys << ',' << tm << ',' << ts << '\n';
  }
}

}  // namespace lsr
