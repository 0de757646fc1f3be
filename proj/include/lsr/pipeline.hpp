#pragma once

#include "lsr/action_proposal.hpp"
#include "lsr/evaluation.hpp"
#include "lsr/io.hpp"
#include "lsr/mapping.hpp"
#include "lsr/roadmap.hpp"
#include "lsr/task_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsr {

/// Everything one end-to-end run needs besides the seed.
struct RunConfig {
  TaskKind task = TaskKind::NormalStacking;
  int pairs = 2500;
  double action_fraction = 0.65;
  int latent_dim = 12;
  EncoderMode mode = EncoderMode::Stochastic;
  LossConfig loss;
  TrainConfig train;
  int c_max = 1;
  double tau_min = 0.0;
  double tau_max = 3.0;
  ClusteringKind clustering = ClusteringKind::Average;
  int holdout = 2500;
  int queries = 1000;
  int max_fallback = kDefaultMaxFallback;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  void validate() const;
};

/// Seeds of the independent random streams of one run.
struct RunSeeds {
  std::uint64_t data;
  std::uint64_t model;
  std::uint64_t holdout;
  std::uint64_t queries;
  static RunSeeds from(std::uint64_t seed);
};

struct TrainedMapping {
  DatasetFile data;
  TrainResult result;
  LatentDataset latent;
};

TrainedMapping train_mapping(const RunConfig& cfg, std::uint64_t seed);

struct RunOutcome {
  std::uint64_t seed = 0;
  TauSearch search;
  ScoreReport score;
};

/// Builds the roadmap with the optimized threshold and scores planning.
RunOutcome build_and_score(const RunConfig& cfg, const TrainedMapping& mapping, std::uint64_t seed);
RunOutcome run_pipeline(const RunConfig& cfg, std::uint64_t seed);

enum class AblationKind { CmaxSweep, DmMode, Clustering, LatentDim, DatasetSize, EncoderMode };

std::string_view ablation_name(AblationKind k);  // "cmax", "dm", "clustering", "ld", "size", "mode"
AblationKind parse_ablation(std::string_view name);

/// One (configuration, seed) row. A failed configuration keeps its error and
/// zero scores.
struct AblationRow {
  std::string setting;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ScoreReport score;
  double tau = 0.0;
  int regions = 0;
  int edges = 0;
  int components = 0;
  double final_dm = 0.0;
};

/// Applies one ablation setting ("20", "static:100", "dynamic", "single",
/// "ae", ...) to a configuration.
RunConfig apply_setting(RunConfig cfg, AblationKind kind, const std::string& setting);

std::vector<AblationRow> run_ablation(const RunConfig& base, AblationKind kind,
                                      const std::vector<std::string>& settings);

void write_rows_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);
/// One line per setting with mean and std over seeds.
void write_summary_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace lsr
