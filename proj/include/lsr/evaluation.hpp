#pragma once

#include "lsr/metric.hpp"
#include "lsr/planner.hpp"
#include "lsr/roadmap.hpp"
#include "lsr/task_sim.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lsr {

struct ScoreReport {
  double pct_all = 0.0;
  double pct_any = 0.0;
  double pct_trans = 0.0;
  int n_queries = 0;
  int unreachable = 0;
  int truncated = 0;    // queries whose shortest-path list hit the cap
  long transitions = 0; // transitions scored, unreachable queries count one each
};

/// Decoded consecutive states form a correct transition when they differ and
/// one task action connects them.
bool transition_correct(TaskKind task, const TaskState& s1, const TaskState& s2);

/// Planning scores over `n_queries` random (start, goal) pairs drawn from
/// `holdout`, which must carry state provenance. A path is correct when every
/// decoded transition is correct and its last decoded state is the goal
/// state. Unreachable queries count as incorrect everywhere and as one failed
/// transition.
ScoreReport score_planning(TaskKind task, const Roadmap& roadmap, const LatentMapping& mapping,
                           const std::vector<Observation>& holdout, int n_queries,
                           std::uint64_t seed, int max_fallback = kDefaultMaxFallback);

/// Zero-pads or truncates `x` to `dim` entries.
Eigen::VectorXd fit_dimension(const Eigen::VectorXd& x, int dim);

struct OodSource {
  std::string name;
  std::vector<Eigen::VectorXd> observations;  // already at the model's input size
};

struct CoverageReport {
  double in_distribution = 0.0;  // percent
  std::vector<std::pair<std::string, double>> ood;
};

double coverage_rate(const Roadmap& roadmap, const LatentMapping& mapping,
                     const std::vector<Eigen::VectorXd>& observations);
CoverageReport score_coverage(const Roadmap& roadmap, const LatentMapping& mapping,
                              const std::vector<Eigen::VectorXd>& in_distribution,
                              const std::vector<OodSource>& ood_sources);

/// Uniform [0, 1) vectors of dimension `dim`.
std::vector<Eigen::VectorXd> uniform_noise(int n, int dim, std::uint64_t seed);

struct ContrastEntry {
  double rc = 0.0;
  double avg_dmin = 0.0;
  double avg_dmax = 0.0;
  bool degenerate = false;  // avg_dmin == 0
};

/// Points (columns) are split into a first and second half; every point is
/// compared with the rest of its half. rc = (avg Dmax - avg Dmin) / avg Dmin.
ContrastEntry relative_contrast(const Eigen::MatrixXd& points, Metric metric);

struct StateSeparation {
  int state = 0;
  int samples = 0;
  double max_intra = 0.0;  // largest distance of a sample to its centroid
  double min_inter = 0.0;  // closest other centroid
  double margin = 0.0;     // min_inter - max_intra
  bool single_sample = false;
};

struct SeparationReport {
  std::vector<StateSeparation> states;  // sorted by state id
  int non_negative = 0;
  double mean_margin = 0.0;
};

SeparationReport separation_stats(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                  Metric metric);

/// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

}  // namespace lsr
