#pragma once

#include "lsr/action_proposal.hpp"
#include "lsr/mapping.hpp"
#include "lsr/roadmap.hpp"
#include "lsr/task_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsr {

/// Malformed or unreadable artifact; the message names the file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FNV-1a hash of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

struct DatasetFile {
  TaskKind task = TaskKind::NormalStacking;
  NoiseModel noise;
  std::uint64_t seed = 0;
  std::vector<DatasetTuple> tuples;
};

void write_dataset(const std::filesystem::path& path, const DatasetFile& data);
DatasetFile read_dataset(const std::filesystem::path& path);

struct LatentDataset {
  TaskKind task = TaskKind::NormalStacking;
  std::string model_hash;  // hash of the model file that produced it, may be empty
  std::vector<LatentTuple> tuples;
};

/// Posterior-mean encodings of a dataset, with provenance state ids.
LatentDataset encode_dataset(const EncoderModel& model, const DatasetFile& data);

void write_latent(const std::filesystem::path& path, const LatentDataset& data);
LatentDataset read_latent(const std::filesystem::path& path);

void write_model(const std::filesystem::path& path, const EncoderModel& model);
EncoderModel read_model(const std::filesystem::path& path);

void write_apn(const std::filesystem::path& path, const ApnModel& apn);
ApnModel read_apn(const std::filesystem::path& path);

/// The optional annotation section is written when `aab` is non-null.
void write_roadmap(const std::filesystem::path& path, const Roadmap& roadmap,
                   const AabAnnotations* aab = nullptr);
Roadmap read_roadmap(const std::filesystem::path& path, AabAnnotations* aab = nullptr);

std::string action_code(const Action& a);  // e.g. "pp 0 1 2 1"
Action parse_action(const std::string& kind, int pr, int pc, int rr, int rc);

}  // namespace lsr
