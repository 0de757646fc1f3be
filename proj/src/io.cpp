#include "lsr/io.hpp"

#include "lsr/hash.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lsr {

namespace fs = std::filesystem;

namespace {

constexpr int kFeatureDigits = 9;
constexpr int kExactDigits = 17;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

/// Line-oriented reader that reports the file and line on failure.
class Reader {
 public:
  explicit Reader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw FormatError("cannot open " + path.string());
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.string() + ":" + std::to_string(line_no_) + ": " + what);
  }

  bool next(std::istringstream& line) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_no_;
      if (text.empty()) continue;
      line.clear();
      line.str(text);
      return true;
    }
    return false;
  }

  std::istringstream require() {
    std::istringstream line;
    if (!next(line)) fail("unexpected end of file");
    return line;
  }

  /// Next line must start with `key`; the rest of the line is returned.
  std::istringstream expect(const std::string& key) {
    auto line = require();
    std::string word;
    line >> word;
    if (word != key) fail("expected '" + key + "', found '" + word + "'");
    return line;
  }

  template <typename T>
  T read(std::istringstream& line, const char* what) {
    T v{};
    if (!(line >> v)) fail(std::string("bad or missing ") + what);
    return v;
  }

  template <typename T>
  T value(const std::string& key) {
    auto line = expect(key);
    return read<T>(line, key.c_str());
  }

  Eigen::VectorXd vector(std::istringstream& line, Eigen::Index n, const char* what) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = read<double>(line, what);
    return v;
  }

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ifstream in_;
  long line_no_ = 0;
};

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
}

/// Header entries are key=value words after the magic token.
std::map<std::string, std::string> header_fields(Reader& r, const std::string& magic) {
  auto line = r.expect(magic);
  std::map<std::string, std::string> out;
  std::string word;
  if (!(line >> word) || word != "v1") r.fail("unsupported format version");
  while (line >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) r.fail("malformed header entry '" + word + "'");
    out[word.substr(0, eq)] = word.substr(eq + 1);
  }
  return out;
}

std::string field(Reader& r, const std::map<std::string, std::string>& h, const std::string& key) {
  const auto it = h.find(key);
  if (it == h.end()) r.fail("header lacks '" + key + "'");
  return it->second;
}

template <typename F>
auto convert(Reader& r, const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    r.fail(what + ": " + e.what());
  }
}

void write_action_fields(std::ostream& out, const std::optional<Action>& u) {
  if (u)
    out << action_code(*u);
  else
    out << "- 0 0 0 0";
}

std::optional<Action> read_action_fields(Reader& r, std::istringstream& line) {
  const auto kind = r.read<std::string>(line, "action kind");
  const int pr = r.read<int>(line, "pick row"), pc = r.read<int>(line, "pick column");
  const int rr = r.read<int>(line, "release row"), rc = r.read<int>(line, "release column");
  if (kind == "-") return std::nullopt;
  return convert(r, "action", [&] { return parse_action(kind, pr, pc, rr, rc); });
}

int state_id_of(const Observation& o, TaskKind task) {
  return o.provenance ? state_index(task, *o.provenance) : -1;
}

std::optional<TaskState> state_from_id(Reader& r, TaskKind task, int id) {
  if (id < 0) return std::nullopt;
  const auto& states = enumerate_states(task);
  if (id >= static_cast<int>(states.size())) r.fail("state id " + std::to_string(id) + " out of range");
  return states[static_cast<std::size_t>(id)];
}

void write_perceptron(std::ostream& out, const std::string& key, const Perceptron& p) {
  out << key << ' ' << p.input_dim() << ' ' << p.hidden_dim() << ' ' << p.output_dim() << ' '
      << p.param_count();
  write_vector(out, p.params());
  out << '\n';
}

void read_perceptron(Reader& r, const std::string& key, Perceptron& p) {
  auto line = r.expect(key);
  const int in = r.read<int>(line, "input size"), hidden = r.read<int>(line, "hidden size");
  const int out = r.read<int>(line, "output size");
  const auto count = r.read<Eigen::Index>(line, "parameter count");
  if (in != p.input_dim() || hidden != p.hidden_dim() || out != p.output_dim() ||
      count != p.param_count())
    r.fail(key + " shape does not match the declared dimensions");
  p.params() = r.vector(line, count, "weight");
  if (!p.params().allFinite()) r.fail(key + " has non-finite weights");
}

}  // namespace

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.add_bytes(buf, static_cast<std::size_t>(in.gcount()));
  }
  return hex64(h.value());
}

std::string action_code(const Action& a) {
  const char* kind = a.kind == ActionKind::PickPlace ? "pp" : a.kind == ActionKind::BoxPush ? "push" : "rope";
  std::ostringstream os;
  os << kind << ' ' << int{a.pick.row} << ' ' << int{a.pick.col} << ' ' << int{a.release.row} << ' '
     << int{a.release.col};
  return os.str();
}

Action parse_action(const std::string& kind, int pr, int pc, int rr, int rc) {
  Action a;
  if (kind == "pp")
    a.kind = ActionKind::PickPlace;
  else if (kind == "push")
    a.kind = ActionKind::BoxPush;
  else if (kind == "rope")
    a.kind = ActionKind::RopeMove;
  else
    throw std::invalid_argument("unknown action kind '" + kind + "'");
  for (int v : {pr, pc, rr, rc})
    if (v < 0 || v >= kGridSize) throw std::invalid_argument("action cell out of range");
  a.pick = {static_cast<decltype(a.pick.row)>(pr), static_cast<decltype(a.pick.col)>(pc)};
  a.release = {static_cast<decltype(a.release.row)>(rr), static_cast<decltype(a.release.col)>(rc)};
  return a;
}

void write_dataset(const fs::path& path, const DatasetFile& data) {
  auto out = open_out(path);
  const int dim = observation_dim(data.task);
  out << "#lsr-dataset v1 task=" << task_code(data.task) << " dim=" << dim
      << " jitter=" << data.noise.position_jitter << " lighting=" << data.noise.lighting_range
      << " rope_jitter=" << data.noise.rope_jitter << " seed=" << data.seed
      << " states=" << enumerate_states(data.task).size() << " pairs=" << data.tuples.size() << '\n';
  out << std::setprecision(kFeatureDigits);
  for (const auto& t : data.tuples) {
    out << (t.action ? 1 : 0) << ' ' << state_id_of(t.obs1, data.task) << ' '
        << state_id_of(t.obs2, data.task) << ' ';
    write_action_fields(out, t.u);
    write_vector(out, t.obs1.features);
    write_vector(out, t.obs2.features);
    out << '\n';
  }
  finish(out, path);
}

DatasetFile read_dataset(const fs::path& path) {
  Reader r(path);
  const auto h = header_fields(r, "#lsr-dataset");
  DatasetFile data;
  data.task = convert(r, "task", [&] { return parse_task(field(r, h, "task")); });
  const int dim = convert(r, "dim", [&] { return std::stoi(field(r, h, "dim")); });
  if (dim != observation_dim(data.task)) r.fail("dimension does not match the task");
  data.noise.position_jitter = convert(r, "jitter", [&] { return std::stod(field(r, h, "jitter")); });
  data.noise.lighting_range = convert(r, "lighting", [&] { return std::stod(field(r, h, "lighting")); });
  data.noise.rope_jitter = convert(r, "rope_jitter", [&] { return std::stod(field(r, h, "rope_jitter")); });
  data.seed = convert(r, "seed", [&] { return std::stoull(field(r, h, "seed")); });
  const auto pairs = convert(r, "pairs", [&] { return std::stoul(field(r, h, "pairs")); });
  std::istringstream line;
  while (r.next(line)) {
    DatasetTuple t;
    t.action = r.read<int>(line, "action flag") != 0;
    const int s1 = r.read<int>(line, "state id"), s2 = r.read<int>(line, "state id");
    t.u = read_action_fields(r, line);
    t.obs1 = {r.vector(line, dim, "feature"), state_from_id(r, data.task, s1)};
    t.obs2 = {r.vector(line, dim, "feature"), state_from_id(r, data.task, s2)};
    std::string extra;
    if (line >> extra) r.fail("trailing data on record");
    if (t.action && !t.u) r.fail("action pair without action");
    data.tuples.push_back(std::move(t));
  }
  if (data.tuples.size() != pairs) r.fail("header announces " + std::to_string(pairs) + " pairs, found " +
                                          std::to_string(data.tuples.size()));
  return data;
}

LatentDataset encode_dataset(const EncoderModel& model, const DatasetFile& data) {
  if (model.input_dim() != observation_dim(data.task))
    throw std::invalid_argument("model input size does not match the dataset task");
  LatentDataset out;
  out.task = data.task;
  out.tuples.reserve(data.tuples.size());
  for (const auto& t : data.tuples) {
    LatentTuple lt;
    lt.z1 = model.encode(t.obs1.features).z;
    lt.z2 = model.encode(t.obs2.features).z;
    lt.action = t.action;
    lt.u = t.u;
    lt.state1 = state_id_of(t.obs1, data.task);
    lt.state2 = state_id_of(t.obs2, data.task);
    out.tuples.push_back(std::move(lt));
  }
  return out;
}

void write_latent(const fs::path& path, const LatentDataset& data) {
  auto out = open_out(path);
  const auto ld = data.tuples.empty() ? 0 : data.tuples.front().z1.size();
  out << "#lsr-latent v1 task=" << task_code(data.task) << " dim=" << ld
      << " model=" << (data.model_hash.empty() ? "-" : data.model_hash)
      << " pairs=" << data.tuples.size() << '\n';
  out << std::setprecision(kExactDigits);
  for (const auto& t : data.tuples) {
    out << (t.action ? 1 : 0) << ' ' << t.state1 << ' ' << t.state2 << ' ';
    write_action_fields(out, t.u);
    write_vector(out, t.z1);
    write_vector(out, t.z2);
    out << '\n';
  }
  finish(out, path);
}

LatentDataset read_latent(const fs::path& path) {
  Reader r(path);
  const auto h = header_fields(r, "#lsr-latent");
  LatentDataset data;
  data.task = convert(r, "task", [&] { return parse_task(field(r, h, "task")); });
  const int dim = convert(r, "dim", [&] { return std::stoi(field(r, h, "dim")); });
  data.model_hash = field(r, h, "model");
  if (data.model_hash == "-") data.model_hash.clear();
  const auto pairs = convert(r, "pairs", [&] { return std::stoul(field(r, h, "pairs")); });
  std::istringstream line;
  while (r.next(line)) {
    LatentTuple t;
    t.action = r.read<int>(line, "action flag") != 0;
    t.state1 = r.read<int>(line, "state id");
    t.state2 = r.read<int>(line, "state id");
    t.u = read_action_fields(r, line);
    t.z1 = r.vector(line, dim, "latent value");
    t.z2 = r.vector(line, dim, "latent value");
    data.tuples.push_back(std::move(t));
  }
  if (data.tuples.size() != pairs) r.fail("pair count does not match the header");
  return data;
}

void write_model(const fs::path& path, const EncoderModel& model) {
  auto out = open_out(path);
  const auto& l = model.loss;
  out << "lsr-model v1\n"
      << "mode " << mode_name(model.mode()) << '\n'
      << "task " << (model.task ? std::string(task_code(*model.task)) : "-") << '\n'
      << "dims " << model.input_dim() << ' ' << model.latent_dim() << ' ' << model.hidden_dim() << '\n'
      << "seed " << model.seed << '\n'
      << std::setprecision(kExactDigits)
      << "loss " << l.beta_end << ' ' << l.beta_ramp_epochs << ' ' << l.gamma << ' '
      << metric_name(l.metric) << ' ' << l.delta_dm << ' ' << l.k_epochs << ' '
      << (l.dynamic_dm ? 1 : 0) << ' ' << l.recon_weight << '\n'
      << "final_dm " << l.dm << '\n';
  write_perceptron(out, "encoder", model.encoder());
  write_perceptron(out, "decoder", model.decoder());
  finish(out, path);
}

EncoderModel read_model(const fs::path& path) {
  Reader r(path);
  if (r.value<std::string>("lsr-model") != "v1") r.fail("unsupported model version");
  const auto mode = convert(r, "mode", [&] { return parse_mode(r.value<std::string>("mode")); });
  const auto task = r.value<std::string>("task");
  auto dims = r.expect("dims");
  const int in = r.read<int>(dims, "input size"), ld = r.read<int>(dims, "latent size");
  const int hidden = r.read<int>(dims, "hidden size");
  EncoderModel model = convert(r, "dims", [&] { return EncoderModel(mode, in, ld, hidden); });
  if (task != "-") model.task = convert(r, "task", [&] { return parse_task(task); });
  model.seed = r.value<std::uint64_t>("seed");
  auto loss = r.expect("loss");
  auto& l = model.loss;
  l.beta_end = r.read<double>(loss, "beta");
  l.beta_ramp_epochs = r.read<int>(loss, "beta ramp");
  l.gamma = r.read<double>(loss, "gamma");
  l.metric = convert(r, "metric", [&] { return parse_metric(r.read<std::string>(loss, "metric")); });
  l.delta_dm = r.read<double>(loss, "delta dm");
  l.k_epochs = r.read<int>(loss, "k");
  l.dynamic_dm = r.read<int>(loss, "dynamic flag") != 0;
  l.recon_weight = r.read<double>(loss, "reconstruction weight");
  l.dm = r.value<double>("final_dm");
  read_perceptron(r, "encoder", model.encoder());
  read_perceptron(r, "decoder", model.decoder());
  return model;
}

void write_apn(const fs::path& path, const ApnModel& apn) {
  auto out = open_out(path);
  out << "lsr-apn v1\n"
      << "task " << task_code(apn.task()) << '\n'
      << "dims " << apn.pair_dim() << ' ' << apn.net().hidden_dim() << '\n'
      << std::setprecision(kExactDigits) << "dropout " << apn.dropout() << '\n';
  write_perceptron(out, "network", apn.net());
  finish(out, path);
}

ApnModel read_apn(const fs::path& path) {
  Reader r(path);
  if (r.value<std::string>("lsr-apn") != "v1") r.fail("unsupported APN version");
  const auto task = convert(r, "task", [&] { return parse_task(r.value<std::string>("task")); });
  auto dims = r.expect("dims");
  const int pair_dim = r.read<int>(dims, "pair size"), hidden = r.read<int>(dims, "hidden size");
  const double dropout = r.value<double>("dropout");
  ApnModel apn = convert(r, "dims", [&] { return ApnModel(task, pair_dim, hidden, dropout); });
  read_perceptron(r, "network", apn.net());
  return apn;
}

void write_roadmap(const fs::path& path, const Roadmap& rm, const AabAnnotations* aab) {
  auto out = open_out(path);
  out << "lsr-roadmap v1\n"
      << "metric " << metric_name(rm.metric) << '\n'
      << "clustering " << clustering_name(rm.clustering) << '\n'
      << "task " << (rm.task ? std::string(task_code(*rm.task)) : "-") << '\n'
      << "source " << hex64(rm.source_hash) << '\n'
      << std::setprecision(kExactDigits) << "tau " << rm.tau << '\n'
      << "points " << rm.points.rows() << ' ' << rm.points.cols() << '\n';
  for (Eigen::Index c = 0; c < rm.points.cols(); ++c) {
    out << 'p';
    write_vector(out, rm.points.col(c));
    out << '\n';
  }
  out << "regions " << rm.regions.size() << '\n';
  for (const auto& reg : rm.regions) {
    out << "region " << reg.epsilon << ' ' << reg.mu << ' ' << reg.sigma << ' ' << reg.representative
        << ' ' << reg.members.size();
    for (int m : reg.members) out << ' ' << m;
    out << '\n';
  }
  out << "edges " << rm.edges.size() << '\n';
  for (const auto& [key, acts] : rm.edges) {
    out << "edge " << key.first << ' ' << key.second << ' ' << acts.size();
    for (const auto& a : acts) out << ' ' << action_code(a);
    out << '\n';
  }
  out << "components " << rm.components << '\n';
  if (aab) {
    out << "aab " << aab->size() << '\n';
    for (const auto& [key, a] : *aab) out << "annotation " << key.first << ' ' << key.second << ' ' << action_code(a) << '\n';
  }
  finish(out, path);
}

Roadmap read_roadmap(const fs::path& path, AabAnnotations* aab) {
  Reader r(path);
  if (r.value<std::string>("lsr-roadmap") != "v1") r.fail("unsupported roadmap version");
  Roadmap rm;
  rm.metric = convert(r, "metric", [&] { return parse_metric(r.value<std::string>("metric")); });
  rm.clustering = convert(r, "clustering", [&] { return parse_clustering(r.value<std::string>("clustering")); });
  const auto task = r.value<std::string>("task");
  if (task != "-") rm.task = convert(r, "task", [&] { return parse_task(task); });
  const auto source = r.value<std::string>("source");
  rm.source_hash = convert(r, "source hash", [&] { return std::stoull(source, nullptr, 16); });
  rm.tau = r.value<double>("tau");
  auto dims = r.expect("points");
  const auto ld = r.read<Eigen::Index>(dims, "latent size"), n = r.read<Eigen::Index>(dims, "point count");
  if (ld < 1 || n < 0) r.fail("invalid point block size");
  rm.points.resize(ld, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    auto line = r.expect("p");
    rm.points.col(c) = r.vector(line, ld, "coordinate");
  }
  const auto n_regions = r.value<std::size_t>("regions");
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < n_regions; ++i) {
    auto line = r.expect("region");
    CoveredRegion reg;
    reg.epsilon = r.read<double>(line, "epsilon");
    reg.mu = r.read<double>(line, "mu");
    reg.sigma = r.read<double>(line, "sigma");
    reg.representative = r.read<int>(line, "representative");
    const auto m = r.read<std::size_t>(line, "member count");
    if (m == 0) r.fail("region without members");
    reg.centroid = Eigen::VectorXd::Zero(ld);
    for (std::size_t k = 0; k < m; ++k) {
      const int v = r.read<int>(line, "member");
      if (v < 0 || v >= n || owner[static_cast<std::size_t>(v)] >= 0) r.fail("invalid region member");
      owner[static_cast<std::size_t>(v)] = static_cast<int>(i);
      reg.members.push_back(v);
      reg.centroid += rm.points.col(v);
    }
    reg.centroid /= static_cast<double>(m);
    if (std::find(reg.members.begin(), reg.members.end(), reg.representative) == reg.members.end())
      r.fail("representative is not a region member");
    rm.regions.push_back(std::move(reg));
  }
  const auto n_edges = r.value<std::size_t>("edges");
  for (std::size_t e = 0; e < n_edges; ++e) {
    auto line = r.expect("edge");
    const int i = r.read<int>(line, "edge source"), j = r.read<int>(line, "edge target");
    if (i < 0 || j < 0 || i >= static_cast<int>(n_regions) || j >= static_cast<int>(n_regions) || i == j)
      r.fail("edge endpoint out of range");
    const auto k = r.read<std::size_t>(line, "action count");
    auto& acts = rm.edges[{i, j}];
    for (std::size_t a = 0; a < k; ++a) acts.push_back(*read_action_fields(r, line));
  }
  rm.components = r.value<int>("components");
  if (rm.components != count_components(rm.region_count(), rm.edges))
    r.fail("component count does not match the edges");
  std::istringstream line;
  if (r.next(line)) {
    std::string word;
    line >> word;
    if (word != "aab") r.fail("unexpected section '" + word + "'");
    const auto count = r.read<std::size_t>(line, "annotation count");
    AabAnnotations annotations;
    for (std::size_t k = 0; k < count; ++k) {
      auto a = r.expect("annotation");
      const int i = r.read<int>(a, "edge source"), j = r.read<int>(a, "edge target");
      if (!rm.edges.count({i, j})) r.fail("annotation for a missing edge");
      annotations[{i, j}] = *read_action_fields(r, a);
    }
    if (aab) *aab = std::move(annotations);
  }
  return rm;
}

}  // namespace lsr
