#include "fixtures.hpp"

#include "lsr/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lsr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lsr_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("dataset round trip") {
    DatasetFile data;
    data.task = TaskKind::RopeBox;
    data.noise = NoiseModel::defaults(TaskKind::RopeBox);
    data.seed = 42;
    data.tuples = generate_dataset(TaskKind::RopeBox, 60, 0.5, 42);
    const auto path = scratch("data.txt");
    write_dataset(path, data);
    const auto back = read_dataset(path);
    CHECK(back.task == TaskKind::RopeBox);
    CHECK(back.seed == 42);
    CHECK(back.noise.rope_jitter == data.noise.rope_jitter);
    REQUIRE(back.tuples.size() == 60);
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK(back.tuples[i].action == data.tuples[i].action);
      CHECK(back.tuples[i].u == data.tuples[i].u);
      CHECK(back.tuples[i].obs1.provenance == data.tuples[i].obs1.provenance);
      CHECK(back.tuples[i].obs2.provenance == data.tuples[i].obs2.provenance);
      CHECK(back.tuples[i].obs1.features.isApprox(data.tuples[i].obs1.features, 1e-8));
      CHECK((back.tuples[i].obs2.features - data.tuples[i].obs2.features).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("model round trip reproduces encodings exactly") {
    for (auto mode : {EncoderMode::Stochastic, EncoderMode::Deterministic}) {
      auto model = EncoderModel::create(mode, 37, 5, 9);
      model.task = TaskKind::RopeBox;
      model.loss.gamma = 12.5;
      model.loss.dm = 1.7;
      model.loss.metric = Metric::L2;
      const auto path = scratch("model.txt");
      write_model(path, model);
      const auto back = read_model(path);
      CHECK(back.mode() == mode);
      CHECK(back.task == TaskKind::RopeBox);
      CHECK(back.latent_dim() == 5);
      CHECK(back.loss.gamma == 12.5);
      CHECK(back.loss.dm == 1.7);
      CHECK(back.loss.metric == Metric::L2);
      CHECK(back.seed == 9);
      CHECK(back.flat_params() == model.flat_params());
    }
  }

  TEST_CASE("latent and APN round trips are exact") {
    const auto& t = fixture::trained_ns();
    auto latent = t.mapping.latent;
    latent.model_hash = "0123456789abcdef";
    latent.tuples.resize(100);
    const auto path = scratch("latent.txt");
    write_latent(path, latent);
    const auto back = read_latent(path);
    CHECK(back.model_hash == latent.model_hash);
    REQUIRE(back.tuples.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(back.tuples[i].z1 == latent.tuples[i].z1);
      CHECK(back.tuples[i].z2 == latent.tuples[i].z2);
      CHECK(back.tuples[i].u == latent.tuples[i].u);
      CHECK(back.tuples[i].state1 == latent.tuples[i].state1);
    }
    CHECK(content_hash(back.tuples) == content_hash(latent.tuples));

    ApnModel apn(TaskKind::HardStacking, 8, 16, 0.3);
    Rng rng(4);
    apn.net().init_uniform(rng);
    const auto apn_path = scratch("apn.txt");
    write_apn(apn_path, apn);
    const auto apn_back = read_apn(apn_path);
    CHECK(apn_back.task() == TaskKind::HardStacking);
    CHECK(apn_back.dropout() == 0.3);
    CHECK(apn_back.net().params() == apn.net().params());
  }

  TEST_CASE("roadmap round trip with annotations") {
    const auto& rm = fixture::trained_ns().outcome.search.roadmap;
    const auto aab = aab_annotate(rm);
    const auto path = scratch("roadmap.txt");
    write_roadmap(path, rm, &aab);
    AabAnnotations aab_back;
    const auto back = read_roadmap(path, &aab_back);
    CHECK(back.tau == rm.tau);
    CHECK(back.metric == rm.metric);
    CHECK(back.clustering == rm.clustering);
    CHECK(back.task == rm.task);
    CHECK(back.source_hash == rm.source_hash);
    CHECK(back.points == rm.points);
    CHECK(back.region_count() == rm.region_count());
    CHECK(back.edges == rm.edges);
    CHECK(back.components == rm.components);
    for (int r = 0; r < rm.region_count(); ++r) {
      const auto& a = rm.regions[static_cast<std::size_t>(r)];
      const auto& b = back.regions[static_cast<std::size_t>(r)];
      CHECK(a.members == b.members);
      CHECK(a.representative == b.representative);
      CHECK(a.epsilon == b.epsilon);
      CHECK(a.centroid.isApprox(b.centroid));
    }
    CHECK(aab_back == aab);
    AabAnnotations none;
    write_roadmap(path, rm);
    read_roadmap(path, &none);
    CHECK(none.empty());
  }

  TEST_CASE("corrupt roadmaps are rejected with the file name") {
    const auto rm = fixture::graph_roadmap(3, {{0, 1}, {1, 2}}, {Action{}, Action{}});
    const auto good = scratch("good_roadmap.txt");
    write_roadmap(good, rm);
    const std::string text = slurp(good);

    const auto truncated = scratch("truncated_roadmap.txt");
    spit(truncated, text.substr(0, text.size() / 2));
    CHECK(error_of([&] { read_roadmap(truncated); }).find(truncated.string()) != std::string::npos);

    const auto garbage = scratch("garbage_roadmap.txt");
    spit(garbage, "not a roadmap\n");
    CHECK(error_of([&] { read_roadmap(garbage); }).find(garbage.string()) != std::string::npos);

    auto bad_edge_text = text;
    const auto pos = bad_edge_text.find("edge 1 2");
    REQUIRE(pos != std::string::npos);
    bad_edge_text.replace(pos, 8, "edge 1 9");
    const auto bad_edge = scratch("bad_edge_roadmap.txt");
    spit(bad_edge, bad_edge_text);
    CHECK(error_of([&] { read_roadmap(bad_edge); }).find(bad_edge.string()) != std::string::npos);

    CHECK_THROWS_AS(read_roadmap(scratch("missing_roadmap.txt")), FormatError);
    CHECK_THROWS_AS(read_dataset(good), FormatError);
  }

  TEST_CASE("file hashes track content") {
    const auto a = scratch("hash_a.txt"), b = scratch("hash_b.txt");
    spit(a, "alpha");
    spit(b, "alpha");
    CHECK(file_hash(a) == file_hash(b));
    CHECK(file_hash(a).size() == 16);
    spit(b, "alphb");
    CHECK(file_hash(a) != file_hash(b));
  }

  TEST_CASE("action codes round trip") {
    for (auto task : {TaskKind::NormalStacking, TaskKind::RopeBox}) {
      for (const auto& a : unique_actions(task)) {
        std::istringstream in(action_code(a));
        std::string kind;
        int pr, pc, rr, rc;
        in >> kind >> pr >> pc >> rr >> rc;
        CHECK(parse_action(kind, pr, pc, rr, rc) == a);
      }
    }
    CHECK_THROWS(parse_action("fly", 0, 0, 0, 0));
  }
}
