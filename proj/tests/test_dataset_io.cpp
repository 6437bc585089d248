#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "ciosl/dataset_io.hpp"
#include "doctest.h"

using namespace ciosl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("dataset_io") {

TEST_CASE("binary round trip is exact after the first write") {
  SyntheticSpec spec;
  spec.n_classes = 3;
  spec.n_instances = 2;
  spec.frames_per_instance = 4;
  spec.dim = 5;
  spec.seed = 9;
  const Dataset ds = gen_synthetic(spec);
  const std::string p1 = temp_path("ciosl_rt1.bin");
  const std::string p2 = temp_path("ciosl_rt2.bin");
  save_dataset(ds, p1);
  const Dataset loaded = load_dataset(p1);
  CHECK(loaded.records.size() == ds.records.size());
  CHECK(loaded.dim == ds.dim);
  CHECK(loaded.num_classes == ds.num_classes);
  CHECK(loaded.has_instance_metadata);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(loaded.records[i].label == ds.records[i].label);
    CHECK(loaded.records[i].instance_id == ds.records[i].instance_id);
    CHECK(loaded.records[i].frame_index == ds.records[i].frame_index);
    for (std::size_t d = 0; d < ds.dim; ++d) {
      // storage is f32, so the first write rounds
      CHECK(loaded.records[i].z[d] ==
            doctest::Approx(ds.records[i].z[d]).epsilon(1e-6));
    }
  }
  // a second round trip through the format is bitwise stable
  save_dataset(loaded, p2);
  const Dataset again = load_dataset(p2);
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(again.records[i].z == loaded.records[i].z);
  }
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("truncated files report expected versus actual byte counts") {
  SyntheticSpec spec;
  spec.n_classes = 2;
  spec.n_instances = 1;
  spec.frames_per_instance = 3;
  spec.dim = 4;
  const std::string path = temp_path("ciosl_trunc.bin");
  save_dataset(gen_synthetic(spec), path);
  std::string bytes = slurp(path);
  bytes.resize(bytes.size() - 7);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    load_dataset(path);
    FAIL("expected a truncation error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("expected") != std::string::npos);
    CHECK(msg.find("truncated") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("bad magic and zero dimensions are rejected") {
  const std::string path = temp_path("ciosl_bad.bin");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const char junk[24] = "NOTCIOSL........";
    out.write(junk, 24);
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("magic"),
                       std::runtime_error);
  {
    // valid magic but d = 0
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(kDatasetMagic, 8);
    const unsigned char rest[16] = {0};
    out.write(reinterpret_cast<const char*>(rest), 16);
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("dim"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("labels outside the declared class count are rejected with an offset") {
  SyntheticSpec spec;
  spec.n_classes = 2;
  spec.n_instances = 1;
  spec.frames_per_instance = 2;
  spec.dim = 2;
  Dataset ds = gen_synthetic(spec);
  ds.num_classes = 1;  // now label 1 is out of range
  const std::string path = temp_path("ciosl_label.bin");
  save_dataset(ds, path);
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("offset"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("synthetic generation is deterministic and respects spread") {
  SyntheticSpec spec;
  spec.n_classes = 2;
  spec.n_instances = 2;
  spec.frames_per_instance = 5;
  spec.dim = 8;
  spec.seed = 77;
  const std::string p1 = temp_path("ciosl_syn1.bin");
  const std::string p2 = temp_path("ciosl_syn2.bin");
  save_dataset(gen_synthetic(spec), p1);
  save_dataset(gen_synthetic(spec), p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  spec.cluster_spread = 0.0;
  const Dataset still = gen_synthetic(spec);
  // with zero spread every frame of an instance is the class center
  for (std::size_t i = 1; i < still.records.size(); ++i) {
    if (still.records[i].label == still.records[i - 1].label &&
        still.records[i].instance_id == still.records[i - 1].instance_id) {
      CHECK(still.records[i].z == still.records[i - 1].z);
    }
  }
}

TEST_CASE("csv import parses rows and validates shape") {
  const std::string path = temp_path("ciosl_in.csv");
  {
    std::ofstream out(path, std::ios::trunc);
    out << "label,instance,frame,f0,f1\n";
    out << "0,0,0,1.5,-2.0\n";
    out << "1,0,0,0.25,0.75\n";
    out << "1,1,3,0.5,0.5\n";
  }
  const Dataset ds = import_csv(path);
  REQUIRE(ds.records.size() == 3);
  CHECK(ds.dim == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.has_instance_metadata);
  CHECK(ds.records[0].z == std::vector<double>{1.5, -2.0});
  CHECK(ds.records[2].instance_id == 1);
  CHECK(ds.records[2].frame_index == 3);

  {
    std::ofstream out(path, std::ios::trunc);
    out << "0,0,0,1.0,2.0\n";
    out << "0,0,1,1.0\n";  // ragged row
  }
  CHECK_THROWS_AS(import_csv(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("train/test split is deterministic and stratified") {
  SyntheticSpec spec;
  spec.n_classes = 3;
  spec.n_instances = 2;
  spec.frames_per_instance = 10;
  spec.dim = 4;
  const Dataset ds = gen_synthetic(spec);
  const TrainTestSplit a = split_train_test(ds, 0.2);
  const TrainTestSplit b = split_train_test(ds, 0.2);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() + a.test.size() == ds.records.size());
  std::set<std::size_t> overlap(a.train.begin(), a.train.end());
  for (std::size_t i : a.test) CHECK(!overlap.count(i));
  // per (class, instance): the last 2 of 10 frames are held out
  for (std::size_t i : a.test) {
    CHECK(ds.records[i].frame_index >= 8);
  }
  CHECK(a.test.size() == 3 * 2 * 2);

  const TrainTestSplit none = split_train_test(ds, 0.0);
  CHECK(none.test.empty());
  CHECK_THROWS_AS(split_train_test(ds, 1.0), std::invalid_argument);
}

}  // TEST_SUITE
