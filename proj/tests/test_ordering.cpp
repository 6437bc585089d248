#include <stdexcept>
#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "ciosl/ordering.hpp"
#include "doctest.h"

using namespace ciosl;

namespace {

Dataset make_dataset(std::uint32_t n_classes, std::uint32_t instances,
                     std::uint32_t frames, bool with_metadata = true) {
  Dataset ds;
  ds.num_classes = n_classes;
  ds.dim = 2;
  ds.has_instance_metadata = with_metadata;
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    for (std::uint32_t i = 0; i < instances; ++i) {
      for (std::uint32_t f = 0; f < frames; ++f) {
        DatasetRecord r;
        r.z = {static_cast<double>(c), static_cast<double>(f)};
        r.label = c;
        r.instance_id = with_metadata ? i : 0;
        r.frame_index = with_metadata ? f : 0;
        ds.records.push_back(std::move(r));
      }
    }
  }
  return ds;
}

std::vector<std::size_t> flatten(const StreamPlan& plan) {
  std::vector<std::size_t> all = plan.base_init;
  for (const auto& inc : plan.increments) all.insert(all.end(), inc.begin(), inc.end());
  return all;
}

std::set<std::uint32_t> classes_of(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::set<std::uint32_t> s;
  for (std::size_t i : idx) s.insert(ds.records[i].label);
  return s;
}

void check_partition(const Dataset& ds, const StreamPlan& plan) {
  const auto all = flatten(plan);
  CHECK(all.size() == ds.records.size());
  std::set<std::size_t> unique(all.begin(), all.end());
  CHECK(unique.size() == ds.records.size());
}

}  // namespace

TEST_SUITE("ordering") {

TEST_CASE("class-iid partitions classes across increments") {
  const Dataset ds = make_dataset(4, 1, 5);
  OrderingSpec spec;
  spec.kind = OrderingKind::ClassIID;
  spec.classes_per_increment = 2;
  spec.permute_class_order = false;  // natural order for the definition case
  const StreamPlan plan = build_stream(ds, spec, 1);
  CHECK(classes_of(ds, plan.base_init) == std::set<std::uint32_t>{0, 1});
  REQUIRE(plan.increments.size() == 1);
  CHECK(classes_of(ds, plan.increments[0]) == std::set<std::uint32_t>{2, 3});
  check_partition(ds, plan);
}

TEST_CASE("class increments are disjoint under a seeded permutation") {
  const Dataset ds = make_dataset(6, 1, 4);
  OrderingSpec spec;
  spec.kind = OrderingKind::ClassIID;
  spec.classes_per_increment = 2;
  for (std::uint64_t seed : {1, 2, 3}) {
    const StreamPlan plan = build_stream(ds, spec, seed);
    check_partition(ds, plan);
    std::set<std::uint32_t> seen = classes_of(ds, plan.base_init);
    CHECK(seen.size() == 2);
    for (const auto& inc : plan.increments) {
      const auto inc_classes = classes_of(ds, inc);
      for (std::uint32_t c : inc_classes) CHECK(!seen.count(c));
      seen.insert(inc_classes.begin(), inc_classes.end());
    }
    CHECK(seen.size() == 6);
  }
}

TEST_CASE("same seed reproduces the identical plan") {
  const Dataset ds = make_dataset(4, 2, 6);
  for (auto kind : {OrderingKind::IID, OrderingKind::ClassIID, OrderingKind::Instance,
                    OrderingKind::ClassInstance}) {
    OrderingSpec spec;
    spec.kind = kind;
    const StreamPlan a = build_stream(ds, spec, 7);
    const StreamPlan b = build_stream(ds, spec, 7);
    CHECK(a.base_init == b.base_init);
    CHECK(a.increments == b.increments);
    CHECK(a.hash() == b.hash());
  }
}

TEST_CASE("instance ordering interleaves temporally ordered blocks") {
  // 1 class, 2 instances of 120 frames, block 50, no base split:
  // inst0 f0-49, inst1 f0-49, inst0 f50-99, inst1 f50-99, inst0 f100-119,
  // inst1 f100-119.
  const Dataset ds = make_dataset(1, 2, 120);
  OrderingSpec spec;
  spec.kind = OrderingKind::Instance;
  spec.base_init_fraction = 1e-9;       // floors to an empty base split
  spec.eval_cadence_fraction = 1.0;     // single increment
  spec.interleave_block = 50;
  const StreamPlan plan = build_stream(ds, spec, 3);
  CHECK(plan.base_init.empty());
  const auto stream = flatten(plan);
  REQUIRE(stream.size() == 240);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> expected;
  for (std::uint32_t f = 0; f < 50; ++f) expected.push_back({0, f});
  for (std::uint32_t f = 0; f < 50; ++f) expected.push_back({1, f});
  for (std::uint32_t f = 50; f < 100; ++f) expected.push_back({0, f});
  for (std::uint32_t f = 50; f < 100; ++f) expected.push_back({1, f});
  for (std::uint32_t f = 100; f < 120; ++f) expected.push_back({0, f});
  for (std::uint32_t f = 100; f < 120; ++f) expected.push_back({1, f});
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& r = ds.records[stream[i]];
    CHECK(r.instance_id == expected[i].first);
    CHECK(r.frame_index == expected[i].second);
  }
}

TEST_CASE("iid ordering splits the base fraction and paces testing events") {
  const Dataset ds = make_dataset(5, 2, 20);  // 200 records
  OrderingSpec spec;
  spec.kind = OrderingKind::IID;
  spec.base_init_fraction = 0.10;
  spec.eval_cadence_fraction = 0.05;
  const StreamPlan plan = build_stream(ds, spec, 11);
  CHECK(plan.base_init.size() == 20);
  CHECK(plan.increments.size() == 20);  // one event per 5% of the stream
  check_partition(ds, plan);
}

TEST_CASE("class-instance keeps classes whole and frames ordered") {
  const Dataset ds = make_dataset(4, 3, 10);
  OrderingSpec spec;
  spec.kind = OrderingKind::ClassInstance;
  spec.classes_per_increment = 2;
  const StreamPlan plan = build_stream(ds, spec, 5);
  check_partition(ds, plan);

  auto check_segment = [&](const std::vector<std::size_t>& segment) {
    // classes appear as contiguous runs
    std::vector<std::uint32_t> class_runs;
    for (std::size_t i : segment) {
      const auto c = ds.records[i].label;
      if (class_runs.empty() || class_runs.back() != c) class_runs.push_back(c);
    }
    std::set<std::uint32_t> unique(class_runs.begin(), class_runs.end());
    CHECK(unique.size() == class_runs.size());
    // within a class, instances contiguous and frames nondecreasing
    std::map<std::uint32_t, std::vector<std::uint32_t>> instance_runs;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> last_frame;
    for (std::size_t i : segment) {
      const auto& r = ds.records[i];
      auto& runs = instance_runs[r.label];
      if (runs.empty() || runs.back() != r.instance_id) runs.push_back(r.instance_id);
      const auto key = std::make_pair(r.label, r.instance_id);
      if (last_frame.count(key)) CHECK(r.frame_index >= last_frame[key]);
      last_frame[key] = r.frame_index;
    }
    for (const auto& [c, runs] : instance_runs) {
      std::set<std::uint32_t> u(runs.begin(), runs.end());
      CHECK(u.size() == runs.size());
    }
  };
  check_segment(plan.base_init);
  for (const auto& inc : plan.increments) check_segment(inc);
}

TEST_CASE("instance orderings require temporal metadata") {
  const Dataset ds = make_dataset(2, 1, 10, /*with_metadata=*/false);
  OrderingSpec spec;
  spec.kind = OrderingKind::Instance;
  CHECK_THROWS_AS(build_stream(ds, spec, 1), std::invalid_argument);
  spec.kind = OrderingKind::ClassInstance;
  CHECK_THROWS_AS(build_stream(ds, spec, 1), std::invalid_argument);
  spec.kind = OrderingKind::ClassIID;
  CHECK_NOTHROW(build_stream(ds, spec, 1));
}

TEST_CASE("uneven class count leaves a smaller final increment") {
  const Dataset ds = make_dataset(5, 1, 4);
  OrderingSpec spec;
  spec.kind = OrderingKind::ClassIID;
  spec.classes_per_increment = 2;
  const StreamPlan plan = build_stream(ds, spec, 2);
  REQUIRE(plan.increments.size() == 2);
  CHECK(plan.increments[0].size() == 8);
  CHECK(plan.increments[1].size() == 4);
  check_partition(ds, plan);
}

TEST_CASE("empty dataset and missing classes are rejected") {
  Dataset empty;
  empty.num_classes = 1;
  empty.dim = 2;
  OrderingSpec spec;
  CHECK_THROWS_AS(build_stream(empty, spec, 1), std::invalid_argument);

  Dataset gap = make_dataset(3, 1, 2);
  gap.num_classes = 4;  // class 3 has no records
  CHECK_THROWS_AS(build_stream(gap, spec, 1), std::invalid_argument);
}

TEST_CASE("plan hash distinguishes different plans") {
  const Dataset ds = make_dataset(4, 1, 5);
  OrderingSpec spec;
  spec.kind = OrderingKind::ClassIID;
  const StreamPlan a = build_stream(ds, spec, 1);
  const StreamPlan b = build_stream(ds, spec, 2);
  CHECK(a.hash() != b.hash());
}

}  // TEST_SUITE
