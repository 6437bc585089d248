#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ciosl/cli.hpp"
#include "ciosl/config.hpp"
#include "ciosl/dataset_io.hpp"
#include "ciosl/results_io.hpp"
#include "doctest.h"

using namespace ciosl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config files parse sections, comments and arrays") {
  const std::string path = temp_path("ciosl_cfg.toml");
  {
    std::ofstream out(path, std::ios::trunc);
    out << "# experiment configuration\n";
    out << "dataset = \"data.bin\"\n";
    out << "[ordering]\n";
    out << "ordering = \"class-instance\"\n";
    out << "classes_per_increment = 5\n";
    out << "[hyperparams]\n";
    out << "lambda1 = 0.5\n";
    out << "lambda2 = 0.1  # distillation\n";
    out << "hidden = [64, 32]\n";
    out << "capacity = 120\n";
    out << "policy = \"lawcbr\"\n";
    out << "sampling = \"lapn\"\n";
    out << "seeds = 4\n";
  }
  const ExperimentConfig cfg = load_config(path);
  CHECK(cfg.dataset_path == "data.bin");
  CHECK(cfg.ordering.kind == OrderingKind::ClassInstance);
  CHECK(cfg.ordering.classes_per_increment == 5);
  CHECK(cfg.hp.lambda1 == 0.5);
  CHECK(cfg.hp.lambda2 == 0.1);
  CHECK(cfg.hp.hidden_dims == std::vector<std::size_t>{64, 32});
  CHECK(cfg.hp.buffer_capacity == 120);
  CHECK(cfg.capacity_explicit);
  CHECK(cfg.policy == ReplacementPolicy::LAWCBR);
  CHECK(cfg.sampling == SamplingStrategy::LAPN);
  CHECK(cfg.n_seeds == 4);
  CHECK(cfg.seed_list() == std::vector<std::uint64_t>{1, 2, 3, 4});
  std::remove(path.c_str());
}

TEST_CASE("config rejects unknown keys and bad enums") {
  const std::string path = temp_path("ciosl_badcfg.toml");
  {
    std::ofstream out(path, std::ios::trunc);
    out << "no_such_key = 3\n";
  }
  CHECK_THROWS_AS(load_config(path), std::invalid_argument);
  {
    std::ofstream out(path, std::ios::trunc);
    out << "ordering = \"sideways\"\n";
  }
  CHECK_THROWS_AS(load_config(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("gen-synthetic then run completes end to end") {
  const std::string data = temp_path("ciosl_cli_data.bin");
  const std::string results = temp_path("ciosl_cli_results.jsonl");
  CHECK(run_cli({"gen-synthetic", "--classes", "4", "--instances", "2", "--frames",
                 "20", "--dim", "8", "--seed", "5", "--out", data}) == 0);
  CHECK(run_cli({"run", "--dataset", data, "--ordering", "class-iid",
                 "--classes-per-increment", "2", "--capacity", "24", "--hidden", "16",
                 "16", "--base-epochs", "4", "--seeds", "2", "--workers", "1",
                 "--out", results}) == 0);
  const ResultsFile file = read_results(results);
  CHECK(file.header["format"] == "ciosl-results-v1");
  REQUIRE(!file.summary.is_null());
  CHECK(file.summary["per_seed"].size() == 2);
  CHECK(file.summary["aggregate"]["omega_all_mean"].get<double>() > 0.0);
  // events stream in per testing event for both the learner and the reference
  CHECK(file.events.size() == 2 * 2 * 2);
  CHECK(run_cli({"report", "--in", results}) == 0);
  std::remove(data.c_str());
  std::remove(results.c_str());
}

TEST_CASE("results summary is byte-identical across reruns") {
  const std::string data = temp_path("ciosl_cli_rep.bin");
  const std::string r1 = temp_path("ciosl_cli_rep1.jsonl");
  const std::string r2 = temp_path("ciosl_cli_rep2.jsonl");
  CHECK(run_cli({"gen-synthetic", "--classes", "3", "--instances", "2", "--frames",
                 "15", "--dim", "6", "--seed", "2", "--out", data}) == 0);
  const std::vector<std::string> base = {
      "run",       "--dataset",     data, "--ordering", "class-iid",
      "--classes-per-increment", "1", "--capacity", "18", "--hidden", "12",
      "--base-epochs", "3", "--seeds", "2", "--seed-base", "7"};
  auto with_out = [&](const std::string& out) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(out);
    return args;
  };
  CHECK(run_cli(with_out(r1)) == 0);
  CHECK(run_cli(with_out(r2)) == 0);
  const ResultsFile f1 = read_results(r1);
  const ResultsFile f2 = read_results(r2);
  REQUIRE(!f1.summary_line.empty());
  CHECK(f1.summary_line == f2.summary_line);
  std::remove(data.c_str());
  std::remove(r1.c_str());
  std::remove(r2.c_str());
}

TEST_CASE("instance ordering without metadata fails cleanly") {
  const std::string csv = temp_path("ciosl_cli_noinst.csv");
  const std::string data = temp_path("ciosl_cli_noinst.bin");
  {
    std::ofstream out(csv, std::ios::trunc);
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 30; ++i) {
        out << c << ",0,0," << (c + 0.01 * i) << "," << (1 - c) << "\n";
      }
    }
  }
  CHECK(run_cli({"import-csv", "--in", csv, "--out", data}) == 0);
  const std::string results = temp_path("ciosl_cli_noinst.jsonl");
  CHECK(run_cli({"run", "--dataset", data, "--ordering", "instance", "--out",
                 results}) != 0);
  // no partial results file is left behind
  CHECK(!std::filesystem::exists(results));
  std::remove(csv.c_str());
  std::remove(data.c_str());
}

TEST_CASE("unknown flags and missing files produce nonzero exits") {
  CHECK(run_cli({"run", "--no-such-flag"}) != 0);
  CHECK(run_cli({"run", "--dataset", "/nonexistent/file.bin"}) != 0);
  CHECK(run_cli({"report", "--in", "/nonexistent/results.jsonl"}) != 0);
}

TEST_CASE("report flags incomplete results files") {
  const std::string path = temp_path("ciosl_cli_incomplete.jsonl");
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"type":"run_header","format":"ciosl-results-v1"})" << "\n";
    out << R"({"type":"event","seed":1,"learner":"ciosl","event":0,"alpha":0.5})" << "\n";
  }
  CHECK(run_cli({"report", "--in", path}) == 1);
  std::remove(path.c_str());
}

}  // TEST_SUITE
