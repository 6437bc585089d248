#include "ciosl/cli.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ciosl/config.hpp"
#include "ciosl/dataset_io.hpp"
#include "ciosl/metrics.hpp"
#include "ciosl/results_io.hpp"
#include "ciosl/trainer.hpp"

namespace ciosl {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json snapshot_to_json(const BufferSnapshot& snap) {
  nlohmann::json j;
  j["size"] = snap.size;
  j["capacity"] = snap.capacity;
  j["seen_count"] = snap.seen_count;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [y, c] : snap.class_counts) counts[std::to_string(y)] = c;
  j["class_counts"] = counts;
  j["loss_histogram"] = snap.loss_histogram;
  j["loss_max"] = snap.loss_max;
  j["uncertainty_histogram"] = snap.uncertainty_histogram;
  j["uncertainty_max"] = snap.uncertainty_max;
  return j;
}

struct PreparedData {
  Dataset data;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  out.data = load_dataset(cfg.dataset_path);
  if (!cfg.test_dataset_path.empty()) {
    const Dataset test = load_dataset(cfg.test_dataset_path);
    if (test.dim != out.data.dim) {
      throw std::runtime_error("test dataset dim " + std::to_string(test.dim) +
                               " != train dataset dim " + std::to_string(out.data.dim));
    }
    out.data.num_classes = std::max(out.data.num_classes, test.num_classes);
    const std::size_t n_train = out.data.records.size();
    for (std::size_t i = 0; i < n_train; ++i) out.train_indices.push_back(i);
    for (const auto& r : test.records) out.data.records.push_back(r);
    for (std::size_t i = n_train; i < out.data.records.size(); ++i) {
      out.test_indices.push_back(i);
    }
  } else {
    TrainTestSplit split = split_train_test(out.data, cfg.test_fraction);
    out.train_indices = std::move(split.train);
    out.test_indices = std::move(split.test);
  }
  if (out.test_indices.empty()) {
    throw std::runtime_error("test split is empty; lower test_fraction or provide "
                             "a test dataset");
  }
  return out;
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::uint64_t plan_hash = 0;
  double omega = 0.0;
  double offline_hat = 0.0;
  RunTrace learner_trace;
  RunTrace offline_trace;
};

SeedOutcome run_one_seed(const Dataset& data, const Dataset& train_view,
                         const std::vector<std::size_t>& train_indices,
                         const std::vector<std::size_t>& test_indices,
                         const ExperimentConfig& cfg, std::uint64_t seed,
                         ResultsWriter& writer) {
  StreamPlan plan = build_stream(train_view, cfg.ordering, seed);
  for (auto& i : plan.base_init) i = train_indices[i];
  for (auto& inc : plan.increments) {
    for (auto& i : inc) i = train_indices[i];
  }

  auto event_writer = [&](const std::string& learner) {
    return [&writer, seed, learner](const EventRecord& ev) {
      nlohmann::json j;
      j["type"] = "event";
      j["seed"] = seed;
      j["learner"] = learner;
      j["event"] = ev.event;
      j["alpha"] = ev.alpha;
      j["classes_seen"] = ev.classes_seen;
      j["stream_samples_seen"] = ev.stream_samples_seen;
      j["test_records"] = ev.test_records;
      writer.write_line(j);
    };
  };

  SeedOutcome outcome;
  outcome.seed = seed;
  outcome.plan_hash = plan.hash();

  if (cfg.learner == LearnerKind::Offline) {
    outcome.learner_trace =
        run_experiment_with_plan(data, plan, test_indices, cfg.hp, cfg.policy,
                                 cfg.sampling, LearnerKind::Offline, seed,
                                 event_writer("offline"));
    outcome.offline_trace = outcome.learner_trace;
  } else {
    outcome.offline_trace =
        run_experiment_with_plan(data, plan, test_indices, cfg.hp, cfg.policy,
                                 cfg.sampling, LearnerKind::Offline, seed,
                                 event_writer("offline"));
    outcome.learner_trace =
        run_experiment_with_plan(data, plan, test_indices, cfg.hp, cfg.policy,
                                 cfg.sampling, cfg.learner, seed,
                                 event_writer(to_string(cfg.learner)));
  }
  outcome.omega =
      omega_all({outcome.learner_trace.alpha, outcome.offline_trace.alpha});
  outcome.offline_hat = offline_mean(outcome.offline_trace.alpha);
  return outcome;
}

int cmd_run(ExperimentConfig cfg) {
  if (cfg.dataset_path.empty()) {
    throw std::runtime_error("run: no dataset given (use --dataset or a config file)");
  }
  PreparedData prepared = prepare_data(cfg);
  if (!cfg.capacity_explicit && cfg.learner == LearnerKind::CIOSL) {
    // Around 5% of the stream, the paper's working regime for the tiny memory.
    cfg.hp.buffer_capacity =
        std::min<std::size_t>(1000, std::max<std::size_t>(10, prepared.train_indices.size() / 20));
  }
  const Dataset train_view = subset(prepared.data, prepared.train_indices);
  // Validate the plan once before any output file exists, so bad configs
  // leave nothing behind.
  (void)build_stream(train_view, cfg.ordering, cfg.seed_base);

  ResultsWriter writer(cfg.out_path);
  {
    nlohmann::json header;
    header["type"] = "run_header";
    header["format"] = "ciosl-results-v1";
    header["complete_marker"] = "summary";
    header["config"] = cfg.to_json();
    nlohmann::json ds;
    ds["records"] = prepared.data.records.size();
    ds["dim"] = prepared.data.dim;
    ds["classes"] = prepared.data.num_classes;
    ds["has_instance_metadata"] = prepared.data.has_instance_metadata;
    ds["train_records"] = prepared.train_indices.size();
    ds["test_records"] = prepared.test_indices.size();
    header["dataset"] = ds;
    writer.write_line(header);
  }

  const std::vector<std::uint64_t> seeds = cfg.seed_list();
  std::vector<SeedOutcome> outcomes(seeds.size());
  std::vector<std::string> failures(seeds.size());
  std::atomic<std::size_t> next{0};
  const std::size_t n_workers = std::max<std::size_t>(
      1, std::min<std::size_t>(cfg.workers == 0 ? std::thread::hardware_concurrency()
                                                : cfg.workers,
                               seeds.size()));
  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= seeds.size()) return;
      try {
        outcomes[k] = run_one_seed(prepared.data, train_view, prepared.train_indices,
                                   prepared.test_indices, cfg, seeds[k], writer);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w + 1 < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (!failures[k].empty()) {
      throw std::runtime_error("seed " + std::to_string(seeds[k]) +
                               " failed: " + failures[k]);
    }
  }

  nlohmann::json summary;
  summary["type"] = "summary";
  summary["config"] = cfg.to_json();
  nlohmann::json per_seed = nlohmann::json::array();
  std::vector<double> omegas, offline_hats;
  for (const auto& o : outcomes) {
    nlohmann::json j;
    j["seed"] = o.seed;
    j["plan_hash"] = hex64(o.plan_hash);
    j["omega_all"] = o.omega;
    j["offline_hat"] = o.offline_hat;
    j["alpha"] = o.learner_trace.alpha;
    j["alpha_offline"] = o.offline_trace.alpha;
    j["stream_length"] = o.learner_trace.stream_length;
    j["gradient_steps_stream"] = o.learner_trace.gradient_steps_stream;
    if (o.learner_trace.final_buffer) {
      j["buffer"] = snapshot_to_json(*o.learner_trace.final_buffer);
    }
    per_seed.push_back(std::move(j));
    omegas.push_back(o.omega);
    offline_hats.push_back(o.offline_hat);
  }
  summary["per_seed"] = per_seed;
  const MeanSd omega_stats = mean_sd(omegas);
  const MeanSd offline_stats = mean_sd(offline_hats);
  nlohmann::json agg;
  agg["omega_all_mean"] = omega_stats.mean;
  agg["omega_all_sd"] = omega_stats.sd;
  agg["offline_hat_mean"] = offline_stats.mean;
  summary["aggregate"] = agg;
  writer.write_line(summary);

  std::cout << "omega_all = " << omega_stats.mean << " +/- " << omega_stats.sd
            << " over " << seeds.size() << " seed(s); results in " << cfg.out_path
            << "\n";
  return 0;
}

int cmd_report(const std::string& path) {
  const ResultsFile file = read_results(path);
  if (file.summary.is_null()) {
    std::cout << "Run in '" << path << "' is incomplete (no summary line); "
              << file.events.size() << " event(s) recorded.\n";
    return 1;
  }
  const auto& cfg = file.summary["config"];
  std::cout << "learner=" << cfg["learner"].get<std::string>()
            << " ordering=" << cfg["ordering"].get<std::string>()
            << " policy=" << cfg["policy"].get<std::string>()
            << " sampling=" << cfg["sampling"].get<std::string>()
            << " capacity=" << cfg["buffer_capacity"] << "\n";
  std::printf("%8s  %-18s  %10s  %12s\n", "seed", "plan_hash", "omega_all",
              "offline_hat");
  for (const auto& row : file.summary["per_seed"]) {
    std::printf("%8llu  %-18s  %10.4f  %12.4f\n",
                static_cast<unsigned long long>(row["seed"].get<std::uint64_t>()),
                row["plan_hash"].get<std::string>().c_str(),
                row["omega_all"].get<double>(), row["offline_hat"].get<double>());
  }
  const auto& agg = file.summary["aggregate"];
  std::printf("mean omega_all = %.4f +/- %.4f, offline_hat = %.4f\n",
              agg["omega_all_mean"].get<double>(), agg["omega_all_sd"].get<double>(),
              agg["offline_hat_mean"].get<double>());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Streaming class-incremental learner over embedding datasets"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "Run experiments and write a results file");
  std::string config_path;
  run->add_option("--config", config_path, "Config file (flat key = value, TOML-style)");
  std::string dataset, test_dataset, ordering, policy, sampling, learner, out;
  double lambda1 = 0, lambda2 = 0, base_fraction = 0, eval_cadence = 0, test_fraction = 0;
  double lr = 0, momentum = 0, weight_decay = 0, initial_sigma = 0;
  std::size_t capacity = 0, n_replay = 0, n_kd = 0, k_unc = 0, base_epochs = 0;
  std::size_t base_batch = 0, cpi = 0, block = 0, seeds = 0, workers = 0;
  std::uint64_t seed_base = 0;
  std::vector<std::size_t> hidden;
  bool eval_mean = false, no_permute = false;
  run->add_option("--dataset", dataset, "Embedding dataset file");
  run->add_option("--test-dataset", test_dataset, "Held-out test dataset file");
  run->add_option("--ordering", ordering, "iid|class-iid|instance|class-instance");
  run->add_option("--policy", policy, "lawcbr|lawrrr");
  run->add_option("--sampling", sampling, "uniform|uapn|lapn");
  run->add_option("--learner", learner, "ciosl|fine-tune|offline");
  run->add_option("--lambda1", lambda1, "KL regularizer weight");
  run->add_option("--lambda2", lambda2, "Distillation weight");
  run->add_option("--capacity", capacity, "Replay buffer capacity");
  run->add_option("--n-replay", n_replay, "Replay batch size N1'");
  run->add_option("--n-kd", n_kd, "Distillation batch size N2'");
  run->add_option("--k", k_unc, "Posterior samples for prediction/uncertainty");
  run->add_option("--base-epochs", base_epochs, "Base initialization epochs");
  run->add_option("--base-batch", base_batch, "Base initialization batch size");
  run->add_option("--base-fraction", base_fraction, "Base split fraction (iid/instance)");
  run->add_option("--classes-per-increment", cpi, "Classes per increment (class-*)");
  run->add_option("--interleave-block", block, "Frames per instance block (instance)");
  run->add_option("--eval-cadence", eval_cadence, "Testing-event spacing (iid/instance)");
  run->add_option("--hidden", hidden, "Hidden layer sizes");
  run->add_option("--lr", lr, "Learning rate");
  run->add_option("--momentum", momentum, "SGD momentum");
  run->add_option("--weight-decay", weight_decay, "Weight decay on mu");
  run->add_option("--initial-sigma", initial_sigma, "Initial posterior sigma");
  run->add_option("--seeds", seeds, "Number of seeds to run");
  run->add_option("--seed-base", seed_base, "First seed value");
  run->add_option("--test-fraction", test_fraction, "Held-out fraction per class");
  run->add_option("--workers", workers, "Worker threads (0 = all cores)");
  run->add_flag("--eval-mean", eval_mean, "Evaluate at the posterior mean");
  run->add_flag("--no-class-permute", no_permute, "Keep natural class order");
  run->add_option("--out", out, "Results file path");

  // --- gen-synthetic ---
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic embedding dataset");
  SyntheticSpec syn;
  std::string gen_out;
  gen->add_option("--classes", syn.n_classes, "Number of classes");
  gen->add_option("--instances", syn.n_instances, "Object instances per class");
  gen->add_option("--frames", syn.frames_per_instance, "Frames per instance");
  gen->add_option("--dim", syn.dim, "Embedding dimensionality");
  gen->add_option("--spread", syn.cluster_spread, "Cluster spread");
  gen->add_option("--seed", syn.seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output dataset file")->required();

  // --- import-csv ---
  auto* imp = app.add_subcommand("import-csv", "Convert a CSV file to the binary format");
  std::string csv_in, csv_out;
  imp->add_option("--in", csv_in, "CSV input (label,instance,frame,f0,...)")->required();
  imp->add_option("--out", csv_out, "Output dataset file")->required();

  // --- report ---
  auto* rep = app.add_subcommand("report", "Print the summary of a results file");
  std::string rep_in;
  rep->add_option("--in", rep_in, "Results file")->required();

  std::vector<const char*> argv;
  argv.push_back("ciosl");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      const Dataset ds = gen_synthetic(syn);
      save_dataset(ds, gen_out);
      std::cout << "wrote " << ds.records.size() << " records (" << ds.num_classes
                << " classes, dim " << ds.dim << ") to " << gen_out << "\n";
      return 0;
    }
    if (imp->parsed()) {
      const Dataset ds = import_csv(csv_in);
      save_dataset(ds, csv_out);
      std::cout << "imported " << ds.records.size() << " records (" << ds.num_classes
                << " classes, dim " << ds.dim << ") to " << csv_out << "\n";
      return 0;
    }
    if (rep->parsed()) {
      return cmd_report(rep_in);
    }

    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    auto set_if = [&](const std::string& flag, auto setter) {
      if (run->count(flag) > 0) setter();
    };
    set_if("--dataset", [&] { cfg.dataset_path = dataset; });
    set_if("--test-dataset", [&] { cfg.test_dataset_path = test_dataset; });
    set_if("--ordering", [&] { cfg.ordering.kind = ordering_kind_from_string(ordering); });
    set_if("--policy", [&] { cfg.policy = policy_from_string(policy); });
    set_if("--sampling", [&] { cfg.sampling = sampling_from_string(sampling); });
    set_if("--learner", [&] { cfg.learner = learner_kind_from_string(learner); });
    set_if("--lambda1", [&] { cfg.hp.lambda1 = lambda1; });
    set_if("--lambda2", [&] { cfg.hp.lambda2 = lambda2; });
    set_if("--capacity", [&] {
      cfg.hp.buffer_capacity = capacity;
      cfg.capacity_explicit = true;
    });
    set_if("--n-replay", [&] { cfg.hp.n_replay = n_replay; });
    set_if("--n-kd", [&] { cfg.hp.n_kd = n_kd; });
    set_if("--k", [&] { cfg.hp.k_uncertainty = k_unc; });
    set_if("--base-epochs", [&] { cfg.hp.base_epochs = base_epochs; });
    set_if("--base-batch", [&] { cfg.hp.base_batch = base_batch; });
    set_if("--base-fraction", [&] { cfg.ordering.base_init_fraction = base_fraction; });
    set_if("--classes-per-increment", [&] { cfg.ordering.classes_per_increment = cpi; });
    set_if("--interleave-block", [&] { cfg.ordering.interleave_block = block; });
    set_if("--eval-cadence", [&] { cfg.ordering.eval_cadence_fraction = eval_cadence; });
    set_if("--hidden", [&] { cfg.hp.hidden_dims = hidden; });
    set_if("--lr", [&] { cfg.hp.lr = lr; });
    set_if("--momentum", [&] { cfg.hp.momentum = momentum; });
    set_if("--weight-decay", [&] { cfg.hp.weight_decay = weight_decay; });
    set_if("--initial-sigma", [&] { cfg.hp.initial_sigma = initial_sigma; });
    set_if("--seeds", [&] { cfg.n_seeds = seeds; });
    set_if("--seed-base", [&] { cfg.seed_base = seed_base; });
    set_if("--test-fraction", [&] { cfg.test_fraction = test_fraction; });
    set_if("--workers", [&] { cfg.workers = workers; });
    if (eval_mean) cfg.hp.eval_posterior_mean = true;
    if (no_permute) cfg.ordering.permute_class_order = false;
    set_if("--out", [&] { cfg.out_path = out; });
    return cmd_run(std::move(cfg));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ciosl
