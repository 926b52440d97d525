// Copyright 2026 The MPMI Shared Control Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Harness entry point: collect | train | run | bench | serve.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mpmi/bench.h"
#include "mpmi/bridge.h"
#include "mpmi/bridge_server.h"
#include "mpmi/config.h"
#include "mpmi/errors.h"
#include "mpmi/metrics.h"
#include "mpmi/pipeline.h"

namespace {

namespace fs = std::filesystem;
using namespace mpmi;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_stop{false};

void HandleSignal(int) { g_stop = true; }

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args->overrides, "Override a config key: dotted.key=value")
      ->take_all();
  cmd->add_option("--out", args->out, "Directory for artifacts (relative paths resolve here)");
}

RunConfig Load(const CommonArgs& args) {
  if (args.config_path.empty()) return ParseConfig("{}", args.overrides);
  return LoadConfig(args.config_path, args.overrides);
}

fs::path Resolve(const CommonArgs& args, const std::string& path) {
  const fs::path p(path);
  if (args.out.empty() || p.is_absolute()) return p;
  return fs::path(args.out) / p;
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

int Collect(const CommonArgs& args) {
  const RunConfig config = Load(args);
  const fs::path path = Resolve(args, config.model.dataset_path);
  const Dataset data = CollectFor(config);
  EnsureParent(path);
  WriteDataset(data, path);
  std::printf("collected %zu transitions (%s, seed %llu) into %s  config_hash=%s\n", data.size(),
              ToString(config.env.id).c_str(),
              static_cast<unsigned long long>(config.model.collect_seed), path.c_str(),
              config.hash.c_str());
  return 0;
}

int Train(const CommonArgs& args) {
  const RunConfig config = Load(args);
  const fs::path data_path = Resolve(args, config.model.dataset_path);
  const fs::path model_path = Resolve(args, config.model.path);
  const Dataset data = ReadDataset(data_path);
  const TrainResult result = TrainModel(config, data);
  EnsureParent(model_path);
  SaveModel(result.sparse, model_path);
  std::fputs(FormatTrainReport(config, result).c_str(), stdout);
  std::printf("model written to %s  config_hash=%s\n", model_path.c_str(), config.hash.c_str());
  return 0;
}

std::unique_ptr<KoopmanModel> LoadModelResolved(const CommonArgs& args, RunConfig config) {
  config.model.path = Resolve(args, config.model.path).string();
  if (!config.model.ground_truth && !fs::exists(config.model.path)) {
    throw std::runtime_error("model file '" + config.model.path +
                             "' not found; run `mpmi train` first or set model.ground_truth=true");
  }
  return LoadModelFor(config);
}

int Run(const CommonArgs& args) {
  const RunConfig config = Load(args);
  const auto model = LoadModelResolved(args, config);
  const fs::path dir = args.out.empty() ? fs::path(config.session.output_dir) : fs::path(args.out);
  WorkerPool pool(ResolveWorkers(config.session.workers));
  CampaignOptions options;
  options.keep_running = [] { return !g_stop.load(); };
  options.on_trial = [](const TrialRecord& t) {
    std::printf("%-28s %-8s %7.2f s  ticks %zu\n", t.trial_id.c_str(), ToString(t.outcome).c_str(),
                t.duration, t.ticks.size());
    std::fflush(stdout);
  };
  std::vector<TrialRecord> trials = RunCampaign(config, model.get(), pool, options);
  if (g_stop) {
    std::fprintf(stderr, "interrupted; no summary written\n");
    return kExitRuntime;
  }
  const RunInfo info{config.hash, config.TrialSeeds()};
  SummaryOptions summary_options;
  summary_options.count_survivors_at_cap = config.session.count_survivors_at_cap;
  const auto summaries = Export(trials, info, summary_options, dir);
  std::fputs(FormatSummaryTable(summaries, info).c_str(), stdout);
  std::printf("artifacts written to %s\n", dir.c_str());
  return 0;
}

int Bench(const CommonArgs& args) {
  const RunConfig config = Load(args);
  const auto model = LoadModelResolved(args, config);
  const BenchReport report = RunBench(config, model.get());
  const std::string text = FormatBenchReport(config, report);
  std::fputs(text.c_str(), stdout);
  if (!args.out.empty()) {
    fs::create_directories(args.out);
    std::ofstream(fs::path(args.out) / "bench.txt") << text;
  }
  return 0;
}

int Serve(const CommonArgs& args) {
  const RunConfig config = Load(args);
  const auto model = LoadModelResolved(args, config);
  const SampleSet samples = SamplesFor(config);
  WorkerPool pool(ResolveWorkers(config.session.workers));

  InputHandoff handoff;
  BridgeHub hub(&handoff, config.env.control_dim(),
                static_cast<std::size_t>(config.bridge.queue_limit));
  BridgeServer server(&hub, [&] { return HelloMessage(config, hub.tick()); });
  server.Start(config.bridge.address, config.bridge.port);
  std::printf("listening on ws://%s:%d  config_hash=%s\n", config.bridge.address.c_str(),
              server.port(), config.hash.c_str());
  std::fflush(stdout);
  TelemetryPublisher publisher(&hub, config.bridge, &handoff);

  const auto start = std::chrono::steady_clock::now();
  auto keep_running = [&] {
    if (g_stop) return false;
    if (config.bridge.session_time <= 0.0) return true;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() <
           config.bridge.session_time;
  };

  std::vector<TrialRecord> finished;
  Mode mode = config.session.modes.front();
  for (std::uint64_t seed : config.TrialSeeds()) {
    if (!keep_running()) break;
    auto env = MakeEnvironment(config.env, seed, config.always_safe);
    TrialPredictor predictor = PredictorFor(model.get(), env);
    // Live sessions default to process noise of 1% of each state's scale;
    // an explicit horizon.noise_sigma (zeros included) overrides it.
    HorizonConfig horizon = config.horizon;
    if (horizon.noise_sigma.empty()) {
      const Eigen::VectorXd scale = env->StateScale();
      horizon.noise_sigma.assign(scale.data(), scale.data() + scale.size());
      for (double& s : horizon.noise_sigma) s *= 0.01;
    }
    const TrialContext context{env, predictor.predictor, &samples, horizon, &pool};
    TrialOptions options;
    options.trial_id = "live-" + std::to_string(seed);
    options.seed = seed;
    options.mode = mode;
    options.real_time = true;
    options.keep_running = keep_running;
    options.on_tick = [&](const TickRecord& rec, const SharedControlDecision&,
                          const RolloutBatch& batch) {
      mode = rec.assisted ? Mode::kMpmi : Mode::kUserOnly;
      publisher.OnTick(options.trial_id, rec, batch);
    };
    TrialRecord announce;
    announce.trial_id = options.trial_id;
    announce.env = config.env.id;
    announce.mode = mode;
    announce.seed = seed;
    announce.max_trial_time = config.env.max_trial_time;
    publisher.TrialStarted(announce, config, *env);
    TrialRecord trial = RunTrial(context, handoff, options);
    publisher.TrialEnded(trial);
    std::printf("%-12s %-8s %-9s %7.2f s%s\n", trial.trial_id.c_str(),
                ToString(trial.outcome).c_str(), ToString(trial.mode).c_str(), trial.duration,
                trial.aborted ? " (stopped)" : "");
    std::fflush(stdout);
    if (!trial.aborted) finished.push_back(std::move(trial));
  }
  server.Stop();
  if (!args.out.empty() && !finished.empty()) {
    std::vector<std::uint64_t> seeds;
    for (const auto& t : finished) seeds.push_back(t.seed);
    Export(finished, RunInfo{config.hash, seeds}, SummaryOptions{}, args.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampled minimal-intervention shared control harness"};
  app.require_subcommand(1);
  CommonArgs args;
  CLI::App* collect = app.add_subcommand("collect", "Record a random-excitation dataset");
  CLI::App* train = app.add_subcommand("train", "Fit, sparsify and evaluate a Koopman model");
  CLI::App* run = app.add_subcommand("run", "Headless paired-seed campaign with a scripted user");
  CLI::App* bench = app.add_subcommand("bench", "Tick-rate and batch-rate measurements");
  CLI::App* serve = app.add_subcommand("serve", "Live control loop behind the WebSocket bridge");
  CLI::App* defaults = app.add_subcommand("defaults", "Print the default config of an environment");
  for (CLI::App* cmd : {collect, train, run, bench, serve}) AddCommon(cmd, &args);
  std::string env_name = "balance_bot";
  defaults->add_option("--env", env_name, "balance_bot or race_car");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  try {
    if (*collect) return Collect(args);
    if (*train) return Train(args);
    if (*run) return Run(args);
    if (*bench) return Bench(args);
    if (*serve) return Serve(args);
    if (*defaults) {
      std::fputs(DefaultConfigJson(EnvIdFromString(env_name)).c_str(), stdout);
      std::fputc('\n', stdout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitValidation;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
