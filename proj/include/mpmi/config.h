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

#ifndef MPMI_CONFIG_H_
#define MPMI_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mpmi/basis.h"
#include "mpmi/dataset.h"
#include "mpmi/env_spec.h"
#include "mpmi/koopman.h"
#include "mpmi/rollout.h"
#include "mpmi/scripted_user.h"
#include "mpmi/session.h"

namespace mpmi {

struct ModelConfig {
  // Use the simulator itself as the predictor (no learned model).
  bool ground_truth = false;
  // Model file written by `train` and read by `run`, `bench` and `serve`.
  std::string path = "model.txt";
  // Dataset written by `collect` and read by `train`.
  std::string dataset_path = "dataset.csv";
  BasisSpec basis;
  double ridge = 1e-6;
  SparsityOptions sparsity;
  long collect_steps = 50000;
  std::uint64_t collect_seed = 1;
  ExcitationOptions excitation;
  double heldout_fraction = 0.2;
  int eval_k = 30;
};

struct SessionConfig {
  std::vector<Mode> modes = {Mode::kUserOnly, Mode::kMpmi};
  int trials = 20;
  // Trial i of every mode uses seed + i (paired design).
  std::uint64_t seed = 1;
  ScriptedUserSpec user;
  std::string output_dir = "out";
  // 0 = one per hardware thread.
  int workers = 0;
  bool real_time = false;
  bool count_survivors_at_cap = true;
};

struct BenchConfig {
  double duration = 30.0;
  std::vector<int> per_dim_counts;
  // Worker counts to sweep; 0 = hardware threads.
  std::vector<int> workers = {1, 0};
  // Total sample counts for the short scaling sweep (1-D grids are used
  // for the balance bot, near-cubic grids for the race car).
  std::vector<int> sweep_samples = {256, 1024, 2048, 4096};
  double sweep_duration = 2.0;
};

struct BridgeConfig {
  std::string address = "127.0.0.1";
  int port = 8765;
  int cloud_every = 5;
  int cloud_samples = 200;
  int cloud_step_stride = 3;
  int queue_limit = 256;
  // Omit wall-clock fields so transcripts are byte-stable.
  bool deterministic = false;
  // serve: stop after this many seconds (0 = run until interrupted).
  double session_time = 0.0;
};

struct RunConfig {
  EnvSpec env;
  // Replace the safety predicate by "state is finite" (test stub).
  bool always_safe = false;
  std::vector<int> per_dim_counts;
  HorizonConfig horizon;
  ModelConfig model;
  SessionConfig session;
  BenchConfig bench;
  BridgeConfig bridge;
  // FNV-1a of the canonical JSON of the fully resolved config, 16 hex digits.
  std::string hash;
  // That canonical JSON.
  std::string canonical;

  std::vector<std::uint64_t> TrialSeeds() const;
};

// Parses a JSON config. Missing keys take environment-specific defaults;
// unknown keys, wrong types and invalid values throw ConfigError naming the
// key. `overrides` are "dotted.key=value" strings applied before defaults
// are filled; the value is read as JSON when it parses, else as a string.
RunConfig ParseConfig(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig LoadConfig(const std::filesystem::path& path,
                     const std::vector<std::string>& overrides = {});

// Fully populated defaults for an environment, as JSON text.
std::string DefaultConfigJson(EnvId env);

// 64-bit FNV-1a.
std::uint64_t Fnv1a(const std::string& bytes);

// Grid counts with at least `n` total samples: {n} for the balance bot and a
// near-cubic split for the race car (steering axis largest).
std::vector<int> GridCountsFor(EnvId env, int n);

}  // namespace mpmi

#endif  // MPMI_CONFIG_H_
