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

#ifndef MPMI_DATASET_H_
#define MPMI_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mpmi/env_spec.h"

namespace mpmi {

// Transitions (x_t, u_t, x_{t+1}) stored as flat rows.
class Dataset {
 public:
  Dataset() = default;
  Dataset(EnvId env, int state_dim, int control_dim, double dt);

  EnvId env() const { return env_; }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int row_width() const { return 2 * state_dim_ + control_dim_; }
  double dt() const { return dt_; }
  std::size_t size() const { return rows_.size() / static_cast<std::size_t>(row_width()); }
  bool empty() const { return rows_.empty(); }

  std::uint64_t seed = 0;
  std::string config_hash;

  std::span<const double> state(std::size_t i) const { return row(i).subspan(0, state_dim_); }
  std::span<const double> control(std::size_t i) const {
    return row(i).subspan(state_dim_, control_dim_);
  }
  std::span<const double> next_state(std::size_t i) const {
    return row(i).subspan(state_dim_ + control_dim_, state_dim_);
  }
  std::span<const double> row(std::size_t i) const {
    return {rows_.data() + i * row_width(), static_cast<std::size_t>(row_width())};
  }

  void Append(std::span<const double> x, std::span<const double> u, std::span<const double> next);
  // Rows [begin, end) as a new dataset with the same metadata.
  Dataset Slice(std::size_t begin, std::size_t end) const;
  // True when row i+1 starts where row i ended (same episode).
  bool Continues(std::size_t i) const;

  const std::vector<double>& raw() const { return rows_; }

 private:
  EnvId env_ = EnvId::kBalanceBot;
  int state_dim_ = 0;
  int control_dim_ = 0;
  double dt_ = 0.0;
  std::vector<double> rows_;
};

// Ornstein-Uhlenbeck excitation over the control box, restarted per episode
// with a fresh mean drawn uniformly from the box.
struct ExcitationOptions {
  double reversion = 2.0;   // 1/s
  double volatility = 1.5;  // box widths per sqrt(s)
  double max_episode_time = 10.0;
};

// Seeded random-excitation rollouts of the ground-truth simulator. Episodes
// start from random safe states and reset on failure. Race-car episodes use a
// fresh track per episode. Throws ConfigError if n_steps == 0.
Dataset CollectDataset(const EnvSpec& spec, const ExcitationOptions& options, long n_steps,
                       std::uint64_t seed);

// One header line
//   # mpmi-dataset v1 env_id=<id> state_dim=<n> control_dim=<m> dt=<s> seed=<k> config_hash=<h>
// followed by one comma-separated row per transition: x_t..., u_t..., x_{t+1}...
void WriteDataset(const Dataset& data, const std::filesystem::path& path);
// Throws ParseError naming the offending line.
Dataset ReadDataset(const std::filesystem::path& path);

// key=value parser shared by the text file headers.
std::string HeaderValue(const std::string& header, const std::string& key, long line);

}  // namespace mpmi

#endif  // MPMI_DATASET_H_
