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

#include "mpmi/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mpmi/environment.h"
#include "mpmi/errors.h"

namespace mpmi {

Dataset::Dataset(EnvId env, int state_dim, int control_dim, double dt)
    : env_(env), state_dim_(state_dim), control_dim_(control_dim), dt_(dt) {}

void Dataset::Append(std::span<const double> x, std::span<const double> u,
                     std::span<const double> next) {
  if (static_cast<int>(x.size()) != state_dim_ || static_cast<int>(u.size()) != control_dim_ ||
      static_cast<int>(next.size()) != state_dim_) {
    throw DomainError("transition does not match dataset dimensions");
  }
  rows_.insert(rows_.end(), x.begin(), x.end());
  rows_.insert(rows_.end(), u.begin(), u.end());
  rows_.insert(rows_.end(), next.begin(), next.end());
}

Dataset Dataset::Slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  Dataset out(env_, state_dim_, control_dim_, dt_);
  out.seed = seed;
  out.config_hash = config_hash;
  out.rows_.assign(rows_.begin() + begin * row_width(), rows_.begin() + end * row_width());
  return out;
}

bool Dataset::Continues(std::size_t i) const {
  if (i + 1 >= size()) return false;
  auto a = next_state(i);
  auto b = state(i + 1);
  return std::equal(a.begin(), a.end(), b.begin());
}

Dataset CollectDataset(const EnvSpec& spec, const ExcitationOptions& options, long n_steps,
                       std::uint64_t seed) {
  if (n_steps <= 0) throw ConfigError("n_steps must be positive");
  spec.Validate();
  const int n = spec.state_dim();
  const int m = spec.control_dim();
  Dataset data(spec.id, n, m, spec.dt);
  data.seed = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const auto& box = spec.control_space.intervals();
  const long episode_ticks = std::max(1L, std::lround(options.max_episode_time / spec.dt));

  std::shared_ptr<const Environment> env;
  Eigen::VectorXd x, next(n), u(m), mean(m);
  long ticks_in_episode = episode_ticks;
  std::uint64_t episode = 0;
  for (long step = 0; step < n_steps; ++step) {
    if (ticks_in_episode >= episode_ticks) {
      const std::uint64_t episode_seed = seed * 0x9E3779B97F4A7C15ULL + (++episode);
      if (!env || spec.id == EnvId::kRaceCar) env = MakeEnvironment(spec, episode_seed);
      x = env->RandomSafeState(episode_seed ^ 0xA5A5A5A5ULL);
      for (int j = 0; j < m; ++j) {
        mean[j] = box[j].low + (box[j].high - box[j].low) * unit();
        u[j] = box[j].low + (box[j].high - box[j].low) * unit();
      }
      ticks_in_episode = 0;
    }
    env->Step({x.data(), static_cast<std::size_t>(n)}, {u.data(), static_cast<std::size_t>(m)},
              {next.data(), static_cast<std::size_t>(n)});
    data.Append({x.data(), static_cast<std::size_t>(n)}, {u.data(), static_cast<std::size_t>(m)},
                {next.data(), static_cast<std::size_t>(n)});
    ++ticks_in_episode;
    if (env->IsFailed(next)) {
      ticks_in_episode = episode_ticks;
    } else {
      x = next;
    }
    for (int j = 0; j < m; ++j) {
      const double width = box[j].high - box[j].low;
      u[j] += options.reversion * (mean[j] - u[j]) * spec.dt +
              options.volatility * width * std::sqrt(spec.dt) * gauss(rng);
      u[j] = std::clamp(u[j], box[j].low, box[j].high);
    }
  }
  return data;
}

namespace {

std::string FormatDouble(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string HeaderValue(const std::string& header, const std::string& key, long line) {
  std::istringstream in(header);
  std::string token;
  const std::string prefix = key + "=";
  while (in >> token) {
    if (token.rfind(prefix, 0) == 0) return token.substr(prefix.size());
  }
  throw ParseError("header is missing '" + key + "'", line);
}

void WriteDataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset to " + path.string());
  out << "# mpmi-dataset v1 env_id=" << ToString(data.env()) << " state_dim=" << data.state_dim()
      << " control_dim=" << data.control_dim() << " dt=" << FormatDouble(data.dt())
      << " seed=" << data.seed
      << " config_hash=" << (data.config_hash.empty() ? "none" : data.config_hash) << "\n";
  std::string line;
  for (std::size_t i = 0; i < data.size(); ++i) {
    line.clear();
    auto r = data.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) line += ',';
      line += FormatDouble(r[k]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing dataset to " + path.string());
}

Dataset ReadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  std::string header;
  if (!std::getline(in, header) || header.rfind("# mpmi-dataset v1", 0) != 0) {
    throw ParseError("not an mpmi dataset header", 1);
  }
  EnvId env;
  int n = 0, m = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  try {
    env = EnvIdFromString(HeaderValue(header, "env_id", 1));
    n = std::stoi(HeaderValue(header, "state_dim", 1));
    m = std::stoi(HeaderValue(header, "control_dim", 1));
    dt = std::stod(HeaderValue(header, "dt", 1));
    seed = std::stoull(HeaderValue(header, "seed", 1));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad dataset header: ") + e.what(), 1);
  }
  const EnvSpec reference = EnvSpec::Defaults(env);
  if (n != reference.state_dim() || m != reference.control_dim() || !(dt > 0.0)) {
    throw ParseError("dataset header dimensions do not match " + ToString(env), 1);
  }
  Dataset data(env, n, m, dt);
  data.seed = seed;
  data.config_hash = HeaderValue(header, "config_hash", 1);
  std::string line;
  long line_no = 1;
  std::vector<double> row(static_cast<std::size_t>(data.row_width()));
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t k = 0;
    while (p < end) {
      if (k >= row.size()) throw ParseError("too many fields", line_no);
      auto res = std::from_chars(p, end, row[k]);
      if (res.ec != std::errc()) throw ParseError("bad number", line_no);
      ++k;
      p = res.ptr;
      if (p < end) {
        if (*p != ',') throw ParseError("expected ','", line_no);
        ++p;
      }
    }
    if (k != row.size()) throw ParseError("expected " + std::to_string(row.size()) + " fields", line_no);
    data.Append(std::span<const double>(row).subspan(0, n), std::span<const double>(row).subspan(n, m),
                std::span<const double>(row).subspan(n + m, n));
  }
  return data;
}

}  // namespace mpmi
