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

#include "mpmi/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "mpmi/errors.h"

namespace mpmi {

namespace {

using nlohmann::json;

constexpr int kLogVersion = 1;

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Sums in a fixed order so the result does not depend on input order.
std::vector<double> Sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double NumberOrNan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string SeedList(const std::vector<std::uint64_t>& seeds) {
  std::ostringstream s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s << (i ? "," : "") << seeds[i];
  return seeds.empty() ? "none" : s.str();
}

json RunInfoJson(const RunInfo& info) {
  return {{"config_hash", info.config_hash}, {"seeds", info.seeds}};
}

}  // namespace

double MeanDeviation(const TrialRecord& trial) {
  if (trial.ticks.empty()) return 0.0;
  double s = 0.0;
  for (const TickRecord& t : trial.ticks) s += t.deviation_to_closest_safe;
  return s / static_cast<double>(trial.ticks.size());
}

double MeanPercentSafe(const TrialRecord& trial) {
  if (trial.ticks.empty()) return 0.0;
  double s = 0.0;
  for (const TickRecord& t : trial.ticks) s += t.percent_safe;
  return s / static_cast<double>(trial.ticks.size());
}

MetricSummary SummarizeGroup(const std::vector<const TrialRecord*>& trials,
                             const SummaryOptions& options) {
  if (trials.empty()) throw ConfigError("cannot summarize an empty group");
  MetricSummary m;
  m.env = trials.front()->env;
  m.mode = trials.front()->mode;
  m.n_trials = static_cast<int>(trials.size());
  m.count_survivors_at_cap = options.count_survivors_at_cap;
  std::vector<double> times, deviations, safe;
  int survived = 0;
  for (const TrialRecord* t : trials) {
    if (t->env != m.env) throw ConfigError("summary group mixes environments");
    if (t->mode != m.mode) throw ConfigError("summary group mixes modes");
    if (t->aborted) throw ConfigError("aborted trial " + t->trial_id + " cannot be summarized");
    if (t->outcome == Outcome::kSurvived) {
      ++survived;
      if (options.count_survivors_at_cap) times.push_back(t->max_trial_time);
    } else {
      times.push_back(t->duration);
    }
    deviations.push_back(MeanDeviation(*t));
    safe.push_back(MeanPercentSafe(*t));
  }
  m.success_rate = static_cast<double>(survived) / static_cast<double>(trials.size());
  m.mean_time_to_failure =
      times.empty() ? std::numeric_limits<double>::quiet_NaN() : Mean(Sorted(times));
  deviations = Sorted(deviations);
  safe = Sorted(safe);
  m.mean_deviation = Mean(deviations);
  m.std_deviation = SampleStd(deviations, m.mean_deviation);
  m.mean_percent_safe = Mean(safe);
  m.std_percent_safe = SampleStd(safe, m.mean_percent_safe);
  return m;
}

std::vector<MetricSummary> Summarize(const std::vector<TrialRecord>& trials,
                                     const SummaryOptions& options) {
  if (trials.empty()) throw ConfigError("cannot summarize an empty trial list");
  std::map<std::pair<int, int>, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& t : trials) {
    groups[{static_cast<int>(t.env), static_cast<int>(t.mode)}].push_back(&t);
  }
  std::vector<MetricSummary> out;
  for (const auto& [key, members] : groups) out.push_back(SummarizeGroup(members, options));
  return out;
}

std::vector<std::string> TickColumns(const EnvSpec& spec) {
  std::vector<std::string> cols = {"tick", "t"};
  for (const std::string& s : StateNames(spec.id)) cols.push_back("state." + s);
  for (const std::string& c : ControlNames(spec.id)) cols.push_back("u_h." + c);
  for (const std::string& c : ControlNames(spec.id)) cols.push_back("u_r." + c);
  for (const char* c : {"deviation", "deviation_to_closest_safe", "percent_safe", "n_safe",
                        "fallback_used", "input_clamped", "nearest_safe", "assisted",
                        "compute_time"}) {
    cols.push_back(c);
  }
  return cols;
}

void WriteTrialLog(const std::vector<TrialRecord>& trials, const RunInfo& info,
                   const std::filesystem::path& path) {
  if (trials.empty()) throw ConfigError("refusing to write an empty trial log");
  const EnvId env = trials.front().env;
  for (const TrialRecord& t : trials) {
    if (t.env != env) throw ConfigError("a trial log holds one environment");
  }
  const EnvSpec spec = EnvSpec::Defaults(env);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trial log " + path.string());
  json header = RunInfoJson(info);
  header["type"] = "header";
  header["format"] = "mpmi-trial-log";
  header["version"] = kLogVersion;
  header["env"] = ToString(env);
  header["state_dim"] = spec.state_dim();
  header["control_dim"] = spec.control_dim();
  header["columns"] = TickColumns(spec);
  out << header.dump() << "\n";
  for (const TrialRecord& t : trials) {
    json rec = {{"type", "trial"},
                {"trial_id", t.trial_id},
                {"env", ToString(t.env)},
                {"mode", ToString(t.mode)},
                {"seed", t.seed},
                {"outcome", ToString(t.outcome)},
                {"duration", t.duration},
                {"max_trial_time", t.max_trial_time},
                {"n_ticks", t.ticks.size()},
                {"overrun_ticks", t.overrun_ticks},
                {"aborted", t.aborted}};
    out << rec.dump() << "\n";
    for (const TickRecord& k : t.ticks) {
      json row = json::array();
      row.push_back(k.tick);
      row.push_back(k.t);
      for (double v : k.state) row.push_back(v);
      for (double v : k.u_h) row.push_back(v);
      for (double v : k.u_r) row.push_back(v);
      row.push_back(k.deviation);
      row.push_back(k.deviation_to_closest_safe);
      row.push_back(k.percent_safe);
      row.push_back(k.n_safe);
      row.push_back(k.fallback_used ? 1 : 0);
      row.push_back(k.input_clamped ? 1 : 0);
      row.push_back(k.nearest_safe ? 1 : 0);
      row.push_back(k.assisted ? 1 : 0);
      row.push_back(k.compute_time);
      out << row.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing trial log " + path.string());
}

std::vector<TrialRecord> ReadTrialLog(const std::filesystem::path& path, RunInfo* info) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trial log " + path.string());
  std::string line;
  long line_no = 0;
  auto parse = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
  };
  if (!std::getline(in, line)) throw ParseError("empty trial log", 1);
  ++line_no;
  const json header = parse(line);
  if (header.value("format", "") != "mpmi-trial-log" || header.value("version", 0) != kLogVersion) {
    throw ParseError("not an mpmi trial log (v1)", line_no);
  }
  const int n = header.at("state_dim").get<int>();
  const int m = header.at("control_dim").get<int>();
  const std::size_t width = header.at("columns").size();
  if (info) {
    info->config_hash = header.value("config_hash", "");
    info->seeds = header.value("seeds", std::vector<std::uint64_t>{});
  }
  std::vector<TrialRecord> trials;
  std::size_t expected_ticks = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = parse(line);
      if (j.is_object()) {
        if (!trials.empty() && trials.back().ticks.size() != expected_ticks) {
          throw ParseError("trial " + trials.back().trial_id + " is missing ticks", line_no);
        }
        if (j.value("type", "") != "trial") throw ParseError("expected a trial record", line_no);
        TrialRecord t;
        t.trial_id = j.at("trial_id").get<std::string>();
        t.env = EnvIdFromString(j.at("env").get<std::string>());
        t.mode = ModeFromString(j.at("mode").get<std::string>());
        t.seed = j.at("seed").get<std::uint64_t>();
        t.outcome = OutcomeFromString(j.at("outcome").get<std::string>());
        t.duration = j.at("duration").get<double>();
        t.max_trial_time = j.at("max_trial_time").get<double>();
        t.overrun_ticks = j.at("overrun_ticks").get<int>();
        t.aborted = j.value("aborted", false);
        expected_ticks = j.at("n_ticks").get<std::size_t>();
        t.ticks.reserve(expected_ticks);
        trials.push_back(std::move(t));
        continue;
      }
      if (!j.is_array() || j.size() != width || trials.empty()) {
        throw ParseError("tick row does not match the header", line_no);
      }
      TickRecord k;
      std::size_t c = 0;
      k.tick = j[c++].get<std::uint64_t>();
      k.t = j[c++].get<double>();
      k.state.resize(n);
      for (int i = 0; i < n; ++i) k.state[i] = j[c++].get<double>();
      k.u_h.resize(m);
      for (int i = 0; i < m; ++i) k.u_h[i] = j[c++].get<double>();
      k.u_r.resize(m);
      for (int i = 0; i < m; ++i) k.u_r[i] = j[c++].get<double>();
      k.deviation = j[c++].get<double>();
      k.deviation_to_closest_safe = j[c++].get<double>();
      k.percent_safe = j[c++].get<double>();
      k.n_safe = j[c++].get<int>();
      k.fallback_used = j[c++].get<int>() != 0;
      k.input_clamped = j[c++].get<int>() != 0;
      k.nearest_safe = j[c++].get<int>() != 0;
      k.assisted = j[c++].get<int>() != 0;
      k.compute_time = j[c++].get<double>();
      trials.back().ticks.push_back(std::move(k));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field: ") + e.what(), line_no);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line_no);
  }
  if (!trials.empty() && trials.back().ticks.size() != expected_ticks) {
    throw ParseError("trial " + trials.back().trial_id + " is missing ticks", line_no);
  }
  return trials;
}

std::string FormatSummaryTable(const std::vector<MetricSummary>& summaries, const RunInfo& info) {
  std::ostringstream s;
  s << "# mpmi summary  config_hash=" << info.config_hash << "  seeds=" << SeedList(info.seeds)
    << "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-10s %6s %8s %12s %18s %18s\n", "environment",
                "condition", "trials", "success", "mean_ttf_s", "avg_deviation", "avg_pct_safe");
  s << buf;
  for (const MetricSummary& m : summaries) {
    char dev[64], safe[64], ttf[32];
    std::snprintf(dev, sizeof dev, "%.2f ± %.2f", m.mean_deviation, m.std_deviation);
    std::snprintf(safe, sizeof safe, "%.2f ± %.2f", m.mean_percent_safe, m.std_percent_safe);
    if (std::isfinite(m.mean_time_to_failure)) {
      std::snprintf(ttf, sizeof ttf, "%.2f", m.mean_time_to_failure);
    } else {
      std::snprintf(ttf, sizeof ttf, "n/a");
    }
    // "±" is two bytes wide in UTF-8 but one column on screen.
    std::snprintf(buf, sizeof buf, "%-12s %-10s %6d %8.2f %12s %19s %19s\n",
                  ToString(m.env).c_str(), ToString(m.mode).c_str(), m.n_trials, m.success_rate,
                  ttf, dev, safe);
    s << buf;
  }
  s << "# mean_ttf_s counts survivors at the trial cap: "
    << (summaries.empty() || summaries.front().count_survivors_at_cap ? "yes" : "no") << "\n";
  return s.str();
}

std::string SummaryJson(const std::vector<MetricSummary>& summaries, const RunInfo& info) {
  json j = RunInfoJson(info);
  j["format"] = "mpmi-summary";
  j["version"] = kLogVersion;
  j["groups"] = json::array();
  for (const MetricSummary& m : summaries) {
    j["groups"].push_back({{"env", ToString(m.env)},
                           {"mode", ToString(m.mode)},
                           {"n_trials", m.n_trials},
                           {"success_rate", m.success_rate},
                           {"mean_time_to_failure", NumberOrNull(m.mean_time_to_failure)},
                           {"mean_deviation", m.mean_deviation},
                           {"std_deviation", m.std_deviation},
                           {"mean_percent_safe", m.mean_percent_safe},
                           {"std_percent_safe", m.std_percent_safe},
                           {"count_survivors_at_cap", m.count_survivors_at_cap}});
  }
  return j.dump(2) + "\n";
}

std::vector<MetricSummary> ParseSummaryJson(const std::string& text) {
  std::vector<MetricSummary> out;
  try {
    const json j = json::parse(text);
    for (const json& g : j.at("groups")) {
      MetricSummary m;
      m.env = EnvIdFromString(g.at("env").get<std::string>());
      m.mode = ModeFromString(g.at("mode").get<std::string>());
      m.n_trials = g.at("n_trials").get<int>();
      m.success_rate = g.at("success_rate").get<double>();
      m.mean_time_to_failure = NumberOrNan(g.at("mean_time_to_failure"));
      m.mean_deviation = g.at("mean_deviation").get<double>();
      m.std_deviation = g.at("std_deviation").get<double>();
      m.mean_percent_safe = g.at("mean_percent_safe").get<double>();
      m.std_percent_safe = g.at("std_percent_safe").get<double>();
      m.count_survivors_at_cap = g.at("count_survivors_at_cap").get<bool>();
      out.push_back(m);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad summary: ") + e.what(), 0);
  }
  return out;
}

std::vector<MetricSummary> Export(const std::vector<TrialRecord>& trials, const RunInfo& info,
                                  const SummaryOptions& options, const std::filesystem::path& dir) {
  if (trials.empty()) throw ConfigError("refusing to export an empty trial list");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  const std::vector<MetricSummary> summaries = Summarize(trials, options);
  WriteTrialLog(trials, info, dir / "trials.jsonl");
  for (const auto& [name, body] :
       {std::pair{"summary.txt", FormatSummaryTable(summaries, info)},
        std::pair{"summary.json", SummaryJson(summaries, info)}}) {
    std::ofstream out(dir / name);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  }
  return summaries;
}

}  // namespace mpmi
