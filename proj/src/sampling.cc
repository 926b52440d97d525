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

#include "mpmi/sampling.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpmi/errors.h"

namespace mpmi {

ControlSpace::ControlSpace(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  if (intervals_.empty()) throw ConfigError("control space has no dimensions");
  measure_ = 1.0;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& iv = intervals_[i];
    if (!std::isfinite(iv.low) || !std::isfinite(iv.high) || !(iv.high > iv.low)) {
      throw ConfigError("control interval " + std::to_string(i) +
                        " must satisfy low < high");
    }
    measure_ *= iv.high - iv.low;
  }
}

ControlSpace ControlSpace::BalanceBot() { return ControlSpace({{-1.0, 1.0}}); }

ControlSpace ControlSpace::RaceCar() {
  return ControlSpace({{-1.0, 1.0}, {0.0, 1.0}, {-1.0, 0.0}});
}

bool ControlSpace::Contains(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dims()) return false;
  for (int i = 0; i < dims(); ++i) {
    if (!(u[i] >= intervals_[i].low && u[i] <= intervals_[i].high)) return false;
  }
  return true;
}

Eigen::VectorXd ControlSpace::Clamp(std::span<const double> u, bool* clamped) const {
  if (static_cast<int>(u.size()) != dims()) {
    throw DomainError("control has " + std::to_string(u.size()) +
                      " components, expected " + std::to_string(dims()));
  }
  Eigen::VectorXd out(dims());
  bool moved = false;
  for (int i = 0; i < dims(); ++i) {
    double v = u[i];
    // NaN has no nearest point in the box; map it to the lower bound.
    if (std::isnan(v)) {
      v = intervals_[i].low;
      moved = true;
    }
    const double c = std::clamp(v, intervals_[i].low, intervals_[i].high);
    if (c != v) moved = true;
    out[i] = c;
  }
  if (clamped) *clamped = moved;
  return out;
}

SampleSet SampleSet::Grid(const ControlSpace& space, std::vector<int> per_dim_counts) {
  if (static_cast<int>(per_dim_counts.size()) != space.dims()) {
    throw ConfigError("grid needs one count per control dimension");
  }
  SampleSet s;
  s.space_ = space;
  s.counts_ = std::move(per_dim_counts);
  std::int64_t total = 1;
  for (int d = 0; d < space.dims(); ++d) {
    const int n = s.counts_[d];
    if (n < 2) {
      throw ConfigError("grid count for dimension " + std::to_string(d) +
                        " must be at least 2 so both endpoints are sampled");
    }
    const Interval& iv = space.intervals()[d];
    std::vector<double> axis(n);
    for (int k = 0; k < n; ++k) {
      axis[k] = iv.low + (iv.high - iv.low) * static_cast<double>(k) / (n - 1);
    }
    axis.back() = iv.high;
    s.axes_.push_back(std::move(axis));
    total *= n;
    if (total > (std::int64_t{1} << 30)) throw ConfigError("grid too large");
  }
  s.size_ = static_cast<int>(total);
  const int m = space.dims();
  s.samples_.resize(static_cast<std::size_t>(total) * m);
  std::vector<int> idx(m, 0);
  for (int i = 0; i < s.size_; ++i) {
    for (int d = 0; d < m; ++d) s.samples_[static_cast<std::size_t>(i) * m + d] = s.axes_[d][idx[d]];
    for (int d = m - 1; d >= 0; --d) {
      if (++idx[d] < s.counts_[d]) break;
      idx[d] = 0;
    }
  }
  return s;
}

Eigen::VectorXd SampleSet::SampleVector(int index) const {
  auto s = sample(index);
  return Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
}

int SampleSet::FlatIndex(std::span<const int> grid_index) const {
  int flat = 0;
  for (int d = 0; d < dims(); ++d) flat = flat * counts_[d] + grid_index[d];
  return flat;
}

double DeviationBound(double measure, std::int64_t n_samples) {
  if (n_samples < 1) throw ConfigError("deviation bound needs at least one sample");
  return measure / (2.0 * static_cast<double>(n_samples));
}

double DeviationBound(const ControlSpace& space, std::int64_t n_samples) {
  return DeviationBound(space.measure(), n_samples);
}

HalfSpacing GridHalfSpacing(const SampleSet& samples) {
  HalfSpacing h;
  double sq = 0.0;
  for (int d = 0; d < samples.dims(); ++d) {
    const Interval& iv = samples.space().intervals()[d];
    const double half = (iv.high - iv.low) / (2.0 * (samples.per_dim_counts()[d] - 1));
    h.per_dim.push_back(half);
    sq += half * half;
  }
  h.worst_case = std::sqrt(sq);
  return h;
}

NearestSample FindNearestSample(const SampleSet& samples, std::span<const double> u) {
  NearestSample out;
  const Eigen::VectorXd q = samples.space().Clamp(u, &out.clamped);
  const int m = samples.dims();
  int flat = 0;
  double sq = 0.0;
  for (int d = 0; d < m; ++d) {
    const int n = samples.per_dim_counts()[d];
    const Interval& iv = samples.space().intervals()[d];
    const double t = (q[d] - iv.low) / (iv.high - iv.low) * (n - 1);
    int k = std::clamp(static_cast<int>(std::floor(t)), 0, n - 1);
    // Compare against the actual neighbouring coordinates so rounding in t
    // cannot flip the choice; ties go to the lower index.
    if (k + 1 < n) {
      const double below = std::abs(q[d] - samples.coordinate(d, k));
      const double above = std::abs(samples.coordinate(d, k + 1) - q[d]);
      if (above < below) ++k;
    }
    if (k > 0) {
      const double here = std::abs(q[d] - samples.coordinate(d, k));
      const double lower = std::abs(q[d] - samples.coordinate(d, k - 1));
      if (lower <= here) --k;
    }
    const double diff = q[d] - samples.coordinate(d, k);
    sq += diff * diff;
    flat = flat * n + k;
  }
  out.index = flat;
  out.distance = std::sqrt(sq);
  return out;
}

}  // namespace mpmi
