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

#include "mpmi/track.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mpmi/errors.h"

namespace mpmi {

namespace {

// Uniform double in [0, 1) from raw generator bits; portable across
// standard libraries unlike std::uniform_real_distribution.
double Unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double CatmullRom(double p0, double p1, double p2, double p3, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

}  // namespace

Track GenerateTrack(std::uint64_t seed, const TrackParams& params) {
  if (!(params.half_width > 0.0)) throw ConfigError("track half_width must be positive");
  if (!(params.radius > 0.0)) throw ConfigError("track radius must be positive");
  if (!(params.noise >= 0.0 && params.noise < 1.0)) {
    throw ConfigError("track noise must lie in [0, 1)");
  }
  if (params.checkpoints < 3) throw ConfigError("track needs at least 3 checkpoints");

  std::mt19937_64 rng(seed);
  const int n = params.checkpoints;
  std::vector<double> radii(n);
  for (double& r : radii) r = params.radius * (1.0 + params.noise * (2.0 * Unit(rng) - 1.0));

  auto radius_at = [&](double angle) {
    const double pos = angle / (2.0 * std::numbers::pi) * n;
    const int i = std::min(static_cast<int>(std::floor(pos)), n - 1);
    const double t = pos - i;
    auto r = [&](int k) { return radii[((k % n) + n) % n]; };
    return CatmullRom(r(i - 1), r(i), r(i + 1), r(i + 2), t);
  };

  const double max_gap = 0.5 * params.half_width;
  const double longest = 2.0 * std::numbers::pi * params.radius * (1.0 + params.noise);
  int count = std::max(16, static_cast<int>(std::ceil(longest / max_gap)));
  Track track;
  track.seed = seed;
  track.half_width = params.half_width;
  track.closed = true;
  for (;;) {
    track.centerline.clear();
    for (int k = 0; k < count; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / count;
      const double r = radius_at(angle);
      track.centerline.push_back({r * std::cos(angle), r * std::sin(angle)});
    }
    track.centerline.push_back(track.centerline.front());
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < track.centerline.size(); ++k) {
      const auto& a = track.centerline[k];
      const auto& b = track.centerline[k + 1];
      worst = std::max(worst, std::hypot(b[0] - a[0], b[1] - a[1]));
    }
    if (worst <= max_gap) break;
    count *= 2;
  }
  return track;
}

std::vector<double> TrackCurvature(const Track& track) {
  const auto& c = track.centerline;
  std::vector<double> out;
  if (c.size() < 3) return out;
  // Closed tracks repeat the first point at the end; skip the duplicate.
  const std::size_t n = track.closed ? c.size() - 1 : c.size();
  auto at = [&](std::size_t i) -> const std::array<double, 2>& { return c[i % n]; };
  const std::size_t begin = track.closed ? 0 : 1;
  const std::size_t end = track.closed ? n : n - 1;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& a = at(i + n - 1);
    const auto& b = at(i);
    const auto& d = at(i + 1);
    const double ab = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double bd = std::hypot(d[0] - b[0], d[1] - b[1]);
    const double ad = std::hypot(d[0] - a[0], d[1] - a[1]);
    const double cross = (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]);
    out.push_back(2.0 * cross / (ab * bd * ad));
  }
  return out;
}

double PointSegmentDistance(double px, double py, const std::array<double, 2>& a,
                            const std::array<double, 2>& b) {
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a[0]) * dx + (py - a[1]) * dy) / len2, 0.0, 1.0);
  return std::hypot(px - (a[0] + t * dx), py - (a[1] + t * dy));
}

double BruteForceCenterlineDistance(const Track& track, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < track.centerline.size(); ++k) {
    best = std::min(best, PointSegmentDistance(x, y, track.centerline[k], track.centerline[k + 1]));
  }
  return best;
}

CenterlineIndex::CenterlineIndex(const Track& track, double radius)
    : points_(track.centerline), radius_(radius) {
  if (points_.size() < 2) throw ConfigError("centerline needs at least two points");
  if (!(radius > 0.0)) throw ConfigError("index radius must be positive");
  cell_ = radius;
  double min_x = points_[0][0], max_x = min_x, min_y = points_[0][1], max_y = min_y;
  for (const auto& p : points_) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  origin_x_ = min_x - radius - cell_;
  origin_y_ = min_y - radius - cell_;
  nx_ = static_cast<int>(std::ceil((max_x + radius + cell_ - origin_x_) / cell_)) + 1;
  ny_ = static_cast<int>(std::ceil((max_y + radius + cell_ - origin_y_) / cell_)) + 1;

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    const auto& a = points_[k];
    const auto& b = points_[k + 1];
    // Every cell within `radius` of the segment's bounding box.
    const int x0 = static_cast<int>(std::floor((std::min(a[0], b[0]) - radius - origin_x_) / cell_));
    const int x1 = static_cast<int>(std::floor((std::max(a[0], b[0]) + radius - origin_x_) / cell_));
    const int y0 = static_cast<int>(std::floor((std::min(a[1], b[1]) - radius - origin_y_) / cell_));
    const int y1 = static_cast<int>(std::floor((std::max(a[1], b[1]) + radius - origin_y_) / cell_));
    for (int ix = std::max(0, x0); ix <= std::min(nx_ - 1, x1); ++ix) {
      for (int iy = std::max(0, y0); iy <= std::min(ny_ - 1, y1); ++iy) {
        buckets[static_cast<std::size_t>(iy) * nx_ + ix].push_back(static_cast<int>(k));
      }
    }
  }
  cell_start_.reserve(buckets.size() + 1);
  cell_start_.push_back(0);
  for (const auto& b : buckets) {
    cell_segments_.insert(cell_segments_.end(), b.begin(), b.end());
    cell_start_.push_back(static_cast<int>(cell_segments_.size()));
  }
}

double CenterlineIndex::Distance(double x, double y) const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double fx = (x - origin_x_) / cell_;
  const double fy = (y - origin_y_) / cell_;
  if (!(fx >= 0.0 && fy >= 0.0 && fx < nx_ && fy < ny_)) return kInf;
  const std::size_t c = static_cast<std::size_t>(fy) * nx_ + static_cast<std::size_t>(fx);
  double best = kInf;
  for (int s = cell_start_[c]; s < cell_start_[c + 1]; ++s) {
    const int k = cell_segments_[s];
    best = std::min(best, PointSegmentDistance(x, y, points_[k], points_[k + 1]));
  }
  return best <= radius_ ? best : kInf;
}

}  // namespace mpmi
