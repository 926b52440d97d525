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

#ifndef MPMI_TRACK_H_
#define MPMI_TRACK_H_

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace mpmi {

struct TrackParams {
  double radius = 20.0;
  // Checkpoint radii are drawn uniformly from radius * (1 +/- noise).
  double noise = 0.3;
  int checkpoints = 12;
  double half_width = 2.5;
};

struct Track {
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> centerline;
  double half_width = 0.0;
  bool closed = true;
};

// Radially perturbed circle. Checkpoint radii at equally spaced angles are
// interpolated with a periodic Catmull-Rom spline in angle, then the curve is
// sampled at equally spaced angles until consecutive waypoints are at most
// half_width / 2 apart. With noise = 0 the track is an exact circle. The last
// waypoint repeats the first. Throws ConfigError on degenerate parameters.
Track GenerateTrack(std::uint64_t seed, const TrackParams& params);

// Menger curvature at every interior waypoint (closed tracks wrap around).
std::vector<double> TrackCurvature(const Track& track);

double PointSegmentDistance(double px, double py, const std::array<double, 2>& a,
                            const std::array<double, 2>& b);

// Exhaustive distance from a point to the centerline polyline.
double BruteForceCenterlineDistance(const Track& track, double x, double y);

// Uniform-grid index over centerline segments. Distance() is exact whenever
// the true distance is at most `radius`, and +infinity otherwise.
class CenterlineIndex {
 public:
  CenterlineIndex() = default;
  CenterlineIndex(const Track& track, double radius);

  double Distance(double x, double y) const;
  double radius() const { return radius_; }

 private:
  std::vector<std::array<double, 2>> points_;
  double radius_ = 0.0;
  double cell_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  // CSR layout: segments of cell c are cell_segments_[cell_start_[c], cell_start_[c+1]).
  std::vector<int> cell_start_;
  std::vector<int> cell_segments_;
};

}  // namespace mpmi

#endif  // MPMI_TRACK_H_
