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

#ifndef MPMI_SAMPLING_H_
#define MPMI_SAMPLING_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mpmi {

struct Interval {
  double low;
  double high;
};

// Axis-aligned box of admissible controls.
class ControlSpace {
 public:
  ControlSpace() = default;
  // Throws ConfigError unless every interval has high > low.
  explicit ControlSpace(std::vector<Interval> intervals);

  // [-1, 1]
  static ControlSpace BalanceBot();
  // steering [-1, 1] x gas [0, 1] x brake [-1, 0]
  static ControlSpace RaceCar();

  int dims() const { return static_cast<int>(intervals_.size()); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  // Lebesgue measure of the box.
  double measure() const { return measure_; }

  bool Contains(std::span<const double> u) const;
  // Componentwise clamp into the box; reports whether anything moved.
  Eigen::VectorXd Clamp(std::span<const double> u, bool* clamped = nullptr) const;
  Eigen::VectorXd Clamp(const Eigen::VectorXd& u, bool* clamped = nullptr) const {
    return Clamp(std::span<const double>(u.data(), u.size()), clamped);
  }

 private:
  std::vector<Interval> intervals_;
  double measure_ = 0.0;
};

// Endpoint-inclusive, equally spaced Cartesian grid over a ControlSpace.
// Samples are stored row-major with the last dimension varying fastest.
class SampleSet {
 public:
  SampleSet() = default;

  // Throws ConfigError if any count is below 2 or the count list does not
  // match the space dimension.
  static SampleSet Grid(const ControlSpace& space, std::vector<int> per_dim_counts);

  const ControlSpace& space() const { return space_; }
  const std::vector<int>& per_dim_counts() const { return counts_; }
  int size() const { return size_; }
  int dims() const { return space_.dims(); }

  std::span<const double> sample(int index) const {
    return {samples_.data() + static_cast<std::size_t>(index) * dims(),
            static_cast<std::size_t>(dims())};
  }
  Eigen::VectorXd SampleVector(int index) const;
  // k-th grid coordinate along one dimension.
  double coordinate(int dim, int k) const { return axes_[dim][k]; }
  // Index of the sample at per-dimension grid indices.
  int FlatIndex(std::span<const int> grid_index) const;

 private:
  ControlSpace space_;
  std::vector<int> counts_;
  std::vector<std::vector<double>> axes_;
  std::vector<double> samples_;
  int size_ = 0;
};

// lambda(U) / (2 N): the expected-deviation figure for N uniform samples.
double DeviationBound(const ControlSpace& space, std::int64_t n_samples);
double DeviationBound(double measure, std::int64_t n_samples);

struct HalfSpacing {
  std::vector<double> per_dim;
  // Largest Euclidean distance from a point in the box to its nearest sample.
  double worst_case = 0.0;
};

HalfSpacing GridHalfSpacing(const SampleSet& samples);

struct NearestSample {
  int index = 0;
  double distance = 0.0;
  bool clamped = false;
};

// Closed-form nearest grid point, O(dims). The query is clamped into the box
// first; equidistant candidates resolve to the lower index.
NearestSample FindNearestSample(const SampleSet& samples, std::span<const double> u);

}  // namespace mpmi

#endif  // MPMI_SAMPLING_H_
