// Copyright 2026 The seuscrub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>

namespace seuscrub::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct Proportion {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double value = 0.0;
  Interval ci;
};

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr std::uint64_t kBootstrapSeed = 0x5eed5c4b;
inline constexpr int kBootstrapResamples = 1000;

/// Wilson score interval; trials = 0 gives [0, 1].
Proportion wilson(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

double mean(std::span<const double> xs);
double median(std::span<const double> xs);

/// Percentile bootstrap interval of the mean.
Interval bootstrap_mean_ci(std::span<const double> xs, int resamples = kBootstrapResamples,
                           std::uint64_t seed = kBootstrapSeed, double level = 0.95);

/// Bootstrap interval of mean(a - b) for paired samples.
Interval paired_difference_ci(std::span<const double> a, std::span<const double> b,
                              int resamples = kBootstrapResamples,
                              std::uint64_t seed = kBootstrapSeed, double level = 0.95);

}  // namespace seuscrub::stats
