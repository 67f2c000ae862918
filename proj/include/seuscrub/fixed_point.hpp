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

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace seuscrub {

constexpr std::int32_t saturate32(std::int64_t v) {
  if (v > std::numeric_limits<std::int32_t>::max())
    return std::numeric_limits<std::int32_t>::max();
  if (v < std::numeric_limits<std::int32_t>::min())
    return std::numeric_limits<std::int32_t>::min();
  return static_cast<std::int32_t>(v);
}

/// Signed Q16.16 word with saturating arithmetic, as on the DUT datapath.
class Q16 {
 public:
  static constexpr int kFracBits = 16;
  static constexpr std::int64_t kOne = std::int64_t{1} << kFracBits;

  constexpr Q16() = default;

  static constexpr Q16 from_raw(std::int32_t raw) {
    Q16 q;
    q.raw_ = raw;
    return q;
  }
  static Q16 from_double(double v) {
    return from_raw(saturate32(std::llround(v * static_cast<double>(kOne))));
  }

  constexpr std::int32_t raw() const { return raw_; }
  constexpr std::uint32_t bits() const { return static_cast<std::uint32_t>(raw_); }
  constexpr double to_double() const {
    return static_cast<double>(raw_) / static_cast<double>(kOne);
  }

  friend constexpr Q16 operator+(Q16 a, Q16 b) {
    return from_raw(saturate32(std::int64_t{a.raw_} + b.raw_));
  }
  friend constexpr Q16 operator-(Q16 a, Q16 b) {
    return from_raw(saturate32(std::int64_t{a.raw_} - b.raw_));
  }
  /// Product rounded to nearest (ties toward +inf), saturated.
  friend constexpr Q16 operator*(Q16 a, Q16 b) {
    const std::int64_t p = std::int64_t{a.raw_} * b.raw_;
    return from_raw(saturate32((p + (kOne >> 1)) >> kFracBits));
  }

  constexpr auto operator<=>(const Q16&) const = default;

 private:
  std::int32_t raw_ = 0;
};

}  // namespace seuscrub
