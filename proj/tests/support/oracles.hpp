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

// Independent reference implementations used as test oracles. None of these
// share code with the library.

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// -- SEC-DED by parity equations and nearest-codeword search -----------------

inline bool is_codeword(const std::vector<bool>& bits) {
  const std::size_t n = bits.size();
  bool overall = false;
  for (const bool b : bits) overall ^= b;
  if (overall) return false;
  for (std::size_t check = 1; check < n; check <<= 1) {
    bool p = false;
    for (std::size_t i = 1; i < n; ++i)
      if (i & check) p ^= bits[i];
    if (p) return false;
  }
  return true;
}

// Encode by filling payload positions, then solving each check bit on its own.
inline std::vector<bool> encode(const std::vector<bool>& payload, std::size_t n) {
  std::vector<bool> bits(n, false);
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i)
    if ((i & (i - 1)) != 0) bits[i] = payload.at(k++);
  for (std::size_t check = 1; check < n; check <<= 1) {
    bool p = false;
    for (std::size_t i = 1; i < n; ++i)
      if ((i & check) && i != check) p ^= bits[i];
    bits[check] = p;
  }
  bool overall = false;
  for (std::size_t i = 1; i < n; ++i) overall ^= bits[i];
  bits[0] = overall;
  return bits;
}

inline std::size_t payload_bits(std::size_t n) {
  std::size_t checks = 1;  // overall parity
  for (std::size_t c = 1; c < n; c <<= 1) ++checks;
  return n - checks;
}

enum class Verdict { Clean, Corrected, Uncorrectable };

inline std::pair<Verdict, std::size_t> decode(std::vector<bool> bits) {
  if (is_codeword(bits)) return {Verdict::Clean, 0};
  for (std::size_t p = 0; p < bits.size(); ++p) {
    bits[p] = !bits[p];
    const bool ok = is_codeword(bits);
    bits[p] = !bits[p];
    if (ok) return {Verdict::Corrected, p};
  }
  return {Verdict::Uncorrectable, 0};
}

// -- CRC-32, bit at a time ----------------------------------------------------

inline std::uint32_t crc32_bitwise(const std::vector<std::uint8_t>& data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (const auto byte : data) {
    crc ^= byte;
    for (int k = 0; k < 8; ++k) crc = (crc & 1u) ? (crc >> 1) ^ 0xEDB88320u : crc >> 1;
  }
  return ~crc;
}

// -- grid geometry ------------------------------------------------------------

inline std::set<std::pair<int, int>> disc(int cf, int cb, int r, int frames, int bits) {
  std::set<std::pair<int, int>> out;
  for (int f = 0; f < frames; ++f)
    for (int b = 0; b < bits; ++b)
      if ((f - cf) * (f - cf) + (b - cb) * (b - cb) <= r * r) out.insert({f, b});
  return out;
}

// -- PI(D) cruise loop in double precision -------------------------------------

struct LoopParams {
  double kp = 4.0;
  double ki = 0.004;
  double kd = 0.0;
  double u_min = -100.0;
  double u_max = 100.0;
  double a = 0.999;
  double b = 0.001;
};

struct LoopSample {
  double setpoint;
  double measured;
  double actuation;
};

inline std::vector<LoopSample> simulate_loop(const LoopParams& p, double low, double high,
                                             long half_period, long ticks, double v0 = 0.0) {
  std::vector<LoopSample> out;
  out.reserve(static_cast<std::size_t>(ticks));
  double v = v0, integ = 0.0, prev = 0.0;
  for (long t = 0; t < ticks; ++t) {
    const double sp = ((t / half_period) % 2 == 0) ? low : high;
    const double e = sp - v;
    const double next_integ = integ + e;
    const double u = p.kp * e + p.ki * next_integ + p.kd * (e - prev);
    const double clamped = std::clamp(u, p.u_min, p.u_max);
    if (clamped == u) integ = next_integ;
    prev = e;
    out.push_back({sp, v, clamped});
    v = p.a * v + p.b * clamped;
  }
  return out;
}

}  // namespace oracle
