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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace seuscrub::memory {

/// Virtex-5 configuration frame length in bits.
inline constexpr std::uint32_t kDefaultFrameSize = 1312;
inline constexpr std::uint32_t kMinFrameSize = 16;

struct FrameAddress {
  std::uint32_t index = 0;
  auto operator<=>(const FrameAddress&) const = default;
};

/// A single configuration cell. Frames are grid columns, bits are rows.
struct BitAddress {
  std::uint32_t frame = 0;
  std::uint32_t bit = 0;
  auto operator<=>(const BitAddress&) const = default;
};

/// Device dimensions; the factory methods reject out-of-range addresses.
class Geometry {
 public:
  Geometry(std::uint32_t frame_count, std::uint32_t frame_size);

  std::uint32_t frame_count() const { return frame_count_; }
  std::uint32_t frame_size() const { return frame_size_; }
  std::uint64_t bit_count() const {
    return std::uint64_t{frame_count_} * frame_size_;
  }

  FrameAddress frame(std::uint32_t index) const;
  BitAddress bit(std::uint32_t frame, std::uint32_t bit) const;
  bool contains(const BitAddress& a) const {
    return a.frame < frame_count_ && a.bit < frame_size_;
  }

  bool operator==(const Geometry&) const = default;

 private:
  std::uint32_t frame_count_;
  std::uint32_t frame_size_;
};

/// Packed bit vector, LSB-first within 64-bit words.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64) {}

  std::size_t size() const { return size_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i % 64);
    words_[i / 64] = v ? (words_[i / 64] | m) : (words_[i / 64] & ~m);
  }
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  std::span<std::uint64_t> words() { return words_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const BitVector&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// frame_count x frame_size bit grid; each frame is padded to whole words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::uint32_t frame_count, std::uint32_t frame_size);

  /// Uniform random bits, deterministic in seed.
  static BitMatrix random(std::uint32_t frame_count, std::uint32_t frame_size,
                          std::uint64_t seed);

  std::uint32_t frame_count() const { return frame_count_; }
  std::uint32_t frame_size() const { return frame_size_; }
  std::size_t words_per_frame() const { return words_per_frame_; }

  bool get(std::uint32_t frame, std::uint32_t bit) const {
    return (words_[index(frame, bit)] >> (bit % 64)) & 1U;
  }
  void set(std::uint32_t frame, std::uint32_t bit, bool v);
  void flip(std::uint32_t frame, std::uint32_t bit) {
    words_[index(frame, bit)] ^= std::uint64_t{1} << (bit % 64);
  }

  std::span<const std::uint64_t> frame(std::uint32_t f) const {
    return {words_.data() + f * words_per_frame_, words_per_frame_};
  }
  std::span<std::uint64_t> frame(std::uint32_t f) {
    return {words_.data() + f * words_per_frame_, words_per_frame_};
  }
  void set_frame(std::uint32_t f, const BitVector& bits);
  BitVector frame_bits(std::uint32_t f) const;

  /// Frame-major continuous bit stream packed LSB-first into bytes.
  std::vector<std::uint8_t> pack() const;
  static BitMatrix unpack(std::span<const std::uint8_t> bytes,
                          std::uint32_t frame_count, std::uint32_t frame_size);

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t index(std::uint32_t frame, std::uint32_t bit) const {
    return frame * words_per_frame_ + bit / 64;
  }

  std::uint32_t frame_count_ = 0;
  std::uint32_t frame_size_ = 0;
  std::size_t words_per_frame_ = 0;
  std::vector<std::uint64_t> words_;
};

// ---------------------------------------------------------------------------
// SEC-DED

/// Extended Hamming layout over one frame: position 0 holds the overall
/// parity, power-of-two positions hold Hamming check bits, the remaining
/// positions carry payload in increasing order.
class EccLayout {
 public:
  explicit EccLayout(std::uint32_t frame_size = kDefaultFrameSize);

  std::uint32_t frame_size() const { return frame_size_; }
  std::uint32_t payload_bits() const {
    return static_cast<std::uint32_t>(data_positions_.size());
  }
  /// Hamming check bits plus the overall parity bit.
  std::uint32_t check_bits() const { return frame_size_ - payload_bits(); }
  std::span<const std::uint32_t> data_positions() const {
    return data_positions_;
  }

 private:
  std::uint32_t frame_size_;
  std::vector<std::uint32_t> data_positions_;
};

struct DecodeResult {
  enum class Status { Clean, Corrected, DetectedUncorrectable };
  Status status = Status::Clean;
  std::uint32_t position = 0;  // valid for Corrected

  bool operator==(const DecodeResult&) const = default;
};

std::string to_string(DecodeResult::Status s);

/// XOR of the indices of all set bits and the parity of the set-bit count.
struct Syndrome {
  std::uint32_t hamming = 0;
  bool parity = false;
};

Syndrome frame_syndrome(std::span<const std::uint64_t> frame_words);
DecodeResult classify_syndrome(const Syndrome& s, std::uint32_t frame_size);

BitVector ecc_encode_frame(const EccLayout& layout, const BitVector& payload);
DecodeResult ecc_decode_frame(const EccLayout& layout, const BitVector& frame);
BitVector ecc_extract_payload(const EccLayout& layout, const BitVector& frame);

// ---------------------------------------------------------------------------
// CRC-32 (reflected 0x04C11DB7, init and final XOR all-ones)

std::uint32_t crc32(std::span<const std::uint8_t> bytes,
                    std::uint32_t crc = 0);

// ---------------------------------------------------------------------------

/// Golden image with a valid SEC-DED codeword in every frame.
BitMatrix generate_encoded_image(std::uint32_t frame_count,
                                 std::uint32_t frame_size, std::uint64_t seed);

/// Raw image files: frame-major, LSB-first packing, exact length.
BitMatrix read_raw_image(const std::filesystem::path& path,
                         std::uint32_t frame_count, std::uint32_t frame_size);
void write_raw_image(const std::filesystem::path& path, const BitMatrix& image);

/// Live configuration memory against an immutable golden reference.
///
/// The diff set (cells where live != golden) is maintained incrementally so
/// hamming distance, dirty frames and per-frame syndromes stay cheap.
class ConfigMemory {
 public:
  explicit ConfigMemory(BitMatrix golden);

  const Geometry& geometry() const { return geometry_; }
  const EccLayout& layout() const { return *shared_->layout; }
  const BitMatrix& live() const { return live_; }
  const BitMatrix& golden() const { return shared_->golden; }

  const std::set<BitAddress>& diff() const { return diff_; }
  std::size_t hamming_distance() const { return diff_.size(); }
  std::uint32_t frame_diff_count(std::uint32_t frame) const {
    return frame_diff_[frame];
  }
  std::vector<std::uint32_t> dirty_frames() const;
  std::vector<BitAddress> frame_diff(std::uint32_t frame) const;

  /// Inverts every target; all targets are validated before any is flipped.
  const std::set<BitAddress>& flip_bits(std::span<const BitAddress> targets);
  void restore_frame(std::uint32_t frame);
  void restore_all();

  /// Decode of the live frame. Uses linearity of the code:
  /// syndrome(live) = syndrome(golden) ^ syndrome(live ^ golden).
  DecodeResult decode_frame(std::uint32_t frame) const;

  std::uint32_t live_frame_crc(std::uint32_t frame) const;
  std::uint32_t golden_frame_crc(std::uint32_t frame) const {
    return shared_->frame_crc[frame];
  }

  /// Bumped on every mutation of live.
  std::uint64_t generation() const { return generation_; }

 private:
  struct Shared {
    BitMatrix golden;
    std::unique_ptr<EccLayout> layout;
    std::vector<Syndrome> golden_syndrome;
    std::vector<std::uint32_t> frame_crc;
  };

  void toggle(const BitAddress& a);

  Geometry geometry_;
  std::shared_ptr<const Shared> shared_;
  BitMatrix live_;
  std::set<BitAddress> diff_;
  std::vector<std::uint32_t> frame_diff_;
  std::uint64_t generation_ = 0;
};

ConfigMemory build_memory(std::uint32_t frame_count, std::uint32_t frame_size,
                          const BitMatrix& golden_image);

std::uint32_t device_crc(const BitMatrix& image);
inline std::uint32_t device_crc(const ConfigMemory& mem) {
  return device_crc(mem.live());
}

}  // namespace seuscrub::memory
