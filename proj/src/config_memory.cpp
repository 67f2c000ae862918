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

#include "seuscrub/config_memory.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <stdexcept>

#include "seuscrub/rng.hpp"

namespace seuscrub::memory {

Geometry::Geometry(std::uint32_t frame_count, std::uint32_t frame_size)
    : frame_count_(frame_count), frame_size_(frame_size) {
  if (frame_count == 0) throw std::invalid_argument("frame_count must be >= 1");
  if (frame_size < kMinFrameSize)
    throw std::invalid_argument("frame_size must be >= " +
                                std::to_string(kMinFrameSize));
}

FrameAddress Geometry::frame(std::uint32_t index) const {
  if (index >= frame_count_)
    throw std::out_of_range("frame " + std::to_string(index) +
                            " outside device of " +
                            std::to_string(frame_count_) + " frames");
  return FrameAddress{index};
}

BitAddress Geometry::bit(std::uint32_t frame, std::uint32_t bit) const {
  if (frame >= frame_count_ || bit >= frame_size_)
    throw std::out_of_range("bit (" + std::to_string(frame) + "," +
                            std::to_string(bit) + ") outside device");
  return BitAddress{frame, bit};
}

// ---------------------------------------------------------------------------

BitMatrix::BitMatrix(std::uint32_t frame_count, std::uint32_t frame_size)
    : frame_count_(frame_count),
      frame_size_(frame_size),
      words_per_frame_((frame_size + 63) / 64),
      words_(std::size_t{frame_count} * words_per_frame_) {}

BitMatrix BitMatrix::random(std::uint32_t frame_count, std::uint32_t frame_size,
                            std::uint64_t seed) {
  BitMatrix m(frame_count, frame_size);
  Rng rng(seed);
  const std::uint32_t tail = frame_size % 64;
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    auto words = m.frame(f);
    for (auto& w : words) w = rng.next_u64();
    if (tail != 0) words.back() &= (std::uint64_t{1} << tail) - 1;
  }
  return m;
}

void BitMatrix::set(std::uint32_t frame, std::uint32_t bit, bool v) {
  const std::uint64_t m = std::uint64_t{1} << (bit % 64);
  auto& w = words_[index(frame, bit)];
  w = v ? (w | m) : (w & ~m);
}

void BitMatrix::set_frame(std::uint32_t f, const BitVector& bits) {
  if (bits.size() != frame_size_)
    throw std::invalid_argument("frame length mismatch");
  auto dst = frame(f);
  auto src = bits.words();
  std::copy(src.begin(), src.end(), dst.begin());
}

BitVector BitMatrix::frame_bits(std::uint32_t f) const {
  BitVector v(frame_size_);
  auto src = frame(f);
  std::copy(src.begin(), src.end(), v.words().begin());
  return v;
}

std::vector<std::uint8_t> BitMatrix::pack() const {
  const std::uint64_t total = std::uint64_t{frame_count_} * frame_size_;
  std::vector<std::uint8_t> out((total + 7) / 8, 0);
  if (frame_size_ % 8 == 0) {
    // fast path: every frame starts on a byte boundary
    const std::size_t bytes_per_frame = frame_size_ / 8;
    for (std::uint32_t f = 0; f < frame_count_; ++f) {
      auto words = frame(f);
      for (std::size_t b = 0; b < bytes_per_frame; ++b)
        out[f * bytes_per_frame + b] =
            static_cast<std::uint8_t>(words[b / 8] >> (8 * (b % 8)));
    }
    return out;
  }
  std::uint64_t pos = 0;
  for (std::uint32_t f = 0; f < frame_count_; ++f)
    for (std::uint32_t b = 0; b < frame_size_; ++b, ++pos)
      if (get(f, b)) out[pos / 8] |= static_cast<std::uint8_t>(1U << (pos % 8));
  return out;
}

BitMatrix BitMatrix::unpack(std::span<const std::uint8_t> bytes,
                            std::uint32_t frame_count,
                            std::uint32_t frame_size) {
  const std::uint64_t total = std::uint64_t{frame_count} * frame_size;
  if (bytes.size() != (total + 7) / 8)
    throw std::invalid_argument(
        "raw image length " + std::to_string(bytes.size()) + " != expected " +
        std::to_string((total + 7) / 8) + " bytes");
  BitMatrix m(frame_count, frame_size);
  std::uint64_t pos = 0;
  for (std::uint32_t f = 0; f < frame_count; ++f)
    for (std::uint32_t b = 0; b < frame_size; ++b, ++pos)
      if ((bytes[pos / 8] >> (pos % 8)) & 1U) m.set(f, b, true);
  return m;
}

// ---------------------------------------------------------------------------

EccLayout::EccLayout(std::uint32_t frame_size) : frame_size_(frame_size) {
  if (frame_size < kMinFrameSize)
    throw std::invalid_argument("frame_size " + std::to_string(frame_size) +
                                " too small for the SEC-DED layout (min " +
                                std::to_string(kMinFrameSize) + ")");
  for (std::uint32_t p = 1; p < frame_size; ++p)
    if (!std::has_single_bit(p)) data_positions_.push_back(p);
}

std::string to_string(DecodeResult::Status s) {
  switch (s) {
    case DecodeResult::Status::Clean:
      return "Clean";
    case DecodeResult::Status::Corrected:
      return "Corrected";
    case DecodeResult::Status::DetectedUncorrectable:
      return "DetectedUncorrectable";
  }
  return "?";
}

Syndrome frame_syndrome(std::span<const std::uint64_t> frame_words) {
  Syndrome s;
  unsigned ones = 0;
  for (std::size_t w = 0; w < frame_words.size(); ++w) {
    std::uint64_t word = frame_words[w];
    ones += static_cast<unsigned>(std::popcount(word));
    while (word != 0) {
      const int tz = std::countr_zero(word);
      s.hamming ^= static_cast<std::uint32_t>(w * 64 + tz);
      word &= word - 1;
    }
  }
  s.parity = (ones & 1U) != 0;
  return s;
}

DecodeResult classify_syndrome(const Syndrome& s, std::uint32_t frame_size) {
  using Status = DecodeResult::Status;
  if (s.hamming == 0 && !s.parity) return {Status::Clean, 0};
  if (s.parity) {
    // odd error count; syndrome 0 means the parity bit itself flipped
    if (s.hamming < frame_size) return {Status::Corrected, s.hamming};
    return {Status::DetectedUncorrectable, 0};
  }
  return {Status::DetectedUncorrectable, 0};
}

BitVector ecc_encode_frame(const EccLayout& layout, const BitVector& payload) {
  if (payload.size() != layout.payload_bits())
    throw std::invalid_argument("payload has " +
                                std::to_string(payload.size()) +
                                " bits, layout expects " +
                                std::to_string(layout.payload_bits()));
  BitVector frame(layout.frame_size());
  const auto positions = layout.data_positions();
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (payload.get(i)) frame.set(positions[i], true);
  const Syndrome data = frame_syndrome(frame.words());
  for (std::uint32_t p = 1; p < layout.frame_size(); p <<= 1)
    if (data.hamming & p) frame.set(p, true);
  const Syndrome full = frame_syndrome(frame.words());
  frame.set(0, full.parity);
  return frame;
}

DecodeResult ecc_decode_frame(const EccLayout& layout, const BitVector& frame) {
  if (frame.size() != layout.frame_size())
    throw std::invalid_argument("frame has " + std::to_string(frame.size()) +
                                " bits, layout expects " +
                                std::to_string(layout.frame_size()));
  return classify_syndrome(frame_syndrome(frame.words()),
                           layout.frame_size());
}

BitVector ecc_extract_payload(const EccLayout& layout, const BitVector& frame) {
  BitVector payload(layout.payload_bits());
  const auto positions = layout.data_positions();
  for (std::size_t i = 0; i < positions.size(); ++i)
    payload.set(i, frame.get(positions[i]));
  return payload;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1U) ? (0xEDB88320U ^ (c >> 1)) : (c >> 1);
    t[i] = c;
  }
  return t;
}

constexpr auto kCrcTable = make_crc_table();

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes, std::uint32_t crc) {
  crc = ~crc;
  for (const std::uint8_t b : bytes) crc = kCrcTable[(crc ^ b) & 0xFFU] ^ (crc >> 8);
  return ~crc;
}

std::uint32_t device_crc(const BitMatrix& image) {
  const auto bytes = image.pack();
  return crc32(bytes);
}

// ---------------------------------------------------------------------------

BitMatrix generate_encoded_image(std::uint32_t frame_count,
                                 std::uint32_t frame_size, std::uint64_t seed) {
  const EccLayout layout(frame_size);
  BitMatrix image(frame_count, frame_size);
  Rng rng(seed);
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    BitVector payload(layout.payload_bits());
    for (std::uint32_t i = 0; i < layout.payload_bits(); ++i)
      payload.set(i, (rng.next_u64() >> 63) != 0);
    image.set_frame(f, ecc_encode_frame(layout, payload));
  }
  return image;
}

BitMatrix read_raw_image(const std::filesystem::path& path,
                         std::uint32_t frame_count, std::uint32_t frame_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open raw image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return BitMatrix::unpack(bytes, frame_count, frame_size);
}

void write_raw_image(const std::filesystem::path& path, const BitMatrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write raw image " + path.string());
  const auto bytes = image.pack();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t frame_crc(const BitMatrix& m, std::uint32_t f) {
  const auto words = m.frame(f);
  std::vector<std::uint8_t> bytes((m.frame_size() + 7) / 8);
  for (std::size_t b = 0; b < bytes.size(); ++b)
    bytes[b] = static_cast<std::uint8_t>(words[b / 8] >> (8 * (b % 8)));
  return crc32(bytes);
}

}  // namespace

ConfigMemory::ConfigMemory(BitMatrix golden)
    : geometry_(golden.frame_count(), golden.frame_size()) {
  auto shared = std::make_shared<Shared>();
  shared->layout = std::make_unique<EccLayout>(golden.frame_size());
  shared->golden_syndrome.reserve(golden.frame_count());
  shared->frame_crc.reserve(golden.frame_count());
  for (std::uint32_t f = 0; f < golden.frame_count(); ++f) {
    shared->golden_syndrome.push_back(
        frame_syndrome(golden.frame(f)));
    shared->frame_crc.push_back(frame_crc(golden, f));
  }
  live_ = golden;
  shared->golden = std::move(golden);
  shared_ = std::move(shared);
  frame_diff_.assign(geometry_.frame_count(), 0);
}

std::vector<std::uint32_t> ConfigMemory::dirty_frames() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t f = 0; f < geometry_.frame_count(); ++f)
    if (frame_diff_[f] != 0) out.push_back(f);
  return out;
}

std::vector<BitAddress> ConfigMemory::frame_diff(std::uint32_t frame) const {
  std::vector<BitAddress> out;
  for (auto it = diff_.lower_bound({frame, 0});
       it != diff_.end() && it->frame == frame; ++it)
    out.push_back(*it);
  return out;
}

void ConfigMemory::toggle(const BitAddress& a) {
  live_.flip(a.frame, a.bit);
  if (auto it = diff_.find(a); it != diff_.end()) {
    diff_.erase(it);
    --frame_diff_[a.frame];
  } else {
    diff_.insert(a);
    ++frame_diff_[a.frame];
  }
}

const std::set<BitAddress>& ConfigMemory::flip_bits(
    std::span<const BitAddress> targets) {
  for (const auto& t : targets)
    if (!geometry_.contains(t))
      throw std::out_of_range("flip target (" + std::to_string(t.frame) + "," +
                              std::to_string(t.bit) + ") outside device");
  for (const auto& t : targets) toggle(t);
  if (!targets.empty()) ++generation_;
  return diff_;
}

void ConfigMemory::restore_frame(std::uint32_t frame) {
  geometry_.frame(frame);
  if (frame_diff_[frame] == 0) return;
  auto src = golden().frame(frame);
  auto dst = live_.frame(frame);
  std::copy(src.begin(), src.end(), dst.begin());
  diff_.erase(diff_.lower_bound({frame, 0}), diff_.lower_bound({frame + 1, 0}));
  frame_diff_[frame] = 0;
  ++generation_;
}

void ConfigMemory::restore_all() {
  if (diff_.empty()) return;
  live_ = golden();
  diff_.clear();
  std::fill(frame_diff_.begin(), frame_diff_.end(), 0);
  ++generation_;
}

DecodeResult ConfigMemory::decode_frame(std::uint32_t frame) const {
  Syndrome s = shared_->golden_syndrome[frame];
  for (auto it = diff_.lower_bound({frame, 0});
       it != diff_.end() && it->frame == frame; ++it) {
    s.hamming ^= it->bit;
    s.parity = !s.parity;
  }
  return classify_syndrome(s, geometry_.frame_size());
}

std::uint32_t ConfigMemory::live_frame_crc(std::uint32_t frame) const {
  return frame_crc(live_, frame);
}

ConfigMemory build_memory(std::uint32_t frame_count, std::uint32_t frame_size,
                          const BitMatrix& golden_image) {
  if (golden_image.frame_count() != frame_count ||
      golden_image.frame_size() != frame_size)
    throw std::invalid_argument(
        "golden image is " + std::to_string(golden_image.frame_count()) + "x" +
        std::to_string(golden_image.frame_size()) + ", expected " +
        std::to_string(frame_count) + "x" + std::to_string(frame_size));
  return ConfigMemory(golden_image);
}

}  // namespace seuscrub::memory
