// Copyright 2026 The PLS Bandits Authors.
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

// Wire format for quantized vectors and per-direction channel accounting.
//
// Unary layout, per coordinate, most significant bit first:
//   0 | sign (1 = nonnegative, 0 = negative) | 0 | |q| ones
// Fixed layout, per coordinate: a sign bit (1 = negative) followed by the
// magnitude in ceil(log2(l/2 + 1)) bits, most significant bit first.

#ifndef PLS_CODEC_HPP_
#define PLS_CODEC_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pls/common.hpp"
#include "pls/quant.hpp"

namespace pls {

enum class Direction { kUplink, kDownlink };
enum class Encoding { kUnary, kFixed, kControl };

inline std::string_view to_string(Direction d) { return d == Direction::kUplink ? "uplink" : "downlink"; }

inline std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::kUnary: return "unary";
    case Encoding::kFixed: return "fixed";
    case Encoding::kControl: return "control";
  }
  return "?";
}

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t coordinate, const std::string& what)
      : std::runtime_error("coordinate " + std::to_string(coordinate) + ": " + what), coordinate_(coordinate) {}
  std::size_t coordinate() const { return coordinate_; }

 private:
  std::size_t coordinate_;
};

class BitMessage {
 public:
  BitMessage() = default;
  BitMessage(Direction direction, int epoch, Encoding encoding)
      : direction_(direction), epoch_(epoch), encoding_(encoding) {}

  void push_back(bool bit) {
    if (size_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ % 8));
    ++size_;
  }
  void append(std::uint64_t value, int width) {
    for (int b = width - 1; b >= 0; --b) push_back(((value >> b) & 1u) != 0);
  }
  bool operator[](std::size_t i) const { return ((bytes_[i / 8] >> (7 - i % 8)) & 1u) != 0; }

  std::size_t size() const { return size_; }
  Direction direction() const { return direction_; }
  int epoch() const { return epoch_; }
  Encoding encoding() const { return encoding_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  std::string bit_string() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
  }

  /// Header-annotated hex dump; the final byte is zero-padded.
  std::string hex_dump() const {
    std::ostringstream os;
    os << "# direction=" << to_string(direction_) << " epoch=" << epoch_ << " encoding=" << to_string(encoding_)
       << " bits=" << size_ << "\n";
    static constexpr char kHex[] = "0123456789abcdef";
    for (std::size_t i = 0; i < bytes_.size(); ++i) {
      os << kHex[bytes_[i] >> 4] << kHex[bytes_[i] & 0xF];
      if (i + 1 < bytes_.size()) os << ((i + 1) % 16 == 0 ? "\n" : " ");
    }
    os << "\n";
    return os.str();
  }

  bool operator==(const BitMessage& o) const { return size_ == o.size_ && bytes_ == o.bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
  Direction direction_ = Direction::kUplink;
  int epoch_ = 0;
  Encoding encoding_ = Encoding::kUnary;
};

inline BitMessage encode_unary(std::span<const std::int64_t> indices, Direction direction = Direction::kUplink,
                               int epoch = 0) {
  BitMessage msg(direction, epoch, Encoding::kUnary);
  for (std::int64_t q : indices) {
    msg.push_back(false);
    msg.push_back(q >= 0);
    msg.push_back(false);
    const std::uint64_t magnitude = q < 0 ? static_cast<std::uint64_t>(-q) : static_cast<std::uint64_t>(q);
    for (std::uint64_t i = 0; i < magnitude; ++i) msg.push_back(true);
  }
  return msg;
}

inline BitMessage encode_unary(const QuantizedVector& q, Direction direction = Direction::kUplink, int epoch = 0) {
  return encode_unary(q.indices, direction, epoch);
}

inline std::vector<std::int64_t> decode_unary(const BitMessage& msg, std::size_t p) {
  std::vector<std::int64_t> out;
  out.reserve(p);
  std::size_t pos = 0;
  for (std::size_t c = 0; c < p; ++c) {
    if (pos + 3 > msg.size()) throw DecodeError(c, "truncated header");
    if (msg[pos]) throw DecodeError(c, "malformed header: first bit is 1");
    if (msg[pos + 2]) throw DecodeError(c, "malformed header: third bit is 1");
    const bool nonnegative = msg[pos + 1];
    pos += 3;
    std::int64_t magnitude = 0;
    while (pos < msg.size() && msg[pos]) {
      ++magnitude;
      ++pos;
    }
    out.push_back(nonnegative ? magnitude : -magnitude);
  }
  if (pos != msg.size()) throw DecodeError(p, "trailing bits after the last coordinate");
  return out;
}

/// Decodes and range-checks against a grid.
inline QuantizedVector decode_unary(const BitMessage& msg, std::size_t p, const QuantGrid& grid) {
  QuantizedVector out{decode_unary(msg, p), grid};
  for (std::size_t c = 0; c < p; ++c) {
    if (std::abs(out.indices[c]) > grid.max_index()) throw DecodeError(c, "index outside the grid");
  }
  return out;
}

/// Field width of the fixed-length encoding: sign bit + magnitude bits.
inline int fixed_field_width(std::int64_t levels) {
  const auto max_index = static_cast<std::uint64_t>(levels / 2);
  return 1 + static_cast<int>(std::bit_width(max_index));
}

inline BitMessage encode_fixed(const QuantizedVector& q, Direction direction = Direction::kDownlink,
                               int epoch = 0) {
  BitMessage msg(direction, epoch, Encoding::kFixed);
  const int width = fixed_field_width(q.grid.levels());
  for (std::int64_t v : q.indices) {
    require(std::abs(v) <= q.grid.max_index(), "encode_fixed: index outside the grid");
    msg.push_back(v < 0);
    msg.append(static_cast<std::uint64_t>(v < 0 ? -v : v), width - 1);
  }
  return msg;
}

inline QuantizedVector decode_fixed(const BitMessage& msg, std::size_t p, const QuantGrid& grid) {
  const int width = fixed_field_width(grid.levels());
  QuantizedVector out{std::vector<std::int64_t>(p), grid};
  std::size_t pos = 0;
  for (std::size_t c = 0; c < p; ++c) {
    if (pos + static_cast<std::size_t>(width) > msg.size()) throw DecodeError(c, "truncated field");
    const bool negative = msg[pos++];
    std::int64_t magnitude = 0;
    for (int b = 1; b < width; ++b) magnitude = (magnitude << 1) | (msg[pos++] ? 1 : 0);
    if (magnitude > grid.max_index()) throw DecodeError(c, "index outside the grid");
    out.indices[c] = negative ? -magnitude : magnitude;
  }
  if (pos != msg.size()) throw DecodeError(p, "trailing bits after the last coordinate");
  return out;
}

/// Upper bound p (3 + 2 (r / eps + 1)) on the unary length of any p-vector
/// with norm <= r quantized at per-coordinate resolution eps.
inline double unary_length_bound(std::size_t p, double r, double eps) {
  return static_cast<double>(p) * (3.0 + 2.0 * (r / eps + 1.0));
}

/// Single-bit terminate (1) / continue (0) broadcast.
inline BitMessage control_message(bool terminate, int epoch) {
  BitMessage msg(Direction::kDownlink, epoch, Encoding::kControl);
  msg.push_back(terminate);
  return msg;
}

struct LedgerEntry {
  int epoch;
  Direction direction;
  std::int64_t bits;
  std::int64_t uses;
};

/// Bit and channel-use counters per direction. Single writer.
class ChannelLedger {
 public:
  explicit ChannelLedger(std::int64_t capacity_bits = 64) : capacity_(capacity_bits) {
    require(capacity_ >= 1, "ChannelLedger: capacity must be >= 1 bit per channel use");
  }

  void transmit(const BitMessage& msg) {
    record(msg.epoch(), msg.direction(), static_cast<std::int64_t>(msg.size()));
  }

  /// Accounts a message of `bits` bits without carrying its payload.
  void record(int epoch, Direction direction, std::int64_t bits) {
    const std::int64_t uses = (bits + capacity_ - 1) / capacity_;
    if (direction == Direction::kUplink) {
      uplink_bits_ += bits;
      uplink_uses_ += uses;
    } else {
      downlink_bits_ += bits;
      downlink_uses_ += uses;
    }
    log_.push_back({epoch, direction, bits, uses});
  }

  std::int64_t capacity() const { return capacity_; }
  std::int64_t uplink_bits() const { return uplink_bits_; }
  std::int64_t downlink_bits() const { return downlink_bits_; }
  std::int64_t uplink_uses() const { return uplink_uses_; }
  std::int64_t downlink_uses() const { return downlink_uses_; }
  const std::vector<LedgerEntry>& log() const { return log_; }

  /// Rebuilds the counters from logged message lengths alone.
  ChannelLedger replay() const {
    ChannelLedger fresh(capacity_);
    for (const auto& e : log_) fresh.record(e.epoch, e.direction, e.bits);
    return fresh;
  }

  bool counters_equal(const ChannelLedger& o) const {
    return uplink_bits_ == o.uplink_bits_ && downlink_bits_ == o.downlink_bits_ &&
           uplink_uses_ == o.uplink_uses_ && downlink_uses_ == o.downlink_uses_;
  }

 private:
  std::int64_t capacity_;
  std::int64_t uplink_bits_ = 0;
  std::int64_t downlink_bits_ = 0;
  std::int64_t uplink_uses_ = 0;
  std::int64_t downlink_uses_ = 0;
  std::vector<LedgerEntry> log_;
};

}  // namespace pls

#endif  // PLS_CODEC_HPP_
