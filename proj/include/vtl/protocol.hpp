#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace vtl {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xor-out.
// crc16("123456789") == 0x29B1.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

// 24-bit link-layer CRC carried in the trailing frame field: poly 0x00065B,
// init 0x555555, MSB-first. Filler for wire fidelity; receivers judge frame
// integrity by the payload CRC alone.
std::uint32_t crc24_link(std::span<const std::uint8_t> data);

inline constexpr std::size_t kFrameSize = 13;
inline constexpr std::size_t kTaggedFrameSize = 14;
inline constexpr int kMinStateCode = 1;
inline constexpr int kMaxStateCode = 13;

// Constant non-payload fields. The advertising access address is written
// least-significant byte first, as on air.
struct FrameParams {
  std::uint8_t preamble = 0xAA;
  std::array<std::uint8_t, 4> access_address = {0xD6, 0xBE, 0x89, 0x8E};
  std::array<std::uint8_t, 2> header = {0x42, 0x03};
};

// Wire layout, 13 bytes:
//   [0]      preamble
//   [1..4]   access address
//   [5..6]   header
//   [7..9]   payload: state code, CRC-16 of the state code (big-endian)
//   [10..12] link CRC over header+payload (big-endian)
// Relays append one tag byte, giving 14 bytes; the payload CRC does not
// cover the tag.
std::vector<std::uint8_t> encode_frame(int state_id, const FrameParams& params = {});

enum class DecodeError : std::uint8_t { None, BadLength, CrcMismatch, BadStateCode };

std::string_view to_string(DecodeError error);

struct DecodedFrame {
  int state_id = 0;
  std::optional<std::uint8_t> retransmitter_tag;
};

struct DecodeResult {
  DecodedFrame frame{};
  DecodeError error = DecodeError::None;

  bool ok() const { return error == DecodeError::None; }
};

DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

// Appends the relay tag to a plain 13-byte frame. Tagging an already
// tagged frame throws std::invalid_argument: relay chains are not a thing
// in this protocol.
std::vector<std::uint8_t> tag_frame(std::span<const std::uint8_t> frame,
                                    std::uint8_t retransmitter_id);

struct LinkTimingParams {
  double bitrate_bps = 1e6;
  double ack_time_us = 80.0;          // empty-packet confirmation time
  double inter_frame_space_us = 150.0;
};

// Time on air for one frame of `frame_bytes` bytes, in microseconds.
double tx_time_us(std::size_t frame_bytes, const LinkTimingParams& params = {});

// Payload bits delivered per microsecond of the full exchange
// (ack + IFS + frame + IFS).
double effective_throughput_bits_per_us(double payload_bits, double frame_time_us,
                                        const LinkTimingParams& params = {});

} // namespace vtl
