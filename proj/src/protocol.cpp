#include "vtl/protocol.hpp"

#include <stdexcept>

namespace vtl {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc16_table() {
  std::array<std::uint16_t, 256> table{};
  for (int i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
    table[static_cast<std::size_t>(i)] = crc;
  }
  return table;
}

constexpr std::size_t kPayloadOffset = 7;
constexpr std::size_t kLinkCrcOffset = 10;

} // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  static constexpr auto table = make_crc16_table();
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ byte) & 0xFF]);
  }
  return crc;
}

std::uint32_t crc24_link(std::span<const std::uint8_t> data) {
  std::uint32_t crc = 0x555555;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint32_t>(byte) << 16;
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x800000) ? ((crc << 1) ^ 0x00065B) : (crc << 1);
      crc &= 0xFFFFFF;
    }
  }
  return crc;
}

std::vector<std::uint8_t> encode_frame(int state_id, const FrameParams& params) {
  if (state_id < kMinStateCode || state_id > kMaxStateCode) {
    throw std::domain_error("state code " + std::to_string(state_id) +
                            " outside [" + std::to_string(kMinStateCode) + ", " +
                            std::to_string(kMaxStateCode) + "]");
  }
  std::vector<std::uint8_t> frame;
  frame.reserve(kFrameSize);
  frame.push_back(params.preamble);
  frame.insert(frame.end(), params.access_address.begin(), params.access_address.end());
  frame.insert(frame.end(), params.header.begin(), params.header.end());

  const std::uint8_t state_code = static_cast<std::uint8_t>(state_id);
  const std::uint16_t payload_crc = crc16_ccitt_false({&state_code, 1});
  frame.push_back(state_code);
  frame.push_back(static_cast<std::uint8_t>(payload_crc >> 8));
  frame.push_back(static_cast<std::uint8_t>(payload_crc & 0xFF));

  const std::uint32_t link_crc =
      crc24_link(std::span(frame).subspan(5)); // header + payload
  frame.push_back(static_cast<std::uint8_t>((link_crc >> 16) & 0xFF));
  frame.push_back(static_cast<std::uint8_t>((link_crc >> 8) & 0xFF));
  frame.push_back(static_cast<std::uint8_t>(link_crc & 0xFF));
  return frame;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  DecodeResult result;
  if (bytes.size() != kFrameSize && bytes.size() != kTaggedFrameSize) {
    result.error = DecodeError::BadLength;
    return result;
  }
  const std::uint8_t state_code = bytes[kPayloadOffset];
  const std::uint16_t carried =
      static_cast<std::uint16_t>((bytes[kPayloadOffset + 1] << 8) |
                                 bytes[kPayloadOffset + 2]);
  if (carried != crc16_ccitt_false(bytes.subspan(kPayloadOffset, 1))) {
    result.error = DecodeError::CrcMismatch;
    return result;
  }
  if (state_code < kMinStateCode || state_code > kMaxStateCode) {
    result.error = DecodeError::BadStateCode;
    return result;
  }
  result.frame.state_id = state_code;
  if (bytes.size() == kTaggedFrameSize) {
    result.frame.retransmitter_tag = bytes[kTaggedFrameSize - 1];
  }
  return result;
}

std::vector<std::uint8_t> tag_frame(std::span<const std::uint8_t> frame,
                                    std::uint8_t retransmitter_id) {
  if (frame.size() == kTaggedFrameSize) {
    throw std::invalid_argument("frame already carries a retransmitter tag");
  }
  if (frame.size() != kFrameSize) {
    throw std::invalid_argument("tag_frame expects a " + std::to_string(kFrameSize) +
                                "-byte frame, got " + std::to_string(frame.size()));
  }
  std::vector<std::uint8_t> tagged(frame.begin(), frame.end());
  tagged.push_back(retransmitter_id);
  return tagged;
}

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::None: return "none";
    case DecodeError::BadLength: return "bad-length";
    case DecodeError::CrcMismatch: return "crc-mismatch";
    case DecodeError::BadStateCode: return "bad-state-code";
  }
  return "?";
}

double tx_time_us(std::size_t frame_bytes, const LinkTimingParams& params) {
  if (frame_bytes == 0 || params.bitrate_bps <= 0.0) {
    throw std::domain_error("tx_time_us needs a positive byte count and bitrate");
  }
  const double bits = static_cast<double>(frame_bytes) * 8.0;
  return bits / params.bitrate_bps * 1e6;
}

double effective_throughput_bits_per_us(double payload_bits, double frame_time_us,
                                        const LinkTimingParams& params) {
  if (payload_bits < 0.0 || frame_time_us <= 0.0 || params.ack_time_us <= 0.0 ||
      params.inter_frame_space_us <= 0.0) {
    throw std::domain_error("effective_throughput needs positive timing inputs");
  }
  const double exchange_us = params.ack_time_us + params.inter_frame_space_us +
                             frame_time_us + params.inter_frame_space_us;
  return payload_bits / exchange_us;
}

} // namespace vtl
