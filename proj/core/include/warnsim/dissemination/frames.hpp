#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace warnsim::dissemination {

enum class FrameType : std::uint8_t { I, P, B };

char to_char(FrameType t);

struct Frame {
  std::uint32_t index = 0;
  FrameType type = FrameType::I;
  std::uint32_t size_bytes = 0;
};

/// CSV with header `frame_index,frame_type,size_bytes`.
std::vector<Frame> read_frame_trace(std::istream& in);
void write_frame_trace(std::ostream& out, const std::vector<Frame>& frames);

/// GOP "IBBPBBPBBPBB" with I:P:B size ratio 5:2:1 scaled so that the mean
/// bitrate matches `bitrate` at `fps`.
std::vector<Frame> synthetic_frames(double bitrate, double fps, double seconds);

/// Number of packets of at most `mtu` bytes needed to carry `bytes`.
inline std::uint32_t packet_count(std::uint32_t bytes, std::uint32_t mtu) {
  return bytes == 0 ? 1 : (bytes + mtu - 1) / mtu;
}

}  // namespace warnsim::dissemination
