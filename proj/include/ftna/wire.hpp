// Bit-exact framing and payload codec for all messages, plus UDP endpoints
// with latest-wins delivery.
//
// Frame layout (all multi-byte fields little-endian):
//   magic "FTNA" | version u8 | msg_type u8 | payload_len u32 | payload | crc u32
// The CRC-32 (IEEE, reflected, init/final 0xFFFFFFFF) covers magic through
// payload inclusive.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ftna/messages.hpp"

namespace ftna {

enum class MsgType : std::uint8_t {
  kTrajectory = 0x01,
  kLocalization = 0x02,
  kControlCommand = 0x03,
  kHmiCommand = 0x04,
  kControllerStatus = 0x05,
};

inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 10;  // magic + version + type + len
inline constexpr std::size_t kFrameCrcSize = 4;
inline constexpr std::size_t kMaxPayload = 65536;
inline constexpr std::size_t kMaxTrajectoryPoints = 1000;

// Reflected CRC-32, polynomial 0x04C11DB7, init and final XOR 0xFFFFFFFF.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode(const TrajectoryMsg& msg);
std::vector<std::uint8_t> encode(const LocalizationMsg& msg);
std::vector<std::uint8_t> encode(const ControlCommand& msg);
std::vector<std::uint8_t> encode(const HmiCommand& msg);
std::vector<std::uint8_t> encode(const ControllerStatusMsg& msg);

enum class DecodeError : std::uint8_t {
  kNone = 0,
  kBadMagic,
  kBadVersion,
  kBadLength,
  kBadCrc,
  kUnknownType,
};

const char* to_string(DecodeError error);

using AnyMessage = std::variant<TrajectoryMsg, LocalizationMsg, ControlCommand,
                                HmiCommand, ControllerStatusMsg>;

struct DecodeResult {
  DecodeError error = DecodeError::kNone;
  std::optional<AnyMessage> message;  // engaged iff error == kNone
};

// Never throws on malformed input; every rejection is a distinct error.
// Heading fields of accepted messages are normalized to (-pi, pi].
DecodeResult decode(std::span<const std::uint8_t> frame);

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loopback IPv4/UDP datagram socket. Sends block (never drop locally),
// receives never block.
class UdpSocket {
 public:
  // Binds to 127.0.0.1:port; port 0 picks an ephemeral port.
  explicit UdpSocket(std::uint16_t port = 0);
  ~UdpSocket();

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  std::uint16_t port() const { return port_; }

  void send_to(std::uint16_t port, std::span<const std::uint8_t> datagram);

  // One pending datagram, or nullopt when the queue is empty.
  std::optional<std::vector<std::uint8_t>> recv();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Drains every pending datagram, decodes each, discards the undecodable and
// the mistyped, and keeps the message with the highest seq (latest wins;
// on duplicate seq the first decoded message is kept).
template <typename T>
std::optional<T> recv_latest(UdpSocket& socket) {
  std::optional<T> best;
  while (auto datagram = socket.recv()) {
    DecodeResult result = decode(*datagram);
    if (!result.message) {
      continue;
    }
    if (T* msg = std::get_if<T>(&*result.message)) {
      if (!best || msg->seq > best->seq) {
        best = std::move(*msg);
      }
    }
  }
  return best;
}

}  // namespace ftna
