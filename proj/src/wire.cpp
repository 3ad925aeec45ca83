#include "ftna/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cerrno>
#include <cstring>
#include <utility>

namespace ftna {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'T', 'N', 'A'};

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

class PayloadWriter {
 public:
  explicit PayloadWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void i8(std::int8_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u32(std::uint32_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v >> 16));
    out_.push_back(static_cast<std::uint8_t>(v >> 24));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return data_[pos_++]; }
  std::int8_t i8() { return static_cast<std::int8_t>(data_[pos_++]); }
  std::uint32_t u32() {
    std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                      static_cast<std::uint32_t>(data_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(data_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(data_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }
  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void put_u32(std::uint8_t* dst, std::uint32_t v) {
  dst[0] = static_cast<std::uint8_t>(v);
  dst[1] = static_cast<std::uint8_t>(v >> 8);
  dst[2] = static_cast<std::uint8_t>(v >> 16);
  dst[3] = static_cast<std::uint8_t>(v >> 24);
}

std::vector<std::uint8_t> finish_frame(MsgType type,
                                       const std::vector<std::uint8_t>& payload) {
  if (payload.size() > kMaxPayload) {
    throw std::length_error("wire: payload exceeds " + std::to_string(kMaxPayload) +
                            " bytes");
  }
  std::vector<std::uint8_t> frame(kFrameHeaderSize + payload.size() + kFrameCrcSize);
  std::memcpy(frame.data(), kMagic.data(), kMagic.size());
  frame[4] = kWireVersion;
  frame[5] = static_cast<std::uint8_t>(type);
  put_u32(frame.data() + 6, static_cast<std::uint32_t>(payload.size()));
  if (!payload.empty()) {
    std::memcpy(frame.data() + kFrameHeaderSize, payload.data(), payload.size());
  }
  const std::size_t crc_pos = kFrameHeaderSize + payload.size();
  put_u32(frame.data() + crc_pos, crc32({frame.data(), crc_pos}));
  return frame;
}

constexpr std::size_t kLocalizationPayload = 4 + 8 + 6 * 8 + 1;          // 61
constexpr std::size_t kControlCommandPayload = 4 + 8 + 8 + 8 + 1 + 1 + 8 + 8 + 1;  // 47
constexpr std::size_t kHmiPayload = 4 + 8 + 1;                           // 13
constexpr std::size_t kStatusPayload = 4 + 8 + 3 + 4 * 8;                // 47
constexpr std::size_t kTrajectoryFixedPayload = 4 + 8 + 1 + 1 + 4;       // 18
constexpr std::size_t kTrajectoryPointBytes = 8 * 8;                     // 64

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::uint8_t b : bytes) {
    c = kCrcTable[(c ^ b) & 0xFFu] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode(const TrajectoryMsg& msg) {
  if (msg.points.size() > kMaxTrajectoryPoints) {
    throw std::length_error("wire: trajectory exceeds max point count");
  }
  std::vector<std::uint8_t> payload;
  payload.reserve(kTrajectoryFixedPayload + msg.points.size() * kTrajectoryPointBytes);
  PayloadWriter w(payload);
  w.u32(msg.seq);
  w.f64(msg.timestamp);
  w.i8(msg.gear);
  w.u8(msg.mode_hint);
  w.u32(static_cast<std::uint32_t>(msg.points.size()));
  for (const TrajectoryPoint& p : msg.points) {
    w.f64(p.x);
    w.f64(p.y);
    w.f64(p.theta);
    w.f64(p.kappa);
    w.f64(p.s);
    w.f64(p.v);
    w.f64(p.a);
    w.f64(p.relative_time);
  }
  return finish_frame(MsgType::kTrajectory, payload);
}

std::vector<std::uint8_t> encode(const LocalizationMsg& msg) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kLocalizationPayload);
  PayloadWriter w(payload);
  w.u32(msg.seq);
  w.f64(msg.timestamp);
  w.f64(msg.x);
  w.f64(msg.y);
  w.f64(msg.theta);
  w.f64(msg.v);
  w.f64(msg.yaw_rate);
  w.f64(msg.a);
  w.u8(msg.status);
  return finish_frame(MsgType::kLocalization, payload);
}

std::vector<std::uint8_t> encode(const ControlCommand& msg) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kControlCommandPayload);
  PayloadWriter w(payload);
  w.u32(msg.seq);
  w.f64(msg.timestamp);
  w.f64(msg.accel_cmd);
  w.f64(msg.steer_wheel_cmd);
  w.i8(msg.gear_cmd);
  w.u8(msg.direct_actuation ? 1 : 0);
  w.f64(msg.throttle);
  w.f64(msg.brake);
  w.u8(msg.mode);
  return finish_frame(MsgType::kControlCommand, payload);
}

std::vector<std::uint8_t> encode(const HmiCommand& msg) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kHmiPayload);
  PayloadWriter w(payload);
  w.u32(msg.seq);
  w.f64(msg.timestamp);
  w.u8(msg.command);
  return finish_frame(MsgType::kHmiCommand, payload);
}

std::vector<std::uint8_t> encode(const ControllerStatusMsg& msg) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kStatusPayload);
  PayloadWriter w(payload);
  w.u32(msg.seq);
  w.f64(msg.timestamp);
  w.u8(msg.fsm);
  w.u8(msg.mode);
  w.u8(msg.latch);
  w.f64(msg.e_s);
  w.f64(msg.d);
  w.f64(msg.e_psi);
  w.f64(msg.e_v);
  return finish_frame(MsgType::kControllerStatus, payload);
}

const char* to_string(DecodeError error) {
  switch (error) {
    case DecodeError::kNone: return "NONE";
    case DecodeError::kBadMagic: return "BAD_MAGIC";
    case DecodeError::kBadVersion: return "BAD_VERSION";
    case DecodeError::kBadLength: return "BAD_LENGTH";
    case DecodeError::kBadCrc: return "BAD_CRC";
    case DecodeError::kUnknownType: return "UNKNOWN_TYPE";
  }
  return "UNKNOWN";
}

DecodeResult decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < kFrameHeaderSize + kFrameCrcSize) {
    return {DecodeError::kBadLength, std::nullopt};
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), frame.begin())) {
    return {DecodeError::kBadMagic, std::nullopt};
  }
  if (frame[4] != kWireVersion) {
    return {DecodeError::kBadVersion, std::nullopt};
  }
  const std::uint32_t payload_len = static_cast<std::uint32_t>(frame[6]) |
                                    static_cast<std::uint32_t>(frame[7]) << 8 |
                                    static_cast<std::uint32_t>(frame[8]) << 16 |
                                    static_cast<std::uint32_t>(frame[9]) << 24;
  if (payload_len > kMaxPayload ||
      frame.size() != kFrameHeaderSize + payload_len + kFrameCrcSize) {
    return {DecodeError::kBadLength, std::nullopt};
  }
  const std::size_t crc_pos = kFrameHeaderSize + payload_len;
  const std::uint32_t stored_crc = static_cast<std::uint32_t>(frame[crc_pos]) |
                                   static_cast<std::uint32_t>(frame[crc_pos + 1]) << 8 |
                                   static_cast<std::uint32_t>(frame[crc_pos + 2]) << 16 |
                                   static_cast<std::uint32_t>(frame[crc_pos + 3]) << 24;
  if (crc32(frame.subspan(0, crc_pos)) != stored_crc) {
    return {DecodeError::kBadCrc, std::nullopt};
  }

  PayloadReader r(frame.subspan(kFrameHeaderSize, payload_len));
  switch (frame[5]) {
    case static_cast<std::uint8_t>(MsgType::kTrajectory): {
      if (payload_len < kTrajectoryFixedPayload ||
          (payload_len - kTrajectoryFixedPayload) % kTrajectoryPointBytes != 0) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      TrajectoryMsg msg;
      msg.seq = r.u32();
      msg.timestamp = r.f64();
      msg.gear = r.i8();
      msg.mode_hint = r.u8();
      const std::uint32_t count = r.u32();
      if (count > kMaxTrajectoryPoints ||
          payload_len != kTrajectoryFixedPayload + count * kTrajectoryPointBytes) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      msg.points.resize(count);
      for (TrajectoryPoint& p : msg.points) {
        p.x = r.f64();
        p.y = r.f64();
        p.theta = wrap_angle(r.f64());
        p.kappa = r.f64();
        p.s = r.f64();
        p.v = r.f64();
        p.a = r.f64();
        p.relative_time = r.f64();
      }
      return {DecodeError::kNone, AnyMessage{std::move(msg)}};
    }
    case static_cast<std::uint8_t>(MsgType::kLocalization): {
      if (payload_len != kLocalizationPayload) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      LocalizationMsg msg;
      msg.seq = r.u32();
      msg.timestamp = r.f64();
      msg.x = r.f64();
      msg.y = r.f64();
      msg.theta = wrap_angle(r.f64());
      msg.v = r.f64();
      msg.yaw_rate = r.f64();
      msg.a = r.f64();
      msg.status = r.u8();
      return {DecodeError::kNone, AnyMessage{msg}};
    }
    case static_cast<std::uint8_t>(MsgType::kControlCommand): {
      if (payload_len != kControlCommandPayload) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      ControlCommand msg;
      msg.seq = r.u32();
      msg.timestamp = r.f64();
      msg.accel_cmd = r.f64();
      msg.steer_wheel_cmd = r.f64();
      msg.gear_cmd = r.i8();
      msg.direct_actuation = r.u8() != 0;
      msg.throttle = r.f64();
      msg.brake = r.f64();
      msg.mode = r.u8();
      return {DecodeError::kNone, AnyMessage{msg}};
    }
    case static_cast<std::uint8_t>(MsgType::kHmiCommand): {
      if (payload_len != kHmiPayload) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      HmiCommand msg;
      msg.seq = r.u32();
      msg.timestamp = r.f64();
      msg.command = r.u8();
      return {DecodeError::kNone, AnyMessage{msg}};
    }
    case static_cast<std::uint8_t>(MsgType::kControllerStatus): {
      if (payload_len != kStatusPayload) {
        return {DecodeError::kBadLength, std::nullopt};
      }
      ControllerStatusMsg msg;
      msg.seq = r.u32();
      msg.timestamp = r.f64();
      msg.fsm = r.u8();
      msg.mode = r.u8();
      msg.latch = r.u8();
      msg.e_s = r.f64();
      msg.d = r.f64();
      msg.e_psi = r.f64();
      msg.e_v = r.f64();
      return {DecodeError::kNone, AnyMessage{msg}};
    }
    default:
      return {DecodeError::kUnknownType, std::nullopt};
  }
}

UdpSocket::UdpSocket(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) {
    throw TransportError("socket() failed: " + std::string(std::strerror(errno)));
  }
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportError("bind(127.0.0.1:" + std::to_string(port) +
                         ") failed: " + std::string(std::strerror(err)));
  }
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw TransportError("getsockname() failed: " + std::string(std::strerror(err)));
  }
  port_ = ntohs(addr.sin_port);
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(std::exchange(other.port_, 0)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) {
      ::close(fd_);
    }
    fd_ = std::exchange(other.fd_, -1);
    port_ = std::exchange(other.port_, 0);
  }
  return *this;
}

void UdpSocket::send_to(std::uint16_t port, std::span<const std::uint8_t> datagram) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  const ssize_t n = ::sendto(fd_, datagram.data(), datagram.size(), 0,
                             reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (n < 0 || static_cast<std::size_t>(n) != datagram.size()) {
    throw TransportError("sendto(:" + std::to_string(port) +
                         ") failed: " + std::string(std::strerror(errno)));
  }
}

std::optional<std::vector<std::uint8_t>> UdpSocket::recv() {
  std::vector<std::uint8_t> buf(70000);
  const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), MSG_DONTWAIT, nullptr, nullptr);
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      return std::nullopt;
    }
    throw TransportError("recvfrom() failed: " + std::string(std::strerror(errno)));
  }
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

}  // namespace ftna
