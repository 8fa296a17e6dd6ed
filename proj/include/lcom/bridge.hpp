#pragma once

// Client side of the detector wire protocol and the projection from a pixel
// detection to a grid observation.
//
// Framing: one compact JSON object per line, UTF-8, '\n' terminated, at most
// kMaxMessageBytes per line. Unknown fields are ignored on parse.
//
//   request  {"depth"?, "id", "intrinsics": {"cx","cy","fx","fy"}, "lang", "rgb"}
//   response {"confidence", "depth_m"?, "detected", "id", "u"?, "v"?}
//
// Endpoints: "HOST:PORT" or "tcp:HOST:PORT", "unix:/path/to/socket", or
// "exec:COMMAND" (COMMAND is run through /bin/sh and spoken to over its
// stdin/stdout).

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/log.hpp"
#include "lcom/observation_model.hpp"

namespace lcom::bridge {

inline constexpr std::size_t kMaxMessageBytes = 16u * 1024u * 1024u;

enum class TransportErrorCode { Timeout, Malformed, IdMismatch, Connection, Oversize };

inline std::string_view to_string(TransportErrorCode c) {
  switch (c) {
    case TransportErrorCode::Timeout: return "timeout";
    case TransportErrorCode::Malformed: return "malformed";
    case TransportErrorCode::IdMismatch: return "id-mismatch";
    case TransportErrorCode::Connection: return "connection";
    case TransportErrorCode::Oversize: return "oversize";
  }
  return "?";
}

class TransportError : public std::runtime_error {
public:
  TransportError(TransportErrorCode code, const std::string& what)
      : std::runtime_error("detector transport [" + std::string(to_string(code)) + "]: " + what),
        code_(code) {}
  TransportErrorCode code() const { return code_; }

private:
  TransportErrorCode code_;
};

struct Intrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 150.0;
  double cy = 150.0;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct DetectionRequest {
  std::uint64_t id = 0;
  std::string lang;
  std::string rgb;  // file path, or "base64:" followed by an inline payload
  std::optional<std::string> depth;
  Intrinsics intrinsics;

  friend bool operator==(const DetectionRequest&, const DetectionRequest&) = default;
};

struct DetectionResponse {
  std::uint64_t id = 0;
  bool detected = false;
  std::optional<double> u;
  std::optional<double> v;
  std::optional<double> depth_m;
  double confidence = 0.0;

  friend bool operator==(const DetectionResponse&, const DetectionResponse&) = default;
};

inline std::string serialize(const DetectionRequest& r) {
  nlohmann::json j{{"id", r.id},
                   {"lang", r.lang},
                   {"rgb", r.rgb},
                   {"intrinsics",
                    {{"fx", r.intrinsics.fx},
                     {"fy", r.intrinsics.fy},
                     {"cx", r.intrinsics.cx},
                     {"cy", r.intrinsics.cy}}}};
  if (r.depth) j["depth"] = *r.depth;
  return j.dump() + '\n';
}

inline std::string serialize(const DetectionResponse& r) {
  nlohmann::json j{{"id", r.id}, {"detected", r.detected}, {"confidence", r.confidence}};
  if (r.u) j["u"] = *r.u;
  if (r.v) j["v"] = *r.v;
  if (r.depth_m) j["depth_m"] = *r.depth_m;
  return j.dump() + '\n';
}

namespace detail {

inline nlohmann::json parse_object(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.size() > kMaxMessageBytes) {
    throw TransportError(TransportErrorCode::Oversize, "message exceeds 16 MiB");
  }
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw TransportError(TransportErrorCode::Malformed, "line is not a JSON object");
  }
  return j;
}

inline double number_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw TransportError(TransportErrorCode::Malformed,
                         std::string("missing or non-numeric field '") + key + "'");
  }
  return it->get<double>();
}

inline std::uint64_t id_field(const nlohmann::json& j) {
  const auto it = j.find("id");
  if (it == j.end() || !it->is_number_unsigned()) {
    throw TransportError(TransportErrorCode::Malformed, "missing or invalid 'id'");
  }
  return it->get<std::uint64_t>();
}

inline std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number_field(j, key);
}

}  // namespace detail

inline DetectionRequest parse_request(std::string_view line) {
  const auto j = detail::parse_object(line);
  DetectionRequest r;
  r.id = detail::id_field(j);
  const auto lang = j.find("lang");
  const auto rgb = j.find("rgb");
  const auto intr = j.find("intrinsics");
  if (lang == j.end() || !lang->is_string() || lang->get<std::string>().empty()) {
    throw TransportError(TransportErrorCode::Malformed, "request needs a nonempty 'lang'");
  }
  if (rgb == j.end() || !rgb->is_string()) {
    throw TransportError(TransportErrorCode::Malformed, "request needs 'rgb'");
  }
  if (intr == j.end() || !intr->is_object()) {
    throw TransportError(TransportErrorCode::Malformed, "request needs 'intrinsics'");
  }
  r.lang = lang->get<std::string>();
  r.rgb = rgb->get<std::string>();
  if (const auto d = j.find("depth"); d != j.end() && !d->is_null()) {
    if (!d->is_string()) throw TransportError(TransportErrorCode::Malformed, "bad 'depth'");
    r.depth = d->get<std::string>();
  }
  r.intrinsics = {detail::number_field(*intr, "fx"), detail::number_field(*intr, "fy"),
                  detail::number_field(*intr, "cx"), detail::number_field(*intr, "cy")};
  return r;
}

inline DetectionResponse parse_response(std::string_view line) {
  const auto j = detail::parse_object(line);
  DetectionResponse r;
  r.id = detail::id_field(j);
  const auto det = j.find("detected");
  if (det == j.end() || !det->is_boolean()) {
    throw TransportError(TransportErrorCode::Malformed, "response needs boolean 'detected'");
  }
  r.detected = det->get<bool>();
  r.confidence = detail::number_field(j, "confidence");
  if (!(r.confidence >= 0.0)) {
    throw TransportError(TransportErrorCode::Malformed, "confidence must be nonnegative");
  }
  r.u = detail::optional_number(j, "u");
  r.v = detail::optional_number(j, "v");
  r.depth_m = detail::optional_number(j, "depth_m");
  if (r.detected && !(r.u && r.v && r.depth_m)) {
    throw TransportError(TransportErrorCode::Malformed, "detection without u, v, depth_m");
  }
  if (!r.detected && (r.u || r.v || r.depth_m)) {
    throw TransportError(TransportErrorCode::Malformed, "empty detection carries geometry");
  }
  return r;
}

/// Owns one bidirectional stream (socket or child-process pipe) and frames it
/// into lines.
class LineChannel {
public:
  explicit LineChannel(const std::string& endpoint) { open(endpoint); }
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;
  ~LineChannel() { close(); }

  void write_line(std::string_view line) {
    if (line.size() > kMaxMessageBytes + 1) {
      throw TransportError(TransportErrorCode::Oversize, "outgoing message exceeds 16 MiB");
    }
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == ENOTSOCK) {
          const ssize_t w = ::write(fd_, line.data() + sent, line.size() - sent);
          if (w < 0) throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
          sent += static_cast<std::size_t>(w);
          continue;
        }
        throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      if (buffer_.size() > kMaxMessageBytes) {
        throw TransportError(TransportErrorCode::Oversize, "incoming message exceeds 16 MiB");
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TransportError(TransportErrorCode::Timeout, "no response");
      pollfd pfd{fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
      }
      if (rc == 0) throw TransportError(TransportErrorCode::Timeout, "no response");
      char chunk[65536];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
      }
      if (n == 0) throw TransportError(TransportErrorCode::Connection, "peer closed the stream");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

private:
  void open(const std::string& endpoint) {
    if (endpoint.starts_with("unix:")) {
      open_unix(endpoint.substr(5));
    } else if (endpoint.starts_with("exec:")) {
      open_exec(endpoint.substr(5));
    } else {
      open_tcp(endpoint.starts_with("tcp:") ? endpoint.substr(4) : endpoint);
    }
  }

  void open_tcp(const std::string& hostport) {
    const auto colon = hostport.rfind(':');
    if (colon == std::string::npos) {
      throw TransportError(TransportErrorCode::Connection, "endpoint must be HOST:PORT");
    }
    const std::string host = hostport.substr(0, colon);
    const std::string port = hostport.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw TransportError(TransportErrorCode::Connection, ::gai_strerror(rc));
    }
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) {
      throw TransportError(TransportErrorCode::Connection, "cannot connect to " + hostport);
    }
  }

  void open_unix(const std::string& path) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof addr.sun_path) {
      throw TransportError(TransportErrorCode::Connection, "unix socket path too long");
    }
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd_ < 0 || ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      const std::string err = std::strerror(errno);
      close();
      throw TransportError(TransportErrorCode::Connection, "cannot connect to " + path + ": " + err);
    }
  }

  void open_exec(const std::string& command) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
      throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw TransportError(TransportErrorCode::Connection, std::strerror(errno));
    }
    if (pid == 0) {
      ::close(sv[0]);
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::close(sv[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(sv[1]);
    fd_ = sv[0];
    child_ = pid;
  }

  void close() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
    if (child_ > 0) {
      int status = 0;
      if (::waitpid(child_, &status, WNOHANG) == 0) {
        ::kill(child_, SIGTERM);
        ::waitpid(child_, &status, 0);
      }
      child_ = -1;
    }
  }

  int fd_ = -1;
  pid_t child_ = -1;
  std::string buffer_;
};

/// Request/response client. Ids are assigned by the client, increase per
/// connection and are answered at most once; responses may arrive in any
/// order.
class DetectorClient {
public:
  explicit DetectorClient(const std::string& endpoint) : channel_(endpoint) {}

  std::uint64_t send(DetectionRequest req) {
    if (req.lang.empty()) throw ContractViolation("detection request needs a language string");
    req.id = next_id_++;
    channel_.write_line(serialize(req));
    pending_.insert(req.id);
    return req.id;
  }

  DetectionResponse receive(std::uint64_t id, std::chrono::milliseconds timeout) {
    if (!pending_.contains(id) && !ready_.contains(id)) {
      throw TransportError(TransportErrorCode::IdMismatch,
                           "no outstanding request with id " + std::to_string(id));
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto it = ready_.find(id); it != ready_.end()) {
        DetectionResponse r = it->second;
        ready_.erase(it);
        return r;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TransportError(TransportErrorCode::Timeout, "request " + std::to_string(id));
      DetectionResponse r = parse_response(channel_.read_line(left));
      if (!pending_.erase(r.id)) {
        throw TransportError(TransportErrorCode::IdMismatch,
                             "response for unknown or answered id " + std::to_string(r.id));
      }
      ready_.emplace(r.id, r);
    }
  }

  DetectionResponse query(DetectionRequest req, std::chrono::milliseconds timeout) {
    return receive(send(std::move(req)), timeout);
  }

private:
  LineChannel channel_;
  std::uint64_t next_id_ = 1;
  std::set<std::uint64_t> pending_;
  std::map<std::uint64_t, DetectionResponse> ready_;
};

struct CameraModel {
  Intrinsics intrinsics;
  double mount_yaw_deg = 0.0;  // counter-clockwise from the robot's heading

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

/// Back-projects the centroid pixel at the mean mask depth and snaps the
/// point to a grid cell. Detections that land outside the fan become NULL
/// (the confidence is kept).
inline SensorObservation project_detection(const DetectionResponse& resp, const CameraModel& cam,
                                           const RobotPose& robot, const OccupancyGrid& grid,
                                           const FanParams& fan) {
  if (!resp.detected) return {std::nullopt, resp.confidence};
  if (!(resp.u && resp.v && resp.depth_m)) {
    throw ContractViolation("project_detection: detection without geometry");
  }
  const double depth = *resp.depth_m;
  if (!(depth > 0.0)) throw ContractViolation("project_detection: depth must be positive");
  if (!(cam.intrinsics.fx > 0.0 && cam.intrinsics.fy > 0.0)) {
    throw ContractViolation("project_detection: focal lengths must be positive");
  }

  // Camera frame: x right, z forward. The vertical offset does not affect
  // the floor-plane position.
  const double right = (*resp.u - cam.intrinsics.cx) / cam.intrinsics.fx * depth;
  const double forward = depth;
  const double yaw = cam.mount_yaw_deg * std::numbers::pi / 180.0;
  const double f = forward * std::cos(yaw) + right * std::sin(yaw);
  const double s = -forward * std::sin(yaw) + right * std::cos(yaw);

  const Cell h = step_of(robot.orientation);
  const Cell r{-h.y, h.x};  // robot's right-hand side in grid coordinates
  const double wx = robot.x + (f * h.x + s * r.x) / grid.cell_size_m();
  const double wy = robot.y + (f * h.y + s * r.y) / grid.cell_size_m();
  const Cell c{static_cast<int>(std::floor(wx + 0.5)), static_cast<int>(std::floor(wy + 0.5))};

  if (grid.in_bounds(c) && fan_region(grid, robot, fan).contains(c)) {
    return {c, resp.confidence};
  }
  log::debug("projected detection (" + std::to_string(c.x) + "," + std::to_string(c.y) +
             ") lies outside the sensing region; treating as NULL");
  return {std::nullopt, resp.confidence};
}

}  // namespace lcom::bridge
