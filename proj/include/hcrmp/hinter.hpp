// Copyright 2026 The HCRMP Authors
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

// Hint providers. A provider turns a HintContext into raw attribute weights.
// Output is deliberately left unvalidated here; the simplex guard in
// anchor.hpp owns that.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hcrmp/anchor.hpp"

namespace hcrmp {

enum class ProviderKind { mock, remote };

inline std::string_view to_string(ProviderKind p) {
  return p == ProviderKind::mock ? "mock" : "remote";
}

struct HintRequest {
  HintContext context;
  std::chrono::milliseconds deadline{1000};
  // Wall-clock mode: providers may actually consume time up to the deadline.
  // In tick mode (deterministic tests) a missed deadline is reported at once.
  bool wall_clock = false;
};

struct HintResponse {
  std::vector<double> raw_weights;
  ProviderKind provider = ProviderKind::mock;
  double latency_ms = 0.0;
};

class HintProvider {
 public:
  virtual ~HintProvider() = default;
  /// std::nullopt means "no response within the deadline".
  virtual std::optional<HintResponse> request(const HintRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Deterministic rule table keyed on the scene category of the digest.
inline HintResponse mock_hint(const HintContext& ctx) {
  std::vector<double> w;
  switch (ctx.category()) {
    case SceneCategory::hazard: w = {0.70, 0.15, 0.15}; break;
    case SceneCategory::merge_conflict: w = {0.50, 0.35, 0.15}; break;
    case SceneCategory::lead_vehicle: w = {0.45, 0.40, 0.15}; break;
    case SceneCategory::cruise: w = {0.25, 0.55, 0.20}; break;
  }
  if (ctx.pedestrian_present) {
    const bool evidence = std::any_of(ctx.fragments.begin(), ctx.fragments.end(), [](const std::string& f) {
      const auto toks = tokenize(f);
      return std::find(toks.begin(), toks.end(), "pedestrian") != toks.end();
    });
    if (evidence) w[0] += 0.10;
  }
  return {std::move(w), ProviderKind::mock, 0.0};
}

class MockHinter final : public HintProvider {
 public:
  std::optional<HintResponse> request(const HintRequest& req) override {
    return mock_hint(req.context);
  }
  std::string name() const override { return "mock"; }
};

enum class Fault { nan, negative, overscale, timeout };

inline std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::nan: return "nan";
    case Fault::negative: return "negative";
    case Fault::overscale: return "overscale";
    case Fault::timeout: return "timeout";
  }
  return "?";
}

inline Fault parse_fault(std::string_view s) {
  for (Fault f : {Fault::nan, Fault::negative, Fault::overscale, Fault::timeout})
    if (to_string(f) == s) return f;
  throw ConfigError("unknown fault kind '" + std::string(s) + "'");
}

/// Applies one corruption to a well-formed response.
inline std::optional<HintResponse> inject_fault(HintResponse r, Fault fault) {
  switch (fault) {
    case Fault::nan: r.raw_weights[0] = std::numeric_limits<double>::quiet_NaN(); break;
    case Fault::negative: r.raw_weights[0] = -r.raw_weights[0]; break;
    case Fault::overscale:
      for (double& x : r.raw_weights) x *= 10.0;
      break;
    case Fault::timeout: return std::nullopt;
  }
  return r;
}

/// Wraps another provider (mock by default) and corrupts every response.
class FaultyHinter final : public HintProvider {
 public:
  explicit FaultyHinter(Fault fault, std::unique_ptr<HintProvider> base = nullptr)
      : fault_(fault), base_(base ? std::move(base) : std::make_unique<MockHinter>()) {}

  std::optional<HintResponse> request(const HintRequest& req) override {
    if (fault_ == Fault::timeout) {
      // A hung backend: in wall-clock mode the worker really waits it out.
      if (req.wall_clock) std::this_thread::sleep_for(req.deadline);
      return std::nullopt;
    }
    auto r = base_->request(req);
    if (!r) return r;
    return inject_fault(std::move(*r), fault_);
  }
  std::string name() const override { return "faulty:" + std::string(to_string(fault_)); }

 private:
  Fault fault_;
  std::unique_ptr<HintProvider> base_;
};

// ---------------------------------------------------------------------------
// Remote provider: newline-delimited JSON over TCP. See docs/hint_protocol.md.

inline constexpr int kHintProtocolVersion = 1;
inline constexpr const char* kHintEndpointEnv = "HCRMP_HINT_ENDPOINT";

/// Request line, "version" first.
inline std::string encode_hint_request(const HintRequest& req) {
  nlohmann::ordered_json j;
  j["version"] = kHintProtocolVersion;
  j["query"] = req.context.query_text;
  j["fragments"] = req.context.fragments;
  j["digest"] = req.context.digest;
  j["deadline_ms"] = req.deadline.count();
  return j.dump() + "\n";
}

/// Parses one response line. Wrong version, wrong arity, non-numeric or
/// otherwise malformed payloads yield std::nullopt.
inline std::optional<std::vector<double>> decode_hint_response(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto v = j.find("version");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kHintProtocolVersion) return std::nullopt;
  const auto w = j.find("weights");
  if (w == j.end() || !w->is_array() || w->size() != kAttributes) return std::nullopt;
  std::vector<double> out;
  for (const auto& x : *w) {
    if (!x.is_number()) return std::nullopt;
    out.push_back(x.get<double>());
  }
  return out;
}

struct Endpoint {
  std::string host;
  std::string port;
};

inline std::optional<Endpoint> parse_endpoint(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) return std::nullopt;
  return Endpoint{std::string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
}

/// Client for an external hint service. Disabled unless an endpoint is
/// given; a disabled client never answers. Every failure maps to "no
/// response".
class RemoteHinter final : public HintProvider {
 public:
  explicit RemoteHinter(std::optional<Endpoint> endpoint = std::nullopt)
      : endpoint_(std::move(endpoint)) {}

  /// Endpoint from $HCRMP_HINT_ENDPOINT ("host:port"); disabled when unset.
  static RemoteHinter from_environment() {
    const char* env = std::getenv(kHintEndpointEnv);
    return RemoteHinter(env ? parse_endpoint(env) : std::nullopt);
  }

  bool enabled() const { return endpoint_.has_value(); }

  std::optional<HintResponse> request(const HintRequest& req) override {
    if (!endpoint_) return std::nullopt;
    const auto start = std::chrono::steady_clock::now();
    const auto deadline = start + req.deadline;
    const int fd = connect_with_deadline(deadline);
    if (fd < 0) return std::nullopt;
    std::optional<std::vector<double>> weights;
    if (send_all(fd, encode_hint_request(req), deadline)) {
      if (auto line = read_line(fd, deadline)) weights = decode_hint_response(*line);
    }
    ::close(fd);
    if (!weights) return std::nullopt;
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return HintResponse{std::move(*weights), ProviderKind::remote, latency};
  }

  std::string name() const override { return "remote"; }

 private:
  using Clock = std::chrono::steady_clock;

  static int remaining_ms(Clock::time_point deadline) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return ms > 0 ? static_cast<int>(ms) : 0;
  }

  int connect_with_deadline(Clock::time_point deadline) const {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(endpoint_->host.c_str(), endpoint_->port.c_str(), &hints, &res) != 0) return -1;
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
      int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
      if (rc != 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        if (::poll(&p, 1, remaining_ms(deadline)) == 1) {
          int err = 0;
          socklen_t len = sizeof(err);
          ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
          rc = err == 0 ? 0 : -1;
        }
      }
      if (rc == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    return fd;
  }

  static bool send_all(int fd, const std::string& data, Clock::time_point deadline) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      pollfd p{fd, POLLOUT, 0};
      if (::poll(&p, 1, remaining_ms(deadline)) != 1) return false;
      const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  static std::optional<std::string> read_line(int fd, Clock::time_point deadline) {
    std::string buf;
    char chunk[512];
    while (buf.size() < (1u << 20)) {
      pollfd p{fd, POLLIN, 0};
      if (::poll(&p, 1, remaining_ms(deadline)) != 1) return std::nullopt;
      const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
      if (n <= 0) return std::nullopt;
      buf.append(chunk, static_cast<std::size_t>(n));
      if (const auto nl = buf.find('\n'); nl != std::string::npos) return buf.substr(0, nl);
    }
    return std::nullopt;
  }

  std::optional<Endpoint> endpoint_;
};

}  // namespace hcrmp
