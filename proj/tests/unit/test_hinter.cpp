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

#include <gtest/gtest.h>

#include <netinet/in.h>

#include <atomic>
#include <thread>

#include "hcrmp/hinter.hpp"

namespace hcrmp {
namespace {

HintContext context_for(SceneCategory c, bool pedestrian, std::vector<std::string> fragments = {}) {
  HintContext ctx;
  ctx.digest[static_cast<std::size_t>(c)] = 1.0;
  ctx.pedestrian_present = pedestrian;
  ctx.fragments = std::move(fragments);
  ctx.query_text = "q";
  return ctx;
}

TEST(Mock, RuleTable) {
  EXPECT_EQ(mock_hint(context_for(SceneCategory::cruise, false)).raw_weights, (std::vector<double>{0.25, 0.55, 0.20}));
  EXPECT_EQ(mock_hint(context_for(SceneCategory::lead_vehicle, false)).raw_weights,
            (std::vector<double>{0.45, 0.40, 0.15}));
  EXPECT_EQ(mock_hint(context_for(SceneCategory::merge_conflict, false)).raw_weights,
            (std::vector<double>{0.50, 0.35, 0.15}));
  EXPECT_EQ(mock_hint(context_for(SceneCategory::hazard, false)).raw_weights,
            (std::vector<double>{0.70, 0.15, 0.15}));
}

TEST(Mock, PedestrianEvidenceBumpsSafety) {
  const auto r = mock_hint(context_for(SceneCategory::hazard, true, {"Yield to a pedestrian crossing."}));
  ASSERT_EQ(r.raw_weights.size(), 3u);
  EXPECT_NEAR(r.raw_weights[0], 0.80, 1e-15);
  EXPECT_EQ(r.raw_weights[1], 0.15);
  EXPECT_EQ(r.raw_weights[2], 0.15);
}

TEST(Mock, NoBumpWithoutRetrievedEvidence) {
  const auto r = mock_hint(context_for(SceneCategory::hazard, true, {"Keep two seconds of headway."}));
  EXPECT_EQ(r.raw_weights[0], 0.70);
}

TEST(Mock, SameContextSameResponse) {
  MockHinter m;
  const HintRequest req{context_for(SceneCategory::merge_conflict, false)};
  EXPECT_EQ(m.request(req)->raw_weights, m.request(req)->raw_weights);
}

TEST(Faulty, Injections) {
  const HintRequest req{context_for(SceneCategory::cruise, false)};
  EXPECT_TRUE(std::isnan(FaultyHinter(Fault::nan).request(req)->raw_weights[0]));
  EXPECT_EQ(FaultyHinter(Fault::negative).request(req)->raw_weights[0], -0.25);
  const auto over = FaultyHinter(Fault::overscale).request(req)->raw_weights;
  EXPECT_NEAR(over[0], 2.5, 1e-15);
  EXPECT_NEAR(over[1], 5.5, 1e-15);
  EXPECT_NEAR(over[2], 2.0, 1e-15);
  EXPECT_FALSE(FaultyHinter(Fault::timeout).request(req).has_value());
}

TEST(Faulty, ParseNames) {
  EXPECT_EQ(parse_fault("overscale"), Fault::overscale);
  EXPECT_THROW(parse_fault("garbage"), ConfigError);
}

// --- wire format -----------------------------------------------------------

TEST(Protocol, RequestLine) {
  HintRequest req{context_for(SceneCategory::hazard, true, {"a", "b"}), std::chrono::milliseconds(250)};
  req.context.query_text = "scenario=hazard";
  const auto line = encode_hint_request(req);
  ASSERT_EQ(line.back(), '\n');
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["query"], "scenario=hazard");
  EXPECT_EQ(j["fragments"].size(), 2u);
  EXPECT_EQ(j["digest"].size(), kLlmDim);
  EXPECT_EQ(j["deadline_ms"], 250);
  EXPECT_EQ(line.rfind("{\"version\":1,", 0), 0u);
}

TEST(Protocol, ResponseDecoding) {
  EXPECT_EQ(*decode_hint_response(R"({"version":1,"weights":[0.6,0.2,0.2]})"), (std::vector<double>{0.6, 0.2, 0.2}));
  EXPECT_FALSE(decode_hint_response(R"({"version":1,"weights":[0.6,0.4]})"));
  EXPECT_FALSE(decode_hint_response(R"({"version":2,"weights":[0.6,0.2,0.2]})"));
  EXPECT_FALSE(decode_hint_response(R"({"version":1,"weights":[0.6,"x",0.2]})"));
  EXPECT_FALSE(decode_hint_response("not json"));
  EXPECT_FALSE(decode_hint_response("[]"));
}

TEST(Protocol, EndpointParsing) {
  const auto e = parse_endpoint("127.0.0.1:9000");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->host, "127.0.0.1");
  EXPECT_EQ(e->port, "9000");
  EXPECT_FALSE(parse_endpoint("nohost"));
  EXPECT_FALSE(parse_endpoint(":80"));
}

// One-shot line server on an ephemeral loopback port.
class LineServer {
 public:
  explicit LineServer(std::string reply, int delay_ms = 0) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    ::listen(fd_, 1);
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this, reply = std::move(reply), delay_ms] {
      const int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) return;
      std::string got;
      char buf[512];
      while (got.find('\n') == std::string::npos) {
        const ssize_t n = ::recv(c, buf, sizeof(buf), 0);
        if (n <= 0) break;
        got.append(buf, static_cast<std::size_t>(n));
      }
      received = got;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      ::send(c, reply.data(), reply.size(), MSG_NOSIGNAL);
      ::close(c);
    });
  }
  ~LineServer() {
    ::shutdown(fd_, SHUT_RDWR);
    thread_.join();
    ::close(fd_);
  }
  Endpoint endpoint() const { return {"127.0.0.1", std::to_string(port_)}; }
  std::string received;

 private:
  int fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

TEST(Remote, WellFormedReplyPassesThroughUnvalidated) {
  LineServer server(R"({"version":1,"weights":[0.6,0.2,0.2]})" "\n");
  RemoteHinter remote(server.endpoint());
  const auto r = remote.request(HintRequest{context_for(SceneCategory::cruise, false)});
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->raw_weights, (std::vector<double>{0.6, 0.2, 0.2}));
  EXPECT_EQ(r->provider, ProviderKind::remote);
  EXPECT_GE(r->latency_ms, 0.0);
}

TEST(Remote, OffSimplexReplyIsNotRepairedHere) {
  LineServer server(R"({"version":1,"weights":[3,-1,0]})" "\n");
  RemoteHinter remote(server.endpoint());
  const auto r = remote.request(HintRequest{context_for(SceneCategory::cruise, false)});
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->raw_weights, (std::vector<double>{3, -1, 0}));
}

TEST(Remote, WrongArityIsNoResponse) {
  LineServer server(R"({"version":1,"weights":[0.5,0.5]})" "\n");
  RemoteHinter remote(server.endpoint());
  EXPECT_FALSE(remote.request(HintRequest{context_for(SceneCategory::cruise, false)}).has_value());
}

TEST(Remote, SlowServerMissesDeadline) {
  LineServer server(R"({"version":1,"weights":[0.6,0.2,0.2]})" "\n", 400);
  RemoteHinter remote(server.endpoint());
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = remote.request(HintRequest{context_for(SceneCategory::cruise, false), std::chrono::milliseconds(100)});
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_FALSE(r.has_value());
  EXPECT_LT(ms, 350.0);
}

TEST(Remote, ServerSeesRequestLine) {
  LineServer server(R"({"version":1,"weights":[0.6,0.2,0.2]})" "\n");
  {
    RemoteHinter remote(server.endpoint());
    remote.request(HintRequest{context_for(SceneCategory::cruise, false)});
  }
  // received is written before the reply is sent, so it is visible by now.
  EXPECT_EQ(nlohmann::json::parse(server.received)["version"], 1);
}

TEST(Remote, UnreachableEndpointIsNoResponse) {
  // Grab a free port, then close it so nothing listens there.
  int port = 0;
  {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  RemoteHinter remote(Endpoint{"127.0.0.1", std::to_string(port)});
  EXPECT_FALSE(remote.request(HintRequest{context_for(SceneCategory::cruise, false)}).has_value());
}

TEST(Remote, DisabledWithoutEndpoint) {
  ::unsetenv(kHintEndpointEnv);
  auto remote = RemoteHinter::from_environment();
  EXPECT_FALSE(remote.enabled());
  EXPECT_FALSE(remote.request(HintRequest{context_for(SceneCategory::cruise, false)}).has_value());
}

}  // namespace
}  // namespace hcrmp
