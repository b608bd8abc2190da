#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "swarm/engine.hpp"
#include "swarm/errors.hpp"
#include "swarm/live_bridge.hpp"

using namespace swarm;
using nlohmann::json;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

ScenarioSpec live_spec() {
  ScenarioSpec s;
  s.hand_source.type = HandSourceType::Live;
  s.robots.placement = Placement::Random;
  s.robots.region = Rect{{-200, -200}, {200, 200}};
  s.seed = 11;
  return s;
}

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const std::string& text) {
    ws_.text(true);
    ws_.write(net::buffer(text));
  }

  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  // next frame matching a predicate; gives up after `limit` frames
  template <class Pred>
  json read_until(Pred pred, int limit = 2000) {
    for (int i = 0; i < limit; ++i) {
      json j = read();
      if (pred(j)) return j;
    }
    throw std::runtime_error("no matching frame");
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(LiveBridge, StreamsStateSnapshots) {
  LiveOptions o;
  o.port = 0;
  LiveSession session(live_spec(), o);
  ASSERT_NE(session.port(), 0);
  session.start();
  Client c(session.port());
  const json a = c.read_until([](const json& j) { return j["type"] == "state"; });
  const json b = c.read_until([](const json& j) { return j["type"] == "state"; });
  EXPECT_GT(b["tick"].get<std::uint64_t>(), a["tick"].get<std::uint64_t>());
  EXPECT_EQ(a["robots"].size(), 6u);
  for (const char* key : {"t", "generator", "algorithm", "formation_tick", "input_tick",
                          "subgoals", "assignment", "obstacles", "metrics"}) {
    EXPECT_TRUE(a.contains(key)) << key;
  }
  EXPECT_TRUE(a["robots"][0].contains("radius"));
  session.stop();
  session.join();
}

TEST(LiveBridge, HandMessageRebuildsFormationPromptly) {
  LiveOptions o;
  o.port = 0;
  LiveSession session(live_spec(), o);
  session.start();
  Client c(session.port());
  c.read_until([](const json& j) { return j["type"] == "state"; });
  c.send(R"({"type":"hand","x":10,"y":-20,"sign":"scissors","hand_id":0})");
  const json s = c.read_until([](const json& j) {
    return j["type"] == "state" && !j["subgoals"].empty();
  });
  EXPECT_LE(s["formation_tick"].get<std::int64_t>() - s["input_tick"].get<std::int64_t>(), 2);
  EXPECT_EQ(s["generator"], "bone");
  EXPECT_EQ(s["subgoals"].size(), 6u);
  session.stop();
  session.join();
}

TEST(LiveBridge, ErrorFramesForBadInput) {
  LiveOptions o;
  o.port = 0;
  LiveSession session(live_spec(), o);
  session.start();
  Client c(session.port());
  c.send("{not json");
  const json e = c.read_until([](const json& j) { return j["type"] == "error"; });
  EXPECT_NE(e["detail"].get<std::string>().find("malformed JSON"), std::string::npos);
  c.send(R"({"type":"hand","x":0,"y":0,"sign":"fist"})");
  const json e2 = c.read_until([](const json& j) { return j["type"] == "error"; });
  EXPECT_NE(e2["detail"].get<std::string>().find("sign"), std::string::npos);
  // the session keeps running
  c.read_until([](const json& j) { return j["type"] == "state"; });
  session.stop();
  session.join();
}

TEST(LiveBridge, ConfigSwitchesGenerator) {
  LiveOptions o;
  o.port = 0;
  LiveSession session(live_spec(), o);
  session.start();
  Client c(session.port());
  c.send(R"({"type":"hand","x":0,"y":0,"sign":"paper"})");
  c.read_until([](const json& j) { return j["type"] == "state" && !j["subgoals"].empty(); });
  c.send(R"({"type":"config","algorithm":"silhouette-dynamic"})");
  const json s = c.read_until(
      [](const json& j) { return j["type"] == "state" && j["generator"] == "silhouette"; });
  EXPECT_EQ(s["algorithm"], "silhouette_dynamic");
  session.stop();
  session.join();
}

TEST(LiveBridge, SessionReplaysFromItsInputLog) {
  const auto dir = std::filesystem::temp_directory_path();
  LiveOptions o;
  o.port = 0;
  o.trace = dir / "swarm_live_trace.jsonl";
  o.input_log = dir / "swarm_live_inputs.jsonl";
  o.max_ticks = 150;
  {
    LiveSession session(live_spec(), o);
    session.start();
    Client c(session.port());
    c.read_until([](const json& j) { return j["type"] == "state"; });
    c.send(R"({"type":"hand","x":0,"y":0,"sign":"paper"})");
    c.read_until([](const json& j) { return j["type"] == "state" && !j["subgoals"].empty(); });
    c.send(R"({"type":"hand","x":40.5,"y":12,"sign":"rock"})");
    c.send(R"({"type":"config","density":"dense"})");
    session.join();
    EXPECT_EQ(session.ticks(), 150u);
  }
  std::ifstream log(o.input_log);
  std::ostringstream replayed;
  replay_input_log(live_spec(), log, &replayed);
  EXPECT_EQ(replayed.str(), slurp(o.trace));
  EXPECT_NE(slurp(o.input_log).find("\"end_tick\":150"), std::string::npos);
  std::filesystem::remove(o.trace);
  std::filesystem::remove(o.input_log);
}

TEST(LiveBridge, PortInUseIsAConfigError) {
  LiveOptions o;
  o.port = 0;
  LiveSession first(live_spec(), o);
  LiveOptions clash;
  clash.port = first.port();
  EXPECT_THROW(LiveSession(live_spec(), clash), ConfigError);
}
