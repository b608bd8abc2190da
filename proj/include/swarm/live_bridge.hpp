#pragma once

// WebSocket session service around one Engine. A single io_context thread
// owns the engine, ticks it on a wall-clock timer and fans snapshots out to
// every connected client.
//
// Client -> server text frames are live input messages (see check_input).
// Server -> client frames:
//   {"type":"state", "tick", "t", "generator", "formation_tick",
//    "input_tick", "robots":[{id,x,y,heading,converged}], "subgoals",
//    "assignment", "obstacles", "metrics"}
//   {"type":"error", "detail"}

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "swarm/engine.hpp"

namespace swarm {

struct LiveOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  std::filesystem::path trace;
  std::filesystem::path input_log;
  std::uint64_t max_ticks = 0;  // 0: until stop()
  std::uint64_t snapshot_every = 4;  // ticks between snapshots
};

nlohmann::ordered_json snapshot_json(const Engine& engine);

class LiveSession {
 public:
  /// Binds the listening socket. Throws ConfigError when the port is busy or
  /// the output files cannot be opened.
  LiveSession(ScenarioSpec spec, LiveOptions options);
  ~LiveSession();
  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  unsigned short port() const;

  /// Serves until stop(), SIGINT/SIGTERM (when handle_signals) or max_ticks.
  void run(bool handle_signals = false);
  /// run() on a background thread.
  void start();
  /// Thread-safe. Flushes the input log end marker.
  void stop();
  /// Blocks until the serving thread exits.
  void join();

  /// Ticks stepped so far; only stable after join().
  std::uint64_t ticks() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarm
