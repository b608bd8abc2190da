#include "swarm/live_bridge.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kMaxQueuedFrames = 16;
constexpr int kMaxCatchUpTicks = 5;

std::string error_frame(const std::string& detail) {
  ordered_json j;
  j["type"] = "error";
  j["detail"] = detail;
  return j.dump();
}

}  // namespace

ordered_json snapshot_json(const Engine& engine) {
  ordered_json j;
  j["type"] = "state";
  j["tick"] = engine.tick_index();
  j["t"] = engine.time();
  j["generator"] = generator_name(engine.generator());
  j["algorithm"] = algorithm_name(engine.spec().algorithm);
  j["formation_tick"] = engine.formation_tick();
  j["input_tick"] = engine.input_tick();
  ordered_json robots = ordered_json::array();
  for (const RobotState& r : engine.robots()) {
    ordered_json o;
    o["id"] = r.id;
    o["x"] = r.pose.position.x;
    o["y"] = r.pose.position.y;
    o["heading"] = r.pose.heading;
    o["radius"] = r.radius;
    o["converged"] = r.command.converged;
    robots.push_back(std::move(o));
  }
  j["robots"] = std::move(robots);
  ordered_json goals = ordered_json::array();
  for (const Vec2& p : engine.subgoals()) goals.push_back({p.x, p.y});
  j["subgoals"] = std::move(goals);
  j["assignment"] = engine.assignment();
  ordered_json obstacles = ordered_json::array();
  for (const Obstacle& o : engine.obstacles()) {
    ordered_json poly = ordered_json::array();
    for (const Vec2& p : o.polygon) poly.push_back({p.x, p.y});
    obstacles.push_back(std::move(poly));
  }
  j["obstacles"] = std::move(obstacles);
  j["metrics"] = to_json(engine.metrics());
  return j;
}

struct LiveSession::Impl {
  class Connection;

  Impl(ScenarioSpec spec, LiveOptions opts)
      : options(std::move(opts)), engine(std::move(spec)), acceptor(ioc), timer(ioc),
        signals(ioc) {
    if (!options.trace.empty()) {
      trace.open(options.trace);
      if (!trace) throw ConfigError("cannot write " + options.trace.string());
    }
    if (!options.input_log.empty()) {
      input_log.open(options.input_log);
      if (!input_log) throw ConfigError("cannot write " + options.input_log.string());
    }
    boost::system::error_code ec;
    const tcp::endpoint ep(net::ip::make_address(options.address, ec), options.port);
    if (ec) throw ConfigError("bad address " + options.address);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw ConfigError("cannot listen on " + options.address + ":" +
                        std::to_string(options.port) + ": " + ec.message());
    }
    bound_port = acceptor.local_endpoint().port();
    dt = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(engine.spec().planner.dt));
  }

  void accept();
  void on_message(const std::shared_ptr<Connection>& from, const std::string& text);
  void schedule_tick();
  void tick_once();
  void broadcast(const std::string& frame);
  void shutdown();

  LiveOptions options;
  Engine engine;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  net::signal_set signals;
  std::set<std::shared_ptr<Connection>> connections;
  std::vector<json> mailbox;
  std::ofstream trace;
  std::ofstream input_log;
  unsigned short bound_port = 0;
  std::chrono::steady_clock::duration dt{};
  std::chrono::steady_clock::time_point next_tick;
  std::atomic<std::uint64_t> ticks{0};
  bool finished = false;
  std::thread thread;
};

class LiveSession::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Impl& owner) : ws_(std::move(socket)), owner_(owner) {}

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      self->owner_.connections.insert(self);
      self->read();
    });
  }

  void send(std::string frame) {
    if (!open_) return;
    if (queue_.size() >= kMaxQueuedFrames) queue_.erase(queue_.begin() + 1);
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (!open_) return;
    open_ = false;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->owner_.connections.erase(self);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->owner_.on_message(self, text);
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->open_ = false;
                        self->owner_.connections.erase(self);
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  websocket::stream<tcp::socket> ws_;
  Impl& owner_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool open_ = false;
};

void LiveSession::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Connection>(std::move(socket), *this)->start();
    accept();
  });
}

void LiveSession::Impl::on_message(const std::shared_ptr<Connection>& from,
                                   const std::string& text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    from->send(error_frame(std::string("malformed JSON: ") + e.what()));
    return;
  }
  if (const std::string err = check_input(msg); !err.empty()) {
    from->send(error_frame(err));
    return;
  }
  mailbox.push_back(std::move(msg));
}

void LiveSession::Impl::broadcast(const std::string& frame) {
  const auto targets = connections;
  for (const auto& c : targets) c->send(frame);
}

void LiveSession::Impl::tick_once() {
  const std::uint64_t k = engine.tick_index();
  for (const json& msg : mailbox) {
    if (input_log.is_open()) {
      json line;
      line["tick"] = k;
      line["msg"] = msg;
      input_log << line.dump() << '\n';
    }
    engine.push_input(msg);
  }
  const bool had_inputs = !mailbox.empty();
  mailbox.clear();
  const TickRecord rec = engine.step();
  ticks = engine.tick_index();
  if (trace.is_open()) trace << serialize_tick(rec) << '\n';
  for (const std::string& e : engine.input_errors()) broadcast(error_frame(e));
  if (had_inputs || engine.tick_index() % options.snapshot_every == 0) {
    broadcast(snapshot_json(engine).dump());
  }
}

void LiveSession::Impl::schedule_tick() {
  next_tick += dt;
  timer.expires_at(next_tick);
  timer.async_wait([this](beast::error_code ec) {
    if (ec || finished) return;
    tick_once();
    if ((options.max_ticks && engine.tick_index() >= options.max_ticks) || engine.finished()) {
      shutdown();
      return;
    }
    // late timers fire at once until caught up; a long stall drops the backlog
    const auto now = std::chrono::steady_clock::now();
    if (now - next_tick > kMaxCatchUpTicks * dt) next_tick = now;
    schedule_tick();
  });
}

void LiveSession::Impl::shutdown() {
  if (finished) return;
  finished = true;
  beast::error_code ec;
  acceptor.close(ec);
  timer.cancel();
  signals.cancel(ec);
  const auto targets = connections;
  for (const auto& c : targets) c->close();
  connections.clear();
  if (input_log.is_open()) {
    input_log << json{{"end_tick", engine.tick_index()}}.dump() << '\n';
    input_log.flush();
  }
  if (trace.is_open()) trace.flush();
  ioc.stop();
}

LiveSession::LiveSession(ScenarioSpec spec, LiveOptions options)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(options))) {}

LiveSession::~LiveSession() {
  stop();
  join();
}

unsigned short LiveSession::port() const { return impl_->bound_port; }

std::uint64_t LiveSession::ticks() const { return impl_->ticks; }

void LiveSession::run(bool handle_signals) {
  Impl& s = *impl_;
  if (handle_signals) {
    s.signals.add(SIGINT);
    s.signals.add(SIGTERM);
    s.signals.async_wait([&s](beast::error_code ec, int) {
      if (!ec) s.shutdown();
    });
  }
  s.accept();
  s.next_tick = std::chrono::steady_clock::now();
  s.schedule_tick();
  s.ioc.run();
  if (!s.finished) s.shutdown();
}

void LiveSession::start() {
  impl_->thread = std::thread([this] { run(false); });
}

void LiveSession::stop() {
  Impl& s = *impl_;
  net::post(s.ioc, [&s] { s.shutdown(); });
}

void LiveSession::join() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace swarm
