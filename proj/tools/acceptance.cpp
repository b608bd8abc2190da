// Acceptance gate: one PASS/FAIL line per criterion. Exit 0 when every
// selected criterion passes, 2 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <bit>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "swarm/assignment.hpp"
#include "swarm/cli.hpp"
#include "swarm/drive_control.hpp"
#include "swarm/engine.hpp"
#include "swarm/formation.hpp"
#include "swarm/graycode.hpp"
#include "swarm/hand_model.hpp"
#include "swarm/live_bridge.hpp"
#include "swarm/rvo_planner.hpp"
#include "swarm/scenario.hpp"
#include "swarm/suites.hpp"

namespace fs = std::filesystem;
using namespace swarm;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1
Outcome assignment_optimality() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  std::uniform_int_distribution<int> small(0, 9);
  int mismatches = 0;
  int total = 0;
  for (std::size_t n = 2; n <= 7; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      // every third matrix is integer-valued to force ties
      std::vector<double> e(n * n);
      for (double& v : e) v = trial % 3 == 0 ? small(rng) : u(rng);
      const CostMatrix c(n, e);
      std::vector<std::size_t> p(n);
      std::iota(p.begin(), p.end(), 0);
      double best = 1e300;
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += c(i, p[i]);
        best = std::min(best, s);
      } while (std::next_permutation(p.begin(), p.end()));
      const Assignment a = solve_lsap(c);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c(i, a.perm[i]);
      if (!is_bijection(a.perm) || s != best || a.total_cost != best) ++mismatches;
      ++total;
    }
  }
  return {mismatches == 0,
          std::to_string(total - mismatches) + "/" + std::to_string(total) + " exact optima"};
}

// 2
Outcome dynamic_dominance() {
  std::size_t frames = 0;
  std::size_t violations = 0;
  Engine dyn(flip_scenario(Algorithm::BoneDynamic));
  while (!dyn.finished()) {
    const TickRecord r = dyn.step();
    if (r.assignment_cost && r.static_cost) {
      ++frames;
      if (*r.assignment_cost > *r.static_cost) ++violations;
    }
  }
  Engine stat(flip_scenario(Algorithm::BoneStatic));
  stat.run(nullptr);
  const double d = dyn.metrics().commanded_travel;
  const double s = stat.metrics().commanded_travel;
  const bool margin = d <= 0.95 * s;
  std::ostringstream o;
  o << frames << " frames, " << violations << " with dynamic > static; commanded travel "
    << fmt("%.1f", d) << " vs " << fmt("%.1f", s) << " mm (" << fmt("%.1f", 100.0 * (1.0 - d / s))
    << "% less)";
  return {frames > 0 && violations == 0 && margin, o.str()};
}

// 3: the planner robots carry the RVO guarantee
Outcome rvo_safety() {
  std::ostringstream o;
  bool ok = true;
  const std::vector<std::pair<const char*, ScenarioSpec>> runs{
      {"head-on-2", head_on_scenario()}, {"circle-8", circle_scenario()}};
  for (const auto& [name, spec] : runs) {
    Engine e(spec);
    const double s = 2.0 * robot_radius(spec.robots.size);
    double min_sep = 1e300;
    std::uint64_t contacts = 0;
    std::set<std::pair<std::size_t, std::size_t>> touching;
    while (!e.finished()) {
      e.step();
      const auto& leads = e.leads();
      for (std::size_t i = 0; i < leads.size(); ++i) {
        for (std::size_t j = i + 1; j < leads.size(); ++j) {
          const double dist = distance(leads[i].pose.position, leads[j].pose.position);
          min_sep = std::min(min_sep, dist);
          if (dist < s) {
            if (touching.insert({i, j}).second) ++contacts;
          } else {
            touching.erase({i, j});
          }
        }
      }
    }
    ok = ok && min_sep >= s && contacts == 0;
    o << (o.tellp() > 0 ? "; " : "") << name << " min " << fmt("%.2f", min_sep) << " mm, "
      << contacts << " contacts";
  }
  return {ok, o.str()};
}

// 4: the right-hand target is the gate; the mirrored side is reported only
Outcome reaching() {
  std::ostringstream o;
  bool ok = true;
  for (bool right : {true, false}) {
    o << (right ? "right:" : "; left (info):");
    for (SignName sign : {SignName::Rock, SignName::Scissors, SignName::Paper,
                          SignName::ReversedPaper}) {
      const ScenarioSpec spec = reaching_scenario(sign, right, Algorithm::BoneDynamic);
      if (spec.robot_count() != 6 || spec.robots.size != RobotSize::Mm30 ||
          spec.gains.v_l_max != 400.0 || spec.gains.v_r_max != 400.0 ||
          spec.command_period != 0.1) {
        return {false, "reaching setup does not match the reference parameters"};
      }
      const Metrics m = Engine(spec).run(nullptr);
      const bool fit = m.time_to_fit && *m.time_to_fit <= spec.task->window_s;
      if (right) ok = ok && fit;
      o << (sign == SignName::Rock ? " " : ", ") << sign_name(sign) << " "
        << (m.time_to_fit ? fmt("%.2f s", *m.time_to_fit) : "no fit");
    }
  }
  return {ok, o.str()};
}

// 5
Outcome table_one() {
  const std::vector<std::tuple<RobotSize, Density, std::size_t>> want{
      {RobotSize::Mm20, Density::Sparse, 6},  {RobotSize::Mm20, Density::Medium, 18},
      {RobotSize::Mm20, Density::Dense, 27},  {RobotSize::Mm30, Density::Sparse, 6},
      {RobotSize::Mm30, Density::Medium, 8},  {RobotSize::Mm30, Density::Dense, 12}};
  std::ostringstream o;
  bool ok = true;
  for (const auto& [size, density, n] : want) {
    ScenarioSpec s;
    s.robots.size = size;
    s.robots.density = density;
    const std::size_t got = s.robot_count();
    const bool layout = default_layout(size, density).anchors.size() == n;
    ok = ok && got == n && layout;
    o << (o.tellp() > 0 ? " " : "") << static_cast<int>(size) << "mm/" << density_name(density)
      << "=" << got;
  }
  return {ok, o.str()};
}

// 6
Outcome control_convergence() {
  const ControlGains g;
  const ScenarioSpec defaults;
  const double wheel_base = defaults.robots.resolved_wheel_base();
  const double dt = defaults.planner.dt;
  const int every = static_cast<int>(std::lround(defaults.command_period / dt));
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int converged = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double r = 500.0 * std::sqrt(u(rng));
    const double a = 2.0 * kPi * u(rng);
    Pose2 p{unit_from_angle(a) * r, wrap_angle(2.0 * kPi * u(rng))};
    DriveState s;
    WheelCommand c;
    bool done = false;
    for (int k = 0; k < 1000 && !done; ++k) {
      if (k % every == 0) {
        s = observe(s, p, Vec2{}, every * dt, g.sigma);
        c = compute_wheel_command(s, g);
        done = c.converged;
      }
      if (!done) p = integrate_unicycle(p, {c.v_l, c.v_r}, wheel_base, dt);
    }
    if (!done && distance(p.position, Vec2{}) < g.sigma) done = true;
    if (done) ++converged;
  }
  // pre-clamp symmetry under theta negation
  std::uniform_real_distribution<double> l(0.0, 600.0);
  int asym = 0;
  for (int i = 0; i < 1000; ++i) {
    DriveState s;
    s.l = l(rng);
    s.theta = wrap_angle(2.0 * kPi * u(rng));
    s.theta_dot = 50.0 * (u(rng) - 0.5);
    s.converged = false;
    DriveState m = s;
    m.theta = -s.theta;
    m.theta_dot = -s.theta_dot;
    const auto [a_l, a_r] = raw_wheel_speeds(s, g);
    const auto [b_l, b_r] = raw_wheel_speeds(m, g);
    if (a_l != b_r || a_r != b_l) ++asym;
  }
  std::ostringstream o;
  o << converged << "/100 converged within 10 s; " << asym << "/1000 asymmetric pairs";
  return {converged == 100 && asym == 0, o.str()};
}

// 7
Outcome graycode() {
  GrayCodeConfig cfg;
  cfg.origin = {-2048, -2048};
  const std::uint32_t n = cfg.cells_per_axis();
  int bad_round = 0;
  int bad_adj = 0;
  for (std::uint32_t x = 0; x < n; ++x) {
    const Cell c{x, n - 1 - x};
    const auto bits = sample_bits(c, cfg);
    if (!(decode_bits(bits[0], bits[1], cfg) == c) || gray_decode(gray_encode(x)) != x) ++bad_round;
    if (x + 1 < n && std::popcount(gray_encode(x) ^ gray_encode(x + 1)) != 1) ++bad_adj;
  }
  const double baseline = distance(cfg.sensor_offsets[0], cfg.sensor_offsets[1]);
  const double bound = std::asin(cfg.cell_size * std::sqrt(2.0) / baseline);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-1500.0, 1500.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  int over = 0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose2 truth{{pos(rng), pos(rng)}, ang(rng)};
    std::array<Cell, 2> cells;
    for (int s = 0; s < 2; ++s) {
      const Cell seen = cell_of(truth.position + rotate(cfg.sensor_offsets[s], truth.heading), cfg);
      const auto bits = sample_bits(seen, cfg);
      cells[s] = decode_bits(bits[0], bits[1], cfg);
    }
    const PhotodiodePose p = pose_from_photodiodes(cells[0], cells[1], cfg);
    const double err = std::abs(wrap_angle(p.orientation - truth.heading));
    worst = std::max(worst, err);
    if (err > bound) ++over;
  }
  std::ostringstream o;
  o << n << " cells/axis, " << bad_round << " round-trip and " << bad_adj
    << " adjacency failures; worst orientation error " << fmt("%.4f", worst) << " rad, bound "
    << fmt("%.4f", bound) << ", " << over << " over";
  return {bad_round == 0 && bad_adj == 0 && over == 0, o.str()};
}

// 8
Outcome silhouette_containment() {
  std::size_t frames = 0;
  std::size_t points = 0;
  std::size_t outside = 0;
  for (SignName sign : {SignName::Rock, SignName::Scissors, SignName::Paper,
                        SignName::ReversedPaper}) {
    const std::vector<HandKeyframe> keys{{0.0, {{-60, -80}, kPi / 2}, sign, 1.0},
                                         {1.0, {{-60, -80}, kPi / 2}, sign, 1.0},
                                         {3.0, {{110, 200}, 1.2}, sign, 1.3}};
    const HandTrajectory traj = script_trajectory(keys, 50.0);
    for (std::size_t k : {6u, 12u}) {
      FormationConfig cfg;
      cfg.generator = Generator::Silhouette;
      cfg.k = k;
      for (const HandFrame& f : traj.frames) {
        const PlanarHand plane = project_to_plane(f);
        const std::set<std::pair<double, double>> mesh = [&] {
          std::set<std::pair<double, double>> s;
          for (const Vec2& v : plane.mesh) s.insert({v.x, v.y});
          return s;
        }();
        const SubgoalFormation sf = generate_formation(f, cfg);
        for (const Vec2& p : sf.points) {
          ++points;
          if (!mesh.count({p.x, p.y})) ++outside;
        }
        ++frames;
      }
    }
  }
  std::ostringstream o;
  o << points << " subgoals over " << frames << " frames, " << outside << " off-mesh";
  return {outside == 0 && points > 0, o.str()};
}

// live session driven over a loopback socket, replayed through the CLI
bool live_session_replays(std::string& detail) {
  namespace beast = boost::beast;
  namespace net = boost::asio;
  using tcp = net::ip::tcp;
  const fs::path dir = fs::temp_directory_path() / "swarm_acceptance";
  fs::create_directories(dir);
  const fs::path scenario = fs::path(SWARM_SOURCE_DIR) / "scenarios" / "live.json";
  LiveOptions o;
  o.port = 0;
  o.trace = dir / "session.jsonl";
  o.input_log = dir / "inputs.jsonl";
  o.max_ticks = 300;
  {
    LiveSession session(load_scenario(scenario), o);
    session.start();
    net::io_context ioc;
    beast::websocket::stream<tcp::socket> ws(ioc);
    tcp::resolver resolver(ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(session.port())));
    ws.handshake("127.0.0.1", "/");
    ws.text(true);
    const char* msgs[] = {R"({"type":"hand","x":0,"y":0,"sign":"paper"})",
                          R"({"type":"hand","x":60,"y":40,"sign":"scissors","yaw":1.2})",
                          R"({"type":"config","algorithm":"silhouette-dynamic"})",
                          R"({"type":"config","density":"dense"})",
                          R"({"type":"hand","x":-50,"y":90,"sign":"rock"})"};
    for (const char* m : msgs) {
      ws.write(net::buffer(std::string(m)));
      for (int i = 0; i < 10; ++i) {
        beast::flat_buffer buf;
        ws.read(buf);
      }
    }
    session.join();
  }
  const fs::path replayed = dir / "replayed.jsonl";
  std::vector<std::string> args{"swarm", "replay", "--scenario", scenario.string(),
                                "--input-log", o.input_log.string(), "--trace",
                                replayed.string()};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  const std::string live = slurp(o.trace);
  const bool same = rc == 0 && !live.empty() && live == slurp(replayed);
  const auto lines = std::count(live.begin(), live.end(), '\n');
  detail = "live session " + std::to_string(lines) + " ticks " +
           (same ? "replayed byte-exactly" : "replay differs");
  fs::remove_all(dir);
  return same;
}

// 9
Outcome determinism() {
  std::vector<std::pair<std::string, ScenarioSpec>> runs;
  for (const auto& entry : fs::directory_iterator(fs::path(SWARM_SOURCE_DIR) / "scenarios")) {
    if (entry.path().extension() != ".json") continue;
    ScenarioSpec s = load_scenario(entry.path());
    if (s.hand_source.type == HandSourceType::Live) continue;
    runs.emplace_back(entry.path().stem().string(), s);
  }
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  runs.emplace_back("flip", flip_scenario(Algorithm::BoneDynamic));
  ScenarioSpec random = rock_sweep_scenario(Density::Dense);
  random.robots.placement = Placement::Random;
  random.seed = 1234;
  runs.emplace_back("random-start", random);
  int differ = 0;
  for (const auto& [name, spec] : runs) {
    std::ostringstream a;
    std::ostringstream b;
    Engine(spec).run(&a);
    Engine(spec).run(&b);
    if (a.str() != b.str() || a.str().empty()) ++differ;
  }
  std::string live;
  const bool replay = live_session_replays(live);
  std::ostringstream o;
  o << runs.size() - differ << "/" << runs.size() << " scenarios byte-identical; " << live;
  return {differ == 0 && replay, o.str()};
}

// 10
Outcome density_trend() {
  const Metrics dense = Engine(rock_sweep_scenario(Density::Dense)).run(nullptr);
  const Metrics sparse = Engine(rock_sweep_scenario(Density::Sparse)).run(nullptr);
  std::ostringstream o;
  o << "dense (12) " << dense.collision_count << " vs sparse (6) " << sparse.collision_count
    << " collisions";
  return {dense.collision_count >= sparse.collision_count, o.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"assignment optimality", 10.0, assignment_optimality},
      {"dynamic dominance", 30.0, dynamic_dominance},
      {"rvo safety", 30.0, rvo_safety},
      {"reaching task", 60.0, reaching},
      {"robot count table", 10.0, table_one},
      {"control-law convergence", 60.0, control_convergence},
      {"gray-code exactness", 60.0, graycode},
      {"silhouette containment", 60.0, silhouette_containment},
      {"determinism", 120.0, determinism},
      {"density collision trend", 60.0, density_trend}};

  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-based)")
      ->check(CLI::Range(1, static_cast<int>(criteria.size())));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<std::size_t>(only) != i + 1) continue;
    const Criterion& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      out.pass = false;
      out.detail += fmt(" (over the %.0f s budget)", c.budget_s);
    }
    std::printf("%s [%zu] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", i + 1, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && out.pass;
  }
  return all ? 0 : 2;
}
