#include "swarm/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "swarm/engine.hpp"
#include "swarm/errors.hpp"
#include "swarm/graycode.hpp"
#include "swarm/live_bridge.hpp"
#include "swarm/suites.hpp"

namespace swarm {

namespace {

struct Overrides {
  std::string algorithm;
  std::string density;
  int size = 0;
  std::optional<std::uint64_t> seed;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--algorithm", o.algorithm, "bone-static | bone-dynamic | silhouette-dynamic");
  cmd->add_option("--density", o.density, "sparse | medium | dense");
  cmd->add_option("--size", o.size, "robot diameter in mm (20 or 30)");
  cmd->add_option("--seed", o.seed, "random seed");
}

void apply_overrides(ScenarioSpec& spec, const Overrides& o) {
  if (!o.algorithm.empty()) {
    const auto a = parse_algorithm(o.algorithm);
    if (!a) throw ConfigError("unknown algorithm '" + o.algorithm + "'");
    spec.algorithm = *a;
  }
  if (!o.density.empty()) {
    const auto d = parse_density(o.density);
    if (!d) throw ConfigError("unknown density '" + o.density + "'");
    spec.robots.density = *d;
    spec.robots.count.reset();
  }
  if (o.size != 0) {
    const auto s = robot_size_from_mm(o.size);
    if (!s) throw ConfigError("robot size must be 20 or 30");
    spec.robots.size = *s;
    spec.robots.count.reset();
    spec.robots.wheel_base.reset();
  }
  if (o.seed) spec.seed = *o.seed;
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

void print_table_header(std::ostream& out) {
  out << std::left << std::setw(30) << "scenario" << std::right << std::setw(8) << "robots"
      << std::setw(10) << "fit_s" << std::setw(8) << "colls" << std::setw(12) << "mean_err"
      << std::setw(12) << "max_err" << std::setw(12) << "travel" << std::setw(12) << "cmd_travel"
      << std::setw(10) << "reassign" << '\n';
}

void print_row(std::ostream& out, const std::string& name, std::size_t robots, const Metrics& m) {
  out << std::left << std::setw(30) << name << std::right << std::setw(8) << robots
      << std::setw(10) << fmt(m.time_to_fit) << std::setw(8) << m.collision_count << std::setw(12)
      << fmt(m.mean_tracking_error) << std::setw(12) << fmt(m.max_tracking_error) << std::setw(12)
      << fmt(m.total_travel, 1) << std::setw(12) << fmt(m.commanded_travel, 1) << std::setw(10)
      << m.reassignment_count << '\n';
}

int cmd_replay(const std::string& scenario, const Overrides& o, std::string trace,
               std::string metrics, const std::string& input_log) {
  ScenarioSpec spec = load_scenario(scenario);
  apply_overrides(spec, o);
  Metrics m;
  if (!input_log.empty()) {
    std::ifstream log(input_log);
    if (!log) throw ConfigError("cannot read " + input_log);
    if (trace.empty()) trace = spec.outputs.trace.string();
    std::ofstream out;
    if (!trace.empty()) {
      out.open(trace);
      if (!out) throw ConfigError("cannot write " + trace);
    }
    m = replay_input_log(spec, log, trace.empty() ? nullptr : &out);
    if (metrics.empty()) metrics = spec.outputs.metrics.string();
    if (!metrics.empty()) {
      std::ofstream mo(metrics);
      if (!mo) throw ConfigError("cannot write " + metrics);
      mo << to_json(m).dump(2) << '\n';
    }
  } else {
    m = run_scenario(spec, trace, metrics);
  }
  std::cout << to_json(m).dump(2) << '\n';
  return 0;
}

int cmd_bench(const std::string& suite, const Overrides& o) {
  Algorithm algorithm = Algorithm::BoneDynamic;
  if (!o.algorithm.empty()) {
    const auto a = parse_algorithm(o.algorithm);
    if (!a) throw ConfigError("unknown algorithm '" + o.algorithm + "'");
    algorithm = *a;
  }
  Density density = Density::Sparse;
  if (!o.density.empty()) {
    const auto d = parse_density(o.density);
    if (!d) throw ConfigError("unknown density '" + o.density + "'");
    density = *d;
  }
  RobotSize size = RobotSize::Mm30;
  if (o.size != 0) {
    const auto s = robot_size_from_mm(o.size);
    if (!s) throw ConfigError("robot size must be 20 or 30");
    size = *s;
  }
  std::vector<ScenarioSpec> specs;
  if (suite == "reaching") {
    for (SignName sign :
         {SignName::Rock, SignName::Scissors, SignName::Paper, SignName::ReversedPaper}) {
      for (bool right : {true, false}) {
        specs.push_back(reaching_scenario(sign, right, algorithm, size, density));
      }
    }
  } else if (suite == "flip") {
    specs.push_back(flip_scenario(Algorithm::BoneStatic));
    specs.push_back(flip_scenario(Algorithm::BoneDynamic));
    specs.back().name = "flip-dynamic";
    specs.front().name = "flip-static";
  } else if (suite == "density") {
    for (Density d : {Density::Sparse, Density::Medium, Density::Dense}) {
      specs.push_back(rock_sweep_scenario(d, size));
      specs.back().algorithm = algorithm;
    }
  } else if (suite == "rvo") {
    specs.push_back(head_on_scenario());
    specs.push_back(circle_scenario());
  } else {
    throw ConfigError("unknown suite '" + suite + "' (reaching, flip, density, rvo)");
  }
  print_table_header(std::cout);
  for (ScenarioSpec& spec : specs) {
    if (o.seed) spec.seed = *o.seed;
    Engine engine(spec);
    const Metrics m = engine.run(nullptr);
    print_row(std::cout, spec.name, engine.robots().size(), m);
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  if (!fa) throw ConfigError("cannot read " + a);
  if (!fb) throw ConfigError("cannot read " + b);
  std::string la;
  std::string lb;
  std::size_t line = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(fa, la));
    const bool gb = static_cast<bool>(std::getline(fb, lb));
    ++line;
    if (!ga && !gb) break;
    if (ga != gb || la != lb) {
      std::cout << "differ at line " << line << '\n';
      return 2;
    }
  }
  // getline hides a missing final newline
  fa.clear();
  fb.clear();
  fa.seekg(0, std::ios::end);
  fb.seekg(0, std::ios::end);
  if (fa.tellg() != fb.tellg()) {
    std::cout << "differ in length\n";
    return 2;
  }
  std::cout << "identical\n";
  return 0;
}

Vec2 parse_point(const std::string& s) {
  Vec2 p;
  char comma = 0;
  std::istringstream in(s);
  if (!(in >> p.x >> comma >> p.y) || comma != ',' || !in.eof()) {
    throw ConfigError("expected x,y but got '" + s + "'");
  }
  return p;
}

int cmd_synth(const std::string& sign_text, const std::string& from, const std::string& to,
              double yaw, double scale, double hold, double move, double rate,
              const std::string& out) {
  const auto sign = parse_sign(sign_text);
  if (!sign) throw ConfigError("unknown sign '" + sign_text + "'");
  if (!(hold >= 0.0) || !(move >= 0.0) || !(rate > 0.0) || !(scale > 0.0)) {
    throw ConfigError("synth: hold and move must be >= 0, rate and scale > 0");
  }
  WristPose a;
  a.position = parse_point(from);
  a.yaw = yaw;
  WristPose b = a;
  b.position = to.empty() ? a.position : parse_point(to);
  std::vector<HandKeyframe> keys{{0.0, a, *sign, scale}};
  if (hold > 0.0) keys.push_back({hold, a, *sign, scale});
  if (move > 0.0) keys.push_back({hold + move, b, *sign, scale});
  keys.push_back({2.0 * hold + move, b, *sign, scale});
  if (keys.back().t == keys[keys.size() - 2].t) keys.pop_back();
  save_trajectory(out, script_trajectory(keys, rate));
  return 0;
}

int cmd_patterns(const std::string& dir, int bits, double cell) {
  GrayCodeConfig cfg;
  cfg.bits_per_axis = bits;
  cfg.cell_size = cell;
  std::filesystem::create_directories(dir);
  for (const PatternFrame& f : encode_patterns(cfg)) {
    char name[32];
    std::snprintf(name, sizeof name, "%c_%02d.pgm", f.axis == Axis::X ? 'x' : 'y', f.bit_index);
    write_pattern_pgm(std::filesystem::path(dir) / name, f);
  }
  return 0;
}

int cmd_serve(const std::string& scenario, const Overrides& o, const std::string& address,
              unsigned short port, const std::string& trace, const std::string& input_log,
              std::uint64_t ticks) {
  ScenarioSpec spec = load_scenario(scenario);
  apply_overrides(spec, o);
  LiveOptions opts;
  opts.address = address;
  opts.port = port;
  opts.trace = trace.empty() ? spec.outputs.trace : std::filesystem::path(trace);
  opts.input_log = input_log;
  opts.max_ticks = ticks;
  LiveSession session(std::move(spec), opts);
  std::cerr << "listening on ws://" << address << ':' << session.port() << '\n';
  session.run(true);
  std::cerr << "stopped after " << session.ticks() << " ticks\n";
  return 0;
}

int cmd_metrics(const std::string& trace) {
  std::ifstream in(trace);
  if (!in) throw ConfigError("cannot read " + trace);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw ConfigError(trace + ": empty trace");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(last);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(trace + ": " + e.what());
  }
  std::cout << to_json(metrics_from_json(j.at("metrics"))).dump(2) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Hand-driven swarm formation simulator"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string scenario;
  std::string trace;
  std::string metrics;
  std::string input_log;
  auto* replay = app.add_subcommand("replay", "run a scenario and write its trace");
  replay->add_option("--scenario,--config", scenario, "scenario JSON")->required();
  replay->add_option("--trace", trace, "trace output (JSON lines)");
  replay->add_option("--metrics", metrics, "metrics output (JSON)");
  replay->add_option("--input-log", input_log, "live-session input log to replay");
  add_overrides(replay, overrides);

  std::string suite;
  auto* bench = app.add_subcommand("bench", "run a built-in suite and print a metrics table");
  bench->add_option("--suite", suite, "reaching | flip | density | rvo")->required();
  add_overrides(bench, overrides);

  std::string file_a;
  std::string file_b;
  auto* compare = app.add_subcommand("compare", "byte-compare two traces");
  compare->add_option("--a", file_a)->required();
  compare->add_option("--b", file_b)->required();

  std::string sign = "paper";
  std::string from = "0,0";
  std::string to;
  double yaw = kPi / 2.0;
  double scale = 1.0;
  double hold = 1.0;
  double move = 2.0;
  double rate = 50.0;
  std::string out;
  auto* synth = app.add_subcommand("synth", "write a synthetic hand trajectory");
  synth->add_option("--sign", sign, "rock | scissors | paper | reversed_paper");
  synth->add_option("--from", from, "start wrist position x,y (mm)");
  synth->add_option("--to", to, "end wrist position x,y (mm)");
  synth->add_option("--yaw", yaw, "wrist yaw (rad)");
  synth->add_option("--scale", scale, "hand scale");
  synth->add_option("--hold", hold, "seconds held at each end");
  synth->add_option("--move", move, "seconds spent moving");
  synth->add_option("--rate", rate, "frame rate (Hz)");
  synth->add_option("--out", out, "trajectory file")->required();

  std::string dir;
  int bits = 10;
  double cell = 4.0;
  auto* patterns = app.add_subcommand("patterns", "export gray-code frames as PGM images");
  patterns->add_option("--out", dir, "output directory")->required();
  patterns->add_option("--bits", bits, "bits per axis");
  patterns->add_option("--cell", cell, "cell size (mm)");

  std::string address = "127.0.0.1";
  unsigned short port = 8765;
  std::uint64_t ticks = 0;
  auto* serve = app.add_subcommand("serve", "run a live WebSocket session");
  serve->add_option("--scenario,--config", scenario, "scenario JSON")->required();
  serve->add_option("--address", address, "listen address");
  serve->add_option("--port", port, "listen port (0 picks one)");
  serve->add_option("--trace", trace, "trace output (JSON lines)");
  serve->add_option("--input-log", input_log, "input log output");
  serve->add_option("--ticks", ticks, "stop after this many ticks (0: until interrupted)");
  add_overrides(serve, overrides);

  std::string trace_in;
  auto* metrics_cmd = app.add_subcommand("metrics", "print the final metrics of a trace");
  metrics_cmd->add_option("--trace", trace_in, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*replay) return cmd_replay(scenario, overrides, trace, metrics, input_log);
    if (*bench) return cmd_bench(suite, overrides);
    if (*compare) return cmd_compare(file_a, file_b);
    if (*synth) return cmd_synth(sign, from, to, yaw, scale, hold, move, rate, out);
    if (*patterns) return cmd_patterns(dir, bits, cell);
    if (*serve) return cmd_serve(scenario, overrides, address, port, trace, input_log, ticks);
    if (*metrics_cmd) return cmd_metrics(trace_in);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace swarm
