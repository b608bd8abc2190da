#include "swarm/graycode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

void GrayCodeConfig::validate() const {
  if (bits_per_axis < 1 || bits_per_axis > 16) {
    throw ValidationError("graycode: bits_per_axis must be in [1, 16]");
  }
  if (!(cell_size > 0.0)) throw ValidationError("graycode: cell_size must be positive");
  if (sensor_offsets[0] == sensor_offsets[1]) {
    throw ValidationError("graycode: sensor offsets coincide");
  }
}

std::uint32_t gray_encode(std::uint32_t n) { return n ^ (n >> 1); }

std::uint32_t gray_decode(std::uint32_t g) {
  std::uint32_t n = g;
  for (std::uint32_t shift = 1; shift < 32; shift <<= 1) n ^= n >> shift;
  return n;
}

bool PatternFrame::bright(std::uint32_t cell) const {
  return ((gray_encode(cell) >> (bits - 1 - bit_index)) & 1u) != 0;
}

std::vector<PatternFrame> encode_patterns(const GrayCodeConfig& cfg) {
  cfg.validate();
  std::vector<PatternFrame> frames;
  for (Axis axis : {Axis::X, Axis::Y}) {
    for (int i = 0; i < cfg.bits_per_axis; ++i) frames.push_back({axis, i, cfg.bits_per_axis});
  }
  return frames;
}

std::array<std::vector<bool>, 2> sample_bits(const Cell& cell, const GrayCodeConfig& cfg) {
  std::array<std::vector<bool>, 2> out;
  for (const PatternFrame& f : encode_patterns(cfg)) {
    const bool b = f.bright(f.axis == Axis::X ? cell.x : cell.y);
    out[f.axis == Axis::X ? 0 : 1].push_back(b);
  }
  return out;
}

namespace {

std::uint32_t decode_axis(const std::vector<bool>& bits, int expected, const char* axis) {
  if (bits.size() != static_cast<std::size_t>(expected)) {
    throw ValidationError(std::string("graycode: ") + axis + " stream has " +
                          std::to_string(bits.size()) + " bits, expected " +
                          std::to_string(expected));
  }
  std::uint32_t n = 0;
  bool prev = false;
  for (const bool g : bits) {
    const bool b = prev != g;
    n = (n << 1) | (b ? 1u : 0u);
    prev = b;
  }
  return n;
}

}  // namespace

Cell decode_bits(const std::vector<bool>& x_bits, const std::vector<bool>& y_bits,
                 const GrayCodeConfig& cfg) {
  return {decode_axis(x_bits, cfg.bits_per_axis, "x"), decode_axis(y_bits, cfg.bits_per_axis, "y")};
}

Cell cell_of(const Vec2& p, const GrayCodeConfig& cfg) {
  const double max_cell = static_cast<double>(cfg.cells_per_axis() - 1);
  auto idx = [&](double v) {
    return static_cast<std::uint32_t>(std::clamp(std::floor(v / cfg.cell_size), 0.0, max_cell));
  };
  return {idx(p.x - cfg.origin.x), idx(p.y - cfg.origin.y)};
}

Vec2 cell_center(const Cell& c, const GrayCodeConfig& cfg) {
  return cfg.origin + Vec2((c.x + 0.5) * cfg.cell_size, (c.y + 0.5) * cfg.cell_size);
}

PhotodiodePose pose_from_photodiodes(const Cell& a, const Cell& b, const GrayCodeConfig& cfg) {
  if (a == b) throw ValidationError("graycode: degenerate baseline, both sensors in one cell");
  const Vec2 pa = cell_center(a, cfg);
  const Vec2 pb = cell_center(b, cfg);
  const Vec2 mount = cfg.sensor_offsets[1] - cfg.sensor_offsets[0];
  const Vec2 seen = pb - pa;
  PhotodiodePose out;
  out.orientation =
      wrap_angle(std::atan2(seen.y, seen.x) - std::atan2(mount.y, mount.x));
  const Vec2 mid_body = 0.5 * (cfg.sensor_offsets[0] + cfg.sensor_offsets[1]);
  out.position = 0.5 * (pa + pb) - rotate(mid_body, out.orientation);
  const double ratio = cfg.cell_size * std::sqrt(2.0) / norm(mount);
  out.quantization_bound = ratio >= 1.0 ? kPi : std::asin(ratio);
  return out;
}

void write_pattern_pgm(const std::filesystem::path& path, const PatternFrame& frame) {
  const std::uint32_t n = 1u << frame.bits;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "P5\n" << n << ' ' << n << "\n255\n";
  std::string row(n, '\0');
  for (std::uint32_t y = 0; y < n; ++y) {
    for (std::uint32_t x = 0; x < n; ++x) {
      // image rows run top to bottom, world y runs bottom to top
      const std::uint32_t cell = frame.axis == Axis::X ? x : n - 1 - y;
      row[x] = frame.bright(cell) ? static_cast<char>(255) : '\0';
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace swarm
