#pragma once

// Projector localization model: gray-coded stripe patterns, photodiode bit
// decoding and two-sensor pose recovery. Bit order is MSB-first: pattern
// frame 0 of an axis carries the most significant gray bit.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct GrayCodeConfig {
  int bits_per_axis = 10;
  double cell_size = 4.0;  // mm
  Vec2 origin;             // world position of cell (0, 0)'s lower-left corner
  std::array<Vec2, 2> sensor_offsets{Vec2{-10.0, 0.0}, Vec2{10.0, 0.0}};  // body frame, mm

  /// Throws ValidationError on bits outside [1, 16], cell_size <= 0 or
  /// coincident sensors.
  void validate() const;
  std::uint32_t cells_per_axis() const { return 1u << bits_per_axis; }
};

enum class Axis : std::uint8_t { X, Y };

std::uint32_t gray_encode(std::uint32_t n);
std::uint32_t gray_decode(std::uint32_t g);

struct PatternFrame {
  Axis axis = Axis::X;
  int bit_index = 0;  // 0 = MSB
  int bits = 10;

  /// Brightness of cell n in this frame.
  bool bright(std::uint32_t cell) const;
};

/// 2 * bits frames: all x frames MSB first, then all y frames.
std::vector<PatternFrame> encode_patterns(const GrayCodeConfig& cfg);

struct Cell {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  bool operator==(const Cell&) const = default;
};

/// Bits a photodiode at `cell` observes over the full sequence, per axis,
/// MSB first.
std::array<std::vector<bool>, 2> sample_bits(const Cell& cell, const GrayCodeConfig& cfg);

/// Inverse gray decode of MSB-first bit streams. Throws ValidationError on a
/// length mismatch.
Cell decode_bits(const std::vector<bool>& x_bits, const std::vector<bool>& y_bits,
                 const GrayCodeConfig& cfg);

/// Cell containing a world point; coordinates outside the pattern are
/// clamped to the border cells.
Cell cell_of(const Vec2& p, const GrayCodeConfig& cfg);
Vec2 cell_center(const Cell& c, const GrayCodeConfig& cfg);

struct PhotodiodePose {
  Vec2 position;
  double orientation = 0.0;
  double quantization_bound = 0.0;  // rad
};

/// Orientation from the bearing between the two decoded cells, corrected by
/// the mounting bearing; position from their midpoint. The bound is
/// asin(cell_size * sqrt(2) / baseline): each sensor is off by at most half a
/// cell diagonal. Throws ValidationError when both cells coincide.
PhotodiodePose pose_from_photodiodes(const Cell& a, const Cell& b, const GrayCodeConfig& cfg);

/// Binary PGM (P5) of one pattern frame, one pixel per cell.
void write_pattern_pgm(const std::filesystem::path& path, const PatternFrame& frame);

}  // namespace swarm
