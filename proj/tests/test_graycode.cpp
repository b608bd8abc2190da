#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "swarm/errors.hpp"
#include "swarm/graycode.hpp"

using namespace swarm;

TEST(Gray, RoundTripAllCodes) {
  for (std::uint32_t n = 0; n < 1024; ++n) EXPECT_EQ(gray_decode(gray_encode(n)), n);
}

TEST(Gray, NeighboursDifferByOneBit) {
  for (std::uint32_t n = 0; n + 1 < 1024; ++n) {
    EXPECT_EQ(std::popcount(gray_encode(n) ^ gray_encode(n + 1)), 1);
  }
}

TEST(Gray, FramesDecodeEveryCell) {
  GrayCodeConfig cfg;
  const auto frames = encode_patterns(cfg);
  ASSERT_EQ(frames.size(), 20u);
  for (std::uint32_t n = 0; n < cfg.cells_per_axis(); ++n) {
    const Cell c{n, cfg.cells_per_axis() - 1 - n};
    const auto bits = sample_bits(c, cfg);
    EXPECT_EQ(decode_bits(bits[0], bits[1], cfg), c);
  }
}

TEST(Gray, DecodeRejectsWrongLength) {
  GrayCodeConfig cfg;
  EXPECT_THROW(decode_bits(std::vector<bool>(9), std::vector<bool>(10), cfg), ValidationError);
}

TEST(Gray, CellLookup) {
  GrayCodeConfig cfg;
  cfg.origin = {-100, -100};
  EXPECT_EQ(cell_of({-100, -100}, cfg), (Cell{0, 0}));
  EXPECT_EQ(cell_of({-96.5, -91}, cfg), (Cell{0, 2}));
  EXPECT_EQ(cell_of({-1000, 1e6}, cfg), (Cell{0, 1023}));
  const Vec2 c = cell_center({3, 5}, cfg);
  EXPECT_DOUBLE_EQ(c.x, -100 + 14.0);
  EXPECT_DOUBLE_EQ(c.y, -100 + 22.0);
}

TEST(Gray, PoseWithinQuantizationBound) {
  GrayCodeConfig cfg;
  cfg.origin = {-2048, -2048};
  const double baseline = distance(cfg.sensor_offsets[0], cfg.sensor_offsets[1]);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-1500.0, 1500.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 truth{{pos(rng), pos(rng)}, ang(rng)};
    const Cell a = cell_of(truth.position + rotate(cfg.sensor_offsets[0], truth.heading), cfg);
    const Cell b = cell_of(truth.position + rotate(cfg.sensor_offsets[1], truth.heading), cfg);
    const PhotodiodePose p = pose_from_photodiodes(a, b, cfg);
    EXPECT_NEAR(p.quantization_bound, std::asin(cfg.cell_size * std::sqrt(2.0) / baseline), 1e-15);
    EXPECT_LE(std::abs(wrap_angle(p.orientation - truth.heading)), p.quantization_bound);
    EXPECT_LE(distance(p.position, truth.position), cfg.cell_size * std::sqrt(2.0) / 2.0 + 1e-9);
  }
}

TEST(Gray, CoincidentCellsThrow) {
  GrayCodeConfig cfg;
  EXPECT_THROW(pose_from_photodiodes({4, 4}, {4, 4}, cfg), ValidationError);
}

TEST(Gray, ConfigValidation) {
  GrayCodeConfig cfg;
  cfg.bits_per_axis = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = GrayCodeConfig{};
  cfg.cell_size = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Gray, PgmExport) {
  const PatternFrame f{Axis::X, 0, 3};
  const auto path = std::filesystem::temp_directory_path() / "swarm_gray_test.pgm";
  write_pattern_pgm(path, f);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w = 0;
  int h = 0;
  int max = 0;
  in >> magic >> w >> h >> max;
  in.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 8);
  EXPECT_EQ(h, 8);
  std::string row(8, '\0');
  in.read(row.data(), 8);
  for (std::uint32_t x = 0; x < 8; ++x) {
    EXPECT_EQ(row[x] != 0, f.bright(x));
  }
  std::filesystem::remove(path);
}
