#pragma once

#include "vtl/sim_time.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace vtl {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance_m(const Position& a, const Position& b);

// Packet success ratio as a function of tx-rx distance. Either a logistic
// pinned to p_max at d=0, or a table of (distance, psr) knots with linear
// interpolation and clamped ends. Monotone nonincreasing by construction.
class PsrCurve {
public:
  static PsrCurve logistic(double p_max, double d_mid_m, double steepness_per_m);
  static PsrCurve table(std::vector<std::pair<double, double>> knots);
  static PsrCurve constant(double psr);
  static PsrCurve from_table_file(const std::filesystem::path& path);

  // Logistic calibrated to the measured link: psr(0)=1, psr(60)~0.85,
  // negligible past 120 m.
  static PsrCurve default_curve();

  double psr_at(double distance_m) const; // throws std::domain_error if d < 0

  bool is_logistic() const { return model_ == Model::Logistic; }
  double p_max() const { return p_max_; }
  double d_mid_m() const { return d_mid_; }
  double steepness_per_m() const { return steepness_; }

private:
  PsrCurve() = default;

  enum class Model : std::uint8_t { Logistic, Table };

  Model model_ = Model::Logistic;
  double p_max_ = 1.0;
  double d_mid_ = 0.0;
  double steepness_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

// Node path over time: parked at a point, or straight-line constant speed.
class Trajectory {
public:
  static Trajectory fixed(Position position);
  static Trajectory linear(Position start, double vx_mps, double vy_mps,
                           SimTime start_time_us);

  Position position_at(SimTime t_us) const; // throws std::domain_error before start

  bool is_static() const { return !moving_; }
  const Position& start_position() const { return start_; }
  Position& start_position() { return start_; }

private:
  Position start_{};
  double vx_ = 0.0;
  double vy_ = 0.0;
  SimTime start_time_us_ = 0;
  bool moving_ = false;
};

// Seeded uniform stream. Doubles come from the top 53 bits of mt19937_64,
// so the sequence is identical on every platform.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  double next_double(); // uniform [0, 1)
  std::uint64_t next_u64();
  std::uint64_t draw_count() const { return draws_; }

private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

// One Bernoulli draw from `stream` against psr_at(distance).
bool deliver(const PsrCurve& curve, const Position& tx_pos, const Position& rx_pos,
             RngStream& stream);

// Deterministic seed derivation for named sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);

} // namespace vtl
