#include "vtl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vtl {

double distance_m(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

PsrCurve PsrCurve::logistic(double p_max, double d_mid_m, double steepness_per_m) {
  if (p_max <= 0.0 || p_max > 1.0) {
    throw std::domain_error("logistic p_max must be in (0, 1]");
  }
  if (d_mid_m <= 0.0 || steepness_per_m <= 0.0) {
    throw std::domain_error("logistic midpoint and steepness must be positive");
  }
  PsrCurve curve;
  curve.model_ = Model::Logistic;
  curve.p_max_ = p_max;
  curve.d_mid_ = d_mid_m;
  curve.steepness_ = steepness_per_m;
  return curve;
}

PsrCurve PsrCurve::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) {
    throw std::domain_error("PSR table needs at least one knot");
  }
  std::sort(knots.begin(), knots.end());
  double previous_psr = 1.0;
  bool first = true;
  for (const auto& [distance, psr] : knots) {
    if (distance < 0.0) throw std::domain_error("PSR table distance is negative");
    if (psr < 0.0 || psr > 1.0) throw std::domain_error("PSR table value outside [0, 1]");
    if (!first && psr > previous_psr) {
      throw std::domain_error("PSR table must be nonincreasing with distance");
    }
    previous_psr = psr;
    first = false;
  }
  PsrCurve curve;
  curve.model_ = Model::Table;
  curve.p_max_ = knots.front().second;
  curve.knots_ = std::move(knots);
  return curve;
}

PsrCurve PsrCurve::constant(double psr) {
  return table({{0.0, psr}});
}

PsrCurve PsrCurve::from_table_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open PSR table file " + path.string());
  }
  std::vector<std::pair<double, double>> knots;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double distance = 0.0;
    double psr = 0.0;
    if (!(fields >> distance)) continue;
    if (!(fields >> psr)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'distance_m psr'");
    }
    knots.emplace_back(distance, psr);
  }
  return table(std::move(knots));
}

PsrCurve PsrCurve::default_curve() {
  return logistic(1.0, 71.5, 0.15);
}

double PsrCurve::psr_at(double d) const {
  if (d < 0.0) {
    throw std::domain_error("distance is negative");
  }
  if (model_ == Model::Logistic) {
    // Scaled so psr(0) is exactly p_max.
    const auto raw = [this](double x) {
      return 1.0 / (1.0 + std::exp(steepness_ * (x - d_mid_)));
    };
    return p_max_ * raw(d) / raw(0.0);
  }
  if (d <= knots_.front().first) return knots_.front().second;
  if (d >= knots_.back().first) return knots_.back().second;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (d <= knots_[i].first) {
      const auto& [d0, p0] = knots_[i - 1];
      const auto& [d1, p1] = knots_[i];
      const double t = (d - d0) / (d1 - d0);
      return p0 + t * (p1 - p0);
    }
  }
  return knots_.back().second;
}

Trajectory Trajectory::fixed(Position position) {
  Trajectory trajectory;
  trajectory.start_ = position;
  return trajectory;
}

Trajectory Trajectory::linear(Position start, double vx_mps, double vy_mps,
                              SimTime start_time_us) {
  Trajectory trajectory;
  trajectory.start_ = start;
  trajectory.vx_ = vx_mps;
  trajectory.vy_ = vy_mps;
  trajectory.start_time_us_ = start_time_us;
  trajectory.moving_ = true;
  return trajectory;
}

Position Trajectory::position_at(SimTime t_us) const {
  if (!moving_) {
    return start_;
  }
  if (t_us < start_time_us_) {
    throw std::domain_error("time precedes trajectory start");
  }
  const double dt_s = us_to_s(t_us - start_time_us_);
  return {start_.x + vx_ * dt_s, start_.y + vy_ * dt_s};
}

RngStream::RngStream(std::uint64_t seed) : engine_(seed) {}

double RngStream::next_double() {
  ++draws_;
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_u64() {
  ++draws_;
  return engine_();
}

bool deliver(const PsrCurve& curve, const Position& tx_pos, const Position& rx_pos,
             RngStream& stream) {
  const double psr = curve.psr_at(distance_m(tx_pos, rx_pos));
  return stream.next_double() < psr;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value));
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  // FNV-1a over the tag, then mixed.
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return mix_seed(seed, hash);
}

} // namespace vtl
