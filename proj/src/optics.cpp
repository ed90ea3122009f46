#include "tsr/optics.hpp"

#include "tsr/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace tsr {

namespace {

constexpr double kBudgetTolerance = 1e-12;

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

double wrap_angle(double radians) {
  double wrapped = std::remainder(radians, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

MirrorSpec::MirrorSpec(double reflectivity, double transmissivity, double loss)
    : reflectivity_(reflectivity), transmissivity_(transmissivity), loss_(loss) {
  if (!in_unit_interval(reflectivity) || !in_unit_interval(transmissivity) ||
      !in_unit_interval(loss)) {
    throw InvalidArgument(fmt::format("mirror powers must lie in [0, 1] (R={}, T={}, L={})",
                                      reflectivity, transmissivity, loss));
  }
  if (std::abs(reflectivity + transmissivity + loss - 1.0) > kBudgetTolerance) {
    throw InvalidArgument(fmt::format("mirror power budget R+T+L = {} != 1",
                                      reflectivity + transmissivity + loss));
  }
  rho_ = std::sqrt(reflectivity_);
  tau_ = std::sqrt(transmissivity_);
}

MirrorSpec MirrorSpec::lossless_reflectivity(double reflectivity) {
  return MirrorSpec(reflectivity, 1.0 - reflectivity, 0.0);
}

MirrorSpec MirrorSpec::lossless_transmission(double transmissivity) {
  return MirrorSpec(1.0 - transmissivity, transmissivity, 0.0);
}

MirrorScattering mirror_scattering(const MirrorSpec& mirror) {
  return {mirror.rho(), mirror.tau()};
}

PropagationSegment::PropagationSegment(double length_m, double tuning_rad)
    : length_(length_m), tuning_(wrap_angle(tuning_rad)) {
  if (!(std::isfinite(length_m) && length_m > 0.0)) {
    throw InvalidArgument(fmt::format("segment length must be positive, got {}", length_m));
  }
  if (!std::isfinite(tuning_rad)) throw InvalidArgument("segment tuning must be finite");
}

SidebandFrequency SidebandFrequency::from_hz(double hz) {
  if (!std::isfinite(hz)) throw InvalidArgument("sideband frequency must be finite");
  return SidebandFrequency(kTwoPi * hz);
}

SidebandFrequency SidebandFrequency::from_angular(double rad_per_s) {
  if (!std::isfinite(rad_per_s)) throw InvalidArgument("sideband frequency must be finite");
  return SidebandFrequency(rad_per_s);
}

double sideband_phase(double length_m, SidebandFrequency frequency) noexcept {
  return frequency.omega() * length_m / kSpeedOfLight;
}

complex propagation_phase(const PropagationSegment& segment, SidebandFrequency frequency) {
  return std::polar(1.0, segment.tuning() + sideband_phase(segment.length(), frequency));
}

QuadratureTransfer QuadratureTransfer::then(const QuadratureTransfer& next) const {
  return {next.matrix * matrix, next.matrix * signal + next.signal};
}

Eigen::Matrix2d rotation_matrix(double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

QuadratureTransfer quadrature_rotation(double angle_rad) {
  return {rotation_matrix(angle_rad).cast<complex>(), Eigen::Vector2cd::Zero()};
}

}  // namespace tsr
