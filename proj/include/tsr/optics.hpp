#pragma once

/**
 * @file optics.hpp
 * @brief Mirrors, free-space propagation and two-photon quadrature blocks.
 *
 * Conventions used throughout the library:
 *
 *  - Fields carry time dependence e^{-i w t}; a sideband at carrier offset
 *    Omega crossing a segment of length L with microscopic carrier tuning phi
 *    picks up exp(i (phi + Omega L / c)).
 *  - Mirrors have real amplitude coefficients. Reflection from the front face
 *    is +rho, from the back face -rho, transmission is +tau either way.
 *  - In a chain, mirror k turns its front face away from the input port when
 *    k is even and toward it when k is odd, i.e. light arriving from the input
 *    side sees (-1)^(k+1) rho. With this alternation every sub-cavity of a
 *    chain is resonant for the carrier at zero tuning.
 *  - Quadratures: a1 (amplitude) = (a+ + a-^dag)/sqrt2, a2 (phase) =
 *    (a+ - a-^dag)/(i sqrt2). Vacuum has unit single-sided spectral density.
 */

#include <Eigen/Core>

#include <complex>
#include <numbers>

namespace tsr {

using complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;      // m/s
inline constexpr double kHbar = 1.054'571'817e-34;          // J s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Power budget of one mirror; rho() and tau() are the amplitude coefficients.
class MirrorSpec {
 public:
  /// Throws InvalidArgument unless 0 <= R,T,loss <= 1 and R+T+loss = 1
  /// within 1e-12.
  MirrorSpec(double reflectivity, double transmissivity, double loss = 0.0);

  static MirrorSpec lossless_reflectivity(double reflectivity);
  static MirrorSpec lossless_transmission(double transmissivity);
  static MirrorSpec perfect() { return MirrorSpec(1.0, 0.0, 0.0); }
  static MirrorSpec transparent() { return MirrorSpec(0.0, 1.0, 0.0); }

  double reflectivity() const noexcept { return reflectivity_; }
  double transmissivity() const noexcept { return transmissivity_; }
  double loss() const noexcept { return loss_; }
  double rho() const noexcept { return rho_; }
  double tau() const noexcept { return tau_; }
  bool is_lossless() const noexcept { return loss_ == 0.0; }

  friend bool operator==(const MirrorSpec&, const MirrorSpec&) = default;

 private:
  double reflectivity_;
  double transmissivity_;
  double loss_;
  double rho_;
  double tau_;
};

struct MirrorScattering {
  double rho;
  double tau;

  double reflect_front() const noexcept { return rho; }
  double reflect_back() const noexcept { return -rho; }
  double transmit() const noexcept { return tau; }
};

MirrorScattering mirror_scattering(const MirrorSpec& mirror);

/// Sign of the reflection seen from the input side by mirror `index` of a chain.
constexpr double chain_reflection_sign(std::size_t index) noexcept {
  return index % 2 == 0 ? -1.0 : 1.0;
}

/// Macroscopic length plus microscopic single-pass carrier tuning.
class PropagationSegment {
 public:
  explicit PropagationSegment(double length_m, double tuning_rad = 0.0);

  double length() const noexcept { return length_; }
  double tuning() const noexcept { return tuning_; }

  friend bool operator==(const PropagationSegment&, const PropagationSegment&) = default;

 private:
  double length_;
  double tuning_;
};

/// Signed offset from the carrier. Positive is the upper sideband.
class SidebandFrequency {
 public:
  static SidebandFrequency from_hz(double hz);
  static SidebandFrequency from_angular(double rad_per_s);

  double omega() const noexcept { return omega_; }
  double hz() const noexcept { return omega_ / kTwoPi; }

  SidebandFrequency mirrored() const noexcept { return SidebandFrequency(-omega_); }

 private:
  explicit SidebandFrequency(double omega) : omega_(omega) {}
  double omega_;
};

// exp(i (tuning + Omega L / c))
complex propagation_phase(const PropagationSegment& segment, SidebandFrequency frequency);

// Omega L / c, the dimensionless single-pass sideband phase.
double sideband_phase(double length_m, SidebandFrequency frequency) noexcept;

/// Linear map on (amplitude, phase) quadratures at one sideband frequency,
/// plus the response of the output quadratures to the signal.
struct QuadratureTransfer {
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Identity();
  Eigen::Vector2cd signal = Eigen::Vector2cd::Zero();

  QuadratureTransfer then(const QuadratureTransfer& next) const;
};

QuadratureTransfer quadrature_rotation(double angle_rad);

Eigen::Matrix2d rotation_matrix(double angle_rad);

}  // namespace tsr
