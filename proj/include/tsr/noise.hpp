#pragma once

/**
 * @file noise.hpp
 * @brief Quantum noise of a signal-recycled Michelson in the two-photon picture.
 *
 * The Michelson is treated as one effective mirror at the end of the signal
 * extraction chain. Dark-port vacuum reaching the arms beats with the carrier,
 * drives the free test masses and returns in the phase quadrature:
 *
 *   b = r_MI [[1, 0], [-K, 1]] a + (0, g) phi,
 *   K(Omega) = 4 P w0 G / (m c^2 Omega^2),   g = sqrt(P / (2 hbar w0)),
 *
 * with P the power at the beamsplitter, phi the differential arm phase and
 * G = sum of n^2 over the mirrors each arm beam hits n times (1 for a simple
 * Michelson, 5 for arms folded once). Mirror losses are a power deficit only.
 *
 * Input and output quadratures are referred to the Michelson carrier frame
 * carried along the chain, so a transparent recycling mirror reproduces the
 * plain Michelson whatever the detuning.
 */

#include "tsr/cavity.hpp"
#include "tsr/optics.hpp"
#include "tsr/sweep.hpp"

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tsr {

struct InterferometerParams {
  double wavelength = 1064e-9;      // m
  double power_at_bs = 1.0e4;       // W
  double mirror_mass = 5.6;         // kg
  double arm_length = 1200.0;       // m, one-way optical length
  MirrorSpec michelson = MirrorSpec::lossless_reflectivity(0.99995);
  std::vector<int> arm_mirror_bounces{1};

  void validate() const;

  double carrier_omega() const noexcept { return kTwoPi * kSpeedOfLight / wavelength; }
  double ponderomotive_gain() const noexcept;
  /// K(Omega), the radiation-pressure coupling of the bare Michelson.
  double coupling(SidebandFrequency frequency) const noexcept;
  /// Phase-quadrature response per radian of differential arm phase.
  double signal_gain() const noexcept;
  /// Differential phase per unit strain at low frequency.
  double strain_calibration() const noexcept;

  friend bool operator==(const InterferometerParams&, const InterferometerParams&) = default;
};

enum class Sideband { Upper, Lower };

/// Single detuned recycling cavity: SRM -(length, detuning)- Michelson.
struct DetunedSR {
  double detuning = 0.0;  // single-pass carrier tuning, (-pi, pi]
  MirrorSpec recycling_mirror = MirrorSpec::transparent();
  double length = 1200.0;

  /// Detuning that puts the chosen sideband on resonance at `resonance_hz`.
  static DetunedSR resonant_sideband(double resonance_hz, Sideband sideband, const MirrorSpec& srm,
                                     double length);

  friend bool operator==(const DetunedSR&, const DetunedSR&) = default;
};

/// Carrier-tuned coupled cavities: TSRM -(l1)- SRM -(l2)- Michelson.
struct TwinSR {
  double l1 = 1200.0;
  double l2 = 1200.0;
  MirrorSpec srm = MirrorSpec::transparent();
  MirrorSpec tsrm = MirrorSpec::transparent();

  friend bool operator==(const TwinSR&, const TwinSR&) = default;
};

using Topology = std::variant<DetunedSR, TwinSR>;

void validate(const Topology& topology);
std::string describe(const Topology& topology);
CavityChain signal_chain(const Topology& topology, const InterferometerParams& params);

enum class CouplingDesign { Ideal, EqualLengths, General };

/// SRM transmission for a doublet split by +-splitting_hz.
double design_srm_transmission(double splitting_hz, double l1, double l2, const MirrorSpec& michelson,
                               CouplingDesign design);

struct SqueezedInput {
  double r = 0.0;
  double angle = 0.0;  // orientation of the squeezed quadrature
  bool enabled = false;

  static SqueezedInput vacuum() { return {}; }
  static SqueezedInput broadband(double r, double angle) { return {r, angle, true}; }

  friend bool operator==(const SqueezedInput&, const SqueezedInput&) = default;
};

class HomodyneReadout {
 public:
  explicit HomodyneReadout(double quadrature_angle = 0.0);
  static HomodyneReadout amplitude() { return HomodyneReadout(0.0); }
  static HomodyneReadout phase();

  double angle() const noexcept { return angle_; }
  Eigen::Vector2d projection() const;

  friend bool operator==(const HomodyneReadout&, const HomodyneReadout&) = default;

 private:
  double angle_;
};

enum class BackAction { On, Off };

/// Dark-port input -> output quadrature transfer and signal column at Omega.
/// Throws DegenerateFrequency at Omega = 0.
QuadratureTransfer io_relation(const Topology& topology, const InterferometerParams& params,
                               SidebandFrequency frequency, BackAction back_action = BackAction::On);

/// Shot-noise-normalised covariance of the dark-port input (identity = vacuum).
Eigen::Matrix2d input_covariance(const SqueezedInput& squeezing);

/// Squeezed-quadrature variance over vacuum, in dB (positive = below vacuum).
double squeezing_db(double r) noexcept;

/// sqrt(v^T M Sigma M^dag v) / |v^T s|
double signal_referred_noise(const QuadratureTransfer& transfer, const Eigen::Matrix2d& covariance,
                             const HomodyneReadout& readout);

/// Squeeze angle minimising the noise of one transfer for a given r.
double optimal_squeeze_angle(const QuadratureTransfer& transfer, const HomodyneReadout& readout);

/// Transfer expressed on (upper, conjugate lower) sideband amplitudes.
Eigen::Matrix2cd to_sideband_basis(const Eigen::Matrix2cd& quadrature_matrix);

enum class NsdUnits { Phase, Strain };

struct SpectrumMetadata {
  std::string topology;
  SqueezedInput squeezing;
  double readout_angle = 0.0;
  bool back_action = true;
  NsdUnits units = NsdUnits::Phase;
};

struct NoiseSpectrum {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<double> nsd;          // 1/sqrt(Hz)
  SpectrumMetadata metadata;
};

struct SpectrumOptions {
  BackAction back_action = BackAction::On;
  NsdUnits units = NsdUnits::Phase;
  sweep::Execution exec = sweep::Execution::Parallel;
};

NoiseSpectrum noise_spectral_density(const Topology& topology, const InterferometerParams& params,
                                     const SqueezedInput& squeezing, const HomodyneReadout& readout,
                                     std::span<const double> grid_hz, const SpectrumOptions& options = {});

/// Lowest grid frequency from which `better` <= `reference` (relative slack
/// 1e-9) at every remaining point; empty if that holds everywhere or nowhere.
std::optional<double> find_crossover(std::span<const double> frequencies,
                                     std::span<const double> better,
                                     std::span<const double> reference);

/// Frequency above which shot noise exceeds radiation-pressure noise at every
/// grid point (vacuum input).
std::optional<double> radiation_pressure_crossover(const Topology& topology,
                                                   const InterferometerParams& params,
                                                   const HomodyneReadout& readout,
                                                   std::span<const double> grid_hz);

/// Fixed squeeze angle that is optimal at the vacuum NSD minimum within
/// [band_lo_hz, band_hi_hz] of the grid (whole grid when the band is empty).
double squeeze_angle_at_minimum(const Topology& topology, const InterferometerParams& params,
                                const HomodyneReadout& readout, std::span<const double> grid_hz,
                                double band_lo_hz = 0.0,
                                double band_hi_hz = std::numeric_limits<double>::infinity());

enum class MatchMode {
  Tangent,       ///< TSR touches the best SR curve in the resonance band without crossing it
  EqualMinimum,  ///< equal minimum NSD in the resonance band
};

MatchMode parse_match_mode(const std::string& name);
std::string to_string(MatchMode mode);

struct ComparisonOptions {
  MirrorSpec sr_mirror = MirrorSpec::lossless_reflectivity(0.99);
  double resonance_hz = 1000.0;
  double cavity_length = 1200.0;  // L_SR for SR, L1 = L2 for TSR
  CouplingDesign srm_design = CouplingDesign::Ideal;
  MatchMode match = MatchMode::Tangent;
  bool optimize_squeeze_angle = true;
  HomodyneReadout sr_readout = HomodyneReadout::amplitude();
  HomodyneReadout tsr_readout = HomodyneReadout::phase();
  sweep::Execution exec = sweep::Execution::Parallel;
};

struct TopologyComparison {
  NoiseSpectrum tsr;
  NoiseSpectrum sr_upper;
  NoiseSpectrum sr_lower;
  TwinSR tsr_topology;
  DetunedSR sr_upper_topology;
  DetunedSR sr_lower_topology;
  /// min_band(TSR) / min_band(best SR) - 1 at the matched TSRM.
  double match_residual = 0.0;
  std::optional<double> crossover_hz;
  double max_improvement = 0.0;
};

/// TSR, SR-upper and SR-lower spectra with the TSRM chosen to give the same
/// peak sensitivity as single-sideband recycling.
TopologyComparison compare_topologies(const InterferometerParams& params,
                                      const SqueezedInput& squeezing,
                                      std::span<const double> grid_hz,
                                      const ComparisonOptions& options = {});

}  // namespace tsr
