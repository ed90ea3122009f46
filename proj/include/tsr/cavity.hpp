#pragma once

// Coupled-cavity frequency responses for mirror chains driven from the input
// side (the TSRM for twin recycling, the SRM for single recycling).

#include "tsr/optics.hpp"
#include "tsr/sweep.hpp"

#include <array>
#include <span>
#include <vector>

namespace tsr {

/// Mirrors ordered from the input port inward; segments[k] joins mirrors k and k+1.
class CavityChain {
 public:
  CavityChain(std::vector<MirrorSpec> mirrors, std::vector<PropagationSegment> segments);

  /// TSRM -(l1)- SRM -(l2)- Michelson, carrier tuned.
  static CavityChain twin(double l1, double l2, const MirrorSpec& tsrm, const MirrorSpec& srm,
                          const MirrorSpec& michelson);

  /// SRM -(length, tuning)- Michelson.
  static CavityChain single(double length, double tuning, const MirrorSpec& srm,
                            const MirrorSpec& michelson);

  const std::vector<MirrorSpec>& mirrors() const noexcept { return mirrors_; }
  const std::vector<PropagationSegment>& segments() const noexcept { return segments_; }
  std::size_t size() const noexcept { return mirrors_.size(); }
  bool is_lossless() const noexcept;
  bool is_carrier_tuned() const noexcept;

 private:
  std::vector<MirrorSpec> mirrors_;
  std::vector<PropagationSegment> segments_;
};

/// Steady-state fields for unit amplitude incident on mirror 0 from outside.
struct ChainFields {
  complex reflection;
  complex transmission;
  /// forward[k]: field in segment k moving away from the input, at mirror k.
  std::vector<complex> forward;
  /// backward[k]: field in segment k moving toward the input, at mirror k+1.
  std::vector<complex> backward;
};

/// Closed-form composition, innermost mirror outward.
ChainFields chain_response(const CavityChain& chain, SidebandFrequency frequency);

/// Test oracle: assembles every mirror boundary condition into one dense linear
/// system and solves it directly. Throws SingularSystem for exactly degenerate
/// configurations (e.g. a closed lossless resonant cavity).
ChainFields network_oracle(const CavityChain& chain, SidebandFrequency frequency);

/// Reflection of the SRM + end-mirror sub-cavity as seen from the TSRM side.
/// `length` and `tuning` describe the SRM-end segment.
complex reflection_rho23(SidebandFrequency frequency, double length, const MirrorSpec& srm,
                         const MirrorSpec& end, double tuning = 0.0);

enum class DoubletObservable {
  InputCavityPower,  ///< circulating power between the input mirror and the next one
  EndCavityPower,    ///< circulating power next to the Michelson
  Transmission,      ///< power leaving through the Michelson-side mirror
};

DoubletObservable parse_doublet_observable(const std::string& name);
std::string to_string(DoubletObservable observable);

/// Resonance-doublet curve on a grid of sideband offsets (Hz). Requires a
/// carrier-tuned chain of at least three mirrors.
std::vector<double> doublet_response(const CavityChain& chain, std::span<const double> grid_hz,
                                     DoubletObservable observable = DoubletObservable::InputCavityPower,
                                     sweep::Execution exec = sweep::Execution::Parallel);

/// SRM power transmission giving a doublet split by +-omega_sp, from the
/// phase condition of the coupled resonators with unequal lengths. Bisection
/// on (1e-15, 1 - 1e-15) followed by a Newton polish; relative tolerance 1e-12.
/// Throws NoRootInBracket when the splitting is unreachable.
double solve_coupling_transmission(double omega_sp, double l1, double l2, const MirrorSpec& end);

/// Closed form for L1 = L2 = length.
double coupling_transmission_equal_lengths(double omega_sp, double length, const MirrorSpec& end);

/// Closed form for L1 = L2 and a perfectly reflecting Michelson.
double coupling_transmission_ideal(double omega_sp, double length);

struct DoubletResult {
  double f_minus;
  double f_plus;
  std::array<double, 2> peak_magnitudes;  // {minus, plus}
  std::array<double, 2> bandwidths;       // FWHM in Hz, {minus, plus}

  double splitting() const noexcept { return f_plus - f_minus; }
};

/// Locates the two largest maxima of a sampled response by grid scan plus
/// 3-point parabolic refinement of the log-magnitude, and their FWHM.
/// Throws PeaksNotFound if fewer than two maxima are present.
DoubletResult find_doublet_peaks(std::span<const double> frequencies_hz,
                                 std::span<const double> response);

}  // namespace tsr
