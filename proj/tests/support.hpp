#pragma once

#include "tsr/cavity.hpp"
#include "tsr/noise.hpp"

#include <random>

namespace tsr::testing {

inline InterferometerParams canonical_params() {
  InterferometerParams p;
  p.arm_mirror_bounces = {2, 1};
  return p;
}

/// Carrier-tuned TSR with the SRM designed for a 1 kHz splitting.
inline TwinSR canonical_tsr(double tsrm_reflectivity = 0.963) {
  const double t = coupling_transmission_ideal(kTwoPi * 1000.0, 1200.0);
  return {1200.0, 1200.0, MirrorSpec::lossless_transmission(t),
          MirrorSpec::lossless_reflectivity(tsrm_reflectivity)};
}

inline MirrorSpec random_mirror(std::mt19937_64& rng, bool lossy) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double loss = lossy ? 0.05 * u(rng) : 0.0;
  const double r = (1.0 - loss) * (0.05 + 0.9499 * u(rng));
  return MirrorSpec(r, 1.0 - loss - r, loss);
}

/// 2 to 5 mirrors, lengths 1 m .. 3 km, arbitrary tunings.
inline CavityChain random_chain(std::mt19937_64& rng, bool lossy) {
  std::uniform_int_distribution<int> count(2, 5);
  std::uniform_real_distribution<double> len(1.0, 3000.0);
  std::uniform_real_distribution<double> tune(-3.1, 3.1);
  const int n = count(rng);
  std::vector<MirrorSpec> mirrors;
  std::vector<PropagationSegment> segments;
  for (int i = 0; i < n; ++i) mirrors.push_back(random_mirror(rng, lossy));
  for (int i = 0; i + 1 < n; ++i) segments.emplace_back(len(rng), tune(rng));
  return CavityChain(std::move(mirrors), std::move(segments));
}

inline double random_frequency_hz(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(-20000.0, 20000.0);
  return f(rng);
}

}  // namespace tsr::testing
