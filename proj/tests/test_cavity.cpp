#include "support.hpp"

#include "tsr/cavity.hpp"
#include "tsr/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tsr;
using doctest::Approx;

namespace {

const MirrorSpec kMichelson = MirrorSpec::lossless_reflectivity(0.99995);

CavityChain reference_chain(double tsrm_reflectivity = 0.963) {
  const double t = coupling_transmission_ideal(kTwoPi * 1000.0, 1200.0);
  return CavityChain::twin(1200.0, 1200.0, MirrorSpec::lossless_reflectivity(tsrm_reflectivity),
                           MirrorSpec::lossless_transmission(t), kMichelson);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double max_field_error(const ChainFields& a, const ChainFields& b) {
  double err = std::max(std::abs(a.reflection - b.reflection), std::abs(a.transmission - b.transmission));
  for (std::size_t k = 0; k < a.forward.size(); ++k) {
    err = std::max(err, std::abs(a.forward[k] - b.forward[k]) / std::max(1.0, std::abs(b.forward[k])));
    err = std::max(err, std::abs(a.backward[k] - b.backward[k]) / std::max(1.0, std::abs(b.backward[k])));
  }
  return err;
}

}  // namespace

TEST_CASE("chain construction") {
  CHECK_THROWS_AS(CavityChain({MirrorSpec::perfect()}, {}), InvalidArgument);
  CHECK_THROWS_AS(CavityChain({MirrorSpec::perfect(), MirrorSpec::perfect()}, {}), InvalidArgument);
  const auto chain = reference_chain();
  CHECK(chain.size() == 3);
  CHECK(chain.is_lossless());
  CHECK(chain.is_carrier_tuned());
  CHECK_FALSE(CavityChain::single(10.0, 0.1, kMichelson, kMichelson).is_carrier_tuned());
}

TEST_CASE("rho23 of the SRM and Michelson sub-cavity") {
  SUBCASE("lossless sub-cavity reflects everything") {
    const auto srm = MirrorSpec::lossless_transmission(0.01);
    for (double f : {0.0, 13.0, 1000.0, -4321.0}) {
      const complex r = reflection_rho23(SidebandFrequency::from_hz(f), 1200.0, srm, MirrorSpec::perfect());
      CHECK(std::abs(std::abs(r) - 1.0) < 1e-12);
    }
    // On carrier resonance the round trip phase vanishes.
    const complex r0 = reflection_rho23(SidebandFrequency::from_hz(0.0), 1200.0, srm, MirrorSpec::perfect());
    CHECK(std::abs(std::arg(r0 * complex(-1.0, 0.0))) < 1e-12);
  }
  SUBCASE("transparent SRM leaves the bare end-mirror round trip") {
    const auto f = SidebandFrequency::from_hz(700.0);
    const complex z = std::pow(propagation_phase(PropagationSegment(1200.0), f), 2);
    const complex r = reflection_rho23(f, 1200.0, MirrorSpec::transparent(), kMichelson);
    CHECK(std::abs(r - (-kMichelson.rho() * z)) < 1e-15);
  }
  SUBCASE("fig. 2 parameters against the dense oracle") {
    const auto srm = MirrorSpec::lossless_transmission(coupling_transmission_ideal(kTwoPi * 1000.0, 1200.0));
    const auto f = SidebandFrequency::from_hz(0.0);
    const complex r = reflection_rho23(f, 1200.0, srm, kMichelson);
    // Chain position 0 presents the opposite sign to position 1.
    const complex oracle = network_oracle(CavityChain::single(1200.0, 0.0, srm, kMichelson), f).reflection;
    CHECK(std::abs(r + oracle) < 1e-12);
    // The resonant sub-cavity is lossy through the Michelson: |rho23| = 0.9614.
    CHECK(std::abs(r) == Approx(0.96140).epsilon(1e-4));
    CHECK(std::abs(r) < 1.0);
  }
}

TEST_CASE("network oracle closed forms") {
  SUBCASE("two-mirror Fabry-Perot") {
    const auto m1 = MirrorSpec::lossless_reflectivity(0.9);
    const auto m2 = MirrorSpec::lossless_reflectivity(0.8);
    for (double f : {0.0, 10.0, 3456.0, -20000.0}) {
      const auto freq = SidebandFrequency::from_hz(f);
      const complex z = std::pow(propagation_phase(PropagationSegment(500.0, 0.2), freq), 2);
      const complex textbook =
          -m1.rho() + m1.tau() * m1.tau() * m2.rho() * z / (1.0 - m1.rho() * m2.rho() * z);
      const auto fields = network_oracle(CavityChain::single(500.0, 0.2, m1, m2), freq);
      CHECK(std::abs(fields.reflection - textbook) < 1e-12);
    }
  }
  SUBCASE("twin chain reflection composes from rho23") {
    const auto chain = reference_chain();
    const auto& tsrm = chain.mirrors()[0];
    for (double f : {-1500.0, -1000.0, 0.0, 250.0, 1000.0}) {
      const auto freq = SidebandFrequency::from_hz(f);
      const complex r23 = reflection_rho23(freq, 1200.0, chain.mirrors()[1], chain.mirrors()[2]);
      const complex z = std::pow(propagation_phase(chain.segments()[0], freq), 2) * r23;
      const complex composed = -tsrm.rho() + tsrm.tau() * tsrm.tau() * z / (1.0 - tsrm.rho() * z);
      CHECK(std::abs(network_oracle(chain, freq).reflection - composed) < 1e-10);
    }
  }
  SUBCASE("closed lossless resonator is singular") {
    const auto chain = CavityChain::single(100.0, 0.0, MirrorSpec::perfect(), MirrorSpec::perfect());
    CHECK_THROWS_AS(network_oracle(chain, SidebandFrequency::from_hz(0.0)), SingularSystem);
  }
}

TEST_CASE("composed response matches the dense oracle on random chains") {
  std::mt19937_64 rng(2024);
  for (bool lossy : {false, true}) {
    const int cases = lossy ? 50 : 100;
    for (int i = 0; i < cases; ++i) {
      const auto chain = testing::random_chain(rng, lossy);
      const auto f = SidebandFrequency::from_hz(testing::random_frequency_hz(rng));
      const auto composed = chain_response(chain, f);
      const auto oracle = network_oracle(chain, f);
      CHECK(max_field_error(composed, oracle) < 1e-10);
      if (!lossy) {
        CHECK(std::abs(std::norm(oracle.reflection) + std::norm(oracle.transmission) - 1.0) < 1e-10);
      } else {
        CHECK(std::norm(oracle.reflection) + std::norm(oracle.transmission) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("coupling transmission design equations") {
  const double w1k = kTwoPi * 1000.0;
  SUBCASE("ideal end mirror closed form") {
    const double t = coupling_transmission_ideal(w1k, 1200.0);
    CHECK(t == Approx(2.528e-3).epsilon(1e-3));
    const double c = std::cos(2.0 * w1k * 1200.0 / kSpeedOfLight);
    CHECK(t == Approx(1.0 - c * c).epsilon(1e-15));
    CHECK(coupling_transmission_ideal(0.0, 1200.0) == 0.0);
  }
  SUBCASE("quarter free spectral range needs full transmission") {
    const double w = std::numbers::pi * kSpeedOfLight / (4.0 * 1200.0);
    CHECK(coupling_transmission_ideal(w, 1200.0) == Approx(1.0).epsilon(1e-15));
    CHECK(coupling_transmission_equal_lengths(w, 1200.0, kMichelson) == Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("equal-lengths form reduces to the ideal form for a perfect end mirror") {
    for (double f : {1.0, 100.0, 1000.0, 12345.0, 60000.0}) {
      const double eq = coupling_transmission_equal_lengths(kTwoPi * f, 1200.0, MirrorSpec::perfect());
      const double id = coupling_transmission_ideal(kTwoPi * f, 1200.0);
      CHECK(std::abs(eq - id) <= 1e-15 * std::max(id, 1e-300) + 1e-18);
    }
  }
  SUBCASE("general solver agrees with the closed forms") {
    CHECK(rel(solve_coupling_transmission(w1k, 1200.0, 1200.0, MirrorSpec::perfect()),
              coupling_transmission_ideal(w1k, 1200.0)) < 1e-9);
    CHECK(rel(solve_coupling_transmission(w1k, 1200.0, 1200.0, kMichelson),
              coupling_transmission_equal_lengths(w1k, 1200.0, kMichelson)) < 1e-9);
    for (double f : {30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0}) {
      for (double r2 : {1.0, 0.99995, 0.999, 0.99}) {
        const auto end = MirrorSpec::lossless_reflectivity(r2);
        const double general = solve_coupling_transmission(kTwoPi * f, 1200.0, 1200.0, end);
        CHECK(rel(general, coupling_transmission_equal_lengths(kTwoPi * f, 1200.0, end)) < 1e-9);
      }
    }
  }
  SUBCASE("small splitting needs small coupling") {
    const double a = solve_coupling_transmission(kTwoPi * 10.0, 1200.0, 1200.0, kMichelson);
    const double b = solve_coupling_transmission(kTwoPi * 0.1, 1200.0, 1200.0, kMichelson);
    CHECK(b < a);
    CHECK(b < 1e-5);
  }
  SUBCASE("unreachable splittings and bad input") {
    const double limit_hz = kSpeedOfLight / (4.0 * 1200.0);
    CHECK_THROWS_AS(solve_coupling_transmission(kTwoPi * 1.1 * limit_hz, 1200.0, 1200.0, kMichelson),
                    NoRootInBracket);
    CHECK_THROWS_AS(solve_coupling_transmission(kTwoPi * 1.1 * limit_hz / 2, 600.0, 2400.0, kMichelson),
                    NoRootInBracket);
    CHECK_THROWS_AS(solve_coupling_transmission(0.0, 1200.0, 1200.0, kMichelson), InvalidArgument);
    CHECK_THROWS_AS(solve_coupling_transmission(1.0, -1.0, 1200.0, kMichelson), InvalidArgument);
  }
}

TEST_CASE("unequal lengths: designed coupling produces the requested resonance") {
  const double l1 = 900.0;
  const double l2 = 1500.0;
  const double f_sp = 800.0;
  const auto end = MirrorSpec::lossless_reflectivity(0.99995);
  const double t = solve_coupling_transmission(kTwoPi * f_sp, l1, l2, end);
  CHECK(t > 0.0);
  CHECK(t < 1.0);
  // Resonance condition: the input-side round trip closes at +f_sp.
  const auto freq = SidebandFrequency::from_hz(f_sp);
  const complex r23 = reflection_rho23(freq, l2, MirrorSpec::lossless_transmission(t), end);
  CHECK(std::abs(std::arg(r23 * std::polar(1.0, 2.0 * sideband_phase(l1, freq)))) < 1e-9);
  // With a high-reflectivity input mirror the doublet lands on the design.
  const auto chain = CavityChain::twin(l1, l2, MirrorSpec::lossless_reflectivity(0.999),
                                       MirrorSpec::lossless_transmission(t), end);
  const auto grid = sweep::make_grid(0.0, 2000.0, 20001, sweep::Spacing::Linear);
  const auto y = doublet_response(chain, grid);
  std::size_t best = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > y[best]) best = i;
  }
  CHECK(grid[best] == Approx(f_sp).epsilon(0.01));
}

TEST_CASE("fig. 2 resonance doublet") {
  const auto chain = reference_chain();
  const auto grid = sweep::make_grid(-3000.0, 3000.0, 6001, sweep::Spacing::Linear);
  const auto y = doublet_response(chain, grid);
  const auto peaks = find_doublet_peaks(grid, y);
  CHECK(peaks.f_minus == Approx(-1000.0).epsilon(0.01));
  CHECK(peaks.f_plus == Approx(1000.0).epsilon(0.01));
  CHECK(peaks.splitting() == Approx(2000.0).epsilon(0.01));
  CHECK(rel(peaks.peak_magnitudes[0], peaks.peak_magnitudes[1]) < 1e-9);
  CHECK(rel(peaks.bandwidths[0], peaks.bandwidths[1]) < 0.02);

  SUBCASE("every observable is symmetric") {
    for (auto obs : {DoubletObservable::InputCavityPower, DoubletObservable::EndCavityPower,
                     DoubletObservable::Transmission}) {
      const auto curve = doublet_response(chain, grid, obs);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(rel(curve[i], curve[grid.size() - 1 - i]) < 1e-10);
      }
      const auto p = find_doublet_peaks(grid, curve);
      CHECK(p.f_minus < 0.0);
      CHECK(p.f_plus > 0.0);
    }
  }
  SUBCASE("reflection is symmetric in magnitude and antisymmetric in phase") {
    for (double f : {10.0, 333.0, 1000.0, 2500.0}) {
      const complex up = chain_response(chain, SidebandFrequency::from_hz(f)).reflection;
      const complex lo = chain_response(chain, SidebandFrequency::from_hz(-f)).reflection;
      CHECK(std::abs(std::abs(up) - std::abs(lo)) < 1e-10);
      CHECK(std::abs(std::arg(up) + std::arg(lo)) < 1e-10);
    }
  }
  SUBCASE("a leakier input mirror broadens the doublet") {
    const auto wide = find_doublet_peaks(grid, doublet_response(reference_chain(1.0 - 2.0 * 0.037), grid));
    CHECK(wide.bandwidths[0] > peaks.bandwidths[0]);
    CHECK(wide.bandwidths[1] > peaks.bandwidths[1]);
  }
  SUBCASE("serial and parallel sweeps are bit-identical") {
    const auto serial = doublet_response(chain, grid, DoubletObservable::InputCavityPower,
                                         sweep::Execution::Serial);
    CHECK(serial == y);
  }
}

TEST_CASE("removing the coupling mirror leaves a single resonance") {
  // The merged cavity needs a quarter-wave retune to be carrier resonant.
  const CavityChain merged({MirrorSpec::lossless_reflectivity(0.963), MirrorSpec::transparent(), kMichelson},
                           {PropagationSegment(1200.0, std::numbers::pi / 2), PropagationSegment(1200.0)});
  const auto grid = sweep::make_grid(-3000.0, 3000.0, 6001, sweep::Spacing::Linear);
  std::vector<double> y;
  for (double f : grid) y.push_back(std::norm(chain_response(merged, SidebandFrequency::from_hz(f)).forward[0]));
  const auto peak = std::max_element(y.begin(), y.end());
  CHECK(grid[static_cast<std::size_t>(peak - y.begin())] == Approx(0.0));
  CHECK_THROWS_AS(find_doublet_peaks(grid, y), PeaksNotFound);
}

TEST_CASE("doublet response preconditions") {
  const auto grid = sweep::make_grid(-10.0, 10.0, 21, sweep::Spacing::Linear);
  CHECK_THROWS_AS(doublet_response(CavityChain::single(1.0, 0.0, kMichelson, kMichelson), grid), InvalidArgument);
  const CavityChain detuned({kMichelson, kMichelson, kMichelson}, {PropagationSegment(1.0, 0.1), PropagationSegment(1.0)});
  CHECK_THROWS_AS(doublet_response(detuned, grid), InvalidArgument);
  CHECK(parse_doublet_observable("transmission") == DoubletObservable::Transmission);
  CHECK(to_string(DoubletObservable::EndCavityPower) == "end_cavity_power");
  CHECK_THROWS_AS(parse_doublet_observable("bogus"), InvalidArgument);
}

TEST_CASE("peak finder on synthetic Lorentzians") {
  const auto grid = sweep::make_grid(-100.0, 100.0, 2001, sweep::Spacing::Linear);
  const auto lorentz = [](double x, double x0, double hw, double a) {
    return a / (1.0 + (x - x0) * (x - x0) / (hw * hw));
  };
  std::vector<double> y;
  for (double x : grid) y.push_back(lorentz(x, -40.03, 3.0, 2.0) + lorentz(x, 40.03, 3.0, 2.0));
  const auto p = find_doublet_peaks(grid, y);
  CHECK(p.f_minus == Approx(-40.03).epsilon(1e-3));
  CHECK(p.f_plus == Approx(40.03).epsilon(1e-3));
  CHECK(p.bandwidths[0] == Approx(6.0).epsilon(0.01));
  CHECK(p.bandwidths[1] == Approx(6.0).epsilon(0.01));

  std::vector<double> single;
  for (double x : grid) single.push_back(lorentz(x, 5.0, 3.0, 1.0));
  CHECK_THROWS_AS(find_doublet_peaks(grid, single), PeaksNotFound);
}
