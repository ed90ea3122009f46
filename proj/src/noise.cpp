#include "tsr/noise.hpp"

#include "tsr/errors.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsr {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

Eigen::Matrix2cd rotation(double angle) { return rotation_matrix(angle).cast<complex>(); }

}  // namespace

void InterferometerParams::validate() const {
  if (!positive(wavelength)) throw InvalidArgument("wavelength must be positive");
  if (!positive(power_at_bs)) throw InvalidArgument("power at beamsplitter must be positive");
  if (!positive(mirror_mass)) throw InvalidArgument("mirror mass must be positive");
  if (!positive(arm_length)) throw InvalidArgument("arm length must be positive");
  if (arm_mirror_bounces.empty()) throw InvalidArgument("arm_mirror_bounces must not be empty");
  for (int n : arm_mirror_bounces) {
    if (n <= 0) throw InvalidArgument("arm_mirror_bounces entries must be positive");
  }
}

double InterferometerParams::ponderomotive_gain() const noexcept {
  return std::accumulate(arm_mirror_bounces.begin(), arm_mirror_bounces.end(), 0.0,
                         [](double acc, int n) { return acc + static_cast<double>(n) * n; });
}

double InterferometerParams::coupling(SidebandFrequency frequency) const noexcept {
  const double omega = frequency.omega();
  return 4.0 * power_at_bs * carrier_omega() * ponderomotive_gain() /
         (mirror_mass * kSpeedOfLight * kSpeedOfLight * omega * omega);
}

double InterferometerParams::signal_gain() const noexcept {
  return std::sqrt(power_at_bs / (2.0 * kHbar * carrier_omega()));
}

double InterferometerParams::strain_calibration() const noexcept {
  return 2.0 * (kTwoPi / wavelength) * arm_length;
}

DetunedSR DetunedSR::resonant_sideband(double resonance_hz, Sideband sideband, const MirrorSpec& srm,
                                       double length) {
  // Round trip of the upper sideband at +Omega: 2 (phi + Omega L / c); the
  // lower sideband sees 2 (phi - Omega L / c).
  const double phase = sideband_phase(length, SidebandFrequency::from_hz(resonance_hz));
  const double detuning = sideband == Sideband::Upper ? -phase : phase;
  return {wrap_angle(detuning), srm, length};
}

void validate(const Topology& topology) {
  std::visit(
      [](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, DetunedSR>) {
          if (!positive(t.length)) throw InvalidArgument("SR cavity length must be positive");
          if (!std::isfinite(t.detuning) || t.detuning <= -std::numbers::pi ||
              t.detuning > std::numbers::pi) {
            throw InvalidArgument("SR detuning must lie in (-pi, pi]");
          }
        } else {
          if (!positive(t.l1) || !positive(t.l2)) throw InvalidArgument("TSR lengths must be positive");
        }
      },
      topology);
}

std::string describe(const Topology& topology) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, DetunedSR>) {
          return fmt::format("detuned_sr(L={} m, detuning={:.17g} rad, R_srm={:.17g})", t.length,
                             t.detuning, t.recycling_mirror.reflectivity());
        } else {
          return fmt::format("tsr(L1={} m, L2={} m, T_srm={:.17g}, R_tsrm={:.17g})", t.l1, t.l2,
                             t.srm.transmissivity(), t.tsrm.reflectivity());
        }
      },
      topology);
}

CavityChain signal_chain(const Topology& topology, const InterferometerParams& params) {
  return std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, DetunedSR>) {
          return CavityChain::single(t.length, t.detuning, t.recycling_mirror, params.michelson);
        } else {
          return CavityChain::twin(t.l1, t.l2, t.tsrm, t.srm, params.michelson);
        }
      },
      topology);
}

double design_srm_transmission(double splitting_hz, double l1, double l2, const MirrorSpec& michelson,
                               CouplingDesign design) {
  const double omega = kTwoPi * splitting_hz;
  switch (design) {
    case CouplingDesign::Ideal:
      if (l1 != l2) throw InvalidArgument("closed-form coupling design needs L1 = L2");
      return coupling_transmission_ideal(omega, l1);
    case CouplingDesign::EqualLengths:
      if (l1 != l2) throw InvalidArgument("closed-form coupling design needs L1 = L2");
      return coupling_transmission_equal_lengths(omega, l1, michelson);
    case CouplingDesign::General:
      return solve_coupling_transmission(omega, l1, l2, michelson);
  }
  return 0.0;
}

HomodyneReadout::HomodyneReadout(double quadrature_angle) {
  if (!std::isfinite(quadrature_angle)) throw InvalidArgument("readout angle must be finite");
  double a = std::fmod(quadrature_angle, std::numbers::pi);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a = 0.0;
  angle_ = a;
}

HomodyneReadout HomodyneReadout::phase() { return HomodyneReadout(0.5 * std::numbers::pi); }

Eigen::Vector2d HomodyneReadout::projection() const { return {std::cos(angle_), std::sin(angle_)}; }

QuadratureTransfer io_relation(const Topology& topology, const InterferometerParams& params,
                               SidebandFrequency frequency, BackAction back_action) {
  if (frequency.omega() == 0.0) {
    throw DegenerateFrequency("free-mass response is singular at zero sideband frequency");
  }
  const CavityChain chain = signal_chain(topology, params);
  const std::size_t n = chain.size();
  const double kappa = back_action == BackAction::On ? params.coupling(frequency) : 0.0;

  Eigen::Matrix2cd ponderomotive = Eigen::Matrix2cd::Identity();
  ponderomotive(1, 0) = -kappa;
  Eigen::Matrix2cd reflection =
      chain_reflection_sign(n - 1) * mirror_scattering(params.michelson).rho * ponderomotive;
  Eigen::Vector2cd signal(0.0, params.signal_gain());

  double net_tuning = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const auto& seg = chain.segments()[k];
    net_tuning += seg.tuning();
    const Eigen::Matrix2cd hop =
        std::polar(1.0, sideband_phase(seg.length(), frequency)) * rotation(seg.tuning());
    const Eigen::Matrix2cd round_trip = hop * reflection * hop;
    const Eigen::Vector2cd returned = hop * signal;

    const auto s = mirror_scattering(chain.mirrors()[k]);
    const double sign = chain_reflection_sign(k);
    const Eigen::Matrix2cd loop = Eigen::Matrix2cd::Identity() - (-sign * s.rho) * round_trip;
    const complex det = loop.determinant();
    if (det == complex(0.0)) {
      throw SingularSystem(fmt::format("closed lossless resonance at {} Hz", frequency.hz()));
    }
    const Eigen::Matrix2cd feedback = loop.inverse();
    reflection = sign * s.rho * Eigen::Matrix2cd::Identity() + s.tau * s.tau * round_trip * feedback;
    signal = s.tau * feedback * returned;
  }

  const Eigen::Matrix2cd frame = rotation(-net_tuning);
  return {frame * reflection * frame, frame * signal};
}

Eigen::Matrix2d input_covariance(const SqueezedInput& squeezing) {
  if (!(std::isfinite(squeezing.r) && squeezing.r >= 0.0)) {
    throw InvalidArgument("squeeze parameter must be non-negative");
  }
  if (!squeezing.enabled || squeezing.r == 0.0) return Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d rot = rotation_matrix(squeezing.angle);
  const Eigen::Vector2d variances(std::exp(-2.0 * squeezing.r), std::exp(2.0 * squeezing.r));
  return rot * variances.asDiagonal() * rot.transpose();
}

double squeezing_db(double r) noexcept { return 10.0 * std::log10(std::exp(2.0 * r)); }

double signal_referred_noise(const QuadratureTransfer& transfer, const Eigen::Matrix2d& covariance,
                             const HomodyneReadout& readout) {
  const Eigen::Vector2cd v = readout.projection().cast<complex>();
  // v is real, so v^T M = (M^dag v)^dag.
  const Eigen::Vector2cd w = transfer.matrix.adjoint() * v;
  const double noise = (w.adjoint() * covariance.cast<complex>() * w)(0, 0).real();
  const double response = std::abs(v.dot(transfer.signal));
  return std::sqrt(std::max(noise, 0.0)) / response;
}

double optimal_squeeze_angle(const QuadratureTransfer& transfer, const HomodyneReadout& readout) {
  const Eigen::Vector2cd w = transfer.matrix.adjoint() * readout.projection().cast<complex>();
  // Noise = const + (e^{-2r} - e^{2r})/2 [A cos 2t + B sin 2t]; maximise the bracket.
  const double a = std::norm(w(0)) - std::norm(w(1));
  const double b = 2.0 * (std::conj(w(0)) * w(1)).real();
  double angle = 0.5 * std::atan2(b, a);
  if (angle < 0.0) angle += std::numbers::pi;
  return angle;
}

Eigen::Matrix2cd to_sideband_basis(const Eigen::Matrix2cd& quadrature_matrix) {
  const double h = std::sqrt(0.5);
  const complex i(0.0, 1.0);
  Eigen::Matrix2cd u;
  u << h, i * h, h, -i * h;
  return u * quadrature_matrix * u.inverse();
}

NoiseSpectrum noise_spectral_density(const Topology& topology, const InterferometerParams& params,
                                     const SqueezedInput& squeezing, const HomodyneReadout& readout,
                                     std::span<const double> grid_hz, const SpectrumOptions& options) {
  validate(topology);
  params.validate();
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!(std::isfinite(grid_hz[i]) && grid_hz[i] > 0.0)) {
      if (grid_hz[i] == 0.0) throw DegenerateFrequency("frequency grid touches 0 Hz");
      throw InvalidArgument("noise grid frequencies must be positive and finite");
    }
    if (i > 0 && !(grid_hz[i] > grid_hz[i - 1])) {
      throw InvalidArgument("noise grid must be strictly increasing");
    }
  }
  const Eigen::Matrix2d covariance = input_covariance(squeezing);
  const double scale = options.units == NsdUnits::Strain ? 1.0 / params.strain_calibration() : 1.0;

  NoiseSpectrum spectrum;
  spectrum.frequencies.assign(grid_hz.begin(), grid_hz.end());
  spectrum.nsd = sweep::map(
      grid_hz,
      [&](double hz) {
        const auto transfer =
            io_relation(topology, params, SidebandFrequency::from_hz(hz), options.back_action);
        const double nsd = scale * signal_referred_noise(transfer, covariance, readout);
        if (!std::isfinite(nsd)) {
          throw NumericalError(
              fmt::format("readout angle {:.6g} rad carries no signal at {} Hz", readout.angle(), hz));
        }
        return nsd;
      },
      options.exec);
  spectrum.metadata = {describe(topology), squeezing, readout.angle(),
                       options.back_action == BackAction::On, options.units};
  return spectrum;
}

std::optional<double> find_crossover(std::span<const double> frequencies,
                                     std::span<const double> better,
                                     std::span<const double> reference) {
  const std::size_t n = frequencies.size();
  if (better.size() != n || reference.size() != n) {
    throw InvalidArgument("crossover inputs differ in length");
  }
  constexpr double kSlack = 1e-9;
  std::size_t first = n;
  for (std::size_t i = n; i-- > 0;) {
    if (better[i] <= reference[i] * (1.0 + kSlack)) {
      first = i;
    } else {
      break;
    }
  }
  if (first == 0 || first == n) return std::nullopt;
  return frequencies[first];
}

std::optional<double> radiation_pressure_crossover(const Topology& topology,
                                                   const InterferometerParams& params,
                                                   const HomodyneReadout& readout,
                                                   std::span<const double> grid_hz) {
  const auto vacuum = SqueezedInput::vacuum();
  const auto full = noise_spectral_density(topology, params, vacuum, readout, grid_hz);
  const auto shot = noise_spectral_density(topology, params, vacuum, readout, grid_hz,
                                           {BackAction::Off, NsdUnits::Phase});
  std::vector<double> radiation(grid_hz.size());
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    const double excess = full.nsd[i] * full.nsd[i] - shot.nsd[i] * shot.nsd[i];
    radiation[i] = std::sqrt(std::max(excess, 0.0));
  }
  return find_crossover(grid_hz, radiation, shot.nsd);
}

double squeeze_angle_at_minimum(const Topology& topology, const InterferometerParams& params,
                                const HomodyneReadout& readout, std::span<const double> grid_hz,
                                double band_lo_hz, double band_hi_hz) {
  const auto vac = noise_spectral_density(topology, params, SqueezedInput::vacuum(), readout, grid_hz);
  double best = std::numeric_limits<double>::infinity();
  double f_star = 0.0;
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (grid_hz[i] >= band_lo_hz && grid_hz[i] <= band_hi_hz && vac.nsd[i] < best) {
      best = vac.nsd[i];
      f_star = grid_hz[i];
    }
  }
  if (!(best < std::numeric_limits<double>::infinity())) {
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
      if (vac.nsd[i] < best) {
        best = vac.nsd[i];
        f_star = grid_hz[i];
      }
    }
  }
  return optimal_squeeze_angle(io_relation(topology, params, SidebandFrequency::from_hz(f_star)), readout);
}

MatchMode parse_match_mode(const std::string& name) {
  if (name == "tangent") return MatchMode::Tangent;
  if (name == "equal_minimum") return MatchMode::EqualMinimum;
  throw InvalidArgument(fmt::format("unknown match mode '{}' (expected tangent|equal_minimum)", name));
}

std::string to_string(MatchMode mode) {
  return mode == MatchMode::Tangent ? "tangent" : "equal_minimum";
}

namespace {

// Peak-sensitivity matching objective; increases as the TSRM transmission
// decreases (narrower, deeper doublet). Root = matched TSRM.
double match_objective(MatchMode mode, std::span<const double> tsr, std::span<const double> sr_best) {
  if (mode == MatchMode::EqualMinimum) {
    return *std::min_element(sr_best.begin(), sr_best.end()) /
               *std::min_element(tsr.begin(), tsr.end()) -
           1.0;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tsr.size(); ++i) worst = std::min(worst, sr_best[i] / tsr[i]);
  return worst - 1.0;
}

double band_minimum_frequency(const NoiseSpectrum& spectrum, double lo, double hi) {
  double best = std::numeric_limits<double>::infinity();
  double where = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < spectrum.frequencies.size(); ++i) {
    const double f = spectrum.frequencies[i];
    if (f >= lo && f <= hi && spectrum.nsd[i] < best) {
      best = spectrum.nsd[i];
      where = f;
    }
  }
  return where;
}

}  // namespace

TopologyComparison compare_topologies(const InterferometerParams& params,
                                      const SqueezedInput& squeezing, std::span<const double> grid_hz,
                                      const ComparisonOptions& options) {
  params.validate();
  const double length = options.cavity_length;
  const auto vacuum = SqueezedInput::vacuum();
  const SpectrumOptions spec_opts{BackAction::On, NsdUnits::Phase, options.exec};

  TopologyComparison out;
  out.sr_upper_topology =
      DetunedSR::resonant_sideband(options.resonance_hz, Sideband::Upper, options.sr_mirror, length);
  out.sr_lower_topology =
      DetunedSR::resonant_sideband(options.resonance_hz, Sideband::Lower, options.sr_mirror, length);
  const auto sr_up_vac =
      noise_spectral_density(out.sr_upper_topology, params, vacuum, options.sr_readout, grid_hz, spec_opts);
  const auto sr_lo_vac =
      noise_spectral_density(out.sr_lower_topology, params, vacuum, options.sr_readout, grid_hz, spec_opts);

  // Resonance band: the optical-spring dip of SR-lower must not count as "peak".
  const double band_lo = 0.5 * options.resonance_hz;
  const double band_hi = 2.0 * options.resonance_hz;
  std::vector<double> band;
  std::vector<double> sr_best_band;
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (grid_hz[i] >= band_lo && grid_hz[i] <= band_hi) {
      band.push_back(grid_hz[i]);
      sr_best_band.push_back(std::min(sr_up_vac.nsd[i], sr_lo_vac.nsd[i]));
    }
  }
  if (band.size() < 3) {
    throw InvalidArgument("frequency grid does not resolve the resonance band [f_res/2, 2 f_res]");
  }

  const MirrorSpec srm = MirrorSpec::lossless_transmission(
      design_srm_transmission(options.resonance_hz, length, length, params.michelson, options.srm_design));
  const auto twin_with = [&](double tsrm_transmission) {
    return TwinSR{length, length, srm, MirrorSpec::lossless_transmission(tsrm_transmission)};
  };
  const auto objective = [&](double tsrm_transmission) {
    const auto tsr = noise_spectral_density(twin_with(tsrm_transmission), params, vacuum,
                                            options.tsr_readout, band, spec_opts);
    return match_objective(options.match, tsr.nsd, sr_best_band);
  };

  // Scan TSRM transmission downward (log grid) for the first sign change.
  constexpr int kScan = 80;
  const double t_max = 0.5;
  const double t_min = 1e-6;
  double hi_t = t_max;
  double f_hi = objective(hi_t);
  double lo_t = 0.0;
  bool bracketed = false;
  for (int i = 1; i <= kScan; ++i) {
    const double t = t_max * std::pow(t_min / t_max, static_cast<double>(i) / kScan);
    const double f = objective(t);
    if (f_hi < 0.0 && f >= 0.0) {
      lo_t = t;
      bracketed = true;
      break;
    }
    hi_t = t;
    f_hi = f;
  }
  if (!bracketed) {
    throw NoRootInBracket("no TSRM reflectivity matches the single-sideband peak sensitivity");
  }
  // objective(hi_t) < 0 <= objective(lo_t); keep the matched side (>= 0).
  while (hi_t / lo_t - 1.0 > 1e-11) {
    const double mid = std::sqrt(hi_t * lo_t);
    if (objective(mid) >= 0.0) {
      lo_t = mid;
    } else {
      hi_t = mid;
    }
  }
  out.tsr_topology = twin_with(lo_t);

  const auto tsr_vac =
      noise_spectral_density(out.tsr_topology, params, vacuum, options.tsr_readout, grid_hz, spec_opts);
  {
    double tsr_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
      if (grid_hz[i] >= band_lo && grid_hz[i] <= band_hi) tsr_min = std::min(tsr_min, tsr_vac.nsd[i]);
    }
    out.match_residual =
        tsr_min / *std::min_element(sr_best_band.begin(), sr_best_band.end()) - 1.0;
  }

  const auto with_squeezing = [&](const Topology& topology, const NoiseSpectrum& vac,
                                  const HomodyneReadout& readout) {
    if (!squeezing.enabled || squeezing.r == 0.0) {
      auto copy = vac;
      copy.metadata.squeezing = squeezing;
      return copy;
    }
    SqueezedInput sq = squeezing;
    if (options.optimize_squeeze_angle) {
      const double f_star = band_minimum_frequency(vac, band_lo, band_hi);
      sq.angle = optimal_squeeze_angle(
          io_relation(topology, params, SidebandFrequency::from_hz(f_star)), readout);
    }
    return noise_spectral_density(topology, params, sq, readout, grid_hz, spec_opts);
  };
  out.tsr = with_squeezing(out.tsr_topology, tsr_vac, options.tsr_readout);
  out.sr_upper = with_squeezing(out.sr_upper_topology, sr_up_vac, options.sr_readout);
  out.sr_lower = with_squeezing(out.sr_lower_topology, sr_lo_vac, options.sr_readout);

  std::vector<double> sr_best(grid_hz.size());
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    sr_best[i] = std::min(out.sr_upper.nsd[i], out.sr_lower.nsd[i]);
  }
  out.crossover_hz = find_crossover(grid_hz, out.tsr.nsd, sr_best);
  double improvement = 0.0;
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!out.crossover_hz || grid_hz[i] >= *out.crossover_hz) {
      improvement = std::max(improvement, sr_best[i] / out.tsr.nsd[i]);
    }
  }
  out.max_improvement = improvement;
  return out;
}

}  // namespace tsr
