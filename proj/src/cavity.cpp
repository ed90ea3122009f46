#include "tsr/cavity.hpp"

#include "tsr/errors.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

namespace tsr {

namespace {

struct ChainCoefficients {
  // Reflection seen from the input side and from the far side, per mirror.
  double from_input;
  double from_far;
  double tau;
};

ChainCoefficients coefficients(const CavityChain& chain, std::size_t k) {
  const auto s = mirror_scattering(chain.mirrors()[k]);
  const double sign = chain_reflection_sign(k);
  return {sign * s.rho, -sign * s.rho, s.tau};
}

std::vector<complex> segment_phases(const CavityChain& chain, SidebandFrequency frequency) {
  std::vector<complex> p;
  p.reserve(chain.segments().size());
  for (const auto& seg : chain.segments()) p.push_back(propagation_phase(seg, frequency));
  return p;
}

}  // namespace

CavityChain::CavityChain(std::vector<MirrorSpec> mirrors, std::vector<PropagationSegment> segments)
    : mirrors_(std::move(mirrors)), segments_(std::move(segments)) {
  if (mirrors_.size() < 2) throw InvalidArgument("a cavity chain needs at least two mirrors");
  if (segments_.size() + 1 != mirrors_.size()) {
    throw InvalidArgument(fmt::format("chain with {} mirrors needs {} segments, got {}",
                                      mirrors_.size(), mirrors_.size() - 1, segments_.size()));
  }
}

CavityChain CavityChain::twin(double l1, double l2, const MirrorSpec& tsrm, const MirrorSpec& srm,
                              const MirrorSpec& michelson) {
  return CavityChain({tsrm, srm, michelson}, {PropagationSegment(l1), PropagationSegment(l2)});
}

CavityChain CavityChain::single(double length, double tuning, const MirrorSpec& srm,
                                const MirrorSpec& michelson) {
  return CavityChain({srm, michelson}, {PropagationSegment(length, tuning)});
}

bool CavityChain::is_lossless() const noexcept {
  return std::all_of(mirrors_.begin(), mirrors_.end(), [](const auto& m) { return m.is_lossless(); });
}

bool CavityChain::is_carrier_tuned() const noexcept {
  return std::all_of(segments_.begin(), segments_.end(), [](const auto& s) { return s.tuning() == 0.0; });
}

ChainFields chain_response(const CavityChain& chain, SidebandFrequency frequency) {
  const std::size_t n = chain.size();
  const std::size_t segments = n - 1;
  const auto p = segment_phases(chain, frequency);

  // inner[k]: reflection of mirrors k..n-1 seen from the input side of mirror k.
  std::vector<complex> inner(n);
  inner[n - 1] = coefficients(chain, n - 1).from_input;
  for (std::size_t k = n - 1; k-- > 0;) {
    const auto c = coefficients(chain, k);
    const complex round_trip = p[k] * p[k] * inner[k + 1];
    inner[k] = c.from_input + c.tau * c.tau * round_trip / (1.0 - c.from_far * round_trip);
  }

  ChainFields fields;
  fields.reflection = inner[0];
  fields.forward.resize(segments);
  fields.backward.resize(segments);
  complex incident = 1.0;
  for (std::size_t k = 0; k < segments; ++k) {
    const auto c = coefficients(chain, k);
    const complex round_trip = p[k] * p[k] * inner[k + 1];
    fields.forward[k] = c.tau * incident / (1.0 - c.from_far * round_trip);
    fields.backward[k] = inner[k + 1] * p[k] * fields.forward[k];
    incident = p[k] * fields.forward[k];
  }
  fields.transmission = coefficients(chain, n - 1).tau * incident;
  return fields;
}

ChainFields network_oracle(const CavityChain& chain, SidebandFrequency frequency) {
  const std::size_t n = chain.size();
  const std::size_t s = n - 1;
  const auto p = segment_phases(chain, frequency);

  // Unknowns: forward a_0..a_{s-1}, backward e_0..e_{s-1}, reflection, transmission.
  const auto a = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
  const auto e = [s](std::size_t k) { return static_cast<Eigen::Index>(s + k); };
  const auto refl = static_cast<Eigen::Index>(2 * s);
  const auto trans = static_cast<Eigen::Index>(2 * s + 1);
  const auto size = static_cast<Eigen::Index>(2 * s + 2);

  Eigen::MatrixXcd system = Eigen::MatrixXcd::Zero(size, size);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(size);
  Eigen::Index row = 0;
  const complex incident = 1.0;

  {
    const auto c = coefficients(chain, 0);
    system(row, a(0)) = 1.0;
    system(row, e(0)) = -c.from_far * p[0];
    rhs(row++) = c.tau * incident;
    system(row, refl) = 1.0;
    system(row, e(0)) = -c.tau * p[0];
    rhs(row++) = c.from_input * incident;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const auto c = coefficients(chain, k);
    system(row, a(k)) = 1.0;
    system(row, a(k - 1)) = -c.tau * p[k - 1];
    system(row, e(k)) = -c.from_far * p[k];
    ++row;
    system(row, e(k - 1)) = 1.0;
    system(row, a(k - 1)) = -c.from_input * p[k - 1];
    system(row, e(k)) = -c.tau * p[k];
    ++row;
  }
  {
    const auto c = coefficients(chain, n - 1);
    system(row, e(s - 1)) = 1.0;
    system(row, a(s - 1)) = -c.from_input * p[s - 1];
    ++row;
    system(row, trans) = 1.0;
    system(row, a(s - 1)) = -c.tau * p[s - 1];
    ++row;
  }

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(system);
  if (!lu.isInvertible()) {
    throw SingularSystem(fmt::format("cavity network is singular at {} Hz", frequency.hz()));
  }
  const Eigen::VectorXcd x = lu.solve(rhs);

  ChainFields fields;
  fields.reflection = x(refl);
  fields.transmission = x(trans);
  fields.forward.resize(s);
  fields.backward.resize(s);
  for (std::size_t k = 0; k < s; ++k) {
    fields.forward[k] = x(a(k));
    fields.backward[k] = x(e(k));
  }
  return fields;
}

complex reflection_rho23(SidebandFrequency frequency, double length, const MirrorSpec& srm,
                         const MirrorSpec& end, double tuning) {
  const PropagationSegment segment(length, tuning);
  const auto s = mirror_scattering(srm);
  const auto m = mirror_scattering(end);
  if (s.tau == 0.0) return s.rho;
  const complex p = propagation_phase(segment, frequency);
  const complex round_trip = p * p;
  // SRM presents +rho_s, the end mirror -rho_e (chain positions 1 and 2).
  return s.rho - s.tau * s.tau * m.rho * round_trip / (1.0 - s.rho * m.rho * round_trip);
}

DoubletObservable parse_doublet_observable(const std::string& name) {
  if (name == "input_cavity_power") return DoubletObservable::InputCavityPower;
  if (name == "end_cavity_power") return DoubletObservable::EndCavityPower;
  if (name == "transmission") return DoubletObservable::Transmission;
  throw InvalidArgument(fmt::format(
      "unknown doublet observable '{}' (expected input_cavity_power|end_cavity_power|transmission)",
      name));
}

std::string to_string(DoubletObservable observable) {
  switch (observable) {
    case DoubletObservable::InputCavityPower: return "input_cavity_power";
    case DoubletObservable::EndCavityPower: return "end_cavity_power";
    case DoubletObservable::Transmission: return "transmission";
  }
  return "unknown";
}

std::vector<double> doublet_response(const CavityChain& chain, std::span<const double> grid_hz,
                                     DoubletObservable observable, sweep::Execution exec) {
  if (chain.size() < 3) {
    throw InvalidArgument("doublet response needs a coupled chain of at least three mirrors");
  }
  if (!chain.is_carrier_tuned()) {
    throw InvalidArgument("doublet response expects a carrier-tuned chain (all tunings zero)");
  }
  return sweep::map(
      grid_hz,
      [&](double hz) {
        const auto fields = chain_response(chain, SidebandFrequency::from_hz(hz));
        switch (observable) {
          case DoubletObservable::InputCavityPower: return std::norm(fields.forward.front());
          case DoubletObservable::EndCavityPower: return std::norm(fields.forward.back());
          case DoubletObservable::Transmission: return std::norm(fields.transmission);
        }
        return 0.0;
      },
      exec);
}

namespace {

constexpr double kBracketEdge = 1e-15;

// Phase of one round trip through the input-side cavity, excluding the
// input mirror; zero at a resonance of the coupled system.
double coupled_round_trip_phase(double transmission, double theta1, double omega, double l2,
                                const MirrorSpec& end) {
  const auto srm = MirrorSpec::lossless_transmission(transmission);
  const complex rho23 = reflection_rho23(SidebandFrequency::from_angular(omega), l2, srm, end);
  return std::arg(rho23 * std::polar(1.0, 2.0 * theta1));
}

}  // namespace

double solve_coupling_transmission(double omega_sp, double l1, double l2, const MirrorSpec& end) {
  if (!(std::isfinite(omega_sp) && omega_sp > 0.0)) {
    throw InvalidArgument(fmt::format("splitting must be positive, got {} rad/s", omega_sp));
  }
  if (!(l1 > 0.0 && l2 > 0.0)) throw InvalidArgument("cavity lengths must be positive");
  const double limit = std::numbers::pi * kSpeedOfLight / (2.0 * std::max(l1, l2));
  if (omega_sp >= limit) {
    throw NoRootInBracket(fmt::format(
        "splitting {:.6g} Hz is beyond the first branch limit {:.6g} Hz for L1={} m, L2={} m",
        omega_sp / kTwoPi, limit / kTwoPi, l1, l2));
  }

  const double theta1 = omega_sp * l1 / kSpeedOfLight;
  const auto phase = [&](double t) { return coupled_round_trip_phase(t, theta1, omega_sp, l2, end); };

  double lo = kBracketEdge;
  double hi = 1.0 - kBracketEdge;
  double f_lo = phase(lo);
  const double f_hi = phase(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw NoRootInBracket(fmt::format(
        "no SRM transmission in (0, 1) yields a {:.6g} Hz splitting (phase {:.3g} .. {:.3g})",
        omega_sp / kTwoPi, f_lo, f_hi));
  }

  for (int iter = 0; iter < 400 && hi - lo > 1e-13 * lo; ++iter) {
    const double mid = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const double f_mid = phase(mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }

  double t = 0.5 * (lo + hi);
  for (int step = 0; step < 3; ++step) {
    const double f_t = phase(t);
    if (f_t == 0.0) break;
    const double h = 1e-7 * t;
    const double slope = (phase(t + h) - phase(t - h)) / (2.0 * h);
    if (!(std::isfinite(slope) && slope != 0.0)) break;
    const double candidate = t - f_t / slope;
    if (!(candidate > 0.0 && candidate < 1.0) || std::abs(phase(candidate)) >= std::abs(f_t)) break;
    t = candidate;
  }
  return t;
}

double coupling_transmission_equal_lengths(double omega_sp, double length, const MirrorSpec& end) {
  const double c = std::cos(2.0 * omega_sp * length / kSpeedOfLight);
  const double r2 = end.reflectivity();
  const double t = 1.0 - (4.0 * c * c * r2) / ((1.0 + r2) * (1.0 + r2));
  return std::max(t, 0.0);
}

double coupling_transmission_ideal(double omega_sp, double length) {
  const double c = std::cos(2.0 * omega_sp * length / kSpeedOfLight);
  return std::max(1.0 - c * c, 0.0);
}

namespace {

struct Refined {
  double x;
  double y;
};

// Vertex of the parabola through three points of (x, g(y)).
Refined parabolic_vertex(double x0, double x1, double x2, double y0, double y1, double y2) {
  const double d0 = (x0 - x1) * (x0 - x2);
  const double d1 = (x1 - x0) * (x1 - x2);
  const double d2 = (x2 - x0) * (x2 - x1);
  const double a = y0 / d0 + y1 / d1 + y2 / d2;
  const double b = -(y0 * (x1 + x2) / d0 + y1 * (x0 + x2) / d1 + y2 * (x0 + x1) / d2);
  if (!(a < 0.0)) return {x1, y1};
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  const double yv = y0 * (xv - x1) * (xv - x2) / d0 + y1 * (xv - x0) * (xv - x2) / d1 +
                    y2 * (xv - x0) * (xv - x1) / d2;
  return {xv, yv};
}

// Half-maximum crossing walking from `peak` in direction `step`; empty if the
// curve turns upward (neighbouring peak) or the grid ends first.
std::optional<double> half_max_crossing(std::span<const double> x, std::span<const double> y,
                                        std::size_t peak, int step, double half) {
  std::size_t i = peak;
  while (true) {
    if ((step < 0 && i == 0) || (step > 0 && i + 1 == y.size())) return std::nullopt;
    const std::size_t j = step < 0 ? i - 1 : i + 1;
    if (y[j] <= half) {
      const double frac = (y[i] - half) / (y[i] - y[j]);
      return x[i] + frac * (x[j] - x[i]);
    }
    if (y[j] > y[i]) return std::nullopt;
    i = j;
  }
}

}  // namespace

DoubletResult find_doublet_peaks(std::span<const double> frequencies_hz,
                                 std::span<const double> response) {
  if (frequencies_hz.size() != response.size()) {
    throw InvalidArgument("frequency grid and response differ in length");
  }
  const std::size_t n = response.size();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (response[i] > response[i - 1] && response[i] >= response[i + 1]) maxima.push_back(i);
  }
  if (maxima.size() < 2) {
    throw PeaksNotFound(fmt::format("expected a resonance doublet, found {} interior maxima",
                                    maxima.size()));
  }
  std::partial_sort(maxima.begin(), maxima.begin() + 2, maxima.end(),
                    [&](std::size_t l, std::size_t r) { return response[l] > response[r]; });
  std::array<std::size_t, 2> peaks{std::min(maxima[0], maxima[1]), std::max(maxima[0], maxima[1])};

  DoubletResult result{};
  std::array<double, 2> positions{};
  for (std::size_t side = 0; side < 2; ++side) {
    const std::size_t i = peaks[side];
    const double x0 = frequencies_hz[i - 1], x1 = frequencies_hz[i], x2 = frequencies_hz[i + 1];
    const double y0 = response[i - 1], y1 = response[i], y2 = response[i + 1];
    Refined vertex{};
    if (y0 > 0.0 && y1 > 0.0 && y2 > 0.0) {
      vertex = parabolic_vertex(x0, x1, x2, std::log(y0), std::log(y1), std::log(y2));
      vertex.y = std::exp(vertex.y);
    } else {
      vertex = parabolic_vertex(x0, x1, x2, y0, y1, y2);
    }
    positions[side] = vertex.x;
    result.peak_magnitudes[side] = vertex.y;

    const double half = 0.5 * vertex.y;
    const auto left = half_max_crossing(frequencies_hz, response, i, -1, half);
    const auto right = half_max_crossing(frequencies_hz, response, i, +1, half);
    if (left && right) {
      result.bandwidths[side] = *right - *left;
    } else if (left) {
      result.bandwidths[side] = 2.0 * (vertex.x - *left);
    } else if (right) {
      result.bandwidths[side] = 2.0 * (*right - vertex.x);
    } else {
      throw PeaksNotFound(fmt::format("peak near {} Hz has no half-maximum crossing on the grid", x1));
    }
  }
  result.f_minus = positions[0];
  result.f_plus = positions[1];
  return result;
}

}  // namespace tsr
