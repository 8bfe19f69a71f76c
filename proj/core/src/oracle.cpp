#include "twopath/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fft.hpp"
#include "twopath/errors.hpp"
#include "twopath/format.hpp"

namespace twopath {
namespace {

using cplx = std::complex<double>;

double wrap_phase(double phi) { return std::remainder(phi, 2.0 * std::numbers::pi); }

double decay_rate(const UnstableParticle& particle) {
  return particle.is_stable() ? 0.0 : particle.k / particle.ell;
}

std::vector<cplx> spectrum(const WavepacketState& state) {
  std::vector<cplx> f = state.values;
  detail::Fft fft(f.size());
  fft.forward(f);
  return f;
}

struct RunResult {
  double norm_decay = 0.0;
  double residual_phase = 0.0;
  std::size_t steps = 0;
  std::size_t points = 0;
  double dt = 0.0;
};

struct Course {
  double packet_width = 0.0;
  double start = 0.0;        // initial packet centre
  double region_start = 0.0; // first leg begins here
  double duration = 0.0;
  double left_edge = 0.0;
  double span = 0.0;         // minimal domain length
};

RunResult run_once(const UnstableParticle& particle, std::span<const Leg> legs, const Course& course,
                   double dx, double dt) {
  std::size_t n = 2;
  while (static_cast<double>(n) * dx < course.span) n *= 2;
  const Grid grid{n, dx, course.left_edge};

  WavepacketState state = gaussian_packet(grid, course.start, course.packet_width, particle.k);
  state.particle = particle;
  // Each grid point carries the average of the profile over its cell, so the
  // integral of the decay rate is exact for any leg boundaries.
  state.gamma_ratio.assign(n, 0.0);
  double a = course.region_start;
  for (const Leg& leg : legs) {
    const double b = a + leg.length;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.position(i);
      const double overlap = std::min(b, x + dx / 2.0) - std::max(a, x - dx / 2.0);
      if (overlap > 0.0) state.gamma_ratio[i] += leg.gamma_ratio * overlap / dx;
    }
    a = b;
  }

  const auto steps = static_cast<std::size_t>(std::ceil(course.duration / dt - 1e-9));
  const double step = course.duration / static_cast<double>(steps);

  const double n0 = norm(state);
  const cplx c0 = spectral_component(state, particle.k);
  const WavepacketState out = propagate(std::move(state), course.duration, step);
  const cplx c1 = spectral_component(out, particle.k);

  RunResult r;
  // Only the transmitted packet counts; the weak waves reflected at steps in
  // the decay rate are left of the region end when the run stops.
  double transmitted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.position(i) >= a) transmitted += std::norm(out.values[i]);
  }
  r.norm_decay = transmitted * dx / n0;
  r.residual_phase = wrap_phase(std::arg(c1 / c0) + 0.5 * particle.k * particle.k * course.duration);
  r.steps = steps;
  r.points = n;
  r.dt = step;
  return r;
}

}  // namespace

double Grid::wavenumber(std::size_t i) const {
  const auto signed_index = i < size / 2 ? static_cast<double>(i)
                                         : static_cast<double>(i) - static_cast<double>(size);
  return 2.0 * std::numbers::pi * signed_index / length();
}

double Grid::nyquist() const { return std::numbers::pi / dx; }

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

WavepacketState gaussian_packet(const Grid& grid, double center, double width, double k0) {
  if (!is_power_of_two(grid.size)) throw ConfigurationError("grid size must be a power of two");
  if (!(grid.dx > 0.0)) throw ConfigurationError("grid spacing must be positive");
  if (!(width >= 4.0 * grid.dx)) throw ConfigurationError("packet width must be at least 4 dx");
  if (!std::isfinite(k0) || !(k0 > 0.0)) throw ConfigurationError("packet wavenumber must be positive");

  WavepacketState state;
  state.grid = grid;
  state.particle = UnstableParticle{k0, kInfinity, {}};
  state.values.resize(grid.size);
  const double amplitude = std::pow(std::numbers::pi * width * width, -0.25);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double u = grid.position(i) - center;
    state.values[i] = std::polar(amplitude * std::exp(-0.5 * u * u / (width * width)), k0 * u);
  }
  const double edge = std::max(std::abs(state.values.front()), std::abs(state.values.back()));
  if (edge > 1e-12) {
    throw ConfigurationError("packet support reaches the grid boundary");
  }
  const double scale = 1.0 / std::sqrt(norm(state));
  for (auto& v : state.values) v *= scale;
  return state;
}

WavepacketState propagate(WavepacketState state, double duration, double dt) {
  const Grid& grid = state.grid;
  if (!is_power_of_two(grid.size)) throw ConfigurationError("grid size must be a power of two");
  if (state.values.size() != grid.size) throw ConfigurationError("field does not match grid");
  if (!state.gamma_ratio.empty() && state.gamma_ratio.size() != grid.size) {
    throw ConfigurationError("decay profile does not match grid");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigurationError("duration must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("time step must be positive");
  const double k_max = grid.nyquist();
  if (!(k_max * k_max * dt / 2.0 < kStepBound)) {
    std::ostringstream msg;
    msg << "time step too large: k_max^2 dt / 2 = " << k_max * k_max * dt / 2.0
        << " exceeds the bound " << kStepBound;
    throw ConfigurationError(msg.str());
  }
  const double exact_steps = duration / dt;
  const auto steps = static_cast<std::size_t>(std::llround(exact_steps));
  if (std::abs(exact_steps - static_cast<double>(steps)) > 1e-9 * std::max(1.0, exact_steps)) {
    throw ConfigurationError("duration is not an integral number of time steps");
  }
  if (steps == 0) return state;

  const std::size_t n = grid.size;
  std::vector<cplx> half_kick(n);
  std::vector<cplx> full_kick(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double energy = 0.5 * grid.wavenumber(i) * grid.wavenumber(i);
    half_kick[i] = std::polar(1.0, -energy * dt / 2.0);
    full_kick[i] = std::polar(1.0, -energy * dt);
  }
  // The 1/N of the inverse transform is folded into the local factor.
  const double rate = decay_rate(state.particle);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = state.gamma_ratio.empty() ? 1.0 : state.gamma_ratio[i];
    local[i] = inv_n * std::exp(-0.5 * rate * g * dt);
  }

  detail::Fft fft(n);
  auto& psi = state.values;
  fft.forward(psi);
  for (std::size_t i = 0; i < n; ++i) psi[i] *= half_kick[i];
  for (std::size_t s = 0; s < steps; ++s) {
    fft.inverse(psi);
    for (std::size_t i = 0; i < n; ++i) psi[i] *= local[i];
    fft.forward(psi);
    const auto& kick = s + 1 == steps ? half_kick : full_kick;
    for (std::size_t i = 0; i < n; ++i) psi[i] *= kick[i];
  }
  fft.inverse(psi);
  for (auto& v : psi) v *= inv_n;
  state.time += static_cast<double>(steps) * dt;

  const double edge = std::max(std::abs(psi.front()), std::abs(psi.back()));
  if (edge > kBoundaryAmplitudeLimit) {
    throw ConfigurationError("wavepacket reached the periodic boundary (amplitude " +
                             format_double(edge) + ")");
  }
  return state;
}

double norm(const WavepacketState& state) {
  double sum = 0.0;
  for (const auto& v : state.values) sum += std::norm(v);
  return sum * state.grid.dx;
}

double centroid(const WavepacketState& state) {
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < state.values.size(); ++i) {
    const double w = std::norm(state.values[i]);
    weighted += w * state.grid.position(i);
    total += w;
  }
  return weighted / total;
}

double mean_wavenumber(const WavepacketState& state) {
  const auto f = spectrum(state);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::norm(f[i]);
    weighted += w * state.grid.wavenumber(i);
    total += w;
  }
  return weighted / total;
}

double kinetic_energy(const WavepacketState& state) {
  const auto f = spectrum(state);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::norm(f[i]);
    const double k = state.grid.wavenumber(i);
    weighted += w * 0.5 * k * k;
    total += w;
  }
  return weighted / total;
}

cplx spectral_component(const WavepacketState& state, double k) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < state.values.size(); ++i) {
    sum += state.values[i] * std::polar(1.0, -k * state.grid.position(i));
  }
  return sum * state.grid.dx;
}

void write_snapshot_csv(std::ostream& out, const WavepacketState& state, std::size_t stride) {
  stride = std::max<std::size_t>(stride, 1);
  out << "x,re,im\n";
  for (std::size_t i = 0; i < state.values.size(); i += stride) {
    out << format_double(state.grid.position(i)) << ',' << format_double(state.values[i].real())
        << ',' << format_double(state.values[i].imag()) << '\n';
  }
}

std::vector<Leg> legs_from_segments(std::span<const PathSegment> segments) {
  std::vector<Leg> legs;
  for (const auto& s : segments) {
    if (!s.potential.empty()) {
      throw ConfigurationError("the wavepacket oracle does not model segment potentials");
    }
    if (s.length > 0.0) legs.push_back({s.length, s.gamma_ratio});
  }
  return legs;
}

OracleReport verify_path(const UnstableParticle& particle, std::span<const Leg> legs,
                         const OracleSettings& settings) {
  validate(particle);
  if (hierarchy_warning(particle)) {
    std::ostringstream msg;
    msg << "ell * k = " << format_double(particle.ell * particle.k) << " is below "
        << format_double(kHierarchyMin)
        << "; the plane-wave amplitude assumes a decay length much longer than the wavelength";
    throw RegimeError(msg.str());
  }
  const double k = particle.k;
  const double width = settings.packet_width.value_or(100.0 / k);
  if (!(width * k >= kMinPacketCycles)) {
    std::ostringstream msg;
    msg << "packet width * k = " << format_double(width * k) << " is below "
        << format_double(kMinPacketCycles) << "; the packet has no well-defined wavelength";
    throw RegimeError(msg.str());
  }

  double total = 0.0;
  double predicted_decay = 1.0;
  for (const Leg& leg : legs) {
    if (!(leg.length >= 0.0) || !std::isfinite(leg.length) || !(leg.gamma_ratio >= 0.0) ||
        !std::isfinite(leg.gamma_ratio)) {
      throw DomainError("oracle leg must have finite non-negative length and gamma_ratio");
    }
    // Inside a leg the decay length is ell / gamma_ratio.
    if (leg.length > 0.0 && leg.gamma_ratio * kHierarchyMin > particle.ell * particle.k) {
      std::ostringstream msg;
      msg << "leg with gamma_ratio " << format_double(leg.gamma_ratio) << " has ell * k / gamma_ratio = "
          << format_double(particle.ell * particle.k / leg.gamma_ratio) << ", below "
          << format_double(kHierarchyMin);
      throw RegimeError(msg.str());
    }
    total += leg.length;
    predicted_decay *= std::norm(free_amplitude(particle, leg.length, leg.gamma_ratio));
  }

  // |psi_hat|^2 ~ exp(-(k - k0)^2 w^2): spectral standard deviation 1/(w sqrt2).
  const double spectral_width = 1.0 / (width * std::numbers::sqrt2);
  // Nyquist at 1.5 k0 plus 16 spectral widths: k0 + 16 widths alone resolves
  // the packet but not the scattering at the leg boundaries.
  const double dx = settings.dx.value_or(std::numbers::pi / (1.5 * k + 16.0 * spectral_width));
  if (!(dx > 0.0) || std::numbers::pi / dx < k + 8.0 * spectral_width) {
    throw ConfigurationError("grid spacing does not resolve the packet spectrum");
  }
  const double k_max = std::numbers::pi / dx;
  const double dt = settings.dt.value_or(0.9 * 2.0 * kStepBound / (k_max * k_max));

  // Region guards keep the packet clear of the legs at start and end; boundary
  // guards are measured in the spread width at the end of the run. Each step
  // in the decay rate reflects a weak wave travelling backwards at the group
  // velocity, so the left side also has room for the full run length.
  constexpr double region_guard = 6.0;
  Course course;
  course.packet_width = width;
  course.duration = (total + 2.0 * region_guard * width) / k;
  const double spread = width * std::sqrt(1.0 + std::pow(course.duration / (width * width), 2));
  course.left_edge = 0.0;
  course.start = kGuardWidths * spread + total + region_guard * width;
  course.region_start = course.start + region_guard * width;
  course.span = course.region_start + total + region_guard * width + kGuardWidths * spread;

  const RunResult coarse = run_once(particle, legs, course, dx, dt);
  const RunResult fine = run_once(particle, legs, course, dx / 2.0, dt / 4.0);
  // Second order in dt; the spectral error in dx is negligible at these widths.
  auto extrapolate = [](double c, double f) { return (16.0 * f - c) / 15.0; };

  OracleReport report;
  report.packet_width = width;
  report.grid_spacing = dx;
  report.time_step = coarse.dt;
  report.grid_points = coarse.points;
  report.steps = coarse.steps;
  report.predicted_norm_decay = predicted_decay;
  report.measured_norm_decay = extrapolate(coarse.norm_decay, fine.norm_decay);
  report.relative_error =
      std::abs(report.measured_norm_decay - predicted_decay) / predicted_decay;
  report.phase_advance_predicted = k * total;
  const double residual = extrapolate(coarse.residual_phase, fine.residual_phase);
  report.phase_advance_measured = k * total + residual;
  report.phase_relative_error =
      total > 0.0 ? std::abs(residual) / report.phase_advance_predicted : std::abs(residual);
  report.passed = report.relative_error <= settings.tolerance &&
                  report.phase_relative_error <= settings.tolerance;
  return report;
}

OracleReport verify_free_amplitude(const UnstableParticle& particle, double s, double gamma_ratio,
                                   const OracleSettings& settings) {
  const Leg leg{s, gamma_ratio};
  return verify_path(particle, std::span<const Leg>(&leg, 1), settings);
}

}  // namespace twopath
