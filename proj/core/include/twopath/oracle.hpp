#pragma once

// Time-dependent check of the plane-wave propagation amplitude.
//
// A 1D Gaussian wavepacket is evolved under
//   i dPsi/dt = (-1/2 d^2/dx^2 - i Gamma(x)/2) Psi      (hbar = m = 1)
// with Gamma(x) = gamma_ratio(x) * k / ell, using second-order Strang
// splitting: half kinetic step in Fourier space, full local decay step, half
// kinetic step. The rest-energy term only contributes a global phase and is
// left out. Boundaries are periodic.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "twopath/model.hpp"

namespace twopath {

// Maximum kinetic phase k_max^2 dt / 2 at the grid Nyquist mode per step.
inline constexpr double kStepBound = 0.1;
inline constexpr double kOracleTolerance = 1e-4;
// Minimum packet width * k0 for which the plane-wave formula is compared.
inline constexpr double kMinPacketCycles = 50.0;
inline constexpr double kBoundaryAmplitudeLimit = 1e-8;
inline constexpr double kGuardWidths = 8.0;

struct Grid {
  std::size_t size = 0;
  double dx = 0.0;
  double origin = 0.0;

  [[nodiscard]] double position(std::size_t i) const { return origin + dx * static_cast<double>(i); }
  [[nodiscard]] double length() const { return dx * static_cast<double>(size); }
  // Angular wavenumber of FFT bin i (standard ordering, negative half last).
  [[nodiscard]] double wavenumber(std::size_t i) const;
  [[nodiscard]] double nyquist() const;
};

[[nodiscard]] bool is_power_of_two(std::size_t n);

struct WavepacketState {
  Grid grid;
  std::vector<std::complex<double>> values;
  double time = 0.0;
  UnstableParticle particle;
  // Local decay rate over the free-space rate at each grid point; empty means
  // 1 everywhere.
  std::vector<double> gamma_ratio;
};

// Normalized packet (pi w^2)^{-1/4} exp(-(x-c)^2/(2 w^2) + i k0 (x-c)), carrying
// a stable particle of wavenumber k0 and no decay profile.
// Throws ConfigurationError if the grid is not a power of two, w < 4 dx, or
// the packet tails exceed 1e-12 at the grid edges.
[[nodiscard]] WavepacketState gaussian_packet(const Grid& grid, double center, double width,
                                              double k0);

[[nodiscard]] WavepacketState propagate(WavepacketState state, double duration, double dt);

[[nodiscard]] double norm(const WavepacketState& state);
[[nodiscard]] double centroid(const WavepacketState& state);
// Spectral first moment <k>.
[[nodiscard]] double mean_wavenumber(const WavepacketState& state);
// <k^2/2> over the normalized spectrum.
[[nodiscard]] double kinetic_energy(const WavepacketState& state);
// sum_j psi(x_j) exp(-i k x_j) dx, for any k (not only FFT bins).
[[nodiscard]] std::complex<double> spectral_component(const WavepacketState& state, double k);

// CSV "x,re,im" with every stride-th grid point.
void write_snapshot_csv(std::ostream& out, const WavepacketState& state, std::size_t stride = 1);

struct OracleSettings {
  std::optional<double> packet_width;  // default 100 / k
  std::optional<double> dx;            // default: Nyquist at 1.5 k0 + 16 spectral widths
  std::optional<double> dt;            // default 0.9 of the step bound
  double tolerance = kOracleTolerance;

  bool operator==(const OracleSettings&) const = default;
};

// A stretch of constant decay rate the packet crosses.
struct Leg {
  double length = 0.0;
  double gamma_ratio = 1.0;
};

struct OracleReport {
  double measured_norm_decay = 0.0;
  double predicted_norm_decay = 0.0;
  double phase_advance_measured = 0.0;
  double phase_advance_predicted = 0.0;
  double grid_spacing = 0.0;
  double time_step = 0.0;
  double relative_error = 0.0;        // on the norm decay
  double phase_relative_error = 0.0;  // on the carrier phase advance
  double packet_width = 0.0;
  std::size_t grid_points = 0;
  std::size_t steps = 0;
  bool passed = false;
};

// Legs for the non-trivial segments of a path. Phase shifters and zero-length
// segments are dropped; segments with a potential are rejected with a
// ConfigurationError.
[[nodiscard]] std::vector<Leg> legs_from_segments(std::span<const PathSegment> segments);

// Sends a packet across the legs laid end to end (zero decay elsewhere) at two
// resolutions, (dx, dt) and (dx/2, dt/4), and Richardson-extrapolates the
// measured norm decay and carrier phase. The norm is taken over the
// transmitted packet only, past the last leg. The prediction is the product of
// |free_amplitude|^2 over the legs and k times their total length.
//
// Phase advance: the k0 spectral component of the packet, corrected for the
// e^{-i k0^2 t/2} energy phase, is compared with the free evolution; the
// residual is added to k0 * total leg length.
//
// Throws RegimeError when ell * k < kHierarchyMin, when any leg has
// ell * k / gamma_ratio < kHierarchyMin, or when width * k < kMinPacketCycles.
[[nodiscard]] OracleReport verify_path(const UnstableParticle& particle,
                                       std::span<const Leg> legs,
                                       const OracleSettings& settings = {});

[[nodiscard]] OracleReport verify_free_amplitude(const UnstableParticle& particle, double s,
                                                 double gamma_ratio,
                                                 const OracleSettings& settings = {});

}  // namespace twopath
