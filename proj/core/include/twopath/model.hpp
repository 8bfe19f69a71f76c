#pragma once

// Particle, geometry and propagation-amplitude model for unstable particles
// in a two-arm interferometer.
//
// Units are dimensionless with hbar = m = 1: lengths share one arbitrary unit,
// the wavenumber k is in inverse length and the decay length ell in length.
// A plane wave travelling a distance s picks up exp(i k s - s / (2 ell)).

#include <array>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace twopath {

using ComplexAmplitude = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ell * k below this raises the hierarchy warning (ell >> lambda regime).
inline constexpr double kHierarchyMin = 100.0;

// Relative tolerance on arm lengths for the equal-path symmetry flag.
inline constexpr double kGeometryTolerance = 1e-9;

// Cap on 2|theta|; beyond it exp(2 theta) would overflow and results are
// reported in their saturated limits.
inline constexpr double kSaturationCap = 700.0;

struct UnstableParticle {
  double k = 1.0;           // carrier wavenumber p / hbar
  double ell = kInfinity;   // mean decay length p / (m Gamma); infinity = stable
  std::string label;

  [[nodiscard]] bool is_stable() const { return ell == kInfinity; }
  [[nodiscard]] double wavelength() const { return 1.0 / k; }
  // Imaginary part of the complex wavenumber, 1 / (2 ell).
  [[nodiscard]] double kappa() const { return is_stable() ? 0.0 : 0.5 / ell; }

  bool operator==(const UnstableParticle&) const = default;
};

// Throws DomainError unless k is finite and positive and ell is positive
// (finite or infinity).
void validate(const UnstableParticle& particle);

// True when ell * k < kHierarchyMin. Computation is never refused on this.
[[nodiscard]] bool hierarchy_warning(const UnstableParticle& particle);

enum class SegmentKind { free, cavity, phase_shifter };

struct PathSegment {
  SegmentKind kind = SegmentKind::free;
  double length = 0.0;
  // Local decay rate over the free-space rate. Exactly 1 outside cavities.
  double gamma_ratio = 1.0;
  double phase_offset = 0.0;
  // Potential sampled uniformly over [0, length], in units of hbar^2/(m L^2).
  // Empty means no potential.
  std::vector<double> potential;

  static PathSegment free(double length, std::vector<double> potential = {});
  static PathSegment cavity(double length, double gamma_ratio);
  static PathSegment phase_shifter(double phi);

  bool operator==(const PathSegment&) const = default;
};

void validate(const PathSegment& segment);

enum class SplitterKind { symmetric, hadamard, general };

// Balanced lossless beamsplitter plus mirror reflection amplitude.
//
// The splitter matrix is U[out][in] = e^{i delta}/sqrt(2) *
//   [[ e^{i alpha},   e^{i beta}   ],
//    [ -e^{-i beta},  e^{-i alpha} ]],
// the general balanced element of U(2). The symmetric convention (T = 1/sqrt2,
// R = i/sqrt2, mirror -1) is delta = alpha = 0, beta = pi/2, mirror_phase = pi.
struct SplitterConvention {
  SplitterKind kind = SplitterKind::symmetric;
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 1.5707963267948966;
  double mirror_phase = 3.141592653589793;

  static SplitterConvention symmetric();
  static SplitterConvention hadamard();
  static SplitterConvention general(double delta, double alpha, double beta,
                                    double mirror_phase);

  using Matrix = std::array<std::array<ComplexAmplitude, 2>, 2>;
  [[nodiscard]] Matrix matrix() const;
  [[nodiscard]] ComplexAmplitude mirror() const;

  bool operator==(const SplitterConvention&) const = default;
};

enum class Detector { one, two };

// Ordered product of splitter and mirror amplitudes along each arm to a
// detector. The first splitter sends transmitted amplitude into the upper arm
// (ABD) and reflected amplitude into the lower arm (ACD). Detector one sits on
// output port 1 of the second splitter, detector two on port 0.
struct JunctionFactors {
  ComplexAmplitude upper;
  ComplexAmplitude lower;
};

[[nodiscard]] JunctionFactors junction_factors(const SplitterConvention& convention,
                                               Detector detector);

struct TwoPathLayout {
  std::vector<PathSegment> upper;  // arm ABD, hosts the cavity
  std::vector<PathSegment> lower;  // arm ACD, hosts the phase shifter
  SplitterConvention splitter;

  [[nodiscard]] double upper_length() const;
  [[nodiscard]] double lower_length() const;
  // Equal arm lengths within kGeometryTolerance (relative).
  [[nodiscard]] bool is_symmetric() const;

  bool operator==(const TwoPathLayout&) const = default;
};

void validate(const TwoPathLayout& layout);

[[nodiscard]] double total_length(std::span<const PathSegment> segments);

// exp(i k s - gamma_ratio s / (2 ell)).
[[nodiscard]] ComplexAmplitude free_amplitude(const UnstableParticle& particle, double s,
                                              double gamma_ratio);

// Complex phase picked up in a potential sampled uniformly over
// [0, path_length]:
//   -(1/k) [1 - i/(2 k ell)] * integral V ds
// with composite Simpson quadrature (3/8 rule closing an odd interval count,
// trapezoid for two samples).
[[nodiscard]] ComplexAmplitude potential_phase(const UnstableParticle& particle,
                                               std::span<const double> profile,
                                               double path_length);

[[nodiscard]] ComplexAmplitude segment_amplitude(const UnstableParticle& particle,
                                                 const PathSegment& segment);

// junction_factor times the product of segment amplitudes.
[[nodiscard]] ComplexAmplitude path_amplitude(const UnstableParticle& particle,
                                              std::span<const PathSegment> segments,
                                              ComplexAmplitude junction_factor);

// Quadrature of uniformly spaced samples over [0, length].
[[nodiscard]] double integrate_samples(std::span<const double> samples, double length);

}  // namespace twopath
