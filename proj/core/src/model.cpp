#include "twopath/model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "twopath/errors.hpp"

namespace twopath {
namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace

void validate(const UnstableParticle& particle) {
  require(std::isfinite(particle.k) && particle.k > 0.0,
          "particle wavenumber k must be finite and positive");
  require(!std::isnan(particle.ell) && particle.ell > 0.0,
          "particle decay length ell must be positive (or infinity)");
}

bool hierarchy_warning(const UnstableParticle& particle) {
  return particle.ell * particle.k < kHierarchyMin;
}

PathSegment PathSegment::free(double length, std::vector<double> potential) {
  PathSegment s;
  s.kind = SegmentKind::free;
  s.length = length;
  s.potential = std::move(potential);
  return s;
}

PathSegment PathSegment::cavity(double length, double gamma_ratio) {
  PathSegment s;
  s.kind = SegmentKind::cavity;
  s.length = length;
  s.gamma_ratio = gamma_ratio;
  return s;
}

PathSegment PathSegment::phase_shifter(double phi) {
  PathSegment s;
  s.kind = SegmentKind::phase_shifter;
  s.phase_offset = phi;
  return s;
}

void validate(const PathSegment& segment) {
  require(std::isfinite(segment.length), "segment length must be finite");
  require(segment.length >= 0.0, "segment length must be non-negative");
  require(std::isfinite(segment.gamma_ratio) && segment.gamma_ratio >= 0.0,
          "gamma_ratio must be non-negative");
  require(std::isfinite(segment.phase_offset), "phase offset must be finite");
  if (segment.kind != SegmentKind::cavity) {
    require(segment.gamma_ratio == 1.0, "gamma_ratio must be 1 outside cavities");
  }
  if (segment.kind == SegmentKind::phase_shifter) {
    require(segment.length == 0.0 && segment.potential.empty(),
            "phase shifter has no length or potential");
  }
  if (!segment.potential.empty()) {
    require(segment.potential.size() >= 2, "potential profile needs at least 2 samples");
    for (double v : segment.potential) require(std::isfinite(v), "potential sample not finite");
  }
}

SplitterConvention SplitterConvention::symmetric() { return {}; }

SplitterConvention SplitterConvention::hadamard() {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return {SplitterKind::hadamard, half_pi, -half_pi, -half_pi, std::numbers::pi};
}

SplitterConvention SplitterConvention::general(double delta, double alpha, double beta,
                                               double mirror_phase) {
  return {SplitterKind::general, delta, alpha, beta, mirror_phase};
}

SplitterConvention::Matrix SplitterConvention::matrix() const {
  // Exact entries for the named conventions so the stable-particle limit is
  // free of trigonometric rounding.
  const double h = std::numbers::sqrt2 / 2.0;
  if (kind == SplitterKind::symmetric) {
    const ComplexAmplitude ih{0.0, h};
    return {{{h, ih}, {ih, h}}};
  }
  if (kind == SplitterKind::hadamard) {
    return {{{h, h}, {h, -h}}};
  }
  const ComplexAmplitude global = std::polar(h, delta);
  return {{{global * std::polar(1.0, alpha), global * std::polar(1.0, beta)},
           {-global * std::polar(1.0, -beta), global * std::polar(1.0, -alpha)}}};
}

ComplexAmplitude SplitterConvention::mirror() const {
  if (kind != SplitterKind::general) return -1.0;
  return std::polar(1.0, mirror_phase);
}

JunctionFactors junction_factors(const SplitterConvention& convention, Detector detector) {
  const auto u = convention.matrix();
  const ComplexAmplitude m = convention.mirror();
  // First splitter: input port 0; upper arm leaves on port 0, lower on port 1.
  // Second splitter: upper arm enters port 0, lower arm enters port 1.
  const int out = detector == Detector::one ? 1 : 0;
  return {u[0][0] * m * u[out][0], u[1][0] * m * u[out][1]};
}

double total_length(std::span<const PathSegment> segments) {
  return std::accumulate(segments.begin(), segments.end(), 0.0,
                         [](double acc, const PathSegment& s) { return acc + s.length; });
}

double TwoPathLayout::upper_length() const { return total_length(upper); }
double TwoPathLayout::lower_length() const { return total_length(lower); }

bool TwoPathLayout::is_symmetric() const {
  const double a = upper_length();
  const double b = lower_length();
  return std::abs(a - b) <= kGeometryTolerance * std::max(std::abs(a), std::abs(b));
}

void validate(const TwoPathLayout& layout) {
  require(!layout.upper.empty(), "upper path has no segments");
  require(!layout.lower.empty(), "lower path has no segments");
  for (const auto& s : layout.upper) validate(s);
  for (const auto& s : layout.lower) validate(s);
}

ComplexAmplitude free_amplitude(const UnstableParticle& particle, double s, double gamma_ratio) {
  require(std::isfinite(s) && std::isfinite(particle.k) && !std::isnan(particle.ell) &&
              std::isfinite(gamma_ratio),
          "free_amplitude: non-finite input");
  require(s >= 0.0, "free_amplitude: negative path length");
  require(gamma_ratio >= 0.0, "free_amplitude: negative gamma_ratio");
  const double attenuation =
      (s == 0.0 || gamma_ratio == 0.0) ? 0.0 : gamma_ratio * s * particle.kappa();
  return std::polar(std::exp(-attenuation), particle.k * s);
}

double integrate_samples(std::span<const double> samples, double length) {
  const std::size_t n = samples.size();
  require(n >= 2, "quadrature needs at least 2 samples");
  const double h = length / static_cast<double>(n - 1);
  if (n == 2) return 0.5 * h * (samples[0] + samples[1]);

  auto simpson = [&](std::size_t first, std::size_t last) {
    // Composite Simpson over samples[first..last], (last - first) even.
    double sum = samples[first] + samples[last];
    for (std::size_t i = first + 1; i < last; ++i) sum += (i - first) % 2 == 1 ? 4.0 * samples[i] : 2.0 * samples[i];
    return sum * h / 3.0;
  };

  const std::size_t intervals = n - 1;
  if (intervals % 2 == 0) return simpson(0, n - 1);
  // Odd interval count: Simpson up to n-4, then the 3/8 rule on the last three.
  const std::size_t j = n - 4;
  const double tail = 3.0 * h / 8.0 *
                      (samples[j] + 3.0 * samples[j + 1] + 3.0 * samples[j + 2] + samples[j + 3]);
  return (j > 0 ? simpson(0, j) : 0.0) + tail;
}

ComplexAmplitude potential_phase(const UnstableParticle& particle,
                                 std::span<const double> profile, double path_length) {
  require(profile.size() >= 2, "potential_phase: fewer than 2 samples");
  require(std::isfinite(path_length) && path_length >= 0.0,
          "potential_phase: path length must be finite and non-negative");
  for (double v : profile) require(std::isfinite(v), "potential_phase: non-finite sample");
  const double integral = integrate_samples(profile, path_length);
  // lambda / (2 ell) with lambda = 1/k.
  const double suppression = particle.is_stable() ? 0.0 : 0.5 / (particle.k * particle.ell);
  return -(1.0 / particle.k) * ComplexAmplitude(1.0, -suppression) * integral;
}

ComplexAmplitude segment_amplitude(const UnstableParticle& particle, const PathSegment& segment) {
  ComplexAmplitude a = free_amplitude(particle, segment.length, segment.gamma_ratio);
  if (segment.phase_offset != 0.0) a *= std::polar(1.0, segment.phase_offset);
  if (!segment.potential.empty()) {
    const ComplexAmplitude phi = potential_phase(particle, segment.potential, segment.length);
    a *= std::exp(ComplexAmplitude(0.0, 1.0) * phi);
  }
  return a;
}

ComplexAmplitude path_amplitude(const UnstableParticle& particle,
                                std::span<const PathSegment> segments,
                                ComplexAmplitude junction_factor) {
  require(!segments.empty(), "path_amplitude: empty segment list");
  ComplexAmplitude a = junction_factor;
  for (const auto& s : segments) a *= segment_amplitude(particle, s);
  return a;
}

}  // namespace twopath
