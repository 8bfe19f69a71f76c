#include "twopath/interferometer.hpp"

#include <algorithm>
#include <cmath>

#include "twopath/errors.hpp"

namespace twopath {
namespace {

struct ArmPair {
  ArmSummary upper;
  ArmSummary lower;
  double theta = 0.0;
};

ArmPair summarize(const TwoPathLayout& layout, const UnstableParticle& particle) {
  validate(particle);
  validate(layout);
  ArmPair arms{summarize_arm(particle, layout.upper), summarize_arm(particle, layout.lower)};
  if (std::isinf(arms.upper.attenuation) && std::isinf(arms.lower.attenuation)) {
    throw UndefinedQuantityError("both arms are fully attenuated");
  }
  arms.theta = arms.lower.attenuation - arms.upper.attenuation;
  return arms;
}

// Relative phase of the lower route over the upper route at detector one.
double relative_phase(const TwoPathLayout& layout, const UnstableParticle& particle,
                      const ArmPair& arms, double phase) {
  const JunctionFactors j = junction_factors(layout.splitter, Detector::one);
  return std::arg(j.lower) - std::arg(j.upper) + phase +
         (arms.lower.offset_phase - arms.upper.offset_phase) +
         particle.k * (arms.lower.length - arms.upper.length);
}

}  // namespace

ArmSummary summarize_arm(const UnstableParticle& particle, std::span<const PathSegment> segments) {
  ArmSummary arm;
  for (const auto& s : segments) {
    arm.length += s.length;
    if (s.length != 0.0 && s.gamma_ratio != 0.0) {
      arm.attenuation += s.gamma_ratio * s.length * particle.kappa();
    }
    arm.offset_phase += s.phase_offset;
    if (!s.potential.empty()) {
      const ComplexAmplitude phi = potential_phase(particle, s.potential, s.length);
      arm.offset_phase += phi.real();
      arm.attenuation += phi.imag();
    }
  }
  return arm;
}

double theta_cav(const TwoPathLayout& layout, const UnstableParticle& particle) {
  return summarize(layout, particle).theta;
}

bool is_saturated(double theta) { return 2.0 * std::abs(theta) > kSaturationCap; }

DetectionProbabilities detection_probabilities(const TwoPathLayout& layout,
                                               const UnstableParticle& particle, double phase) {
  if (!std::isfinite(phase)) throw DomainError("detection_probabilities: phase not finite");
  const ArmPair arms = summarize(layout, particle);
  DetectionProbabilities out;
  out.phase = phase;
  out.saturated = is_saturated(arms.theta);
  if (out.saturated) {
    // sech(theta) underflows; the fringe term vanishes.
    const double each =
        0.25 * (std::exp(-2.0 * arms.lower.attenuation) + std::exp(-2.0 * arms.upper.attenuation));
    out.p1 = each;
    out.p2 = each;
  } else {
    const double prefactor =
        0.25 * std::exp(-2.0 * arms.lower.attenuation) * (1.0 + std::exp(2.0 * arms.theta));
    const double fringe = std::cos(relative_phase(layout, particle, arms, phase)) / std::cosh(arms.theta);
    // Unitarity of the splitter puts detector two half a fringe away.
    out.p1 = prefactor * (1.0 + fringe);
    out.p2 = prefactor * (1.0 - fringe);
  }
  out.survival = out.p1 + out.p2;
  return out;
}

DetectionProbabilities detection_probabilities_from_amplitudes(const TwoPathLayout& layout,
                                                               const UnstableParticle& particle,
                                                               double phase) {
  if (!std::isfinite(phase)) throw DomainError("detection_probabilities: phase not finite");
  const ArmPair arms = summarize(layout, particle);
  const ComplexAmplitude shifter = std::polar(1.0, phase);

  auto probability = [&](Detector d) {
    const JunctionFactors j = junction_factors(layout.splitter, d);
    const ComplexAmplitude upper = path_amplitude(particle, layout.upper, j.upper);
    const ComplexAmplitude lower = path_amplitude(particle, layout.lower, j.lower) * shifter;
    return std::norm(upper + lower);
  };

  DetectionProbabilities out;
  out.phase = phase;
  out.saturated = is_saturated(arms.theta);
  out.p1 = probability(Detector::one);
  out.p2 = probability(Detector::two);
  out.survival = out.p1 + out.p2;
  return out;
}

void validate(const FringeScan& scan) {
  if (scan.phases.size() < 3) throw DomainError("fringe scan needs at least 3 phases");
  if (scan.intensities.size() != scan.phases.size()) {
    throw DomainError("fringe scan phases and intensities differ in length");
  }
  for (std::size_t i = 0; i < scan.phases.size(); ++i) {
    if (!std::isfinite(scan.phases[i])) throw DomainError("fringe scan phase not finite");
    if (i > 0 && !(scan.phases[i] > scan.phases[i - 1])) {
      throw DomainError("fringe scan phases must be strictly increasing");
    }
    if (!(scan.intensities[i] >= 0.0) || !std::isfinite(scan.intensities[i])) {
      throw DomainError("fringe scan intensity must be finite and non-negative");
    }
  }
}

FringeScan fringe_scan(const TwoPathLayout& layout, const UnstableParticle& particle,
                       std::span<const double> phases, Normalization normalization) {
  FringeScan scan;
  scan.normalization = normalization;
  scan.phases.assign(phases.begin(), phases.end());
  scan.intensities.reserve(phases.size());
  if (phases.size() < 3) throw DomainError("fringe scan needs at least 3 phases");
  for (double phi : phases) {
    scan.intensities.push_back(detection_probabilities(layout, particle, phi).p1);
  }
  if (normalization == Normalization::relative) {
    const double i0 = detection_probabilities(layout, particle, 0.0).p1;
    if (!(i0 > 0.0)) throw UndefinedQuantityError("relative scan: zero intensity at phase 0");
    for (double& v : scan.intensities) v /= i0;
  }
  validate(scan);
  return scan;
}

double visibility_operational(const FringeScan& scan) {
  validate(scan);
  // First occurrence wins on ties.
  const double i_max = *std::max_element(scan.intensities.begin(), scan.intensities.end());
  const double i_min = *std::min_element(scan.intensities.begin(), scan.intensities.end());
  if (!(i_max + i_min > 0.0)) throw UndefinedQuantityError("visibility of an all-dark scan");
  return (i_max - i_min) / (i_max + i_min);
}

double visibility_closed_form(const TwoPathLayout& layout, const UnstableParticle& particle) {
  const double theta = theta_cav(layout, particle);
  if (is_saturated(theta)) return 0.0;
  return 1.0 / std::cosh(theta);
}

double predictability(const TwoPathLayout& layout, const UnstableParticle& particle) {
  const ArmPair arms = summarize(layout, particle);
  if (is_saturated(arms.theta)) return 1.0;
  // Block one arm at a time and read detector one.
  const JunctionFactors j = junction_factors(layout.splitter, Detector::one);
  const double via_lower = std::norm(path_amplitude(particle, layout.lower, j.lower));
  const double via_upper = std::norm(path_amplitude(particle, layout.upper, j.upper));
  if (!(via_lower + via_upper > 0.0)) {
    throw UndefinedQuantityError("predictability undefined: both path amplitudes vanish");
  }
  return std::abs((via_lower - via_upper) / (via_lower + via_upper));
}

double predictability_closed_form(const TwoPathLayout& layout, const UnstableParticle& particle) {
  const double theta = theta_cav(layout, particle);
  if (is_saturated(theta)) return 1.0;
  return std::tanh(std::abs(theta));
}

DualityReport duality_audit(const TwoPathLayout& layout, const UnstableParticle& particle) {
  DualityReport r;
  r.theta_cav = theta_cav(layout, particle);
  r.saturated = is_saturated(r.theta_cav);
  r.visibility = visibility_closed_form(layout, particle);
  r.predictability = predictability(layout, particle);
  r.duality_sum = r.visibility * r.visibility + r.predictability * r.predictability;
  return r;
}

std::vector<double> linspace(double start, double end, std::size_t n, bool endpoint) {
  std::vector<double> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = start;
    return out;
  }
  const double divisions = static_cast<double>(endpoint ? n - 1 : n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = start + (end - start) * (static_cast<double>(i) / divisions);
  }
  if (endpoint) out.back() = end;
  return out;
}

}  // namespace twopath
