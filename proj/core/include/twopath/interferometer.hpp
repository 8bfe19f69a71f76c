#pragma once

// Detection probabilities, fringe scans, visibility and path predictability
// for the two-arm layout.
//
// The phase argument taken by the probability functions is the setting of
// the scanned phase shifter in the lower arm; it adds to any static
// phase_shifter segments in the layout.

#include <span>
#include <vector>

#include "twopath/model.hpp"

namespace twopath {

inline constexpr double kDualityTolerance = 1e-12;

struct DetectionProbabilities {
  double p1 = 0.0;
  double p2 = 0.0;
  double survival = 0.0;  // p1 + p2
  double phase = 0.0;
  bool saturated = false;
};

enum class Normalization { per_particle, relative };

struct FringeScan {
  std::vector<double> phases;
  std::vector<double> intensities;
  Normalization normalization = Normalization::per_particle;
};

// Throws DomainError unless the scan has >= 3 strictly increasing phases and
// matching non-negative intensities.
void validate(const FringeScan& scan);

struct DualityReport {
  double visibility = 0.0;
  double predictability = 0.0;
  double duality_sum = 0.0;
  double theta_cav = 0.0;
  bool saturated = false;
};

// Closed-form bookkeeping for one arm: accumulated length, the attenuation
// exponent E (|amplitude| = exp(-E), excluding junction factors) and the
// phase on top of the k * length carrier (phase shifters plus the real part
// of any potential phase).
struct ArmSummary {
  double length = 0.0;
  double attenuation = 0.0;
  double offset_phase = 0.0;
};

[[nodiscard]] ArmSummary summarize_arm(const UnstableParticle& particle,
                                       std::span<const PathSegment> segments);

// ln(|psi_ABD| / |psi_ACD|). For equal arm lengths this is the sum over
// cavities of (L / 2 ell)(1 - gamma_ratio), counted positive in the upper
// arm and negative in the lower one.
[[nodiscard]] double theta_cav(const TwoPathLayout& layout, const UnstableParticle& particle);

[[nodiscard]] bool is_saturated(double theta);

// Closed form:
//   P_{1,2} = 1/4 e^{-2 E_lower} (1 + e^{2 theta}) (1 +/- sech(theta) cos(Delta))
// where Delta is the relative phase of the two routes at detector one.
[[nodiscard]] DetectionProbabilities detection_probabilities(const TwoPathLayout& layout,
                                                             const UnstableParticle& particle,
                                                             double phase);

// |psi_ACD + psi_ABD|^2 summed from per-segment complex amplitudes.
[[nodiscard]] DetectionProbabilities detection_probabilities_from_amplitudes(
    const TwoPathLayout& layout, const UnstableParticle& particle, double phase);

[[nodiscard]] FringeScan fringe_scan(const TwoPathLayout& layout,
                                     const UnstableParticle& particle,
                                     std::span<const double> phases,
                                     Normalization normalization = Normalization::per_particle);

// (I_max - I_min) / (I_max + I_min) over the sampled grid, no interpolation.
[[nodiscard]] double visibility_operational(const FringeScan& scan);

// sech(theta_cav); exactly 0 when saturated.
[[nodiscard]] double visibility_closed_form(const TwoPathLayout& layout,
                                            const UnstableParticle& particle);

// Blocked-path renormalized ratio | (|psi_ACD|^2 - |psi_ABD|^2) / (sum) |.
// Exactly 1 when saturated.
[[nodiscard]] double predictability(const TwoPathLayout& layout,
                                    const UnstableParticle& particle);

// tanh|theta_cav|.
[[nodiscard]] double predictability_closed_form(const TwoPathLayout& layout,
                                                const UnstableParticle& particle);

[[nodiscard]] DualityReport duality_audit(const TwoPathLayout& layout,
                                          const UnstableParticle& particle);

// n points evenly spaced over [start, end]; with endpoint=false the end is
// excluded (periodic grids).
[[nodiscard]] std::vector<double> linspace(double start, double end, std::size_t n,
                                           bool endpoint = true);

}  // namespace twopath
