#pragma once

// Parameter sweeps of visibility, predictability and the duality sum.

#include <optional>
#include <string_view>
#include <vector>

#include "twopath/interferometer.hpp"
#include "twopath/model.hpp"

namespace twopath {

enum class SweepParameter { gamma_ratio, cavity_length_over_ell, phase };
enum class SweepScale { linear, log };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::gamma_ratio;
  double start = 0.0;
  double end = 1.0;
  int steps = 2;
  SweepScale scale = SweepScale::linear;

  bool operator==(const SweepSpec&) const = default;
};

[[nodiscard]] std::string_view to_string(SweepParameter p);
[[nodiscard]] std::string_view to_string(SweepScale s);
[[nodiscard]] std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);
[[nodiscard]] std::optional<SweepScale> parse_sweep_scale(std::string_view name);

// Throws DomainError: steps < 2, start == end, non-finite endpoints, or a log
// scale with a non-positive endpoint.
void validate(const SweepSpec& spec);

[[nodiscard]] std::vector<double> sweep_values(const SweepSpec& spec);

// Layout with one sweep value applied:
//  - gamma_ratio rewrites the single cavity of the upper arm;
//  - cavity_length_over_ell sets that cavity to value * ell and takes the
//    difference out of the first free segment of the upper arm, keeping the
//    arm length fixed;
//  - phase rewrites the first phase shifter of the lower arm (appending one
//    if there is none).
// Throws DomainError when the mapping is ambiguous or impossible.
[[nodiscard]] TwoPathLayout apply_sweep_value(const TwoPathLayout& layout,
                                              const UnstableParticle& particle,
                                              SweepParameter parameter, double value);

struct SweepRow {
  double param = 0.0;
  double visibility = 0.0;
  double predictability = 0.0;
  double duality_sum = 0.0;
  double theta_cav = 0.0;
  bool saturated = false;
};

// Rows in sweep order. Grid points are spread over `threads` workers writing
// into preallocated slots, so the output does not depend on scheduling.
[[nodiscard]] std::vector<SweepRow> run_sweep(const TwoPathLayout& layout,
                                              const UnstableParticle& particle,
                                              const SweepSpec& spec, unsigned threads = 1);

}  // namespace twopath
