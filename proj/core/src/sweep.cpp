#include "twopath/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "twopath/errors.hpp"

namespace twopath {

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::gamma_ratio: return "gamma_ratio";
    case SweepParameter::cavity_length_over_ell: return "cavity_length_over_ell";
    case SweepParameter::phase: return "phase";
  }
  return "?";
}

std::string_view to_string(SweepScale s) { return s == SweepScale::log ? "log" : "linear"; }

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
  for (auto p : {SweepParameter::gamma_ratio, SweepParameter::cavity_length_over_ell,
                 SweepParameter::phase}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

std::optional<SweepScale> parse_sweep_scale(std::string_view name) {
  if (name == "linear") return SweepScale::linear;
  if (name == "log") return SweepScale::log;
  return std::nullopt;
}

void validate(const SweepSpec& spec) {
  if (spec.steps < 2) throw DomainError("sweep needs at least 2 steps");
  if (!std::isfinite(spec.start) || !std::isfinite(spec.end)) {
    throw DomainError("sweep endpoints must be finite");
  }
  if (spec.start == spec.end) throw DomainError("sweep start and end coincide");
  if (spec.scale == SweepScale::log && !(spec.start > 0.0 && spec.end > 0.0)) {
    throw DomainError("log sweep needs positive endpoints");
  }
}

std::vector<double> sweep_values(const SweepSpec& spec) {
  validate(spec);
  const auto n = static_cast<std::size_t>(spec.steps);
  if (spec.scale == SweepScale::linear) return linspace(spec.start, spec.end, n);
  auto exponents = linspace(std::log(spec.start), std::log(spec.end), n);
  for (double& e : exponents) e = std::exp(e);
  exponents.front() = spec.start;
  exponents.back() = spec.end;
  return exponents;
}

namespace {

PathSegment& single_upper_cavity(TwoPathLayout& layout) {
  PathSegment* found = nullptr;
  for (auto& s : layout.upper) {
    if (s.kind != SegmentKind::cavity) continue;
    if (found != nullptr) throw DomainError("sweep target is ambiguous: upper path has several cavities");
    found = &s;
  }
  if (found == nullptr) throw DomainError("sweep needs a cavity in the upper path");
  return *found;
}

}  // namespace

TwoPathLayout apply_sweep_value(const TwoPathLayout& layout, const UnstableParticle& particle,
                                SweepParameter parameter, double value) {
  TwoPathLayout out = layout;
  switch (parameter) {
    case SweepParameter::gamma_ratio: {
      if (!(value >= 0.0)) throw DomainError("swept gamma_ratio must be non-negative");
      single_upper_cavity(out).gamma_ratio = value;
      break;
    }
    case SweepParameter::cavity_length_over_ell: {
      if (particle.is_stable()) throw DomainError("cavity length sweep needs a finite ell");
      if (!(value >= 0.0)) throw DomainError("swept cavity length must be non-negative");
      PathSegment& cavity = single_upper_cavity(out);
      const double new_length = value * particle.ell;
      const double change = new_length - cavity.length;
      cavity.length = new_length;
      auto free = std::find_if(out.upper.begin(), out.upper.end(),
                               [](const PathSegment& s) { return s.kind == SegmentKind::free; });
      if (free == out.upper.end()) {
        throw DomainError("cavity length sweep needs a free segment in the upper path");
      }
      free->length -= change;
      if (free->length < 0.0) {
        throw DomainError("cavity longer than the upper arm allows");
      }
      break;
    }
    case SweepParameter::phase: {
      auto shifter = std::find_if(out.lower.begin(), out.lower.end(), [](const PathSegment& s) {
        return s.kind == SegmentKind::phase_shifter;
      });
      if (shifter == out.lower.end()) {
        out.lower.push_back(PathSegment::phase_shifter(value));
      } else {
        shifter->phase_offset = value;
      }
      break;
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const TwoPathLayout& layout, const UnstableParticle& particle,
                                const SweepSpec& spec, unsigned threads) {
  const std::vector<double> values = sweep_values(spec);
  // Resolve every layout first so input errors surface before any work.
  std::vector<TwoPathLayout> layouts;
  layouts.reserve(values.size());
  for (double v : values) layouts.push_back(apply_sweep_value(layout, particle, spec.parameter, v));

  std::vector<SweepRow> rows(values.size());
  auto evaluate = [&](std::size_t i) {
    const DualityReport r = duality_audit(layouts[i], particle);
    rows[i] = {values[i], r.visibility, r.predictability, r.duality_sum, r.theta_cav, r.saturated};
  };

  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(values.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) evaluate(i);
    return rows;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < values.size(); i += threads) evaluate(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace twopath
