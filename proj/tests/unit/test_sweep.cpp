#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "twopath/errors.hpp"
#include "twopath/interferometer.hpp"
#include "twopath/sweep.hpp"

using namespace twopath;
using twopath::testing::cavity_layout;

namespace {

const UnstableParticle kParticle{10.0, 1000.0, ""};

}  // namespace

TEST_CASE("sweep parameter and scale names round-trip") {
  for (auto p : {SweepParameter::gamma_ratio, SweepParameter::cavity_length_over_ell,
                 SweepParameter::phase}) {
    CHECK(parse_sweep_parameter(to_string(p)) == p);
  }
  CHECK(parse_sweep_scale("log") == SweepScale::log);
  CHECK(parse_sweep_scale("linear") == SweepScale::linear);
  CHECK_FALSE(parse_sweep_parameter("length").has_value());
  CHECK_FALSE(parse_sweep_scale("Log").has_value());
}

TEST_CASE("sweep values") {
  SUBCASE("linear includes both endpoints") {
    const auto v = sweep_values({SweepParameter::gamma_ratio, 0.0, 10.0, 11, SweepScale::linear});
    REQUIRE(v.size() == 11);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 10.0);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(static_cast<double>(i)));
  }
  SUBCASE("log spacing has a constant ratio") {
    const auto v = sweep_values({SweepParameter::gamma_ratio, 0.01, 100.0, 5, SweepScale::log});
    REQUIRE(v.size() == 5);
    CHECK(v.front() == 0.01);
    CHECK(v.back() == 100.0);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] / v[i - 1] == doctest::Approx(10.0));
  }
  SUBCASE("descending sweeps are allowed") {
    const auto v = sweep_values({SweepParameter::phase, 1.0, -1.0, 3, SweepScale::linear});
    CHECK(v == std::vector{1.0, 0.0, -1.0});
  }
  SUBCASE("invalid specs") {
    CHECK_THROWS_AS(validate(SweepSpec{SweepParameter::phase, 0.0, 1.0, 1, SweepScale::linear}),
                    DomainError);
    CHECK_THROWS_AS(validate(SweepSpec{SweepParameter::phase, 1.0, 1.0, 3, SweepScale::linear}),
                    DomainError);
    CHECK_THROWS_AS(validate(SweepSpec{SweepParameter::phase, 0.0, 1.0, 3, SweepScale::log}),
                    DomainError);
    CHECK_THROWS_AS(validate(SweepSpec{SweepParameter::phase, 0.0, NAN, 3, SweepScale::linear}),
                    DomainError);
  }
}

TEST_CASE("apply_sweep_value") {
  const auto layout = cavity_layout(100.0, 10.0, 20.0, 1.0);

  SUBCASE("gamma_ratio rewrites the cavity") {
    const auto out = apply_sweep_value(layout, kParticle, SweepParameter::gamma_ratio, 3.5);
    CHECK(out.upper[1].gamma_ratio == 3.5);
    CHECK(out.upper_length() == layout.upper_length());
    CHECK_THROWS_AS((void)apply_sweep_value(layout, kParticle, SweepParameter::gamma_ratio, -1.0),
                    DomainError);
  }
  SUBCASE("cavity length keeps the arm length") {
    const auto roomy = cavity_layout(100.0, 40.0, 20.0, 1.0);
    const auto longer =
        apply_sweep_value(roomy, kParticle, SweepParameter::cavity_length_over_ell, 0.05);
    CHECK(longer.upper[1].length == doctest::Approx(50.0));
    CHECK(longer.upper[0].length == doctest::Approx(10.0));
    CHECK(longer.upper_length() == doctest::Approx(100.0));
    const auto shorter =
        apply_sweep_value(layout, kParticle, SweepParameter::cavity_length_over_ell, 0.015);
    CHECK(shorter.upper[1].length == doctest::Approx(15.0));
    CHECK(shorter.upper[0].length == doctest::Approx(15.0));
    CHECK(shorter.upper_length() == doctest::Approx(100.0));
    CHECK_THROWS_AS(
        (void)apply_sweep_value(layout, kParticle, SweepParameter::cavity_length_over_ell, 0.05),
        DomainError);
    CHECK_THROWS_AS((void)apply_sweep_value(layout, UnstableParticle{10.0, kInfinity, ""},
                                            SweepParameter::cavity_length_over_ell, 0.01),
                    DomainError);
  }
  SUBCASE("phase appends or rewrites a shifter") {
    const auto appended = apply_sweep_value(layout, kParticle, SweepParameter::phase, 0.7);
    REQUIRE(appended.lower.size() == 2);
    CHECK(appended.lower[1].phase_offset == 0.7);
    const auto rewritten = apply_sweep_value(appended, kParticle, SweepParameter::phase, -0.2);
    REQUIRE(rewritten.lower.size() == 2);
    CHECK(rewritten.lower[1].phase_offset == -0.2);
  }
  SUBCASE("a cavity must exist and be unique") {
    TwoPathLayout none;
    none.upper = {PathSegment::free(10.0)};
    none.lower = {PathSegment::free(10.0)};
    CHECK_THROWS_AS((void)apply_sweep_value(none, kParticle, SweepParameter::gamma_ratio, 1.0),
                    DomainError);
    auto two = layout;
    two.upper.push_back(PathSegment::cavity(1.0, 0.0));
    CHECK_THROWS_AS((void)apply_sweep_value(two, kParticle, SweepParameter::gamma_ratio, 1.0),
                    DomainError);
  }
}

TEST_CASE("run_sweep matches per-point duality audits") {
  const auto layout = cavity_layout(200.0, 50.0, 100.0, 1.0);
  const SweepSpec spec{SweepParameter::gamma_ratio, 0.0, 10.0, 41, SweepScale::linear};
  const auto rows = run_sweep(layout, kParticle, spec);
  const auto values = sweep_values(spec);
  REQUIRE(rows.size() == values.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r =
        duality_audit(apply_sweep_value(layout, kParticle, spec.parameter, values[i]), kParticle);
    CHECK(rows[i].param == values[i]);
    CHECK(rows[i].visibility == r.visibility);
    CHECK(rows[i].predictability == r.predictability);
    CHECK(rows[i].duality_sum == r.duality_sum);
    CHECK(rows[i].theta_cav == r.theta_cav);
    CHECK(std::abs(rows[i].duality_sum - 1.0) <= kDualityTolerance);
  }
  // gamma_ratio = 1 leaves the arms balanced.
  CHECK(rows[4].param == 1.0);
  CHECK(rows[4].visibility == doctest::Approx(1.0));
  CHECK(rows[4].predictability == doctest::Approx(0.0));
}

TEST_CASE("run_sweep is independent of the thread count") {
  const auto layout = cavity_layout(200.0, 50.0, 100.0, 1.0);
  const SweepSpec spec{SweepParameter::cavity_length_over_ell, 0.001, 0.15, 257, SweepScale::log};
  const auto serial = run_sweep(layout, kParticle, spec, 1);
  for (unsigned threads : {2U, 3U, 8U, 1000U}) {
    const auto parallel = run_sweep(layout, kParticle, spec, threads);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(parallel[i].param == serial[i].param);
      CHECK(parallel[i].visibility == serial[i].visibility);
      CHECK(parallel[i].predictability == serial[i].predictability);
    }
  }
}

TEST_CASE("run_sweep surfaces mapping errors before computing") {
  const auto layout = cavity_layout(100.0, 10.0, 20.0, 1.0);
  const SweepSpec spec{SweepParameter::cavity_length_over_ell, 0.01, 1.0, 10, SweepScale::linear};
  CHECK_THROWS_AS((void)run_sweep(layout, kParticle, spec, 4), DomainError);
}
