#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "support.hpp"
#include "twopath/errors.hpp"
#include "twopath/model.hpp"

using namespace twopath;
using twopath::testing::rng;
using twopath::testing::uniform;

namespace {

constexpr double pi = std::numbers::pi;
const ComplexAmplitude I{0.0, 1.0};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("particle validation and hierarchy flag") {
  CHECK_NOTHROW(validate(UnstableParticle{1.0, 10.0, "x"}));
  CHECK_NOTHROW(validate(UnstableParticle{1.0, kInfinity, ""}));
  CHECK_THROWS_AS(validate(UnstableParticle{0.0, 10.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{-1.0, 10.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{std::nan(""), 10.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{kInfinity, 10.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{1.0, 0.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{1.0, -5.0, ""}), DomainError);
  CHECK_THROWS_AS(validate(UnstableParticle{1.0, std::nan(""), ""}), DomainError);

  CHECK(hierarchy_warning(UnstableParticle{1.0, 99.0, ""}));
  CHECK_FALSE(hierarchy_warning(UnstableParticle{1.0, 100.0, ""}));
  CHECK_FALSE(hierarchy_warning(UnstableParticle{3.0, kInfinity, ""}));

  const UnstableParticle p{4.0, 8.0, ""};
  CHECK(p.wavelength() == 0.25);
  CHECK(p.kappa() == 1.0 / 16.0);
  CHECK(UnstableParticle{4.0, kInfinity, ""}.kappa() == 0.0);
}

TEST_CASE("free_amplitude: zero length is the identity") {
  for (double g : {0.0, 1.0, 7.0}) {
    const auto a = free_amplitude(UnstableParticle{3.7, 0.2, ""}, 0.0, g);
    CHECK(a.real() == 1.0);
    CHECK(a.imag() == 0.0);
  }
}

TEST_CASE("free_amplitude: stable particle has unit magnitude") {
  const UnstableParticle stable{2.3, kInfinity, ""};
  for (double s : {0.5, 3.0, 1e4}) {
    CHECK(std::abs(free_amplitude(stable, s, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("free_amplitude: s = ell gives magnitude e^{-1/2}") {
  const auto a = free_amplitude(UnstableParticle{2.0 * pi, 1.0, ""}, 1.0, 1.0);
  CHECK(rel(std::abs(a), std::exp(-0.5)) < 1e-15);
  // k s = 2 pi: the carrier returns to the real axis.
  CHECK(std::abs(std::arg(a)) < 1e-14);
}

TEST_CASE("free_amplitude: errors") {
  const UnstableParticle p{1.0, 10.0, ""};
  CHECK_THROWS_AS((void)free_amplitude(p, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS((void)free_amplitude(p, 1.0, -0.5), DomainError);
  CHECK_THROWS_AS((void)free_amplitude(p, std::nan(""), 1.0), DomainError);
  CHECK_THROWS_AS((void)free_amplitude(p, kInfinity, 1.0), DomainError);
  CHECK_THROWS_AS((void)free_amplitude(p, 1.0, kInfinity), DomainError);
  CHECK_THROWS_AS((void)free_amplitude(UnstableParticle{std::nan(""), 10.0, ""}, 1.0, 1.0),
                  DomainError);
}

TEST_CASE("free_amplitude: magnitude law and semigroup property") {
  auto gen = rng(11);
  for (int i = 0; i < 2000; ++i) {
    const UnstableParticle p{uniform(gen, 0.01, 50.0), uniform(gen, 0.1, 100.0), ""};
    const double g = uniform(gen, 0.0, 5.0);
    const double s1 = uniform(gen, 0.0, 20.0);
    const double s2 = uniform(gen, 0.0, 20.0);
    const auto a = free_amplitude(p, s1, g);
    CHECK(rel(std::abs(a), std::exp(-g * s1 / (2.0 * p.ell))) < 1e-14);
    CHECK(std::abs(a) <= 1.0);

    const auto whole = free_amplitude(p, s1 + s2, g);
    const auto parts = free_amplitude(p, s1, g) * free_amplitude(p, s2, g);
    CHECK(std::abs(whole - parts) <= 1e-12 * std::abs(whole));
  }
}

TEST_CASE("free_amplitude: unit magnitude only without decay") {
  const UnstableParticle p{1.0, 5.0, ""};
  CHECK(std::abs(free_amplitude(p, 3.0, 0.0)) == 1.0);
  CHECK(std::abs(free_amplitude(p, 0.0, 3.0)) == 1.0);
  CHECK(std::abs(free_amplitude(p, 1e-3, 1e-3)) < 1.0);
}

TEST_CASE("segment_amplitude") {
  const UnstableParticle p{1.3, 6.0, ""};

  SUBCASE("pure phase shifter") {
    const auto a = segment_amplitude(p, PathSegment::phase_shifter(pi / 2.0));
    CHECK(std::abs(a - I) < 1e-15);
  }
  SUBCASE("free segment reduces to free_amplitude") {
    const auto a = segment_amplitude(p, PathSegment::free(2.5));
    CHECK(a == free_amplitude(p, 2.5, 1.0));
  }
  SUBCASE("cavity uses its gamma_ratio") {
    const auto a = segment_amplitude(p, PathSegment::cavity(2.5, 0.3));
    CHECK(a == free_amplitude(p, 2.5, 0.3));
  }
  SUBCASE("constant potential multiplies by the closed-form phase factor") {
    const double v = 0.37;
    const double len = 4.0;
    const auto seg = PathSegment::free(len, std::vector<double>(9, v));
    const ComplexAmplitude phase = -(1.0 / p.k) * (1.0 - I / (2.0 * p.k * p.ell)) * (v * len);
    const auto expected = free_amplitude(p, len, 1.0) * std::exp(I * phase);
    CHECK(std::abs(segment_amplitude(p, seg) - expected) < 1e-14);
  }
}

TEST_CASE("potential_phase: closed forms") {
  const UnstableParticle p{2.0, 40.0, ""};
  const ComplexAmplitude factor = -(1.0 / p.k) * (1.0 - I / (2.0 * p.k * p.ell));

  SUBCASE("zero potential") {
    const auto phi = potential_phase(p, std::vector<double>(7, 0.0), 3.0);
    CHECK(phi == ComplexAmplitude(0.0, 0.0));
  }
  SUBCASE("constant potential") {
    const auto phi = potential_phase(p, std::vector<double>(6, 1.5), 3.0);
    CHECK(std::abs(phi - factor * 4.5) < 1e-14);
  }
  SUBCASE("linear ramp a s") {
    const double a = 0.8;
    const double len = 5.0;
    for (std::size_t n : {2u, 3u, 4u, 11u, 50u, 101u}) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = a * len * static_cast<double>(i) / static_cast<double>(n - 1);
      const ComplexAmplitude expected = factor * (a * len * len / 2.0);
      CHECK(std::abs(potential_phase(p, v, len) - expected) <= 1e-10 * std::abs(expected));
    }
  }
}

TEST_CASE("integrate_samples: exact for cubics with even and odd interval counts") {
  // int_0^L (1 + 2s - s^2 + 0.5 s^3) ds
  const double len = 3.0;
  const double exact = len + len * len - len * len * len / 3.0 + 0.125 * std::pow(len, 4);
  for (std::size_t n = 3; n <= 14; ++n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = len * static_cast<double>(i) / static_cast<double>(n - 1);
      v[i] = 1.0 + 2.0 * s - s * s + 0.5 * s * s * s;
    }
    CHECK(rel(integrate_samples(v, len), exact) < 1e-13);
  }
  CHECK(integrate_samples(std::vector<double>{1.0, 3.0}, 2.0) == 4.0);
}

TEST_CASE("potential_phase: imaginary to real ratio is -1/(2 k ell)") {
  auto gen = rng(5);
  for (int i = 0; i < 500; ++i) {
    const UnstableParticle p{uniform(gen, 0.1, 20.0), uniform(gen, 0.5, 500.0), ""};
    std::vector<double> v(2 + static_cast<std::size_t>(uniform(gen, 0.0, 30.0)));
    for (auto& x : v) x = uniform(gen, -2.0, 3.0);
    const auto phi = potential_phase(p, v, uniform(gen, 0.1, 10.0));
    if (std::abs(phi.real()) < 1e-12) continue;
    CHECK(rel(phi.imag() / phi.real(), -1.0 / (2.0 * p.k * p.ell)) < 1e-12);
  }
  const auto stable = potential_phase(UnstableParticle{1.0, kInfinity, ""}, std::vector<double>{1.0, 2.0}, 1.0);
  CHECK(stable.imag() == 0.0);
}

TEST_CASE("potential_phase: errors") {
  const UnstableParticle p{1.0, 10.0, ""};
  CHECK_THROWS_AS((void)potential_phase(p, std::vector<double>{1.0}, 1.0), DomainError);
  CHECK_THROWS_AS((void)potential_phase(p, std::vector<double>{}, 1.0), DomainError);
  CHECK_THROWS_AS((void)potential_phase(p, std::vector<double>{1.0, std::nan("")}, 1.0), DomainError);
  CHECK_THROWS_AS((void)potential_phase(p, std::vector<double>{1.0, 2.0}, -1.0), DomainError);
}

TEST_CASE("path_amplitude: junction passthrough and stable lower arm") {
  const ComplexAmplitude j = -I / 2.0;
  const UnstableParticle p{1.7, 30.0, ""};
  CHECK(path_amplitude(p, std::vector{PathSegment::free(0.0)}, j) == j);

  const double h0 = 3.0;
  const double l0 = 4.5;
  const UnstableParticle stable{1.7, kInfinity, ""};
  const std::vector lower{PathSegment::free(h0), PathSegment::free(l0), PathSegment::phase_shifter(0.0)};
  const auto a = path_amplitude(stable, lower, j);
  CHECK(std::abs(a - j * std::exp(I * stable.k * (h0 + l0))) < 1e-15);
}

TEST_CASE("path_amplitude: cavity arm magnitude equals the brute-force product") {
  const UnstableParticle p{2.0, 5.0, ""};
  const double h0 = 3.0;
  const double l0 = 6.0;
  const double l_cav = 2.0;
  for (double g : {0.0, 0.5, 1.0, 3.0}) {
    const std::vector upper{PathSegment::free(h0), PathSegment::free(1.0), PathSegment::cavity(l_cav, g),
                            PathSegment::free(l0 - l_cav - 1.0)};
    const auto a = path_amplitude(p, upper, -I / 2.0);
    // Product of per-segment magnitudes.
    const double brute = 0.5 * std::exp(-h0 / (2.0 * p.ell)) * std::exp(-1.0 / (2.0 * p.ell)) *
                         std::exp(-g * l_cav / (2.0 * p.ell)) *
                         std::exp(-(l0 - l_cav - 1.0) / (2.0 * p.ell));
    const double closed = 0.5 * std::exp(-(h0 + l0 - l_cav) / (2.0 * p.ell)) *
                          std::exp(-l_cav * g / (2.0 * p.ell));
    CHECK(rel(std::abs(a), brute) < 1e-14);
    CHECK(rel(std::abs(a), closed) < 1e-14);
    // Global carrier phase e^{i k (H0 + L0)} with the -i/2 junction.
    const auto carrier = a / std::abs(a) / std::exp(I * p.k * (h0 + l0));
    CHECK(std::abs(carrier + I) < 1e-13);
  }
}

TEST_CASE("path_amplitude: invariant under splitting a segment") {
  auto gen = rng(23);
  for (int i = 0; i < 500; ++i) {
    const UnstableParticle p{uniform(gen, 0.1, 10.0), uniform(gen, 1.0, 100.0), ""};
    auto layout = twopath::testing::random_layout(gen, p.ell);
    auto& arm = layout.upper;
    const auto pick = static_cast<std::size_t>(uniform(gen, 0.0, static_cast<double>(arm.size())));
    const PathSegment original = arm[pick];
    if (original.kind == SegmentKind::phase_shifter) continue;
    const double f = uniform(gen, 0.0, 1.0);
    PathSegment a = original;
    PathSegment b = original;
    a.length = f * original.length;
    b.length = original.length - a.length;
    std::vector<PathSegment> split(arm.begin(), arm.begin() + static_cast<long>(pick));
    split.push_back(a);
    split.push_back(b);
    split.insert(split.end(), arm.begin() + static_cast<long>(pick) + 1, arm.end());
    const auto whole = path_amplitude(p, arm, 0.5);
    const auto pieces = path_amplitude(p, split, 0.5);
    CHECK(std::abs(whole - pieces) <= 1e-12 * std::abs(whole) + 1e-300);
  }
}

TEST_CASE("path_amplitude: stable particle magnitude is set by the junction factor") {
  auto gen = rng(29);
  const UnstableParticle stable{3.1, kInfinity, ""};
  for (int i = 0; i < 200; ++i) {
    const auto layout = twopath::testing::random_layout(gen, 10.0);
    const ComplexAmplitude j = std::polar(uniform(gen, 0.1, 1.0), uniform(gen, -3.0, 3.0));
    CHECK(std::abs(path_amplitude(stable, layout.upper, j)) == doctest::Approx(std::abs(j)).epsilon(1e-14));
  }
}

TEST_CASE("path_amplitude: empty list is rejected") {
  CHECK_THROWS_AS((void)path_amplitude(UnstableParticle{}, std::vector<PathSegment>{}, 1.0), DomainError);
}

TEST_CASE("segment validation") {
  CHECK_NOTHROW(validate(PathSegment::free(1.0)));
  CHECK_NOTHROW(validate(PathSegment::cavity(1.0, 0.0)));
  CHECK_THROWS_AS(validate(PathSegment::free(-1.0)), DomainError);
  CHECK_THROWS_AS(validate(PathSegment::cavity(1.0, -0.1)), DomainError);
  CHECK_THROWS_AS(validate(PathSegment::cavity(kInfinity, 1.0)), DomainError);
  PathSegment off_rate = PathSegment::free(1.0);
  off_rate.gamma_ratio = 2.0;
  CHECK_THROWS_AS(validate(off_rate), DomainError);
  CHECK_THROWS_AS(validate(PathSegment::free(1.0, {1.0})), DomainError);
  CHECK_THROWS_AS(validate(PathSegment::phase_shifter(std::nan(""))), DomainError);
}

TEST_CASE("layout validation and symmetry flag") {
  TwoPathLayout layout = twopath::testing::cavity_layout(10.0, 2.0, 3.0, 0.5);
  CHECK_NOTHROW(validate(layout));
  CHECK(layout.is_symmetric());
  layout.lower.push_back(PathSegment::free(10.0 * 1e-10));
  CHECK(layout.is_symmetric());
  layout.lower.push_back(PathSegment::free(10.0 * 1e-8));
  CHECK_FALSE(layout.is_symmetric());

  TwoPathLayout empty = layout;
  empty.upper.clear();
  CHECK_THROWS_AS(validate(empty), DomainError);
}

TEST_CASE("splitter conventions") {
  auto unitary = [](const SplitterConvention::Matrix& u) {
    double worst = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        ComplexAmplitude dot = 0.0;
        for (int k = 0; k < 2; ++k) dot += u[k][r] * std::conj(u[k][c]);
        worst = std::max(worst, std::abs(dot - (r == c ? 1.0 : 0.0)));
      }
    }
    return worst;
  };

  const auto sym = SplitterConvention::symmetric().matrix();
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(sym[0][0] - h) < 1e-15);
  CHECK(std::abs(sym[1][0] - I * h) < 1e-15);
  CHECK(SplitterConvention::symmetric().mirror() == ComplexAmplitude(-1.0, 0.0));
  CHECK(unitary(sym) < 1e-15);

  const auto had = SplitterConvention::hadamard().matrix();
  CHECK(std::abs(had[1][1] + h) < 1e-15);
  const auto had_general = SplitterConvention::general(pi / 2, -pi / 2, -pi / 2, pi).matrix();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) CHECK(std::abs(had[r][c] - had_general[r][c]) < 1e-15);
  }

  auto gen = rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto c = SplitterConvention::general(uniform(gen, -4, 4), uniform(gen, -4, 4),
                                               uniform(gen, -4, 4), uniform(gen, -4, 4));
    CHECK(unitary(c.matrix()) < 1e-14);
    CHECK(std::abs(std::abs(c.mirror()) - 1.0) < 1e-15);
  }
}

TEST_CASE("junction factors under the symmetric convention") {
  const auto d1 = junction_factors(SplitterConvention::symmetric(), Detector::one);
  CHECK(std::abs(d1.upper + I / 2.0) < 1e-15);
  CHECK(std::abs(d1.lower + I / 2.0) < 1e-15);
  // Detector two: transmit-transmit on the upper arm, reflect-reflect on the lower.
  const auto d2 = junction_factors(SplitterConvention::symmetric(), Detector::two);
  CHECK(std::abs(d2.upper + 0.5) < 1e-15);
  CHECK(std::abs(d2.lower - 0.5) < 1e-15);
}

TEST_CASE("junction factors conserve probability for any convention") {
  auto gen = rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto c = SplitterConvention::general(uniform(gen, -4, 4), uniform(gen, -4, 4),
                                               uniform(gen, -4, 4), uniform(gen, -4, 4));
    const auto d1 = junction_factors(c, Detector::one);
    const auto d2 = junction_factors(c, Detector::two);
    // Each arm carries half the input and the second splitter is unitary.
    CHECK(std::norm(d1.upper) + std::norm(d2.upper) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::norm(d1.lower) + std::norm(d2.lower) == doctest::Approx(0.5).epsilon(1e-14));
    // The cross terms cancel between detectors.
    CHECK(std::abs(d1.upper * std::conj(d1.lower) + d2.upper * std::conj(d2.lower)) < 1e-14);
  }
}
