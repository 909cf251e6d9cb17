#include <doctest.h>

#include <cmath>
#include <vector>

#include "jumpdiff/random.hpp"

using namespace jumpdiff;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        Counter4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Counter4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Counter4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct per address") {
  Stream a(42, {7, 3, Purpose::diffusion});
  Stream b(42, {7, 3, Purpose::diffusion});
  Stream c(42, {7, 3, Purpose::jump_size});
  Stream d(43, {7, 3, Purpose::diffusion});
  Stream e(42, {7ull | (1ull << 32), 3, Purpose::diffusion});
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
    CHECK(x != e.next_u64());
  }
}

TEST_CASE("uniforms stay inside the open unit interval") {
  Stream s(1, {0, 0, Purpose::gibbs});
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

namespace {

struct Moments {
  double mean = 0.0, var = 0.0;
};

template <typename Draw>
Moments moments(int n, Draw draw) {
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    ss += x * x;
  }
  const double m = s / n;
  return {m, ss / n - m * m};
}

}  // namespace

TEST_CASE("variate moments") {
  constexpr int n = 200000;
  Stream s(2024, {1, 2, Purpose::gibbs});

  SUBCASE("normal") {
    const auto m = moments(n, [&] { return s.normal(); });
    CHECK(std::fabs(m.mean) < 4.0 / std::sqrt(n));
    CHECK(m.var == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("exponential") {
    const auto m = moments(n, [&] { return s.exponential(); });
    CHECK(m.mean == doctest::Approx(1.0).epsilon(4.0 / std::sqrt(n)));
  }
  SUBCASE("poisson by inversion") {
    const auto m = moments(n, [&] { return double(s.poisson(3.5)); });
    CHECK(std::fabs(m.mean - 3.5) < 4.0 * std::sqrt(3.5 / n));
    CHECK(m.var == doctest::Approx(3.5).epsilon(0.02));
  }
  SUBCASE("poisson by transformed rejection") {
    const auto m = moments(n, [&] { return double(s.poisson(80.0)); });
    CHECK(std::fabs(m.mean - 80.0) < 4.0 * std::sqrt(80.0 / n));
    CHECK(m.var == doctest::Approx(80.0).epsilon(0.02));
  }
  SUBCASE("gamma") {
    for (double shape : {0.4, 2.5, 60.0}) {
      const auto m = moments(n, [&] { return s.gamma(shape); });
      CHECK(std::fabs(m.mean - shape) < 4.0 * std::sqrt(shape / n));
      CHECK(m.var == doctest::Approx(shape).epsilon(0.03));
    }
  }
}

TEST_CASE("poisson inversion is monotone in the mean for a fixed stream position") {
  for (std::uint32_t step = 0; step < 2000; ++step) {
    std::uint32_t prev = 0;
    for (double mean : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 12.0, 29.0}) {
      Stream s(9, {0, step, Purpose::jump_count});
      const auto k = s.poisson(mean);
      CHECK(k >= prev);
      prev = k;
    }
  }
}
