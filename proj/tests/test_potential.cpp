#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "presslab/errors.hpp"
#include "presslab/measure.hpp"
#include "presslab/numeric.hpp"
#include "presslab/potential.hpp"
#include "presslab/shiftspace.hpp"

using namespace presslab;

namespace {

SystemPtr full_shift(int k) {
  return std::make_shared<const ShiftSystem>(1, Alphabet{k, {}},
                                             std::vector<ForbiddenPattern>{});
}

SystemPtr golden_mean() {
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0}, {1}}, {1, 1}});
  return std::make_shared<const ShiftSystem>(1, Alphabet{2, {}}, std::move(fb));
}

}  // namespace

TEST_CASE("birkhoff sum of a single-site table") {
  SystemPtr x = full_shift(2);
  Potential f(*x, 0, {0.25, 0.75});
  Pattern p{BoxWindow{{0}, {3}}, {0, 1, 1, 0}};
  CHECK(birkhoff_sum(f, p, p.window) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.sup_norm() == 0.75);
  CHECK(f.min_value() == 0.25);
}

TEST_CASE("cylinder sup of the constant potential counts window sites") {
  SystemPtr x = full_shift(2);
  Potential one(*x, 1, std::vector<double>(8, 1.0));
  Pattern b{BoxWindow::cube(1, 3), {0, 0, 0}};
  SupResult r = cylinder_sup(one, b, *x, BoxWindow::cube(1, 3));
  CHECK(r.exact);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("cylinder sup equals the max over explicit completions") {
  SystemPtr x = full_shift(2);
  Potential f(*x, 1, {0.3, -1.2, 2.0, 0.7, -0.4, 1.9, -2.2, 0.5});
  Pattern b{BoxWindow{{0}, {1}}, {0, 1}};
  BoxWindow F{{0}, {1}};
  double best = kNegInf;
  for (std::uint8_t left = 0; left < 2; ++left) {
    for (std::uint8_t right = 0; right < 2; ++right) {
      Pattern comp{BoxWindow{{-1}, {2}}, {left, 0, 1, right}};
      best = std::max(best, birkhoff_sum(f, comp, F));
    }
  }
  SupResult r = cylinder_sup(f, b, *x, F);
  CHECK(r.exact);
  CHECK(r.value == doctest::Approx(best).epsilon(1e-15));
}

TEST_CASE("cylinder sup over an empty completion space is -inf") {
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0}, {1}}, {1, 1}});
  fb.push_back({BoxWindow{{0}, {1}}, {0, 0}});
  ShiftSystem alt(1, Alphabet{2, {}}, std::move(fb));
  Potential f(alt, 1, std::vector<double>(8, 1.0));
  Pattern b{BoxWindow{{0}, {1}}, {0, 0}};  // forbidden word: no completion exists
  SupResult r = cylinder_sup(f, b, alt, BoxWindow{{0}, {1}});
  CHECK(r.value == kNegInf);
}

TEST_CASE("cylinder sup fallback is an upper bound and flagged inexact") {
  SystemPtr x = full_shift(2);
  std::vector<double> table(32);
  for (std::size_t i = 0; i < table.size(); ++i)
    table[i] = 0.1 * static_cast<double>(i % 7) - 0.2;
  Potential f(*x, 2, table);
  Pattern b{BoxWindow{{0}, {1}}, {1, 0}};
  BoxWindow F{{0}, {1}};
  SupResult exact = cylinder_sup(f, b, *x, F);
  Limits tight;
  tight.max_patterns = 3;
  CHECK_THROWS_AS(cylinder_sup(f, b, *x, F, tight, false), CapExceeded);
  SupResult bound = cylinder_sup(f, b, *x, F, tight, true);
  CHECK_FALSE(bound.exact);
  CHECK(bound.value >= exact.value - 1e-15);
}

TEST_CASE("integral of a pair indicator under a product measure") {
  SystemPtr x = full_shift(2);
  std::vector<double> table(8, 0.0);
  table[3] = 1.0;  // block (x_-1,x_0,x_1) = 011: center and right both 1
  table[7] = 1.0;  // 111
  Potential f(*x, 1, table);
  Measure mu = Measure::bernoulli(1, {0.5, 0.5});
  CHECK(integrate(f, mu, *x) == doctest::Approx(0.25).epsilon(1e-12));
  Measure nu = Measure::bernoulli(1, {0.3, 0.7});
  CHECK(integrate(f, nu, *x) == doctest::Approx(0.49).epsilon(1e-12));
}

TEST_CASE("cached norms only see admissible blocks") {
  SystemPtr gm = golden_mean();
  // packed base-2 over (x_-1, x_0, x_1); entries containing 11 are unreachable
  Potential f(*gm, 1, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 100.0});
  CHECK(f.sup_norm() == 5.0);
  CHECK(f.max_value() == 5.0);
  CHECK(f.min_value() == 0.0);
}

TEST_CASE("table algebra lifts mixed radii") {
  SystemPtr x = full_shift(2);
  Potential f(*x, 0, {1.0, 2.0});
  Potential g(*x, 1, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
  Potential h = add(f, g, *x);
  CHECK(h.radius() == 1);
  Pattern p{BoxWindow{{-1}, {1}}, {0, 1, 0}};  // packed 2
  CHECK(h.value_at(p, Site{0}) == doctest::Approx(2.0 + 0.2).epsilon(1e-15));

  Potential s = scaled(f, *x, -2.0);
  CHECK(s.value_packed(1) == -4.0);
  Potential c = shifted(f, *x, 0.5);
  CHECK(c.value_packed(0) == 1.5);

  Potential t = translated(f, *x, Site{1});
  CHECK(t.radius() == 1);
  Pattern q{BoxWindow{{-1}, {1}}, {0, 0, 1}};
  CHECK(t.value_at(q, Site{0}) == doctest::Approx(2.0).epsilon(1e-15));  // reads site +1
}

TEST_CASE("pullback composes with a single-site code") {
  SystemPtr w = full_shift(4);
  SystemPtr x = full_shift(2);
  BlockCode parity(w, x, BoxWindow{{0}, {0}}, {0, 1, 0, 1});
  Potential f(*x, 0, {10.0, 20.0});
  Potential pb = pullback(f, parity);
  CHECK(pb.radius() == 0);
  CHECK(pb.alphabet_size() == 4);
  CHECK(pb.value_packed(0) == 10.0);
  CHECK(pb.value_packed(1) == 20.0);
  CHECK(pb.value_packed(2) == 10.0);
  CHECK(pb.value_packed(3) == 20.0);

  BlockCode xem(x, x, BoxWindow{{0}, {1}}, {0, 1, 1, 0});
  CHECK_THROWS_AS(pullback(f, xem), DomainError);
}
