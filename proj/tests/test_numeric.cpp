#include <doctest.h>

#include <cmath>
#include <limits>

#include "presslab/numeric.hpp"

using namespace presslab;

TEST_CASE("compensated sum keeps the small term a naive sum drops") {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);  // naive left-to-right gives 0
}

TEST_CASE("compensated sum scales") {
  CompensatedSum s;
  for (int i = 0; i < 10; ++i) s.add(0.1);
  s.scale(10.0);
  CHECK(s.value() == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("log-sum-exp basics") {
  LogSumExp l;
  CHECK(l.value() == kNegInf);  // empty sum
  l.add(3.0);
  CHECK(l.value() == 3.0);
  LogSumExp two;
  two.add(0.0);
  two.add(0.0);
  CHECK(two.value() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("log-sum-exp survives magnitudes that overflow exp") {
  LogSumExp l;
  l.add(1000.0);
  l.add(1000.0);
  CHECK(l.value() == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

  LogSumExp wide;
  wide.add(-1000.0);
  wide.add(1000.0);
  CHECK(wide.value() == doctest::Approx(1000.0).epsilon(1e-15));

  LogSumExp inf_term;
  inf_term.add(kNegInf);
  inf_term.add(2.0);
  CHECK(inf_term.value() == 2.0);
}

TEST_CASE("log-sum-exp order independence") {
  double xs[5] = {-3.0, 700.0, 0.25, -700.0, 12.0};
  LogSumExp fwd, rev;
  for (int i = 0; i < 5; ++i) fwd.add(xs[i]);
  for (int i = 4; i >= 0; --i) rev.add(xs[i]);
  CHECK(fwd.value() == doctest::Approx(rev.value()).epsilon(1e-15));
}

TEST_CASE("close_abs") {
  CHECK(close_abs(1.0, 1.0 + 1e-12, 1e-9));
  CHECK_FALSE(close_abs(1.0, 1.1, 1e-9));
}
