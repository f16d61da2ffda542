#include <doctest.h>

#include <set>
#include <vector>

#include "presslab/window.hpp"

using namespace presslab;

namespace {

// Reference K-boundary by direct scanning: g is in the boundary iff K + g
// meets both omega and its complement.
std::set<Site> brute_k_boundary(const BoxWindow& omega, const BoxWindow& k, Coord scan) {
  std::set<Site> out;
  int d = omega.dim();
  std::vector<Coord> g(static_cast<std::size_t>(d), -scan);
  while (true) {
    bool inside = false, outside = false;
    std::vector<Coord> t(static_cast<std::size_t>(d), 0);
    for (std::uint64_t i = 0; i < k.volume(); ++i) {
      Site s = k.site_at(i);
      for (int a = 0; a < d; ++a) s[static_cast<std::size_t>(a)] += g[static_cast<std::size_t>(a)];
      (omega.contains(s) ? inside : outside) = true;
    }
    if (inside && outside) out.insert(g);
    int axis = d - 1;
    while (axis >= 0 && ++g[static_cast<std::size_t>(axis)] > scan) {
      g[static_cast<std::size_t>(axis)] = -scan;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

}  // namespace

TEST_CASE("cube geometry and site ordering") {
  BoxWindow w = BoxWindow::cube(2, 4);
  CHECK(w.volume() == 16);
  CHECK(w.extent(0) == 4);
  CHECK(w.dim() == 2);
  // lexicographic: first coordinate most significant
  CHECK(w.site_at(0) == Site{0, 0});
  CHECK(w.site_at(1) == Site{0, 1});
  CHECK(w.site_at(4) == Site{1, 0});
  for (std::uint64_t i = 0; i < w.volume(); ++i) CHECK(w.index_of(w.site_at(i)) == i);
}

TEST_CASE("inflate, minkowski, erode, intersect") {
  BoxWindow w = BoxWindow::cube(1, 5);
  BoxWindow big = w.inflated(1);
  CHECK(big.lo == Site{-1});
  CHECK(big.hi == Site{5});

  BoxWindow stencil{{0}, {1}};
  BoxWindow sum = w.minkowski_sum(stencil);
  CHECK(sum.lo == Site{0});
  CHECK(sum.hi == Site{5});

  auto eroded = sum.eroded_by(stencil);
  REQUIRE(eroded.has_value());
  CHECK(*eroded == w);
  CHECK_FALSE(BoxWindow{{0}, {0}}.eroded_by(BoxWindow{{0}, {3}}).has_value());

  auto inter = w.intersect(BoxWindow{{3}, {9}});
  REQUIRE(inter.has_value());
  CHECK(inter->lo == Site{3});
  CHECK(inter->hi == Site{4});
  CHECK_FALSE(w.intersect(BoxWindow{{7}, {9}}).has_value());
}

TEST_CASE("k-boundary matches brute-force scan") {
  BoxWindow omega{{0, 0}, {4, 4}};
  BoxWindow k{{0, 0}, {1, 1}};
  auto brute = brute_k_boundary(omega, k, 8);
  CHECK(brute.size() == 20);  // 5x5 box against a 2x2 block
  CHECK(k_boundary_size(omega, k) == brute.size());
  std::set<Site> got;
  for (const Site& s : k_boundary(omega, k)) got.insert(s);
  CHECK(got == brute);

  BoxWindow omega1{{0}, {9}};
  BoxWindow k1{{-1}, {1}};
  auto brute1 = brute_k_boundary(omega1, k1, 14);
  CHECK(k_boundary_size(omega1, k1) == brute1.size());
  CHECK(boundary_ratio(omega1, k1) ==
        doctest::Approx(static_cast<double>(brute1.size()) / 10.0).epsilon(1e-15));
}

TEST_CASE("boundary ratio vanishes along the cube sequence") {
  BoxWindow k{{-1, -1}, {1, 1}};
  double prev = 1e9;
  for (Coord n : {4, 8, 16, 32}) {
    double r = boundary_ratio(standard_folner(2, n), k);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 0.3);
}

TEST_CASE("translate symmetric difference") {
  CHECK(translate_symdiff_size(BoxWindow::cube(1, 10), Site{3}) == 6);
  CHECK(translate_symdiff_size(BoxWindow::cube(1, 10), Site{0}) == 0);
  // overlap of a 4x4 square moved by (1,2) is 3x2, so 2*(16-6)
  CHECK(translate_symdiff_size(BoxWindow::cube(2, 4), Site{1, 2}) == 20);
  CHECK(translate_symdiff_size(BoxWindow::cube(1, 4), Site{7}) == 8);  // disjoint
}
