#include <doctest.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "presslab/errors.hpp"
#include "presslab/shiftspace.hpp"

using namespace presslab;

namespace {

SystemPtr full_shift(int k, int dim = 1) {
  return std::make_shared<const ShiftSystem>(dim, Alphabet{k, {}},
                                             std::vector<ForbiddenPattern>{});
}

SystemPtr golden_mean() {
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0}, {1}}, {1, 1}});
  return std::make_shared<const ShiftSystem>(1, Alphabet{2, {}}, std::move(fb));
}

SystemPtr hard_square() {
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0, 0}, {0, 1}}, {1, 1}});
  fb.push_back({BoxWindow{{0, 0}, {1, 0}}, {1, 1}});
  return std::make_shared<const ShiftSystem>(2, Alphabet{2, {}}, std::move(fb));
}

}  // namespace

TEST_CASE("pattern counts follow the Fibonacci law when 11 is forbidden") {
  SystemPtr gm = golden_mean();
  // strings avoiding 11: 2, 3, 5, 8, ... (shifted Fibonacci)
  CHECK(count_patterns(*gm, BoxWindow::cube(1, 1)) == 2);
  CHECK(count_patterns(*gm, BoxWindow::cube(1, 3)) == 5);
  CHECK(count_patterns(*gm, BoxWindow::cube(1, 10)) == 144);
  CHECK(count_patterns(*gm, BoxWindow::cube(1, 14)) == 987);
}

TEST_CASE("transfer count equals materialized enumeration") {
  SystemPtr gm = golden_mean();
  for (Coord n : {1, 2, 5, 9}) {
    auto pats = enumerate_patterns(*gm, BoxWindow::cube(1, n));
    CHECK(count_patterns(*gm, BoxWindow::cube(1, n)) == pats.size());
    for (const Pattern& p : pats) CHECK(gm->pattern_admissible(p));
  }

  // two forbidden words leave exactly the two alternating strings
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0}, {1}}, {1, 1}});
  fb.push_back({BoxWindow{{0}, {1}}, {0, 0}});
  ShiftSystem alt(1, Alphabet{2, {}}, std::move(fb));
  CHECK(count_patterns(alt, BoxWindow::cube(1, 12)) == 2);
}

TEST_CASE("hard-square counts in two dimensions") {
  SystemPtr hs = hard_square();
  // independent sets of the 2x2 and 3x3 grid graphs
  CHECK(count_patterns(*hs, BoxWindow::cube(2, 2)) == 7);
  CHECK(count_patterns(*hs, BoxWindow::cube(2, 3)) == 63);
  auto pats = enumerate_patterns(*hs, BoxWindow::cube(2, 2));
  CHECK(pats.size() == 7);
}

TEST_CASE("enumeration is lexicographic and respects the cap") {
  SystemPtr gm = golden_mean();
  auto pats = enumerate_patterns(*gm, BoxWindow::cube(1, 2));
  REQUIRE(pats.size() == 3);
  CHECK(pats[0].symbols == std::vector<std::uint8_t>{0, 0});
  CHECK(pats[1].symbols == std::vector<std::uint8_t>{0, 1});
  CHECK(pats[2].symbols == std::vector<std::uint8_t>{1, 0});

  Limits tiny;
  tiny.max_patterns = 4;
  CHECK_THROWS_AS(enumerate_patterns(*gm, BoxWindow::cube(1, 10), tiny), CapExceeded);
}

TEST_CASE("safe symbol and admissibility") {
  SystemPtr gm = golden_mean();
  CHECK(gm->safe_symbol() == 0);
  CHECK(gm->max_forbidden_extent() == 2);
  CHECK_FALSE(gm->is_full_shift());
  CHECK(full_shift(3)->is_full_shift());

  Pattern bad{BoxWindow::cube(1, 3), {0, 1, 1}};
  CHECK_FALSE(gm->pattern_admissible(bad));
  Pattern good{BoxWindow::cube(1, 3), {1, 0, 1}};
  CHECK(gm->pattern_admissible(good));
}

TEST_CASE("symbol packing is base-k, most significant first") {
  std::vector<std::uint8_t> syms = {1, 0, 1};
  CHECK(pack_symbols(syms.data(), syms.size(), 2) == 5);
  std::vector<std::uint8_t> base3 = {2, 1};
  CHECK(pack_symbols(base3.data(), base3.size(), 3) == 7);
  CHECK(pack_fits(2, 10));
  CHECK_FALSE(pack_fits(2, 63));
}

TEST_CASE("sliding xor code") {
  SystemPtr x = full_shift(2);
  BlockCode code(x, full_shift(2), BoxWindow{{0}, {1}}, {0, 1, 1, 0});
  Pattern in{BoxWindow{{0}, {3}}, {0, 1, 1, 0}};
  Pattern out = apply_code(code, in);
  CHECK(out.window == BoxWindow{{0}, {2}});
  CHECK(out.symbols == std::vector<std::uint8_t>{1, 0, 1});
  CHECK(code.stencil_volume() == 2);
  CHECK_FALSE(code.is_identity());
}

TEST_CASE("identity and collapse codes") {
  SystemPtr gm = golden_mean();
  BlockCode id = BlockCode::identity(gm);
  CHECK(id.is_identity());
  Pattern p{BoxWindow::cube(1, 4), {0, 1, 0, 0}};
  Pattern q = apply_code(id, p);
  CHECK(q.window == p.window);
  CHECK(q.symbols == p.symbols);

  BlockCode col = BlockCode::collapse(gm);
  CHECK(col.target().alphabet_size() == 1);
  Pattern r = apply_code(col, p);
  CHECK(r.symbols == std::vector<std::uint8_t>{0, 0, 0, 0});
}

TEST_CASE("apply_code erodes by the stencil and rejects too-small inputs") {
  SystemPtr x = full_shift(2);
  BlockCode code(x, full_shift(2), BoxWindow{{0}, {1}}, {0, 1, 1, 0});
  Pattern tiny{BoxWindow{{0}, {0}}, {1}};
  CHECK_THROWS_AS(apply_code(code, tiny), DomainError);
}

TEST_CASE("fiber product of the first-coordinate factor with itself") {
  SystemPtr x = full_shift(6);
  SystemPtr y = full_shift(2);
  BlockCode pi(x, y, BoxWindow{{0}, {0}}, {0, 0, 0, 1, 1, 1});
  BlockCode phi = BlockCode::identity(y);
  FiberSystem fiber = fiber_product(pi, phi);

  CHECK(fiber.total->alphabet_size() == 12);
  // compatible pairs only: each of the 6 x-symbols with its image
  CHECK(count_patterns(*fiber.total, BoxWindow::cube(1, 1)) == 6);
  CHECK(count_patterns(*fiber.total, BoxWindow::cube(1, 3)) == 216);

  // projections recover the parts: pair symbol is x * |y-alphabet| + y
  Pattern pair{BoxWindow::cube(1, 2), {static_cast<std::uint8_t>(4 * 2 + 1),
                                       static_cast<std::uint8_t>(1 * 2 + 0)}};
  CHECK(fiber.total->pattern_admissible(pair));
  Pattern px = apply_code(fiber.to_x, pair);
  CHECK(px.symbols == std::vector<std::uint8_t>{4, 1});
  Pattern py = apply_code(fiber.to_base, pair);
  CHECK(py.symbols == std::vector<std::uint8_t>{1, 0});

  // incompatible pair symbols are forbidden
  Pattern mismatch{BoxWindow::cube(1, 1), {static_cast<std::uint8_t>(4 * 2 + 0)}};
  CHECK_FALSE(fiber.total->pattern_admissible(mismatch));

  CHECK_THROWS_AS(fiber_product(pi, BlockCode::identity(full_shift(3))), ConfigError);
}
