#include "presslab/potential.hpp"

#include <algorithm>
#include <cmath>

#include "presslab/errors.hpp"
#include "presslab/numeric.hpp"

namespace presslab {

namespace {

std::uint64_t table_size(int k, const BoxWindow& block) {
  std::uint64_t vol = block.volume();
  if (!pack_fits(k, vol)) throw CapExceeded("potential block too large for a value table");
  std::uint64_t n = 1;
  for (std::uint64_t i = 0; i < vol; ++i) n *= static_cast<std::uint64_t>(k);
  return n;
}

}  // namespace

Potential::Potential(const ShiftSystem& sys, Coord radius, std::vector<double> table)
    : dim_(sys.dim()),
      alphabet_(sys.alphabet_size()),
      radius_(radius),
      block_(Site(sys.dim(), -radius), Site(sys.dim(), radius)),
      table_(std::move(table)) {
  if (radius_ < 0) throw ConfigError("potential radius must be >= 0");
  std::uint64_t expect = table_size(alphabet_, block_);
  if (table_.size() != expect) throw ConfigError("potential table size must be alphabet^|block|");
  for (double v : table_) {
    if (!std::isfinite(v)) throw ConfigError("potential table must be finite");
  }
  bool first = true;
  for_each_admissible(sys, block_, Limits{}, [&](const std::vector<std::uint8_t>& s) {
    double v = table_[pack_symbols(s.data(), s.size(), alphabet_)];
    if (first) {
      min_value_ = max_value_ = v;
      first = false;
    } else {
      min_value_ = std::min(min_value_, v);
      max_value_ = std::max(max_value_, v);
    }
  });
  sup_norm_ = std::max(std::abs(min_value_), std::abs(max_value_));
}

Potential Potential::zero(const ShiftSystem& sys, Coord radius) {
  BoxWindow block(Site(sys.dim(), -radius), Site(sys.dim(), radius));
  return Potential(sys, radius, std::vector<double>(table_size(sys.alphabet_size(), block), 0.0));
}

double Potential::value_at(const Pattern& p, const Site& g) const {
  std::uint64_t n = block_.volume();
  std::uint64_t packed = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    Site cell = block_.site_at(i);
    for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += g[a];
    packed = packed * static_cast<std::uint64_t>(alphabet_) + p.at_site(cell);
  }
  return table_[packed];
}

double birkhoff_sum(const Potential& f, const Pattern& p, const BoxWindow& F) {
  if (!p.window.contains_box(F.inflated(f.radius())))
    throw DomainError("pattern does not determine the inflated Birkhoff window");
  CompensatedSum acc;
  std::uint64_t n = F.volume();
  for (std::uint64_t i = 0; i < n; ++i) acc.add(f.value_at(p, F.site_at(i)));
  return acc.value();
}

SupResult cylinder_sup(const Potential& f, const Pattern& b, const ShiftSystem& sys,
                       const BoxWindow& F, const Limits& limits, bool allow_bound_fallback) {
  if (!b.window.contains_box(F)) throw DomainError("cylinder pattern must determine the window itself");
  BoxWindow need = F.inflated(f.radius());
  if (b.window.contains_box(need)) {
    return SupResult{birkhoff_sum(f, b, F), true};
  }

  // Hull carrying both the fixed pattern and the inflated window.
  BoxWindow h = b.window;
  for (int a = 0; a < h.dim(); ++a) {
    h.lo[a] = std::min(h.lo[a], need.lo[a]);
    h.hi[a] = std::max(h.hi[a], need.hi[a]);
  }
  std::uint64_t h_vol = h.volume();
  Pattern full{h, std::vector<std::uint8_t>(h_vol, 0)};
  std::vector<bool> known(h_vol, false);
  std::uint64_t b_vol = b.window.volume();
  for (std::uint64_t i = 0; i < b_vol; ++i) {
    Site g = b.window.site_at(i);
    full.symbols[h.index_of(g)] = b.symbols[i];
    known[h.index_of(g)] = true;
  }
  std::vector<std::uint64_t> missing;  // hull indices of undetermined sum-relevant sites
  std::uint64_t need_vol = need.volume();
  for (std::uint64_t i = 0; i < need_vol; ++i) {
    std::uint64_t idx = h.index_of(need.site_at(i));
    if (!known[idx]) missing.push_back(idx);
  }

  const int k = sys.alphabet_size();

  // Completion count guard.
  double log_count = static_cast<double>(missing.size()) * std::log(static_cast<double>(k));
  if (log_count > std::log(static_cast<double>(limits.max_patterns))) {
    if (!allow_bound_fallback) throw CapExceeded("cylinder completion space exceeds max_patterns");
    CompensatedSum interior;
    std::uint64_t affected = 0;
    std::uint64_t fn = F.volume();
    for (std::uint64_t i = 0; i < fn; ++i) {
      Site g = F.site_at(i);
      BoxWindow blk = f.block().translated(g);
      if (b.window.contains_box(blk)) {
        interior.add(f.value_at(b, g));
      } else {
        ++affected;
      }
    }
    return SupResult{interior.value() + static_cast<double>(affected) * f.sup_norm(), false};
  }

  // Placements that can ever be decided: all cells in known-or-missing sites.
  struct Check {
    std::vector<std::pair<std::uint32_t, std::uint8_t>> cells;
  };
  std::vector<std::vector<Check>> by_depth(missing.size());
  std::vector<std::int64_t> missing_rank(h_vol, -1);
  for (std::size_t i = 0; i < missing.size(); ++i) missing_rank[missing[i]] = static_cast<std::int64_t>(i);
  bool fixed_conflict = false;
  for (const ForbiddenPattern& fp : sys.forbidden()) {
    auto anchors = h.eroded_by(fp.shape);
    if (!anchors) continue;
    std::uint64_t n_anchor = anchors->volume();
    std::uint64_t shape_vol = fp.shape.volume();
    for (std::uint64_t ai = 0; ai < n_anchor; ++ai) {
      Site g = anchors->site_at(ai);
      Check ck;
      std::int64_t depth = -1;
      bool usable = true;
      bool fixed_match = true;
      for (std::uint64_t si = 0; si < shape_vol; ++si) {
        Site cell = fp.shape.site_at(si);
        for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += g[a];
        std::uint64_t idx = h.index_of(cell);
        if (known[idx]) {
          if (full.symbols[idx] != fp.symbols[si]) fixed_match = false;
          continue;
        }
        if (missing_rank[idx] < 0) {
          usable = false;  // touches a hull corner outside pattern and sum support
          break;
        }
        depth = std::max(depth, missing_rank[idx]);
        ck.cells.emplace_back(static_cast<std::uint32_t>(idx), fp.symbols[si]);
      }
      if (!usable) continue;
      if (depth < 0) {
        if (fixed_match) fixed_conflict = true;  // b itself contains the pattern
        continue;
      }
      if (!fixed_match) continue;  // a fixed cell already disagrees
      by_depth[depth].push_back(std::move(ck));
    }
  }
  if (fixed_conflict) return SupResult{kNegInf, true};

  double best = kNegInf;
  std::uint64_t leaves = 0;
  std::int64_t m = static_cast<std::int64_t>(missing.size());
  if (m == 0) return SupResult{birkhoff_sum(f, full, F), true};
  std::vector<std::uint8_t> choice(missing.size(), 0);
  std::int64_t t = 0;
  while (t >= 0) {
    if (choice[t] >= k) {
      --t;
      if (t >= 0) ++choice[t];
      continue;
    }
    full.symbols[missing[t]] = choice[t];
    bool ok = true;
    for (const Check& ck : by_depth[t]) {
      bool match = true;
      for (auto [idx, sym] : ck.cells) {
        if (full.symbols[idx] != sym) {
          match = false;
          break;
        }
      }
      if (match) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++choice[t];
      continue;
    }
    if (t + 1 == m) {
      if (++leaves > limits.max_patterns) throw CapExceeded("cylinder completion space exceeds max_patterns");
      best = std::max(best, birkhoff_sum(f, full, F));
      ++choice[t];
    } else {
      ++t;
      choice[t] = 0;
    }
  }
  return SupResult{best, true};
}

namespace {

Potential rebuild(const ShiftSystem& sys, Coord radius,
                  const std::function<double(const std::vector<std::uint8_t>&)>& eval) {
  BoxWindow block(Site(sys.dim(), -radius), Site(sys.dim(), radius));
  std::uint64_t vol = block.volume();
  if (!pack_fits(sys.alphabet_size(), vol)) throw CapExceeded("potential block too large for a value table");
  std::uint64_t n = 1;
  for (std::uint64_t i = 0; i < vol; ++i) n *= static_cast<std::uint64_t>(sys.alphabet_size());
  std::vector<double> table(n);
  std::vector<std::uint8_t> syms(vol);
  for (std::uint64_t code = 0; code < n; ++code) {
    std::uint64_t rem = code;
    for (std::uint64_t i = vol; i-- > 0;) {
      syms[i] = static_cast<std::uint8_t>(rem % sys.alphabet_size());
      rem /= sys.alphabet_size();
    }
    table[code] = eval(syms);
  }
  return Potential(sys, radius, std::move(table));
}

// Value of f at offset `at` inside a block pattern on [-radius, radius]^d.
double sub_value(const Potential& f, const BoxWindow& block, const std::vector<std::uint8_t>& syms,
                 const Site& at) {
  std::uint64_t n = f.block().volume();
  std::uint64_t packed = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    Site cell = f.block().site_at(i);
    for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += at[a];
    packed = packed * static_cast<std::uint64_t>(f.alphabet_size()) + syms[block.index_of(cell)];
  }
  return f.value_packed(packed);
}

}  // namespace

Potential lifted(const Potential& f, const ShiftSystem& sys, Coord radius) {
  if (radius < f.radius()) throw DomainError("cannot lift a potential to a smaller radius");
  if (radius == f.radius()) return f;
  BoxWindow block(Site(sys.dim(), -radius), Site(sys.dim(), radius));
  Site origin(sys.dim(), 0);
  return rebuild(sys, radius,
                 [&](const std::vector<std::uint8_t>& syms) { return sub_value(f, block, syms, origin); });
}

Potential add(const Potential& f, const Potential& h, const ShiftSystem& sys) {
  Coord r = std::max(f.radius(), h.radius());
  Potential lf = lifted(f, sys, r);
  Potential lh = lifted(h, sys, r);
  std::vector<double> table(lf.table());
  for (std::size_t i = 0; i < table.size(); ++i) table[i] += lh.table()[i];
  return Potential(sys, r, std::move(table));
}

Potential scaled(const Potential& f, const ShiftSystem& sys, double a) {
  std::vector<double> table(f.table());
  for (double& v : table) v *= a;
  return Potential(sys, f.radius(), std::move(table));
}

Potential shifted(const Potential& f, const ShiftSystem& sys, double c) {
  std::vector<double> table(f.table());
  for (double& v : table) v += c;
  return Potential(sys, f.radius(), std::move(table));
}

Potential translated(const Potential& f, const ShiftSystem& sys, const Site& g) {
  Coord shift = 0;
  for (Coord c : g) shift = std::max(shift, std::abs(c));
  Coord r = f.radius() + shift;
  BoxWindow block(Site(sys.dim(), -r), Site(sys.dim(), r));
  return rebuild(sys, r,
                 [&](const std::vector<std::uint8_t>& syms) { return sub_value(f, block, syms, g); });
}

Potential pullback(const Potential& f, const BlockCode& phi) {
  const ShiftSystem& src = phi.source();
  if (phi.stencil().volume() != 1 || phi.stencil().lo != Site(src.dim(), 0))
    throw DomainError("pullback: code stencil must be the origin");
  if (f.dim() != src.dim() || f.alphabet_size() != phi.target().alphabet_size())
    throw DomainError("pullback: potential does not live on the code target");
  return rebuild(src, f.radius(), [&](const std::vector<std::uint8_t>& syms) {
    std::vector<std::uint8_t> mapped(syms.size());
    for (std::size_t i = 0; i < syms.size(); ++i) mapped[i] = phi.rule_at(syms[i]);
    return f.value_packed(pack_symbols(mapped.data(), mapped.size(), f.alphabet_size()));
  });
}

}  // namespace presslab
