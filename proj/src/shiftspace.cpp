#include "presslab/shiftspace.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "presslab/errors.hpp"

namespace presslab {

namespace {

// One forbidden-pattern placement inside a window: symbol constraints keyed by
// site index. `trigger` is the largest site index, so by the time the
// backtracking reaches it every cell is determined.
struct Placement {
  std::vector<std::pair<std::uint32_t, std::uint8_t>> cells;
};

struct AdmissibilityIndex {
  std::uint64_t nsites;
  std::vector<std::vector<Placement>> by_trigger;

  AdmissibilityIndex(const ShiftSystem& sys, const BoxWindow& w) {
    nsites = w.volume();
    if (nsites > 1'000'000) throw CapExceeded("window has too many sites to enumerate");
    by_trigger.resize(nsites);
    for (const ForbiddenPattern& fp : sys.forbidden()) {
      auto anchors = w.eroded_by(fp.shape);
      if (!anchors) continue;
      std::uint64_t shape_vol = fp.shape.volume();
      std::uint64_t n_anchor = anchors->volume();
      for (std::uint64_t ai = 0; ai < n_anchor; ++ai) {
        Site g = anchors->site_at(ai);
        Placement pl;
        pl.cells.reserve(shape_vol);
        std::uint32_t trigger = 0;
        for (std::uint64_t si = 0; si < shape_vol; ++si) {
          Site cell = fp.shape.site_at(si);
          for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += g[a];
          auto idx = static_cast<std::uint32_t>(w.index_of(cell));
          pl.cells.emplace_back(idx, fp.symbols[si]);
          trigger = std::max(trigger, idx);
        }
        by_trigger[trigger].push_back(std::move(pl));
      }
    }
  }
};

// Iterative depth-first enumeration in lexicographic symbol order.
// visit returning false stops the walk early (used by existence probes).
bool walk_admissible(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits,
                     const std::function<bool(const std::vector<std::uint8_t>&)>& visit) {
  AdmissibilityIndex index(sys, w);
  const int k = sys.alphabet_size();
  const auto n = static_cast<std::int64_t>(index.nsites);
  std::vector<std::uint8_t> syms(index.nsites, 0);
  std::uint64_t emitted = 0;
  std::int64_t t = 0;
  while (t >= 0) {
    if (syms[t] >= k) {
      --t;
      if (t >= 0) ++syms[t];
      continue;
    }
    bool ok = true;
    for (const Placement& pl : index.by_trigger[t]) {
      bool match = true;
      for (auto [idx, sym] : pl.cells) {
        if (syms[idx] != sym) {
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
      ++syms[t];
      continue;
    }
    if (t + 1 == n) {
      if (++emitted > limits.max_patterns) throw CapExceeded("pattern enumeration exceeds max_patterns");
      if (!visit(syms)) return false;
      ++syms[t];
    } else {
      ++t;
      syms[t] = 0;
    }
  }
  return true;
}

bool exists_admissible(const ShiftSystem& sys, const BoxWindow& w) {
  bool found = false;
  walk_admissible(sys, w, Limits{}, [&](const std::vector<std::uint8_t>&) {
    found = true;
    return false;
  });
  return found;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw CapExceeded(what);
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw CapExceeded(what);
  return r;
}

// Exact count for d=1 via the transfer matrix on admissible (W = m-1)-words:
// seed ones, apply the transition L-W times, sum. Patterns never materialize.
std::uint64_t count_1d_transfer(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits) {
  const auto L = static_cast<std::int64_t>(w.volume());
  const int k = sys.alphabet_size();
  const std::int64_t W = std::max<Coord>(sys.max_forbidden_extent(), 1) - 1;
  if (L <= W) {
    std::uint64_t c = 0;
    walk_admissible(sys, w, limits, [&](const std::vector<std::uint8_t>&) {
      ++c;
      return true;
    });
    return c;
  }
  // Forbidden words by width.
  std::vector<std::vector<std::uint8_t>> words;
  for (const ForbiddenPattern& fp : sys.forbidden()) words.push_back(fp.symbols);

  std::vector<std::uint64_t> state_packed;
  std::unordered_map<std::uint64_t, std::uint32_t> state_index;
  if (W == 0) {
    state_packed.push_back(0);
    state_index[0] = 0;
  } else {
    if (!pack_fits(k, static_cast<std::uint64_t>(W))) throw CapExceeded("transfer state space too large");
    BoxWindow head = BoxWindow(Site(1, w.lo[0]), Site(1, w.lo[0] + W - 1));
    walk_admissible(sys, head, limits, [&](const std::vector<std::uint8_t>& s) {
      std::uint64_t p = pack_symbols(s.data(), s.size(), k);
      state_index.emplace(p, static_cast<std::uint32_t>(state_packed.size()));
      state_packed.push_back(p);
      return true;
    });
  }
  const std::size_t S = state_packed.size();
  if (S == 0) return 0;

  // transitions[s*k + sym] = next state or -1.
  std::vector<std::int32_t> next(S * k, -1);
  std::vector<std::uint8_t> block(W + 1);
  // Dropping the oldest symbol: new_state = (old % k^(W-1)) * k + sym.
  std::uint64_t mod = 1;
  for (std::int64_t i = 0; i < W - 1; ++i) mod *= static_cast<std::uint64_t>(k);
  for (std::size_t s = 0; s < S; ++s) {
    std::uint64_t p = state_packed[s];
    for (std::int64_t i = W - 1; i >= 0; --i) {
      block[i] = static_cast<std::uint8_t>(p % k);
      p /= k;
    }
    for (int sym = 0; sym < k; ++sym) {
      block[W] = static_cast<std::uint8_t>(sym);
      bool ok = true;
      for (const auto& word : words) {
        auto len = static_cast<std::int64_t>(word.size());
        if (len > W + 1) continue;  // cannot recur wholly within the retained context
        bool match = true;
        for (std::int64_t i = 0; i < len; ++i) {
          if (block[W + 1 - len + i] != word[i]) {
            match = false;
            break;
          }
        }
        if (match) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      std::uint64_t np = W == 0 ? 0
                                : (state_packed[s] % mod) * static_cast<std::uint64_t>(k) +
                                      static_cast<std::uint64_t>(sym);
      auto it = state_index.find(np);
      if (it != state_index.end()) next[s * k + sym] = static_cast<std::int32_t>(it->second);
    }
  }

  std::vector<std::uint64_t> cur(S, 1), nxt(S);
  for (std::int64_t step = 0; step < L - W; ++step) {
    std::fill(nxt.begin(), nxt.end(), 0);
    for (std::size_t s = 0; s < S; ++s) {
      if (cur[s] == 0) continue;
      for (int sym = 0; sym < k; ++sym) {
        std::int32_t ns = next[s * k + sym];
        if (ns >= 0) nxt[ns] = checked_add(nxt[ns], cur[s], "pattern count overflows 64 bits");
      }
    }
    cur.swap(nxt);
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : cur) total = checked_add(total, c, "pattern count overflows 64 bits");
  // W > 0 start states each stand for one length-W prefix; W == 0 starts from
  // the single empty word, so the loop above ran exactly L times.
  return total;
}

BoxWindow hull(const BoxWindow& a, const BoxWindow& b) {
  BoxWindow out = a;
  for (int i = 0; i < a.dim(); ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return out;
}

}  // namespace

bool pack_fits(int k, std::uint64_t n) {
  std::uint64_t v = 1;
  const std::uint64_t cap = 1ull << 62;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (v > cap / static_cast<std::uint64_t>(k)) return false;
    v *= static_cast<std::uint64_t>(k);
  }
  return true;
}

ShiftSystem::ShiftSystem(int dim, Alphabet alphabet, std::vector<ForbiddenPattern> forbidden)
    : dim_(dim), alphabet_(std::move(alphabet)), forbidden_(std::move(forbidden)) {
  if (dim_ < 1) throw ConfigError("system dimension must be >= 1");
  if (alphabet_.size < 1 || alphabet_.size > 255) throw ConfigError("alphabet size must be in [1, 255]");
  if (!alphabet_.labels.empty() && static_cast<int>(alphabet_.labels.size()) != alphabet_.size)
    throw ConfigError("alphabet labels must be empty or match alphabet size");
  std::vector<bool> used(static_cast<std::size_t>(alphabet_.size), false);
  for (ForbiddenPattern& fp : forbidden_) {
    if (fp.shape.dim() != dim_) throw ConfigError("forbidden pattern dimension disagrees with system");
    if (fp.symbols.size() != fp.shape.volume()) throw ConfigError("forbidden pattern symbol count disagrees with shape");
    for (std::uint8_t s : fp.symbols) {
      if (s >= alphabet_.size) throw ConfigError("forbidden pattern uses symbol outside alphabet");
      used[s] = true;
    }
    // Normalize the shape to lo = 0; translation keeps site order.
    Site shift(dim_);
    for (int a = 0; a < dim_; ++a) shift[a] = -fp.shape.lo[a];
    fp.shape = fp.shape.translated(shift);
    for (int a = 0; a < dim_; ++a) max_extent_ = std::max(max_extent_, fp.shape.extent(a));
  }
  for (int s = 0; s < alphabet_.size; ++s) {
    if (!used[s]) {
      safe_symbol_ = s;
      break;
    }
  }
  if (safe_symbol_ < 0 && !forbidden_.empty())
    warnings_.push_back(
        "no safe symbol: local admissibility may admit patterns with no extension to a full point");
  BoxWindow probe = BoxWindow::cube(dim_, std::max<Coord>(2, max_extent_));
  if (!exists_admissible(*this, probe)) throw DomainError("system admits no pattern on the probe window");
}

bool ShiftSystem::pattern_admissible(const Pattern& p) const {
  for (const ForbiddenPattern& fp : forbidden_) {
    auto anchors = p.window.eroded_by(fp.shape);
    if (!anchors) continue;
    std::uint64_t n_anchor = anchors->volume();
    std::uint64_t shape_vol = fp.shape.volume();
    for (std::uint64_t ai = 0; ai < n_anchor; ++ai) {
      Site g = anchors->site_at(ai);
      bool match = true;
      for (std::uint64_t si = 0; si < shape_vol && match; ++si) {
        Site cell = fp.shape.site_at(si);
        for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += g[a];
        match = p.at_site(cell) == fp.symbols[si];
      }
      if (match) return false;
    }
  }
  return true;
}

bool ShiftSystem::operator==(const ShiftSystem& other) const {
  if (dim_ != other.dim_ || alphabet_.size != other.alphabet_.size) return false;
  if (forbidden_.size() != other.forbidden_.size()) return false;
  for (std::size_t i = 0; i < forbidden_.size(); ++i) {
    if (!(forbidden_[i].shape == other.forbidden_[i].shape)) return false;
    if (forbidden_[i].symbols != other.forbidden_[i].symbols) return false;
  }
  return true;
}

void for_each_admissible(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits,
                         const std::function<void(const std::vector<std::uint8_t>&)>& fn) {
  if (sys.dim() != w.dim()) throw DomainError("window dimension disagrees with system");
  walk_admissible(sys, w, limits, [&](const std::vector<std::uint8_t>& s) {
    fn(s);
    return true;
  });
}

std::vector<Pattern> enumerate_patterns(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits) {
  std::vector<Pattern> out;
  std::uint64_t bytes = 0;
  for_each_admissible(sys, w, limits, [&](const std::vector<std::uint8_t>& s) {
    bytes += s.size() + sizeof(Pattern);
    if (bytes > limits.max_bytes) throw CapExceeded("pattern enumeration exceeds max_bytes");
    out.push_back(Pattern{w, s});
  });
  if (out.empty()) throw DomainError("no admissible pattern on the requested window");
  return out;
}

std::uint64_t count_patterns(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits) {
  if (sys.dim() != w.dim()) throw DomainError("window dimension disagrees with system");
  if (sys.dim() == 1) return count_1d_transfer(sys, w, limits);
  std::uint64_t c = 0;
  for_each_admissible(sys, w, limits, [&](const std::vector<std::uint8_t>&) { ++c; });
  return c;
}

BlockCode::BlockCode(SystemPtr source, SystemPtr target, BoxWindow stencil,
                     std::vector<std::uint8_t> rule, bool probe_checks)
    : source_(std::move(source)), target_(std::move(target)), stencil_(std::move(stencil)), rule_(std::move(rule)) {
  if (!source_ || !target_) throw ConfigError("block code requires source and target systems");
  if (source_->dim() != target_->dim() || stencil_.dim() != source_->dim())
    throw ConfigError("block code dimensions disagree");
  std::uint64_t vol = stencil_.volume();
  if (!pack_fits(source_->alphabet_size(), vol)) throw CapExceeded("stencil too large for rule table");
  std::uint64_t expect = 1;
  for (std::uint64_t i = 0; i < vol; ++i) expect *= static_cast<std::uint64_t>(source_->alphabet_size());
  if (rule_.size() != expect) throw ConfigError("rule table size must be alphabet^|stencil|");
  for (std::uint8_t v : rule_) {
    if (v >= target_->alphabet_size()) throw ConfigError("rule table outputs symbol outside target alphabet");
  }
  if (!probe_checks) return;

  // Probe-window checks: the code must map admissible patterns to admissible
  // target patterns and hit every admissible target pattern. Local checks on a
  // small window; skipped (not failed) when enumeration would blow the cap.
  Coord side = std::max<Coord>(2, target_->max_forbidden_extent());
  BoxWindow wp = BoxWindow::cube(source_->dim(), side);
  BoxWindow wsrc = wp.minkowski_sum(stencil_);
  Limits probe_limits;
  probe_limits.max_patterns = 1'000'000;
  try {
    std::unordered_set<std::uint64_t> images;
    const int kt = target_->alphabet_size();
    std::uint64_t wp_vol = wp.volume();
    if (!pack_fits(kt, wp_vol)) return;
    bool all_admissible = true;
    for_each_admissible(*source_, wsrc, probe_limits, [&](const std::vector<std::uint8_t>& s) {
      Pattern img = apply_code(*this, Pattern{wsrc, s});
      if (!target_->pattern_admissible(img)) all_admissible = false;
      images.insert(pack_symbols(img.symbols.data(), img.symbols.size(), kt));
    });
    if (!all_admissible) throw DomainError("code maps an admissible pattern outside the target system");
    bool onto = true;
    walk_admissible(*target_, wp, probe_limits, [&](const std::vector<std::uint8_t>& s) {
      if (!images.count(pack_symbols(s.data(), s.size(), kt))) onto = false;
      return onto;
    });
    if (!onto) throw DomainError("code is not surjective onto the target on the probe window");
  } catch (const CapExceeded&) {
    // Probe too large to enumerate; construction proceeds unchecked.
  }
}

BlockCode BlockCode::identity(SystemPtr sys) {
  if (!sys) throw ConfigError("identity code requires a system");
  BoxWindow st(Site(sys->dim(), 0), Site(sys->dim(), 0));
  std::vector<std::uint8_t> rule(static_cast<std::size_t>(sys->alphabet_size()));
  for (std::size_t i = 0; i < rule.size(); ++i) rule[i] = static_cast<std::uint8_t>(i);
  return BlockCode(sys, sys, st, std::move(rule), false);
}

BlockCode BlockCode::collapse(SystemPtr source) {
  if (!source) throw ConfigError("collapse code requires a source system");
  auto point = std::make_shared<ShiftSystem>(source->dim(), Alphabet{1, {}}, std::vector<ForbiddenPattern>{});
  BoxWindow st(Site(source->dim(), 0), Site(source->dim(), 0));
  std::vector<std::uint8_t> rule(static_cast<std::size_t>(source->alphabet_size()), 0);
  return BlockCode(std::move(source), std::move(point), st, std::move(rule), false);
}

bool BlockCode::is_identity() const {
  if (!(*source_ == *target_)) return false;
  if (stencil_.volume() != 1) return false;
  for (int a = 0; a < stencil_.dim(); ++a) {
    if (stencil_.lo[a] != 0) return false;
  }
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    if (rule_[i] != i) return false;
  }
  return true;
}

Pattern apply_code(const BlockCode& code, const Pattern& p) {
  auto out_window = p.window.eroded_by(code.stencil());
  if (!out_window) throw DomainError("pattern too small for the code stencil");
  const int ks = code.source().alphabet_size();
  std::uint64_t out_n = out_window->volume();
  std::uint64_t st_n = code.stencil_volume();
  Pattern out{*out_window, std::vector<std::uint8_t>(out_n)};
  for (std::uint64_t i = 0; i < out_n; ++i) {
    Site v = out_window->site_at(i);
    std::uint64_t packed = 0;
    for (std::uint64_t si = 0; si < st_n; ++si) {
      Site cell = code.stencil().site_at(si);
      for (std::size_t a = 0; a < cell.size(); ++a) cell[a] += v[a];
      packed = packed * static_cast<std::uint64_t>(ks) + p.at_site(cell);
    }
    out.symbols[i] = code.rule_at(packed);
  }
  return out;
}

FiberSystem fiber_product(const BlockCode& pi, const BlockCode& phi) {
  if (!(pi.target() == phi.target())) throw ConfigError("fiber product requires codes with the same target");
  const ShiftSystem& x = pi.source();
  const ShiftSystem& y2 = phi.source();
  const int kx = x.alphabet_size();
  const int ky = y2.alphabet_size();
  const int d = x.dim();
  if (y2.dim() != d) throw ConfigError("fiber product dimensions disagree");
  const int kp = kx * ky;
  if (kp > 255) throw CapExceeded("fiber alphabet exceeds 255 symbols");

  Alphabet pair_alphabet;
  pair_alphabet.size = kp;
  if (!x.alphabet().labels.empty() && !y2.alphabet().labels.empty()) {
    for (int a = 0; a < kx; ++a)
      for (int b = 0; b < ky; ++b)
        pair_alphabet.labels.push_back(x.alphabet().labels[a] + "|" + y2.alphabet().labels[b]);
  }

  std::vector<ForbiddenPattern> forbidden;
  // Component constraints, expanded over the free component.
  auto lift = [&](const std::vector<ForbiddenPattern>& fps, bool x_component) {
    for (const ForbiddenPattern& fp : fps) {
      std::uint64_t vol = fp.shape.volume();
      std::uint64_t free_k = static_cast<std::uint64_t>(x_component ? ky : kx);
      if (!pack_fits(static_cast<int>(free_k), vol)) throw CapExceeded("fiber lift too large");
      std::uint64_t combos = 1;
      for (std::uint64_t i = 0; i < vol; ++i) combos = checked_mul(combos, free_k, "fiber lift too large");
      if (combos > 100'000) throw CapExceeded("fiber lift too large");
      for (std::uint64_t c = 0; c < combos; ++c) {
        ForbiddenPattern lifted;
        lifted.shape = fp.shape;
        lifted.symbols.resize(vol);
        std::uint64_t rem = c;
        for (std::uint64_t i = vol; i-- > 0;) {
          auto free_sym = static_cast<std::uint8_t>(rem % free_k);
          rem /= free_k;
          lifted.symbols[i] = x_component
                                  ? static_cast<std::uint8_t>(fp.symbols[i] * ky + free_sym)
                                  : static_cast<std::uint8_t>(free_sym * ky + fp.symbols[i]);
        }
        forbidden.push_back(std::move(lifted));
      }
    }
  };
  lift(x.forbidden(), true);
  lift(y2.forbidden(), false);

  // Compatibility pi(x) = phi(y') compiled over the stencil hull.
  BoxWindow u = hull(pi.stencil(), phi.stencil());
  std::uint64_t u_vol = u.volume();
  if (!pack_fits(kp, u_vol)) throw CapExceeded("fiber compatibility window too large");
  std::uint64_t combos = 1;
  for (std::uint64_t i = 0; i < u_vol; ++i) combos = checked_mul(combos, static_cast<std::uint64_t>(kp), "fiber compatibility too large");
  if (combos > 1'000'000) throw CapExceeded("fiber compatibility window too large");
  std::vector<std::uint64_t> pi_cells, phi_cells;
  for (std::uint64_t si = 0; si < pi.stencil_volume(); ++si) pi_cells.push_back(u.index_of(pi.stencil().site_at(si)));
  for (std::uint64_t si = 0; si < phi.stencil_volume(); ++si) phi_cells.push_back(u.index_of(phi.stencil().site_at(si)));
  std::vector<std::uint8_t> q(u_vol);
  for (std::uint64_t c = 0; c < combos; ++c) {
    std::uint64_t rem = c;
    for (std::uint64_t i = u_vol; i-- > 0;) {
      q[i] = static_cast<std::uint8_t>(rem % kp);
      rem /= kp;
    }
    std::uint64_t packed_x = 0;
    for (std::uint64_t idx : pi_cells) packed_x = packed_x * kx + (q[idx] / ky);
    std::uint64_t packed_y = 0;
    for (std::uint64_t idx : phi_cells) packed_y = packed_y * ky + (q[idx] % ky);
    if (pi.rule_at(packed_x) != phi.rule_at(packed_y)) {
      forbidden.push_back(ForbiddenPattern{u, q});
    }
  }

  auto total = std::make_shared<ShiftSystem>(d, std::move(pair_alphabet), std::move(forbidden));
  BoxWindow st(Site(d, 0), Site(d, 0));
  std::vector<std::uint8_t> rule_base(kp), rule_x(kp);
  for (int s = 0; s < kp; ++s) {
    rule_base[s] = static_cast<std::uint8_t>(s % ky);
    rule_x[s] = static_cast<std::uint8_t>(s / ky);
  }
  BlockCode to_base(total, phi.source_ptr(), st, std::move(rule_base), true);
  BlockCode to_x(total, pi.source_ptr(), st, std::move(rule_x), true);
  return FiberSystem{total, std::move(to_base), std::move(to_x)};
}

}  // namespace presslab
