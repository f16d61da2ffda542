#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "presslab/window.hpp"

namespace presslab {

struct Alphabet {
  int size = 0;
  std::vector<std::string> labels;  // optional; empty or exactly `size` entries
};

// Finite pattern: symbols over the sites of `window` in site-lexicographic order.
struct Pattern {
  BoxWindow window;
  std::vector<std::uint8_t> symbols;

  std::uint8_t at(std::uint64_t index) const { return symbols[index]; }
  std::uint8_t at_site(const Site& g) const { return symbols[window.index_of(g)]; }
};

// Forbidden pattern of an SFT; shape is stored normalized with lo = 0.
struct ForbiddenPattern {
  BoxWindow shape;
  std::vector<std::uint8_t> symbols;
};

// Enumeration caps. Exceeding them raises CapExceeded; callers never get
// silently truncated results.
struct Limits {
  std::uint64_t max_patterns = 10'000'000;
  std::uint64_t max_bytes = 2ull * 1024 * 1024 * 1024;
};

// Z^d subshift of finite type under the local-admissibility convention: a
// pattern is admissible on w when no forbidden pattern occurs fully inside w.
// Local admissibility is decidable at every scale (global extensibility is not
// for d >= 2); systems with a safe symbol coincide with the extensible reading.
class ShiftSystem {
 public:
  ShiftSystem(int dim, Alphabet alphabet, std::vector<ForbiddenPattern> forbidden);

  int dim() const { return dim_; }
  int alphabet_size() const { return alphabet_.size; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<ForbiddenPattern>& forbidden() const { return forbidden_; }
  bool is_full_shift() const { return forbidden_.empty(); }
  Coord max_forbidden_extent() const { return max_extent_; }
  // Symbol absent from every forbidden pattern (-1 if none). With a safe
  // symbol every locally admissible pattern extends to a point of the system.
  int safe_symbol() const { return safe_symbol_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool pattern_admissible(const Pattern& p) const;
  bool operator==(const ShiftSystem& other) const;

 private:
  int dim_;
  Alphabet alphabet_;
  std::vector<ForbiddenPattern> forbidden_;
  Coord max_extent_ = 1;
  int safe_symbol_ = -1;
  std::vector<std::string> warnings_;
};

using SystemPtr = std::shared_ptr<const ShiftSystem>;

// Streams every admissible pattern on w in lexicographic symbol order, by
// backtracking with per-site constraint triggers. Throws CapExceeded past
// limits.max_patterns.
void for_each_admissible(const ShiftSystem& sys, const BoxWindow& w, const Limits& limits,
                         const std::function<void(const std::vector<std::uint8_t>&)>& fn);

// Materialized enumeration (lexicographic order, emptiness is an error).
std::vector<Pattern> enumerate_patterns(const ShiftSystem& sys, const BoxWindow& w,
                                        const Limits& limits = Limits{});

// Exact admissible-pattern count. d=1 applies the transfer matrix (L - W)
// times to the start vector and never materializes patterns; d>=2 enumerates
// under the cap. Integer arithmetic; overflow raises CapExceeded.
std::uint64_t count_patterns(const ShiftSystem& sys, const BoxWindow& w,
                             const Limits& limits = Limits{});

// Sliding-block code source -> target. The rule reads the source restricted to
// v + stencil and outputs the target symbol at v; `rule` is a full table over
// stencil patterns packed base-k in site order. Centered stencils [-r, r]^d
// are the common case but one-sided stencils are allowed.
class BlockCode {
 public:
  BlockCode(SystemPtr source, SystemPtr target, BoxWindow stencil,
            std::vector<std::uint8_t> rule, bool probe_checks = true);

  static BlockCode identity(SystemPtr sys);
  // Collapse onto a one-symbol full shift (used to realize plain pressure).
  static BlockCode collapse(SystemPtr source);

  const ShiftSystem& source() const { return *source_; }
  const ShiftSystem& target() const { return *target_; }
  SystemPtr source_ptr() const { return source_; }
  SystemPtr target_ptr() const { return target_; }
  const BoxWindow& stencil() const { return stencil_; }
  std::uint64_t stencil_volume() const { return stencil_.volume(); }
  std::uint8_t rule_at(std::uint64_t packed_block) const { return rule_[packed_block]; }
  bool is_identity() const;

 private:
  SystemPtr source_;
  SystemPtr target_;
  BoxWindow stencil_;
  std::vector<std::uint8_t> rule_;
};

// Applies the code to a finite pattern; the output lives on the window eroded
// by the stencil. DomainError if the eroded window is empty.
Pattern apply_code(const BlockCode& code, const Pattern& p);

// Fiber product X x_Y Y' of pi: X -> Y and phi: Y' -> Y, realized as an SFT on
// the pair alphabet with the compatibility constraint pi(x) = phi(y') compiled
// into forbidden patterns. Projections are radius-0 block codes.
struct FiberSystem {
  SystemPtr total;
  BlockCode to_base;  // fiber -> Y' (the refined factor)
  BlockCode to_x;     // fiber -> X  (forgets the refinement)
};

FiberSystem fiber_product(const BlockCode& pi, const BlockCode& phi);

// Base-k packing of symbol blocks, most significant symbol first.
inline std::uint64_t pack_symbols(const std::uint8_t* syms, std::size_t n, int k) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v = v * static_cast<std::uint64_t>(k) + syms[i];
  return v;
}
bool pack_fits(int k, std::uint64_t n);  // k^n <= 2^62

}  // namespace presslab
