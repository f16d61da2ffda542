#pragma once

#include <vector>

#include "presslab/shiftspace.hpp"
#include "presslab/window.hpp"

namespace presslab {

class Measure;

// Locally constant potential: a full value table over the patterns on the
// centered block [-radius, radius]^d, packed base-k in site order. Birkhoff
// sums over finite windows are exact.
class Potential {
 public:
  Potential(const ShiftSystem& sys, Coord radius, std::vector<double> table);
  static Potential zero(const ShiftSystem& sys, Coord radius = 0);

  int dim() const { return dim_; }
  int alphabet_size() const { return alphabet_; }
  Coord radius() const { return radius_; }
  const BoxWindow& block() const { return block_; }
  const std::vector<double>& table() const { return table_; }
  // Max |f| over admissible blocks (cached at construction).
  double sup_norm() const { return sup_norm_; }
  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }

  double value_packed(std::uint64_t packed) const { return table_[packed]; }
  // f at the translate g of a pattern that determines g + block.
  double value_at(const Pattern& p, const Site& g) const;

 private:
  int dim_;
  int alphabet_;
  Coord radius_;
  BoxWindow block_;
  std::vector<double> table_;
  double sup_norm_ = 0.0;
  double min_value_ = 0.0;
  double max_value_ = 0.0;
};

// Sum of f over the translates in F. Requires p to determine F inflated by
// the radius; site-lexicographic compensated accumulation.
double birkhoff_sum(const Potential& f, const Pattern& p, const BoxWindow& F);

struct SupResult {
  double value;
  bool exact;  // false only for the certified-bound fallback
};

// Exact max of S_F f over admissible completions of b to F inflated by the
// radius (backtracking over the missing collar sites). If the completion
// space exceeds the cap: with allow_bound_fallback the certified upper bound
// interior-sum + (affected sites) * sup_norm is returned flagged inexact,
// otherwise CapExceeded. An empty completion space yields -inf (empty
// cylinder). b must determine at least F itself.
SupResult cylinder_sup(const Potential& f, const Pattern& b, const ShiftSystem& sys,
                       const BoxWindow& F, const Limits& limits = Limits{},
                       bool allow_bound_fallback = false);

// Expectation of f under an invariant measure handle (exact finite sum over
// the block marginal). Defined with the measure module.
double integrate(const Potential& f, const Measure& mu, const ShiftSystem& sys);

// Table algebra used by the property suites. Results are rebound to `sys` so
// cached norms stay fresh.
Potential lifted(const Potential& f, const ShiftSystem& sys, Coord radius);
Potential add(const Potential& f, const Potential& h, const ShiftSystem& sys);
Potential scaled(const Potential& f, const ShiftSystem& sys, double a);
Potential shifted(const Potential& f, const ShiftSystem& sys, double c);
// f composed with the translation by g: (translated f)(x) = f(g x).
Potential translated(const Potential& f, const ShiftSystem& sys, const Site& g);

// f composed with a single-site code into the code's source system:
// (pullback f)(x) = f(phi(x)). Same radius; DomainError unless phi's stencil
// is the origin and f lives on phi's target.
Potential pullback(const Potential& f, const BlockCode& phi);

}  // namespace presslab
