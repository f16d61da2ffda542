#pragma once

#include <map>
#include <memory>
#include <vector>

#include "presslab/potential.hpp"
#include "presslab/shiftspace.hpp"

namespace presslab {

// One weighted-pressure problem: factor code pi: X -> Y, potential f on X,
// exponent omega in [0, 1], and the collar radius realizing the partition
// diameter (cylinders at collar c fix symbols on the window inflated by c).
struct WeightedInstance {
  std::shared_ptr<const BlockCode> code;
  Potential f;
  double omega = 1.0;
  Coord collar = 0;
  // Permit the certified-bound fallback in cylinder sups instead of failing
  // with CapExceeded; results are then flagged inexact.
  bool allow_sup_fallback = false;
};

WeightedInstance make_instance(std::shared_ptr<const BlockCode> code, Potential f, double omega,
                               Coord collar = 0);

struct PartitionEntry {
  Pattern a;     // Y-pattern on the A-window
  double log_z;  // log Z_{F,A}
};

// log Z_F = log sum over admissible A of Z_{F,A}^omega with
// Z_{F,A} = sum over X-patterns B coding to A of exp(sup over the B-cylinder
// of S_F f). Everything is held in log space; the omega power is an exact
// multiplication there.
struct PartitionResult {
  double log_z;
  std::vector<PartitionEntry> per_a;  // lexicographic in the A-pattern; empty fibers omitted
  BoxWindow a_window;                 // w inflated by collar
  BoxWindow b_window;                 // a_window + code stencil
  bool exact_sup;                     // false if any cylinder sup used the bound fallback

  std::map<std::vector<std::uint8_t>, double> per_a_map() const;
};

// kAuto picks the per-fiber transfer recursion when it applies (d = 1 and the
// B-window already determines every potential translate) and falls back to
// direct enumeration otherwise. The explicit values exist so tests can cross
// check the two paths; kTransfer throws DomainError if its preconditions fail.
enum class PartitionStrategy { kAuto, kGeneric, kTransfer };

PartitionResult weighted_partition(const WeightedInstance& inst, const BoxWindow& w,
                                   const Limits& limits = Limits{},
                                   PartitionStrategy strategy = PartitionStrategy::kAuto);

struct PressureRow {
  Coord side;
  std::uint64_t volume;
  double log_z;
  double estimate;        // log Z / |F|
  double fekete_running;  // min estimate so far: certified upper bound of the limit
  double increment;       // volume-difference quotient vs previous row (refined estimate)
  bool exact_sup;
};

// Windowed pressure estimates over an increasing cube schedule. fekete_bound
// is the certified min-over-rows upper bound (log Z is subadditive over
// disjoint box unions, so every cube row dominates the limit).
// increment_estimate is the last volume-difference quotient: the standard
// refined estimator, reported as extrapolation metadata and not certified.
struct PressureReport {
  std::vector<PressureRow> rows;
  double fekete_bound;
  double increment_estimate;
  bool stabilized;       // last two increments agree within stabilize_tol
  double stabilize_tol;
  bool exact_sup;
};

PressureReport pressure_estimate(const WeightedInstance& inst, const std::vector<BoxWindow>& windows,
                                 const Limits& limits = Limits{}, double stabilize_tol = 1e-3);

// Plain (unweighted) pressure of f on the source system: omega = 1 with the
// collapse code onto the one-symbol shift.
PressureReport plain_pressure(SystemPtr sys, const Potential& f, const std::vector<BoxWindow>& windows,
                              Coord collar = 0, const Limits& limits = Limits{});

// Top conditional entropy of the factor code: per window the max over
// admissible Y-patterns A of log #(preimages of A), normalized by volume.
PressureReport conditional_entropy_top(const std::shared_ptr<const BlockCode>& code,
                                       const std::vector<BoxWindow>& windows, Coord collar = 0,
                                       const Limits& limits = Limits{});

}  // namespace presslab
