#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "presslab/measure.hpp"
#include "presslab/potential.hpp"
#include "presslab/pressure.hpp"

namespace presslab {

struct OptimizeOptions {
  MeasureKind family = MeasureKind::kMarkov;
  Coord entropy_depth = 10;  // pushforward conditional-estimator depth
  int restarts = 8;
  int max_iter_per_param = 200;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  bool warm_start = true;
  Coord warm_side = 6;  // window for the Gibbs-candidate warm start
  bool record_trace = false;
};

// Best objective seen at a simplex iteration; restart -1 is the warm start.
struct OptTracePoint {
  int restart;
  std::uint64_t iteration;
  double objective;
};

struct OptimizeResult {
  Measure measure;
  double objective;  // omega h_mu + (1 - omega) h_pushforward + omega integral
  double entropy_x;
  double entropy_y;
  EntropyEstimate::Kind entropy_y_kind;
  double integral;
  int best_restart;        // -1 when the warm start won
  std::uint64_t evaluations;
  std::vector<OptTracePoint> trace;  // populated only with record_trace
};

// Maximizes the weighted variational objective over the family by Nelder-Mead
// on softmax coordinates (Bernoulli: one logit per symbol; Markov: one logit
// per admissible successor, row-wise). Deterministic for a fixed seed: fixed
// restart schedule, index-ordered tie breaks. The warm start is one extra
// restart, so enabling it never lowers the reported maximum.
OptimizeResult optimize(const WeightedInstance& inst, const OptimizeOptions& opt = OptimizeOptions{},
                        const Limits& limits = Limits{});

// Family measure fitted to the Gibbs candidate of a small window.
Measure gibbs_warm_start(const WeightedInstance& inst, MeasureKind family, Coord side,
                         const Limits& limits = Limits{});

// Two-sided enclosure of the weighted pressure: certified window upper bound
// against the best family lower bound. gap_refined uses the volume-difference
// quotient (sharper, not certified); certified_ok asserts the ordering that
// must hold whenever entropy_y is exact.
struct SandwichCertificate {
  PressureReport upper;
  OptimizeResult lower;
  double gap_refined;    // increment estimate - objective
  double gap_certified;  // fekete bound - objective
  bool certified_ok;     // gap_certified >= -1e-9
};

SandwichCertificate sandwich(const WeightedInstance& inst, const std::vector<BoxWindow>& windows,
                             const OptimizeOptions& opt = OptimizeOptions{},
                             const Limits& limits = Limits{});

// One finite-window inequality of the pressure functional, checked with both
// sides reported. For the two identities (constant shift, window splitting is
// an inequality) ok means |lhs - rhs| <= tol resp. lhs <= rhs + tol.
struct PropertyCheck {
  std::string name;
  double lhs;
  double rhs;
  double slack;  // rhs - lhs
  bool ok;
};

// The window-level inequalities the pressure estimates rest on: monotonicity
// in f, the sup-norm sandwich around the zero potential, the Lipschitz bound,
// midpoint convexity, exact constant shifts, the translate (cocycle) bound,
// and splitting subadditivity (the fekete certificate's engine). All hold
// exactly at every window, so tol only absorbs float roundoff.
std::vector<PropertyCheck> pressure_properties_suite(const WeightedInstance& inst, const BoxWindow& w,
                                                     const Potential& g, double shift_c,
                                                     Coord translate, double tol = 1e-9,
                                                     const Limits& limits = Limits{});

// Tangency test of a candidate (given as window weights) against the pressure
// functional: for each direction g the pairing omega * E_cand[S_w g] must stay
// below the partition response log Z(f + g) - log Z(f). Exact (up to float)
// when the candidate is the window Gibbs candidate; a genuine discriminator
// for everything else.
struct CriterionDirection {
  double pairing;
  double response;
  double violation;  // pairing - response
};

struct CriterionReport {
  std::vector<CriterionDirection> directions;
  double worst_violation;
  bool ok;
};

CriterionReport measure_criterion(const WeightedInstance& inst, const PatternWeights& candidate,
                                  const BoxWindow& w, int n_directions, Coord direction_radius,
                                  std::uint64_t seed, double tol, const Limits& limits = Limits{});

// Projected-gradient ascent on the concave violation functional
// g -> omega E_cand[S_w g] - (log Z(f + g) - log Z(f)) over the sup-norm unit
// ball of radius-`direction_radius` tables. The gradient is exact: expected
// block counts under the Gibbs candidate of f + g. Returns the best direction
// found; a positive violation certifies the candidate is not the equilibrium
// window weights.
struct AscentResult {
  std::vector<double> direction_table;
  Coord direction_radius;
  double violation;  // per window volume
  int steps;
};

AscentResult criterion_ascent(const WeightedInstance& inst, const PatternWeights& candidate,
                              const BoxWindow& w, Coord direction_radius, int max_steps,
                              double step_size, const Limits& limits = Limits{});

// Equilibrium diagnosis of a family measure: pressure defect against the
// certified and refined bounds, sampled tangency, and entropy concavity on a
// mixture of Gibbs weights.
struct EquilibriumReport {
  double pressure_certified;
  double pressure_refined;
  double objective;
  EntropyEstimate::Kind entropy_y_kind;
  double defect_certified;  // pressure_certified - objective
  double defect_refined;    // pressure_refined - objective
  CriterionReport tangency;
  double mixture_entropy_slack;  // H(mix) - mean H, >= 0 by concavity
  bool ok;
};

EquilibriumReport equilibrium_check(const WeightedInstance& inst, const Measure& mu,
                                    const std::vector<BoxWindow>& windows, int n_directions,
                                    std::uint64_t seed, double tangency_tol,
                                    const Limits& limits = Limits{});

// Weighted topological entropy: pressure of the zero potential.
PressureReport weighted_entropy_report(const std::shared_ptr<const BlockCode>& code, double omega,
                                       Coord collar, const std::vector<BoxWindow>& windows,
                                       const Limits& limits = Limits{});

// Self-affine carpet data: an n x m expanding grid (n columns >= m rows) with
// row_counts[j] chosen cells in row j. The symbolic model is the full shift on
// the cells factoring onto the full shift on the occupied rows.
struct CarpetSpec {
  int n = 3;
  int m = 2;
  std::vector<int> row_counts;
};

struct CarpetResult {
  double omega;             // log m / log n
  PressureReport report;    // weighted entropy schedule
  double weighted_entropy;  // certified bound from the schedule
  double dimension;         // weighted_entropy / log m
  double dimension_closed;  // log_m sum_j row_counts[j]^omega
};

CarpetResult carpet_dimension(const CarpetSpec& spec, const std::vector<BoxWindow>& windows,
                              const Limits& limits = Limits{});

// Entropy of an invariant measure recovered from the pressure functional:
// h = inf over f of (P(f) - integral f dmu), attained at the log-probability
// potential. Each grid entry is scored with its certified window bound, so
// the minimum is itself an upper bound on the entropy; it is tight whenever
// the attaining potential is in the grid and the window bounds are sharp.
struct EntropyRecovery {
  double value;
  std::size_t best_index;
  std::vector<double> per_potential;  // fekete bound minus integral, per entry
};

EntropyRecovery entropy_from_pressure(SystemPtr sys, const Measure& mu,
                                      const std::vector<Potential>& grid,
                                      const std::vector<BoxWindow>& windows,
                                      const Limits& limits = Limits{});

}  // namespace presslab
