#pragma once

#include <vector>

#include "presslab/potential.hpp"
#include "presslab/pressure.hpp"
#include "presslab/shiftspace.hpp"

namespace presslab {

enum class MeasureKind { kBernoulli, kMarkov };

// Shift-invariant measure handle restricted to the families the optimizer
// searches: i.i.d. site measures (any dimension) and stationary first-order
// Markov chains (dimension 1). Cylinder probabilities and entropy rates are
// closed form; nothing here is sampled.
class Measure {
 public:
  static Measure bernoulli(int dim, std::vector<double> probs);
  // transition is a k x k row-stochastic matrix, row index = current symbol.
  // The stationary distribution is solved for at construction.
  static Measure markov(std::vector<double> transition);
  // Maximal-entropy Markov chain of a 1-step SFT (dimension 1, forbidden
  // extent <= 2), built from the adjacency spectral data.
  static Measure parry(const ShiftSystem& sys);

  MeasureKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int alphabet_size() const { return k_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& transition() const { return trans_; }
  const std::vector<double>& stationary() const { return stat_; }
  double site_marginal(int symbol) const;

  double cylinder_prob(const Pattern& p) const;
  double entropy_rate() const;
  // True when every forbidden pattern of sys carries cylinder probability 0,
  // i.e. the measure actually lives on the system.
  bool supported_on(const ShiftSystem& sys) const;

 private:
  Measure() = default;

  MeasureKind kind_ = MeasureKind::kBernoulli;
  int dim_ = 1;
  int k_ = 0;
  std::vector<double> probs_;  // bernoulli site distribution
  std::vector<double> trans_;  // markov rows
  std::vector<double> stat_;   // stationary distribution (markov)
};

// Finitely supported weights over the patterns of one window, kept in
// lexicographic pattern order. Backing store for Gibbs candidates, block
// marginals and pushforwards.
struct PatternWeights {
  BoxWindow window;
  std::vector<Pattern> patterns;
  std::vector<double> weights;

  double total() const;
  // -sum w log w over positive entries (natural log), compensated, in
  // storage order.
  double entropy() const;
};

// Marginal of mu on the admissible patterns of w.
PatternWeights measure_block_weights(const Measure& mu, const ShiftSystem& sys, const BoxWindow& w,
                                     const Limits& limits = Limits{});

// Image weights under the code; patterns land on the window eroded by the
// stencil and colliding images are summed.
PatternWeights pushforward_weights(const BlockCode& code, const PatternWeights& src);

// Marginal of the pushforward measure (code applied to mu) on the target
// window, computed by a forward filter over source contexts so the source
// window is never enumerated. Dimension 1.
PatternWeights pushforward_block_weights(const BlockCode& code, const Measure& mu,
                                         const BoxWindow& w_target, const Limits& limits = Limits{});

struct EntropyEstimate {
  enum class Kind { kExact, kConditional, kBlockUpper };
  double value;
  Kind kind;
};

// Entropy rate of the pushforward of mu under the code. Exact closed forms
// when the code is the identity or mu is Bernoulli with a single-site stencil;
// otherwise the conditional-entropy estimator H(depth) - H(depth - 1) in
// dimension 1, and the block upper bound H(cube(depth)) / volume above.
EntropyEstimate pushforward_entropy_rate(const BlockCode& code, const Measure& mu, Coord depth,
                                         const Limits& limits = Limits{});

// The finite-window Gibbs candidate: weight of a source pattern B is
// Z_{F,A(B)}^(omega-1) e^{sup of S_F f over the B-cylinder} / Z_F.
PatternWeights gibbs_candidate(const WeightedInstance& inst, const BoxWindow& w,
                               const Limits& limits = Limits{});

// Its image weights: A gets Z_{F,A}^omega / Z_F, directly from the partition
// data (no second enumeration).
PatternWeights gibbs_pushforward(const PartitionResult& part, double omega);

// The finite-window identity the Gibbs candidate satisfies exactly:
// omega H(delta) + (1 - omega) H(image delta) + omega sum delta sup = log Z.
struct GibbsIdentity {
  double entropy_x;
  double entropy_y;
  double integral_sup;
  double lhs;
  double log_z;
  double defect;  // lhs - log_z
};

GibbsIdentity gibbs_identity_terms(const WeightedInstance& inst, const BoxWindow& w,
                                   const Limits& limits = Limits{});

// Fits a family measure to empirical statistics of the weights, counted over
// the sites of `core` (single-site frequencies for Bernoulli, adjacent-pair
// frequencies for Markov; the stationary distribution is re-solved from the
// fitted rows). Warm-start heuristic, no optimality claim.
Measure project_to_family(const PatternWeights& pw, const ShiftSystem& sys, MeasureKind kind,
                          const BoxWindow& core);

// Expectation of f under the weights read off at one reference translate (the
// lexicographically lowest site whose block the window determines). Used to
// integrate against finite-window candidates, which need not be invariant.
double reference_site_integral(const Potential& f, const PatternWeights& pw);

}  // namespace presslab
