#include "presslab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "presslab/errors.hpp"
#include "presslab/numeric.hpp"

namespace presslab {

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigError(std::string(what) + ": probabilities must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ConfigError(std::string(what) + ": probabilities must sum to 1");
}

void normalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
}

// pi T = pi with sum pi = 1; the last balance equation is replaced by the
// normalization (the balance system has rank k - 1 for a unichain).
std::vector<double> solve_stationary(const std::vector<double>& t, int k) {
  std::vector<double> a(static_cast<std::size_t>(k) * (k + 1), 0.0);
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * (k + 1) + j]; };
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      at(i, j) = t[static_cast<std::size_t>(j) * k + i] - (i == j ? 1.0 : 0.0);
  for (int j = 0; j < k; ++j) at(k - 1, j) = 1.0;
  at(k - 1, k) = 1.0;
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int i = col + 1; i < k; ++i)
      if (std::abs(at(i, col)) > std::abs(at(piv, col))) piv = i;
    if (std::abs(at(piv, col)) < 1e-13)
      throw DomainError("transition matrix has no unique stationary distribution");
    if (piv != col)
      for (int j = col; j <= k; ++j) std::swap(at(piv, j), at(col, j));
    for (int i = col + 1; i < k; ++i) {
      double m = at(i, col) / at(col, col);
      for (int j = col; j <= k; ++j) at(i, j) -= m * at(col, j);
    }
  }
  std::vector<double> pi(static_cast<std::size_t>(k), 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double v = at(i, k);
    for (int j = i + 1; j < k; ++j) v -= at(i, j) * pi[static_cast<std::size_t>(j)];
    pi[static_cast<std::size_t>(i)] = v / at(i, i);
  }
  for (double& v : pi)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  normalize(pi);
  return pi;
}

double plogp_entropy(const std::vector<double>& p) {
  CompensatedSum h;
  for (double v : p)
    if (v > 0.0) h.add(-v * std::log(v));
  return h.value();
}

}  // namespace

Measure Measure::bernoulli(int dim, std::vector<double> probs) {
  if (dim < 1) throw ConfigError("bernoulli: dimension must be positive");
  if (probs.empty()) throw ConfigError("bernoulli: empty distribution");
  check_distribution(probs, "bernoulli");
  normalize(probs);
  Measure m;
  m.kind_ = MeasureKind::kBernoulli;
  m.dim_ = dim;
  m.k_ = static_cast<int>(probs.size());
  m.probs_ = std::move(probs);
  return m;
}

Measure Measure::markov(std::vector<double> transition) {
  int k = static_cast<int>(std::llround(std::sqrt(static_cast<double>(transition.size()))));
  if (k < 1 || static_cast<std::size_t>(k) * static_cast<std::size_t>(k) != transition.size())
    throw ConfigError("markov: transition matrix must be square");
  for (int s = 0; s < k; ++s) {
    std::vector<double> row(transition.begin() + static_cast<std::ptrdiff_t>(s) * k,
                            transition.begin() + static_cast<std::ptrdiff_t>(s + 1) * k);
    check_distribution(row, "markov row");
    normalize(row);
    std::copy(row.begin(), row.end(), transition.begin() + static_cast<std::ptrdiff_t>(s) * k);
  }
  Measure m;
  m.kind_ = MeasureKind::kMarkov;
  m.dim_ = 1;
  m.k_ = k;
  m.stat_ = solve_stationary(transition, k);
  m.trans_ = std::move(transition);
  return m;
}

Measure Measure::parry(const ShiftSystem& sys) {
  if (sys.dim() != 1) throw DomainError("parry: dimension 1 only");
  if (sys.max_forbidden_extent() > 2)
    throw DomainError("parry: needs a 1-step presentation (forbidden extent <= 2)");
  const int k = sys.alphabet_size();
  std::vector<double> adj(static_cast<std::size_t>(k) * k, 1.0);
  std::vector<char> dead(static_cast<std::size_t>(k), 0);
  for (const auto& fp : sys.forbidden()) {
    if (fp.shape.extent(0) == 1) {
      dead[fp.symbols[0]] = 1;
    } else {
      adj[static_cast<std::size_t>(fp.symbols[0]) * k + fp.symbols[1]] = 0.0;
    }
  }
  for (int s = 0; s < k; ++s)
    if (dead[static_cast<std::size_t>(s)])
      for (int t = 0; t < k; ++t) {
        adj[static_cast<std::size_t>(s) * k + t] = 0.0;
        adj[static_cast<std::size_t>(t) * k + s] = 0.0;
      }

  // Perron data by power iteration; deterministic (fixed start, fixed order).
  std::vector<double> r(static_cast<std::size_t>(k), 0.0);
  for (int s = 0; s < k; ++s) r[static_cast<std::size_t>(s)] = dead[static_cast<std::size_t>(s)] ? 0.0 : 1.0;
  normalize(r);
  double lambda = 0.0;
  for (int iter = 0; iter < 20000; ++iter) {
    std::vector<double> nr(static_cast<std::size_t>(k), 0.0);
    for (int s = 0; s < k; ++s)
      for (int t = 0; t < k; ++t)
        nr[static_cast<std::size_t>(s)] += adj[static_cast<std::size_t>(s) * k + t] * r[static_cast<std::size_t>(t)];
    double norm = 0.0;
    for (double v : nr) norm += v;
    if (norm <= 0.0) throw DomainError("parry: adjacency admits no transition");
    double delta = 0.0;
    for (int s = 0; s < k; ++s) {
      nr[static_cast<std::size_t>(s)] /= norm;
      delta = std::max(delta, std::abs(nr[static_cast<std::size_t>(s)] - r[static_cast<std::size_t>(s)]));
    }
    r = std::move(nr);
    lambda = norm;
    if (delta < 1e-15) break;
  }
  if (lambda <= 0.0) throw DomainError("parry: spectral radius is zero");

  std::vector<double> t(static_cast<std::size_t>(k) * k, 0.0);
  for (int s = 0; s < k; ++s) {
    if (r[static_cast<std::size_t>(s)] > 1e-12) {
      for (int u = 0; u < k; ++u)
        t[static_cast<std::size_t>(s) * k + u] =
            adj[static_cast<std::size_t>(s) * k + u] * r[static_cast<std::size_t>(u)] /
            (lambda * r[static_cast<std::size_t>(s)]);
    } else {
      // transient symbol: any stochastic row works, mass never reaches it
      for (int u = 0; u < k; ++u) t[static_cast<std::size_t>(s) * k + u] = r[static_cast<std::size_t>(u)];
    }
  }
  return markov(std::move(t));
}

double Measure::site_marginal(int symbol) const {
  if (symbol < 0 || symbol >= k_) throw DomainError("site_marginal: symbol out of range");
  return kind_ == MeasureKind::kBernoulli ? probs_[static_cast<std::size_t>(symbol)]
                                          : stat_[static_cast<std::size_t>(symbol)];
}

double Measure::cylinder_prob(const Pattern& p) const {
  if (p.window.dim() != dim_) throw DomainError("cylinder_prob: dimension mismatch");
  if (kind_ == MeasureKind::kBernoulli) {
    double prob = 1.0;
    for (std::uint8_t s : p.symbols) prob *= probs_[s];
    return prob;
  }
  double prob = stat_[p.symbols[0]];
  for (std::size_t i = 1; i < p.symbols.size(); ++i)
    prob *= trans_[static_cast<std::size_t>(p.symbols[i - 1]) * k_ + p.symbols[i]];
  return prob;
}

double Measure::entropy_rate() const {
  if (kind_ == MeasureKind::kBernoulli) return plogp_entropy(probs_);
  CompensatedSum h;
  for (int s = 0; s < k_; ++s)
    for (int u = 0; u < k_; ++u) {
      double p = trans_[static_cast<std::size_t>(s) * k_ + u];
      if (p > 0.0) h.add(-stat_[static_cast<std::size_t>(s)] * p * std::log(p));
    }
  return h.value();
}

bool Measure::supported_on(const ShiftSystem& sys) const {
  if (sys.dim() != dim_ || sys.alphabet_size() != k_) return false;
  for (const auto& fp : sys.forbidden()) {
    if (cylinder_prob(Pattern{fp.shape, fp.symbols}) > 0.0) return false;
  }
  return true;
}

double PatternWeights::total() const {
  CompensatedSum s;
  for (double w : weights) s.add(w);
  return s.value();
}

double PatternWeights::entropy() const {
  CompensatedSum h;
  for (double w : weights)
    if (w > 0.0) h.add(-w * std::log(w));
  return h.value();
}

PatternWeights measure_block_weights(const Measure& mu, const ShiftSystem& sys, const BoxWindow& w,
                                     const Limits& limits) {
  if (mu.dim() != sys.dim() || mu.alphabet_size() != sys.alphabet_size())
    throw DomainError("measure_block_weights: measure does not live on the system");
  PatternWeights out;
  out.window = w;
  for_each_admissible(sys, w, limits, [&](const std::vector<std::uint8_t>& syms) {
    Pattern p{w, syms};
    out.weights.push_back(mu.cylinder_prob(p));
    out.patterns.push_back(std::move(p));
  });
  return out;
}

PatternWeights pushforward_weights(const BlockCode& code, const PatternWeights& src) {
  auto eroded = src.window.eroded_by(code.stencil());
  if (!eroded) throw DomainError("pushforward_weights: window too small for the stencil");
  std::map<std::vector<std::uint8_t>, double> acc;
  for (std::size_t i = 0; i < src.patterns.size(); ++i) {
    Pattern img = apply_code(code, src.patterns[i]);
    acc[std::move(img.symbols)] += src.weights[i];
  }
  PatternWeights out;
  out.window = *eroded;
  for (auto& [syms, w] : acc) {
    out.patterns.push_back(Pattern{*eroded, syms});
    out.weights.push_back(w);
  }
  return out;
}

PatternWeights pushforward_block_weights(const BlockCode& code, const Measure& mu,
                                         const BoxWindow& w_target, const Limits& limits) {
  const ShiftSystem& x = code.source();
  if (x.dim() != 1 || w_target.dim() != 1)
    throw DomainError("pushforward filter: dimension 1 only");
  if (mu.dim() != 1 || mu.alphabet_size() != x.alphabet_size())
    throw DomainError("pushforward filter: measure does not live on the source");
  const int k = x.alphabet_size();
  const int sten_w = static_cast<int>(code.stencil().extent(0));
  const bool markov = mu.kind() == MeasureKind::kMarkov;
  const int ctx_len = std::max(sten_w - 1, markov ? 1 : 0);
  std::uint64_t states = 1;
  for (int i = 0; i < ctx_len; ++i) {
    states *= static_cast<std::uint64_t>(k);
    if (states > (1ull << 18)) throw CapExceeded("pushforward filter: context state space too large");
  }
  const Coord lx = w_target.extent(0) + code.stencil().extent(0) - 1;

  auto factor = [&](const std::uint8_t* ctx, int n, int sym) -> double {
    if (!markov) return mu.probs()[static_cast<std::size_t>(sym)];
    if (n == 0) return mu.stationary()[static_cast<std::size_t>(sym)];
    return mu.transition()[static_cast<std::size_t>(ctx[n - 1]) * k + sym];
  };

  // Positions t < sten_w - 1 emit nothing; afterwards every step emits the
  // target symbol read from the last sten_w source symbols.
  struct Row {
    std::vector<std::uint8_t> y;
    std::vector<std::uint8_t> xs;
    double p;
  };
  std::vector<Row> rows{{{}, {}, 1.0}};
  const Coord seed = std::min<Coord>(ctx_len, lx);
  for (Coord t = 0; t < seed; ++t) {
    std::vector<Row> grown;
    for (const Row& row : rows) {
      for (int sym = 0; sym < k; ++sym) {
        double f = factor(row.xs.data(), static_cast<int>(row.xs.size()), sym);
        if (f == 0.0) continue;
        Row nr = row;
        nr.p *= f;
        nr.xs.push_back(static_cast<std::uint8_t>(sym));
        if (t >= sten_w - 1) {
          std::uint64_t packed = pack_symbols(nr.xs.data() + (nr.xs.size() - sten_w),
                                              static_cast<std::size_t>(sten_w), k);
          nr.y.push_back(code.rule_at(packed));
        }
        grown.push_back(std::move(nr));
      }
    }
    rows = std::move(grown);
  }

  PatternWeights out;
  out.window = w_target;
  if (lx <= ctx_len) {
    std::map<std::vector<std::uint8_t>, double> acc;
    for (const Row& row : rows) acc[row.y] += row.p;
    for (auto& [syms, w] : acc) {
      out.patterns.push_back(Pattern{w_target, syms});
      out.weights.push_back(w);
    }
    return out;
  }

  std::map<std::vector<std::uint8_t>, std::vector<double>> front;
  for (const Row& row : rows) {
    auto& vec = front.try_emplace(row.y, static_cast<std::size_t>(states), 0.0).first->second;
    vec[pack_symbols(row.xs.data(), row.xs.size(), k)] += row.p;
  }

  const std::uint64_t mod = ctx_len >= 1 ? states / static_cast<std::uint64_t>(k) : 1;
  std::vector<std::uint8_t> ctx(static_cast<std::size_t>(ctx_len) + 1);
  for (Coord t = ctx_len; t < lx; ++t) {
    std::map<std::vector<std::uint8_t>, std::vector<double>> grown;
    for (const auto& [y, vec] : front) {
      for (std::uint64_t s = 0; s < states; ++s) {
        if (vec[s] == 0.0) continue;
        std::uint64_t dec = s;
        for (int i = ctx_len - 1; i >= 0; --i) {
          ctx[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(dec % static_cast<std::uint64_t>(k));
          dec /= static_cast<std::uint64_t>(k);
        }
        for (int sym = 0; sym < k; ++sym) {
          double f = factor(ctx.data(), ctx_len, sym);
          if (f == 0.0) continue;
          ctx[static_cast<std::size_t>(ctx_len)] = static_cast<std::uint8_t>(sym);
          std::uint64_t packed =
              pack_symbols(ctx.data() + (ctx_len + 1 - sten_w), static_cast<std::size_t>(sten_w), k);
          std::vector<std::uint8_t> ykey = y;
          ykey.push_back(code.rule_at(packed));
          std::uint64_t s2 = ctx_len >= 1 ? (s % mod) * static_cast<std::uint64_t>(k) + sym : 0;
          auto& nvec = grown.try_emplace(std::move(ykey), static_cast<std::size_t>(states), 0.0)
                           .first->second;
          nvec[s2] += vec[s] * f;
        }
      }
    }
    front = std::move(grown);
    if (front.size() > limits.max_patterns)
      throw CapExceeded("pushforward filter: too many target patterns");
  }

  for (const auto& [y, vec] : front) {
    CompensatedSum total;
    for (double v : vec) total.add(v);
    out.patterns.push_back(Pattern{w_target, y});
    out.weights.push_back(total.value());
  }
  return out;
}

EntropyEstimate pushforward_entropy_rate(const BlockCode& code, const Measure& mu, Coord depth,
                                         const Limits& limits) {
  if (code.is_identity()) return {mu.entropy_rate(), EntropyEstimate::Kind::kExact};
  if (mu.kind() == MeasureKind::kBernoulli && code.stencil_volume() == 1) {
    // single-site codes push product measures to product measures
    std::vector<double> q(static_cast<std::size_t>(code.target().alphabet_size()), 0.0);
    for (int s = 0; s < code.source().alphabet_size(); ++s)
      q[code.rule_at(static_cast<std::uint64_t>(s))] += mu.probs()[static_cast<std::size_t>(s)];
    return {[&] {
              CompensatedSum h;
              for (double v : q)
                if (v > 0.0) h.add(-v * std::log(v));
              return h.value();
            }(),
            EntropyEstimate::Kind::kExact};
  }
  if (code.source().dim() == 1) {
    if (depth < 2) throw ConfigError("entropy depth must be at least 2");
    double h_n = pushforward_block_weights(code, mu, BoxWindow::cube(1, depth), limits).entropy();
    double h_p = pushforward_block_weights(code, mu, BoxWindow::cube(1, depth - 1), limits).entropy();
    return {h_n - h_p, EntropyEstimate::Kind::kConditional};
  }
  BoxWindow wy = BoxWindow::cube(code.source().dim(), depth);
  PatternWeights src =
      measure_block_weights(mu, code.source(), wy.minkowski_sum(code.stencil()), limits);
  PatternWeights img = pushforward_weights(code, src);
  return {img.entropy() / static_cast<double>(wy.volume()), EntropyEstimate::Kind::kBlockUpper};
}

PatternWeights gibbs_candidate(const WeightedInstance& inst, const BoxWindow& w,
                               const Limits& limits) {
  PartitionResult part = weighted_partition(inst, w, limits);
  auto za = part.per_a_map();
  PatternWeights out;
  out.window = part.b_window;
  const ShiftSystem& x = inst.code->source();
  for_each_admissible(x, part.b_window, limits, [&](const std::vector<std::uint8_t>& syms) {
    Pattern b{part.b_window, syms};
    Pattern a = apply_code(*inst.code, b);
    SupResult sup = cylinder_sup(inst.f, b, x, w, limits, inst.allow_sup_fallback);
    if (sup.value == kNegInf) return;  // empty cylinder carries no mass
    auto it = za.find(a.symbols);
    if (it == za.end()) return;
    double logw = (inst.omega - 1.0) * it->second + sup.value - part.log_z;
    out.patterns.push_back(std::move(b));
    out.weights.push_back(std::exp(logw));
  });
  return out;
}

PatternWeights gibbs_pushforward(const PartitionResult& part, double omega) {
  PatternWeights out;
  out.window = part.a_window;
  for (const auto& e : part.per_a) {
    out.patterns.push_back(e.a);
    out.weights.push_back(std::exp(omega * e.log_z - part.log_z));
  }
  return out;
}

GibbsIdentity gibbs_identity_terms(const WeightedInstance& inst, const BoxWindow& w,
                                   const Limits& limits) {
  PartitionResult part = weighted_partition(inst, w, limits);
  auto za = part.per_a_map();
  const ShiftSystem& x = inst.code->source();
  CompensatedSum hx, integral;
  for_each_admissible(x, part.b_window, limits, [&](const std::vector<std::uint8_t>& syms) {
    Pattern b{part.b_window, syms};
    Pattern a = apply_code(*inst.code, b);
    SupResult sup = cylinder_sup(inst.f, b, x, w, limits, inst.allow_sup_fallback);
    if (sup.value == kNegInf) return;
    double logw = (inst.omega - 1.0) * za.at(a.symbols) + sup.value - part.log_z;
    double wgt = std::exp(logw);
    hx.add(-wgt * logw);
    integral.add(wgt * sup.value);
  });
  CompensatedSum hy;
  for (const auto& e : part.per_a) {
    double logq = inst.omega * e.log_z - part.log_z;
    hy.add(-std::exp(logq) * logq);
  }
  GibbsIdentity out;
  out.entropy_x = hx.value();
  out.entropy_y = hy.value();
  out.integral_sup = integral.value();
  out.lhs = inst.omega * out.entropy_x + (1.0 - inst.omega) * out.entropy_y +
            inst.omega * out.integral_sup;
  out.log_z = part.log_z;
  out.defect = out.lhs - out.log_z;
  return out;
}

Measure project_to_family(const PatternWeights& pw, const ShiftSystem& sys, MeasureKind kind,
                          const BoxWindow& core) {
  if (!pw.window.contains_box(core))
    throw DomainError("project_to_family: core must lie inside the weight window");
  const int k = sys.alphabet_size();
  if (kind == MeasureKind::kBernoulli) {
    std::vector<double> p(static_cast<std::size_t>(k), 0.0);
    const std::uint64_t n = core.volume();
    for (std::size_t i = 0; i < pw.patterns.size(); ++i) {
      for (std::uint64_t j = 0; j < n; ++j) {
        Site g = core.site_at(j);
        p[pw.patterns[i].at_site(g)] += pw.weights[i];
      }
    }
    normalize(p);
    return Measure::bernoulli(sys.dim(), std::move(p));
  }
  if (sys.dim() != 1) throw DomainError("project_to_family: markov fit needs dimension 1");
  std::vector<double> pairs(static_cast<std::size_t>(k) * k, 0.0);
  for (std::size_t i = 0; i < pw.patterns.size(); ++i) {
    const Pattern& p = pw.patterns[i];
    for (Coord g = core.lo[0]; g < core.hi[0]; ++g) {
      std::uint8_t a = p.at_site({g});
      std::uint8_t b = p.at_site({g + 1});
      pairs[static_cast<std::size_t>(a) * k + b] += pw.weights[i];
    }
  }
  for (int s = 0; s < k; ++s) {
    double row = 0.0;
    for (int u = 0; u < k; ++u) row += pairs[static_cast<std::size_t>(s) * k + u];
    if (row > 0.0) {
      for (int u = 0; u < k; ++u) pairs[static_cast<std::size_t>(s) * k + u] /= row;
      continue;
    }
    // unvisited symbol: spread over admissible successors so the matrix stays
    // a chain on the system
    int allowed = 0;
    for (int u = 0; u < k; ++u) {
      Pattern two{BoxWindow{{0}, {1}}, {static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(u)}};
      if (sys.pattern_admissible(two)) {
        pairs[static_cast<std::size_t>(s) * k + u] = 1.0;
        ++allowed;
      }
    }
    if (allowed == 0)
      for (int u = 0; u < k; ++u) pairs[static_cast<std::size_t>(s) * k + u] = 1.0, allowed = k;
    for (int u = 0; u < k; ++u) pairs[static_cast<std::size_t>(s) * k + u] /= allowed;
  }
  return Measure::markov(std::move(pairs));
}

double reference_site_integral(const Potential& f, const PatternWeights& pw) {
  auto core = pw.window.eroded_by(f.block());
  if (!core) throw DomainError("reference_site_integral: window cannot determine the potential");
  const Site g0 = core->lo;
  CompensatedSum acc;
  for (std::size_t i = 0; i < pw.patterns.size(); ++i)
    acc.add(pw.weights[i] * f.value_at(pw.patterns[i], g0));
  return acc.value();
}

double integrate(const Potential& f, const Measure& mu, const ShiftSystem& sys) {
  if (mu.dim() != sys.dim() || mu.alphabet_size() != sys.alphabet_size())
    throw DomainError("integrate: measure does not live on the system");
  CompensatedSum acc;
  const int k = sys.alphabet_size();
  for_each_admissible(sys, f.block(), Limits{}, [&](const std::vector<std::uint8_t>& syms) {
    double pr = mu.cylinder_prob(Pattern{f.block(), syms});
    if (pr > 0.0) acc.add(pr * f.value_packed(pack_symbols(syms.data(), syms.size(), k)));
  });
  return acc.value();
}

}  // namespace presslab
