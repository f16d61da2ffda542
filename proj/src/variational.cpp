#include "presslab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "presslab/errors.hpp"
#include "presslab/numeric.hpp"

namespace presslab {

namespace {

// Softmax coordinates for the searched family. Bernoulli: one logit per
// symbol. Markov: one logit per admissible successor, row by row; transitions
// at inadmissible pairs are pinned to zero so every point of the search space
// is supported on the system.
struct ParamSpace {
  MeasureKind family;
  int dim = 1;
  int k = 0;
  std::vector<std::vector<int>> allowed;  // markov successor lists
  std::size_t size = 0;

  Measure to_measure(const std::vector<double>& theta) const {
    if (family == MeasureKind::kBernoulli) {
      return Measure::bernoulli(dim, softmax(theta.data(), static_cast<std::size_t>(k)));
    }
    std::vector<double> t(static_cast<std::size_t>(k) * k, 0.0);
    std::size_t off = 0;
    for (int s = 0; s < k; ++s) {
      std::vector<double> row = softmax(theta.data() + off, allowed[static_cast<std::size_t>(s)].size());
      for (std::size_t i = 0; i < row.size(); ++i)
        t[static_cast<std::size_t>(s) * k + allowed[static_cast<std::size_t>(s)][i]] = row[i];
      off += row.size();
    }
    return Measure::markov(std::move(t));
  }

  std::vector<double> from_measure(const Measure& mu) const {
    std::vector<double> theta;
    theta.reserve(size);
    auto logit = [](double p) { return std::log(std::max(p, 1e-12)); };
    if (family == MeasureKind::kBernoulli) {
      for (double p : mu.probs()) theta.push_back(logit(p));
      return theta;
    }
    for (int s = 0; s < k; ++s)
      for (int u : allowed[static_cast<std::size_t>(s)])
        theta.push_back(logit(mu.transition()[static_cast<std::size_t>(s) * k + u]));
    return theta;
  }

  static std::vector<double> softmax(const double* v, std::size_t n) {
    double mx = v[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, v[i]);
    std::vector<double> out(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::exp(v[i] - mx);
      sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
  }
};

ParamSpace make_space(const WeightedInstance& inst, MeasureKind family) {
  const ShiftSystem& x = inst.code->source();
  ParamSpace sp;
  sp.family = family;
  sp.dim = x.dim();
  sp.k = x.alphabet_size();
  if (family == MeasureKind::kBernoulli) {
    if (!x.is_full_shift())
      throw ConfigError("bernoulli family cannot be supported on a constrained system");
    sp.size = static_cast<std::size_t>(sp.k);
    return sp;
  }
  if (x.dim() != 1) throw ConfigError("markov family needs dimension 1");
  if (x.max_forbidden_extent() > 2)
    throw ConfigError("markov family needs a 1-step presentation (forbidden extent <= 2)");
  sp.allowed.resize(static_cast<std::size_t>(sp.k));
  for (int s = 0; s < sp.k; ++s) {
    for (int u = 0; u < sp.k; ++u) {
      Pattern two{BoxWindow{{0}, {1}}, {static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(u)}};
      if (x.pattern_admissible(two)) sp.allowed[static_cast<std::size_t>(s)].push_back(u);
    }
    if (sp.allowed[static_cast<std::size_t>(s)].empty())
      throw ConfigError("markov family: a symbol has no admissible successor");
    sp.size += sp.allowed[static_cast<std::size_t>(s)].size();
  }
  return sp;
}

struct ObjectiveTerms {
  double hx;
  double hy;
  EntropyEstimate::Kind hy_kind;
  double integral;
  double value;
};

ObjectiveTerms objective_terms(const WeightedInstance& inst, const Measure& mu, Coord depth,
                               const Limits& limits) {
  ObjectiveTerms t;
  t.hx = mu.entropy_rate();
  EntropyEstimate hy = pushforward_entropy_rate(*inst.code, mu, depth, limits);
  t.hy = hy.value;
  t.hy_kind = hy.kind;
  t.integral = integrate(inst.f, mu, inst.code->source());
  t.value = inst.omega * t.hx + (1.0 - inst.omega) * t.hy + inst.omega * t.integral;
  return t;
}

struct NmOut {
  std::vector<double> x;
  double value;
};

// Nelder-Mead ascent with the textbook coefficients (reflect 1, expand 2,
// contract 1/2, shrink 1/2). Deterministic: stable ordering, index tie-break.
template <class F>
NmOut nelder_mead_max(F&& fn, std::vector<double> x0, double step, int max_iter, double tol,
                      std::uint64_t& evals,
                      std::vector<std::pair<std::uint64_t, double>>* trace = nullptr) {
  const std::size_t n = x0.size();
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return fn(x);
  };
  if (n == 0) return {std::move(x0), eval(x0)};

  struct Vertex {
    std::vector<double> x;
    double v;
  };
  std::vector<Vertex> s;
  s.reserve(n + 1);
  s.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = x0;
    x[i] += step;
    s.push_back({x, eval(x)});
  }
  auto better = [](const Vertex& a, const Vertex& b) { return a.v > b.v; };

  for (int iter = 0; iter < max_iter; ++iter) {
    std::stable_sort(s.begin(), s.end(), better);
    if (trace) trace->emplace_back(static_cast<std::uint64_t>(iter), s.front().v);
    if (s.front().v - s.back().v <= tol) break;

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c[j] += s[i].x[j];
    for (double& v : c) v /= static_cast<double>(n);
    const Vertex& worst = s.back();

    auto blend = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = c[j] + t * (c[j] - worst.x[j]);
      return x;
    };

    std::vector<double> xr = blend(1.0);
    double vr = eval(xr);
    if (vr > s.front().v) {
      std::vector<double> xe = blend(2.0);
      double ve = eval(xe);
      if (ve > vr) {
        s.back() = {std::move(xe), ve};
      } else {
        s.back() = {std::move(xr), vr};
      }
      continue;
    }
    if (vr > s[n - 1].v) {
      s.back() = {std::move(xr), vr};
      continue;
    }
    std::vector<double> xc = blend(-0.5);
    double vc = eval(xc);
    if (vc > worst.v) {
      s.back() = {std::move(xc), vc};
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) s[i].x[j] = s[0].x[j] + 0.5 * (s[i].x[j] - s[0].x[j]);
      s[i].v = eval(s[i].x);
    }
  }
  std::stable_sort(s.begin(), s.end(), better);
  return {std::move(s.front().x), s.front().v};
}

}  // namespace

Measure gibbs_warm_start(const WeightedInstance& inst, MeasureKind family, Coord side,
                         const Limits& limits) {
  BoxWindow w = BoxWindow::cube(inst.code->source().dim(), side);
  PatternWeights cand = gibbs_candidate(inst, w, limits);
  return project_to_family(cand, inst.code->source(), family, w);
}

OptimizeResult optimize(const WeightedInstance& inst, const OptimizeOptions& opt,
                        const Limits& limits) {
  if (opt.restarts < 1) throw ConfigError("optimize: needs at least one restart");
  ParamSpace space = make_space(inst, opt.family);
  std::uint64_t evals = 0;
  auto fn = [&](const std::vector<double>& theta) {
    return objective_terms(inst, space.to_measure(theta), opt.entropy_depth, limits).value;
  };

  std::vector<std::pair<int, std::vector<double>>> starts;
  starts.emplace_back(0, std::vector<double>(space.size, 0.0));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.5);
  for (int r = 1; r < opt.restarts; ++r) {
    std::vector<double> theta(space.size);
    for (double& v : theta) v = gauss(rng);
    starts.emplace_back(r, std::move(theta));
  }
  if (opt.warm_start) {
    try {
      starts.emplace_back(-1, space.from_measure(gibbs_warm_start(inst, opt.family, opt.warm_side, limits)));
    } catch (const CapExceeded&) {
      // warm start is best effort; the cold restarts stand on their own
    }
  }

  const int cap = opt.max_iter_per_param * std::max<int>(1, static_cast<int>(space.size));
  bool have = false;
  NmOut best{};
  int best_label = 0;
  std::vector<OptTracePoint> trace;
  for (auto& [label, x0] : starts) {
    std::vector<std::pair<std::uint64_t, double>> local;
    NmOut r = nelder_mead_max(fn, std::move(x0), 0.5, cap, opt.tol, evals,
                              opt.record_trace ? &local : nullptr);
    for (const auto& [it, v] : local) trace.push_back({label, it, v});
    if (!have || r.value > best.value || (r.value == best.value && r.x < best.x)) {
      best = std::move(r);
      best_label = label;
      have = true;
    }
  }

  Measure mu = space.to_measure(best.x);
  ObjectiveTerms t = objective_terms(inst, mu, opt.entropy_depth, limits);
  return OptimizeResult{std::move(mu), t.value,    t.hx,       t.hy, t.hy_kind,
                        t.integral,    best_label, evals,      std::move(trace)};
}

SandwichCertificate sandwich(const WeightedInstance& inst, const std::vector<BoxWindow>& windows,
                             const OptimizeOptions& opt, const Limits& limits) {
  SandwichCertificate cert{pressure_estimate(inst, windows, limits), optimize(inst, opt, limits),
                           0.0, 0.0, false};
  cert.gap_refined = cert.upper.increment_estimate - cert.lower.objective;
  cert.gap_certified = cert.upper.fekete_bound - cert.lower.objective;
  cert.certified_ok = cert.gap_certified >= -1e-9;
  return cert;
}

std::vector<PropertyCheck> pressure_properties_suite(const WeightedInstance& inst, const BoxWindow& w,
                                                     const Potential& g, double shift_c,
                                                     Coord translate, double tol,
                                                     const Limits& limits) {
  const ShiftSystem& x = inst.code->source();
  auto log_z = [&](const Potential& f, const BoxWindow& win) {
    WeightedInstance v = inst;
    v.f = f;
    return weighted_partition(v, win, limits).log_z;
  };
  const double vol = static_cast<double>(w.volume());
  const double lzf = log_z(inst.f, w);
  std::vector<PropertyCheck> out;
  auto push_le = [&](std::string name, double lhs, double rhs) {
    out.push_back({std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs + tol});
  };
  auto push_eq = [&](std::string name, double lhs, double rhs) {
    out.push_back({std::move(name), lhs, rhs, rhs - lhs, std::abs(lhs - rhs) <= tol});
  };

  // raising the potential raises the partition sum
  Potential gplus = shifted(g, x, -g.min_value());
  push_le("monotone_in_potential", lzf, log_z(add(inst.f, gplus, x), w));

  // two-sided bound from the zero potential and the admissible value range
  double lz0 = log_z(Potential::zero(x), w);
  double lo = lz0 + inst.omega * vol * inst.f.min_value();
  double hi = lz0 + inst.omega * vol * inst.f.max_value();
  out.push_back({"value_range_bound", lzf, hi, std::min(lzf - lo, hi - lzf),
                 lzf >= lo - tol && lzf <= hi + tol});

  // |log Z(f) - log Z(g)| <= omega |F| max |f - g|
  double lzg = log_z(g, w);
  Potential diff = add(inst.f, scaled(g, x, -1.0), x);
  push_le("lipschitz_in_potential", std::abs(lzf - lzg), inst.omega * vol * diff.sup_norm());

  // midpoint convexity in the potential
  push_le("midpoint_convexity", log_z(scaled(add(inst.f, g, x), x, 0.5), w), 0.5 * (lzf + lzg));

  // constants shift the pressure by exactly omega c
  push_eq("constant_shift", log_z(shifted(inst.f, x, shift_c), w),
          lzf + inst.omega * shift_c * vol);

  // composing with a translation moves log Z at most by the symmetric
  // difference of the windows times the sup norm
  Site t(static_cast<std::size_t>(x.dim()), 0);
  t[0] = translate;
  push_le("translate_bound", std::abs(log_z(translated(inst.f, x, t), w) - lzf),
          inst.omega * inst.f.sup_norm() *
              static_cast<double>(translate_symdiff_size(w, t)));

  // splitting the window is subadditive (the certificate engine)
  if (w.extent(0) < 2) throw DomainError("property suite needs a splittable window");
  BoxWindow w1 = w, w2 = w;
  Coord mid = w.lo[0] + (w.extent(0) / 2) - 1;
  w1.hi[0] = mid;
  w2.lo[0] = mid + 1;
  push_le("window_splitting", lzf, log_z(inst.f, w1) + log_z(inst.f, w2));

  return out;
}

CriterionReport measure_criterion(const WeightedInstance& inst, const PatternWeights& candidate,
                                  const BoxWindow& w, int n_directions, Coord direction_radius,
                                  std::uint64_t seed, double tol, const Limits& limits) {
  const ShiftSystem& x = inst.code->source();
  if (!candidate.window.contains_box(w.inflated(direction_radius)))
    throw DomainError("measure_criterion: candidate window cannot pair with these directions");
  const double base = weighted_partition(inst, w, limits).log_z;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t table_size = Potential::zero(x, direction_radius).table().size();

  CriterionReport rep;
  rep.worst_violation = kNegInf;
  for (int d = 0; d < n_directions; ++d) {
    std::vector<double> table(table_size);
    for (double& v : table) v = gauss(rng);
    Potential dir(x, direction_radius, table);

    CompensatedSum pairing;
    for (std::size_t i = 0; i < candidate.patterns.size(); ++i)
      pairing.add(candidate.weights[i] * birkhoff_sum(dir, candidate.patterns[i], w));

    WeightedInstance v = inst;
    v.f = add(inst.f, dir, x);
    double response = weighted_partition(v, w, limits).log_z - base;
    CriterionDirection cd{inst.omega * pairing.value(), response, 0.0};
    cd.violation = cd.pairing - cd.response;
    rep.worst_violation = std::max(rep.worst_violation, cd.violation);
    rep.directions.push_back(cd);
  }
  rep.ok = rep.worst_violation <= tol;
  return rep;
}

namespace {

// Expected block counts over the w-translates under the window Gibbs candidate
// of the instance: the exact gradient of log Z in the potential table.
std::vector<double> gibbs_block_counts(const WeightedInstance& inst, const BoxWindow& w,
                                       Coord radius, std::size_t table_size, const Limits& limits,
                                       double& log_z_out) {
  PartitionResult part = weighted_partition(inst, w, limits);
  log_z_out = part.log_z;
  if (!part.b_window.contains_box(w.inflated(std::max(radius, inst.f.radius()))))
    throw DomainError("criterion_ascent: collar too small for the direction radius");
  auto za = part.per_a_map();
  const ShiftSystem& x = inst.code->source();
  const int k = x.alphabet_size();
  BoxWindow block(Site(static_cast<std::size_t>(x.dim()), -radius),
                  Site(static_cast<std::size_t>(x.dim()), radius));
  std::vector<double> counts(table_size, 0.0);
  const std::uint64_t n = w.volume();
  for_each_admissible(x, part.b_window, limits, [&](const std::vector<std::uint8_t>& syms) {
    Pattern b{part.b_window, syms};
    Pattern a = apply_code(*inst.code, b);
    SupResult sup = cylinder_sup(inst.f, b, x, w, limits, false);
    if (sup.value == kNegInf) return;
    double wgt = std::exp((inst.omega - 1.0) * za.at(a.symbols) + sup.value - part.log_z);
    for (std::uint64_t i = 0; i < n; ++i) {
      Site g = w.site_at(i);
      std::uint64_t packed = 0;
      for (std::uint64_t j = 0; j < block.volume(); ++j) {
        Site cell = block.site_at(j);
        for (std::size_t ax = 0; ax < cell.size(); ++ax) cell[ax] += g[ax];
        packed = packed * static_cast<std::uint64_t>(k) + b.at_site(cell);
      }
      counts[packed] += wgt;
    }
  });
  return counts;
}

}  // namespace

AscentResult criterion_ascent(const WeightedInstance& inst, const PatternWeights& candidate,
                              const BoxWindow& w, Coord direction_radius, int max_steps,
                              double step_size, const Limits& limits) {
  const ShiftSystem& x = inst.code->source();
  if (!candidate.window.contains_box(w.inflated(direction_radius)))
    throw DomainError("criterion_ascent: candidate window cannot pair with these directions");
  const std::size_t table_size = Potential::zero(x, direction_radius).table().size();
  const double vol = static_cast<double>(w.volume());
  BoxWindow block(Site(static_cast<std::size_t>(x.dim()), -direction_radius),
                  Site(static_cast<std::size_t>(x.dim()), direction_radius));
  const int k = x.alphabet_size();

  // candidate side of the pairing is linear in the direction table
  std::vector<double> cand_counts(table_size, 0.0);
  const std::uint64_t n = w.volume();
  for (std::size_t i = 0; i < candidate.patterns.size(); ++i) {
    for (std::uint64_t j = 0; j < n; ++j) {
      Site g = w.site_at(j);
      std::uint64_t packed = 0;
      for (std::uint64_t c = 0; c < block.volume(); ++c) {
        Site cell = block.site_at(c);
        for (std::size_t ax = 0; ax < cell.size(); ++ax) cell[ax] += g[ax];
        packed = packed * static_cast<std::uint64_t>(k) + candidate.patterns[i].at_site(cell);
      }
      cand_counts[packed] += candidate.weights[i];
    }
  }

  double base = weighted_partition(inst, w, limits).log_z;
  std::vector<double> table(table_size, 0.0);
  AscentResult best{table, direction_radius, 0.0, 0};
  for (int step = 1; step <= max_steps; ++step) {
    WeightedInstance v = inst;
    v.f = add(inst.f, Potential(x, direction_radius, table), x);
    double lz = 0.0;
    std::vector<double> exp_counts =
        gibbs_block_counts(v, w, direction_radius, table_size, limits, lz);
    for (std::size_t i = 0; i < table_size; ++i) {
      double grad = inst.omega * (cand_counts[i] - exp_counts[i]) / vol;
      table[i] = std::clamp(table[i] + step_size * grad, -1.0, 1.0);
    }
    CompensatedSum pairing;
    for (std::size_t i = 0; i < table_size; ++i) pairing.add(table[i] * cand_counts[i]);
    WeightedInstance v2 = inst;
    v2.f = add(inst.f, Potential(x, direction_radius, table), x);
    double response = weighted_partition(v2, w, limits).log_z - base;
    double violation = (inst.omega * pairing.value() - response) / vol;
    if (violation > best.violation) {
      best.direction_table = table;
      best.violation = violation;
      best.steps = step;
    }
  }
  return best;
}

EquilibriumReport equilibrium_check(const WeightedInstance& inst, const Measure& mu,
                                    const std::vector<BoxWindow>& windows, int n_directions,
                                    std::uint64_t seed, double tangency_tol, const Limits& limits) {
  PressureReport rep = pressure_estimate(inst, windows, limits);
  const ShiftSystem& x = inst.code->source();
  Coord depth = std::min<Coord>(windows.back().extent(0), 12);
  ObjectiveTerms t = objective_terms(inst, mu, depth, limits);

  EquilibriumReport out;
  out.pressure_certified = rep.fekete_bound;
  out.pressure_refined = rep.increment_estimate;
  out.objective = t.value;
  out.entropy_y_kind = t.hy_kind;
  out.defect_certified = rep.fekete_bound - t.value;
  out.defect_refined = rep.increment_estimate - t.value;

  const BoxWindow& w = windows.back();
  PartitionResult part = weighted_partition(inst, w, limits);
  Coord dir_r = part.b_window.contains_box(w.inflated(1)) ? 1 : 0;
  PatternWeights cand = measure_block_weights(mu, x, part.b_window, limits);
  out.tangency = measure_criterion(inst, cand, w, n_directions, dir_r, seed, tangency_tol, limits);

  // entropy concavity on a half-half mixture of two Gibbs weight vectors
  BoxWindow ws = windows.front();
  PatternWeights d1 = gibbs_candidate(inst, ws, limits);
  WeightedInstance pert = inst;
  std::vector<double> ptable(inst.f.table());
  for (std::size_t i = 0; i < ptable.size(); ++i) ptable[i] += (i % 2 == 0) ? 0.25 : -0.25;
  pert.f = Potential(x, inst.f.radius(), std::move(ptable));
  PatternWeights d2 = gibbs_candidate(pert, ws, limits);
  double slack = 0.0;
  if (d1.patterns.size() == d2.patterns.size()) {
    PatternWeights mix = d1;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
      mix.weights[i] = 0.5 * (d1.weights[i] + d2.weights[i]);
    slack = mix.entropy() - 0.5 * (d1.entropy() + d2.entropy());
  }
  out.mixture_entropy_slack = slack;

  bool defect_ok = out.defect_certified >= -1e-9 || t.hy_kind != EntropyEstimate::Kind::kExact;
  out.ok = out.tangency.ok && slack >= -1e-9 && defect_ok;
  return out;
}

PressureReport weighted_entropy_report(const std::shared_ptr<const BlockCode>& code, double omega,
                                       Coord collar, const std::vector<BoxWindow>& windows,
                                       const Limits& limits) {
  return pressure_estimate(make_instance(code, Potential::zero(code->source()), omega, collar),
                           windows, limits);
}

CarpetResult carpet_dimension(const CarpetSpec& spec, const std::vector<BoxWindow>& windows,
                              const Limits& limits) {
  if (spec.m < 2 || spec.n < spec.m)
    throw ConfigError("carpet: needs n >= m >= 2");
  if (static_cast<int>(spec.row_counts.size()) != spec.m)
    throw ConfigError("carpet: row_counts must have one entry per row");
  int total = 0;
  for (int a : spec.row_counts) {
    if (a < 0 || a > spec.n) throw ConfigError("carpet: row count out of range");
    total += a;
  }
  if (total < 1) throw ConfigError("carpet: no cells chosen");

  // symbolic model: full shift on the cells factoring onto the occupied rows
  std::vector<std::uint8_t> rule;
  int used_rows = 0;
  for (int j = 0; j < spec.m; ++j) {
    if (spec.row_counts[static_cast<std::size_t>(j)] == 0) continue;
    for (int i = 0; i < spec.row_counts[static_cast<std::size_t>(j)]; ++i)
      rule.push_back(static_cast<std::uint8_t>(used_rows));
    ++used_rows;
  }
  auto cells = std::make_shared<const ShiftSystem>(1, Alphabet{total, {}},
                                                   std::vector<ForbiddenPattern>{});
  auto rows = std::make_shared<const ShiftSystem>(1, Alphabet{used_rows, {}},
                                                  std::vector<ForbiddenPattern>{});
  auto code = std::make_shared<const BlockCode>(cells, rows, BoxWindow{{0}, {0}}, std::move(rule));

  CarpetResult out;
  out.omega = std::log(static_cast<double>(spec.m)) / std::log(static_cast<double>(spec.n));
  out.report = weighted_entropy_report(code, out.omega, 0, windows, limits);
  out.weighted_entropy = out.report.fekete_bound;
  out.dimension = out.weighted_entropy / std::log(static_cast<double>(spec.m));
  CompensatedSum s;
  for (int a : spec.row_counts)
    if (a > 0) s.add(std::pow(static_cast<double>(a), out.omega));
  out.dimension_closed = std::log(s.value()) / std::log(static_cast<double>(spec.m));
  return out;
}

EntropyRecovery entropy_from_pressure(SystemPtr sys, const Measure& mu,
                                      const std::vector<Potential>& grid,
                                      const std::vector<BoxWindow>& windows,
                                      const Limits& limits) {
  if (grid.empty()) throw ConfigError("entropy_from_pressure: empty potential grid");
  if (!mu.supported_on(*sys))
    throw DomainError("entropy_from_pressure: measure not supported on the system");
  EntropyRecovery out;
  out.per_potential.reserve(grid.size());
  for (const Potential& f : grid) {
    PressureReport rep = plain_pressure(sys, f, windows, 0, limits);
    out.per_potential.push_back(rep.fekete_bound - integrate(f, mu, *sys));
  }
  out.best_index = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (out.per_potential[i] < out.per_potential[out.best_index]) out.best_index = i;
  out.value = out.per_potential[out.best_index];
  return out;
}

}  // namespace presslab
