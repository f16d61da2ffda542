#include "presslab/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>

#include "presslab/errors.hpp"
#include "presslab/numeric.hpp"
#include "presslab/parallel.hpp"

namespace presslab {

namespace {

std::uint64_t ipow_capped(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

struct Word {
  int len;
  std::vector<std::uint8_t> syms;
};

struct TransferPlan {
  bool usable = false;
  int context = 0;           // symbols of lookback any local check may need
  std::uint64_t states = 1;  // alphabet^context
  std::vector<Word> words;
};

constexpr std::uint64_t kMaxTransferStates = 1ull << 18;

// The recursion is valid only when the B-window determines every translate of
// the potential (wB contains w inflated by the radius); then every cylinder
// sup degenerates to an exact Birkhoff sum and factorizes over positions.
TransferPlan plan_transfer(const WeightedInstance& inst, const BoxWindow& w, const BoxWindow& wB) {
  TransferPlan plan;
  const ShiftSystem& x = inst.code->source();
  if (x.dim() != 1) return plan;
  if (!wB.contains_box(w.inflated(inst.f.radius()))) return plan;
  Coord ctx = 0;
  for (const auto& fp : x.forbidden()) ctx = std::max(ctx, fp.shape.extent(0) - 1);
  ctx = std::max(ctx, inst.code->stencil().extent(0) - 1);
  ctx = std::max(ctx, 2 * inst.f.radius());
  if (ctx > 40) return plan;
  std::uint64_t states =
      ipow_capped(static_cast<std::uint64_t>(x.alphabet_size()), static_cast<std::uint64_t>(ctx),
                  kMaxTransferStates);
  if (states > kMaxTransferStates) return plan;
  plan.usable = true;
  plan.context = static_cast<int>(ctx);
  plan.states = states;
  for (const auto& fp : x.forbidden())
    plan.words.push_back({static_cast<int>(fp.shape.extent(0)), fp.symbols});
  return plan;
}

// log Z_{F,A}: sum over source patterns B on wB coding to a_syms on wA of
// exp(S_w f(B)). State = last `context` symbols; every local effect (forbidden
// word, code output, potential translate) fires at the position where its
// block completes, so each fires exactly once per pattern.
double transfer_log_z(const WeightedInstance& inst, const TransferPlan& plan, const BoxWindow& w,
                      const BoxWindow& wA, const BoxWindow& wB,
                      const std::vector<std::uint8_t>& a_syms) {
  const int k = inst.code->source().alphabet_size();
  const int ctx_len = plan.context;
  const Coord L = wB.extent(0);
  const Coord shi = inst.code->stencil().hi[0];
  const Coord r = inst.f.radius();
  const int sten_w = static_cast<int>(inst.code->stencil().extent(0));
  const int block_w = static_cast<int>(2 * r + 1);

  // ctx points at the last n symbols placed, newest last; n is always large
  // enough for any check that applies at position t (plan.context caps every
  // block width, and blocks reaching before wB.lo never apply).
  auto step = [&](Coord t, const std::uint8_t* ctx, int n, double& fsum) -> bool {
    for (const auto& word : plan.words) {
      if (word.len > t + 1) continue;
      if (std::equal(word.syms.begin(), word.syms.end(), ctx + (n - word.len))) return false;
    }
    const Coord u = wB.lo[0] + t;
    const Coord v = u - shi;
    if (v >= wA.lo[0] && v <= wA.hi[0]) {
      std::uint64_t packed = pack_symbols(ctx + (n - sten_w), static_cast<std::size_t>(sten_w), k);
      if (inst.code->rule_at(packed) != a_syms[static_cast<std::size_t>(v - wA.lo[0])]) return false;
    }
    const Coord g = u - r;
    if (g >= w.lo[0] && g <= w.hi[0]) {
      fsum += inst.f.value_packed(pack_symbols(ctx + (n - block_w), static_cast<std::size_t>(block_w), k));
    }
    return true;
  };

  const Coord seed_len = std::min<Coord>(ctx_len, L);
  std::vector<double> cur;
  LogSumExp whole;  // complete-word accumulator for windows shorter than the context
  if (L > ctx_len) cur.assign(plan.states, kNegInf);

  std::vector<std::uint8_t> prefix;
  prefix.reserve(static_cast<std::size_t>(seed_len) + 1);
  auto dfs = [&](auto&& self, Coord t, double fsum) -> void {
    if (t == seed_len) {
      if (L <= ctx_len) {
        whole.add(fsum);
      } else {
        cur[pack_symbols(prefix.data(), prefix.size(), k)] = fsum;  // one path per state
      }
      return;
    }
    for (int sym = 0; sym < k; ++sym) {
      prefix.push_back(static_cast<std::uint8_t>(sym));
      double fs = fsum;
      if (step(t, prefix.data(), static_cast<int>(prefix.size()), fs)) self(self, t + 1, fs);
      prefix.pop_back();
    }
  };
  dfs(dfs, 0, 0.0);
  if (L <= ctx_len) return whole.value();

  const std::uint64_t mod = ctx_len >= 1 ? plan.states / static_cast<std::uint64_t>(k) : 1;
  std::vector<std::uint8_t> ctx(static_cast<std::size_t>(ctx_len) + 1);
  std::vector<LogSumExp> nxt;
  for (Coord t = ctx_len; t < L; ++t) {
    nxt.assign(plan.states, LogSumExp{});
    for (std::uint64_t s = 0; s < plan.states; ++s) {
      if (cur[s] == kNegInf) continue;
      std::uint64_t dec = s;
      for (int i = ctx_len - 1; i >= 0; --i) {
        ctx[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(dec % k);
        dec /= static_cast<std::uint64_t>(k);
      }
      for (int sym = 0; sym < k; ++sym) {
        ctx[static_cast<std::size_t>(ctx_len)] = static_cast<std::uint8_t>(sym);
        double fs = 0.0;
        if (!step(t, ctx.data(), ctx_len + 1, fs)) continue;
        std::uint64_t s2 = ctx_len >= 1 ? (s % mod) * static_cast<std::uint64_t>(k) + sym : 0;
        nxt[s2].add(cur[s] + fs);
      }
    }
    for (std::uint64_t s = 0; s < plan.states; ++s) cur[s] = nxt[s].value();
  }
  LogSumExp total;
  for (std::uint64_t s = 0; s < plan.states; ++s) total.add(cur[s]);
  return total.value();
}

}  // namespace

WeightedInstance make_instance(std::shared_ptr<const BlockCode> code, Potential f, double omega,
                               Coord collar) {
  if (!code) throw DomainError("make_instance: null code");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ConfigError("omega must lie in [0, 1]");
  if (collar < 0) throw ConfigError("collar must be nonnegative");
  if (f.dim() != code->source().dim() || f.alphabet_size() != code->source().alphabet_size())
    throw DomainError("make_instance: potential does not live on the source system");
  return WeightedInstance{std::move(code), std::move(f), omega, collar, false};
}

std::map<std::vector<std::uint8_t>, double> PartitionResult::per_a_map() const {
  std::map<std::vector<std::uint8_t>, double> m;
  for (const auto& e : per_a) m.emplace(e.a.symbols, e.log_z);
  return m;
}

PartitionResult weighted_partition(const WeightedInstance& inst, const BoxWindow& w,
                                   const Limits& limits, PartitionStrategy strategy) {
  if (!inst.code) throw DomainError("weighted_partition: instance has no code");
  const ShiftSystem& x = inst.code->source();
  if (w.dim() != x.dim()) throw DomainError("weighted_partition: window dimension mismatch");

  PartitionResult out;
  out.a_window = w.inflated(inst.collar);
  out.b_window = out.a_window.minkowski_sum(inst.code->stencil());
  out.exact_sup = true;

  TransferPlan plan = plan_transfer(inst, w, out.b_window);
  if (strategy == PartitionStrategy::kTransfer && !plan.usable)
    throw DomainError("weighted_partition: transfer strategy preconditions not met");
  const bool use_transfer = plan.usable && strategy != PartitionStrategy::kGeneric;

  LogSumExp outer;
  if (use_transfer) {
    std::vector<Pattern> as = enumerate_patterns(inst.code->target(), out.a_window, limits);
    std::vector<double> vals(as.size(), kNegInf);
    parallel_for(
        as.size(),
        [&](std::size_t i) {
          vals[i] = transfer_log_z(inst, plan, w, out.a_window, out.b_window, as[i].symbols);
        },
        8);
    for (std::size_t i = 0; i < as.size(); ++i) {
      if (vals[i] == kNegInf) continue;
      out.per_a.push_back({std::move(as[i]), vals[i]});
      outer.add(inst.omega * vals[i]);
    }
  } else {
    std::map<std::vector<std::uint8_t>, LogSumExp> buckets;  // lex key order matches enumeration
    for_each_admissible(x, out.b_window, limits, [&](const std::vector<std::uint8_t>& syms) {
      Pattern b{out.b_window, syms};
      Pattern a = apply_code(*inst.code, b);
      SupResult sup = cylinder_sup(inst.f, b, x, w, limits, inst.allow_sup_fallback);
      if (!sup.exact) out.exact_sup = false;
      buckets[std::move(a.symbols)].add(sup.value);
    });
    for (auto& [key, lse] : buckets) {
      double lz = lse.value();
      if (lz == kNegInf) continue;  // no admissible completion: the fiber is empty
      out.per_a.push_back({Pattern{out.a_window, key}, lz});
      outer.add(inst.omega * lz);
    }
  }
  if (out.per_a.empty())
    throw DomainError("weighted_partition: no admissible pattern on the window");
  out.log_z = outer.value();
  return out;
}

namespace {

PressureReport assemble_report(std::vector<PressureRow> rows, double stabilize_tol) {
  PressureReport rep;
  rep.stabilize_tol = stabilize_tol;
  rep.exact_sup = true;
  for (const auto& row : rows)
    if (!row.exact_sup) rep.exact_sup = false;
  rep.rows = std::move(rows);
  rep.fekete_bound = rep.rows.back().fekete_running;
  rep.increment_estimate = rep.rows.back().increment;
  rep.stabilized =
      rep.rows.size() >= 2 &&
      std::abs(rep.rows[rep.rows.size() - 1].increment - rep.rows[rep.rows.size() - 2].increment) <=
          stabilize_tol;
  return rep;
}

template <class LogZFn>
std::vector<PressureRow> run_schedule(const std::vector<BoxWindow>& windows, int dim,
                                      LogZFn&& log_z_of) {
  if (windows.empty()) throw ConfigError("window schedule is empty");
  std::vector<PressureRow> rows;
  // The empty window has log Z = 0, so the first difference quotient is just
  // the first estimate.
  double prev_log_z = 0.0;
  std::uint64_t prev_vol = 0;
  for (const auto& w : windows) {
    if (w.dim() != dim) throw ConfigError("window schedule dimension mismatch");
    std::uint64_t vol = w.volume();
    if (vol <= prev_vol) throw ConfigError("window schedule volumes must strictly increase");
    PressureRow row;
    row.side = w.extent(0);
    row.volume = vol;
    double log_z = 0.0;
    bool exact = true;
    try {
      std::tie(log_z, exact) = log_z_of(w);
    } catch (const CapExceeded& e) {
      throw CapExceeded("window side " + std::to_string(row.side) + ": " + e.what());
    }
    row.log_z = log_z;
    row.estimate = log_z / static_cast<double>(vol);
    row.increment = (log_z - prev_log_z) / static_cast<double>(vol - prev_vol);
    row.exact_sup = exact;
    row.fekete_running =
        rows.empty() ? row.estimate : std::min(rows.back().fekete_running, row.estimate);
    rows.push_back(row);
    prev_log_z = log_z;
    prev_vol = vol;
  }
  return rows;
}

}  // namespace

PressureReport pressure_estimate(const WeightedInstance& inst, const std::vector<BoxWindow>& windows,
                                 const Limits& limits, double stabilize_tol) {
  auto rows = run_schedule(windows, inst.code->source().dim(),
                           [&](const BoxWindow& w) -> std::pair<double, bool> {
                             PartitionResult part = weighted_partition(inst, w, limits);
                             return {part.log_z, part.exact_sup};
                           });
  return assemble_report(std::move(rows), stabilize_tol);
}

PressureReport plain_pressure(SystemPtr sys, const Potential& f, const std::vector<BoxWindow>& windows,
                              Coord collar, const Limits& limits) {
  auto code = std::make_shared<const BlockCode>(BlockCode::collapse(std::move(sys)));
  return pressure_estimate(make_instance(code, f, 1.0, collar), windows, limits);
}

PressureReport conditional_entropy_top(const std::shared_ptr<const BlockCode>& code,
                                       const std::vector<BoxWindow>& windows, Coord collar,
                                       const Limits& limits) {
  WeightedInstance inst = make_instance(code, Potential::zero(code->source()), 1.0, collar);
  auto rows = run_schedule(windows, code->source().dim(),
                           [&](const BoxWindow& w) -> std::pair<double, bool> {
                             PartitionResult part = weighted_partition(inst, w, limits);
                             double worst = kNegInf;
                             for (const auto& e : part.per_a) worst = std::max(worst, e.log_z);
                             return {worst, part.exact_sup};
                           });
  return assemble_report(std::move(rows), 1e-3);
}

}  // namespace presslab
