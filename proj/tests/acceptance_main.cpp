// Acceptance gate: ten end-to-end checks against closed-form oracles and the
// library's own certified bounds. Each check prints one [PASS]/[FAIL] line
// with the measured values; the process exits 0 only if all ten pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "presslab/config.hpp"
#include "presslab/errors.hpp"
#include "presslab/measure.hpp"
#include "presslab/potential.hpp"
#include "presslab/pressure.hpp"
#include "presslab/report.hpp"
#include "presslab/shiftspace.hpp"
#include "presslab/variational.hpp"

using namespace presslab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string g_cli, g_config_dir, g_work_dir;

SystemPtr full_shift(int k) {
  return std::make_shared<const ShiftSystem>(1, Alphabet{k, {}},
                                             std::vector<ForbiddenPattern>{});
}

SystemPtr golden_mean() {
  std::vector<ForbiddenPattern> fb;
  fb.push_back({BoxWindow{{0}, {1}}, {1, 1}});
  return std::make_shared<const ShiftSystem>(1, Alphabet{2, {}}, std::move(fb));
}

std::shared_ptr<const BlockCode> identity_of(SystemPtr sys) {
  return std::make_shared<const BlockCode>(BlockCode::identity(sys));
}

// pair shift (x, y), x binary, y ternary, symbol = 3x + y, code = x
std::shared_ptr<const BlockCode> product23() {
  SystemPtr prod = full_shift(6);
  SystemPtr base = full_shift(2);
  std::vector<std::uint8_t> rule(6);
  for (int s = 0; s < 6; ++s) rule[s] = static_cast<std::uint8_t>(s / 3);
  return std::make_shared<const BlockCode>(prod, base, BoxWindow{{0}, {0}}, rule);
}

std::vector<BoxWindow> cubes(std::vector<Coord> sides) {
  std::vector<BoxWindow> w;
  for (Coord s : sides) w.push_back(BoxWindow::cube(1, s));
  return w;
}

Potential seeded(const ShiftSystem& sys, Coord radius, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::size_t cells = 1;
  for (Coord i = 0; i < (2 * radius + 1) * sys.dim(); ++i)
    cells *= static_cast<std::size_t>(sys.alphabet().size);
  std::vector<double> table(cells);
  for (double& v : table) v = scale * n(rng);
  return Potential(sys, radius, table);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. omega = 1, f = 0 on the full 2-shift: every window estimate is log 2 and
//    the sandwich closes. Budget: 1 s.
Outcome full_shift_entropy() {
  const double kRowTol = 1e-12, kGapTol = 1e-6, kBudget = 1.0;
  auto t0 = Clock::now();
  SystemPtr x = full_shift(2);
  WeightedInstance inst = make_instance(identity_of(x), Potential::zero(*x), 1.0, 0);
  OptimizeOptions opt;
  opt.restarts = 4;
  SandwichCertificate cert = sandwich(inst, cubes({2, 4, 6, 8}), opt);
  double worst = 0.0;
  for (const PressureRow& row : cert.upper.rows)
    worst = std::max(worst, std::fabs(row.estimate - std::log(2.0)));
  double gap = std::fabs(cert.gap_certified);
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  Outcome o;
  o.pass = worst <= kRowTol && gap <= kGapTol && secs < kBudget;
  o.detail = "max |row - log 2| = " + num(worst) + " (tol " + num(kRowTol) + "), gap " +
             num(gap) + " (tol " + num(kGapTol) + "), " + num(secs) + " s (cap " +
             num(kBudget) + ")";
  return o;
}

// 2. first-coordinate factor of the (2 x 3)-symbol pair shift: both bounds hit
//    log 2 + omega log 3 for five omegas; the upper side exactly per window.
//    Budget: 10 s.
Outcome product_factor_closed_form() {
  const double kUpperTol = 1e-9, kLowerTol = 1e-3, kBudget = 10.0;
  auto t0 = Clock::now();
  auto pi = product23();
  double worst_upper = 0.0, worst_lower = 0.0;
  for (double omega : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double want = std::log(2.0) + omega * std::log(3.0);
    WeightedInstance inst = make_instance(pi, Potential::zero(pi->source()), omega, 0);
    for (Coord side = 2; side <= 10; ++side) {
      double est = weighted_partition(inst, BoxWindow::cube(1, side)).log_z /
                   static_cast<double>(side);
      worst_upper = std::max(worst_upper, std::fabs(est - want));
    }
    OptimizeOptions opt;
    opt.family = MeasureKind::kBernoulli;
    opt.restarts = 4;
    OptimizeResult res = optimize(inst, opt);
    worst_lower = std::max(worst_lower, std::fabs(res.objective - want));
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  Outcome o;
  o.pass = worst_upper <= kUpperTol && worst_lower <= kLowerTol && secs < kBudget;
  o.detail = "upper err " + num(worst_upper) + " (tol " + num(kUpperTol) + "), lower err " +
             num(worst_lower) + " (tol " + num(kLowerTol) + "), " + num(secs) + " s (cap " +
             num(kBudget) + ")";
  return o;
}

// 3. golden mean at window length 14: refined upper bound, Markov lower bound
//    and their gap all within 5e-3 of log phi.
Outcome golden_mean_sandwich() {
  const double kTol = 5e-3;
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), Potential::zero(*gm), 1.0, 0);
  OptimizeOptions opt;
  opt.family = MeasureKind::kMarkov;
  opt.restarts = 4;
  SandwichCertificate cert = sandwich(inst, cubes({2, 6, 10, 14}), opt);
  double log_phi = std::log((1.0 + std::sqrt(5.0)) / 2.0);
  double upper_err = std::fabs(cert.upper.increment_estimate - log_phi);
  double lower_err = std::fabs(cert.lower.objective - log_phi);
  double gap = std::fabs(cert.gap_refined);
  Outcome o;
  o.pass = upper_err <= kTol && lower_err <= kTol && gap <= kTol;
  o.detail = "refined err " + num(upper_err) + ", lower err " + num(lower_err) + ", gap " +
             num(gap) + " (tol " + num(kTol) + ", log phi " + num(log_phi) + ")";
  return o;
}

// 4. the finite-window identity of the Gibbs candidate holds to 1e-9 over 50
//    seeded instances on two fixtures.
Outcome gibbs_identity_sweep() {
  const double kTol = 1e-9;
  SystemPtr gm = golden_mean();
  auto gm_id = identity_of(gm);
  auto pi = product23();
  double worst = 0.0;
  int instances = 0;
  for (int i = 0; i < 50; ++i) {
    double omega = (i % 2 == 0) ? 0.3 : 0.7;
    bool on_gm = (i / 2) % 2 == 0;
    std::shared_ptr<const BlockCode> code = on_gm ? gm_id : pi;
    Potential f = seeded(code->source(), 0, 1000 + static_cast<std::uint64_t>(i), 1.0);
    WeightedInstance inst = make_instance(code, f, omega, 0);
    std::vector<Coord> sides = on_gm ? std::vector<Coord>{4, 7, 10} : std::vector<Coord>{3, 5, 6};
    for (Coord side : sides) {
      GibbsIdentity id = gibbs_identity_terms(inst, BoxWindow::cube(1, side));
      worst = std::max(worst, std::fabs(id.defect));
    }
    ++instances;
  }
  Outcome o;
  o.pass = worst <= kTol && instances == 50;
  o.detail = "50 instances, max |defect| = " + num(worst) + " (tol " + num(kTol) + ")";
  return o;
}

// 5. the seven window inequalities over 100 seeded pairs at windows {8, 12};
//    constant shifts and the omega endpoints are exact to 1e-12.
Outcome property_suite_sweep() {
  const double kSuiteTol = 1e-9, kAnchorTol = 1e-12;
  SystemPtr gm = golden_mean();
  auto id = identity_of(gm);
  auto collapse = std::make_shared<const BlockCode>(BlockCode::collapse(gm));
  int failed = 0;
  double worst_shift = 0.0, worst_anchor = 0.0;
  for (int i = 0; i < 100; ++i) {
    Potential f = seeded(*gm, 1, 2000 + 2 * static_cast<std::uint64_t>(i), 0.7);
    Potential g = seeded(*gm, 1, 2001 + 2 * static_cast<std::uint64_t>(i), 0.7);
    WeightedInstance inst = make_instance(id, f, 0.5, 0);
    for (Coord side : {8, 12}) {
      for (const PropertyCheck& c :
           pressure_properties_suite(inst, BoxWindow::cube(1, side), g, 0.375, 1, kSuiteTol)) {
        if (!c.ok) ++failed;
        if (c.name == "constant_shift") worst_shift = std::max(worst_shift, std::fabs(c.slack));
      }
    }
    if (i < 10) {
      BoxWindow w = BoxWindow::cube(1, 8);
      double z0f = weighted_partition(make_instance(id, f, 0.0, 0), w).log_z;
      double z00 = weighted_partition(make_instance(id, Potential::zero(*gm), 0.0, 0), w).log_z;
      worst_anchor = std::max(worst_anchor, std::fabs(z0f - z00));
      double zid = weighted_partition(make_instance(id, f, 1.0, 0), w).log_z;
      double zco = weighted_partition(make_instance(collapse, f, 1.0, 0), w).log_z;
      worst_anchor = std::max(worst_anchor, std::fabs(zid - zco));
    }
  }
  Outcome o;
  o.pass = failed == 0 && worst_shift <= kAnchorTol && worst_anchor <= kAnchorTol;
  o.detail = std::to_string(failed) + " of 1400 checks failed, shift slack " + num(worst_shift) +
             ", omega-endpoint err " + num(worst_anchor) + " (tol " + num(kAnchorTol) + ")";
  return o;
}

// 6. invariant measures never beat the certified pressure bound; a
//    deliberately non-invariant candidate does.
Outcome variational_direction() {
  const double kTol = 1e-9, kNeedViolation = 0.5;
  SystemPtr gm = golden_mean();
  SystemPtr x2 = full_shift(2);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double worst = -1e300;
  for (int m = 0; m < 20; ++m) {
    bool on_gm = m % 2 == 0;
    SystemPtr sys = on_gm ? gm : x2;
    Measure mu = [&]() {
      if (on_gm) {
        double a = u(rng);
        return Measure::markov({1.0 - a, a, 1.0, 0.0});
      }
      if (m % 4 == 1) {
        double p = u(rng);
        return Measure::bernoulli(1, {p, 1.0 - p});
      }
      double a = u(rng), b = u(rng);
      return Measure::markov({1.0 - a, a, b, 1.0 - b});
    }();
    double omega = (m % 3 == 0) ? 0.3 : 1.0;
    WeightedInstance base = make_instance(identity_of(sys), seeded(*sys, 0, 500 + m, 1.0), omega, 0);
    for (int j = 0; j < 25; ++j) {
      double beta = static_cast<double>(j) / 8.0;
      Potential fb = scaled(base.f, *sys, beta);
      double lhs = omega * integrate(fb, mu, *sys);
      WeightedInstance inst = make_instance(base.code, fb, omega, 0);
      double bound = pressure_estimate(inst, cubes({4, 8})).fekete_bound;
      worst = std::max(worst, lhs - bound);
    }
  }

  // point mass on the word 10, read at the reference site: claims a symbol-1
  // frequency no invariant measure of the golden mean can have
  Potential ind(*gm, 0, {0.0, 4.0});
  PatternWeights spike;
  spike.window = BoxWindow{{0}, {1}};
  spike.patterns.push_back(Pattern{spike.window, {1, 0}});
  spike.weights.push_back(1.0);
  double lhs = reference_site_integral(ind, spike);
  double bound = plain_pressure(gm, ind, cubes({4, 8})).fekete_bound;
  double violation = lhs - bound;
  Outcome o;
  o.pass = worst <= kTol && violation >= kNeedViolation;
  o.detail = "invariant max violation " + num(worst) + " (tol " + num(kTol) +
             "), non-invariant violation " + num(violation) + " (need >= " +
             num(kNeedViolation) + ")";
  return o;
}

// 7. entropy recovered from the pressure functional at the log-probability
//    potential of Bernoulli(0.3, 0.7).
Outcome entropy_recovery() {
  const double kTol = 1e-3, kWant = 0.6108643020548935;
  SystemPtr x = full_shift(2);
  Measure mu = Measure::bernoulli(1, {0.3, 0.7});
  std::vector<Potential> grid;
  grid.emplace_back(*x, 0, std::vector<double>{std::log(0.3), std::log(0.7)});
  grid.emplace_back(*x, 0, std::vector<double>{0.0, 0.0});
  grid.emplace_back(*x, 0, std::vector<double>{-0.5, 0.25});
  grid.emplace_back(*x, 0, std::vector<double>{std::log(0.7), std::log(0.3)});
  EntropyRecovery rec = entropy_from_pressure(x, mu, grid, cubes({2, 4, 6}));
  double err = std::fabs(rec.value - kWant);
  Outcome o;
  o.pass = err <= kTol && rec.best_index == 0;
  o.detail = "recovered " + num(rec.value) + ", want " + num(kWant) + " (err " + num(err) +
             ", tol " + num(kTol) + "), best grid index " + std::to_string(rec.best_index);
  return o;
}

// 8. 3 x 2 carpet with rows (2, 1): the optimizer route reproduces the
//    independently coded closed-form dimension. Budget: 30 s.
Outcome carpet_optimizer_route() {
  const double kTol = 1e-3, kBudget = 30.0;
  auto t0 = Clock::now();
  SystemPtr cells = full_shift(3);
  SystemPtr rows = full_shift(2);
  auto rowcode = std::make_shared<const BlockCode>(cells, rows, BoxWindow{{0}, {0}},
                                                   std::vector<std::uint8_t>{0, 0, 1});
  double omega = std::log(2.0) / std::log(3.0);
  WeightedInstance inst = make_instance(rowcode, Potential::zero(*cells), omega, 0);
  OptimizeOptions opt;
  opt.family = MeasureKind::kBernoulli;
  opt.restarts = 6;
  OptimizeResult res = optimize(inst, opt);
  double dim_opt = res.objective / std::log(2.0);

  CarpetSpec spec;
  spec.n = 3;
  spec.m = 2;
  spec.row_counts = {2, 1};
  double closed = carpet_dimension(spec, cubes({2, 4})).dimension_closed;
  double err = std::fabs(dim_opt - closed);
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  Outcome o;
  o.pass = err <= kTol && secs < kBudget && std::fabs(closed - 1.3496838201955774) <= 1e-12;
  o.detail = "optimizer dim " + num(dim_opt) + ", closed form " + num(closed) + " (err " +
             num(err) + ", tol " + num(kTol) + "), " + num(secs) + " s (cap " + num(kBudget) +
             ")";
  return o;
}

// 9. refining the factor by phi = identity moves nothing; refining the
//    one-point factor by a full shift never lowers the estimate.
Outcome fiber_refinement() {
  const double kEqTol = 1e-9;
  auto pi = product23();
  BlockCode phi_id = BlockCode::identity(pi->target_ptr());
  FiberSystem fiber = fiber_product(*pi, phi_id);
  Potential f = seeded(pi->source(), 0, 77, 1.0);
  auto fiber_code = std::make_shared<const BlockCode>(fiber.to_base);
  Potential f_lift = pullback(f, fiber.to_x);
  double worst_eq = 0.0;
  for (Coord side : {2, 4, 6, 8}) {
    BoxWindow w = BoxWindow::cube(1, side);
    double vol = static_cast<double>(w.volume());
    double base = weighted_partition(make_instance(pi, f, 0.5, 0), w).log_z / vol;
    double lifted = weighted_partition(make_instance(fiber_code, f_lift, 0.5, 0), w).log_z / vol;
    worst_eq = std::max(worst_eq, std::fabs(lifted - base));
  }

  SystemPtr x2 = full_shift(2);
  auto collapse_x = std::make_shared<const BlockCode>(BlockCode::collapse(x2));
  BlockCode collapse_y = BlockCode::collapse(full_shift(2));
  FiberSystem fiber2 = fiber_product(*collapse_x, collapse_y);
  Potential f2 = seeded(*x2, 0, 78, 1.0);
  auto fiber2_code = std::make_shared<const BlockCode>(fiber2.to_base);
  Potential f2_lift = pullback(f2, fiber2.to_x);
  double worst_dir = -1e300;
  for (Coord side : {2, 4, 6, 8}) {
    BoxWindow w = BoxWindow::cube(1, side);
    double vol = static_cast<double>(w.volume());
    double base = weighted_partition(make_instance(collapse_x, f2, 0.5, 0), w).log_z / vol;
    double refined =
        weighted_partition(make_instance(fiber2_code, f2_lift, 0.5, 0), w).log_z / vol;
    worst_dir = std::max(worst_dir, base - refined);
  }
  Outcome o;
  o.pass = worst_eq <= kEqTol && worst_dir <= 1e-12;
  o.detail = "identity refinement err " + num(worst_eq) + " (tol " + num(kEqTol) +
             "), direction slack " + num(-worst_dir) + " (must be >= -1e-12)";
  return o;
}

int run_cli(const std::string& args) {
  std::string cmd = "\"" + g_cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa.good() || !fb.good()) return false;
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

// 10. every bundled config, run twice with the same seed into different
//     directories, produces byte-identical reports and exit code 0.
Outcome determinism() {
  struct Job {
    const char* config;
    const char* sub;
  };
  const Job jobs[] = {{"fullshift2.json", "sandwich"},
                      {"product23.json", "sandwich"},
                      {"goldenmean.json", "sandwich"},
                      {"carpet_3x2.json", "carpet"}};
  Outcome o;
  int files = 0;
  for (const Job& job : jobs) {
    fs::path r1 = fs::path(g_work_dir) / (std::string(job.config) + ".r1");
    fs::path r2 = fs::path(g_work_dir) / (std::string(job.config) + ".r2");
    fs::remove_all(r1);
    fs::remove_all(r2);
    std::string common = std::string(job.sub) + " --config \"" + g_config_dir + "/" +
                         job.config + "\" --seed 1 --out \"";
    if (run_cli(common + r1.string() + "\"") != 0 || run_cli(common + r2.string() + "\"") != 0) {
      o.pass = false;
      o.detail = std::string(job.config) + ": cli exited nonzero";
      return o;
    }
    int here = 0;
    for (const auto& entry : fs::directory_iterator(r1)) {
      if (!entry.is_regular_file()) continue;
      ++here;
      if (!same_bytes(entry.path(), r2 / entry.path().filename())) {
        o.pass = false;
        o.detail = std::string(job.config) + ": " + entry.path().filename().string() +
                   " differs between runs";
        return o;
      }
    }
    if (here == 0) {
      o.pass = false;
      o.detail = std::string(job.config) + ": run produced no files";
      return o;
    }
    files += here;
  }
  o.detail = "4 configs, " + std::to_string(files) + " report files byte-identical across reruns";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string k = argv[i];
    if (k == "--cli") g_cli = argv[i + 1];
    else if (k == "--config-dir") g_config_dir = argv[i + 1];
    else if (k == "--work-dir") g_work_dir = argv[i + 1];
  }
  if (g_cli.empty() || g_config_dir.empty() || g_work_dir.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli PATH --config-dir DIR --work-dir DIR\n");
    return 2;
  }
  fs::create_directories(g_work_dir);

  struct Entry {
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"full-shift entropy", full_shift_entropy},
      {"product-factor closed form", product_factor_closed_form},
      {"golden-mean sandwich", golden_mean_sandwich},
      {"gibbs identity sweep", gibbs_identity_sweep},
      {"pressure property suite", property_suite_sweep},
      {"variational direction", variational_direction},
      {"entropy recovery", entropy_recovery},
      {"carpet optimizer route", carpet_optimizer_route},
      {"fiber refinement", fiber_refinement},
      {"determinism", determinism},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d/10 %s: %s\n", o.pass ? "PASS" : "FAIL", idx, e.label, o.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of 10 acceptance checks failed\n", failures);
    return 1;
  }
  std::printf("all 10 acceptance checks passed\n");
  return 0;
}
