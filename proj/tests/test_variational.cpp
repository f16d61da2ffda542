#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "presslab/errors.hpp"
#include "presslab/measure.hpp"
#include "presslab/potential.hpp"
#include "presslab/pressure.hpp"
#include "presslab/shiftspace.hpp"
#include "presslab/variational.hpp"

using namespace presslab;

namespace {

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

std::vector<BoxWindow> cubes(int dim, std::vector<Coord> sides) {
  std::vector<BoxWindow> w;
  for (Coord s : sides) w.push_back(BoxWindow::cube(dim, s));
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

}  // namespace

TEST_CASE("optimizer solves the single-site gibbs problem in both families") {
  SystemPtr x = full_shift(2);
  WeightedInstance inst = make_instance(identity_of(x), Potential(*x, 0, {0.0, 1.0}), 1.0, 0);
  // sup over measures of h + E f = log(1 + e), at p1 = sigma(1)
  for (MeasureKind family : {MeasureKind::kBernoulli, MeasureKind::kMarkov}) {
    OptimizeOptions opt;
    opt.family = family;
    opt.restarts = 4;
    OptimizeResult res = optimize(inst, opt);
    CHECK(std::fabs(res.objective - 1.3132616875182228) <= 1e-6);
    double p1 = family == MeasureKind::kBernoulli ? res.measure.probs()[1]
                                                  : res.measure.stationary()[1];
    CHECK(std::fabs(p1 - 0.7310585786300049) <= 1e-4);
    CHECK(res.evaluations > 0);
  }
}

TEST_CASE("optimizer runs are deterministic and traceable") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), seeded(*gm, 0, 9, 0.7), 0.6, 0);
  OptimizeOptions opt;
  opt.restarts = 3;
  opt.record_trace = true;
  OptimizeResult a = optimize(inst, opt);
  OptimizeResult b = optimize(inst, opt);
  CHECK(a.objective == b.objective);
  CHECK(a.evaluations == b.evaluations);
  REQUIRE(a.trace.size() == b.trace.size());
  CHECK(a.trace.size() > 0);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].restart == b.trace[i].restart);
    CHECK(a.trace[i].iteration == b.trace[i].iteration);
    CHECK(a.trace[i].objective == b.trace[i].objective);
  }
  // per-restart best never decreases along the trace
  for (std::size_t i = 1; i < a.trace.size(); ++i)
    if (a.trace[i].restart == a.trace[i - 1].restart)
      CHECK(a.trace[i].objective >= a.trace[i - 1].objective - 1e-15);
}

TEST_CASE("warm start never lowers the reported maximum") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), seeded(*gm, 1, 21, 0.5), 0.8, 0);
  OptimizeOptions cold;
  cold.restarts = 2;
  cold.warm_start = false;
  OptimizeOptions warm = cold;
  warm.warm_start = true;
  CHECK(optimize(inst, warm).objective >= optimize(inst, cold).objective - 1e-12);
}

TEST_CASE("warm start lands near the parry transition probabilities") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), Potential::zero(*gm), 1.0, 0);
  Measure warm = gibbs_warm_start(inst, MeasureKind::kMarkov, 8);
  CHECK(std::fabs(warm.transition()[1] - 0.38196601125010515) <= 0.05);
}

TEST_CASE("sandwich encloses the golden mean entropy") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), Potential::zero(*gm), 1.0, 0);
  OptimizeOptions opt;
  opt.restarts = 4;
  SandwichCertificate cert = sandwich(inst, cubes(1, {2, 6, 10, 14}), opt);
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(cert.lower.objective >= std::log(phi) - 1e-6);
  CHECK(cert.upper.fekete_bound >= cert.lower.objective - 1e-9);
  CHECK(cert.gap_certified >= 0.0);
  CHECK(cert.certified_ok);
  CHECK(std::fabs(cert.gap_refined) <= 5e-3);
}

TEST_CASE("window inequalities of the pressure functional all hold") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), seeded(*gm, 1, 13, 0.7), 0.5, 0);
  Potential g = seeded(*gm, 1, 14, 0.7);
  std::vector<PropertyCheck> checks =
      pressure_properties_suite(inst, BoxWindow::cube(1, 8), g, 0.375, 1, 1e-9);
  CHECK(checks.size() == 7);
  for (const PropertyCheck& c : checks) {
    INFO(c.name);
    CHECK(c.ok);
  }
  for (const PropertyCheck& c : checks)
    if (c.name == "constant_shift") CHECK(std::fabs(c.slack) <= 1e-12);
}

TEST_CASE("omega endpoints reduce to the unweighted functionals") {
  SystemPtr gm = golden_mean();
  Potential f = seeded(*gm, 0, 31, 1.0);
  BoxWindow w = BoxWindow::cube(1, 7);
  // omega = 0: the potential must not matter
  WeightedInstance zf = make_instance(identity_of(gm), f, 0.0, 0);
  WeightedInstance z0 = make_instance(identity_of(gm), Potential::zero(*gm), 0.0, 0);
  CHECK(std::fabs(weighted_partition(zf, w).log_z - weighted_partition(z0, w).log_z) <= 1e-12);
  // omega = 1: identity and collapse codes agree with the plain pressure
  WeightedInstance id1 = make_instance(identity_of(gm), f, 1.0, 0);
  auto collapse = std::make_shared<const BlockCode>(BlockCode::collapse(gm));
  WeightedInstance co1 = make_instance(collapse, f, 1.0, 0);
  double plain = plain_pressure(gm, f, {w}).rows.back().log_z;
  CHECK(std::fabs(weighted_partition(id1, w).log_z - plain) <= 1e-12);
  CHECK(std::fabs(weighted_partition(co1, w).log_z - plain) <= 1e-12);
}

TEST_CASE("tangency criterion accepts the gibbs candidate and rejects a point mass") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), seeded(*gm, 0, 17, 0.8), 0.7, 0);
  BoxWindow w = BoxWindow::cube(1, 6);
  PatternWeights gibbs = gibbs_candidate(inst, w);
  CriterionReport good = measure_criterion(inst, gibbs, w, 12, 0, 99, 1e-9);
  CHECK(good.ok);
  CHECK(good.worst_violation <= 1e-9);

  PatternWeights spike = gibbs;
  for (double& v : spike.weights) v = 0.0;
  std::size_t alt = 0;
  for (std::size_t i = 0; i < spike.patterns.size(); ++i) {
    const auto& s = spike.patterns[i].symbols;
    bool alternating = true;
    for (std::size_t j = 1; j < s.size(); ++j)
      if (s[j] == s[j - 1]) alternating = false;
    if (alternating && s[0] == 1) alt = i;
  }
  spike.weights[alt] = 1.0;
  CriterionReport bad = measure_criterion(inst, spike, w, 12, 0, 99, 1e-9);
  CHECK_FALSE(bad.ok);
  CHECK(bad.worst_violation > 0.1);

  // ascent searches the unit sup-norm ball and normalizes per site, so its
  // optimum is not comparable to the raw sampled violations; positivity is
  // the certificate
  AscentResult climb = criterion_ascent(inst, spike, w, 0, 60, 0.5);
  CHECK(climb.violation >= 0.05);
  CHECK(climb.steps > 0);
}

TEST_CASE("parry measure passes the equilibrium diagnosis") {
  SystemPtr gm = golden_mean();
  WeightedInstance inst = make_instance(identity_of(gm), Potential::zero(*gm), 1.0, 0);
  EquilibriumReport rep =
      equilibrium_check(inst, Measure::parry(*gm), cubes(1, {4, 8, 12}), 8, 1, 1e-9);
  CHECK(rep.ok);
  CHECK(rep.defect_certified >= -1e-9);
  CHECK(std::fabs(rep.defect_refined) <= 5e-3);
  CHECK(rep.tangency.ok);
  CHECK(rep.mixture_entropy_slack >= -1e-12);

  Measure off = Measure::bernoulli(1, {1.0, 0.0});
  EquilibriumReport badrep =
      equilibrium_check(inst, off, cubes(1, {4, 8, 12}), 8, 1, 1e-9);
  CHECK(badrep.defect_certified > 0.4);
}

TEST_CASE("carpet dimension matches the closed form") {
  CarpetSpec spec;
  spec.n = 3;
  spec.m = 2;
  spec.row_counts = {2, 1};
  CarpetResult res = carpet_dimension(spec, cubes(1, {2, 4, 6, 8}));
  CHECK(res.omega == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-15));
  double closed = std::log(std::pow(2.0, res.omega) + 1.0) / std::log(2.0);
  CHECK(res.dimension_closed == doctest::Approx(closed).epsilon(1e-12));
  CHECK(std::fabs(res.dimension - res.dimension_closed) <= 1e-12);
  CHECK(res.dimension == doctest::Approx(1.3496838201955774).epsilon(1e-12));

  CarpetSpec unit;  // single full row: the carpet is the whole square
  unit.n = 2;
  unit.m = 2;
  unit.row_counts = {2, 2};
  CHECK(carpet_dimension(unit, cubes(1, {2, 4})).dimension ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("entropy recovered from the pressure grid at the log-probability potential") {
  SystemPtr x = full_shift(2);
  Measure mu = Measure::bernoulli(1, {0.3, 0.7});
  std::vector<Potential> grid;
  grid.emplace_back(*x, 0, std::vector<double>{std::log(0.3), std::log(0.7)});  // attains
  grid.emplace_back(*x, 0, std::vector<double>{0.0, 0.0});
  grid.emplace_back(*x, 0, std::vector<double>{-1.0, 0.5});
  EntropyRecovery rec = entropy_from_pressure(x, mu, grid, cubes(1, {2, 4, 6}));
  CHECK(rec.best_index == 0);
  CHECK(rec.per_potential.size() == 3);
  CHECK(std::fabs(rec.value - 0.6108643020548935) <= 1e-9);
  for (double v : rec.per_potential) CHECK(v >= rec.value - 1e-12);

  CHECK_THROWS_AS(entropy_from_pressure(x, mu, {}, cubes(1, {2})), ConfigError);
  SystemPtr gm = golden_mean();
  CHECK_THROWS_AS(
      entropy_from_pressure(gm, Measure::bernoulli(1, {0.5, 0.5}), grid, cubes(1, {2})),
      DomainError);
}
