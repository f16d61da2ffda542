#include "presslab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "presslab/errors.hpp"
#include "presslab/measure.hpp"
#include "presslab/numeric.hpp"
#include "presslab/potential.hpp"
#include "presslab/pressure.hpp"
#include "presslab/report.hpp"
#include "presslab/variational.hpp"

namespace presslab {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& suffix) {
  return (std::filesystem::path(cfg.out_dir) / (cfg.name + "_" + suffix)).string();
}

void emit(const ExperimentConfig& cfg, const std::string& suffix, std::string contents) {
  std::string path = out_path(cfg, suffix);
  write_file_atomic(path, contents);
  std::cout << "wrote " << path << "\n";
}

const char* entropy_kind_name(EntropyEstimate::Kind k) {
  switch (k) {
    case EntropyEstimate::Kind::kExact: return "exact";
    case EntropyEstimate::Kind::kConditional: return "conditional";
    default: return "block_upper";
  }
}

// ---- assertion evaluation ----------------------------------------------

struct RunQuantities {
  double omega = 1.0;
  Coord collar = 0;
  std::optional<std::size_t> report_idx;  // into the owner's PressureReport list
  std::optional<double> lower;
  std::optional<double> gap_abs;
  std::optional<double> dimension;
  std::optional<double> value;
  std::optional<double> max_violation;
};

struct AssertionOutcome {
  std::string name;
  bool pass;
  std::string witness;
};

std::string run_tag(const RunQuantities& q) {
  return "omega=" + format_double(q.omega) + " collar=" + std::to_string(q.collar);
}

// Every assertion is checked against every run; a quantity the subcommand did
// not compute is a failure, not a silent pass.
std::vector<AssertionOutcome> evaluate_asserts(const std::map<std::string, double>& asserts,
                                               const std::vector<RunQuantities>& runs,
                                               const std::vector<PressureReport>& reports) {
  std::vector<AssertionOutcome> out;
  auto tol_of = [&](const std::string& key, double fallback) {
    auto it = asserts.find(key);
    return it == asserts.end() ? fallback : it->second;
  };
  auto check_scalar = [&](const std::string& name, double target, double tol,
                          const std::optional<double> RunQuantities::*field) {
    AssertionOutcome a{name, true, ""};
    for (const RunQuantities& q : runs) {
      const std::optional<double>& v = q.*field;
      if (!v) {
        a.pass = false;
        a.witness = run_tag(q) + ": quantity not computed by this subcommand";
        break;
      }
      if (!(std::abs(*v - target) <= tol)) {
        a.pass = false;
        a.witness = run_tag(q) + ": got " + format_double(*v) + ", expected " +
                    format_double(target) + " within " + format_double(tol);
        break;
      }
    }
    out.push_back(std::move(a));
  };
  auto check_bound = [&](const std::string& name, double bound,
                         const std::optional<double> RunQuantities::*field) {
    AssertionOutcome a{name, true, ""};
    for (const RunQuantities& q : runs) {
      const std::optional<double>& v = q.*field;
      if (!v) {
        a.pass = false;
        a.witness = run_tag(q) + ": quantity not computed by this subcommand";
        break;
      }
      if (!(*v <= bound)) {
        a.pass = false;
        a.witness = run_tag(q) + ": got " + format_double(*v) + ", bound " + format_double(bound);
        break;
      }
    }
    out.push_back(std::move(a));
  };

  for (const auto& [key, target] : asserts) {
    if (key.size() > 4 && key.compare(key.size() - 4, 4, "_tol") == 0) continue;  // partner keys
    if (key == "rows_equal") {
      double tol = tol_of("rows_tol", 1e-9);
      AssertionOutcome a{key, true, ""};
      for (const RunQuantities& q : runs) {
        if (!q.report_idx) {
          a.pass = false;
          a.witness = run_tag(q) + ": no window table computed by this subcommand";
          break;
        }
        for (const PressureRow& r : reports[*q.report_idx].rows) {
          if (!(std::abs(r.estimate - target) <= tol)) {
            a.pass = false;
            a.witness = run_tag(q) + " window side " + std::to_string(r.side) + ": estimate " +
                        format_double(r.estimate) + ", expected " + format_double(target) +
                        " within " + format_double(tol);
            break;
          }
        }
        if (!a.pass) break;
      }
      out.push_back(std::move(a));
    } else if (key == "fekete" || key == "increment") {
      double tol = tol_of(key + "_tol", 1e-9);
      AssertionOutcome a{key, true, ""};
      for (const RunQuantities& q : runs) {
        if (!q.report_idx) {
          a.pass = false;
          a.witness = run_tag(q) + ": no window table computed by this subcommand";
          break;
        }
        const PressureReport& rep = reports[*q.report_idx];
        double v = key == "fekete" ? rep.fekete_bound : rep.increment_estimate;
        if (!(std::abs(v - target) <= tol)) {
          a.pass = false;
          a.witness = run_tag(q) + ": got " + format_double(v) + ", expected " +
                      format_double(target) + " within " + format_double(tol);
          break;
        }
      }
      out.push_back(std::move(a));
    } else if (key == "lower") {
      check_scalar(key, target, tol_of("lower_tol", 1e-9), &RunQuantities::lower);
    } else if (key == "value") {
      check_scalar(key, target, tol_of("value_tol", 1e-9), &RunQuantities::value);
    } else if (key == "dimension") {
      check_scalar(key, target, tol_of("dimension_tol", 1e-9), &RunQuantities::dimension);
    } else if (key == "gap_abs_le") {
      check_bound(key, target, &RunQuantities::gap_abs);
    } else if (key == "max_violation_le") {
      check_bound(key, target, &RunQuantities::max_violation);
    }
  }
  return out;
}

// ---- shared JSON fragments ----------------------------------------------

void write_header(JsonWriter& w, const ExperimentConfig& cfg, const std::string& sub) {
  w.key("version").value(kVersion);
  w.key("name").value(cfg.name);
  w.key("config_hash").value(cfg.config_hash);
  w.key("seed").value(cfg.seed);
  w.key("subcommand").value(sub);
}

void write_report_fields(JsonWriter& w, const PressureReport& rep) {
  w.key("rows").begin_array();
  for (const PressureRow& r : rep.rows) {
    w.begin_object();
    w.key("side").value(static_cast<std::int64_t>(r.side));
    w.key("volume").value(static_cast<std::uint64_t>(r.volume));
    w.key("log_z").value(r.log_z);
    w.key("estimate").value(r.estimate);
    w.key("fekete").value(r.fekete_running);
    w.key("increment").value(r.increment);
    w.key("exact_sup").value(r.exact_sup);
    w.end_object();
  }
  w.end_array();
  w.key("fekete").value(rep.fekete_bound);
  w.key("increment").value(rep.increment_estimate);
  w.key("stabilized").value(rep.stabilized);
  w.key("exact_sup").value(rep.exact_sup);
}

void csv_report_rows(CsvWriter& csv, double omega, Coord collar, const PressureReport& rep) {
  for (const PressureRow& r : rep.rows) {
    csv.row({format_double(omega), std::to_string(collar), std::to_string(r.side),
             std::to_string(r.volume), format_double(r.log_z), format_double(r.estimate),
             format_double(r.fekete_running), format_double(r.increment),
             r.exact_sup ? "1" : "0"});
  }
}

void write_measure_fields(JsonWriter& w, const Measure& mu) {
  w.key("measure").begin_object();
  w.key("kind").value(mu.kind() == MeasureKind::kBernoulli ? "bernoulli" : "markov");
  if (mu.kind() == MeasureKind::kBernoulli) {
    w.key("probs").begin_array();
    for (double p : mu.probs()) w.value(p);
    w.end_array();
  } else {
    w.key("transition").begin_array();
    int k = mu.alphabet_size();
    for (int s = 0; s < k; ++s) {
      w.begin_array();
      for (int t = 0; t < k; ++t)
        w.value(mu.transition()[static_cast<std::size_t>(s * k + t)]);
      w.end_array();
    }
    w.end_array();
    w.key("stationary").begin_array();
    for (double p : mu.stationary()) w.value(p);
    w.end_array();
  }
  w.end_object();
}

void write_optimize_fields(JsonWriter& w, const OptimizeResult& res) {
  w.key("objective").value(res.objective);
  w.key("entropy_x").value(res.entropy_x);
  w.key("entropy_y").value(res.entropy_y);
  w.key("entropy_y_kind").value(entropy_kind_name(res.entropy_y_kind));
  w.key("integral").value(res.integral);
  w.key("best_restart").value(static_cast<std::int64_t>(res.best_restart));
  w.key("evaluations").value(res.evaluations);
  write_measure_fields(w, res.measure);
}

void write_assertions(JsonWriter& w, const std::vector<AssertionOutcome>& asserts, bool pass) {
  w.key("assertions").begin_array();
  for (const AssertionOutcome& a : asserts) {
    w.begin_object();
    w.key("name").value(a.name);
    w.key("pass").value(a.pass);
    w.key("witness").value(a.witness);
    w.end_object();
  }
  w.end_array();
  w.key("pass").value(pass);
}

int finish(const ExperimentConfig& cfg, const std::string& sub,
           const std::vector<AssertionOutcome>& asserts) {
  bool ok = true;
  for (const AssertionOutcome& a : asserts) {
    if (!a.pass) {
      ok = false;
      std::cout << "assertion " << a.name << " failed: " << a.witness << "\n";
    }
  }
  std::cout << cfg.name << " " << sub << ": " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? kExitOk : kExitAssertionFailed;
}

// ---- subcommands ---------------------------------------------------------

int run_pressure(const ExperimentConfig& cfg) {
  std::vector<BoxWindow> windows = cfg.window_boxes();
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "pressure");
  CsvWriter csv({"omega", "collar", "side", "volume", "log_z", "estimate", "fekete", "increment",
                 "exact_sup"});
  w.key("runs").begin_array();
  for (double omega : cfg.omegas) {
    for (Coord collar : cfg.collars) {
      WeightedInstance inst = make_instance(cfg.code, cfg.f(), omega, collar);
      PressureReport rep = pressure_estimate(inst, windows, cfg.limits);
      w.begin_object();
      w.key("omega").value(omega);
      w.key("collar").value(static_cast<std::int64_t>(collar));
      write_report_fields(w, rep);
      w.end_object();
      csv_report_rows(csv, omega, collar, rep);
      std::cout << "pressure omega=" << format_double(omega) << " collar=" << collar
                << ": fekete=" << format_double(rep.fekete_bound)
                << " increment=" << format_double(rep.increment_estimate) << "\n";
      RunQuantities q;
      q.omega = omega;
      q.collar = collar;
      q.report_idx = reports.size();
      reports.push_back(std::move(rep));
      runs.push_back(std::move(q));
    }
  }
  w.end_array();
  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "pressure.json", w.take());
  emit(cfg, "pressure_rows.csv", csv.take());
  return finish(cfg, "pressure", asserts);
}

int run_entropy(const ExperimentConfig& cfg) {
  std::vector<BoxWindow> windows = cfg.window_boxes();
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "entropy");
  std::optional<CsvWriter> csv;

  if (!cfg.grid.empty()) {
    if (!cfg.measure)
      throw ConfigError("config field \"measure\": required when a potential grid is given");
    EntropyRecovery rec =
        entropy_from_pressure(cfg.system, *cfg.measure, cfg.grid, windows, cfg.limits);
    w.key("mode").value("recovery");
    w.key("value").value(rec.value);
    w.key("best_index").value(static_cast<std::uint64_t>(rec.best_index));
    w.key("per_potential").begin_array();
    for (double v : rec.per_potential) w.value(v);
    w.end_array();
    w.key("measure_entropy").value(cfg.measure->entropy_rate());
    std::cout << "entropy recovery: value=" << format_double(rec.value)
              << " best_index=" << rec.best_index << "\n";
    RunQuantities q;
    q.value = rec.value;
    runs.push_back(std::move(q));
  } else if (cfg.measure) {
    const Measure& mu = *cfg.measure;
    double hx = mu.entropy_rate();
    EntropyEstimate hy =
        pushforward_entropy_rate(*cfg.code, mu, cfg.optimizer.entropy_depth, cfg.limits);
    w.key("mode").value("measure");
    w.key("entropy_x").value(hx);
    w.key("entropy_y").value(hy.value);
    w.key("entropy_y_kind").value(entropy_kind_name(hy.kind));
    w.key("runs").begin_array();
    for (double omega : cfg.omegas) {
      double weighted = omega * hx + (1.0 - omega) * hy.value;
      w.begin_object();
      w.key("omega").value(omega);
      w.key("weighted_entropy").value(weighted);
      w.end_object();
      std::cout << "entropy omega=" << format_double(omega)
                << ": weighted=" << format_double(weighted) << "\n";
      RunQuantities q;
      q.omega = omega;
      q.value = weighted;
      runs.push_back(std::move(q));
    }
    w.end_array();
  } else {
    w.key("mode").value("topological");
    csv.emplace(std::vector<std::string>{"omega", "collar", "side", "volume", "log_z", "estimate",
                                         "fekete", "increment", "exact_sup"});
    w.key("runs").begin_array();
    for (double omega : cfg.omegas) {
      for (Coord collar : cfg.collars) {
        PressureReport rep = weighted_entropy_report(cfg.code, omega, collar, windows, cfg.limits);
        w.begin_object();
        w.key("omega").value(omega);
        w.key("collar").value(static_cast<std::int64_t>(collar));
        write_report_fields(w, rep);
        w.end_object();
        csv_report_rows(*csv, omega, collar, rep);
        std::cout << "entropy omega=" << format_double(omega) << " collar=" << collar
                  << ": fekete=" << format_double(rep.fekete_bound) << "\n";
        RunQuantities q;
        q.omega = omega;
        q.collar = collar;
        q.report_idx = reports.size();
        reports.push_back(std::move(rep));
        runs.push_back(std::move(q));
      }
    }
    w.end_array();
  }

  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "entropy.json", w.take());
  if (csv) emit(cfg, "entropy_rows.csv", csv->take());
  return finish(cfg, "entropy", asserts);
}

int run_optimize(const ExperimentConfig& cfg) {
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "optimize");
  CsvWriter csv({"omega", "collar", "restart", "iteration", "objective"});
  w.key("runs").begin_array();
  for (double omega : cfg.omegas) {
    for (Coord collar : cfg.collars) {
      WeightedInstance inst = make_instance(cfg.code, cfg.f(), omega, collar);
      OptimizeOptions opt = cfg.optimizer;
      opt.record_trace = true;
      OptimizeResult res = optimize(inst, opt, cfg.limits);
      w.begin_object();
      w.key("omega").value(omega);
      w.key("collar").value(static_cast<std::int64_t>(collar));
      write_optimize_fields(w, res);
      w.end_object();
      for (const OptTracePoint& t : res.trace) {
        csv.row({format_double(omega), std::to_string(collar), std::to_string(t.restart),
                 std::to_string(t.iteration), format_double(t.objective)});
      }
      std::cout << "optimize omega=" << format_double(omega) << " collar=" << collar
                << ": objective=" << format_double(res.objective) << "\n";
      RunQuantities q;
      q.omega = omega;
      q.collar = collar;
      q.lower = res.objective;
      q.value = res.objective;
      runs.push_back(std::move(q));
    }
  }
  w.end_array();
  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "optimize.json", w.take());
  emit(cfg, "optimize_trace.csv", csv.take());
  return finish(cfg, "optimize", asserts);
}

int run_sandwich(const ExperimentConfig& cfg) {
  std::vector<BoxWindow> windows = cfg.window_boxes();
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  std::vector<AssertionOutcome> extra;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "sandwich");
  CsvWriter csv({"omega", "collar", "side", "volume", "log_z", "estimate", "fekete", "increment",
                 "exact_sup"});
  w.key("runs").begin_array();
  for (double omega : cfg.omegas) {
    for (Coord collar : cfg.collars) {
      WeightedInstance inst = make_instance(cfg.code, cfg.f(), omega, collar);
      SandwichCertificate cert = sandwich(inst, windows, cfg.optimizer, cfg.limits);
      w.begin_object();
      w.key("omega").value(omega);
      w.key("collar").value(static_cast<std::int64_t>(collar));
      w.key("upper").begin_object();
      write_report_fields(w, cert.upper);
      w.end_object();
      w.key("lower").begin_object();
      write_optimize_fields(w, cert.lower);
      w.end_object();
      w.key("gap_refined").value(cert.gap_refined);
      w.key("gap_certified").value(cert.gap_certified);
      w.key("certified_ok").value(cert.certified_ok);
      w.end_object();
      csv_report_rows(csv, omega, collar, cert.upper);
      std::cout << "sandwich omega=" << format_double(omega) << " collar=" << collar
                << ": upper=" << format_double(cert.upper.fekete_bound)
                << " lower=" << format_double(cert.lower.objective)
                << " gap_refined=" << format_double(cert.gap_refined) << "\n";
      RunQuantities q;
      q.omega = omega;
      q.collar = collar;
      q.report_idx = reports.size();
      q.lower = cert.lower.objective;
      q.value = cert.lower.objective;
      q.gap_abs = std::abs(cert.gap_refined);
      if (!cert.certified_ok) {
        extra.push_back({"certified_order", false,
                         run_tag(q) + ": certified upper " + format_double(cert.upper.fekete_bound) +
                             " fell below the family lower bound " +
                             format_double(cert.lower.objective)});
      }
      reports.push_back(cert.upper);
      runs.push_back(std::move(q));
    }
  }
  w.end_array();
  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  asserts.insert(asserts.end(), extra.begin(), extra.end());
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "sandwich.json", w.take());
  emit(cfg, "sandwich_rows.csv", csv.take());
  return finish(cfg, "sandwich", asserts);
}

Potential seeded_potential(const ShiftSystem& sys, Coord radius, std::mt19937_64& rng,
                           double scale) {
  std::uint64_t block = 1;
  for (int a = 0; a < sys.dim(); ++a) block *= static_cast<std::uint64_t>(2 * radius + 1);
  std::uint64_t n = 1;
  for (std::uint64_t i = 0; i < block; ++i) n *= static_cast<std::uint64_t>(sys.alphabet_size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> table(n);
  for (double& v : table) v = scale * gauss(rng);
  return Potential(sys, radius, std::move(table));
}

int run_properties(const ExperimentConfig& cfg) {
  std::vector<BoxWindow> windows = cfg.window_boxes();
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "properties");
  std::mt19937_64 rng(cfg.seed);
  bool all_ok = true;
  w.key("runs").begin_array();
  for (double omega : cfg.omegas) {
    for (Coord collar : cfg.collars) {
      WeightedInstance inst = make_instance(cfg.code, cfg.f(), omega, collar);
      Potential g = seeded_potential(*cfg.system, 1, rng, 0.5);
      auto checks = pressure_properties_suite(inst, windows.back(), g, 0.375, 1, 1e-9, cfg.limits);
      w.begin_object();
      w.key("omega").value(omega);
      w.key("collar").value(static_cast<std::int64_t>(collar));
      w.key("checks").begin_array();
      for (const PropertyCheck& c : checks) {
        w.begin_object();
        w.key("name").value(c.name);
        w.key("lhs").value(c.lhs);
        w.key("rhs").value(c.rhs);
        w.key("slack").value(c.slack);
        w.key("ok").value(c.ok);
        w.end_object();
        if (!c.ok) {
          all_ok = false;
          std::cout << "property " << c.name << " failed at omega=" << format_double(omega)
                    << ": lhs=" << format_double(c.lhs) << " rhs=" << format_double(c.rhs) << "\n";
        }
      }
      w.end_array();
      w.end_object();
    }
  }
  w.end_array();
  w.key("pass").value(all_ok);
  w.end_object();
  emit(cfg, "properties.json", w.take());
  std::cout << cfg.name << " properties: " << (all_ok ? "ok" : "FAILED") << "\n";
  return all_ok ? kExitOk : kExitAssertionFailed;
}

int run_equilibrium(const ExperimentConfig& cfg) {
  if (!cfg.measure)
    throw ConfigError("config field \"measure\": required by the equilibrium subcommand");
  std::vector<BoxWindow> windows = cfg.window_boxes();
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  std::vector<AssertionOutcome> extra;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "equilibrium");
  w.key("runs").begin_array();
  for (double omega : cfg.omegas) {
    for (Coord collar : cfg.collars) {
      WeightedInstance inst = make_instance(cfg.code, cfg.f(), omega, collar);
      EquilibriumReport rep =
          equilibrium_check(inst, *cfg.measure, windows, 8, cfg.seed, 1e-9, cfg.limits);
      w.begin_object();
      w.key("omega").value(omega);
      w.key("collar").value(static_cast<std::int64_t>(collar));
      w.key("pressure_certified").value(rep.pressure_certified);
      w.key("pressure_refined").value(rep.pressure_refined);
      w.key("objective").value(rep.objective);
      w.key("entropy_y_kind").value(entropy_kind_name(rep.entropy_y_kind));
      w.key("defect_certified").value(rep.defect_certified);
      w.key("defect_refined").value(rep.defect_refined);
      w.key("tangency_worst_violation").value(rep.tangency.worst_violation);
      w.key("tangency_ok").value(rep.tangency.ok);
      w.key("mixture_entropy_slack").value(rep.mixture_entropy_slack);
      w.key("ok").value(rep.ok);
      w.end_object();
      std::cout << "equilibrium omega=" << format_double(omega) << " collar=" << collar
                << ": defect=" << format_double(rep.defect_refined)
                << " tangency_worst=" << format_double(rep.tangency.worst_violation)
                << (rep.ok ? " ok" : " FAILED") << "\n";
      RunQuantities q;
      q.omega = omega;
      q.collar = collar;
      q.value = rep.objective;
      q.max_violation = rep.tangency.worst_violation;
      if (!rep.ok)
        extra.push_back({"equilibrium_ok", false, run_tag(q) + ": diagnosis rejected the measure"});
      runs.push_back(std::move(q));
    }
  }
  w.end_array();
  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  asserts.insert(asserts.end(), extra.begin(), extra.end());
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "equilibrium.json", w.take());
  return finish(cfg, "equilibrium", asserts);
}

int run_carpet(const ExperimentConfig& cfg) {
  if (!cfg.carpet) throw ConfigError("config field \"carpet\": required by the carpet subcommand");
  std::vector<BoxWindow> windows;
  for (Coord s : cfg.window_sides) windows.push_back(BoxWindow::cube(1, s));
  CarpetResult res = carpet_dimension(*cfg.carpet, windows, cfg.limits);
  std::vector<PressureReport> reports;
  std::vector<RunQuantities> runs;
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "carpet");
  w.key("omega").value(res.omega);
  write_report_fields(w, res.report);
  w.key("weighted_entropy").value(res.weighted_entropy);
  w.key("dimension").value(res.dimension);
  w.key("dimension_closed").value(res.dimension_closed);
  std::cout << "carpet: dimension=" << format_double(res.dimension)
            << " closed_form=" << format_double(res.dimension_closed) << "\n";
  CsvWriter csv({"omega", "collar", "side", "volume", "log_z", "estimate", "fekete", "increment",
                 "exact_sup"});
  csv_report_rows(csv, res.omega, 0, res.report);
  RunQuantities q;
  q.omega = res.omega;
  q.report_idx = 0;
  q.dimension = res.dimension;
  q.value = res.dimension;
  reports.push_back(res.report);
  runs.push_back(std::move(q));
  auto asserts = evaluate_asserts(cfg.asserts, runs, reports);
  bool pass = std::all_of(asserts.begin(), asserts.end(),
                          [](const AssertionOutcome& a) { return a.pass; });
  write_assertions(w, asserts, pass);
  w.end_object();
  emit(cfg, "carpet.json", w.take());
  emit(cfg, "carpet_rows.csv", csv.take());
  return finish(cfg, "carpet", asserts);
}

// ---- verify suite ---------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool pass;
  double margin;  // distance to the asserted bound; negative means violated
  std::string witness;
};

SystemPtr golden_mean() {
  std::vector<ForbiddenPattern> fb;
  fb.push_back(ForbiddenPattern{BoxWindow{{0}, {1}}, {1, 1}});
  return std::make_shared<const ShiftSystem>(1, Alphabet{2, {}}, std::move(fb));
}

SystemPtr full_shift(int k) {
  return std::make_shared<const ShiftSystem>(1, Alphabet{k, {}}, std::vector<ForbiddenPattern>{});
}

// X = full shift on pairs {0,1}x{0,1,2} as 6 symbols (s = 3a + b), factoring
// onto the first coordinate.
std::shared_ptr<const BlockCode> product_first_coordinate(SystemPtr& x_out) {
  SystemPtr x = full_shift(6);
  SystemPtr y = full_shift(2);
  std::vector<std::uint8_t> rule = {0, 0, 0, 1, 1, 1};
  x_out = x;
  return std::make_shared<const BlockCode>(x, y, BoxWindow{{0}, {0}}, std::move(rule));
}

VerifyCheck check_gibbs_inequality(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> size(1, 8);
  VerifyCheck out{"gibbs_inequality", true, kNegInf, ""};
  double margin = 1e300;
  for (int s = 0; s < 220; ++s) {
    int n = size(rng);
    std::vector<double> p(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
    double tot = 0.0;
    for (double& v : p) {
      v = expo(rng);
      tot += v;
    }
    for (double& v : p) v /= tot;
    // last fifth: the sharp case x = log p, where equality holds
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = s % 5 == 4 ? std::log(p[i]) : gauss(rng);
    CompensatedSum lhs;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (p[i] > 0) lhs.add(-p[i] * std::log(p[i]) + p[i] * x[i]);
    }
    LogSumExp rhs;
    for (double v : x) rhs.add(v);
    double slack = rhs.value() - lhs.value();
    margin = std::min(margin, slack);
    if (slack < -1e-12) {
      out.pass = false;
      out.witness = "sample " + std::to_string(s) + ": entropy-plus-mean " +
                    format_double(lhs.value()) + " exceeds log-sum-exp " +
                    format_double(rhs.value());
      break;
    }
  }
  out.margin = margin;
  return out;
}

VerifyCheck check_gibbs_identity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VerifyCheck out{"gibbs_identity", true, kNegInf, ""};
  double worst = 0.0;
  SystemPtr gm = golden_mean();
  auto gm_code = std::make_shared<const BlockCode>(BlockCode::identity(gm));
  SystemPtr prod;
  auto prod_code = product_first_coordinate(prod);
  struct Case {
    SystemPtr sys;
    std::shared_ptr<const BlockCode> code;
  };
  const Case cases[] = {{gm, gm_code}, {prod, prod_code}};
  for (const Case& c : cases) {
    for (double omega : {0.3, 0.7}) {
      Potential f = seeded_potential(*c.sys, 0, rng, 1.0);
      for (Coord side : {4, 6, 8}) {
        WeightedInstance inst = make_instance(c.code, f, omega, 0);
        GibbsIdentity id = gibbs_identity_terms(inst, BoxWindow::cube(1, side));
        worst = std::max(worst, std::abs(id.defect));
        if (!(std::abs(id.defect) <= 1e-9)) {
          out.pass = false;
          out.witness = "omega=" + format_double(omega) + " window side " + std::to_string(side) +
                        ": weighted entropy sum " + format_double(id.lhs) + " vs log Z " +
                        format_double(id.log_z);
          out.margin = 1e-9 - std::abs(id.defect);
          return out;
        }
      }
    }
  }
  out.margin = 1e-9 - worst;
  return out;
}

VerifyCheck check_pressure_properties(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VerifyCheck out{"pressure_properties", true, kNegInf, ""};
  SystemPtr gm = golden_mean();
  auto code = std::make_shared<const BlockCode>(BlockCode::identity(gm));
  double margin = 1e300;
  for (int rep = 0; rep < 4; ++rep) {
    Potential f = seeded_potential(*gm, 1, rng, 0.7);
    Potential g = seeded_potential(*gm, 1, rng, 0.7);
    WeightedInstance inst = make_instance(code, f, 0.5, 0);
    auto checks = pressure_properties_suite(inst, BoxWindow::cube(1, 8), g, 0.375, 1, 1e-9);
    for (const PropertyCheck& c : checks) {
      margin = std::min(margin, c.slack);
      if (!c.ok) {
        out.pass = false;
        out.witness = "pair " + std::to_string(rep) + " " + c.name + ": lhs " +
                      format_double(c.lhs) + " rhs " + format_double(c.rhs);
        out.margin = c.slack;
        return out;
      }
    }
  }
  out.margin = margin;
  return out;
}

VerifyCheck check_fiber_inequality(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VerifyCheck out{"fiber_inequality", true, kNegInf, ""};
  double margin = 1e300;

  // phi = identity: refining Y by itself must not move the estimates at all.
  SystemPtr prod;
  auto pi = product_first_coordinate(prod);
  BlockCode phi_id = BlockCode::identity(pi->target_ptr());
  FiberSystem fiber = fiber_product(*pi, phi_id);
  Potential f = seeded_potential(*prod, 0, rng, 1.0);
  auto fiber_code = std::make_shared<const BlockCode>(fiber.to_base);
  Potential f_lift = pullback(f, fiber.to_x);
  for (Coord side : {4, 6, 8}) {
    BoxWindow w = BoxWindow::cube(1, side);
    double vol = static_cast<double>(w.volume());
    double base = weighted_partition(make_instance(pi, f, 0.5, 0), w).log_z / vol;
    double lifted_est =
        weighted_partition(make_instance(fiber_code, f_lift, 0.5, 0), w).log_z / vol;
    double diff = std::abs(lifted_est - base);
    margin = std::min(margin, 1e-9 - diff);
    if (diff > 1e-9) {
      out.pass = false;
      out.witness = "identity refinement, window side " + std::to_string(side) + ": base " +
                    format_double(base) + " vs fiber " + format_double(lifted_est);
      out.margin = 1e-9 - diff;
      return out;
    }
  }

  // nontrivial phi: refining the one-point factor by a full 2-shift can only
  // raise the estimate.
  SystemPtr x2 = full_shift(2);
  auto collapse_x = std::make_shared<const BlockCode>(BlockCode::collapse(x2));
  BlockCode collapse_y = BlockCode::collapse(full_shift(2));
  FiberSystem fiber2 = fiber_product(*collapse_x, collapse_y);
  Potential f2 = seeded_potential(*x2, 0, rng, 1.0);
  auto fiber2_code = std::make_shared<const BlockCode>(fiber2.to_base);
  Potential f2_lift = pullback(f2, fiber2.to_x);
  for (Coord side : {4, 6, 8}) {
    BoxWindow w = BoxWindow::cube(1, side);
    double vol = static_cast<double>(w.volume());
    double base = weighted_partition(make_instance(collapse_x, f2, 0.5, 0), w).log_z / vol;
    double refined =
        weighted_partition(make_instance(fiber2_code, f2_lift, 0.5, 0), w).log_z / vol;
    margin = std::min(margin, refined - base);
    if (refined < base - 1e-12) {
      out.pass = false;
      out.witness = "full-shift refinement, window side " + std::to_string(side) +
                    ": refined estimate " + format_double(refined) + " fell below base " +
                    format_double(base);
      out.margin = refined - base;
      return out;
    }
  }
  out.margin = margin;
  return out;
}

// Deliberately broken accumulation: the omega power applied to Z_A in linear
// space instead of log space. The huge potential makes exp overflow, so log Z
// comes back infinite and the weighted-entropy identity breaks. This check is
// supposed to fail; it exists so the suite demonstrably catches the bug.
VerifyCheck check_gibbs_identity_linear_bug(std::uint64_t) {
  VerifyCheck out{"gibbs_identity_linear_bug", true, kNegInf, ""};
  SystemPtr gm = golden_mean();
  auto code = std::make_shared<const BlockCode>(BlockCode::identity(gm));
  Potential f(*gm, 0, {401.0, 399.5});
  WeightedInstance inst = make_instance(code, f, 0.7, 0);
  BoxWindow w = BoxWindow::cube(1, 6);
  PartitionResult part = weighted_partition(inst, w);
  double z_linear = 0.0;
  for (const PartitionEntry& e : part.per_a) z_linear += std::pow(std::exp(e.log_z), inst.omega);
  double log_z_linear = std::log(z_linear);
  GibbsIdentity id = gibbs_identity_terms(inst, w);
  double defect = std::abs(id.lhs - log_z_linear);
  out.margin = 1e-9 - defect;
  if (!(defect <= 1e-9)) {
    out.pass = false;
    out.witness = "window side 6: linear-space log Z = " + format_double(log_z_linear) +
                  ", log-space log Z = " + format_double(part.log_z) +
                  ", weighted entropy sum = " + format_double(id.lhs);
  }
  return out;
}

int run_verify(const ExperimentConfig& cfg) {
  std::vector<std::string> checks =
      cfg.checks ? *cfg.checks : default_verify_checks();
  JsonWriter w;
  w.begin_object();
  write_header(w, cfg, "verify");
  w.key("checks").begin_array();
  bool all_ok = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string& name = checks[i];
    VerifyCheck c{};
    if (name == "gibbs_inequality") {
      c = check_gibbs_inequality(cfg.seed);
    } else if (name == "gibbs_identity") {
      c = check_gibbs_identity(cfg.seed);
    } else if (name == "pressure_properties") {
      c = check_pressure_properties(cfg.seed);
    } else if (name == "fiber_inequality") {
      c = check_fiber_inequality(cfg.seed);
    } else if (name == "gibbs_identity_linear_bug") {
      c = check_gibbs_identity_linear_bug(cfg.seed);
    } else {
      throw ConfigError("config field \"checks[" + std::to_string(i) + "]\": unknown check \"" +
                        name + "\"");
    }
    w.begin_object();
    w.key("name").value(c.name);
    w.key("pass").value(c.pass);
    w.key("margin").value(c.margin);
    w.key("witness").value(c.witness);
    w.end_object();
    std::cout << "verify " << c.name << ": " << (c.pass ? "ok" : "FAILED");
    if (!c.pass) std::cout << " (" << c.witness << ")";
    std::cout << "\n";
    all_ok = all_ok && c.pass;
  }
  w.end_array();
  w.key("pass").value(all_ok);
  w.end_object();
  emit(cfg, "verify.json", w.take());
  std::cout << cfg.name << " verify: " << (all_ok ? "ok" : "FAILED") << "\n";
  return all_ok ? kExitOk : kExitAssertionFailed;
}

}  // namespace

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> subs = {"pressure", "entropy",     "optimize",
                                                "sandwich", "properties",  "equilibrium",
                                                "carpet",   "verify"};
  return subs;
}

const std::vector<std::string>& default_verify_checks() {
  static const std::vector<std::string> checks = {"gibbs_inequality", "gibbs_identity",
                                                  "pressure_properties", "fiber_inequality"};
  return checks;
}

int run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg) {
  if (subcommand == "pressure") return run_pressure(cfg);
  if (subcommand == "entropy") return run_entropy(cfg);
  if (subcommand == "optimize") return run_optimize(cfg);
  if (subcommand == "sandwich") return run_sandwich(cfg);
  if (subcommand == "properties") return run_properties(cfg);
  if (subcommand == "equilibrium") return run_equilibrium(cfg);
  if (subcommand == "carpet") return run_carpet(cfg);
  if (subcommand == "verify") return run_verify(cfg);
  throw ConfigError("unknown subcommand \"" + subcommand + "\"");
}

}  // namespace presslab
