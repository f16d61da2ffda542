#include "presslab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "presslab/errors.hpp"
#include "presslab/report.hpp"

namespace presslab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ConfigError("config field \"" + field + "\": " + why);
}

void require_keys(const json& j, const std::string& path, const std::set<std::string>& known) {
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!known.count(k)) bad(path.empty() ? k : path + "." + k, "unknown field");
  }
}

const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "must be an integer");
  return j.get<std::int64_t>();
}

double get_num(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "must be a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) bad(field, "must be a boolean");
  return j.get<bool>();
}

std::string get_str(const json& j, const std::string& field) {
  if (!j.is_string()) bad(field, "must be a string");
  return j.get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) bad(field, "must be a number or a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_num(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Coord> get_int_list(const json& j, const std::string& field) {
  if (j.is_number_integer()) return {j.get<Coord>()};
  if (!j.is_array() || j.empty()) bad(field, "must be an integer or a nonempty array of integers");
  std::vector<Coord> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_int(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::uint8_t> get_symbol_list(const json& j, const std::string& field, int alphabet) {
  if (!j.is_array()) bad(field, "must be an array of symbols");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::int64_t s = get_int(j[i], field + "[" + std::to_string(i) + "]");
    if (s < 0 || s >= alphabet)
      bad(field + "[" + std::to_string(i) + "]",
          "symbol out of range for alphabet size " + std::to_string(alphabet));
    out.push_back(static_cast<std::uint8_t>(s));
  }
  return out;
}

SystemPtr parse_system(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "must be an object");
  require_keys(j, path, {"dim", "alphabet", "forbidden"});
  const json* jd = find(j, "dim");
  int dim = jd ? static_cast<int>(get_int(*jd, path + ".dim")) : 1;
  if (dim < 1 || dim > 4) bad(path + ".dim", "must be in [1, 4]");
  const json* ja = find(j, "alphabet");
  if (!ja) bad(path + ".alphabet", "is required");
  int alphabet = static_cast<int>(get_int(*ja, path + ".alphabet"));
  if (alphabet < 1 || alphabet > 255) bad(path + ".alphabet", "must be in [1, 255]");

  std::vector<ForbiddenPattern> forbidden;
  if (const json* jf = find(j, "forbidden")) {
    if (!jf->is_array()) bad(path + ".forbidden", "must be an array");
    for (std::size_t i = 0; i < jf->size(); ++i) {
      std::string fp = path + ".forbidden[" + std::to_string(i) + "]";
      const json& e = (*jf)[i];
      if (!e.is_object()) bad(fp, "must be an object");
      require_keys(e, fp, {"shape", "symbols"});
      const json* js = find(e, "shape");
      if (!js) bad(fp + ".shape", "is required");
      std::vector<Coord> shape = get_int_list(*js, fp + ".shape");
      if (static_cast<int>(shape.size()) != dim)
        bad(fp + ".shape", "must list " + std::to_string(dim) + " extents");
      Site lo(dim, 0), hi(dim);
      std::uint64_t vol = 1;
      for (int a = 0; a < dim; ++a) {
        if (shape[static_cast<std::size_t>(a)] < 1) bad(fp + ".shape", "extents must be positive");
        hi[static_cast<std::size_t>(a)] = shape[static_cast<std::size_t>(a)] - 1;
        vol *= static_cast<std::uint64_t>(shape[static_cast<std::size_t>(a)]);
      }
      const json* jy = find(e, "symbols");
      if (!jy) bad(fp + ".symbols", "is required");
      std::vector<std::uint8_t> syms = get_symbol_list(*jy, fp + ".symbols", alphabet);
      if (syms.size() != vol)
        bad(fp + ".symbols", "must list " + std::to_string(vol) + " symbols for this shape");
      forbidden.push_back(ForbiddenPattern{BoxWindow{lo, hi}, std::move(syms)});
    }
  }
  try {
    return std::make_shared<const ShiftSystem>(dim, Alphabet{alphabet, {}}, std::move(forbidden));
  } catch (const std::exception& e) {
    bad(path, e.what());
  }
}

std::shared_ptr<const BlockCode> parse_code(const json* j, SystemPtr source) {
  if (!j) return std::make_shared<const BlockCode>(BlockCode::identity(std::move(source)));
  if (!j->is_object()) bad("code", "must be an object");
  require_keys(*j, "code", {"type", "target", "stencil", "rule"});
  const json* jt = find(*j, "type");
  std::string type = jt ? get_str(*jt, "code.type") : std::string("identity");
  if (type == "identity")
    return std::make_shared<const BlockCode>(BlockCode::identity(std::move(source)));
  if (type == "collapse")
    return std::make_shared<const BlockCode>(BlockCode::collapse(std::move(source)));
  if (type != "table") bad("code.type", "must be identity, collapse, or table");

  const json* jtar = find(*j, "target");
  if (!jtar) bad("code.target", "is required for table codes");
  SystemPtr target = parse_system(*jtar, "code.target");

  BoxWindow stencil{Site(source->dim(), 0), Site(source->dim(), 0)};
  if (const json* js = find(*j, "stencil")) {
    if (!js->is_object()) bad("code.stencil", "must be an object with lo and hi");
    require_keys(*js, "code.stencil", {"lo", "hi"});
    const json *jlo = find(*js, "lo"), *jhi = find(*js, "hi");
    if (!jlo || !jhi) bad("code.stencil", "needs both lo and hi");
    std::vector<Coord> lo = get_int_list(*jlo, "code.stencil.lo");
    std::vector<Coord> hi = get_int_list(*jhi, "code.stencil.hi");
    if (static_cast<int>(lo.size()) != source->dim() ||
        static_cast<int>(hi.size()) != source->dim())
      bad("code.stencil", "lo and hi must list " + std::to_string(source->dim()) + " coordinates");
    for (int a = 0; a < source->dim(); ++a)
      if (lo[static_cast<std::size_t>(a)] > hi[static_cast<std::size_t>(a)])
        bad("code.stencil", "lo must not exceed hi");
    stencil = BoxWindow{std::move(lo), std::move(hi)};
  }

  const json* jr = find(*j, "rule");
  if (!jr) bad("code.rule", "is required for table codes");
  std::vector<std::uint8_t> rule = get_symbol_list(*jr, "code.rule", target->alphabet_size());
  try {
    return std::make_shared<const BlockCode>(std::move(source), std::move(target), stencil,
                                             std::move(rule));
  } catch (const std::exception& e) {
    bad("code", e.what());
  }
}

Potential parse_potential(const json* j, const ShiftSystem& sys, const std::string& path) {
  if (!j) return Potential::zero(sys);
  if (!j->is_object()) bad(path, "must be an object");
  require_keys(*j, path, {"type", "radius", "table"});
  const json* jr = find(*j, "radius");
  Coord radius = jr ? get_int(*jr, path + ".radius") : 0;
  if (radius < 0 || radius > 4) bad(path + ".radius", "must be in [0, 4]");
  if (const json* jt = find(*j, "type")) {
    std::string type = get_str(*jt, path + ".type");
    if (type != "zero") bad(path + ".type", "must be zero (or give a table)");
    return Potential::zero(sys, radius);
  }
  const json* jtable = find(*j, "table");
  if (!jtable) bad(path + ".table", "is required");
  if (!jtable->is_array()) bad(path + ".table", "must be an array of numbers");
  std::vector<double> table;
  for (std::size_t i = 0; i < jtable->size(); ++i) {
    double v = get_num((*jtable)[i], path + ".table[" + std::to_string(i) + "]");
    if (!std::isfinite(v)) bad(path + ".table[" + std::to_string(i) + "]", "must be finite");
    table.push_back(v);
  }
  try {
    return Potential(sys, radius, std::move(table));
  } catch (const std::exception& e) {
    bad(path, e.what());
  }
}

Measure parse_measure(const json& j, const ShiftSystem& sys) {
  if (!j.is_object()) bad("measure", "must be an object");
  require_keys(j, "measure", {"type", "probs", "transition"});
  const json* jt = find(j, "type");
  if (!jt) bad("measure.type", "is required");
  std::string type = get_str(*jt, "measure.type");
  try {
    if (type == "bernoulli") {
      const json* jp = find(j, "probs");
      if (!jp) bad("measure.probs", "is required for bernoulli measures");
      std::vector<double> probs = get_num_list(*jp, "measure.probs");
      if (probs.size() != static_cast<std::size_t>(sys.alphabet_size()))
        bad("measure.probs",
            "must list " + std::to_string(sys.alphabet_size()) + " probabilities");
      return Measure::bernoulli(sys.dim(), std::move(probs));
    }
    if (type == "markov") {
      const json* jtr = find(j, "transition");
      if (!jtr || !jtr->is_array()) bad("measure.transition", "must be an array of rows");
      std::size_t k = static_cast<std::size_t>(sys.alphabet_size());
      if (jtr->size() != k)
        bad("measure.transition", "must list " + std::to_string(k) + " rows");
      std::vector<double> flat;
      for (std::size_t i = 0; i < jtr->size(); ++i) {
        std::vector<double> row =
            get_num_list((*jtr)[i], "measure.transition[" + std::to_string(i) + "]");
        if (row.size() != k)
          bad("measure.transition[" + std::to_string(i) + "]",
              "must list " + std::to_string(k) + " entries");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      return Measure::markov(std::move(flat));
    }
    if (type == "parry") return Measure::parry(sys);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    bad("measure", e.what());
  }
  bad("measure.type", "must be bernoulli, markov, or parry");
}

CarpetSpec parse_carpet(const json& j) {
  if (!j.is_object()) bad("carpet", "must be an object");
  require_keys(j, "carpet", {"n", "m", "rows"});
  const json *jn = find(j, "n"), *jm = find(j, "m"), *jr = find(j, "rows");
  if (!jn || !jm || !jr) bad("carpet", "needs n, m, and rows");
  CarpetSpec spec;
  spec.n = static_cast<int>(get_int(*jn, "carpet.n"));
  spec.m = static_cast<int>(get_int(*jm, "carpet.m"));
  if (spec.m < 2) bad("carpet.m", "must be at least 2");
  if (spec.n < spec.m) bad("carpet.n", "must be at least m");
  std::vector<Coord> rows = get_int_list(*jr, "carpet.rows");
  if (static_cast<int>(rows.size()) != spec.m)
    bad("carpet.rows", "must list " + std::to_string(spec.m) + " row counts");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] > spec.n)
      bad("carpet.rows[" + std::to_string(i) + "]", "must be in [0, n]");
    spec.row_counts.push_back(static_cast<int>(rows[i]));
  }
  return spec;
}

void parse_optimizer(const json& j, OptimizeOptions& opt) {
  if (!j.is_object()) bad("optimizer", "must be an object");
  require_keys(j, "optimizer",
               {"restarts", "max_iter_per_param", "tol", "entropy_depth", "warm_start",
                "warm_side", "record_trace"});
  if (const json* v = find(j, "restarts")) {
    opt.restarts = static_cast<int>(get_int(*v, "optimizer.restarts"));
    if (opt.restarts < 1) bad("optimizer.restarts", "must be at least 1");
  }
  if (const json* v = find(j, "max_iter_per_param")) {
    opt.max_iter_per_param = static_cast<int>(get_int(*v, "optimizer.max_iter_per_param"));
    if (opt.max_iter_per_param < 1) bad("optimizer.max_iter_per_param", "must be at least 1");
  }
  if (const json* v = find(j, "tol")) {
    opt.tol = get_num(*v, "optimizer.tol");
    if (!(opt.tol > 0)) bad("optimizer.tol", "must be positive");
  }
  if (const json* v = find(j, "entropy_depth")) {
    opt.entropy_depth = get_int(*v, "optimizer.entropy_depth");
    if (opt.entropy_depth < 2) bad("optimizer.entropy_depth", "must be at least 2");
  }
  if (const json* v = find(j, "warm_start")) opt.warm_start = get_bool(*v, "optimizer.warm_start");
  if (const json* v = find(j, "warm_side")) {
    opt.warm_side = get_int(*v, "optimizer.warm_side");
    if (opt.warm_side < 1) bad("optimizer.warm_side", "must be at least 1");
  }
  if (const json* v = find(j, "record_trace"))
    opt.record_trace = get_bool(*v, "optimizer.record_trace");
}

}  // namespace

bool is_known_assert_key(const std::string& key) {
  static const std::set<std::string> known = {
      "rows_equal",  "rows_tol",      "fekete",    "fekete_tol", "increment", "increment_tol",
      "lower",       "lower_tol",     "gap_abs_le", "dimension", "dimension_tol",
      "value",       "value_tol",     "max_violation_le"};
  return known.count(key) > 0;
}

std::vector<BoxWindow> ExperimentConfig::window_boxes() const {
  std::vector<BoxWindow> out;
  out.reserve(window_sides.size());
  for (Coord s : window_sides) out.push_back(BoxWindow::cube(system->dim(), s));
  return out;
}

ExperimentConfig parse_config(const std::string& json_text, const CliOverrides& o) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  // Fold overrides into the document before hashing so the provenance hash
  // pins the effective experiment, not just the file on disk.
  if (o.seed) j["seed"] = *o.seed;
  if (o.omega) j["omega"] = json::array({*o.omega});
  if (o.collar) j["collar"] = json::array({*o.collar});
  if (o.windows) {
    json arr = json::array();
    for (Coord s : *o.windows) arr.push_back(s);
    j["windows"] = std::move(arr);
  }

  require_keys(j, "",
               {"name", "system", "code", "potential", "omega", "collar", "windows", "family",
                "optimizer", "seed", "measure", "carpet", "grid", "checks", "assert", "out",
                "limits"});

  ExperimentConfig cfg;
  cfg.config_hash = hash_hex(fnv1a(j.dump()));

  if (const json* v = find(j, "name")) cfg.name = get_str(*v, "name");
  if (cfg.name.empty()) bad("name", "must not be empty");

  if (const json* v = find(j, "system")) {
    cfg.system = parse_system(*v, "system");
  } else {
    cfg.system = std::make_shared<const ShiftSystem>(1, Alphabet{2, {}},
                                                     std::vector<ForbiddenPattern>{});
  }
  cfg.code = parse_code(find(j, "code"), cfg.system);
  cfg.potential = parse_potential(find(j, "potential"), *cfg.system, "potential");

  if (const json* v = find(j, "omega")) {
    cfg.omegas = get_num_list(*v, "omega");
    for (std::size_t i = 0; i < cfg.omegas.size(); ++i)
      if (!(cfg.omegas[i] >= 0.0 && cfg.omegas[i] <= 1.0))
        bad("omega[" + std::to_string(i) + "]", "must lie in [0, 1]");
  }
  if (const json* v = find(j, "collar")) {
    cfg.collars = get_int_list(*v, "collar");
    for (std::size_t i = 0; i < cfg.collars.size(); ++i)
      if (cfg.collars[i] < 0) bad("collar[" + std::to_string(i) + "]", "must be nonnegative");
  }
  if (const json* v = find(j, "windows")) {
    cfg.window_sides = get_int_list(*v, "windows");
    for (std::size_t i = 0; i < cfg.window_sides.size(); ++i) {
      if (cfg.window_sides[i] < 1)
        bad("windows[" + std::to_string(i) + "]", "must be a positive side length");
      if (i > 0 && cfg.window_sides[i] <= cfg.window_sides[i - 1])
        bad("windows", "side lengths must strictly increase");
    }
  }
  if (const json* v = find(j, "family")) {
    std::string fam = get_str(*v, "family");
    if (fam == "bernoulli") {
      cfg.optimizer.family = MeasureKind::kBernoulli;
    } else if (fam == "markov") {
      cfg.optimizer.family = MeasureKind::kMarkov;
    } else {
      bad("family", "must be bernoulli or markov");
    }
  }
  if (const json* v = find(j, "optimizer")) parse_optimizer(*v, cfg.optimizer);
  if (const json* v = find(j, "seed")) {
    std::int64_t s = get_int(*v, "seed");
    if (s < 0) bad("seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  cfg.optimizer.seed = cfg.seed;
  if (const json* v = find(j, "measure")) cfg.measure = parse_measure(*v, *cfg.system);
  if (const json* v = find(j, "carpet")) cfg.carpet = parse_carpet(*v);
  if (const json* v = find(j, "grid")) {
    if (!v->is_array() || v->empty()) bad("grid", "must be a nonempty array of potentials");
    for (std::size_t i = 0; i < v->size(); ++i)
      cfg.grid.push_back(
          parse_potential(&(*v)[i], *cfg.system, "grid[" + std::to_string(i) + "]"));
  }
  if (const json* v = find(j, "checks")) {
    if (!v->is_array()) bad("checks", "must be an array of check names");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < v->size(); ++i)
      names.push_back(get_str((*v)[i], "checks[" + std::to_string(i) + "]"));
    cfg.checks = std::move(names);
  }
  if (const json* v = find(j, "assert")) {
    if (!v->is_object()) bad("assert", "must be an object of named bounds");
    for (const auto& [k, val] : v->items()) {
      if (!is_known_assert_key(k)) bad("assert." + k, "unknown assertion");
      cfg.asserts[k] = get_num(val, "assert." + k);
    }
  }
  if (const json* v = find(j, "out")) cfg.out_dir = get_str(*v, "out");
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (const json* v = find(j, "limits")) {
    if (!v->is_object()) bad("limits", "must be an object");
    require_keys(*v, "limits", {"max_patterns", "max_bytes"});
    if (const json* p = find(*v, "max_patterns")) {
      std::int64_t n = get_int(*p, "limits.max_patterns");
      if (n < 1) bad("limits.max_patterns", "must be positive");
      cfg.limits.max_patterns = static_cast<std::uint64_t>(n);
    }
    if (const json* p = find(*v, "max_bytes")) {
      std::int64_t n = get_int(*p, "limits.max_bytes");
      if (n < 1) bad("limits.max_bytes", "must be positive");
      cfg.limits.max_bytes = static_cast<std::uint64_t>(n);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const CliOverrides& o) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), o);
}

}  // namespace presslab
