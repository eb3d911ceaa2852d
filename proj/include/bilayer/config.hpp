#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bilayer/scenario.hpp"

/**
 * Strict JSON run configuration. Every key is optional with a documented
 * default, unknown keys are rejected, and all violations are reported
 * together with field paths.
 */
namespace bilayer {

/** Where and how often results are written. */
struct OutputPolicy {
  std::string dir;         ///< default: $BILAYER_OUT or "out"
  long snapshot_every = 0; ///< snapshot every K accepted steps; 0 = final only
  bool csv = true;         ///< write the diagnostics series
};

/** All configuration failures of one document, with field paths. */
struct ConfigError : std::runtime_error {
  std::vector<std::string> errors;

  explicit ConfigError(std::vector<std::string> errs)
      : std::runtime_error(join(errs)), errors(std::move(errs)) {}

  static std::string join(const std::vector<std::string>& errs) {
    std::string all = "invalid configuration:";
    for (const std::string& e : errs) all += "\n  " + e;
    return all;
  }
};

/** A validated configuration plus its canonical form and hash. */
struct ParsedConfig {
  Scenario scenario;
  OutputPolicy output;
  std::string canonical;  ///< fully resolved document, sorted keys
  std::string hash;       ///< FNV-1a of the canonical form, hex
};

/** 64-bit FNV-1a hash in fixed-width hex. */
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string default_output_dir() {
  const char* env = std::getenv("BILAYER_OUT");
  return (env != nullptr && *env != '\0') ? env : "out";
}

namespace detail {

using json = nlohmann::json;

/** Pulls section `key`, recording unknown-section errors elsewhere. */
class Section {
 public:
  Section(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {}

  bool has(const char* key) const { return node_.contains(key); }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!node_.contains(key)) return fallback;
    const json& j = node_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (j.is_boolean()) return j.get<bool>();
      fail(key, "must be a boolean");
    } else if constexpr (std::is_same_v<T, long> || std::is_same_v<T, int>) {
      if (j.is_number_integer()) return j.get<T>();
      fail(key, "must be an integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (j.is_number()) return j.get<double>();
      fail(key, "must be a number");
    } else {
      if (j.is_string()) return j.get<std::string>();
      fail(key, "must be a string");
    }
    return fallback;
  }

  void fail(const char* key, const std::string& what) const {
    errors_.push_back(path_.empty() ? std::string(key) + " " + what
                                    : path_ + "." + key + " " + what);
  }

  void check_keys(std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : node_.items()) {
      bool ok = false;
      for (const char* k : known)
        if (key == k) ok = true;
      if (!ok)
        errors_.push_back("unknown key: " +
                          (path_.empty() ? key : path_ + "." + key));
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
};

inline const json& subobject(const json& doc, const char* key,
                             std::vector<std::string>& errors) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  if (!doc.at(key).is_object()) {
    errors.push_back(std::string(key) + " must be an object");
    return empty;
  }
  return doc.at(key);
}

}  // namespace detail

/**
 * Validates a JSON document against the run-configuration schema and
 * resolves defaults. Throws ConfigError carrying the full list of field-path
 * messages when anything is wrong.
 */
inline ParsedConfig parse_config(const nlohmann::json& doc) {
  using detail::Section;
  std::vector<std::string> errors;
  if (!doc.is_object()) throw ConfigError({"configuration must be an object"});
  {
    Section root(doc, "", errors);
    root.check_keys(
        {"grid", "model", "params", "potential", "solver", "scenario",
         "output"});
  }

  ParsedConfig out;
  Scenario& s = out.scenario;
  s.name = "config";

  {
    Section grid(detail::subobject(doc, "grid", errors), "grid", errors);
    grid.check_keys({"n_cells"});
    const long n = grid.get<long>("n_cells", 128);
    if (n < 2)
      grid.fail("n_cells", "must be an integer >= 2");
    else
      s.grid = Grid(static_cast<int>(n));
  }
  {
    Section model(detail::subobject(doc, "model", errors), "model", errors);
    model.check_keys({"type", "alpha", "b", "b1"});
    const std::string type = model.get<std::string>("type", "no_slip");
    const double alpha = model.get<double>("alpha", 0.0);
    const double b = model.get<double>("b", 0.0);
    const double b1 = model.get<double>("b1", 1.0);
    if (type == "no_slip") {
      s.model = NoSlip{};
      if (model.has("alpha") || model.has("b") || model.has("b1"))
        model.fail("type", "no_slip takes no slip parameters");
    } else if (type == "navier_slip") {
      if (!(alpha >= 0.0)) model.fail("alpha", "must be >= 0");
      if (model.has("b") || model.has("b1"))
        model.fail("type", "navier_slip takes only alpha");
      s.model = NavierSlip{alpha};
    } else if (type == "weak_slip") {
      if (!(b1 > 0.0)) model.fail("b1", "must be > 0");
      if (!(b >= 0.0)) model.fail("b", "must be >= 0");
      if (model.has("alpha")) model.fail("type", "weak_slip takes b and b1");
      s.model = WeakSlip{b1, b};
    } else {
      model.fail("type", "must be one of no_slip, navier_slip, weak_slip");
    }
  }
  {
    Section params(detail::subobject(doc, "params", errors), "params", errors);
    params.check_keys({"sigma", "mu"});
    s.params.sigma = params.get<double>("sigma", 1.0);
    s.params.mu = params.get<double>("mu", 1.0);
    if (!(s.params.sigma > 0.0)) params.fail("sigma", "must be > 0");
    if (!(s.params.mu > 0.0)) params.fail("mu", "must be > 0");
  }
  {
    Section pot(detail::subobject(doc, "potential", errors), "potential",
                errors);
    pot.check_keys({"type", "n", "m", "gamma1", "gamma2", "floor"});
    const std::string type = pot.get<std::string>("type", "force_free");
    if (type == "force_free") {
      s.pot = ForceFree{};
      for (const char* key : {"n", "m", "gamma1", "gamma2", "floor"})
        if (pot.has(key)) pot.fail(key, "is only valid with type born_vdw");
    } else if (type == "born_vdw") {
      BornVdW bv;
      bv.n = pot.get<double>("n", 3.0);
      bv.m = pot.get<double>("m", 12.0);
      bv.gamma1 = pot.get<double>("gamma1", 0.1);
      bv.gamma2 = pot.get<double>("gamma2", 0.1);
      bv.floor = pot.get<double>("floor", 1e-4);
      if (!(bv.n > 0.0)) pot.fail("n", "must be > 0");
      if (!(bv.m > 0.0)) pot.fail("m", "must be > 0");
      if (bv.n > 0.0 && bv.m > 0.0 && !(bv.n < bv.m))
        errors.push_back("potential.n must be < potential.m");
      if (!(bv.gamma1 > 0.0)) pot.fail("gamma1", "must be > 0");
      if (!(bv.gamma2 > 0.0)) pot.fail("gamma2", "must be > 0");
      if (!(bv.floor > 0.0)) pot.fail("floor", "must be > 0");
      s.pot = bv;
    } else {
      pot.fail("type", "must be one of force_free, born_vdw");
    }
  }
  {
    Section solver(detail::subobject(doc, "solver", errors), "solver", errors);
    solver.check_keys({"epsilon", "dt_init", "dt_min", "dt_max", "newton_tol",
                       "newton_max_iter", "scheme", "energy_guard"});
    SolverConfig& c = s.solver;
    c.epsilon = solver.get<double>("epsilon", 1e-6);
    c.dt_init = solver.get<double>("dt_init", 1e-6);
    c.dt_min = solver.get<double>("dt_min", 1e-12);
    c.dt_max = solver.get<double>("dt_max", 1e-3);
    c.newton_tol = solver.get<double>("newton_tol", 1e-6);
    c.newton_max_iter =
        static_cast<int>(solver.get<long>("newton_max_iter", 12));
    const std::string scheme =
        solver.get<std::string>("scheme", "fully_implicit");
    if (scheme == "fully_implicit")
      c.scheme = Scheme::FullyImplicit;
    else if (scheme == "semi_implicit")
      c.scheme = Scheme::SemiImplicit;
    else
      solver.fail("scheme", "must be fully_implicit or semi_implicit");
    c.energy_guard = solver.get<bool>("energy_guard", true);
    if (!(c.epsilon >= 0.0)) solver.fail("epsilon", "must be >= 0");
    if (!(c.dt_init > 0.0)) solver.fail("dt_init", "must be > 0");
    if (!(c.dt_min > 0.0)) solver.fail("dt_min", "must be > 0");
    if (!(c.dt_max > 0.0)) solver.fail("dt_max", "must be > 0");
    if (c.dt_min > 0.0 && c.dt_init > 0.0 && c.dt_max > 0.0 &&
        !(c.dt_min <= c.dt_init && c.dt_init <= c.dt_max))
      solver.fail("dt_init", "must satisfy dt_min <= dt_init <= dt_max");
    if (!(c.newton_tol > 0.0)) solver.fail("newton_tol", "must be > 0");
    if (c.newton_max_iter < 1) solver.fail("newton_max_iter", "must be >= 1");
  }
  {
    const detail::json& scen = detail::subobject(doc, "scenario", errors);
    Section scenario(scen, "scenario", errors);
    scenario.check_keys({"ic", "t_end"});
    s.t_end = scenario.get<double>("t_end", 0.5);
    if (!(s.t_end > 0.0)) scenario.fail("t_end", "must be > 0");

    static const detail::json empty_ic = detail::json::object();
    const detail::json& icj =
        scen.contains("ic") && scen.at("ic").is_object() ? scen.at("ic")
                                                         : empty_ic;
    if (scen.contains("ic") && !scen.at("ic").is_object())
      errors.push_back("scenario.ic must be an object");
    Section ic(icj, "scenario.ic", errors);
    const std::string type = ic.get<std::string>("type", "cosine");
    if (type == "constant") {
      ic.check_keys({"type", "cu", "cv"});
      ConstantIC c{ic.get<double>("cu", 1.0), ic.get<double>("cv", 1.0)};
      if (c.cu < 0.0) ic.fail("cu", "must be >= 0");
      if (c.cv < 0.0) ic.fail("cv", "must be >= 0");
      s.ic = c;
    } else if (type == "cosine") {
      ic.check_keys({"type", "base_u", "base_v", "amp_u", "amp_v", "mode_k"});
      CosinePerturbedIC c;
      c.base_u = ic.get<double>("base_u", 1.0);
      c.base_v = ic.get<double>("base_v", 1.0);
      c.amp_u = ic.get<double>("amp_u", 0.1);
      c.amp_v = ic.get<double>("amp_v", 0.05);
      c.mode_k = static_cast<int>(ic.get<long>("mode_k", 1));
      if (c.base_u < std::abs(c.amp_u))
        ic.fail("amp_u", "may not exceed base_u (heights must stay >= 0)");
      if (c.base_v < std::abs(c.amp_v))
        ic.fail("amp_v", "may not exceed base_v (heights must stay >= 0)");
      if (c.mode_k < 1) ic.fail("mode_k", "must be a positive integer");
      s.ic = c;
    } else if (type == "touching_zero") {
      ic.check_keys({"type", "height_u", "height_v", "zero_from", "zero_to"});
      TouchingZeroIC c;
      c.height_u = ic.get<double>("height_u", 1.0);
      c.height_v = ic.get<double>("height_v", 1.0);
      c.zero_from = ic.get<double>("zero_from", 0.35);
      c.zero_to = ic.get<double>("zero_to", 0.65);
      if (c.height_u < 0.0) ic.fail("height_u", "must be >= 0");
      if (c.height_v < 0.0) ic.fail("height_v", "must be >= 0");
      if (!(0.0 < c.zero_from && c.zero_from < c.zero_to && c.zero_to < 1.0))
        ic.fail("zero_from", "must satisfy 0 < zero_from < zero_to < 1");
      s.ic = c;
    } else {
      ic.fail("type", "must be one of constant, cosine, touching_zero");
    }
  }
  {
    Section output(detail::subobject(doc, "output", errors), "output", errors);
    output.check_keys({"dir", "snapshot_every", "csv"});
    out.output.dir = output.get<std::string>("dir", default_output_dir());
    out.output.snapshot_every = output.get<long>("snapshot_every", 0);
    out.output.csv = output.get<bool>("csv", true);
    if (out.output.snapshot_every < 0)
      output.fail("snapshot_every", "must be >= 0");
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));

  // Canonical form: every default materialized, keys sorted by nlohmann.
  detail::json canon;
  canon["grid"]["n_cells"] = s.grid.n_cells;
  if (std::holds_alternative<NoSlip>(s.model)) {
    canon["model"]["type"] = "no_slip";
  } else if (const auto* ns = std::get_if<NavierSlip>(&s.model)) {
    canon["model"]["type"] = "navier_slip";
    canon["model"]["alpha"] = ns->alpha;
  } else {
    const auto& ws = std::get<WeakSlip>(s.model);
    canon["model"]["type"] = "weak_slip";
    canon["model"]["b"] = ws.b;
    canon["model"]["b1"] = ws.b1;
  }
  canon["params"]["sigma"] = s.params.sigma;
  canon["params"]["mu"] = s.params.mu;
  if (const auto* bv = std::get_if<BornVdW>(&s.pot)) {
    canon["potential"] = {{"type", "born_vdw"}, {"n", bv->n},
                          {"m", bv->m},         {"gamma1", bv->gamma1},
                          {"gamma2", bv->gamma2}, {"floor", bv->floor}};
  } else {
    canon["potential"]["type"] = "force_free";
  }
  canon["solver"] = {
      {"epsilon", s.solver.epsilon},
      {"dt_init", s.solver.dt_init},
      {"dt_min", s.solver.dt_min},
      {"dt_max", s.solver.dt_max},
      {"newton_tol", s.solver.newton_tol},
      {"newton_max_iter", s.solver.newton_max_iter},
      {"scheme", s.solver.scheme == Scheme::FullyImplicit ? "fully_implicit"
                                                          : "semi_implicit"},
      {"energy_guard", s.solver.energy_guard}};
  canon["scenario"]["t_end"] = s.t_end;
  if (const auto* c = std::get_if<ConstantIC>(&s.ic)) {
    canon["scenario"]["ic"] = {{"type", "constant"}, {"cu", c->cu},
                               {"cv", c->cv}};
  } else if (const auto* c2 = std::get_if<CosinePerturbedIC>(&s.ic)) {
    canon["scenario"]["ic"] = {{"type", "cosine"},
                               {"base_u", c2->base_u},
                               {"base_v", c2->base_v},
                               {"amp_u", c2->amp_u},
                               {"amp_v", c2->amp_v},
                               {"mode_k", c2->mode_k}};
  } else {
    const auto& tz = std::get<TouchingZeroIC>(s.ic);
    canon["scenario"]["ic"] = {{"type", "touching_zero"},
                               {"height_u", tz.height_u},
                               {"height_v", tz.height_v},
                               {"zero_from", tz.zero_from},
                               {"zero_to", tz.zero_to}};
  }
  canon["output"] = {{"dir", out.output.dir},
                     {"snapshot_every", out.output.snapshot_every},
                     {"csv", out.output.csv}};
  out.canonical = canon.dump(2);
  out.hash = fnv1a_hex(out.canonical);
  return out;
}

/** parse_config on raw text; syntax errors become a one-entry ConfigError. */
inline ParsedConfig parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("syntax error: ") + e.what()});
  }
  return parse_config(doc);
}

}  // namespace bilayer
