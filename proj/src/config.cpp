#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nlt/experiments.hpp"

namespace nlt {

using nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::run: return "run";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::check: return "check";
  }
  return "?";
}

VelocityModel named_model(const std::string& name, double v0, double rho_jam, double kappa) {
  if (!(v0 > 0.0) || !(rho_jam > 0.0))
    throw Error(ErrorCode::domain, "named_model: v0 and rho_jam must be positive");
  if (name == "concave_quadratic") {
    kappa = 0.0;
  } else if (name == "mixed_quadratic") {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorCode::domain, "mixed_quadratic needs kappa in [0, 1]");
  } else {
    throw Error(ErrorCode::domain, "unknown custom model '" + name + "' (concave_quadratic, mixed_quadratic)");
  }
  // v = v0 (1 - kappa r - (1 - kappa) r^2), r = rho / rho_jam.
  const double k = kappa;
  VelocityModel::Evaluators e;
  e.v = [=](double rho) {
    const double r = rho / rho_jam;
    return v0 * (1.0 - k * r - (1.0 - k) * r * r);
  };
  e.dv = [=](double rho) { return -v0 * (k + 2.0 * (1.0 - k) * rho / rho_jam) / rho_jam; };
  e.d2v = [=](double) { return -2.0 * v0 * (1.0 - k) / (rho_jam * rho_jam); };
  e.inverse = [=](double s) {
    // Positive root of (1 - k) r^2 + k r - c = 0 in the cancellation-free form.
    const double c = 1.0 - s / v0;
    const double den = k + std::sqrt(std::max(0.0, k * k + 4.0 * (1.0 - k) * c));
    return den > 0.0 ? rho_jam * 2.0 * c / den : 0.0;
  };
  return VelocityModel::custom(name, rho_jam, std::move(e));
}

VelocityModel ModelSpec::build() const {
  if (kind == "affine") return VelocityModel::affine(a, b);
  return named_model(name, v0, rho_jam, kappa);
}

DensityField random_bv_field(const Grid& grid, std::mt19937_64& rng, double lo, double hi, int pieces) {
  if (!(lo <= hi) || pieces < 1) throw Error(ErrorCode::domain, "random_bv_field: need lo <= hi and pieces >= 1");
  const int n = grid.n_cells();
  std::uniform_real_distribution<double> level(lo, hi);
  std::uniform_int_distribution<int> cut(1, n - 1);
  std::vector<int> cuts;
  for (int k = 1; k < pieces; ++k) cuts.push_back(cut(rng));
  std::sort(cuts.begin(), cuts.end());
  Field v(n);
  int start = 0;
  cuts.push_back(n);
  for (int c : cuts) {
    const double value = level(rng);
    for (int i = start; i < c; ++i) v[i] = value;
    start = std::max(start, c);
  }
  return {grid, v};
}

DensityField ExperimentConfig::initial_field() const {
  const Grid g = grid();
  if (initial.preset == "random_bv") {
    std::mt19937_64 rng(initial.seed);
    return random_bv_field(g, rng, initial.random.lo, initial.random.hi, initial.random.pieces);
  }
  return make_initial(g, initial.shape, model.build().rho_jam());
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config, msg); }

const std::set<std::string> kKeys = {
    "experiment.kind", "model.kind", "model.a", "model.b", "model.name", "model.v0", "model.rho_jam",
    "model.kappa", "grid.x_min", "grid.x_max", "grid.n_cells", "grid.boundary", "initial.preset",
    "initial.left", "initial.right", "initial.x0", "initial.x1", "initial.base", "initial.amp",
    "initial.center", "initial.width", "initial.mean", "initial.wavelength", "initial.value",
    "initial.lo", "initial.hi", "initial.pieces", "initial.seed", "kernel.epsilon", "sweep.epsilons",
    "relaxation.enabled", "relaxation.K", "solver.cfl", "solver.t_final", "solver.snapshot_times",
    "solver.n_snapshots", "entropy.test_functions", "check.samples", "check.rho1", "check.rho2",
    "output.dir"};

// initial.* keys each preset accepts.
const std::map<std::string, std::set<std::string>> kPresetKeys = {
    {"riemann", {"left", "right", "x0"}},
    {"bump", {"base", "amp", "center", "width"}},
    {"sine", {"mean", "amp", "wavelength"}},
    {"ramp", {"left", "right", "x0", "x1"}},
    {"constant", {"value"}},
    {"random_bv", {"lo", "hi", "pieces", "seed"}},
};

class Doc {
 public:
  explicit Doc(const json& j) : j_(j) {}

  bool has(const std::string& k) const { return j_.contains(k); }

  double number(const std::string& k) const {
    require(k);
    const auto& v = j_.at(k);
    if (!v.is_number()) fail("key '" + k + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("key '" + k + "' must be finite");
    return x;
  }
  double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

  long integer(const std::string& k) const {
    require(k);
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) fail("key '" + k + "' must be an integer");
    return v.get<long>();
  }
  long integer(const std::string& k, long fallback) const { return has(k) ? integer(k) : fallback; }

  std::string text(const std::string& k) const {
    require(k);
    if (!j_.at(k).is_string()) fail("key '" + k + "' must be a string");
    return j_.at(k).get<std::string>();
  }
  std::string text(const std::string& k, const std::string& fallback) const { return has(k) ? text(k) : fallback; }

  bool flag(const std::string& k, bool fallback) const {
    if (!has(k)) return fallback;
    if (!j_.at(k).is_boolean()) fail("key '" + k + "' must be true or false");
    return j_.at(k).get<bool>();
  }

  std::vector<double> numbers(const std::string& k) const {
    require(k);
    const auto& v = j_.at(k);
    if (!v.is_array()) fail("key '" + k + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("key '" + k + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& raw(const std::string& k) const { return j_.at(k); }

  void require(const std::string& k) const {
    if (!has(k)) fail("missing required key '" + k + "'");
  }

 private:
  const json& j_;
};

ExperimentKind parse_kind(const std::string& s) {
  if (s == "run") return ExperimentKind::run;
  if (s == "sweep") return ExperimentKind::sweep;
  if (s == "compare") return ExperimentKind::compare;
  if (s == "check") return ExperimentKind::check;
  fail("experiment.kind must be run, sweep, compare or check, got '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> kind) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not a valid document: ") + e.what());
  }
  if (!j.is_object()) fail("config must be a single object of dotted keys");
  for (const auto& [k, v] : j.items())
    if (!kKeys.count(k)) fail("unknown key '" + k + "'");
  const Doc d(j);

  ExperimentConfig c;
  if (d.has("experiment.kind")) {
    c.kind = parse_kind(d.text("experiment.kind"));
    if (kind && *kind != c.kind)
      fail("experiment.kind is '" + std::string(to_string(c.kind)) + "' but the command asks for '" +
           std::string(to_string(*kind)) + "'");
  } else if (kind) {
    c.kind = *kind;
  } else {
    d.require("experiment.kind");
  }
  const bool is_check = c.kind == ExperimentKind::check;

  // Model.
  c.model.kind = d.text("model.kind", "affine");
  if (c.model.kind == "affine") {
    c.model.a = d.number("model.a", 1.0);
    c.model.b = d.number("model.b", 1.0);
  } else if (c.model.kind == "custom") {
    c.model.name = d.text("model.name");
    c.model.v0 = d.number("model.v0", 1.0);
    c.model.rho_jam = d.number("model.rho_jam", 1.0);
    c.model.kappa = d.number("model.kappa", 0.5);
  } else {
    fail("model.kind must be affine or custom, got '" + c.model.kind + "'");
  }
  VelocityModel model = [&] {
    try {
      return c.model.build();
    } catch (const Error& e) {
      fail(std::string("model: ") + e.what());
    }
  }();

  // Grid and initial data (optional for check).
  const bool need_field = !is_check || d.has("grid.n_cells");
  if (need_field) {
    c.x_min = d.number("grid.x_min");
    c.x_max = d.number("grid.x_max");
    const long n = d.integer("grid.n_cells");
    if (n < 4 || n > 10'000'000) fail("grid.n_cells must lie in [4, 1e7]");
    c.n_cells = static_cast<int>(n);
    if (!(c.x_max > c.x_min)) fail("grid.x_max must exceed grid.x_min");
    const std::string bc = d.text("grid.boundary", "constant_extension");
    if (bc == "periodic")
      c.boundary = Boundary::periodic;
    else if (bc == "constant_extension")
      c.boundary = Boundary::constant_extension;
    else
      fail("grid.boundary must be periodic or constant_extension, got '" + bc + "'");

    c.initial.preset = d.text("initial.preset");
    const auto it = kPresetKeys.find(c.initial.preset);
    if (it == kPresetKeys.end())
      fail("initial.preset must be riemann, bump, sine, ramp, constant or random_bv, got '" + c.initial.preset + "'");
    for (const auto& [k, v] : j.items())
      if (k.rfind("initial.", 0) == 0 && k != "initial.preset" && !it->second.count(k.substr(8)))
        fail("key '" + k + "' does not apply to initial.preset = " + c.initial.preset);
    const double mid = 0.5 * (c.x_min + c.x_max);
    const std::string& p = c.initial.preset;
    if (p == "riemann") {
      c.initial.shape = preset::Riemann{d.number("initial.left"), d.number("initial.right"), d.number("initial.x0", mid)};
    } else if (p == "bump") {
      c.initial.shape = preset::Bump{d.number("initial.base"), d.number("initial.amp"),
                                     d.number("initial.center", mid), d.number("initial.width")};
    } else if (p == "sine") {
      c.initial.shape = preset::Sine{d.number("initial.mean"), d.number("initial.amp"),
                                     d.number("initial.wavelength", c.x_max - c.x_min)};
    } else if (p == "ramp") {
      c.initial.shape = preset::MonotoneRamp{d.number("initial.left"), d.number("initial.right"),
                                             d.number("initial.x0"), d.number("initial.x1")};
    } else if (p == "constant") {
      c.initial.shape = preset::Custom{std::vector<double>(c.n_cells, d.number("initial.value"))};
    } else {
      c.initial.random.lo = d.number("initial.lo", 0.1);
      c.initial.random.hi = d.number("initial.hi", 0.9);
      const long pieces = d.integer("initial.pieces", 12);
      if (pieces < 1 || pieces > c.n_cells) fail("initial.pieces must lie in [1, grid.n_cells]");
      c.initial.random.pieces = static_cast<int>(pieces);
      const long seed = d.integer("initial.seed", 1);
      if (seed < 0) fail("initial.seed must be non-negative");
      c.initial.seed = static_cast<std::uint64_t>(seed);
      if (!(c.initial.random.lo >= 0.0 && c.initial.random.lo <= c.initial.random.hi &&
            c.initial.random.hi <= model.rho_jam()))
        fail("initial.lo/initial.hi must satisfy 0 <= lo <= hi <= rho_jam");
    }
    try {
      c.initial_field();
    } catch (const Error& e) {
      fail(std::string("initial data: ") + e.what());
    }
  }

  // Kernel scales.
  if (c.kind == ExperimentKind::sweep) {
    if (d.has("kernel.epsilon")) fail("sweep takes sweep.epsilons, not kernel.epsilon");
    c.epsilons = d.numbers("sweep.epsilons");
    if (c.epsilons.empty()) fail("sweep.epsilons must not be empty");
    for (std::size_t k = 0; k < c.epsilons.size(); ++k) {
      if (!(c.epsilons[k] > 0.0)) fail("sweep.epsilons must be strictly positive");
      if (k > 0 && !(c.epsilons[k] < c.epsilons[k - 1])) fail("sweep.epsilons must be strictly decreasing");
    }
  } else {
    if (d.has("sweep.epsilons")) fail("sweep.epsilons is only valid for sweep experiments");
    if (!is_check || d.has("kernel.epsilon")) {
      const double eps = d.number("kernel.epsilon");
      if (!(eps > 0.0)) fail("kernel.epsilon must be positive");
      c.epsilons = {eps};
    }
  }

  // Relaxation frame.
  c.relaxation = d.flag("relaxation.enabled", is_check);
  if (d.has("relaxation.K")) c.K = d.number("relaxation.K");
  if (c.relaxation || is_check) {
    if (!c.K) fail("missing required key 'relaxation.K'");
    if (!(*c.K > model.free_speed()))
      fail("relaxation.K must exceed v(0) = " + std::to_string(model.free_speed()) + ", got " + std::to_string(*c.K));
  }

  // Solver.
  c.solver.cfl = d.number("solver.cfl", 0.5);
  if (!(c.solver.cfl > 0.0 && c.solver.cfl <= 1.0)) fail("solver.cfl must lie in (0, 1]");
  if (!is_check) {
    c.solver.t_final = d.number("solver.t_final");
    if (!(c.solver.t_final > 0.0)) fail("solver.t_final must be positive");
    if (d.has("solver.snapshot_times") && d.has("solver.n_snapshots"))
      fail("give solver.snapshot_times or solver.n_snapshots, not both");
    if (d.has("solver.snapshot_times")) {
      c.solver.snapshot_times = d.numbers("solver.snapshot_times");
    } else if (d.has("solver.n_snapshots")) {
      const long k = d.integer("solver.n_snapshots");
      if (k < 1 || k > 1'000'000) fail("solver.n_snapshots must lie in [1, 1e6]");
      for (long i = 1; i < k; ++i) c.solver.snapshot_times.push_back(c.solver.t_final * i / k);
    }
    try {
      c.solver.validate();
    } catch (const Error& e) {
      fail(std::string("solver: ") + e.what());
    }
  }

  if (d.has("entropy.test_functions")) {
    const auto& arr = d.raw("entropy.test_functions");
    if (!arr.is_array()) fail("entropy.test_functions must be an array of [center_x, center_t, radius_x, radius_t]");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 4 || !std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_number(); }))
        fail("entropy.test_functions entries must be [center_x, center_t, radius_x, radius_t]");
      TestFunction phi{e[0].get<double>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>()};
      if (!(phi.radius_x > 0.0 && phi.radius_t > 0.0)) fail("entropy.test_functions radii must be positive");
      c.test_functions.push_back(phi);
    }
  }

  const long samples = d.integer("check.samples", 1000);
  if (samples < 2) fail("check.samples must be at least 2");
  c.check_samples = static_cast<int>(samples);
  if (d.has("check.rho1")) c.check_rho1 = d.number("check.rho1");
  if (d.has("check.rho2")) c.check_rho2 = d.number("check.rho2");

  c.output_dir = d.text("output.dir", "out");
  if (c.output_dir.empty()) fail("output.dir must not be empty");

  json canon = j;
  canon["experiment.kind"] = std::string(to_string(c.kind));
  c.canonical = canon.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

double boundary_clearance(const DensityField& initial, const VelocityModel& model, double t_final) {
  const Field& v = initial.values;
  const Grid& g = initial.grid;
  const int n = g.n_cells();
  int first = 0, last = n - 1;
  while (first < n && std::abs(v[first] - v[0]) <= 1e-14) ++first;
  while (last >= 0 && std::abs(v[last] - v[n - 1]) <= 1e-14) --last;
  if (first >= n) return g.length() - model.free_speed() * t_final;  // constant data
  const double left = g.left_edge(first) - g.x_min();
  const double right = g.x_max() - g.left_edge(last + 1);
  return std::min(left, right) - model.free_speed() * t_final;
}

}  // namespace nlt
