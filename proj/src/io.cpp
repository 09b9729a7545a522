#include "geoflux/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace geoflux {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view source, const toml::node* node, const std::string& field,
                       const std::string& message) {
  std::string where(source);
  if (node && node->source().begin.line > 0) where += ":" + std::to_string(node->source().begin.line);
  throw Error(ErrorKind::Config, where + ": " + field + ": " + message);
}

// Field access with errors anchored to the offending line.
class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  double number(const toml::node& n, const std::string& field) const {
    if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) {
      if (!std::isfinite(*v)) fail(source_, &n, field, "must be finite");
      return *v;
    }
    fail(source_, &n, field, "expected a number");
  }

  long long integer(const toml::node& n, const std::string& field) const {
    if (auto v = n.value<long long>(); v && n.is_integer()) return *v;
    fail(source_, &n, field, "expected an integer");
  }

  bool boolean(const toml::node& n, const std::string& field) const {
    if (auto v = n.value<bool>()) return *v;
    fail(source_, &n, field, "expected true or false");
  }

  std::string string(const toml::node& n, const std::string& field) const {
    if (auto v = n.value<std::string>()) return *v;
    fail(source_, &n, field, "expected a string");
  }

  const toml::array& array(const toml::node& n, const std::string& field) const {
    if (auto a = n.as_array()) return *a;
    fail(source_, &n, field, "expected an array");
  }

  const toml::table& table(const toml::node& n, const std::string& field) const {
    if (auto t = n.as_table()) return *t;
    fail(source_, &n, field, "expected a table");
  }

  Point point(const toml::node& n, const std::string& field) const {
    const auto& a = array(n, field);
    if (a.empty()) fail(source_, &n, field, "empty coordinate list");
    Point p(static_cast<Eigen::Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) p[static_cast<Eigen::Index>(k)] = number(a[k], field + "[" + std::to_string(k) + "]");
    return p;
  }

  void only(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> keys) const {
    const std::set<std::string_view> allowed(keys);
    for (const auto& [k, v] : t)
      if (!allowed.count(k.str())) fail(source_, &v, prefix + std::string(k.str()), "unknown key");
  }

  std::string_view source() const { return source_; }

 private:
  std::string_view source_;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep TOML floats recognisable as floats.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string point_toml(const Point& p) {
  std::string s = "[";
  for (Eigen::Index k = 0; k < p.size(); ++k) s += (k ? ", " : "") + num(p[k]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string mode_name(GeodesicMode m) {
  switch (m) {
    case GeodesicMode::Analytic: return "analytic";
    case GeodesicMode::Grid: return "grid";
    default: return "auto";
  }
}

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p[k]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Non-finite values are not JSON numbers; emit them as strings.
json number_json(double x) { return std::isfinite(x) ? json(x) : json(std::to_string(x)); }

const char* const kTolKeys[] = {"lp_tol", "energy_tol", "eikonal_tol", "quadrature_step", "bisection_tol",
                                "derivative_tol", "stationarity_tol", "mass_tol", "time_flux_tol",
                                "action_tol_analytic", "action_tol_grid", "fenchel_tol", "gradient_tol",
                                "orbit_endpoint_tol", "orbit_drift_tol", "closed_form_tol"};

double* tol_slot(Tolerances& t, std::string_view key) {
  if (key == "lp_tol") return &t.lp_tol;
  if (key == "eikonal_tol") return &t.eikonal_tol;
  if (key == "quadrature_step") return &t.quadrature_step;
  if (key == "derivative_tol") return &t.derivative_tol;
  if (key == "stationarity_tol") return &t.stationarity_tol;
  if (key == "mass_tol") return &t.mass_tol;
  if (key == "time_flux_tol") return &t.time_flux_tol;
  if (key == "action_tol_analytic") return &t.action_tol_analytic;
  if (key == "action_tol_grid") return &t.action_tol_grid;
  if (key == "fenchel_tol") return &t.fenchel_tol;
  if (key == "gradient_tol") return &t.gradient_tol;
  if (key == "orbit_endpoint_tol") return &t.orbit_endpoint_tol;
  if (key == "orbit_drift_tol") return &t.orbit_drift_tol;
  if (key == "closed_form_tol") return &t.closed_form_tol;
  return nullptr;
}

std::optional<double> tol_value(const Tolerances& t, std::string_view key) {
  if (key == "energy_tol") return t.energy_tol;
  if (key == "bisection_tol") return t.bisection_tol;
  return *tol_slot(const_cast<Tolerances&>(t), key);
}

void parse_points(const Reader& rd, const toml::table& t, SourceSinkSet& set) {
  rd.only(t, "points.", {"coords", "flux"});
  const toml::node* coords = t.get("coords");
  const toml::node* flux = t.get("flux");
  if (!coords) fail(rd.source(), &t, "points.coords", "missing");
  if (!flux) fail(rd.source(), &t, "points.flux", "missing");
  const auto& ca = rd.array(*coords, "points.coords");
  const auto& fa = rd.array(*flux, "points.flux");
  if (ca.size() != fa.size())
    fail(rd.source(), flux, "points.flux",
         "has " + std::to_string(fa.size()) + " entries for " + std::to_string(ca.size()) + " points");
  for (std::size_t k = 0; k < ca.size(); ++k) {
    set.points.push_back(rd.point(ca[k], "points.coords[" + std::to_string(k) + "]"));
    set.flux.push_back(rd.number(fa[k], "points.flux[" + std::to_string(k) + "]"));
  }
}

void parse_potential(const Reader& rd, const toml::table& t, Potential& pot) {
  rd.only(t, "potential.", {"kind", "bumps"});
  std::string kind = "gaussian";
  if (auto k = t.get("kind")) kind = rd.string(*k, "potential.kind");
  if (kind == "zero") {
    if (auto b = t.get("bumps"); b && !rd.array(*b, "potential.bumps").empty())
      fail(rd.source(), b, "potential.bumps", "kind = \"zero\" takes no bumps");
    return;
  }
  if (kind != "gaussian") fail(rd.source(), t.get("kind"), "potential.kind", "expected \"zero\" or \"gaussian\"");
  const toml::node* bumps = t.get("bumps");
  if (!bumps) return;
  const auto& arr = rd.array(*bumps, "potential.bumps");
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string f = "potential.bumps[" + std::to_string(k) + "]";
    const auto& b = rd.table(arr[k], f);
    rd.only(b, f + ".", {"center", "height", "width"});
    Bump bump;
    if (!b.get("center") || !b.get("height") || !b.get("width"))
      fail(rd.source(), &arr[k], f, "needs center, height and width");
    bump.center = rd.point(*b.get("center"), f + ".center");
    bump.height = rd.number(*b.get("height"), f + ".height");
    bump.width = rd.number(*b.get("width"), f + ".width");
    if (!(bump.height > 0.0)) fail(rd.source(), b.get("height"), f + ".height", "must be positive");
    if (!(bump.width > 0.0)) fail(rd.source(), b.get("width"), f + ".width", "must be positive");
    pot.bumps.push_back(std::move(bump));
  }
}

void parse_solver(const Reader& rd, const toml::table& t, RunConfig& cfg) {
  rd.only(t, "solver.", {"mode", "grid_resolution", "energy_bracket_cap", "box", "tolerances", "random_seed"});
  ProblemSpec& spec = cfg.problem;
  if (auto n = t.get("mode")) {
    const std::string m = rd.string(*n, "solver.mode");
    if (m == "auto") spec.mode = GeodesicMode::Auto;
    else if (m == "analytic") spec.mode = GeodesicMode::Analytic;
    else if (m == "grid") spec.mode = GeodesicMode::Grid;
    else fail(rd.source(), n, "solver.mode", "expected \"auto\", \"analytic\" or \"grid\"");
  }
  if (auto n = t.get("grid_resolution")) {
    const long long r = rd.integer(*n, "solver.grid_resolution");
    if (r < 1 || r > 1 << 15) fail(rd.source(), n, "solver.grid_resolution", "out of range");
    spec.grid_resolution = static_cast<int>(r);
  }
  if (auto n = t.get("energy_bracket_cap")) spec.energy_bracket_cap = rd.number(*n, "solver.energy_bracket_cap");
  if (auto n = t.get("random_seed")) {
    const long long s = rd.integer(*n, "solver.random_seed");
    if (s < 0) fail(rd.source(), n, "solver.random_seed", "must be nonnegative");
    cfg.random_seed = static_cast<std::uint64_t>(s);
  }
  if (auto n = t.get("box")) {
    const auto& b = rd.table(*n, "solver.box");
    rd.only(b, "solver.box.", {"lo", "hi"});
    if (!b.get("lo") || !b.get("hi")) fail(rd.source(), n, "solver.box", "needs lo and hi");
    spec.domain_box = Box{rd.point(*b.get("lo"), "solver.box.lo"), rd.point(*b.get("hi"), "solver.box.hi")};
  }
  if (auto n = t.get("tolerances")) {
    const auto& tt = rd.table(*n, "solver.tolerances");
    for (const auto& [k, v] : tt) {
      const std::string field = "solver.tolerances." + std::string(k.str());
      const double x = rd.number(v, field);
      if (!(x > 0.0)) fail(rd.source(), &v, field, "must be positive");
      if (k.str() == "energy_tol") spec.tolerances.energy_tol = x;
      else if (k.str() == "bisection_tol") spec.tolerances.bisection_tol = x;
      else if (double* slot = tol_slot(spec.tolerances, k.str())) *slot = x;
      else fail(rd.source(), &v, field, "unknown key");
    }
  }
}

void parse_output(const Reader& rd, const toml::table& t, RunConfig& cfg) {
  rd.only(t, "output.", {"command", "dir", "emit_paths", "emit_fields", "energy", "scan"});
  if (auto n = t.get("command")) {
    cfg.command = rd.string(*n, "output.command");
    if (cfg.command != "solve" && cfg.command != "scan-energy" && cfg.command != "distances")
      fail(rd.source(), n, "output.command", "expected \"solve\", \"scan-energy\" or \"distances\"");
  }
  if (auto n = t.get("dir")) cfg.output_dir = rd.string(*n, "output.dir");
  if (auto n = t.get("emit_paths")) cfg.emit_paths = rd.boolean(*n, "output.emit_paths");
  if (auto n = t.get("emit_fields")) cfg.emit_fields = rd.boolean(*n, "output.emit_fields");
  if (auto n = t.get("energy")) cfg.energy = rd.number(*n, "output.energy");
  if (auto n = t.get("scan")) {
    const auto& s = rd.table(*n, "output.scan");
    rd.only(s, "output.scan.", {"from", "to", "n", "log"});
    if (!s.get("from") || !s.get("to")) fail(rd.source(), n, "output.scan", "needs from and to");
    ScanRange r;
    r.from = rd.number(*s.get("from"), "output.scan.from");
    r.to = rd.number(*s.get("to"), "output.scan.to");
    if (auto c = s.get("n")) {
      const long long k = rd.integer(*c, "output.scan.n");
      if (k < 1 || k > 100000) fail(rd.source(), c, "output.scan.n", "out of range");
      r.count = static_cast<int>(k);
    }
    if (auto l = s.get("log")) r.log_spaced = rd.boolean(*l, "output.scan.log");
    if (!(r.to >= r.from)) fail(rd.source(), n, "output.scan", "empty range");
    cfg.energy_scan_range = r;
  }
}

std::string csv_header_line(std::initializer_list<const char*> cols) {
  std::string s;
  for (const char* c : cols) s += (s.empty() ? "" : ",") + std::string(c);
  return s + "\n";
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::Config, std::string(source) + ":" + std::to_string(e.source().begin.line) + ": " +
                                       std::string(e.description()));
  }
  const Reader rd(source);
  rd.only(root, "", {"points", "potential", "solver", "output"});
  RunConfig cfg;
  const toml::node* points = root.get("points");
  if (!points) throw Error(ErrorKind::Config, std::string(source) + ": points: missing section");
  parse_points(rd, rd.table(*points, "points"), cfg.problem.sources_sinks);
  if (auto p = root.get("potential")) parse_potential(rd, rd.table(*p, "potential"), cfg.problem.potential);
  if (auto s = root.get("solver")) parse_solver(rd, rd.table(*s, "solver"), cfg);
  if (auto o = root.get("output")) parse_output(rd, rd.table(*o, "output"), cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string emit_config(const RunConfig& cfg) {
  const ProblemSpec& p = cfg.problem;
  std::ostringstream o;
  o << "[points]\ncoords = [";
  for (std::size_t k = 0; k < p.sources_sinks.points.size(); ++k)
    o << (k ? ", " : "") << point_toml(p.sources_sinks.points[k]);
  o << "]\nflux = [";
  for (std::size_t k = 0; k < p.sources_sinks.flux.size(); ++k) o << (k ? ", " : "") << num(p.sources_sinks.flux[k]);
  o << "]\n\n[potential]\n";
  if (p.potential.is_zero()) {
    o << "kind = \"zero\"\n";
  } else {
    o << "kind = \"gaussian\"\nbumps = [\n";
    for (const auto& b : p.potential.bumps)
      o << "  { center = " << point_toml(b.center) << ", height = " << num(b.height) << ", width = " << num(b.width)
        << " },\n";
    o << "]\n";
  }
  o << "\n[solver]\nmode = \"" << mode_name(p.mode) << "\"\ngrid_resolution = " << p.grid_resolution
    << "\nenergy_bracket_cap = " << num(p.energy_bracket_cap) << "\nrandom_seed = " << cfg.random_seed << "\n";
  if (p.domain_box)
    o << "box = { lo = " << point_toml(p.domain_box->lo) << ", hi = " << point_toml(p.domain_box->hi) << " }\n";
  o << "\n[solver.tolerances]\n";
  for (const char* key : kTolKeys)
    if (auto v = tol_value(p.tolerances, key)) o << key << " = " << num(*v) << "\n";
  o << "\n[output]\ncommand = " << quoted(cfg.command) << "\ndir = " << quoted(cfg.output_dir)
    << "\nemit_paths = " << (cfg.emit_paths ? "true" : "false") << "\nemit_fields = " << (cfg.emit_fields ? "true" : "false")
    << "\n";
  if (cfg.energy) o << "energy = " << num(*cfg.energy) << "\n";
  if (const auto& s = cfg.energy_scan_range)
    o << "scan = { from = " << num(s->from) << ", to = " << num(s->to) << ", n = " << s->count
      << ", log = " << (s->log_spaced ? "true" : "false") << " }\n";
  return o.str();
}

bool same_config(const RunConfig& a, const RunConfig& b) {
  const auto same_point = [](const Point& x, const Point& y) { return x.size() == y.size() && x == y; };
  const ProblemSpec &p = a.problem, &q = b.problem;
  if (p.sources_sinks.points.size() != q.sources_sinks.points.size()) return false;
  for (std::size_t k = 0; k < p.sources_sinks.points.size(); ++k)
    if (!same_point(p.sources_sinks.points[k], q.sources_sinks.points[k])) return false;
  if (p.sources_sinks.flux != q.sources_sinks.flux) return false;
  if (p.potential.bumps.size() != q.potential.bumps.size()) return false;
  for (std::size_t k = 0; k < p.potential.bumps.size(); ++k) {
    const auto &x = p.potential.bumps[k], &y = q.potential.bumps[k];
    if (!same_point(x.center, y.center) || x.height != y.height || x.width != y.width) return false;
  }
  if (p.domain_box.has_value() != q.domain_box.has_value()) return false;
  if (p.domain_box && (!same_point(p.domain_box->lo, q.domain_box->lo) || !same_point(p.domain_box->hi, q.domain_box->hi)))
    return false;
  for (const char* key : kTolKeys)
    if (tol_value(p.tolerances, key) != tol_value(q.tolerances, key)) return false;
  const auto same_scan = [](const std::optional<ScanRange>& x, const std::optional<ScanRange>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->from == y->from && x->to == y->to && x->count == y->count && x->log_spaced == y->log_spaced);
  };
  return p.grid_resolution == q.grid_resolution && p.energy_bracket_cap == q.energy_bracket_cap && p.mode == q.mode &&
         a.command == b.command && a.output_dir == b.output_dir && same_scan(a.energy_scan_range, b.energy_scan_range) &&
         a.energy == b.energy && a.emit_paths == b.emit_paths && a.emit_fields == b.emit_fields &&
         a.random_seed == b.random_seed;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void OutputSet::add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

std::vector<std::filesystem::path> OutputSet::commit(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  std::vector<fs::path> placed;
  std::vector<fs::path> staged;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    for (const auto& p : placed) fs::remove(p, ec);
  };
  try {
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      staged.push_back(tmp);
      out << content;
      out.close();
      if (!out) throw Error(ErrorKind::Config, "cannot write " + tmp.string());
    }
    for (std::size_t k = 0; k < files_.size(); ++k) {
      const fs::path final_path = dir / files_[k].first;
      fs::rename(staged[k], final_path);
      placed.push_back(final_path);
    }
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw Error(ErrorKind::Config, e.what());
  } catch (...) {
    cleanup();
    throw;
  }
  return placed;
}

std::string solution_json(const Problem& problem, const EnergySolution& sol, const OptimalMeasure& mu) {
  json j;
  j["case"] = sol.kind == EnergyCase::A ? "A" : "B";
  j["E0"] = sol.energy;
  j["evaluation_energy"] = sol.evaluation_energy;
  j["J"] = sol.J;
  j["W"] = sol.W;
  j["sum_AT"] = sol.sum_AT;
  j["vbar"] = problem.vbar();
  j["x0"] = point_json(problem.vbar_location());
  j["beta"] = mu.beta();
  j["point_mass"] = mu.point_mass ? json{{"mass", mu.point_mass->mass}, {"location", point_json(mu.point_mass->location)}}
                                  : json(nullptr);
  j["mixed"] = sol.mixed;
  j["alpha"] = sol.alpha;
  j["search"] = sol.used_golden ? "golden" : "bisection";
  j["mode"] = problem.grid_mode() ? "grid" : "analytic";
  j["grid_resolution"] = problem.grid_mode() ? json(problem.spec().grid_resolution) : json(nullptr);
  j["action_direct"] = action_direct(mu);
  j["action_quadrature"] = action_quadrature(mu);
  j["time_flux_expectation"] = time_flux_expectation(mu);
  j["plan"] = {{"sources", sol.plan.sources}, {"sinks", sol.plan.sinks}, {"A", matrix_json(sol.plan.A)}};
  json phi = json::array();
  for (Eigen::Index k = 0; k < sol.duals.phi.size(); ++k) phi.push_back(sol.duals.phi[k]);
  j["duals"] = phi;
  j["distances"] = matrix_json(sol.level.distances);
  json arcs = json::array();
  for (const auto& a : mu.arcs) {
    json arc{{"source", a.source}, {"sink", a.sink}, {"A", a.A}, {"weight", a.weight}, {"T", a.time},
             {"D", a.distance}, {"S", a.path.length}, {"density_raw_integral", a.density.raw_integral},
             {"boundary_contact", a.path.boundary_contact}};
    arcs.push_back(arc);
  }
  j["arcs"] = arcs;
  j["warnings"] = sol.warnings;
  return j.dump(2) + "\n";
}

std::string diagnostics_json(const DiagnosticsReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name}, {"residual", number_json(c.residual)}, {"tolerance", c.tolerance},
                      {"status", std::string(to_string(c.status))}, {"note", c.note}});
  json tol;
  for (const char* key : kTolKeys)
    if (auto v = tol_value(report.tolerances, key)) tol[key] = *v;
  json j{{"all_passed", report.all_passed()}, {"checks", checks}, {"tolerances", tol}};
  return j.dump(2) + "\n";
}

std::string arcs_csv(const OptimalMeasure& mu, bool all_samples) {
  std::string s = csv_header_line({"source", "sink", "k", "s", "x", "y", "rho"});
  for (const auto& a : mu.arcs) {
    const Eigen::Index last = a.path.polyline.cols() - 1;
    for (Eigen::Index k = 0; k <= last; ++k) {
      if (!all_samples && k != 0 && k != last) continue;
      const double y = a.path.polyline.rows() > 1 ? a.path.polyline(1, k) : 0.0;
      s += std::to_string(a.source) + "," + std::to_string(a.sink) + "," + std::to_string(k) + "," +
           format_number(a.density.s[k]) + "," + format_number(a.path.polyline(0, k)) + "," + format_number(y) + "," +
           format_number(a.density.rho[k]) + "\n";
    }
  }
  return s;
}

std::string plan_csv(const Problem& problem, const EnergySolution& sol) {
  std::string s = csv_header_line({"source", "sink", "A", "D", "T", "weight"});
  for (std::size_t a = 0; a < sol.plan.sources.size(); ++a)
    for (std::size_t b = 0; b < sol.plan.sinks.size(); ++b) {
      const auto r = static_cast<Eigen::Index>(a), c = static_cast<Eigen::Index>(b);
      const int i = sol.plan.sources[a], j = sol.plan.sinks[b];
      const double A = sol.plan.A(r, c);
      const double T = sol.level.times(r, c);
      s += std::to_string(i) + "," + std::to_string(j) + "," + format_number(A) + "," +
           format_number(sol.level.distances(i, j)) + "," + format_number(T) + "," +
           format_number(A > problem.tolerances().lp_tol ? A * T / std::sqrt(2.0) : 0.0) + "\n";
    }
  return s;
}

std::string scan_csv(const EnergyScan& scan) {
  std::string s = csv_header_line({"E", "W", "g", "sumAT"});
  for (const auto& x : scan.samples)
    s += format_number(x.energy) + "," + format_number(x.W) + "," + format_number(x.g) + "," + format_number(x.sum_AT) +
         "\n";
  return s;
}

std::string distances_csv(const EnergyLevel& level) {
  const Eigen::Index n = level.raw.rows();
  double defect = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) defect = std::max(defect, std::abs(level.raw(i, j) - level.raw(j, i)));
  std::string s = "# energy = " + format_number(level.energy) + ", symmetry_defect = " + format_number(defect) + "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) s += (j ? "," : "") + format_number(level.distances(i, j));
    s += "\n";
  }
  return s;
}

std::string field_csv(const ArrivalField& field) {
  std::string s = "# origin = " + format_number(field.grid.origin[0]) + " " + format_number(field.grid.origin[1]) +
                  ", spacing = " + format_number(field.grid.spacing) + ", energy = " + format_number(field.energy) +
                  ", rows index x\n";
  for (Eigen::Index i = 0; i < field.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < field.values.cols(); ++j) s += (j ? "," : "") + format_number(field.values(i, j));
    s += "\n";
  }
  return s;
}

OutputSet run_solve(const RunConfig& cfg, const SolveOptions& options) {
  const Problem problem(cfg.problem);
  const EnergySolution sol = optimize_energy(problem);
  const OptimalMeasure mu = assemble_measure(problem, sol);
  const DiagnosticsReport report = run_full_diagnostics(problem, sol, &mu, options.diagnostics);
  OutputSet out;
  out.add("solution.json", solution_json(problem, sol, mu));
  out.add("diagnostics.json", diagnostics_json(report));
  out.add("arcs.csv", arcs_csv(mu, cfg.emit_paths));
  out.add("plan.csv", plan_csv(problem, sol));
  out.add("scan.csv", scan_csv(sol.scan));
  if (cfg.emit_fields && problem.grid_mode())
    for (int i = 0; i < problem.size(); ++i)
      out.add("field_" + std::to_string(i) + ".csv", field_csv(solve_eikonal(problem, i, sol.evaluation_energy)));
  return out;
}

OutputSet run_scan_energy(const RunConfig& cfg) {
  if (!cfg.energy_scan_range) throw Error(ErrorKind::Config, "scan-energy needs a range (output.scan or --from/--to)");
  const Problem problem(cfg.problem);
  const ScanRange& r = *cfg.energy_scan_range;
  OutputSet out;
  out.add("scan.csv", scan_csv(scan_energy(problem, r.from, r.to, r.count, r.log_spaced)));
  return out;
}

OutputSet run_distances(const RunConfig& cfg) {
  if (!cfg.energy) throw Error(ErrorKind::Config, "distances needs an energy (output.energy or --energy)");
  const Problem problem(cfg.problem);
  OutputSet out;
  out.add("distances.csv", distances_csv(compute_level(problem, *cfg.energy, false)));
  if (cfg.emit_fields && problem.grid_mode())
    for (int i = 0; i < problem.size(); ++i)
      out.add("field_" + std::to_string(i) + ".csv", field_csv(solve_eikonal(problem, i, *cfg.energy)));
  return out;
}

}  // namespace geoflux
