#include "vagflow/config.hpp"

#include "vagflow/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace vagflow {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line;
  int column;
};

double to_double(const std::string& key, const Entry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("'" + key + "' expects a number, got '" + e.value + "'", e.line, e.column);
  return v;
}

std::size_t to_size(const std::string& key, const Entry& e) {
  std::size_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError("'" + key + "' expects a nonnegative integer, got '" + e.value + "'", e.line, e.column);
  return v;
}

bool to_bool(const std::string& key, const Entry& e) {
  if (e.value == "1" || e.value == "true") return true;
  if (e.value == "0" || e.value == "false") return false;
  throw ParseError("'" + key + "' expects 0/1/true/false, got '" + e.value + "'", e.line, e.column);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}


bool starts_with(const std::string& s, std::string_view p) { return s.compare(0, p.size(), p) == 0; }
bool ends_with(const std::string& s, std::string_view p) {
  return s.size() >= p.size() && s.compare(s.size() - p.size(), p.size(), p) == 0;
}

void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp);
    fill(out);
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

} // namespace

void RunConfig::validate() const {
  if (mesh_file.empty()) {
    mesh_kind_from_string(mesh_generator);
    if (mesh_n < 1) throw ValidationError("mesh.n must be at least 1");
    if (!(mesh_distortion >= 0.0 && mesh_distortion < 1.0))
      throw ValidationError("mesh.distortion must lie in [0, 1)");
  }
  if (mesh_tagging != "none" && mesh_tagging != "drain_barrier")
    throw ValidationError("mesh.tagging must be none or drain_barrier");
  const Model m = make_model(model, model_params);
  const FluxScheme s = flux_scheme_from_string(scheme);
  if (s == FluxScheme::quasilinear && model != "pme_drift")
    throw ValidationError("scheme: the quasilinear scheme requires model.name = pme_drift");
  if (formulation != "density" && formulation != "pressure")
    throw ValidationError("formulation must be density or pressure");
  if (formulation == "pressure") {
    if (mesh_tagging != "drain_barrier" && mesh_file.empty())
      throw ValidationError("formulation: the pressure formulation requires a tagged mesh (mesh.file or "
                            "mesh.tagging = drain_barrier)");
    if (s != FluxScheme::nonlinear) throw ValidationError("scheme: the pressure formulation is nonlinear only");
    if (initial_kind != "constant") throw ValidationError("initial.kind: the pressure formulation takes a constant");
  }
  if (!(lx > 0.0 && ly > 0.0 && lx * ly - lxy * lxy > 0.0))
    throw ValidationError("tensor: (lx, lxy; lxy, ly) must be positive definite");
  if (!std::isfinite(g)) throw ValidationError("potential.g must be finite");
  if (bc_kind != "no_flux" && bc_kind != "dirichlet") throw ValidationError("bc.kind must be no_flux or dirichlet");
  if (bc_kind == "dirichlet") {
    if (bc_sides.empty()) throw ValidationError("bc.sides: a Dirichlet condition needs at least one side");
    for (const auto& side : bc_sides) side_from_string(side);
    if (bc_data != "solution" && bc_data != "constant") throw ValidationError("bc.data must be solution or constant");
    if (bc_data == "solution" && solution.empty())
      throw ValidationError("bc.data: solution data requires solution.name");
  }
  for (const auto& [side, v] : bc_values) {
    side_from_string(side);
    if (!std::isfinite(v)) throw ValidationError("bc." + side + ".value must be finite");
  }
  if (initial_kind != "solution" && initial_kind != "constant" && initial_kind != "gibbs")
    throw ValidationError("initial.kind must be solution, constant or gibbs");
  if (initial_kind == "solution" && solution.empty())
    throw ValidationError("initial.kind: solution initial data requires solution.name");
  if (initial_kind == "gibbs") {
    if (bc_kind != "no_flux") throw ValidationError("initial.kind: a Gibbs state needs no-flux boundaries");
    if (!(initial_value > 0.0)) throw ValidationError("initial.value: the Gibbs mass must be positive");
  }
  if (!solution.empty()) analytical_test_from_string(solution);
  if (m.singular && initial_kind == "constant" && formulation == "density" && initial_value < 0.0)
    throw ValidationError("initial.value: negative density for a singular pressure");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("time.final must be finite and >= 0");
  stepper.validate();
  newton.validate();
  if (!(lumping > 0.0 && lumping < 1.0)) throw ValidationError("lumping.fraction must lie in (0, 1)");
  for (double t : snapshots)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("output.snapshots must be nonnegative times");
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const int first_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, first_col);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key before '='", line_no, first_col);
    const std::string_view rest = line.substr(eq + 1);
    const auto vstart = rest.find_first_not_of(" \t");
    const int value_col = static_cast<int>(eq + 2 + (vstart == std::string_view::npos ? 0 : vstart));
    if (entries.contains(key)) throw ParseError("duplicate key '" + key + "'", line_no, first_col);
    entries[key] = Entry{trim(rest), line_no, value_col};
  }

  RunConfig c;
  for (const auto& [key, e] : entries) {
    if (key == "mesh.file") c.mesh_file = e.value;
    else if (key == "mesh.generator") c.mesh_generator = e.value;
    else if (key == "mesh.n") c.mesh_n = to_size(key, e);
    else if (key == "mesh.distortion") c.mesh_distortion = to_double(key, e);
    else if (key == "mesh.tagging") c.mesh_tagging = e.value;
    else if (key == "model.name") c.model = e.value;
    else if (starts_with(key, "model.params.") && key.size() > 13) c.model_params[key.substr(13)] = to_double(key, e);
    else if (key == "tensor.lx") c.lx = to_double(key, e);
    else if (key == "tensor.ly") c.ly = to_double(key, e);
    else if (key == "tensor.lxy") c.lxy = to_double(key, e);
    else if (key == "potential.g") c.g = to_double(key, e);
    else if (key == "scheme") c.scheme = e.value;
    else if (key == "formulation") c.formulation = e.value;
    else if (key == "bc.kind") c.bc_kind = e.value;
    else if (key == "bc.sides") c.bc_sides = split_list(e.value);
    else if (key == "bc.data") c.bc_data = e.value;
    else if (starts_with(key, "bc.") && ends_with(key, ".value") && key.size() > 9)
      c.bc_values[key.substr(3, key.size() - 9)] = to_double(key, e);
    else if (key == "initial.kind") c.initial_kind = e.value;
    else if (key == "initial.value") c.initial_value = to_double(key, e);
    else if (key == "solution.name") c.solution = e.value;
    else if (key == "time.final") c.t_final = to_double(key, e);
    else if (key == "time.dt_init") c.stepper.dt_init = to_double(key, e);
    else if (key == "time.dt_max") c.stepper.dt_max = to_double(key, e);
    else if (key == "time.growth") c.stepper.growth = to_double(key, e);
    else if (key == "time.shrink") c.stepper.shrink = to_double(key, e);
    else if (key == "time.max_failures") c.stepper.max_failures = static_cast<int>(to_size(key, e));
    else if (key == "newton.tol") c.newton.tol_inc = to_double(key, e);
    else if (key == "newton.max_iter") c.newton.max_iter = static_cast<int>(to_size(key, e));
    else if (key == "newton.epsilon") c.newton.clamp_floor = to_double(key, e);
    else if (key == "newton.tol_res") c.newton.tol_res = to_double(key, e);
    else if (key == "lumping.fraction") c.lumping = to_double(key, e);
    else if (key == "output.dir") c.output_dir = e.value;
    else if (key == "output.series") c.output_series = to_bool(key, e);
    else if (key == "output.summary") c.output_summary = to_bool(key, e);
    else if (key == "output.entropy") c.output_entropy = to_bool(key, e);
    else if (key == "output.stride") c.output_stride = to_size(key, e);
    else if (key == "output.snapshots") {
      c.snapshots.clear();
      for (const auto& item : split_list(e.value)) c.snapshots.push_back(to_double(key, Entry{item, e.line, e.column}));
    } else throw ValidationError("unknown config key '" + key + "' (line " + std::to_string(e.line) + ")");
  }
  c.validate();
  return c;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto num = [&](const std::string& k, double v) { kv(k, format_number(v)); };
  auto join = [](const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
    return s;
  };
  if (!c.mesh_file.empty()) kv("mesh.file", c.mesh_file);
  kv("mesh.generator", c.mesh_generator);
  kv("mesh.n", std::to_string(c.mesh_n));
  num("mesh.distortion", c.mesh_distortion);
  kv("mesh.tagging", c.mesh_tagging);
  kv("model.name", c.model);
  for (const auto& [k, v] : c.model_params) num("model.params." + k, v);
  num("tensor.lx", c.lx);
  num("tensor.ly", c.ly);
  num("tensor.lxy", c.lxy);
  num("potential.g", c.g);
  kv("scheme", c.scheme);
  kv("formulation", c.formulation);
  kv("bc.kind", c.bc_kind);
  kv("bc.sides", join(c.bc_sides));
  kv("bc.data", c.bc_data);
  for (const auto& [side, v] : c.bc_values) num("bc." + side + ".value", v);
  kv("initial.kind", c.initial_kind);
  num("initial.value", c.initial_value);
  if (!c.solution.empty()) kv("solution.name", c.solution);
  num("time.final", c.t_final);
  num("time.dt_init", c.stepper.dt_init);
  num("time.dt_max", c.stepper.dt_max);
  num("time.growth", c.stepper.growth);
  num("time.shrink", c.stepper.shrink);
  kv("time.max_failures", std::to_string(c.stepper.max_failures));
  num("newton.tol", c.newton.tol_inc);
  kv("newton.max_iter", std::to_string(c.newton.max_iter));
  num("newton.epsilon", c.newton.clamp_floor);
  num("newton.tol_res", c.newton.tol_res);
  num("lumping.fraction", c.lumping);
  kv("output.dir", c.output_dir);
  kv("output.series", c.output_series ? "1" : "0");
  kv("output.summary", c.output_summary ? "1" : "0");
  kv("output.entropy", c.output_entropy ? "1" : "0");
  kv("output.stride", std::to_string(c.output_stride));
  std::vector<std::string> snaps;
  for (double t : c.snapshots) snaps.push_back(format_number(t));
  if (!snaps.empty()) kv("output.snapshots", join(snaps));
  return o.str();
}

Mesh tag_drain_barrier(const Mesh& mesh) {
  auto in = [](Point p, double x0, double x1, double y0, double y1) {
    return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
  };
  std::vector<CellSpec> specs;
  specs.reserve(mesh.n_cells());
  for (const auto& c : mesh.cells()) {
    const bool barrier = in(c.center, 0.0, 0.75, 0.25, 0.375) || in(c.center, 0.25, 1.0, 0.875, 1.0);
    specs.push_back(CellSpec{c.vertices, c.center, barrier ? 2 : 1});
  }
  return Mesh::create(mesh.vertices(), std::move(specs));
}

RunSetup build_run(const RunConfig& cfg) {
  cfg.validate();
  RunSetup s;
  s.config = cfg;
  Mesh mesh = cfg.mesh_file.empty()
                  ? generate_structured(mesh_kind_from_string(cfg.mesh_generator), cfg.mesh_n, cfg.mesh_distortion)
                  : read_mesh_file(cfg.mesh_file);
  if (cfg.mesh_tagging == "drain_barrier") mesh = tag_drain_barrier(mesh);

  const bool pressure = cfg.formulation == "pressure";
  const Model model = make_model(cfg.model, cfg.model_params);
  const HeteroModel hetero = HeteroModel::drain_barrier();
  TensorField tensors;
  if (pressure) {
    for (const auto& [tag, sub] : hetero.subdomains) tensors.set(tag, sub.tensor);
  } else {
    tensors = TensorField(Tensor2{cfg.lx, cfg.lxy, cfg.ly});
    for (const auto& c : mesh.cells())
      if (!tensors.has(c.tag)) tensors.set(c.tag, Tensor2{cfg.lx, cfg.lxy, cfg.ly});
  }
  auto disc = std::make_shared<Discretization>(std::move(mesh), tensors, LumpingRule::uniform(cfg.lumping));
  s.disc = disc;
  const Mesh& m = disc->mesh();

  if (!cfg.solution.empty()) s.solution = analytical_test_from_string(cfg.solution);
  s.solution_params = {cfg.lx, cfg.ly, cfg.g};
  const Potential potential = cfg.g == 0.0 ? Potential::zero() : Potential::gravity({cfg.g, 0.0});

  BoundaryConditions bc = BoundaryConditions::no_flux(m.n_vertices());
  if (cfg.bc_kind == "dirichlet") {
    std::vector<Side> sides;
    for (const auto& name : cfg.bc_sides) sides.push_back(side_from_string(name));
    bc.dirichlet = vertices_on_sides(m, sides);
    const double floor =
        !pressure && model.singular && cfg.scheme == "nonlinear" ? cfg.newton.clamp_floor : -INFINITY;
    if (cfg.bc_data == "solution") {
      const AnalyticalTest test = *s.solution;
      const AnalyticalParams prm = s.solution_params;
      bc.value = [test, prm, floor](Point x, double t) {
        return std::max(floor, analytical_solution(test, x, t, prm));
      };
    } else {
      const BoundingBox box = m.bounding_box();
      std::vector<std::pair<Side, double>> values;
      for (const auto& name : cfg.bc_sides) {
        const auto it = cfg.bc_values.find(name);
        values.emplace_back(side_from_string(name), it == cfg.bc_values.end() ? 0.0 : it->second);
      }
      bc.value = [values, box, floor](Point x, double) {
        const double tol = 1e-12;
        for (const auto& [side, v] : values) {
          const bool hit = (side == Side::left && std::abs(x.x - box.lo.x) <= tol) ||
                           (side == Side::right && std::abs(x.x - box.hi.x) <= tol) ||
                           (side == Side::bottom && std::abs(x.y - box.lo.y) <= tol) ||
                           (side == Side::top && std::abs(x.y - box.hi.y) <= tol);
          if (hit) return std::max(floor, v);
        }
        return 0.0;
      };
    }
  }

  if (pressure) {
    s.problem = std::make_shared<DiscreteProblem>(DiscreteProblem::pressure_primary(disc, hetero, std::move(bc)));
    s.initial = DofVector(m.n_cells(), m.n_vertices(), cfg.initial_value);
    return s;
  }

  s.problem = std::make_shared<DiscreteProblem>(disc, model, potential, flux_scheme_from_string(cfg.scheme),
                                                std::move(bc));
  if (cfg.initial_kind == "solution") {
    const AnalyticalTest test = *s.solution;
    const AnalyticalParams prm = s.solution_params;
    s.initial = discretize_initial(m, [&](Point x) { return analytical_solution(test, x, 0.0, prm); },
                                   !model.singular);
  } else if (cfg.initial_kind == "constant") {
    s.initial = DofVector(m.n_cells(), m.n_vertices(), cfg.initial_value);
  } else {
    s.initial = discretize_initial(m, gibbs_state(model, potential, cfg.initial_value, m.bounding_box()));
  }

  // Reference state of the relative entropy: the Gibbs profile scaled to the
  // discrete mass of the initial data.
  const bool log_pressure = model.singular && model.pressure(1.0) == 0.0 && std::abs(model.pressure(std::exp(1.0)) - 1.0) < 1e-14;
  if (cfg.bc_kind == "no_flux" && log_pressure) {
    const auto shape = gibbs_state(model, potential, 1.0, m.bounding_box());
    DofVector w = sample_at_dofs(m, shape);
    const double scale = disc->lumped_integral(s.initial) / disc->lumped_integral(w);
    for (double& v : w.cell_values) v *= scale;
    for (double& v : w.vertex_values) v *= scale;
    s.gibbs = std::move(w);
  }
  return s;
}

RunOutcome execute_run(const RunSetup& setup, bool write) {
  const RunConfig& cfg = setup.config;
  const DiscreteProblem& problem = *setup.problem;
  const Discretization& disc = *setup.disc;
  RunOutcome out;

  ErrorAccumulator acc(disc);
  TransientOptions opts;
  opts.t_final = cfg.t_final;
  opts.stepper = cfg.stepper;
  opts.newton = cfg.newton;
  opts.stop_times = cfg.snapshots;
  opts.stride = cfg.output_stride;
  // u_min covers the accepted steps, like the errors; the initial state only
  // counts when no step is taken.
  double u_min = INFINITY;
  double u_min_initial = INFINITY;
  opts.observer = [&](const StepRecord& rec, const DofVector& x) {
    double& slot = rec.dt > 0.0 ? u_min : u_min_initial;
    slot = std::min(slot, rec.u_min);
    if (setup.solution && rec.dt > 0.0) {
      const DofVector ref = sample_at_dofs(disc.mesh(), [&](Point p) {
        return analytical_solution(*setup.solution, p, rec.t, setup.solution_params);
      });
      acc.add(rec.dt, x, ref);
    }
    if (setup.gibbs) out.entropy.emplace_back(rec.t, relative_entropy(disc, x, *setup.gibbs));
  };
  out.result = problem.heterogeneous() ? run_pressure_primary(problem, setup.initial, opts)
                                              : run_transient(problem, setup.initial, opts);

  BenchRow& row = out.summary;
  row.h = mesh_quality(disc.mesh(), disc.submesh(), disc.lumped()).h;
  row.n_vertices = disc.mesh().n_vertices();
  row.dt_init = cfg.stepper.dt_init;
  row.dt_max = cfg.stepper.dt_max;
  row.errors = acc.result();
  row.u_min = std::isinf(u_min) ? u_min_initial : u_min;
  row.newton_total = out.result.report.newton_total;

  if (!write) return out;
  const std::filesystem::path dir(cfg.output_dir);
  if (cfg.output_series)
    atomic_write(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, out.result.report); });
  if (cfg.output_summary) atomic_write(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, row); });
  if (cfg.output_entropy && setup.gibbs)
    atomic_write(dir / "entropy.dat", [&](std::ostream& o) { write_series_dat(o, out.entropy); });

  const auto& traj = out.result.trajectory;
  for (double ts : cfg.snapshots) {
    const auto it = std::find(traj.times.begin(), traj.times.end(), std::min(ts, cfg.t_final));
    if (it == traj.times.end()) continue;
    const DofVector& x = traj.states[static_cast<std::size_t>(it - traj.times.begin())];
    const DofVector u = problem.densities(x);
    const Mesh& m = disc.mesh();
    atomic_write(dir / ("snapshot_t" + format_number(ts) + ".csv"), [&](std::ostream& o) {
      o << "kind,index,x,y,value,u\n";
      for (std::size_t k = 0; k < m.n_cells(); ++k)
        o << "cell," << k << ',' << format_number(m.cell(k).center.x) << ',' << format_number(m.cell(k).center.y)
          << ',' << format_number(x.cell_values[k]) << ',' << format_number(u.cell_values[k]) << '\n';
      for (std::size_t i = 0; i < m.n_vertices(); ++i)
        o << "vertex," << i << ',' << format_number(m.vertex(i).x) << ',' << format_number(m.vertex(i).y) << ','
          << format_number(x.vertex_values[i]) << ',' << format_number(u.vertex_values[i]) << '\n';
    });
  }
  return out;
}

const std::vector<std::string> bench_tests = {"t1_nonlinear", "t1_linear",    "t1_kershaw",     "t2a",
                                              "t2b",          "t2c",          "t2a_2d",         "t2b_2d",
                                              "t2c_2d",       "t3_nonlinear", "t3_quasilinear", "t4"};

RunConfig bench_config(std::string_view test, int level, std::size_t base_n) {
  if (std::find(bench_tests.begin(), bench_tests.end(), test) == bench_tests.end())
    throw ValidationError("unknown benchmark '" + std::string(test) + "'");
  if (level < 0) throw ValidationError("benchmark level must be nonnegative");
  RunConfig c;
  const double scale = std::pow(4.0, -level);
  c.mesh_generator = "split-triangles";
  c.mesh_n = base_n << level;
  c.t_final = 0.25;
  c.stepper.dt_init = 0.001 * scale;
  c.stepper.dt_max = 0.01024 * scale;
  c.output_series = false;
  const std::string t(test);

  if (t == "t1_nonlinear" || t == "t1_linear") {
    c.model = "fokker_planck_log";
    c.scheme = t == "t1_linear" ? "linear" : "nonlinear";
    c.lx = 1.0;
    c.ly = 10.0;
    c.g = 1.0;
    c.solution = "t1";
  } else if (t == "t1_kershaw") {
    c.mesh_generator = "kershaw-like";
    c.mesh_n = 17;
    c.mesh_distortion = 0.5;
    c.model = "fokker_planck_log";
    c.lx = 0.001;
    c.ly = 1.0;
    c.g = 1.0;
    c.solution = "t1";
    c.t_final = 50.0;
    c.stepper.dt_init = 2e-4;
    c.stepper.dt_max = 1.0;
    c.output_entropy = true;
    c.output_series = true;
  } else if (t.rfind("t2", 0) == 0) {
    const char choice = t[2];
    c.model = choice == 'a' ? "pme_a" : (choice == 'b' ? "pme_b" : "pme_c");
    const bool two_d = t.size() > 3;
    c.solution = two_d ? "t2_2d" : "t2_1d";
    c.lx = two_d ? 0.1 : 1.0;
    c.ly = 10.0;
    c.bc_kind = "dirichlet";
  } else if (t == "t3_nonlinear" || t == "t3_quasilinear") {
    c.model = "pme_drift";
    c.scheme = t == "t3_quasilinear" ? "quasilinear" : "nonlinear";
    c.lx = 1.0;
    c.ly = 100.0;
    c.g = 1.0;
    c.solution = "t3";
    c.bc_kind = "dirichlet";
  } else {
    c.mesh_generator = "cartesian";
    c.mesh_n = std::size_t{16} << level;
    c.mesh_tagging = "drain_barrier";
    c.formulation = "pressure";
    c.bc_kind = "dirichlet";
    c.bc_sides = {"bottom", "top"};
    c.bc_data = "constant";
    c.bc_values = {{"bottom", 0.0}, {"top", -4.0}};
    c.initial_kind = "constant";
    c.initial_value = -4.0;
    c.t_final = 1.0;
    c.stepper.dt_init = 1e-4 * scale;
    c.stepper.dt_max = 1e-2 * scale;
    c.snapshots = {0.05, 0.2, 1.0};
    c.output_series = true;
  }
  c.validate();
  return c;
}

BenchOutcome run_bench(std::string_view test, int levels, const std::string& out_dir, std::size_t base_n) {
  if (levels < 1) throw ValidationError("--levels must be at least 1");
  BenchOutcome out;
  for (int l = 0; l < levels; ++l) {
    RunConfig cfg = bench_config(test, l, base_n);
    if (!out_dir.empty()) cfg.output_dir = (std::filesystem::path(out_dir) / ("level_" + std::to_string(l))).string();
    RunOutcome run = execute_run(build_run(cfg), !out_dir.empty());
    out.rows.push_back(run.summary);
    out.runs.push_back(std::move(run));
  }
  if (!out_dir.empty())
    atomic_write(std::filesystem::path(out_dir) / "table.csv",
                 [&](std::ostream& o) { write_bench_table(o, out.rows); });
  return out;
}

} // namespace vagflow
