#ifndef VAGFLOW_CONFIG_HPP
#define VAGFLOW_CONFIG_HPP

#include "vagflow/assembly.hpp"
#include "vagflow/diagnostics.hpp"
#include "vagflow/solver.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vagflow {

/// Everything a transient run needs.
///
/// Text form: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. Keys (defaults in parentheses):
///
///   mesh.file | mesh.generator (split-triangles), mesh.n (8),
///   mesh.distortion (0), mesh.tagging (none | drain_barrier)
///   model.name (fokker_planck_log), model.params.<name>
///   tensor.lx (1), tensor.ly (1), tensor.lxy (0)
///   potential.g (0)                       V(x, y) = -g x
///   scheme (nonlinear | linear | quasilinear)
///   formulation (density | pressure)
///   bc.kind (no_flux | dirichlet), bc.sides (left,right,bottom,top),
///   bc.data (solution | constant), bc.<side>.value (0)
///   initial.kind (solution | constant | gibbs), initial.value (1)
///   solution.name (t1 | t2_1d | t2_2d | t3, empty for none)
///   time.final, time.dt_init, time.dt_max, time.growth, time.shrink,
///   time.max_failures
///   newton.tol, newton.max_iter, newton.epsilon, newton.tol_res
///   lumping.fraction (0.1)
///   output.dir (.), output.series (1), output.summary (1),
///   output.entropy (0), output.stride (1), output.snapshots
struct RunConfig {
  std::string mesh_file;
  std::string mesh_generator = "split-triangles";
  std::size_t mesh_n = 8;
  double mesh_distortion = 0.0;
  std::string mesh_tagging = "none";

  std::string model = "fokker_planck_log";
  std::map<std::string, double> model_params;

  double lx = 1.0;
  double ly = 1.0;
  double lxy = 0.0;
  double g = 0.0;

  std::string scheme = "nonlinear";
  std::string formulation = "density";

  std::string bc_kind = "no_flux";
  std::vector<std::string> bc_sides = {"left", "right", "bottom", "top"};
  std::string bc_data = "solution";
  std::map<std::string, double> bc_values;

  std::string initial_kind = "solution";
  double initial_value = 1.0;
  std::string solution;

  double t_final = 0.25;
  TimeStepper stepper;
  NewtonConfig newton;
  double lumping = 0.1;

  std::string output_dir = ".";
  bool output_series = true;
  bool output_summary = true;
  bool output_entropy = false;
  std::size_t output_stride = 1;
  std::vector<double> snapshots;

  /// Cross-field checks; throws ValidationError naming the field.
  void validate() const;
};

/// Throws ParseError (line, column) on malformed lines and ValidationError on
/// unknown keys or bad values.
RunConfig parse_config(std::string_view text);
RunConfig read_config_file(const std::string& path);
/// Canonical text: every key in a fixed order, numbers with 17 digits.
std::string serialize_config(const RunConfig& cfg);

/// A ready-to-run problem assembled from a config.
struct RunSetup {
  RunConfig config;
  std::shared_ptr<const Discretization> disc;
  std::shared_ptr<const DiscreteProblem> problem;
  DofVector initial;
  std::optional<AnalyticalTest> solution;
  AnalyticalParams solution_params;
  /// Reference state of the relative entropy (density formulation with a
  /// logarithmic pressure only).
  std::optional<DofVector> gibbs;
};

RunSetup build_run(const RunConfig& cfg);

/// Marks drain (tag 1) and barrier (tag 2) cells by their centers.
Mesh tag_drain_barrier(const Mesh& mesh);

struct RunOutcome {
  TransientResult result;
  BenchRow summary;
  std::vector<std::pair<double, double>> entropy;
};

/// Runs a setup, accumulating errors against the analytical solution when
/// there is one, and writes the requested artifacts to output.dir when
/// `write` is set.
RunOutcome execute_run(const RunSetup& setup, bool write = true);

/// Names accepted by bench_config.
extern const std::vector<std::string> bench_tests;

/// Config of one level (0 = coarsest) of a built-in benchmark: the mesh is
/// refined by 2 and both time steps divided by 4 per level.
RunConfig bench_config(std::string_view test, int level, std::size_t base_n = 5);

struct BenchOutcome {
  std::vector<BenchRow> rows;
  std::vector<RunOutcome> runs;
};

/// Runs `levels` levels of a benchmark; writes table.csv (and per-level
/// artifacts) below out_dir when it is non-empty.
BenchOutcome run_bench(std::string_view test, int levels, const std::string& out_dir, std::size_t base_n = 5);

} // namespace vagflow

#endif
