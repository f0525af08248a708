#include "vagflow/config.hpp"
#include "vagflow/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace vagflow;

namespace {

int cmd_run(const std::string& path) {
  const RunOutcome out = execute_run(build_run(read_config_file(path)));
  write_summary_csv(std::cout, out.summary);
  return 0;
}

int cmd_bench(const std::string& test, int levels, const std::string& dir, std::size_t base_n) {
  const BenchOutcome out = run_bench(test, levels, dir, base_n);
  write_bench_table(std::cout, out.rows);
  return 0;
}

int cmd_mesh_info(const std::string& path, double lumping) {
  Mesh mesh = read_mesh_file(path);
  TensorField tensors(Tensor2{});
  for (const auto& c : mesh.cells())
    if (!tensors.has(c.tag)) tensors.set(c.tag, Tensor2{});
  const Discretization disc(std::move(mesh), tensors, LumpingRule::uniform(lumping));
  const QualityReport q = disc.quality();
  std::cout << "quantity,value\n"
            << "n_cells," << disc.mesh().n_cells() << '\n'
            << "n_vertices," << disc.mesh().n_vertices() << '\n'
            << "h," << format_number(q.h) << '\n'
            << "theta," << format_number(q.theta) << '\n'
            << "ell," << q.ell << '\n'
            << "zeta," << format_number(q.zeta) << '\n'
            << "cond_min," << format_number(q.cond_min) << '\n'
            << "cond_max," << format_number(q.cond_max) << '\n';
  return 0;
}

int cmd_mesh_gen(const std::string& kind, std::size_t n, double distortion, const std::string& out) {
  const std::string text = serialize_mesh(generate_structured(mesh_kind_from_string(kind), n, distortion));
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out);
  f << text;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear VAG finite-volume solver for degenerate parabolic equations"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a simulation described by a config file");
  run->add_option("config", config_path, "Config file")->required();

  std::string test;
  int levels = 3;
  std::string out_dir = "bench_out";
  std::size_t base_n = 5;
  auto* bench = app.add_subcommand("bench", "Run a built-in benchmark over refinement levels");
  bench->add_option("test", test, "Benchmark name")->required()->check(CLI::IsMember(bench_tests));
  bench->add_option("--levels", levels, "Number of refinement levels")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_dir, "Output directory");
  bench->add_option("--base-n", base_n, "Subdivisions of the coarsest mesh")->check(CLI::PositiveNumber);

  std::string mesh_path;
  double lumping = 0.1;
  auto* info = app.add_subcommand("mesh-info", "Print mesh quality measures");
  info->add_option("file", mesh_path, "Mesh file")->required();
  info->add_option("--lumping", lumping, "Lumping fraction f");

  std::string kind;
  std::size_t n = 8;
  double distortion = 0.0;
  std::string mesh_out;
  auto* gen = app.add_subcommand("mesh-gen", "Write a structured mesh in the text format");
  gen->add_option("kind", kind, "cartesian | split-triangles | kershaw-like")->required();
  gen->add_option("n", n, "Subdivisions per side")->required();
  gen->add_option("--distortion", distortion, "Kershaw-like distortion in [0, 1)");
  gen->add_option("--out", mesh_out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*bench) return cmd_bench(test, levels, out_dir, base_n);
    if (*info) return cmd_mesh_info(mesh_path, lumping);
    if (*gen) return cmd_mesh_gen(kind, n, distortion, mesh_out);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
