#include "vagflow/config.hpp"
#include "vagflow/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace vagflow;

namespace {

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

} // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = parse_config(R"(# test one
mesh.generator = cartesian
mesh.n = 6
model.name = fokker_planck_log
tensor.ly = 10
potential.g = 1
solution.name = t1
time.final = 0.1
time.dt_init = 0.001   # trailing comment
time.dt_max = 0.01
output.snapshots = 0.05, 0.075
)");
  CHECK(c.mesh_generator == "cartesian");
  CHECK(c.mesh_n == 6);
  CHECK(c.ly == 10.0);
  CHECK(c.stepper.dt_max == 0.01);
  CHECK(c.snapshots == std::vector<double>{0.05, 0.075});

  CHECK_THROWS_AS(parse_config("scheme = quasilinear\n"), ValidationError);
  CHECK_THROWS_WITH(parse_config("scheme = quasilinear\n"), doctest::Contains("scheme"));
  CHECK_THROWS_AS(parse_config("mesh.colour = red\n"), ValidationError);
  try {
    parse_config("mesh.n = 4\nthis line has no equals sign\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config("time.dt_init = 0.1\ntime.dt_max = 0.01\n"), ValidationError);
}

TEST_CASE("config round trip is idempotent") {
  for (const std::string& test : bench_tests) {
    CAPTURE(test);
    const RunConfig c = bench_config(test, 1);
    const std::string once = serialize_config(c);
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("zero final time gives zero errors") {
  RunConfig c = bench_config("t1_nonlinear", 0);
  c.t_final = 0.0;
  const RunOutcome out = execute_run(build_run(c), false);
  CHECK(out.summary.errors.l1 == 0.0);
  CHECK(out.summary.errors.l2 == 0.0);
  CHECK(out.summary.errors.linf == 0.0);
  CHECK(out.result.trajectory.states.size() == 1);
}

TEST_CASE("test one summary keeps a positive minimum") {
  RunConfig c = bench_config("t1_nonlinear", 0);
  c.t_final = 0.05;
  const RunOutcome out = execute_run(build_run(c), false);
  CHECK(out.summary.u_min > 0.0);
  CHECK(out.summary.errors.l2 > 0.0);
}

TEST_CASE("drain and barrier tagging") {
  const Mesh m = tag_drain_barrier(generate_structured(MeshKind::cartesian, 16));
  int barrier = 0;
  for (const Cell& c : m.cells()) barrier += c.tag == 2;
  // Two strips of 12 x 2 cells.
  CHECK(barrier == 48);
}

TEST_CASE("golden bench table") {
  const BenchOutcome b = run_bench("t1_nonlinear", 2, "", 2);
  std::ostringstream out;
  write_bench_table(out, b.rows);
  std::istringstream got_in(out.str());
  std::ifstream want_in(VAGFLOW_TEST_DATA "/bench_t1_golden.csv");
  REQUIRE(want_in.good());
  const auto got = read_csv(got_in), want = read_csv(want_in);
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  for (std::size_t r = 1; r < got.size(); ++r) {
    REQUIRE(got[r].size() == want[r].size());
    for (std::size_t k = 0; k < got[r].size(); ++k) {
      CAPTURE(r);
      CAPTURE(k);
      if (want[r][k].empty()) {
        CHECK(got[r][k].empty());
        continue;
      }
      const double g = std::stod(got[r][k]), w = std::stod(want[r][k]);
      CHECK(std::abs(g - w) <= 1e-8 * std::max(1.0, std::abs(w)));
    }
  }
}
