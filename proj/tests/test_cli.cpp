#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "envlab/errors.hpp"
#include "envlab/io.hpp"
#include "envlab/report.hpp"

namespace fs = std::filesystem;
using namespace envlab;

namespace {

const fs::path kFixtures = ENVLAB_FIXTURES;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("envlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ENVLAB_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json without_timing(nlohmann::json j) {
  j.erase("timing");
  return j;
}

std::size_t count_lines(const fs::path& p, bool data_only) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!data_only || (!line.empty() && line[0] != '#')) ++n;
  return n;
}

}  // namespace

TEST_CASE("envelope of a convex weight returns the weight") {
  const auto out = scratch("envelope");
  REQUIRE(run("envelope --input " + (kFixtures / "convex.csv").string() + " --out " + out.string()) == 0);
  const auto t = read_csv((out / "envelope.csv").string());
  const auto w = read_weight_csv((kFixtures / "convex.csv").string());
  REQUIRE(t.rows.size() == w.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.rows[i][2] == doctest::Approx(w.values()[i]).epsilon(1e-12));
  const auto rep = read_json((out / "equilibrium-envelope.json").string());
  CHECK(rep["status"] == "pass");
  CHECK(rep["seed"] == 42);
}

TEST_CASE("fiber-check reports both constants") {
  const auto out = scratch("fiber");
  CHECK(run("fiber-check --oracle-K --out " + out.string()) == 0);
  const auto rep = read_json((out / "fiber-gamma-integral.json").string());
  CHECK(rep["details"]["K_oracle"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(rep["details"]["K_printed"].get<double>() == 4.0);
  CHECK(rep["details"]["K_agrees"] == false);
}

TEST_CASE("verify-all passes on the fixtures, with known anchors and fixed seed") {
  const auto out = scratch("all");
  REQUIRE(run("verify-all --seed 42 --fixtures " + kFixtures.string() + " --out " + out.string()) == 0);
  const auto summary = read_json((out / "summary.json").string());
  CHECK(summary["status"] == "pass");
  CHECK(summary["reports"].size() == 12);
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.path().extension() != ".json" || entry.path().filename() == "summary.json") continue;
    const auto rep = read_json(entry.path().string());
    CAPTURE(entry.path().string());
    CHECK(is_known_anchor(rep["anchor"].get<std::string>()));
    CHECK(rep["seed"] == 42);
    for (const char* key : {"check", "status", "max_violation", "tolerance", "grid", "timing"}) CHECK(rep.contains(key));
    CHECK(rep["timing"].contains("wall_time_s"));
  }
}

TEST_CASE("reports are deterministic apart from timing") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  REQUIRE(run("glue-demo --seed 7 --out " + a.string()) == 0);
  REQUIRE(run("glue-demo --seed 7 --out " + b.string()) == 0);
  for (const char* name : {"regularized-max.json", "hirzebruch-demo.json"})
    CHECK(without_timing(read_json((a / name).string())) == without_timing(read_json((b / name).string())));
  CHECK(slurp(a / "glued.csv") == slurp(b / "glued.csv"));
}

TEST_CASE("ENVLAB_OUT sets the default output directory") {
  const auto out = scratch("env");
  const std::string cmd = "ENVLAB_OUT=" + out.string() + " " + ENVLAB_BIN + " fiber-check > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(out / "fiber-volume.json"));
}

TEST_CASE("exit codes") {
  const auto out = scratch("codes");
  const auto bad = out / "bad.csv";
  std::ofstream(bad) << "s,u\n0,1\n1,oops\n";
  CHECK(run("envelope --input " + bad.string() + " --out " + out.string()) == 2);
  CHECK(run("envelope --input " + (out / "missing.csv").string() + " --out " + out.string()) == 2);
  CHECK(run("export-plot --input " + bad.string() + " --out " + out.string()) == 2);
  CHECK(run("envelope --bogus") == 2);
  CHECK(run("fiber-check --tol -1 --out " + out.string()) == 2);

  const auto cfg = out / "corrupt.json";
  std::ofstream(cfg) << R"({"k": 3, "d_A": 1, "d_L": 0, "grid": 64, "epsilon": 0.5, "corrupt_inner": true})";
  CHECK(run("glue-demo --config " + cfg.string() + " --out " + out.string()) == 1);
  CHECK(read_json((out / "hirzebruch-demo.json").string())["details"]["failed_stage"] == "convexity");
}

TEST_CASE("plot export") {
  const auto out = scratch("plot");
  REQUIRE(run("export-plot --input " + (kFixtures / "convex.csv").string() + " --output " + (out / "w.dat").string()) == 0);
  CHECK(count_lines(out / "w.dat", true) == read_weight_csv((kFixtures / "convex.csv").string()).size());

  REQUIRE(run("family --model divisor --d-A 1 --d-L 0 --grid 24 --t-points 32 --out " + out.string()) == 0);
  REQUIRE(run("export-plot --input " + (out / "fibered.csv").string() + " --output " + (out / "f.dat").string()) == 0);
  const auto fw = read_weight2d_csv((out / "fibered.csv").string());
  // Blocks are separated by exactly one blank line.
  std::ifstream in(out / "f.dat");
  std::string line;
  std::size_t blanks = 0;
  while (std::getline(in, line)) blanks += line.empty();
  CHECK(blanks + 1 == fw.n_tau());
  CHECK(count_lines(out / "f.dat", true) == fw.n_tau() * fw.n_s());
  const auto fam = read_csv((out / "family.csv").string());
  CHECK(fam.header == std::vector<std::string>{"t", "s", "psi"});
  CHECK(fam.rows.size() == 33 * 24);
}

TEST_CASE("round trips are the identity on values") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1e3);
  const auto dir = scratch("roundtrip");
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(50), u(50);
    double x = g(rng);
    for (std::size_t i = 0; i < s.size(); ++i) {
      x += std::abs(g(rng)) + 1e-3;
      s[i] = x;
      u[i] = g(rng) * std::exp(g(rng) / 300.0);
    }
    u[1] = u[0] - 1.0;
    u[49] = u[48] + 1.0;
    const SampledWeight w(s, u, -1.0, 1.0);
    write_weight_csv((dir / "w.csv").string(), w);
    const auto back = read_weight_csv((dir / "w.csv").string());
    CHECK(back.grid() == w.grid());
    CHECK(back.values() == w.values());

    std::vector<double> tau = {-1.0, 0.5, 2.0}, v(3 * s.size());
    for (double& y : v) y = g(rng);
    const SampledWeight2D w2(tau, s, v, ConvexPolygon({{0.0, 0.0}}));
    write_weight2d_csv((dir / "w2.csv").string(), w2);
    const auto back2 = read_weight2d_csv((dir / "w2.csv").string());
    CHECK(back2.grid_tau() == tau);
    CHECK(back2.grid_s() == s);
    CHECK(back2.values() == v);
  }

  TotalSpaceSection F{4, {{0, 1, {1.0, -0.25}}, {3, 2, {0.1, 1e-17}}}};
  const auto G = section_from_json(section_to_json(F));
  REQUIRE(G.terms.size() == 2);
  CHECK(G.terms[1].c == F.terms[1].c);
  CHECK_THROWS_AS(section_from_json({{"m", 4}}), InvalidInputError);
  CHECK_THROWS_AS(read_weight_csv((dir / "nope.csv").string()), IoError);
}
