#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>

#include "envlab/envelope.hpp"
#include "envlab/errors.hpp"
#include "envlab/family.hpp"
#include "envlab/fiber.hpp"
#include "envlab/gluing.hpp"
#include "envlab/io.hpp"
#include "envlab/models.hpp"
#include "envlab/sections.hpp"

namespace fs = std::filesystem;
using namespace envlab;

namespace {

struct Options {
  std::string out;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  // envelope / export-plot
  std::string input;
  std::optional<double> slope_min, slope_max;
  std::string output;
  // family
  std::string model = "bump";
  int d_A = 2, d_L = 1;
  int grid = 128;
  std::size_t t_points = 256;
  // fiber-check
  bool oracle_K = false;
  // sections-check
  std::string section;
  int sections = 100;
  // glue-demo / verify-all
  std::string config;
  std::string fixtures;
};

/// Writes reports into the output directory and remembers their status.
class Run {
 public:
  explicit Run(const Options& o) : dir_(o.out), seed_(o.seed) { fs::create_directories(dir_); }

  void add(VerificationReport rep) {
    rep.seed = seed_;
    write_report(path(rep.check + ".json"), rep);
    std::cout << (rep.passed ? "PASS " : "FAIL ") << rep.check << "  max_violation=" << rep.max_violation
              << "  tolerance=" << rep.tolerance << "\n";
    summary_.push_back({{"check", rep.check}, {"anchor", rep.anchor}, {"status", rep.status()}});
    ok_ = ok_ && rep.passed;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int finish() const {
    write_json(path("summary.json"), {{"seed", seed_}, {"reports", summary_}, {"status", ok_ ? "pass" : "fail"}});
    return ok_ ? 0 : 1;
  }

 private:
  fs::path dir_;
  std::uint64_t seed_;
  nlohmann::json summary_ = nlohmann::json::array();
  bool ok_ = true;
};

double tol_or(const Options& o, double fallback) { return o.tol.value_or(fallback); }

SampledWeight bump_weight(const std::vector<double>& grid) {
  return SampledWeight::from_function(grid, [](double s) { return softplus(s) + 0.5 * std::exp(-s * s); }, 0.0, 1.0);
}

void envelope_checks(const Options& o, Run& run) {
  const SampledWeight w = read_weight_csv(o.input);
  const SlopeInterval I{o.slope_min.value_or(w.slope_left()), o.slope_max.value_or(w.slope_right())};
  const SampledWeight e = equilibrium_envelope(w, I);
  CsvTable t{{"s", "u", "u_e"}, {}};
  for (std::size_t i = 0; i < w.size(); ++i) t.rows.push_back({w.grid()[i], w.values()[i], e.values()[i]});
  write_csv(run.path("envelope.csv"), t);
  run.add(check_envelope(w, I, tol_or(o, 1e-8)));
}

ModelBundlePair load_pair(const Options& o) {
  if (!o.input.empty()) return pair_from_json(read_json(o.input));
  const auto s = linspace(-8.0, 8.0, static_cast<std::size_t>(o.grid));
  if (o.model == "bump") return bump_model_pair(s);
  if (o.model == "divisor") return divisor_model_pair(s, o.d_A, o.d_L);
  throw InvalidInputError("unknown model '" + o.model + "'");
}

void family_checks(const Options& o, Run& run) {
  const ModelBundlePair pair = load_pair(o);
  const FamilyCurve fc = family_curve(pair, lobatto_t_grid(o.t_points));
  const auto tau = linspace(-10.0, 10.0, static_cast<std::size_t>(o.grid));
  const FiberedWeight fw = fibered_weight(pair, fc, tau);
  write_family_csv(run.path("family.csv"), fc);
  write_weight2d_csv(run.path("fibered.csv"), fw);
  write_plot_2d(run.path("fibered.dat"), fw);
  const double tol = tol_or(o, 1e-9);
  run.add(check_monotone_family(fc, tol));
  run.add(check_right_continuity(fc, tol));
  run.add(check_upper_semicontinuity(fc, tol));
  run.add(check_fibered_weight(fc, fw, tol));
  run.add(minimal_singularity_gap(pair, fw));
}

void fiber_checks(const Options& o, Run& run) {
  run.add(check_fiber_volume(o.seed, 100, tol_or(o, 1e-10)));
  run.add(check_gamma_profile(o.seed, 20, o.oracle_K, tol_or(o, 1e-8)));
}

void sections_checks(const Options& o, Run& run) {
  run.add(sandwich_suite(bump_weight(default_grid()), 1, {8, 64, 256}, BaseMeasure::fubini_study(), tol_or(o, 1e-9)));

  const ModelBundlePair pair = bump_model_pair(linspace(-10.0, 10.0, 257));
  const double tol = tol_or(o, 1e-8);
  if (!o.section.empty()) {
    const TotalSpaceSection F = section_from_json(read_json(o.section));
    run.add(coefficient_inequality(F, pair, F.m, tol));
    return;
  }
  // Many seeded sections folded into one report.
  Stopwatch clock;
  std::mt19937_64 rng(o.seed);
  TotalSpaceQuadrature quad(pair, 4);
  VerificationReport all;
  all.check = "coefficient-inequality";
  all.anchor = "coefficient-inequality";
  all.tolerance = tol;
  all.passed = true;
  std::size_t failed = 0;
  for (int i = 0; i < o.sections; ++i) {
    const auto rep = coefficient_inequality(random_total_space_section(rng, pair, 4, 6), quad, tol);
    all.max_violation = std::max(all.max_violation, rep.max_violation);
    if (!rep.passed) ++failed;
  }
  all.passed = failed == 0;
  all.grid = {{"m", 4}, {"sections", o.sections}, {"max_terms", 6}};
  all.details = {{"failed_sections", failed}};
  all.wall_time_s = clock.seconds();
  run.add(all);
}

void glue_checks(const Options& o, Run& run) {
  run.add(check_regularized_max(o.seed, 1000, 100, tol_or(o, 1e-10)));
  const HirzebruchConfig cfg = o.config.empty() ? HirzebruchConfig{} : HirzebruchConfig::from_json(read_json(o.config));
  const HirzebruchResult res = hirzebruch_demo(cfg);
  write_weight2d_csv(run.path("inner.csv"), res.inner);
  write_weight2d_csv(run.path("outer.csv"), res.outer);
  write_weight2d_csv(run.path("glued.csv"), res.glued);
  write_plot_2d(run.path("glued.dat"), res.glued);
  run.add(res.report);
}

int export_plot(const Options& o) {
  const CsvTable head = read_csv(o.input);
  const std::string target = o.output.empty() ? (fs::path(o.out) / (fs::path(o.input).stem().string() + ".dat")).string() : o.output;
  if (!fs::path(target).parent_path().empty()) fs::create_directories(fs::path(target).parent_path());
  if (head.header == std::vector<std::string>{"s", "u"}) {
    const SampledWeight w = read_weight_csv(o.input);
    const SlopeInterval I{o.slope_min.value_or(w.slope_left()), o.slope_max.value_or(w.slope_right())};
    write_plot_1d(target, w, equilibrium_envelope(w, I));
  } else if (head.header == std::vector<std::string>{"tau", "s", "phi"}) {
    write_plot_2d(target, read_weight2d_csv(o.input));
  } else {
    throw InvalidInputError(o.input + ": expected columns s,u or tau,s,phi");
  }
  std::cout << "wrote " << target << "\n";
  return 0;
}

int verify_all(Options o, Run& run) {
  const fs::path fx(o.fixtures);
  if (!o.fixtures.empty()) {
    o.input = (fx / "convex.csv").string();
    envelope_checks(o, run);
    o.section = (fx / "section.json").string();
    o.config = (fx / "demo.json").string();
  }
  o.input.clear();
  family_checks(o, run);
  fiber_checks(o, run);
  sections_checks(o, run);
  glue_checks(o, run);
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envlab: equilibrium weights for circle-invariant toric models and their checks"};
  app.require_subcommand(1);
  Options o;
  if (const char* env = std::getenv("ENVLAB_OUT")) o.out = env;
  if (o.out.empty()) o.out = "envlab-out";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory (default: $ENVLAB_OUT or ./envlab-out)");
    sub->add_option("--seed", o.seed, "seed for randomized checks");
    sub->add_option("--tol", o.tol, "override the default tolerance")->check(CLI::PositiveNumber);
  };

  auto* env = app.add_subcommand("envelope", "equilibrium envelope of a sampled weight");
  common(env);
  env->add_option("--input", o.input, "weight CSV with columns s,u")->required();
  env->add_option("--slope-min", o.slope_min, "lower end of the slope interval");
  env->add_option("--slope-max", o.slope_max, "upper end of the slope interval");

  auto* fam = app.add_subcommand("family", "family of envelope offsets and the fibered weight");
  common(fam);
  fam->add_option("--input", o.input, "pair JSON {s, phi_A, d_A, phi_L, d_L}");
  fam->add_option("--model", o.model, "built-in pair when no input is given")->check(CLI::IsMember({"bump", "divisor"}));
  fam->add_option("--d-A", o.d_A, "degree of A for the divisor model");
  fam->add_option("--d-L", o.d_L, "degree of L for the divisor model");
  fam->add_option("--grid", o.grid, "points per axis for built-in models")->check(CLI::Range(3, 100000));
  fam->add_option("--t-points", o.t_points, "t-grid intervals")->check(CLI::Range(2, 1 << 16));

  auto* fib = app.add_subcommand("fiber-check", "fiber volume and Gamma profile");
  common(fib);
  fib->add_flag("--oracle-K", o.oracle_K, "derive K by quadrature at t = 0 instead of the closed form");

  auto* sec = app.add_subcommand("sections-check", "section approximants and the coefficient inequality");
  common(sec);
  sec->add_option("--section", o.section, "section JSON {m, coefficients:[{l,k,re,im}]}");
  sec->add_option("--sections", o.sections, "number of random sections when none is given")->check(CLI::PositiveNumber);

  auto* glue = app.add_subcommand("glue-demo", "regularized max contract and the gluing demo");
  common(glue);
  glue->add_option("--config", o.config, "demo config JSON");

  auto* all = app.add_subcommand("verify-all", "every check");
  common(all);
  all->add_option("--fixtures", o.fixtures, "directory with convex.csv, section.json and demo.json");

  auto* plot = app.add_subcommand("export-plot", "gnuplot .dat from a weight CSV");
  common(plot);
  plot->add_option("--input", o.input, "weight CSV (s,u or tau,s,phi)")->required();
  plot->add_option("--output", o.output, "target .dat file");
  plot->add_option("--slope-min", o.slope_min, "lower end of the slope interval");
  plot->add_option("--slope-max", o.slope_max, "upper end of the slope interval");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plot->parsed()) return export_plot(o);
    Run run(o);
    if (all->parsed()) return verify_all(o, run);
    if (env->parsed()) envelope_checks(o, run);
    if (fam->parsed()) family_checks(o, run);
    if (fib->parsed()) fiber_checks(o, run);
    if (sec->parsed()) sections_checks(o, run);
    if (glue->parsed()) glue_checks(o, run);
    return run.finish();
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
}
