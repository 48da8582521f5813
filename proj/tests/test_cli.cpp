#include <doctest.h>

#include "cli.hpp"
#include "pcsft/serialization.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace pcsft;
using namespace pcsft::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pcsft_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "pcsft");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { ::setenv("PCSFT_THREADS", v, 1); }
  ~ThreadsEnv() { ::unsetenv("PCSFT_THREADS"); }
};

}  // namespace

TEST_CASE("alpha-bound prints the bound and nothing else on stdout") {
  std::ostringstream out, err;
  CHECK(run_alpha_bound(1e-15, out, err).exit_code == exit_pass);
  CHECK(out.str() == "alpha_upper_bound_eV=1e-15\n");
  CHECK(err.str().find("upper bound") != std::string::npos);
  std::ostringstream out2, err2;
  CHECK(run_alpha_bound(-1, out2, err2).exit_code == exit_usage);
  CHECK(out2.str().empty());
  CHECK(run({"alpha-bound"}) == exit_usage);
}

TEST_CASE("presets resolve and validate") {
  const auto names = preset_names();
  CHECK(names.size() == 7);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
  const json r = resolve_config({{"preset", "plane-wave"}, {"t_end", 0.5}}, Overrides{7, "x"});
  CHECK(r.at("t_end") == 0.5);
  CHECK(r.at("seed") == 7);
  CHECK(r.at("output_dir") == "x");
  CHECK(r.at("grid").at("points") == 512);
}

TEST_CASE("config hash ignores the output directory only") {
  json a = preset("trace-check");
  json b = a;
  b["output_dir"] = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).rfind("fnv1a64:", 0) == 0);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("dequantize presets") {
  const fs::path dir = scratch("deq");
  CHECK(run({"dequantize", "--preset", "quartic-demo", "--out", dir.string()}) == exit_pass);
  const json rep = read_json(dir / "report.json");
  CHECK(rep.at("fitted_slope").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.at("status") == "fitted");
  CHECK(slurp(dir / "asymptotics.csv").rfind("alpha,classical,classical_stderr,quantum_term,remainder\n", 0) == 0);
  const json m = read_json(dir / "manifest.json");
  CHECK(m.at("command") == "dequantize");
  CHECK(m.at("seed") == 1);
  CHECK(m.at("config_hash").get<std::string>().size() == 8 + 16);

  const fs::path q = scratch("deq_quad");
  CHECK(run({"dequantize", "--preset", "quadratic-demo", "--out", q.string()}) == exit_pass);
  CHECK(read_json(q / "report.json").at("status") == "exact");
}

TEST_CASE("malformed configs exit with the usage code") {
  const fs::path dir = scratch("bad");
  json two_alphas = preset("quartic-demo");
  two_alphas["alphas"] = {0.1, 0.01};
  CHECK(run({"dequantize", "--config", write_config(dir, two_alphas).string(), "--out", dir.string()}) == exit_usage);

  json typo = preset("quartic-demo");
  typo["alphs"] = 1;
  CHECK(run({"dequantize", "--config", write_config(dir, typo).string()}) == exit_usage);

  json increasing = preset("quartic-demo");
  increasing["alphas"] = {0.01, 0.1, 0.2};
  CHECK(run({"dequantize", "--config", write_config(dir, increasing).string()}) == exit_usage);

  CHECK(run({"evolve", "--preset", "quartic-demo", "--out", dir.string()}) == exit_usage);
  CHECK(run({"evolve"}) == exit_usage);
  CHECK(run({"dequantize", "--config", (dir / "missing.json").string()}) == exit_usage);
  std::ofstream(dir / "junk.json") << "{not json";
  CHECK(run({"dequantize", "--config", (dir / "junk.json").string()}) == exit_usage);

  json bad_grid = preset("plane-wave");
  bad_grid["grid"]["points"] = 1;
  CHECK(run({"evolve", "--config", write_config(dir, bad_grid).string(), "--out", dir.string()}) == exit_usage);
  json bad_seed = preset("trace-check");
  bad_seed["seed"] = -3;
  CHECK(run({"trace-check", "--config", write_config(dir, bad_seed).string(), "--out", dir.string()}) == exit_usage);
}

TEST_CASE("too few samples leave the slope inconclusive") {
  const fs::path dir = scratch("noisy");
  json c = preset("quartic-demo-mc");
  c["count"] = 10;
  c["output_dir"] = dir.string();
  const Outcome o = run_command("dequantize", c);
  CHECK(o.exit_code == exit_inconclusive);
  CHECK(o.report.at("status") == "noise-dominated");
}

TEST_CASE("a slope outside the accepted range is a numerical failure") {
  const fs::path dir = scratch("range");
  json c = preset("quartic-demo");
  c["slope_range"] = {2.5, 3.0};
  c["output_dir"] = dir.string();
  CHECK(run_command("dequantize", c).exit_code == exit_numerical);
}

TEST_CASE("trace-check") {
  const fs::path dir = scratch("trace");
  json c = preset("trace-check");
  c["count"] = 4000;
  c["trials"] = 5;
  c["output_dir"] = dir.string();
  const Outcome o = run_command("trace-check", c);
  CHECK(o.exit_code == exit_pass);
  CHECK(o.report.at("policy") == "enforced");
  CHECK(slurp(dir / "trace_check.csv").rfind("trial,analytic,monte_carlo,std_error,residual,sigmas,passed\n", 0) == 0);

  c["count"] = 10;
  const Outcome small = run_command("trace-check", c);
  CHECK(small.exit_code == exit_pass);
  CHECK(small.report.at("policy") == "report-only");
}

TEST_CASE("outputs do not depend on the thread count") {
  json deq = preset("quartic-demo-mc");
  deq["count"] = 20000;
  json tc = preset("trace-check");
  tc["count"] = 5000;
  tc["trials"] = 3;
  std::vector<std::string> deq_files, tc_files;
  for (const char* threads : {"1", "3"}) {
    ThreadsEnv env(threads);
    const fs::path a = scratch(std::string("det_deq_") + threads);
    deq["output_dir"] = a.string();
    run_command("dequantize", deq);
    deq_files.push_back(slurp(a / "asymptotics.csv") + slurp(a / "report.json"));
    const fs::path b = scratch(std::string("det_tc_") + threads);
    tc["output_dir"] = b.string();
    run_command("trace-check", tc);
    tc_files.push_back(slurp(b / "trace_check.csv") + slurp(b / "report.json"));
  }
  CHECK(deq_files[0] == deq_files[1]);
  CHECK(tc_files[0] == tc_files[1]);
}

TEST_CASE("the seed override changes the samples and the manifest") {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  json tc = preset("trace-check");
  tc["count"] = 2000;
  tc["trials"] = 2;
  write_config(a, tc);
  CHECK(run({"trace-check", "--config", (a / "config.json").string(), "--out", a.string()}) == exit_pass);
  CHECK(run({"trace-check", "--config", (a / "config.json").string(), "--seed", "99", "--out", b.string()}) ==
        exit_pass);
  CHECK(read_json(b / "manifest.json").at("seed") == 99);
  CHECK(read_json(a / "manifest.json").at("config_hash") != read_json(b / "manifest.json").at("config_hash"));
  CHECK(slurp(a / "trace_check.csv") != slurp(b / "trace_check.csv"));
}

TEST_CASE("evolve") {
  const fs::path dir = scratch("evolve");
  json pw = preset("plane-wave");
  pw["t_end"] = 0.5;
  pw["snapshots"] = true;
  pw["output_dir"] = dir.string();
  const Outcome o = run_command("evolve", pw);
  CHECK(o.exit_code == exit_pass);
  CHECK(o.report.at("reference").at("error").get<double>() < 1e-9);
  CHECK(slurp(dir / "trajectory.csv").rfind("t,norm,energy\n", 0) == 0);
  std::ifstream snap(dir / "snapshots.bin", std::ios::binary);
  const auto frames = read_snapshots<double>(snap);
  CHECK(frames.header.points_per_axis == 512);
  CHECK(frames.times.back() == doctest::Approx(0.5));

  // restart from the last frame
  const fs::path dir2 = scratch("evolve_restart");
  json restart = pw;
  restart["initial"] = {{"type", "file"}, {"path", (dir / "snapshots.bin").string()}};
  restart.erase("reference_tolerance");
  restart["snapshots"] = false;
  restart["output_dir"] = dir2.string();
  CHECK(run_command("evolve", restart).exit_code == exit_pass);

  const fs::path dir3 = scratch("evolve_bilinear");
  json bl = preset("bilinear-demo");
  bl["output_dir"] = dir3.string();
  const Outcome b = run_command("evolve", bl);
  CHECK(b.exit_code == exit_pass);
  CHECK(b.report.at("reference").at("kind") == "bilinear-modes");
  CHECK(b.report.at("reference").at("phase_error").get<double>() < 1e-6);
}

TEST_CASE("evolve failures exit with the numerical code") {
  const fs::path dir = scratch("evolve_fail");
  json bl = preset("bilinear-demo");
  bl["dt"] = 5.0;
  bl["t_end"] = 50.0;
  CHECK(run({"evolve", "--config", write_config(dir, bl).string(), "--out", dir.string()}) == exit_numerical);

  // the split-step scheme stays unitary, but a huge step ruins energy conservation
  json pw = preset("plane-wave");
  pw["initial"] = {{"type", "gaussian"}, {"amplitude", 2.0}, {"width", 0.3}};
  pw.erase("reference_tolerance");
  pw["dt"] = 0.5;
  pw["t_end"] = 5.0;
  CHECK(run({"evolve", "--config", write_config(dir, pw).string(), "--out", dir.string()}) == exit_numerical);
}

TEST_CASE("single precision runs") {
  const fs::path dir = scratch("f32");
  json c = preset("quartic-demo");
  c["precision"] = "f32";
  c["output_dir"] = dir.string();
  const Outcome o = run_command("dequantize", c);
  CHECK(o.report.at("precision") == "f32");
  CHECK(o.report.at("fitted_slope").get<double>() == doctest::Approx(2.0).epsilon(0.05));
}
