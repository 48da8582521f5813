#include "cli.hpp"
#include "schema.hpp"

#include "pcsft/serialization.hpp"

#include <cmath>
#include <fstream>

namespace pcsft::cli {

namespace {

struct DequantizeConfig {
  Common common;
  Index n = 0;
  json density;
  json variable;
  std::vector<double> alphas;
  std::int64_t count = 100000;
  EvaluationPath path = EvaluationPath::automatic;
  double slope_lo = 1.8, slope_hi = 2.2;
};

std::vector<double> read_alphas(Fields& f) {
  const json& a = f.raw("alphas");
  std::vector<double> out;
  if (a.is_array()) {
    for (const json& v : a) {
      if (!v.is_number()) f.fail("alphas must be numbers");
      out.push_back(v.get<double>());
    }
  } else {
    Fields g(a, f.where() + ".alphas");
    const double from = g.positive("from"), to = g.positive("to");
    const auto points = g.at_least("points", 1);
    g.finish();
    for (std::int64_t i = 0; i < points; ++i)
      out.push_back(points == 1 ? from : from * std::pow(to / from, double(i) / double(points - 1)));
  }
  if (out.size() < 3) f.fail("alphas needs at least three values");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0)) f.fail("alphas must be positive");
    if (i > 0 && !(out[i] < out[i - 1])) f.fail("alphas must be strictly decreasing");
  }
  return out;
}

DequantizeConfig parse(const json& config) {
  Fields f(config, "dequantize");
  DequantizeConfig c;
  c.common = read_common(f);
  c.n = f.at_least("n", 1);
  c.density = f.has("density") ? f.raw("density") : json("maximally-mixed");
  c.variable = f.raw("variable");
  if (!c.variable.is_array() || c.variable.empty()) f.fail("variable must be a non-empty term list");
  c.alphas = read_alphas(f);
  c.count = f.at_least("count", 2, 100000);
  const std::string path = f.get<std::string>("path", "automatic");
  if (path == "automatic") c.path = EvaluationPath::automatic;
  else if (path == "isserlis") c.path = EvaluationPath::isserlis;
  else if (path == "monte-carlo") c.path = EvaluationPath::monte_carlo;
  else f.fail("path must be automatic, isserlis or monte-carlo");
  if (f.has("slope_range")) {
    const auto r = f.require<std::vector<double>>("slope_range");
    if (r.size() != 2 || !(r[0] < r[1])) f.fail("slope_range must be [lo, hi] with lo < hi");
    c.slope_lo = r[0];
    c.slope_hi = r[1];
  }
  f.finish();
  return c;
}

template <typename Scalar>
DensityOperator<Scalar> make_density(const json& density, Index n) {
  if (density.is_string()) {
    if (density.get<std::string>() == "maximally-mixed") return DensityOperator<Scalar>::maximally_mixed(n);
    throw ConfigError("unknown density preset '" + density.get<std::string>() + "'");
  }
  if (density.is_object() && density.contains("random")) {
    Fields f(density, "density");
    Fields r(f.raw("random"), "density.random");
    const auto seed = r.require<std::uint64_t>("seed");
    const auto rank = r.get<std::int64_t>("rank", n);
    r.finish();
    f.finish();
    Rng rng = make_rng(seed, 0x0d);
    return DensityOperator<Scalar>(random_density_matrix<Scalar>(rng, n, rank));
  }
  Fields f(density, "density");
  f.has("re");
  f.has("im");
  f.finish();
  ComplexMatrix<Scalar> M = complex_matrix_from_json<Scalar>(density);
  if (M.rows() != n || M.cols() != n) throw ConfigError("density matrix must be n x n");
  return DensityOperator<Scalar>(M);
}

template <typename Scalar>
Outcome run(const DequantizeConfig& c) {
  const DensityOperator<Scalar> D = make_density<Scalar>(c.density, c.n);
  const ClassicalVariable<Scalar> f = variable_from_json<Scalar>(c.variable, c.n);
  std::vector<Scalar> alphas(c.alphas.begin(), c.alphas.end());
  const AsymptoticsReport<Scalar> r = verify_asymptotics(f, D, alphas, c.count, c.common.seed, c.path);

  Outcome out;
  out.report = to_json(r);
  bool passed = false;
  if (r.status == AsymptoticsStatus::exact) {
    passed = true;
    out.exit_code = exit_pass;
    out.message = "remainder vanishes identically (quadratic variable)";
  } else if (r.status == AsymptoticsStatus::noise_dominated) {
    out.exit_code = exit_inconclusive;
    out.message = "fewer than two remainders resolved above Monte Carlo noise";
  } else {
    passed = r.fitted_slope >= c.slope_lo && r.fitted_slope <= c.slope_hi;
    out.exit_code = passed ? exit_pass : exit_numerical;
    out.message = "fitted slope " + format_number(r.fitted_slope);
  }
  out.report["passed"] = passed;
  out.report["slope_range"] = {c.slope_lo, c.slope_hi};
  out.report["n"] = c.n;
  out.report["count"] = c.count;
  out.report["precision"] = c.common.precision;

  const std::filesystem::path dir(c.common.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "asymptotics.csv");
  write_csv(csv, r);
  std::ofstream rep(dir / "report.json");
  rep << out.report.dump(2) << '\n';
  return out;
}

}  // namespace

Outcome run_dequantize(const json& config) {
  const DequantizeConfig c = parse(config);
  return c.common.precision == "f32" ? run<float>(c) : run<double>(c);
}

}  // namespace pcsft::cli
