// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: pcsft_acceptance [path-to-pcsft-binary]

#include "cli.hpp"
#include "pcsft/dequantization.hpp"
#include "pcsft/dynamics.hpp"
#include "pcsft/serialization.hpp"
#include "pcsft/units.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace pcsft;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Complex = std::complex<double>;

namespace {

struct Result {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pcsft_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ClassicalVariable<double> quartic_variable(Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const auto A = random_symplectic_operator<double>(rng, n);
  const auto G1 = random_positive_symplectic_operator<double>(rng, n);
  const auto G2 = random_positive_symplectic_operator<double>(rng, n);
  return quadratic(0.5, A) + factored_quartic(0.25, G1, G2);
}

std::vector<double> geometric_alphas() { return {1e-1, 1e-1 * std::pow(1e-3, 0.25), 1e-1 * std::pow(1e-3, 0.5),
                                                 1e-1 * std::pow(1e-3, 0.75), 1e-4}; }

// ---------------------------------------------------------------------------

Result trace_formula() {
  const auto t0 = Clock::now();
  int failures = 0;
  double worst_sigma = 0, worst_oracle = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = make_rng(101, static_cast<std::uint64_t>(trial));
    const auto A = random_symplectic_operator<double>(rng, 3);
    const auto D = DensityOperator<double>(random_density_matrix<double>(rng, 3));
    const auto state = from_density_operator(D, 0.5);
    const auto r = trace_formula_check(A, state, 100000, 7000 + static_cast<std::uint64_t>(trial));
    // real-form oracle: E (A psi, psi) = Tr(A B)
    const double oracle = (assemble(A) * state.covariance()).trace();
    worst_oracle = std::max(worst_oracle, std::abs(oracle - r.analytic) / std::max(1.0, std::abs(oracle)));
    worst_sigma = std::max(worst_sigma, double(r.sigmas));
    if (!r.passed) ++failures;
  }
  const double dt = seconds_since(t0);
  return {failures == 0 && worst_oracle < 1e-12 && dt < 30,
          "20 pairs, max " + fmt(worst_sigma) + " stderr, analytic vs real-form oracle " + fmt(worst_oracle) + ", " +
              fmt(dt) + " s"};
}

Result quartic_asymptotics() {
  const auto f = quartic_variable(3, 202);
  Rng rng = make_rng(203);
  const auto D = DensityOperator<double>(random_density_matrix<double>(rng, 3));
  const auto alphas = geometric_alphas();
  const auto exact = verify_asymptotics(f, D, alphas, 1000, 11, EvaluationPath::isserlis);
  const auto t0 = Clock::now();
  const auto mc = verify_asymptotics(f, D, alphas, 1000000, 12, EvaluationPath::monte_carlo);
  const double dt = seconds_since(t0);
  // common random numbers make the Monte Carlo slope exact for a homogeneous
  // quartic, so the estimates themselves are checked against the exact moments
  double worst_sigma = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    worst_sigma = std::max(worst_sigma, std::abs(mc.remainder[i] - exact.remainder[i]) / mc.remainder_stderr[i]);
  const bool ok = worst_sigma <= 5 && exact.status == AsymptoticsStatus::fitted && std::abs(exact.fitted_slope - 2.0) <= 1e-6 &&
                  mc.status == AsymptoticsStatus::fitted && mc.fitted_slope >= 1.8 && mc.fitted_slope <= 2.2 &&
                  dt < 120;
  return {ok, "Isserlis slope " + format_number(exact.fitted_slope) + ", Monte Carlo slope " +
                  format_number(mc.fitted_slope) + " at 1e6 samples in " + fmt(dt) + " s, remainders within " +
                  fmt(worst_sigma) + " stderr of the exact moments"};
}

Result state_round_trip() {
  const auto t0 = Clock::now();
  double worst = 0, worst_trace = 0;
  const Index sizes[] = {2, 4, 8};
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = make_rng(303, static_cast<std::uint64_t>(trial));
    const Index n = sizes[trial % 3];
    const Index rank = 1 + trial % n;
    const auto D = DensityOperator<double>(random_density_matrix<double>(rng, n, rank));
    const double alpha = std::pow(10.0, -3.0 * double(trial) / 19.0);
    const auto back = dequantize_state(from_density_operator(D, alpha));
    worst = std::max(worst, max_abs(back.matrix() - D.matrix()));
    worst_trace = std::max(worst_trace, std::abs(back.matrix().trace() - Complex(1, 0)));
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-12 && worst_trace <= 1e-12 && dt < 5,
          "max entry error " + fmt(worst) + ", trace error " + fmt(worst_trace) + ", " + fmt(dt) + " s"};
}

Result scaling_invariance() {
  const Index n = 3;
  Rng rng = make_rng(404);
  const auto A = random_symplectic_operator<double>(rng, n);
  const auto G1 = random_symplectic_operator<double>(rng, n);
  const auto G2 = random_symplectic_operator<double>(rng, n);
  auto radial = [](std::function<double(double)> g) {
    return [g](const PhaseVector<double>& v) { return g(v.squared_norm()); };
  };
  // smooth terms without analytic Hessians go through finite differences on both sides
  const auto s1 = smooth<double>(n, "r-exp", radial([](double r) { return r * std::exp(-r); }));
  const auto s2 = smooth<double>(n, "atan", radial([](double r) { return std::atan(r) + r * r; }));
  const Matrix<double> Am = assemble(A);
  const auto s3 = smooth<double>(n, "quad-form", [Am](const PhaseVector<double>& v) {
    return std::sin(v.coords().dot(Am * v.coords()));
  });
  std::vector<std::pair<std::string, ClassicalVariable<double>>> suite{
      {"quadratic", quadratic(0.5, A)},
      {"factored quartic", factored_quartic(0.25, G1, G2)},
      {"kernel quartic", kernel_quartic<double>(1.3, PhaseSpace::abstract(n))},
      {"quadratic + quartic", quadratic(0.5, A) + factored_quartic(0.25, G1, G2)},
      {"r exp(-r)", s1},
      {"atan(r) + r^2", s2},
      {"sin of a quadratic form", s3},
      {"log1p", named_smooth<double>("log1p-norm2", n)},
      {"sinh", named_smooth<double>("sinh-norm2", n)},
      {"mixed", quadratic(-0.7, A) + s1 + kernel_quartic<double>(0.2, PhaseSpace::abstract(n)) + 2.0 * s3},
  };
  double worst_hessian = 0, worst_eval = 0;
  std::string worst_name;
  for (const auto& [name, f] : suite) {
    for (double alpha : {0.5, 1e-2, 1e-4}) {
      const auto fq = scale_variable(f, alpha);
      const Matrix<double> H = assemble(hessian_at_zero(f).op);
      const Matrix<double> HQ = assemble(hessian_at_zero(fq).op);
      const double err = max_abs(H - HQ) / std::max(1.0, max_abs(H));
      if (err > worst_hessian) {
        worst_hessian = err;
        worst_name = name;
      }
    }
  }
  // evaluate-level identity f_Q(Psi) = f(sqrt(alpha) Psi) / alpha on random probes
  for (int probe = 0; probe < 100; ++probe) {
    const auto& f = suite[static_cast<std::size_t>(probe) % suite.size()].second;
    const double alpha = std::pow(10.0, -4.0 * std::uniform_real_distribution<double>(0, 1)(rng));
    const auto Psi = PhaseVector<double>::from_coords(gaussian_vector<double>(rng, 2 * n));
    const double lhs = evaluate(scale_variable(f, alpha), Psi);
    const double rhs = evaluate(f, PhaseVector<double>::from_coords(std::sqrt(alpha) * Psi.coords())) / alpha;
    worst_eval = std::max(worst_eval, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return {worst_hessian <= 1e-8 && worst_eval <= 1e-13,
          "10 variables, max Hessian mismatch " + fmt(worst_hessian) + " (" + worst_name + "), max evaluate mismatch " +
              fmt(worst_eval) + " on 100 probes"};
}

Result linear_flows() {
  double worst = 0, worst_norm = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng = make_rng(505, static_cast<std::uint64_t>(trial));
    const auto H = random_symplectic_operator<double>(rng, 8);
    const auto v = random_unit_phase_vector<double>(rng, 8);
    const LinearFlow<double> flow(H);
    for (int k = 0; k <= 20; ++k) {
      const double t = 0.5 * k;
      const ComplexVector<double> a = flow(to_complex(v), t);
      const ComplexVector<double> b = to_complex(evolve_real_flow(H, v, t));
      worst = std::max(worst, max_abs(a - b));
      worst_norm = std::max({worst_norm, std::abs(a.squaredNorm() - 1.0), std::abs(b.squaredNorm() - 1.0)});
    }
  }
  return {worst <= 1e-10 && worst_norm <= 1e-12,
          "5 Hamiltonians, 21 times in [0, 10]: max flow difference " + fmt(worst) + ", norm drift " + fmt(worst_norm)};
}

Result run_preset(const std::string& preset, const std::function<Result(const json&, const json&, double)>& judge) {
  json c = cli::preset(preset);
  c["output_dir"] = scratch(preset).string();
  const auto t0 = Clock::now();
  const cli::Outcome o = cli::run_command("evolve", c);
  const double elapsed = seconds_since(t0);
  return judge(o.report, c, elapsed);
}

Result plane_wave_dispersion() {
  return run_preset("plane-wave", [](const json& r, const json& c, double dt) {
    const json& ref = r.at("reference");
    const double rel = ref.at("relative_phase_error").get<double>();
    const double frequency = ref.at("frequency").get<double>();
    // 512 points, k = 1, A = 1, coupling 1: w = 1/2 + 1
    const bool ok = rel <= 1e-6 && std::abs(frequency - 1.5) <= 1e-15 && dt < 60 &&
                    c.at("grid").at("points") == 512 && r.at("dt") == 1e-3 && r.at("steps") == 10000;
    return Result{ok, "relative phase error " + fmt(rel) + " (absolute " + fmt(ref.at("phase_error").get<double>()) +
                          "), w = " + format_number(frequency) + ", " + fmt(dt) + " s"};
  });
}

Result gausson_stationarity() {
  Result shape = run_preset("gausson", [](const json& r, const json& c, double dt) {
    const double err = r.at("reference").at("relative_l2_error").get<double>();
    return Result{err <= 1e-3 && c.at("grid").at("points") == 512,
                  "one period: relative L2 error " + fmt(err) + " in " + fmt(dt) + " s"};
  });
  // gradient vs energy finite differences, away from the log floor
  const PhaseSpace s = PhaseSpace::grid(1, 512, 16.0);
  const auto H = Hamiltonian<double>(make_log_nls<double>(grid_linear<double>(s), -1.0, 1.0));
  Rng rng = make_rng(707);
  SpectralGrid<double> grid(s);
  ComplexVector<double> psi(s.n());
  for (Index i = 0; i < s.n(); ++i)
    psi(i) = std::exp(-0.5 * std::pow(grid.coordinate(i, 0), 2)) + Complex(0.3, 0.1 * std::sin(grid.coordinate(i, 0)));
  const ComplexVector<double> g = gradient(H, psi);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    ComplexVector<double> eta(s.n());
    eta.real() = gaussian_vector<double>(rng, s.n());
    eta.imag() = gaussian_vector<double>(rng, s.n());
    eta *= 0.1 * psi.norm() / eta.norm();
    const double h = 1e-4;
    const double fd = (energy(H, ComplexVector<double>(psi + h * eta)) - energy(H, ComplexVector<double>(psi - h * eta))) / (2 * h);
    const double an = field_inner(H, g, eta);
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  return {shape.passed && worst <= 1e-6, shape.detail + "; gradient/energy mismatch " + fmt(worst)};
}

Result bilinear_modes() {
  const Index n = 6;
  Vector<double> w(n);
  w << 0.15, 0.35, 0.55, 0.75, 0.95, 1.15;
  const double coupling = 0.6;
  const auto I = SymplecticOperator<double>::identity(n);
  const BilinearHamiltonian<double> H{SymplecticOperator<double>::diagonal(w), coupling, I, I};
  Rng rng = make_rng(808);
  ComplexVector<double> psi0(n);
  psi0.real() = gaussian_vector<double>(rng, n);
  psi0.imag() = gaussian_vector<double>(rng, n);
  psi0 *= 0.8 / psi0.norm();
  const long steps = 1000;
  const double dt = 1e-3;
  const auto traj = evolve_bilinear(H, psi0, dt, steps);
  const double shift = coupling * psi0.squaredNorm();
  double amp = 0, phase = 0;
  for (std::size_t f = 0; f < traj.times.size(); ++f) {
    const double t = traj.times[f];
    for (Index k = 0; k < n; ++k) {
      amp = std::max(amp, std::abs(std::abs(traj.states[f](k)) - std::abs(psi0(k))));
      const Complex expected = psi0(k) * std::polar(1.0, -(w(k) + shift) * t);
      phase = std::max(phase, std::abs(std::arg(traj.states[f](k) / expected)));
    }
  }
  return {amp <= 1e-8 && phase <= 1e-6,
          "1000 midpoint steps: amplitude drift " + fmt(amp) + ", phase error " + fmt(phase)};
}

Result general_f_matches_cubic() {
  const PhaseSpace s = PhaseSpace::grid(1, 256, 20.0);
  const auto lin = grid_linear<double>(s, Vector<double>::LinSpaced(s.n(), -0.5, 0.5).array().square().matrix(), 0.5);
  SpectralGrid<double> grid(s);
  ComplexVector<double> psi0(s.n());
  for (Index i = 0; i < s.n(); ++i) {
    const double x = grid.coordinate(i, 0);
    psi0(i) = std::polar(1.2 * std::exp(-x * x / 4), 0.7 * x);
  }
  const double c = 0.9;
  const auto a = evolve_splitstep<double>(CubicNLS<double>{lin, c}, psi0, 1e-3, 1000);
  const auto b = evolve_splitstep<double>(GeneralF<double>{lin, Nonlinearity<double>::linear(c)}, psi0, 1e-3, 1000);
  double worst = 0;
  for (std::size_t f = 0; f < a.states.size(); ++f) worst = std::max(worst, max_abs(a.states[f] - b.states[f]));
  return {worst <= 1e-10, "1000 split steps on 256 points: max pointwise difference " + fmt(worst)};
}

Result alpha_bound_and_units(const std::string& binary) {
  std::string printed;
  if (!binary.empty()) {
    const std::string cmd = "'" + binary + "' alpha-bound --b-ev 1e-15 2>/dev/null";
    if (FILE* p = ::popen(cmd.c_str(), "r")) {
      char buf[256];
      while (std::fgets(buf, sizeof(buf), p)) printed += buf;
      if (::pclose(p) != 0) printed += "<nonzero exit>";
    }
  } else {
    std::ostringstream out, err;
    cli::run_alpha_bound(1e-15, out, err);
    printed = out.str();
  }
  int checked = 0;
  std::string failed;
  for (const auto& H : units::physical_presets<double>()) {
    try {
      units::dimension_check(H);
      ++checked;
    } catch (const Error& e) {
      failed += " " + H.name;
    }
  }
  std::string shown = printed;
  while (!shown.empty() && shown.back() == '\n') shown.pop_back();
  return {printed == "alpha_upper_bound_eV=1e-15\n" && failed.empty() && checked > 0,
          "printed '" + shown + "'; dimension_check passed for " + std::to_string(checked) + " presets" +
              (failed.empty() ? "" : ", failed:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"trace formula", trace_formula},
      {"quartic remainder is O(alpha^2)", quartic_asymptotics},
      {"state dequantization round trip", state_round_trip},
      {"Hessian invariance under alpha scaling", scaling_invariance},
      {"complex and real linear flows agree", linear_flows},
      {"cubic NLS plane-wave dispersion", plane_wave_dispersion},
      {"log NLS Gausson", gausson_stationarity},
      {"bilinear mode phases", bilinear_modes},
      {"GeneralF with linear F equals cubic NLS", general_f_matches_cubic},
      {"alpha bound and dimensional analysis", [&] { return alpha_bound_and_units(binary); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.passed) ++failures;
    std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " -- "
              << r.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
