#include "cli.hpp"
#include "schema.hpp"

#include "pcsft/serialization.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace pcsft::cli {

namespace {

struct EvolveConfig {
  Common common;
  json hamiltonian;
  json grid;  // null for abstract kinds
  json initial;
  double dt = 0;
  json t_end;
  int sample_stride = 1;
  std::string integrator = "auto";
  std::optional<double> norm_tolerance, energy_tolerance;
  std::optional<double> reference_tolerance;
  double blowup_factor = 10;
  bool snapshots = false;
};

EvolveConfig parse(const json& config) {
  Fields f(config, "evolve");
  EvolveConfig c;
  c.common = read_common(f);
  c.hamiltonian = f.raw("hamiltonian");
  if (!c.hamiltonian.is_object() || !c.hamiltonian.contains("kind")) f.fail("hamiltonian needs a 'kind'");
  if (f.has("grid")) c.grid = f.raw("grid");
  c.initial = f.raw("initial");
  c.dt = f.positive("dt");
  c.t_end = f.raw("t_end");
  if (!(c.t_end.is_number() && c.t_end.get<double>() >= 0) && c.t_end != "period")
    f.fail("t_end must be a non-negative number or \"period\"");
  c.sample_stride = static_cast<int>(f.at_least("sample_stride", 1, 1));
  c.integrator = f.get<std::string>("integrator", "auto");
  if (c.integrator != "auto" && c.integrator != "split-step" && c.integrator != "midpoint")
    f.fail("integrator must be auto, split-step or midpoint");
  if (f.has("tolerances")) {
    Fields t(f.raw("tolerances"), "evolve.tolerances");
    if (t.has("norm")) c.norm_tolerance = t.positive("norm");
    if (t.has("energy")) c.energy_tolerance = t.positive("energy");
    t.finish();
  }
  if (f.has("reference_tolerance")) c.reference_tolerance = f.positive("reference_tolerance");
  c.blowup_factor = f.positive("blowup_factor", 10.0);
  c.snapshots = f.get<bool>("snapshots", false);
  f.finish();
  return c;
}

template <typename Scalar>
Vector<Scalar> read_real_vector(const json& j, Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) throw ConfigError(what + " must hold " + std::to_string(n) + " numbers");
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(j.at(static_cast<std::size_t>(i)).get<double>());
  return v;
}

template <typename Scalar>
struct Setup {
  Hamiltonian<Scalar> H;
  PhaseSpace space = PhaseSpace::abstract(1);
  Scalar kinetic = 0;
  Scalar v0 = 0;
  bool uniform_potential = true;
};

template <typename Scalar>
Setup<Scalar> build_hamiltonian(const EvolveConfig& c) {
  Fields h(c.hamiltonian, "hamiltonian");
  const std::string kind = h.require<std::string>("kind");
  Setup<Scalar> s;
  const bool grid_kind = kind == "cubic-nls" || kind == "log-nls" ||
                         (kind == "general-f" && !c.hamiltonian.contains("n"));
  if (grid_kind) {
    if (c.grid.is_null()) throw ConfigError("hamiltonian '" + kind + "' needs a grid");
    Fields g(c.grid, "grid");
    const int d = static_cast<int>(g.at_least("dimension", 1));
    const int points = static_cast<int>(g.at_least("points", 2));
    const double L = g.positive("box_length");
    g.finish();
    s.space = PhaseSpace::grid(d, points, L);
    s.kinetic = static_cast<Scalar>(h.get<double>("kinetic", 0.5));
    Vector<Scalar> V = Vector<Scalar>::Zero(s.space.n());
    if (h.has("potential")) {
      const json& p = h.raw("potential");
      if (p.is_number()) {
        s.v0 = static_cast<Scalar>(p.get<double>());
        V.setConstant(s.v0);
      } else {
        V = read_real_vector<Scalar>(p, s.space.n(), "potential");
        s.uniform_potential = false;
      }
    }
    GridLinear<Scalar> lin = grid_linear<Scalar>(s.space, V, s.kinetic);
    if (kind == "cubic-nls") {
      s.H = CubicNLS<Scalar>{lin, static_cast<Scalar>(h.require<double>("coupling"))};
    } else if (kind == "log-nls") {
      const double a = h.positive("a", 1.0);
      s.H = make_log_nls<Scalar>(lin, static_cast<Scalar>(h.require<double>("b")), static_cast<Scalar>(a));
    } else {
      s.H = GeneralF<Scalar>{lin, [&] {
        Fields F(h.raw("F"), "hamiltonian.F");
        Nonlinearity<Scalar> nl;
        if (F.has("linear")) {
          nl = Nonlinearity<Scalar>::linear(static_cast<Scalar>(F.require<double>("linear")));
        } else {
          Fields t(F.raw("table"), "hamiltonian.F.table");
          auto nodes = t.require<std::vector<double>>("nodes");
          auto values = t.require<std::vector<double>>("values");
          t.finish();
          nl = Nonlinearity<Scalar>::table(std::vector<Scalar>(nodes.begin(), nodes.end()),
                                           std::vector<Scalar>(values.begin(), values.end()));
        }
        F.finish();
        return nl;
      }()};
    }
  } else {
    if (!c.grid.is_null()) throw ConfigError("hamiltonian '" + kind + "' is defined on an abstract basis; drop 'grid'");
    const Index n = h.at_least("n", 1);
    s.space = PhaseSpace::abstract(n);
    const auto lin = operator_from_json<Scalar>(h.raw("linear"), n);
    if (kind == "quadratic") {
      s.H = QuadraticHamiltonian<Scalar>{lin};
    } else if (kind == "bilinear") {
      s.H = BilinearHamiltonian<Scalar>{lin, static_cast<Scalar>(h.require<double>("coupling")),
                                        operator_from_json<Scalar>(h.raw("gamma1"), n),
                                        operator_from_json<Scalar>(h.raw("gamma2"), n)};
    } else if (kind == "general-f") {
      Fields F(h.raw("F"), "hamiltonian.F");
      const auto nl = Nonlinearity<Scalar>::linear(static_cast<Scalar>(F.require<double>("linear")));
      F.finish();
      s.H = GeneralF<Scalar>{lin, nl};
    } else {
      throw ConfigError("unknown hamiltonian kind '" + kind + "'");
    }
  }
  h.finish();
  return s;
}

/// Closed-form reference trajectory, when the initial state admits one.
template <typename Scalar>
struct Reference {
  std::string kind;
  Scalar frequency = 0;                   // plane wave / gausson: Psi(t) = Psi0 e^{-i w t}
  Vector<Scalar> mode_frequencies;        // bilinear: per-mode rotation rates
};

template <typename Scalar>
ComplexVector<Scalar> build_initial(const EvolveConfig& c, const Setup<Scalar>& s, std::optional<Reference<Scalar>>& ref,
                                    std::optional<Gausson<Scalar>>& gausson) {
  Fields f(c.initial, "initial");
  const std::string type = f.require<std::string>("type");
  ComplexVector<Scalar> psi;
  const auto need_grid = [&] {
    if (!s.space.is_grid()) throw ConfigError("initial '" + type + "' needs a grid Hamiltonian");
  };
  if (type == "plane-wave") {
    need_grid();
    const auto A = static_cast<Scalar>(f.get<double>("amplitude", 1.0));
    const int mode = f.get<int>("mode", 1);
    psi = plane_wave<Scalar>(SpectralGrid<Scalar>(s.space), A, mode);
    if (const auto* cubic = std::get_if<CubicNLS<Scalar>>(&s.H); cubic && s.uniform_potential) {
      const Scalar k = Scalar(2 * std::numbers::pi * mode / s.space.grid().box_length);
      ref = Reference<Scalar>{"plane-wave", plane_wave_frequency(s.kinetic, k, A, cubic->coupling, s.v0), {}};
    }
  } else if (type == "gaussian") {
    need_grid();
    const auto A = static_cast<Scalar>(f.get<double>("amplitude", 1.0));
    const auto width = static_cast<Scalar>(f.positive("width", 1.0));
    const auto k0 = static_cast<Scalar>(f.get<double>("momentum", 0.0));
    SpectralGrid<Scalar> grid(s.space);
    psi.resize(s.space.n());
    for (Index i = 0; i < psi.size(); ++i) {
      Scalar r2 = 0;
      for (int a = 0; a < s.space.grid().dimension; ++a) r2 += grid.coordinate(i, a) * grid.coordinate(i, a);
      psi(i) = std::polar(A * std::exp(-r2 / (2 * width * width)), k0 * grid.coordinate(i, 0));
    }
  } else if (type == "gausson") {
    need_grid();
    const auto* log = std::get_if<LogNLS<Scalar>>(&s.H);
    if (!log) throw ConfigError("initial 'gausson' needs a log-nls Hamiltonian");
    if (!s.uniform_potential || s.v0 != 0) throw ConfigError("initial 'gausson' needs a zero potential");
    const auto A = static_cast<Scalar>(f.get<double>("amplitude", 1.0));
    gausson = gausson_parameters(log->b, log->log_scale, A, s.space.grid().dimension, s.kinetic);
    psi = gausson_profile(SpectralGrid<Scalar>(s.space), *gausson);
    ref = Reference<Scalar>{"gausson", gausson->frequency, {}};
  } else if (type == "file") {
    const auto path = f.require<std::string>("path");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read initial field '" + path + "'");
    auto snaps = read_snapshots<Scalar>(in);
    if (snaps.frames.empty()) throw ConfigError("snapshot file has no frames");
    psi = snaps.frames.back();
    if (psi.size() != s.space.n()) throw ConfigError("snapshot field does not match the Hamiltonian");
  } else if (type == "vector") {
    const Index n = s.space.n();
    psi.resize(n);
    psi.real() = read_real_vector<Scalar>(f.raw("re"), n, "initial.re");
    psi.imag() = f.has("im") ? read_real_vector<Scalar>(f.raw("im"), n, "initial.im") : Vector<Scalar>::Zero(n);
  } else if (type == "random") {
    Rng rng = make_rng(f.require<std::uint64_t>("seed"), 0x0e);
    psi = to_complex(random_unit_phase_vector<Scalar>(rng, s.space.n()));
    psi *= static_cast<Scalar>(f.positive("norm", 1.0));
  } else {
    throw ConfigError("unknown initial type '" + type + "'");
  }
  f.finish();

  if (const auto* bl = std::get_if<BilinearHamiltonian<Scalar>>(&s.H)) {
    const Index n = bl->linear.n();
    const Matrix<Scalar> I = Matrix<Scalar>::Identity(n, n);
    const bool closed_form = bl->linear.T().isZero(0) && bl->linear.R().isDiagonal(0) &&
                             bl->gamma1.R() == I && bl->gamma1.T().isZero(0) && bl->gamma2.R() == I &&
                             bl->gamma2.T().isZero(0);
    if (closed_form) {
      const Scalar shift = bl->coupling * psi.squaredNorm();
      ref = Reference<Scalar>{"bilinear-modes", 0, bl->linear.R().diagonal().array() + shift};
    }
  }
  return psi;
}

template <typename Scalar>
json compare_reference(const Reference<Scalar>& ref, const PhaseSpace& space, const ComplexVector<Scalar>& psi0,
                       const ComplexVector<Scalar>& psi, Scalar t) {
  json out = {{"kind", ref.kind}};
  if (ref.kind == "bilinear-modes") {
    Scalar amp = 0, phase = 0;
    for (Index k = 0; k < psi.size(); ++k) {
      amp = std::max(amp, std::abs(std::abs(psi(k)) - std::abs(psi0(k))));
      const std::complex<Scalar> exact = psi0(k) * std::polar(Scalar(1), -ref.mode_frequencies(k) * t);
      if (std::abs(psi0(k)) > 0) phase = std::max(phase, std::abs(std::arg(psi(k) / exact)));
    }
    out["amplitude_error"] = amp;
    out["phase_error"] = phase;
    out["error"] = std::max(amp, phase);
    return out;
  }
  const ComplexVector<Scalar> exact = psi0 * std::polar(Scalar(1), -ref.frequency * t);
  const Scalar w = Scalar(space.cell_volume());
  const Scalar l2 = std::sqrt(w * (psi - exact).squaredNorm()) / std::sqrt(w * exact.squaredNorm());
  out["frequency"] = ref.frequency;
  out["relative_l2_error"] = l2;
  if (ref.kind == "plane-wave") {
    Scalar phase = 0;
    for (Index i = 0; i < psi.size(); ++i) phase = std::max(phase, std::abs(std::arg(psi(i) / exact(i))));
    out["phase_error"] = phase;
    out["relative_phase_error"] = phase / std::max(std::abs(ref.frequency * t), std::numeric_limits<Scalar>::min());
    out["error"] = phase;
  } else {
    out["period"] = Scalar(2 * std::numbers::pi) / std::abs(ref.frequency);
    out["error"] = l2;
  }
  return out;
}

template <typename Scalar>
Outcome run(const EvolveConfig& c) {
  const Setup<Scalar> s = build_hamiltonian<Scalar>(c);
  std::optional<Reference<Scalar>> ref;
  std::optional<Gausson<Scalar>> gausson;
  const ComplexVector<Scalar> psi0 = build_initial<Scalar>(c, s, ref, gausson);

  double t_end;
  if (c.t_end.is_string()) {
    if (!ref || ref->kind == "bilinear-modes") throw ConfigError("t_end \"period\" needs a plane-wave or gausson initial state");
    t_end = 2 * std::numbers::pi / std::abs(double(ref->frequency));
  } else {
    t_end = c.t_end.get<double>();
  }
  const long steps = std::lround(t_end / c.dt);
  if (steps < 1) throw ConfigError("t_end / dt must give at least one step");

  std::string integrator = c.integrator;
  const bool grid_local = s.space.is_grid();
  if (integrator == "auto") integrator = grid_local ? "split-step" : "midpoint";
  if (integrator == "split-step" && !grid_local) throw ConfigError("split-step needs a grid Hamiltonian");

  constexpr bool single = std::is_same_v<Scalar, float>;
  const double norm_tol = c.norm_tolerance.value_or(single ? 1e-4 : 1e-8);
  const double energy_tol = c.energy_tolerance.value_or(single ? 1e-3 : 1e-6);

  EvolveOptions opts;
  opts.sample_stride = c.sample_stride;
  opts.keep_states = c.snapshots;
  opts.blowup_factor = c.blowup_factor;
  const Scalar dt = static_cast<Scalar>(c.dt);
  Trajectory<Scalar> traj;
  ComplexVector<Scalar> last;
  {
    // final state is always needed for the reference comparison
    EvolveOptions o = opts;
    o.keep_states = true;
    o.sample_stride = c.sample_stride;
    traj = integrator == "split-step" ? evolve_splitstep(s.H, psi0, dt, steps, o) : evolve_midpoint(s.H, psi0, dt, steps, o);
    last = traj.states.back();
    if (!c.snapshots) traj.states.clear();
  }

  Outcome out;
  const double norm_drift = traj.max_relative_norm_drift();
  const double energy_drift = traj.max_relative_energy_drift();
  bool passed = norm_drift <= norm_tol && energy_drift <= energy_tol;
  json rep = {{"kind", kind_name(s.H.index())},
              {"integrator", integrator},
              {"dt", c.dt},
              {"steps", steps},
              {"final_time", double(traj.times.back())},
              {"max_relative_norm_drift", norm_drift},
              {"max_relative_energy_drift", energy_drift},
              {"tolerances", {{"norm", norm_tol}, {"energy", energy_tol}}},
              {"precision", c.common.precision}};
  if (ref) {
    json r = compare_reference(*ref, s.space, psi0, last, traj.times.back());
    if (c.reference_tolerance) {
      r["tolerance"] = *c.reference_tolerance;
      r["passed"] = r["error"].get<double>() <= *c.reference_tolerance;
      passed = passed && r["passed"].get<bool>();
    }
    rep["reference"] = std::move(r);
  } else if (c.reference_tolerance) {
    throw ConfigError("reference_tolerance given but the setup has no closed-form reference");
  }
  rep["passed"] = passed;
  out.report = rep;
  out.exit_code = passed ? exit_pass : exit_numerical;
  out.message = passed ? "drift within tolerance" : "drift or reference error beyond tolerance";

  const std::filesystem::path dir(c.common.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "trajectory.csv");
  write_csv(csv, traj);
  std::ofstream repf(dir / "report.json");
  repf << rep.dump(2) << '\n';
  if (c.snapshots) {
    std::ofstream snap(dir / "snapshots.bin", std::ios::binary);
    write_snapshots(snap, s.space, traj, static_cast<std::uint32_t>(c.sample_stride));
  }
  return out;
}

}  // namespace

Outcome run_evolve(const json& config) {
  const EvolveConfig c = parse(config);
  return c.common.precision == "f32" ? run<float>(c) : run<double>(c);
}

}  // namespace pcsft::cli
