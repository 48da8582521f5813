#ifndef PCSFT_DYNAMICS_HPP
#define PCSFT_DYNAMICS_HPP

// Hamilton-Schroedinger dynamics  i dPsi/dt = H'(Psi).
//
// Gradient convention: H'(Psi) = 2 dH/d(conj Psi), i.e. the real gradient
// (dH/dq, dH/dp) read as the complex vector dH/dq + i dH/dp. With it the
// quadratic function 1/2 (H psi, psi) gives i dPsi/dt = H Psi and the real
// Hamilton equations dq/dt = dH/dp, dp/dt = -dH/dq are reproduced.
//
// On grids the phase space carries the quadrature inner product
//   (u, v)_w = w sum_x Re(conj u_x v_x),   w = cell volume,
// and H' is the gradient with respect to it. Grid kinetic terms are
// spectral: the operator -kinetic * Laplacian with energy
// (kinetic / 2) integral |grad Psi|^2.

#include "pcsft/phase_space.hpp"
#include "pcsft/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace pcsft {

/// -kinetic * Laplacian + V on a periodic grid.
template <typename Scalar>
struct GridLinear {
  PhaseSpace space;
  Vector<Scalar> potential;
  Scalar kinetic = Scalar(0.5);
};

template <typename Scalar>
GridLinear<Scalar> grid_linear(const PhaseSpace& space, std::optional<Vector<Scalar>> potential = std::nullopt,
                               Scalar kinetic = Scalar(0.5)) {
  if (!space.is_grid()) throw DomainError("grid Hamiltonians need a spatial grid");
  Vector<Scalar> v = potential.value_or(Vector<Scalar>::Zero(space.n()));
  if (v.size() != space.n()) throw DimensionError("potential size does not match the grid");
  return {space, std::move(v), kinetic};
}

/// Local nonlinearity F(|Psi|^2) with G(s) = int_0^s F(q) dq.
template <typename Scalar>
struct Nonlinearity {
  std::function<Scalar(Scalar)> F;
  std::function<Scalar(Scalar)> antiderivative;  // optional; quadrature otherwise

  static Nonlinearity linear(Scalar c) {
    return {[c](Scalar s) { return c * s; }, [c](Scalar s) { return c * s * s / 2; }};
  }

  /// Piecewise-linear interpolation of sampled values (constant extrapolation).
  static Nonlinearity table(std::vector<Scalar> nodes, std::vector<Scalar> values) {
    if (nodes.size() < 2 || nodes.size() != values.size()) throw DomainError("table needs >= 2 matching samples");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1])) throw DomainError("table nodes must increase");
    if (nodes.front() > 0) throw DomainError("table must cover s = 0");
    auto F = [nodes, values](Scalar s) {
      if (s <= nodes.front()) return values.front();
      if (s >= nodes.back()) return values.back();
      auto it = std::upper_bound(nodes.begin(), nodes.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
      const Scalar t = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
      return values[i] + t * (values[i + 1] - values[i]);
    };
    // exact integral of the interpolant from 0
    auto G = [nodes, values, F](Scalar s) {
      auto integrate = [&](Scalar a, Scalar b) { return (b - a) * (F(a) + F(b)) / 2; };
      Scalar lo = std::min<Scalar>(0, s), hi = std::max<Scalar>(0, s);
      Scalar sum = 0, x = lo;
      for (Scalar node : nodes) {
        if (node > x && node < hi) {
          sum += integrate(x, node);
          x = node;
        }
      }
      sum += integrate(x, hi);
      return s >= 0 ? sum : -sum;
    };
    return {F, G};
  }

  /// G(s); composite 5-point Gauss-Legendre on 16 panels when no antiderivative is given.
  Scalar integral(Scalar s) const {
    if (antiderivative) return antiderivative(s);
    static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                             0.9061798459386640};
    static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                             0.2369268850561891, 0.2369268850561891};
    constexpr int panels = 16;
    const Scalar h = s / panels;
    Scalar sum = 0;
    for (int p = 0; p < panels; ++p) {
      const Scalar mid = h * (Scalar(p) + Scalar(0.5));
      for (std::size_t k = 0; k < 5; ++k) sum += Scalar(w[k]) * F(mid + h / 2 * Scalar(x[k]));
    }
    return sum * h / 2;
  }
};

// ---------------------------------------------------------------------------
// Hamiltonian family

/// 1/2 (H psi, psi).
template <typename Scalar>
struct QuadraticHamiltonian {
  SymplecticOperator<Scalar> op;
};

/// 1/2 (H Psi, Psi) + (coupling / 4) int |Psi|^4 with H = -kinetic Laplacian + V.
template <typename Scalar>
struct CubicNLS {
  GridLinear<Scalar> linear;
  Scalar coupling = 0;
};

/// 1/2 (H Psi, Psi) + (coupling / 4) (G1 Psi, Psi)(G2 Psi, Psi).
template <typename Scalar>
struct BilinearHamiltonian {
  SymplecticOperator<Scalar> linear;
  Scalar coupling = 0;
  SymplecticOperator<Scalar> gamma1;
  SymplecticOperator<Scalar> gamma2;
};

/// 1/2 (H Psi, Psi) + (b / 2) int |Psi|^2 (ln(c |Psi|^2) - 1), c = a^d.
/// The logarithm is floored at log_floor; the energy density is continued so
/// that it stays the exact antiderivative of the floored gradient.
template <typename Scalar>
struct LogNLS {
  GridLinear<Scalar> linear;
  Scalar b = 0;
  Scalar log_scale = 1;  // c = a^d
  static constexpr double log_floor = 1e-30;
};

/// 1/2 (H Psi, Psi) + 1/2 int G(|Psi|^2), G' = F.
template <typename Scalar>
struct GeneralF {
  std::variant<SymplecticOperator<Scalar>, GridLinear<Scalar>> linear;
  Nonlinearity<Scalar> nonlinearity;
};

template <typename Scalar>
using Hamiltonian = std::variant<QuadraticHamiltonian<Scalar>, CubicNLS<Scalar>, BilinearHamiltonian<Scalar>,
                                 LogNLS<Scalar>, GeneralF<Scalar>>;

template <typename Scalar>
LogNLS<Scalar> make_log_nls(GridLinear<Scalar> linear, Scalar b, Scalar a) {
  if (!(a > 0)) throw DomainError("log scale a must be positive");
  const int d = linear.space.grid().dimension;
  return {std::move(linear), b, static_cast<Scalar>(std::pow(a, d))};
}

inline const char* kind_name(std::size_t index) {
  static constexpr const char* names[] = {"quadratic", "cubic-nls", "bilinear", "log-nls", "general-f"};
  return names[index];
}

template <typename Scalar>
PhaseSpace hamiltonian_space(const Hamiltonian<Scalar>& H) {
  return std::visit(
      [](const auto& h) -> PhaseSpace {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, QuadraticHamiltonian<Scalar>>) {
          return PhaseSpace::abstract(h.op.n());
        } else if constexpr (std::is_same_v<T, BilinearHamiltonian<Scalar>>) {
          return PhaseSpace::abstract(h.linear.n());
        } else if constexpr (std::is_same_v<T, GeneralF<Scalar>>) {
          if (auto* g = std::get_if<GridLinear<Scalar>>(&h.linear)) return g->space;
          return PhaseSpace::abstract(std::get<SymplecticOperator<Scalar>>(h.linear).n());
        } else {
          return h.linear.space;
        }
      },
      H);
}

// ---------------------------------------------------------------------------

namespace detail {

/// Precomputed pieces of a Hamiltonian: complex matrices, FFT plans, weights.
template <typename Scalar>
class HamiltonianEvaluator {
 public:
  using Field = ComplexVector<Scalar>;
  using Complex = std::complex<Scalar>;

  explicit HamiltonianEvaluator(const Hamiltonian<Scalar>& H) : H_(H), space_(hamiltonian_space(H)) {
    std::visit(
        [this](const auto& h) {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, QuadraticHamiltonian<Scalar>>) {
            dense_ = to_complex_operator(h.op).matrix();
          } else if constexpr (std::is_same_v<T, BilinearHamiltonian<Scalar>>) {
            dense_ = to_complex_operator(h.linear).matrix();
            gamma1_ = to_complex_operator(h.gamma1).matrix();
            gamma2_ = to_complex_operator(h.gamma2).matrix();
          } else if constexpr (std::is_same_v<T, GeneralF<Scalar>>) {
            if (auto* g = std::get_if<GridLinear<Scalar>>(&h.linear)) {
              set_grid(*g);
            } else {
              dense_ = to_complex_operator(std::get<SymplecticOperator<Scalar>>(h.linear)).matrix();
            }
          } else {
            set_grid(h.linear);
          }
        },
        H_);
  }

  const PhaseSpace& space() const { return space_; }
  Scalar weight() const { return Scalar(space_.cell_volume()); }
  bool on_grid() const { return grid_.has_value(); }
  const SpectralGrid<Scalar>& spectral() const { return *grid_; }
  const GridLinear<Scalar>& grid_linear() const { return *linear_; }

  Scalar norm2(const Field& psi) const { return weight() * psi.squaredNorm(); }

  Field linear_apply(const Field& psi) const {
    if (on_grid()) {
      Field out = grid_->apply_symbol(psi, linear_->kinetic * grid_->k_squared());
      out.array() += linear_->potential.array().template cast<Complex>() * psi.array();
      return out;
    }
    return dense_ * psi;
  }

  Scalar linear_energy(const Field& psi) const {
    if (on_grid()) {
      const Field F = grid_->forward(psi);
      const Scalar kin = linear_->kinetic / 2 * weight() / Scalar(psi.size()) *
                         grid_->k_squared().dot(F.cwiseAbs2());
      const Scalar pot = weight() / 2 * linear_->potential.dot(psi.cwiseAbs2());
      return kin + pot;
    }
    return (psi.dot(dense_ * psi)).real() / 2;
  }

  /// Local phase rate N(rho) for kinds with a local nonlinearity (0 otherwise).
  Vector<Scalar> local_rate(const Vector<Scalar>& rho) const {
    return std::visit(
        [&rho](const auto& h) -> Vector<Scalar> {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, CubicNLS<Scalar>>) {
            return h.coupling * rho;
          } else if constexpr (std::is_same_v<T, LogNLS<Scalar>>) {
            const Scalar floor = Scalar(LogNLS<Scalar>::log_floor);
            return h.b * (h.log_scale * rho).array().max(floor).log().matrix();
          } else if constexpr (std::is_same_v<T, GeneralF<Scalar>>) {
            return rho.unaryExpr(h.nonlinearity.F);
          } else {
            return Vector<Scalar>::Zero(rho.size());
          }
        },
        H_);
  }

  /// Sum over sites of the local energy density (unweighted).
  Scalar local_energy_sum(const Vector<Scalar>& rho) const {
    return std::visit(
        [&rho](const auto& h) -> Scalar {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, CubicNLS<Scalar>>) {
            return h.coupling / 4 * rho.squaredNorm();
          } else if constexpr (std::is_same_v<T, LogNLS<Scalar>>) {
            const Scalar floor = Scalar(LogNLS<Scalar>::log_floor);
            const Scalar rho0 = floor / h.log_scale;
            Scalar sum = 0;
            for (Index i = 0; i < rho.size(); ++i) {
              const Scalar r = rho(i);
              sum += r >= rho0 ? r * (std::log(h.log_scale * r) - 1) + rho0 : r * std::log(floor);
            }
            return h.b / 2 * sum;
          } else if constexpr (std::is_same_v<T, GeneralF<Scalar>>) {
            Scalar sum = 0;
            for (Index i = 0; i < rho.size(); ++i) sum += h.nonlinearity.integral(rho(i));
            return sum / 2;
          } else {
            return Scalar(0);
          }
        },
        H_);
  }

  Field gradient(const Field& psi) const {
    check_size(psi);
    Field out = linear_apply(psi);
    if (const auto* h = std::get_if<BilinearHamiltonian<Scalar>>(&H_)) {
      const Field g1 = gamma1_ * psi;
      const Field g2 = gamma2_ * psi;
      const Scalar f1 = psi.dot(g1).real();
      const Scalar f2 = psi.dot(g2).real();
      out += (h->coupling / 2) * (f1 * g2 + f2 * g1);
    } else {
      const Vector<Scalar> rate = local_rate(psi.cwiseAbs2());
      out.array() += rate.array().template cast<Complex>() * psi.array();
    }
    if (psi.allFinite() && !out.allFinite()) throw NumericalFailure("gradient produced non-finite values");
    return out;
  }

  Scalar energy(const Field& psi) const {
    check_size(psi);
    Scalar e = linear_energy(psi);
    if (const auto* h = std::get_if<BilinearHamiltonian<Scalar>>(&H_)) {
      e += h->coupling / 4 * psi.dot(gamma1_ * psi).real() * psi.dot(gamma2_ * psi).real();
    } else {
      e += weight() * local_energy_sum(psi.cwiseAbs2());
    }
    return e;
  }

 private:
  void set_grid(const GridLinear<Scalar>& g) {
    if (g.potential.size() != g.space.n()) throw DimensionError("potential size does not match the grid");
    grid_.emplace(g.space);
    linear_ = &g;
  }
  void check_size(const Field& psi) const {
    if (psi.size() != space_.n()) throw DimensionError("field size does not match the Hamiltonian");
  }

  const Hamiltonian<Scalar>& H_;
  PhaseSpace space_;
  ComplexMatrix<Scalar> dense_, gamma1_, gamma2_;
  std::optional<SpectralGrid<Scalar>> grid_;
  const GridLinear<Scalar>* linear_ = nullptr;
};

}  // namespace detail

/// H'(Psi) = 2 dH/d(conj Psi).
template <typename Scalar>
ComplexVector<Scalar> gradient(const Hamiltonian<Scalar>& H, const ComplexVector<Scalar>& psi) {
  return detail::HamiltonianEvaluator<Scalar>(H).gradient(psi);
}

template <typename Scalar>
Scalar energy(const Hamiltonian<Scalar>& H, const ComplexVector<Scalar>& psi) {
  return detail::HamiltonianEvaluator<Scalar>(H).energy(psi);
}

/// (u, v)_w for the Hamiltonian's phase space.
template <typename Scalar>
Scalar field_inner(const Hamiltonian<Scalar>& H, const ComplexVector<Scalar>& u, const ComplexVector<Scalar>& v) {
  return Scalar(hamiltonian_space(H).cell_volume()) * u.dot(v).real();
}

// ---------------------------------------------------------------------------
// Linear flows

/// U_t = exp(-i M t) through the eigendecomposition of the Hermitian M.
template <typename Scalar>
class LinearFlow {
 public:
  explicit LinearFlow(const SymplecticOperator<Scalar>& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> eig(to_complex_operator(H).matrix());
    if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of the Hamiltonian failed");
    values_ = eig.eigenvalues();
    vectors_ = eig.eigenvectors();
  }

  ComplexVector<Scalar> operator()(const ComplexVector<Scalar>& psi0, Scalar t) const {
    if (psi0.size() != vectors_.rows()) throw DimensionError("field size does not match the Hamiltonian");
    ComplexVector<Scalar> c = vectors_.adjoint() * psi0;
    for (Index k = 0; k < c.size(); ++k) c(k) *= std::polar(Scalar(1), -values_(k) * t);
    return vectors_ * c;
  }

  const Vector<Scalar>& frequencies() const { return values_; }

 private:
  Vector<Scalar> values_;
  ComplexMatrix<Scalar> vectors_;
};

template <typename Scalar>
ComplexVector<Scalar> evolve_linear(const SymplecticOperator<Scalar>& H, const ComplexVector<Scalar>& psi0, Scalar t) {
  return LinearFlow<Scalar>(H)(psi0, t);
}

/// Real-form flow psi(t) = exp(J H t) psi0 of dq/dt = dH/dp, dp/dt = -dH/dq.
template <typename Scalar>
PhaseVector<Scalar> evolve_real_flow(const SymplecticOperator<Scalar>& H, const PhaseVector<Scalar>& psi0, Scalar t) {
  if (psi0.n() != H.n()) throw DimensionError("phase vector does not match the Hamiltonian");
  const Matrix<Scalar> generator = symplectic_matrix<Scalar>(H.n()) * assemble(H) * t;
  const Matrix<Scalar> U = generator.exp();
  return PhaseVector<Scalar>::from_coords(U * psi0.coords());
}

// ---------------------------------------------------------------------------
// Trajectories

template <typename Scalar>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<ComplexVector<Scalar>> states;  // empty unless states were kept
  std::vector<Scalar> norms;                  // ||Psi||^2
  std::vector<Scalar> energies;

  Scalar max_relative_norm_drift() const { return max_drift(norms); }
  Scalar max_relative_energy_drift() const { return max_drift(energies); }

 private:
  static Scalar max_drift(const std::vector<Scalar>& v) {
    if (v.empty()) return 0;
    const Scalar ref = std::max(std::abs(v.front()), std::numeric_limits<Scalar>::min());
    Scalar worst = 0;
    for (Scalar x : v) worst = std::max(worst, std::abs(x - v.front()) / ref);
    return worst;
  }
};

struct EvolveOptions {
  int sample_stride = 1;      // record every k-th step (plus the final step)
  bool keep_states = true;
  double blowup_factor = 10;  // abort when ||Psi||^2 grows beyond this factor
};

struct MidpointOptions {
  double tolerance = 1e-14;   // relative fixed-point increment
  int max_iterations = 100;
};

namespace detail {

template <typename Scalar>
void record(Trajectory<Scalar>& traj, const HamiltonianEvaluator<Scalar>& ev, const ComplexVector<Scalar>& psi,
            Scalar t, bool keep) {
  traj.times.push_back(t);
  traj.norms.push_back(ev.norm2(psi));
  traj.energies.push_back(ev.energy(psi));
  if (keep) traj.states.push_back(psi);
}

template <typename Scalar>
void check_blowup(const HamiltonianEvaluator<Scalar>& ev, const ComplexVector<Scalar>& psi, Scalar norm0,
                  double factor, long step, Scalar t) {
  const Scalar n2 = ev.norm2(psi);
  if (!std::isfinite(n2) || n2 > Scalar(factor) * norm0) {
    std::ostringstream msg;
    msg << "blow-up at step " << step << " (t = " << t << "): ||Psi||^2 = " << n2 << ", initial " << norm0;
    throw NumericalFailure(msg.str());
  }
}

template <typename Scalar>
void check_evolve_args(Scalar dt, long steps, const EvolveOptions& options) {
  if (!(dt > 0)) throw DomainError("time step must be positive");
  if (steps < 0) throw DomainError("step count must be non-negative");
  if (options.sample_stride < 1) throw DomainError("sample stride must be >= 1");
}

}  // namespace detail

/// Strang splitting for grid Hamiltonians with local nonlinearity:
/// half step of the local phase rotation exp(-i dt/2 (V + N(|Psi|^2))),
/// full spectral kinetic step exp(-i dt kinetic |k|^2), half local step.
template <typename Scalar>
Trajectory<Scalar> evolve_splitstep(const Hamiltonian<Scalar>& H, const ComplexVector<Scalar>& psi0, Scalar dt,
                                    long steps, const EvolveOptions& options = {}) {
  detail::check_evolve_args(dt, steps, options);
  detail::HamiltonianEvaluator<Scalar> ev(H);
  if (!ev.on_grid()) throw DomainError("split-step integration needs a grid Hamiltonian");
  if (psi0.size() != ev.space().n()) throw DimensionError("initial field does not match the grid");
  if (!psi0.allFinite()) throw DomainError("initial field has non-finite entries");
  const auto& lin = ev.grid_linear();
  ComplexVector<Scalar> kinetic_phase(psi0.size());
  for (Index i = 0; i < psi0.size(); ++i)
    kinetic_phase(i) = std::polar(Scalar(1), -dt * lin.kinetic * ev.spectral().k_squared()(i));

  auto local = [&](ComplexVector<Scalar>& psi, Scalar tau) {
    const Vector<Scalar> rate = lin.potential + ev.local_rate(psi.cwiseAbs2());
    for (Index i = 0; i < psi.size(); ++i) psi(i) *= std::polar(Scalar(1), -tau * rate(i));
  };

  Trajectory<Scalar> traj;
  ComplexVector<Scalar> psi = psi0;
  const Scalar norm0 = ev.norm2(psi);
  detail::record(traj, ev, psi, Scalar(0), options.keep_states);
  for (long s = 1; s <= steps; ++s) {
    local(psi, dt / 2);
    ComplexVector<Scalar> F = ev.spectral().forward(psi);
    F.array() *= kinetic_phase.array();
    psi = ev.spectral().inverse(F);
    local(psi, dt / 2);
    const Scalar t = dt * Scalar(s);
    detail::check_blowup(ev, psi, norm0, options.blowup_factor, s, t);
    if (s % options.sample_stride == 0 || s == steps) detail::record(traj, ev, psi, t, options.keep_states);
  }
  return traj;
}

/// Implicit midpoint rule Psi+ = Psi - i dt H'((Psi + Psi+) / 2), solved by
/// fixed-point iteration. Conserves ||Psi||^2 (a quadratic invariant of every
/// J-invariant Hamiltonian) up to the solver tolerance.
template <typename Scalar>
Trajectory<Scalar> evolve_midpoint(const Hamiltonian<Scalar>& H, const ComplexVector<Scalar>& psi0, Scalar dt,
                                   long steps, const EvolveOptions& options = {},
                                   const MidpointOptions& solver = {}) {
  detail::check_evolve_args(dt, steps, options);
  detail::HamiltonianEvaluator<Scalar> ev(H);
  if (psi0.size() != ev.space().n()) throw DimensionError("initial field does not match the Hamiltonian");
  const std::complex<Scalar> minus_i_dt(0, -dt);

  Trajectory<Scalar> traj;
  ComplexVector<Scalar> psi = psi0;
  const Scalar norm0 = ev.norm2(psi);
  detail::record(traj, ev, psi, Scalar(0), options.keep_states);
  for (long s = 1; s <= steps; ++s) {
    ComplexVector<Scalar> next = psi + minus_i_dt * ev.gradient(psi);  // explicit Euler predictor
    const Scalar scale = std::max(Scalar(1), psi.norm());
    Scalar prev_inc = std::numeric_limits<Scalar>::infinity();
    bool converged = false;
    for (int it = 0; it < solver.max_iterations; ++it) {
      ComplexVector<Scalar> mid = (psi + next) / Scalar(2);
      ComplexVector<Scalar> candidate = psi + minus_i_dt * ev.gradient(mid);
      const Scalar inc = (candidate - next).norm();
      next = std::move(candidate);
      if (inc <= Scalar(solver.tolerance) * scale ||
          (inc >= prev_inc && inc <= 100 * std::numeric_limits<Scalar>::epsilon() * scale)) {
        converged = true;
        break;
      }
      prev_inc = inc;
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "implicit midpoint iteration did not converge at step " << s;
      throw NumericalFailure(msg.str());
    }
    psi = std::move(next);
    const Scalar t = dt * Scalar(s);
    detail::check_blowup(ev, psi, norm0, options.blowup_factor, s, t);
    if (s % options.sample_stride == 0 || s == steps) detail::record(traj, ev, psi, t, options.keep_states);
  }
  return traj;
}

template <typename Scalar>
Trajectory<Scalar> evolve_bilinear(const BilinearHamiltonian<Scalar>& H, const ComplexVector<Scalar>& psi0, Scalar dt,
                                   long steps, const EvolveOptions& options = {}, const MidpointOptions& solver = {}) {
  return evolve_midpoint(Hamiltonian<Scalar>(H), psi0, dt, steps, options, solver);
}

// ---------------------------------------------------------------------------
// Change of field coordinates psi = sqrt(alpha) Psi with energy unit E_P:
//   H(psi) = (alpha / E_P) H_Q(psi / sqrt(alpha)).

template <typename Scalar>
Hamiltonian<Scalar> prequantum_form(const Hamiltonian<Scalar>& HQ, Scalar alpha, Scalar planck_energy) {
  if (!(alpha > 0) || !(planck_energy > 0)) throw DomainError("alpha and E_P must be positive");
  const Scalar inv_e = 1 / planck_energy;
  auto scale_linear = [inv_e](GridLinear<Scalar> g) {
    g.kinetic *= inv_e;
    g.potential *= inv_e;
    return g;
  };
  return std::visit(
      [&](const auto& h) -> Hamiltonian<Scalar> {
        using T = std::decay_t<decltype(h)>;
        T out = h;
        if constexpr (std::is_same_v<T, QuadraticHamiltonian<Scalar>>) {
          out.op = inv_e * h.op;
        } else if constexpr (std::is_same_v<T, CubicNLS<Scalar>>) {
          out.linear = scale_linear(h.linear);
          out.coupling = h.coupling / (alpha * planck_energy);
        } else if constexpr (std::is_same_v<T, BilinearHamiltonian<Scalar>>) {
          out.linear = inv_e * h.linear;
          out.coupling = h.coupling / (alpha * planck_energy);
        } else if constexpr (std::is_same_v<T, LogNLS<Scalar>>) {
          out.linear = scale_linear(h.linear);
          out.b = h.b * inv_e;  // (alpha / E_P)(b / alpha)
          out.log_scale = h.log_scale / alpha;
        } else {
          if (auto* g = std::get_if<GridLinear<Scalar>>(&h.linear)) {
            out.linear = scale_linear(*g);
          } else {
            out.linear = inv_e * std::get<SymplecticOperator<Scalar>>(h.linear);
          }
          auto F = h.nonlinearity;
          out.nonlinearity.F = [F, alpha, inv_e](Scalar s) { return inv_e * F.F(s / alpha); };
          out.nonlinearity.antiderivative = [F, alpha, inv_e](Scalar s) { return alpha * inv_e * F.integral(s / alpha); };
        }
        return out;
      },
      HQ);
}

/// Inverse of prequantum_form: H_Q(Psi) = (E_P / alpha) H(sqrt(alpha) Psi).
template <typename Scalar>
Hamiltonian<Scalar> quantum_form(const Hamiltonian<Scalar>& H, Scalar alpha, Scalar planck_energy) {
  if (!(alpha > 0) || !(planck_energy > 0)) throw DomainError("alpha and E_P must be positive");
  const Scalar e = planck_energy;
  auto scale_linear = [e](GridLinear<Scalar> g) {
    g.kinetic *= e;
    g.potential *= e;
    return g;
  };
  return std::visit(
      [&](const auto& h) -> Hamiltonian<Scalar> {
        using T = std::decay_t<decltype(h)>;
        T out = h;
        if constexpr (std::is_same_v<T, QuadraticHamiltonian<Scalar>>) {
          out.op = e * h.op;
        } else if constexpr (std::is_same_v<T, CubicNLS<Scalar>>) {
          out.linear = scale_linear(h.linear);
          out.coupling = h.coupling * alpha * e;
        } else if constexpr (std::is_same_v<T, BilinearHamiltonian<Scalar>>) {
          out.linear = e * h.linear;
          out.coupling = h.coupling * alpha * e;
        } else if constexpr (std::is_same_v<T, LogNLS<Scalar>>) {
          out.linear = scale_linear(h.linear);
          out.b = h.b * e;
          out.log_scale = h.log_scale * alpha;
        } else {
          if (auto* g = std::get_if<GridLinear<Scalar>>(&h.linear)) {
            out.linear = scale_linear(*g);
          } else {
            out.linear = e * std::get<SymplecticOperator<Scalar>>(h.linear);
          }
          auto F = h.nonlinearity;
          out.nonlinearity.F = [F, alpha, e](Scalar s) { return e * F.F(alpha * s); };
          out.nonlinearity.antiderivative = [F, alpha, e](Scalar s) { return e / alpha * F.integral(alpha * s); };
        }
        return out;
      },
      H);
}

// ---------------------------------------------------------------------------
// Reference solutions

/// A e^{i k.x} with k = 2 pi mode / L along the first axis.
template <typename Scalar>
ComplexVector<Scalar> plane_wave(const SpectralGrid<Scalar>& grid, Scalar amplitude, int mode) {
  const auto& g = grid.space().grid();
  const Scalar k = Scalar(2 * std::numbers::pi * mode / g.box_length);
  ComplexVector<Scalar> psi(grid.space().n());
  for (Index i = 0; i < psi.size(); ++i) psi(i) = std::polar(amplitude, k * grid.coordinate(i, 0));
  return psi;
}

/// Frequency of the plane wave A e^{ikx} under -kinetic Laplacian + V0 + coupling |Psi|^2.
template <typename Scalar>
Scalar plane_wave_frequency(Scalar kinetic, Scalar k, Scalar amplitude, Scalar coupling, Scalar v0 = 0) {
  return kinetic * k * k + v0 + coupling * amplitude * amplitude;
}

/// Stationary Gaussian of i Psi_t = -kinetic Laplacian Psi + b ln(c |Psi|^2) Psi.
/// Substituting Psi = C exp(-g |x|^2 - i w t) cancels the |x|^2 terms iff
/// g = -b / (2 kinetic) (so b < 0); the remaining constant gives
/// w = 2 kinetic d g + b ln(c C^2).
template <typename Scalar>
struct Gausson {
  Scalar amplitude;
  Scalar decay;      // g in exp(-g |x|^2)
  Scalar frequency;  // w
  Scalar period() const { return Scalar(2 * std::numbers::pi) / std::abs(frequency); }
};

template <typename Scalar>
Gausson<Scalar> gausson_parameters(Scalar b, Scalar log_scale, Scalar amplitude, int dimension,
                                   Scalar kinetic = Scalar(0.5)) {
  if (!(b < 0)) throw DomainError("a Gaussian stationary state needs b < 0");
  if (!(kinetic > 0)) throw DomainError("kinetic coefficient must be positive");
  const Scalar g = -b / (2 * kinetic);
  return {amplitude, g, 2 * kinetic * Scalar(dimension) * g + b * std::log(log_scale * amplitude * amplitude)};
}

template <typename Scalar>
ComplexVector<Scalar> gausson_profile(const SpectralGrid<Scalar>& grid, const Gausson<Scalar>& gs) {
  const int d = grid.space().grid().dimension;
  ComplexVector<Scalar> psi(grid.space().n());
  for (Index i = 0; i < psi.size(); ++i) {
    Scalar r2 = 0;
    for (int a = 0; a < d; ++a) r2 += grid.coordinate(i, a) * grid.coordinate(i, a);
    psi(i) = gs.amplitude * std::exp(-gs.decay * r2);
  }
  return psi;
}

/// Dense matrix of -kinetic Laplacian + V (spectral) as an element of L_symp,s.
template <typename Scalar>
SymplecticOperator<Scalar> grid_linear_operator(const GridLinear<Scalar>& g) {
  SpectralGrid<Scalar> grid(g.space);
  const Index n = g.space.n();
  ComplexMatrix<Scalar> M(n, n);
  for (Index j = 0; j < n; ++j) {
    ComplexVector<Scalar> e = ComplexVector<Scalar>::Zero(n);
    e(j) = 1;
    M.col(j) = grid.apply_symbol(e, g.kinetic * grid.k_squared());
    M(j, j) += g.potential(j);
  }
  M = (M + M.adjoint()).eval() / Scalar(2);
  return realify(ComplexOperator<Scalar>(M));
}

}  // namespace pcsft

#endif  // PCSFT_DYNAMICS_HPP
