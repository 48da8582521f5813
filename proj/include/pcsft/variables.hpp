#ifndef PCSFT_VARIABLES_HPP
#define PCSFT_VARIABLES_HPP

// Classical physical variables f: Omega -> R as structured term sums.
//
//   QuadraticTerm        c (A psi, psi)
//   FactoredQuarticTerm  c (G1 psi, psi)(G2 psi, psi)
//   KernelQuarticTerm    c sum_x w_x |Psi(x)|^4
//   SmoothTerm           opaque callable with f(0) = 0
//
// Polynomial terms have closed-form Hessians, scalings and Gaussian moments;
// SmoothTerm falls back to finite differences and Monte Carlo.

#include "pcsft/phase_space.hpp"
#include "pcsft/random.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pcsft {

template <typename Scalar>
struct QuadraticTerm {
  Scalar coeff;
  SymplecticOperator<Scalar> op;
};

template <typename Scalar>
struct FactoredQuarticTerm {
  Scalar coeff;
  SymplecticOperator<Scalar> gamma1;
  SymplecticOperator<Scalar> gamma2;
};

/// Local quartic c sum_x w_x |Psi(x)|^4 (delta kernel); w_x = 1 on an abstract basis.
template <typename Scalar>
struct KernelQuarticTerm {
  Scalar coeff;
  Vector<Scalar> weights;
};

template <typename Scalar>
struct SmoothTerm {
  std::string name;
  std::function<Scalar(const PhaseVector<Scalar>&)> fn;
  std::optional<Matrix<Scalar>> hessian;  // analytic f''(0), 2n x 2n, if known
  bool exponential_growth = true;         // declared growth class, not checked
};

template <typename Scalar>
using Term = std::variant<QuadraticTerm<Scalar>, FactoredQuarticTerm<Scalar>, KernelQuarticTerm<Scalar>,
                          SmoothTerm<Scalar>>;

template <typename Scalar>
class ClassicalVariable {
 public:
  explicit ClassicalVariable(Index n = 0) : n_(n) {}

  Index n() const { return n_; }
  const std::vector<Term<Scalar>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  ClassicalVariable& add(Term<Scalar> term) {
    const Index m = term_dimension(term);
    if (n_ == 0) n_ = m;
    if (m != 0 && m != n_) throw DimensionError("term dimension does not match the variable");
    terms_.push_back(std::move(term));
    return *this;
  }

  bool is_polynomial() const {
    for (const auto& t : terms_)
      if (std::holds_alternative<SmoothTerm<Scalar>>(t)) return false;
    return true;
  }

  ClassicalVariable& operator+=(const ClassicalVariable& o) {
    for (const auto& t : o.terms_) add(t);
    return *this;
  }
  friend ClassicalVariable operator+(ClassicalVariable a, const ClassicalVariable& b) { return a += b; }

  friend ClassicalVariable operator*(Scalar s, const ClassicalVariable& f) {
    ClassicalVariable out(f.n_);
    for (const auto& t : f.terms_) {
      out.terms_.push_back(std::visit(
          [s](const auto& term) -> Term<Scalar> {
            using T = std::decay_t<decltype(term)>;
            if constexpr (std::is_same_v<T, SmoothTerm<Scalar>>) {
              SmoothTerm<Scalar> scaled = term;
              scaled.fn = [fn = term.fn, s](const PhaseVector<Scalar>& v) { return s * fn(v); };
              if (term.hessian) scaled.hessian = s * *term.hessian;
              return scaled;
            } else {
              T scaled = term;
              scaled.coeff *= s;
              return scaled;
            }
          },
          t));
    }
    return out;
  }

 private:
  static Index term_dimension(const Term<Scalar>& t) {
    return std::visit(
        [](const auto& term) -> Index {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            return term.op.n();
          } else if constexpr (std::is_same_v<T, FactoredQuarticTerm<Scalar>>) {
            if (term.gamma1.n() != term.gamma2.n()) throw DimensionError("quartic operators differ in size");
            return term.gamma1.n();
          } else if constexpr (std::is_same_v<T, KernelQuarticTerm<Scalar>>) {
            return term.weights.size();
          } else {
            return term.hessian ? term.hessian->rows() / 2 : Index(0);
          }
        },
        t);
  }

  Index n_;
  std::vector<Term<Scalar>> terms_;
};

// ---------------------------------------------------------------------------
// Builders

template <typename Scalar>
ClassicalVariable<Scalar> quadratic(Scalar coeff, SymplecticOperator<Scalar> op) {
  ClassicalVariable<Scalar> f;
  f.add(QuadraticTerm<Scalar>{coeff, std::move(op)});
  return f;
}

template <typename Scalar>
ClassicalVariable<Scalar> factored_quartic(Scalar coeff, SymplecticOperator<Scalar> g1, SymplecticOperator<Scalar> g2) {
  ClassicalVariable<Scalar> f;
  f.add(FactoredQuarticTerm<Scalar>{coeff, std::move(g1), std::move(g2)});
  return f;
}

/// Quadrature weight = cell volume of the space (1 on an abstract basis).
template <typename Scalar>
ClassicalVariable<Scalar> kernel_quartic(Scalar coeff, const PhaseSpace& space) {
  ClassicalVariable<Scalar> f;
  f.add(KernelQuarticTerm<Scalar>{coeff, Vector<Scalar>::Constant(space.n(), Scalar(space.cell_volume()))});
  return f;
}

/// Rejects callables that do not preserve the vacuum, f(0) = 0.
template <typename Scalar>
ClassicalVariable<Scalar> smooth(Index n, std::string name, std::function<Scalar(const PhaseVector<Scalar>&)> fn,
                                 std::optional<Matrix<Scalar>> hessian = std::nullopt) {
  if (n < 1) throw DomainError("smooth term needs a positive dimension");
  if (hessian && (hessian->rows() != 2 * n || hessian->cols() != 2 * n))
    throw DimensionError("analytic Hessian must be 2n x 2n");
  const Scalar at_zero = fn(PhaseVector<Scalar>(n));
  if (!(std::abs(at_zero) <= std::numeric_limits<Scalar>::epsilon()))
    throw DomainError("smooth term '" + name + "' does not vanish at the origin");
  ClassicalVariable<Scalar> f(n);
  f.add(SmoothTerm<Scalar>{std::move(name), std::move(fn), std::move(hessian), true});
  return f;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

template <typename Scalar>
Scalar quadratic_form(const SymplecticOperator<Scalar>& A, const PhaseVector<Scalar>& v) {
  // (A psi, psi) = q.Rq + p.Rp + 2 q.Tp
  return v.q().dot(A.R() * v.q()) + v.p().dot(A.R() * v.p()) + Scalar(2) * v.q().dot(A.T() * v.p());
}

template <typename Scalar>
Scalar kernel_quartic_value(const Vector<Scalar>& w, const PhaseVector<Scalar>& v) {
  Vector<Scalar> rho = v.q().cwiseAbs2() + v.p().cwiseAbs2();
  return w.dot(rho.cwiseAbs2());
}

}  // namespace detail

template <typename Scalar>
Scalar evaluate(const ClassicalVariable<Scalar>& f, const PhaseVector<Scalar>& psi) {
  if (f.n() != 0 && psi.n() != f.n()) throw DimensionError("variable and phase vector differ in dimension");
  Scalar total = 0;
  for (const auto& t : f.terms()) {
    total += std::visit(
        [&](const auto& term) -> Scalar {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            return term.coeff * detail::quadratic_form(term.op, psi);
          } else if constexpr (std::is_same_v<T, FactoredQuarticTerm<Scalar>>) {
            return term.coeff * detail::quadratic_form(term.gamma1, psi) * detail::quadratic_form(term.gamma2, psi);
          } else if constexpr (std::is_same_v<T, KernelQuarticTerm<Scalar>>) {
            return term.coeff * detail::kernel_quartic_value(term.weights, psi);
          } else {
            return term.fn(psi);
          }
        },
        t);
  }
  return total;
}

/// Column-wise evaluation over a 2n x m batch of phase vectors.
template <typename Scalar>
Vector<Scalar> evaluate_batch(const ClassicalVariable<Scalar>& f, const Matrix<Scalar>& X) {
  const Index n = X.rows() / 2;
  if (f.n() != 0 && n != f.n()) throw DimensionError("variable and samples differ in dimension");
  Vector<Scalar> out = Vector<Scalar>::Zero(X.cols());
  auto form = [&X](const SymplecticOperator<Scalar>& A) -> Vector<Scalar> {
    return (X.cwiseProduct(assemble(A) * X)).colwise().sum().transpose();
  };
  for (const auto& t : f.terms()) {
    std::visit(
        [&](const auto& term) {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            out += term.coeff * form(term.op);
          } else if constexpr (std::is_same_v<T, FactoredQuarticTerm<Scalar>>) {
            out += term.coeff * form(term.gamma1).cwiseProduct(form(term.gamma2));
          } else if constexpr (std::is_same_v<T, KernelQuarticTerm<Scalar>>) {
            Matrix<Scalar> rho = X.topRows(n).cwiseAbs2() + X.bottomRows(n).cwiseAbs2();
            out += term.coeff * (rho.cwiseAbs2().transpose() * term.weights);
          } else {
            for (Index j = 0; j < X.cols(); ++j) out(j) += term.fn(PhaseVector<Scalar>::from_coords(X.col(j)));
          }
        },
        t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hessian at the origin

struct HessianOptions {
  double scale = 0.0;       // step h = eps^(1/3) (1 + scale)
  double tolerance = 1e-5;  // max |D(h) - D(h/2)| / (1 + max |D|) accepted as smooth
};

template <typename Scalar>
struct HessianAtZero {
  SymplecticOperator<Scalar> op;
  Scalar projection_residual = 0;         // max |H - P_J(H)| before projection
  Scalar finite_difference_residual = 0;  // Richardson level difference (0 if analytic)
};

namespace detail {

/// Central second differences of a scalar function at 0 with step h.
template <typename Scalar, typename F>
Matrix<Scalar> second_differences(const F& fn, Index dim, Scalar h) {
  Matrix<Scalar> H(dim, dim);
  auto at = [&](Index i, Scalar si, Index j, Scalar sj) {
    Vector<Scalar> x = Vector<Scalar>::Zero(dim);
    x(i) += si * h;
    if (j >= 0) x(j) += sj * h;
    return fn(PhaseVector<Scalar>::from_coords(x));
  };
  const Scalar f0 = fn(PhaseVector<Scalar>(dim / 2));
  for (Index i = 0; i < dim; ++i) {
    H(i, i) = (at(i, 1, -1, 0) - Scalar(2) * f0 + at(i, -1, -1, 0)) / (h * h);
    for (Index j = 0; j < i; ++j) {
      const Scalar v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (Scalar(4) * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

}  // namespace detail

/// f''(0) as an element of L_symp,s. Polynomial terms are exact (a quadratic
/// c (A psi, psi) contributes 2c A, quartics contribute 0); smooth terms use
/// two-level Richardson-extrapolated central differences. The raw Hessian is
/// symmetrized and projected onto J-commuting operators.
template <typename Scalar>
HessianAtZero<Scalar> hessian_at_zero(const ClassicalVariable<Scalar>& f, const HessianOptions& options = {}) {
  const Index n = f.n();
  if (n < 1) throw DimensionError("variable has no dimension");
  Matrix<Scalar> H = Matrix<Scalar>::Zero(2 * n, 2 * n);
  Scalar fd_residual = 0;
  const Scalar h = std::cbrt(std::numeric_limits<Scalar>::epsilon()) * Scalar(1 + options.scale);
  for (const auto& t : f.terms()) {
    std::visit(
        [&](const auto& term) {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            H += Scalar(2) * term.coeff * assemble(term.op);
          } else if constexpr (std::is_same_v<T, SmoothTerm<Scalar>>) {
            if (term.hessian) {
              H += *term.hessian;
              return;
            }
            Matrix<Scalar> coarse = detail::second_differences<Scalar>(term.fn, 2 * n, h);
            Matrix<Scalar> fine = detail::second_differences<Scalar>(term.fn, 2 * n, h / 2);
            const Scalar diff = max_abs(Matrix<Scalar>(fine - coarse));
            const Scalar size = Scalar(1) + std::max(max_abs(fine), max_abs(coarse));
            if (!fine.allFinite() || !coarse.allFinite() || diff > Scalar(options.tolerance) * size)
              throw NonSmoothError("finite differences of '" + term.name + "' do not converge at the origin");
            fd_residual = std::max(fd_residual, diff);
            H += (Scalar(4) * fine - coarse) / Scalar(3);
          }
          // quartic terms have vanishing second derivative at 0
        },
        t);
  }
  Matrix<Scalar> sym = (H + H.transpose()) / Scalar(2);
  Matrix<Scalar> projected = project_onto_symplectic<Scalar>(sym);
  HessianAtZero<Scalar> out;
  out.projection_residual = max_abs(Matrix<Scalar>(sym - projected));
  out.finite_difference_residual = fd_residual;
  out.op = SymplecticOperator<Scalar>::from_real_matrix(projected);
  return out;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct JInvarianceReport {
  bool invariant = true;
  Scalar max_residual = 0;
};

/// Probes f(J psi) = f(psi) on `trials` random points of the unit sphere.
template <typename Scalar>
JInvarianceReport<Scalar> is_J_invariant(const ClassicalVariable<Scalar>& f, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("need at least one trial");
  JInvarianceReport<Scalar> report;
  if (f.empty()) return report;
  Rng rng = make_rng(seed, 0x4a);
  for (int t = 0; t < trials; ++t) {
    PhaseVector<Scalar> psi = random_unit_phase_vector<Scalar>(rng, f.n());
    const Scalar a = evaluate(f, psi);
    const Scalar residual = std::abs(evaluate(f, apply_J(psi)) - a);
    report.max_residual = std::max(report.max_residual, residual);
    if (!(residual <= invariance_tolerance<Scalar>() * (1 + std::abs(a)))) report.invariant = false;
  }
  return report;
}

/// f_Q(Psi) = f(sqrt(alpha) Psi) / alpha.
template <typename Scalar>
ClassicalVariable<Scalar> scale_variable(const ClassicalVariable<Scalar>& f, Scalar alpha) {
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
  ClassicalVariable<Scalar> out(f.n());
  for (const auto& t : f.terms()) {
    out.add(std::visit(
        [alpha](const auto& term) -> Term<Scalar> {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            return term;
          } else if constexpr (std::is_same_v<T, SmoothTerm<Scalar>>) {
            SmoothTerm<Scalar> scaled = term;
            const Scalar root = std::sqrt(alpha);
            scaled.fn = [fn = term.fn, alpha, root](const PhaseVector<Scalar>& v) { return fn(root * v) / alpha; };
            return scaled;
          } else {
            T scaled = term;
            scaled.coeff *= alpha;
            return scaled;
          }
        },
        t));
  }
  return out;
}

}  // namespace pcsft

#endif  // PCSFT_VARIABLES_HPP
