#ifndef PCSFT_DEQUANTIZATION_HPP
#define PCSFT_DEQUANTIZATION_HPP

// Classical -> quantum correspondence.
//
//   classical average   <f>_rho = E_rho f(psi)                (Monte Carlo)
//   quantum average     <A>_D   = Tr D A
//   state map           D^c = cov^c rho_scal                  (dequantize_state)
//   variable map        A   = f''(0)                          (dequantize_variable)
//
// and the asymptotic coupling <f>_rho = (alpha / 2) Tr D^c f''(0) + alpha^2 R.
// Polynomial variables have exact Gaussian moments (Isserlis), which lets the
// alpha^2 remainder be resolved far below Monte Carlo noise.

#include "pcsft/states.hpp"
#include "pcsft/variables.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pcsft {

template <typename Scalar>
struct AverageEstimate {
  Scalar value = 0;
  Scalar std_error = 0;  // sample standard deviation / sqrt(count)
  std::int64_t count = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Running (count, mean, M2) with Chan's pairwise merge.
template <typename Scalar>
struct Moments {
  std::int64_t count = 0;
  Scalar mean = 0;
  Scalar m2 = 0;

  static Moments of(const Vector<Scalar>& v) {
    Moments m;
    m.count = v.size();
    if (m.count == 0) return m;
    m.mean = v.mean();
    m.m2 = (v.array() - m.mean).square().sum();
    return m;
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    const std::int64_t total = count + o.count;
    const Scalar delta = o.mean - mean;
    mean += delta * Scalar(o.count) / Scalar(total);
    m2 += o.m2 + delta * delta * Scalar(count) * Scalar(o.count) / Scalar(total);
    count = total;
  }

  AverageEstimate<Scalar> estimate(std::uint64_t seed) const {
    AverageEstimate<Scalar> e;
    e.value = mean;
    e.count = count;
    e.seed = seed;
    e.std_error = count > 1 ? std::sqrt(m2 / Scalar(count - 1) / Scalar(count)) : Scalar(0);
    return e;
  }
};

/// Monte Carlo mean of per-sample values produced by `values(X)` for 2n x m
/// sample batches. Batches are reduced in index order.
template <typename Scalar, typename Values>
AverageEstimate<Scalar> monte_carlo(const GaussianState<Scalar>& state, std::int64_t count, std::uint64_t seed,
                                    Values&& values) {
  if (count < 2) throw DomainError("Monte Carlo average needs count >= 2");
  GaussianSampler<Scalar> sampler(state);
  using Sampler = GaussianSampler<Scalar>;
  const auto batches = Sampler::batch_count(count);
  std::vector<Moments<Scalar>> partial(static_cast<std::size_t>(batches));
  std::vector<std::int64_t> bad(static_cast<std::size_t>(batches), -1);
  parallel_for(batches, [&](std::int64_t b) {
    const Index cols = Sampler::batch_columns(count, b);
    Vector<Scalar> v = values(sampler.batch(seed, b, cols));
    for (Index j = 0; j < v.size(); ++j) {
      if (!std::isfinite(v(j))) {
        bad[static_cast<std::size_t>(b)] = b * Sampler::batch_size + j;
        return;
      }
    }
    partial[static_cast<std::size_t>(b)] = Moments<Scalar>::of(v);
  });
  for (auto idx : bad)
    if (idx >= 0) throw EvaluationError("non-finite variable value at sample " + std::to_string(idx), idx);
  Moments<Scalar> total;
  for (const auto& m : partial) total.merge(m);
  return total.estimate(seed);
}

}  // namespace detail

/// Monte Carlo estimate of E_rho f(psi); deterministic for a fixed seed.
template <typename Scalar>
AverageEstimate<Scalar> classical_average(const ClassicalVariable<Scalar>& f, const GaussianState<Scalar>& state,
                                          std::int64_t count, std::uint64_t seed) {
  if (f.n() != 0 && f.n() != state.n()) throw DimensionError("variable and state differ in dimension");
  return detail::monte_carlo(state, count, seed, [&f](const Matrix<Scalar>& X) { return evaluate_batch(f, X); });
}

template <typename Scalar>
struct QuantumAverage {
  Scalar value = 0;
  Scalar imaginary_residual = 0;
  operator Scalar() const { return value; }
};

/// <A>_D = Tr D A (real part; the imaginary residual is reported).
template <typename Scalar>
QuantumAverage<Scalar> quantum_average(const ComplexOperator<Scalar>& A, const DensityOperator<Scalar>& D) {
  if (A.n() != D.n()) throw DimensionError("operator and density operator differ in dimension");
  const std::complex<Scalar> tr = (D.matrix() * A.matrix()).trace();
  return {tr.real(), std::abs(tr.imag())};
}

/// D^c = T(rho) = cov^c rho_scal.
template <typename Scalar>
DensityOperator<Scalar> dequantize_state(const GaussianState<Scalar>& state) {
  return DensityOperator<Scalar>(complex_covariance(scale_state(state)).matrix());
}

/// A_quant = T(f) = f''(0) in complex form.
template <typename Scalar>
ComplexOperator<Scalar> dequantize_variable(const ClassicalVariable<Scalar>& f, const HessianOptions& options = {}) {
  return to_complex_operator(hessian_at_zero(f, options).op);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct TraceFormulaCheck {
  AverageEstimate<Scalar> monte_carlo;
  Scalar analytic = 0;  // trace_c(B^c M)
  Scalar residual = 0;  // monte_carlo - analytic
  Scalar sigmas = 0;    // |residual| / std_error
  bool passed = false;  // within 4 standard errors
};

/// Compares E <A Psi, Psi> (complex quadratic form, Monte Carlo) with trace_c(B^c A_c).
template <typename Scalar>
TraceFormulaCheck<Scalar> trace_formula_check(const SymplecticOperator<Scalar>& A, const GaussianState<Scalar>& state,
                                              std::int64_t count, std::uint64_t seed) {
  if (A.n() != state.n()) throw DimensionError("operator and state differ in dimension");
  const ComplexMatrix<Scalar> M = to_complex_operator(A).matrix();
  const Index n = A.n();
  TraceFormulaCheck<Scalar> out;
  out.monte_carlo = detail::monte_carlo(state, count, seed, [&](const Matrix<Scalar>& X) -> Vector<Scalar> {
    ComplexMatrix<Scalar> Z(n, X.cols());
    Z.real() = X.topRows(n);
    Z.imag() = X.bottomRows(n);
    return (Z.conjugate().cwiseProduct(M * Z)).colwise().sum().real().transpose();
  });
  out.analytic = (complex_covariance(state).matrix() * M).trace().real();
  out.residual = out.monte_carlo.value - out.analytic;
  const Scalar se = out.monte_carlo.std_error;
  const Scalar scale = std::max(std::abs(out.analytic), std::numeric_limits<Scalar>::min());
  if (se > 0) {
    out.sigmas = std::abs(out.residual) / se;
    out.passed = out.sigmas <= 4;
  } else {
    out.sigmas = 0;
    out.passed = std::abs(out.residual) <= 64 * std::numeric_limits<Scalar>::epsilon() * scale;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
Scalar isserlis_term(const Term<Scalar>& t, const Matrix<Scalar>& B) {
  return std::visit(
      [&B](const auto& term) -> Scalar {
        using T = std::decay_t<decltype(term)>;
        if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
          return term.coeff * (assemble(term.op) * B).trace();
        } else if constexpr (std::is_same_v<T, FactoredQuarticTerm<Scalar>>) {
          const Matrix<Scalar> g1b = assemble(term.gamma1) * B;
          const Matrix<Scalar> g2b = assemble(term.gamma2) * B;
          return term.coeff * (g1b.trace() * g2b.trace() + Scalar(2) * (g1b * g2b).trace());
        } else if constexpr (std::is_same_v<T, KernelQuarticTerm<Scalar>>) {
          // |Psi_x|^2 = (P_x psi, psi) with P_x selecting (q_x, p_x)
          const Index n = B.rows() / 2;
          Scalar sum = 0;
          for (Index x = 0; x < n; ++x) {
            const Scalar bqq = B(x, x), bpp = B(x + n, x + n), bqp = B(x, x + n);
            const Scalar tr = bqq + bpp;
            sum += term.weights(x) * (tr * tr + Scalar(2) * (bqq * bqq + Scalar(2) * bqp * bqp + bpp * bpp));
          }
          return term.coeff * sum;
        } else {
          throw DomainError("Isserlis expectation is defined for polynomial variables only");
        }
      },
      t);
}

}  // namespace detail

/// Exact E f(psi) for psi ~ N(0, B) and polynomial f (Wick/Isserlis):
///   E (A psi, psi)                    = Tr(A B)
///   E (G1 psi, psi)(G2 psi, psi)      = Tr(G1 B) Tr(G2 B) + 2 Tr(G1 B G2 B)
template <typename Scalar>
Scalar isserlis_expectation(const ClassicalVariable<Scalar>& f, const Matrix<Scalar>& B) {
  if (f.n() != 0 && B.rows() != 2 * f.n()) throw DimensionError("covariance does not match the variable");
  Scalar total = 0;
  for (const auto& t : f.terms()) total += detail::isserlis_term(t, B);
  return total;
}

// ---------------------------------------------------------------------------

enum class EvaluationPath { automatic, isserlis, monte_carlo };
enum class AsymptoticsStatus { fitted, exact, noise_dominated };

inline const char* to_string(EvaluationPath p) {
  switch (p) {
    case EvaluationPath::isserlis: return "isserlis";
    case EvaluationPath::monte_carlo: return "monte-carlo";
    default: return "automatic";
  }
}

inline const char* to_string(AsymptoticsStatus s) {
  switch (s) {
    case AsymptoticsStatus::exact: return "exact";
    case AsymptoticsStatus::noise_dominated: return "noise-dominated";
    default: return "fitted";
  }
}

template <typename Scalar>
struct AsymptoticsReport {
  std::vector<Scalar> alphas;
  std::vector<AverageEstimate<Scalar>> classical;
  std::vector<Scalar> quantum_term;  // (alpha / 2) Tr D^c f''(0)
  std::vector<Scalar> remainder;     // estimate of classical - quantum_term
  std::vector<Scalar> remainder_stderr;
  std::vector<bool> fitted_point;    // included in the log-log fit
  Scalar fitted_slope = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar fitted_intercept = std::numeric_limits<Scalar>::quiet_NaN();
  EvaluationPath path = EvaluationPath::isserlis;
  AsymptoticsStatus status = AsymptoticsStatus::fitted;
  Scalar quantum_average = 0;           // Tr D^c f''(0)
  Scalar consistency_residual = 0;      // Isserlis path: max |classical - quantum - remainder| / |classical|
};

/// Ordinary least squares fit y = slope x + intercept.
template <typename Scalar>
std::pair<Scalar, Scalar> least_squares_line(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  const auto m = static_cast<Index>(x.size());
  Matrix<Scalar> design(m, 2);
  Vector<Scalar> rhs(m);
  for (Index i = 0; i < m; ++i) {
    design(i, 0) = x[static_cast<std::size_t>(i)];
    design(i, 1) = 1;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  Vector<Scalar> coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1)};
}

/// Numerical check of <f>_rho = (alpha/2) Tr D^c f''(0) + alpha^2 R along the
/// family rho_alpha = from_density_operator(D, alpha). The slope of
/// log|remainder| against log alpha is fitted over points whose remainder
/// exceeds ten standard errors; slope 2 certifies the remainder order.
///
/// On the Isserlis path the remainder is the exact Gaussian moment of the
/// non-quadratic terms; the identity classical = quantum + remainder is
/// recorded as consistency_residual. On the Monte Carlo path the remainder is
/// the sample mean of f(psi) - (1/2)(f''(0) psi, psi), whose expectation is
/// classical - quantum but whose noise scales like alpha^2 rather than alpha.
template <typename Scalar>
AsymptoticsReport<Scalar> verify_asymptotics(const ClassicalVariable<Scalar>& f, const DensityOperator<Scalar>& D,
                                             const std::vector<Scalar>& alphas, std::int64_t count,
                                             std::uint64_t seed, EvaluationPath path = EvaluationPath::automatic,
                                             const HessianOptions& hessian_options = {}) {
  if (alphas.size() < 3) throw DomainError("verify_asymptotics needs at least three alphas");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0)) throw DomainError("alphas must be positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) throw DomainError("alphas must be strictly decreasing");
  }
  if (f.n() != 0 && f.n() != D.n()) throw DimensionError("variable and density operator differ in dimension");
  if (path == EvaluationPath::automatic)
    path = f.is_polynomial() ? EvaluationPath::isserlis : EvaluationPath::monte_carlo;
  if (path == EvaluationPath::isserlis && !f.is_polynomial())
    throw DomainError("Isserlis path requires a polynomial variable");

  AsymptoticsReport<Scalar> report;
  report.path = path;
  report.alphas = alphas;
  const SymplecticOperator<Scalar> hessian = hessian_at_zero(f, hessian_options).op;
  report.quantum_average = quantum_average(to_complex_operator(hessian), D).value;
  const Matrix<Scalar> S = assemble(hessian);

  ClassicalVariable<Scalar> higher(f.n());
  for (const auto& t : f.terms())
    if (!std::holds_alternative<QuadraticTerm<Scalar>>(t)) higher.add(t);

  for (Scalar alpha : alphas) {
    const GaussianState<Scalar> state = from_density_operator(D, alpha);
    const Scalar quantum = alpha / 2 * report.quantum_average;
    AverageEstimate<Scalar> classical;
    AverageEstimate<Scalar> remainder;
    if (path == EvaluationPath::isserlis) {
      classical.value = isserlis_expectation(f, state.covariance());
      classical.seed = seed;
      remainder.value = isserlis_expectation(higher, state.covariance());
      const Scalar denom = std::max(std::abs(classical.value), std::numeric_limits<Scalar>::min());
      report.consistency_residual =
          std::max(report.consistency_residual, std::abs(classical.value - quantum - remainder.value) / denom);
    } else {
      classical = classical_average(f, state, count, seed);
      remainder = detail::monte_carlo(state, count, seed, [&](const Matrix<Scalar>& X) -> Vector<Scalar> {
        return evaluate_batch(f, X) - Scalar(0.5) * (X.cwiseProduct(S * X)).colwise().sum().transpose();
      });
    }
    report.classical.push_back(classical);
    report.quantum_term.push_back(quantum);
    report.remainder.push_back(remainder.value);
    report.remainder_stderr.push_back(remainder.std_error);
  }

  std::vector<Scalar> lx, ly;
  bool all_zero = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const Scalar r = std::abs(report.remainder[i]);
    if (r != 0) all_zero = false;
    const bool use = r > 0 && r > 10 * report.remainder_stderr[i];
    report.fitted_point.push_back(use);
    if (use) {
      lx.push_back(std::log(alphas[i]));
      ly.push_back(std::log(r));
    }
  }
  if (all_zero && path == EvaluationPath::isserlis) {
    report.status = AsymptoticsStatus::exact;
  } else if (lx.size() < 2) {
    report.status = AsymptoticsStatus::noise_dominated;
  } else {
    std::tie(report.fitted_slope, report.fitted_intercept) = least_squares_line(lx, ly);
    report.status = AsymptoticsStatus::fitted;
  }
  return report;
}

}  // namespace pcsft

#endif  // PCSFT_DEQUANTIZATION_HPP
