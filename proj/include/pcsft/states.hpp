#ifndef PCSFT_STATES_HPP
#define PCSFT_STATES_HPP

// Symmetric J-invariant Gaussian measures on the truncated phase space and
// von Neumann density operators.

#include "pcsft/phase_space.hpp"
#include "pcsft/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <optional>
#include <string>
#include <utility>

namespace pcsft {

/// Hermitian, positive semidefinite, unit trace.
template <typename Scalar>
class DensityOperator {
 public:
  using MatrixType = ComplexMatrix<Scalar>;

  DensityOperator() = default;
  explicit DensityOperator(const MatrixType& D) {
    if (D.rows() != D.cols() || D.rows() == 0) throw DimensionError("density operator must be square");
    const Scalar tol = structure_tolerance<Scalar>();
    if (max_abs(D - D.adjoint()) > tol * std::max(Scalar(1), max_abs(D)))
      throw StructureError("density operator is not Hermitian");
    D_ = (D + D.adjoint()) / Scalar(2);
    if (std::abs(D_.trace().real() - Scalar(1)) > tol) throw DomainError("density operator must have unit trace");
    Eigen::SelfAdjointEigenSolver<MatrixType> eig(D_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol) throw NotPositiveSemidefinite("density operator has a negative eigenvalue");
  }

  static DensityOperator maximally_mixed(Index n) {
    return DensityOperator(MatrixType::Identity(n, n) / Scalar(n));
  }

  /// |v><v| / <v, v>.
  static DensityOperator pure(const ComplexVector<Scalar>& v) {
    return DensityOperator(v * v.adjoint() / v.squaredNorm());
  }

  Index n() const { return D_.rows(); }
  const MatrixType& matrix() const { return D_; }

 private:
  MatrixType D_;
};

// ---------------------------------------------------------------------------

/// Centered Gaussian measure N(0, B) with B = cov rho commuting with J and
/// dispersion alpha = trace(B) = E ||psi||^2.
template <typename Scalar>
class GaussianState {
 public:
  using MatrixType = Matrix<Scalar>;

  GaussianState(PhaseSpace space, const MatrixType& covariance, Scalar alpha, std::string name = {})
      : space_(std::move(space)), alpha_(alpha), name_(std::move(name)) {
    if (!(alpha > 0)) throw DomainError("dispersion alpha must be positive");
    if (covariance.rows() != space_.real_dimension() || covariance.cols() != space_.real_dimension())
      throw DimensionError("covariance size does not match the phase space");
    if (!covariance.allFinite()) throw DomainError("covariance has non-finite entries");
    const Scalar scale = max_abs(covariance);
    const Scalar tol = structure_tolerance<Scalar>() * std::max(scale, std::numeric_limits<Scalar>::min());
    if (max_abs(covariance - covariance.transpose()) > tol) throw StructureError("covariance is not symmetric");
    if (commutator_with_J(covariance) > tol) throw StructureError("covariance does not commute with J");
    B_ = project_onto_symplectic<Scalar>((covariance + covariance.transpose()) / Scalar(2));
    if (std::abs(B_.trace() - alpha) > structure_tolerance<Scalar>() * alpha)
      throw DomainError("trace of the covariance must equal the dispersion alpha");
    Eigen::SelfAdjointEigenSolver<MatrixType> eig(B_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol) throw NotPositiveSemidefinite("covariance has a negative eigenvalue");
  }

  /// Dispersion read off the covariance trace.
  static GaussianState from_covariance(PhaseSpace space, const MatrixType& covariance, std::string name = {}) {
    return GaussianState(std::move(space), covariance, covariance.trace(), std::move(name));
  }

  const PhaseSpace& space() const { return space_; }
  Index n() const { return space_.n(); }
  const MatrixType& covariance() const { return B_; }
  Scalar alpha() const { return alpha_; }
  const std::string& name() const { return name_; }

 private:
  PhaseSpace space_;
  MatrixType B_;
  Scalar alpha_;
  std::string name_;
};

/// sigma^2(rho) = trace B.
template <typename Scalar>
Scalar dispersion(const GaussianState<Scalar>& state) {
  return state.covariance().trace();
}

/// The sqrt(alpha)-scaling rho_scal: covariance B / alpha, dispersion 1.
template <typename Scalar>
GaussianState<Scalar> scale_state(const GaussianState<Scalar>& state) {
  const Scalar alpha = state.alpha();
  return GaussianState<Scalar>(state.space(), state.covariance() / alpha, alpha / alpha, state.name());
}

/// B^c with <B^c y1, y2> = E <y1, psi><psi, y2>; equals 2B under the complex identification.
template <typename Scalar>
ComplexOperator<Scalar> complex_covariance(const GaussianState<Scalar>& state) {
  return ComplexOperator<Scalar>(Scalar(2) * complexify_matrix<Scalar>(state.covariance()));
}

/// Right inverse of dequantize_state: B = (alpha / 2) realify(D).
template <typename Scalar>
GaussianState<Scalar> from_density_operator(const DensityOperator<Scalar>& D, Scalar alpha,
                                            std::optional<PhaseSpace> space = std::nullopt,
                                            std::string name = {}) {
  if (!(alpha > 0)) throw DomainError("dispersion alpha must be positive");
  PhaseSpace s = space.value_or(PhaseSpace::abstract(D.n()));
  if (s.n() != D.n()) throw DimensionError("density operator does not match the phase space");
  return GaussianState<Scalar>(s, (alpha / Scalar(2)) * realify_matrix<Scalar>(D.matrix()), alpha, std::move(name));
}

// ---------------------------------------------------------------------------
// Sampling

/// Factor L with L L^T = B. Cholesky first; symmetric eigendecomposition with
/// clipping of eigenvalues >= -1e-12 ||B|| when B is (near) singular.
template <typename Scalar>
Matrix<Scalar> sampling_factor(const Matrix<Scalar>& B) {
  const Scalar scale = std::max(max_abs(B), std::numeric_limits<Scalar>::min());
  const Scalar tol = structure_tolerance<Scalar>() * scale;
  Eigen::LLT<Matrix<Scalar>> llt(B);
  if (llt.info() == Eigen::Success) {
    Matrix<Scalar> L = llt.matrixL();
    if (L.allFinite() && max_abs(Matrix<Scalar>(L * L.transpose() - B)) <= tol) return L;
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(B);
  if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of the covariance failed");
  Vector<Scalar> lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -tol) throw NotPositiveSemidefinite("covariance is not positive semidefinite");
  lambda = lambda.cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * lambda.asDiagonal();
}

/// Draws i.i.d. N(0, B) columns. Batch b of a run with seed s always uses the
/// substream (s, b), so any partition of batches over threads gives the same
/// samples.
template <typename Scalar>
class GaussianSampler {
 public:
  static constexpr std::int64_t batch_size = 4096;

  explicit GaussianSampler(const Matrix<Scalar>& covariance) : factor_(sampling_factor<Scalar>(covariance)) {}
  explicit GaussianSampler(const GaussianState<Scalar>& state) : GaussianSampler(state.covariance()) {}

  Index dimension() const { return factor_.rows(); }
  const Matrix<Scalar>& factor() const { return factor_; }

  static std::int64_t batch_count(std::int64_t count) { return (count + batch_size - 1) / batch_size; }
  static Index batch_columns(std::int64_t count, std::int64_t batch) {
    return static_cast<Index>(std::min<std::int64_t>(batch_size, count - batch * batch_size));
  }

  /// Standard normal draws for one batch, before applying the factor.
  Matrix<Scalar> standard_batch(std::uint64_t seed, std::int64_t batch, Index columns) const {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(batch));
    return gaussian_matrix<Scalar>(rng, factor_.cols(), columns);
  }

  Matrix<Scalar> batch(std::uint64_t seed, std::int64_t batch, Index columns) const {
    return factor_ * standard_batch(seed, batch, columns);
  }

 private:
  Matrix<Scalar> factor_;
};

template <typename Scalar>
std::vector<PhaseVector<Scalar>> sample(const GaussianState<Scalar>& state, std::uint64_t seed, std::int64_t count) {
  if (count < 1) throw DomainError("sample count must be >= 1");
  GaussianSampler<Scalar> sampler(state);
  const auto batches = GaussianSampler<Scalar>::batch_count(count);
  std::vector<PhaseVector<Scalar>> out(static_cast<std::size_t>(count));
  parallel_for(batches, [&](std::int64_t b) {
    const Index cols = GaussianSampler<Scalar>::batch_columns(count, b);
    Matrix<Scalar> x = sampler.batch(seed, b, cols);
    for (Index j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(b * GaussianSampler<Scalar>::batch_size + j)] =
          PhaseVector<Scalar>::from_coords(x.col(j));
  });
  return out;
}

}  // namespace pcsft

#endif  // PCSFT_STATES_HPP
