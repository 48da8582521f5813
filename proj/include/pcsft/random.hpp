#ifndef PCSFT_RANDOM_HPP
#define PCSFT_RANDOM_HPP

// Seeded generators for structured random objects (operators, density
// matrices, probe vectors). Every stream is derived from (seed, stream)
// through std::seed_seq so that batches are reproducible independently of
// the order in which they are generated.

#include "pcsft/phase_space.hpp"

#include <random>

namespace pcsft {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<Scalar> normal;
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

template <typename Scalar>
Vector<Scalar> gaussian_vector(Rng& rng, Index size) {
  return gaussian_matrix<Scalar>(rng, size, 1);
}

/// Random element of L_symp,s with GOE-like blocks of entry scale `scale`.
template <typename Scalar>
SymplecticOperator<Scalar> random_symplectic_operator(Rng& rng, Index n, Scalar scale = 1) {
  Matrix<Scalar> a = gaussian_matrix<Scalar>(rng, n, n);
  Matrix<Scalar> b = gaussian_matrix<Scalar>(rng, n, n);
  return SymplecticOperator<Scalar>(scale * (a + a.transpose()) / Scalar(2),
                                    scale * (b - b.transpose()) / Scalar(2));
}

/// Random positive definite element of L_symp,s: complex form G G^dagger / n + shift I.
template <typename Scalar>
SymplecticOperator<Scalar> random_positive_symplectic_operator(Rng& rng, Index n, Scalar shift = 1) {
  ComplexMatrix<Scalar> g(n, n);
  g.real() = gaussian_matrix<Scalar>(rng, n, n);
  g.imag() = gaussian_matrix<Scalar>(rng, n, n);
  ComplexMatrix<Scalar> m = g * g.adjoint() / Scalar(n);
  m = (m + m.adjoint()) / Scalar(2);
  return SymplecticOperator<Scalar>(Matrix<Scalar>(m.real()) + shift * Matrix<Scalar>::Identity(n, n),
                                    Matrix<Scalar>(-m.imag()));
}

/// Random Hermitian positive semidefinite unit-trace matrix G G^dagger / tr.
/// rank < n yields a rank-deficient density matrix (rank 1 = pure state).
template <typename Scalar>
ComplexMatrix<Scalar> random_density_matrix(Rng& rng, Index n, Index rank = -1) {
  if (rank < 1 || rank > n) rank = n;
  ComplexMatrix<Scalar> g(n, rank);
  g.real() = gaussian_matrix<Scalar>(rng, n, rank);
  g.imag() = gaussian_matrix<Scalar>(rng, n, rank);
  ComplexMatrix<Scalar> d = g * g.adjoint();
  d /= d.trace().real();
  return (d + d.adjoint()) / Scalar(2);
}

/// Uniform point on the unit sphere of the 2n-dimensional real phase space.
template <typename Scalar>
PhaseVector<Scalar> random_unit_phase_vector(Rng& rng, Index n) {
  Vector<Scalar> v = gaussian_vector<Scalar>(rng, 2 * n);
  return PhaseVector<Scalar>::from_coords(v / v.norm());
}

}  // namespace pcsft

#endif  // PCSFT_RANDOM_HPP
