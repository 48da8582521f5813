#ifndef PCSFT_PHASE_SPACE_HPP
#define PCSFT_PHASE_SPACE_HPP

// Truncated phase space Omega = Q x P, the symplectic operator J and the
// algebra of bounded operators commuting with J.
//
// Complex identification: a phase vector (q, p) is the complex vector
// q + i p. Under it J(q, p) = (p, -q) is multiplication by -i. The complex
// inner product is conjugate-linear in its first argument:
//   <u, v> = sum_k conj(u_k) v_k,   Re <u, v> = (q_u, q_v) + (p_u, p_v).
// A J-commuting operator [[R, T], [-T, R]] corresponds to M = R - i T.

#include "pcsft/core.hpp"

#include <cmath>
#include <string>
#include <variant>

namespace pcsft {

struct AbstractBasis {};

/// Periodic equispaced grid; site index is x-fastest.
struct SpatialGrid {
  int dimension = 1;
  int points_per_axis = 0;
  double box_length = 0.0;

  double spacing() const { return box_length / points_per_axis; }
  double cell_volume() const { return std::pow(spacing(), dimension); }
  double volume() const { return std::pow(box_length, dimension); }
};

class PhaseSpace {
 public:
  using Representation = std::variant<AbstractBasis, SpatialGrid>;

  static PhaseSpace abstract(Index n) {
    if (n < 1) throw DomainError("phase space dimension must be >= 1");
    return PhaseSpace(n, AbstractBasis{});
  }

  static PhaseSpace grid(int dimension, int points_per_axis, double box_length) {
    if (dimension < 1 || dimension > 3) throw DomainError("grid dimension must be 1, 2 or 3");
    if (points_per_axis < 1) throw DomainError("grid needs at least one point per axis");
    if (!(box_length > 0.0)) throw DomainError("box length must be positive");
    Index n = 1;
    for (int i = 0; i < dimension; ++i) n *= points_per_axis;
    return PhaseSpace(n, SpatialGrid{dimension, points_per_axis, box_length});
  }

  Index n() const { return n_; }
  Index real_dimension() const { return 2 * n_; }
  bool is_grid() const { return std::holds_alternative<SpatialGrid>(representation_); }
  const SpatialGrid& grid() const { return std::get<SpatialGrid>(representation_); }
  const Representation& representation() const { return representation_; }

  /// Quadrature weight of one site: the grid cell volume, or 1 for an abstract basis.
  double cell_volume() const { return is_grid() ? grid().cell_volume() : 1.0; }

  friend bool operator==(const PhaseSpace& a, const PhaseSpace& b) {
    if (a.n_ != b.n_ || a.is_grid() != b.is_grid()) return false;
    if (!a.is_grid()) return true;
    const auto& g = a.grid();
    const auto& h = b.grid();
    return g.dimension == h.dimension && g.points_per_axis == h.points_per_axis &&
           g.box_length == h.box_length;
  }

 private:
  PhaseSpace(Index n, Representation r) : n_(n), representation_(r) {}
  Index n_;
  Representation representation_;
};

// ---------------------------------------------------------------------------

/// A point psi = (q, p) stored as the stacked real vector [q; p].
template <typename Scalar>
class PhaseVector {
 public:
  using VectorType = Vector<Scalar>;

  PhaseVector() = default;
  explicit PhaseVector(Index n) : coords_(VectorType::Zero(2 * n)) {}

  PhaseVector(const VectorType& q, const VectorType& p) : coords_(q.size() + p.size()) {
    if (q.size() != p.size()) throw DimensionError("q and p must have the same length");
    coords_ << q, p;
    if (!coords_.allFinite()) throw DomainError("phase vector has non-finite entries");
  }

  static PhaseVector from_coords(VectorType coords) {
    if (coords.size() % 2 != 0) throw DimensionError("stacked phase vector must have even length");
    PhaseVector v;
    v.coords_ = std::move(coords);
    return v;
  }

  Index n() const { return coords_.size() / 2; }
  auto q() { return coords_.head(n()); }
  auto q() const { return coords_.head(n()); }
  auto p() { return coords_.tail(n()); }
  auto p() const { return coords_.tail(n()); }
  const VectorType& coords() const { return coords_; }
  VectorType& coords() { return coords_; }

  Scalar squared_norm() const { return coords_.squaredNorm(); }

  PhaseVector& operator+=(const PhaseVector& o) { coords_ += o.coords_; return *this; }
  PhaseVector& operator-=(const PhaseVector& o) { coords_ -= o.coords_; return *this; }
  PhaseVector& operator*=(Scalar s) { coords_ *= s; return *this; }
  friend PhaseVector operator+(PhaseVector a, const PhaseVector& b) { return a += b; }
  friend PhaseVector operator-(PhaseVector a, const PhaseVector& b) { return a -= b; }
  friend PhaseVector operator*(Scalar s, PhaseVector a) { return a *= s; }
  friend PhaseVector operator-(PhaseVector a) { a.coords_ = -a.coords_; return a; }
  friend bool operator==(const PhaseVector& a, const PhaseVector& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  VectorType coords_;
};

/// J (q, p) = (p, -q).
template <typename Scalar>
PhaseVector<Scalar> apply_J(const PhaseVector<Scalar>& v) {
  return PhaseVector<Scalar>(v.p(), -v.q());
}

/// The 2n x 2n matrix [[0, I], [-I, 0]].
template <typename Scalar>
Matrix<Scalar> symplectic_matrix(Index n) {
  Matrix<Scalar> J = Matrix<Scalar>::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Matrix<Scalar>::Identity(n, n);
  return J;
}

/// max |A J - J A| for a 2n x 2n matrix, computed blockwise.
template <typename Derived>
typename Derived::Scalar commutator_with_J(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  const Index n = A.rows() / 2;
  // A = [[a, b], [c, d]]:  AJ - JA = [[-b - c, a - d], [a - d, b + c]]
  Matrix<Scalar> s = A.topRightCorner(n, n) + A.bottomLeftCorner(n, n);
  Matrix<Scalar> d = A.topLeftCorner(n, n) - A.bottomRightCorner(n, n);
  return std::max(max_abs(s), max_abs(d));
}

/// Orthogonal projection onto J-commuting matrices: (H + J^T H J) / 2.
template <typename Scalar>
Matrix<Scalar> project_onto_symplectic(const Matrix<Scalar>& H) {
  const Index n = H.rows() / 2;
  Matrix<Scalar> out(2 * n, 2 * n);
  Matrix<Scalar> R = (H.topLeftCorner(n, n) + H.bottomRightCorner(n, n)) / Scalar(2);
  Matrix<Scalar> T = (H.topRightCorner(n, n) - H.bottomLeftCorner(n, n)) / Scalar(2);
  out << R, T, -T, R;
  return out;
}

// ---------------------------------------------------------------------------

/// Self-adjoint operator commuting with J, stored by its blocks:
/// the full operator is [[R, T], [-T, R]] with R symmetric, T antisymmetric.
template <typename Scalar>
class SymplecticOperator {
 public:
  using MatrixType = Matrix<Scalar>;

  SymplecticOperator() = default;

  /// Validates the block structure; stores the exactly (anti)symmetrized blocks.
  SymplecticOperator(const MatrixType& R, const MatrixType& T) {
    if (R.rows() != R.cols() || T.rows() != T.cols() || R.rows() != T.rows())
      throw DimensionError("R and T must be square and of equal size");
    const Scalar scale = std::max<Scalar>({Scalar(1), max_abs(R), max_abs(T)});
    const Scalar tol = structure_tolerance<Scalar>() * scale;
    if (max_abs(R - R.transpose()) > tol) throw StructureError("R block is not symmetric");
    if (max_abs(T + T.transpose()) > tol) throw StructureError("T block is not antisymmetric");
    if (!R.allFinite() || !T.allFinite()) throw DomainError("operator has non-finite entries");
    R_ = (R + R.transpose()) / Scalar(2);
    T_ = (T - T.transpose()) / Scalar(2);
  }

  static SymplecticOperator zero(Index n) {
    return SymplecticOperator(MatrixType::Zero(n, n), MatrixType::Zero(n, n));
  }
  static SymplecticOperator identity(Index n) {
    return SymplecticOperator(MatrixType::Identity(n, n), MatrixType::Zero(n, n));
  }
  static SymplecticOperator diagonal(const Vector<Scalar>& d) {
    return SymplecticOperator(d.asDiagonal().toDenseMatrix(), MatrixType::Zero(d.size(), d.size()));
  }

  /// From a real 2n x 2n matrix; rejects matrices that are not symmetric or
  /// do not commute with J.
  static SymplecticOperator from_real_matrix(const MatrixType& A) {
    if (A.rows() != A.cols() || A.rows() % 2 != 0)
      throw DimensionError("expected a square matrix of even size");
    const Scalar tol = structure_tolerance<Scalar>() * std::max(Scalar(1), max_abs(A));
    if (max_abs(A - A.transpose()) > tol) throw StructureError("matrix is not symmetric");
    if (commutator_with_J(A) > tol) throw StructureError("matrix does not commute with J");
    const Index n = A.rows() / 2;
    return SymplecticOperator((A.topLeftCorner(n, n) + A.bottomRightCorner(n, n)) / Scalar(2),
                              (A.topRightCorner(n, n) - A.bottomLeftCorner(n, n)) / Scalar(2));
  }

  Index n() const { return R_.rows(); }
  const MatrixType& R() const { return R_; }
  const MatrixType& T() const { return T_; }

  SymplecticOperator& operator+=(const SymplecticOperator& o) {
    R_ += o.R_;
    T_ += o.T_;
    return *this;
  }
  SymplecticOperator& operator*=(Scalar s) {
    R_ *= s;
    T_ *= s;
    return *this;
  }
  friend SymplecticOperator operator+(SymplecticOperator a, const SymplecticOperator& b) { return a += b; }
  friend SymplecticOperator operator-(SymplecticOperator a, const SymplecticOperator& b) {
    a.R_ -= b.R_;
    a.T_ -= b.T_;
    return a;
  }
  friend SymplecticOperator operator*(Scalar s, SymplecticOperator a) { return a *= s; }

 private:
  MatrixType R_;
  MatrixType T_;
};

/// [[R, T], [-T, R]].
template <typename Scalar>
Matrix<Scalar> assemble(const SymplecticOperator<Scalar>& op) {
  const Index n = op.n();
  Matrix<Scalar> A(2 * n, 2 * n);
  A << op.R(), op.T(), -op.T(), op.R();
  return A;
}

template <typename Scalar>
PhaseVector<Scalar> apply(const SymplecticOperator<Scalar>& op, const PhaseVector<Scalar>& v) {
  Vector<Scalar> q = op.R() * v.q() + op.T() * v.p();
  Vector<Scalar> p = -op.T() * v.q() + op.R() * v.p();
  return PhaseVector<Scalar>(q, p);
}

// ---------------------------------------------------------------------------

/// Hermitian complex n x n operator on Omega_c.
template <typename Scalar>
class ComplexOperator {
 public:
  using MatrixType = ComplexMatrix<Scalar>;

  ComplexOperator() = default;
  explicit ComplexOperator(const MatrixType& M) {
    if (M.rows() != M.cols()) throw DimensionError("complex operator must be square");
    const Scalar scale = std::max(Scalar(1), max_abs(M));
    if (max_abs(M - M.adjoint()) > structure_tolerance<Scalar>() * scale)
      throw StructureError("complex operator is not Hermitian");
    M_ = (M + M.adjoint()) / Scalar(2);
  }

  static ComplexOperator zero(Index n) { return ComplexOperator(MatrixType::Zero(n, n)); }

  Index n() const { return M_.rows(); }
  const MatrixType& matrix() const { return M_; }

 private:
  MatrixType M_;
};

/// M = R - i T.
template <typename Scalar>
ComplexOperator<Scalar> to_complex_operator(const SymplecticOperator<Scalar>& op) {
  ComplexMatrix<Scalar> M(op.n(), op.n());
  M.real() = op.R();
  M.imag() = -op.T();
  return ComplexOperator<Scalar>(M);
}

/// Inverse of to_complex_operator: R = Re M, T = -Im M.
template <typename Scalar>
SymplecticOperator<Scalar> realify(const ComplexOperator<Scalar>& M) {
  return SymplecticOperator<Scalar>(M.matrix().real(), -M.matrix().imag());
}

/// Real 2n x 2n form [[Re M, -Im M], [Im M, Re M]] of any complex n x n matrix.
template <typename Scalar>
Matrix<Scalar> realify_matrix(const ComplexMatrix<Scalar>& M) {
  const Index n = M.rows();
  Matrix<Scalar> A(2 * n, 2 * n);
  A << M.real(), -M.imag(), M.imag(), M.real();
  return A;
}

/// Complex n x n form R - i T of a J-commuting real 2n x 2n matrix
/// (uses the J-projected blocks).
template <typename Scalar>
ComplexMatrix<Scalar> complexify_matrix(const Matrix<Scalar>& A) {
  const Index n = A.rows() / 2;
  ComplexMatrix<Scalar> M(n, n);
  M.real() = (A.topLeftCorner(n, n) + A.bottomRightCorner(n, n)) / Scalar(2);
  M.imag() = -(A.topRightCorner(n, n) - A.bottomLeftCorner(n, n)) / Scalar(2);
  return M;
}

// ---------------------------------------------------------------------------
// Complex representation of vectors.

template <typename Scalar>
ComplexVector<Scalar> to_complex(const PhaseVector<Scalar>& v) {
  ComplexVector<Scalar> z(v.n());
  z.real() = v.q();
  z.imag() = v.p();
  return z;
}

template <typename Scalar>
PhaseVector<Scalar> to_phase_vector(const ComplexVector<Scalar>& z) {
  return PhaseVector<Scalar>(z.real(), z.imag());
}

/// <u, v> = sum conj(u_k) v_k on Omega_c.
template <typename Scalar>
std::complex<Scalar> complex_inner(const PhaseVector<Scalar>& u, const PhaseVector<Scalar>& v) {
  if (u.n() != v.n()) throw DimensionError("complex_inner: dimension mismatch");
  return to_complex(u).dot(to_complex(v));  // Eigen's dot conjugates the first argument
}

template <typename Scalar>
Scalar real_inner(const PhaseVector<Scalar>& u, const PhaseVector<Scalar>& v) {
  if (u.n() != v.n()) throw DimensionError("real_inner: dimension mismatch");
  return u.coords().dot(v.coords());
}

}  // namespace pcsft

#endif  // PCSFT_PHASE_SPACE_HPP
