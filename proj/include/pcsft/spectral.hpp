#ifndef PCSFT_SPECTRAL_HPP
#define PCSFT_SPECTRAL_HPP

// Fourier machinery for periodic grids: separable N-d FFT on top of
// Eigen's FFT module, wavenumbers and the spectral Laplacian symbol.

#include "pcsft/phase_space.hpp"

#include <unsupported/Eigen/FFT>

#include <numbers>
#include <vector>

namespace pcsft {

template <typename Scalar>
class SpectralGrid {
 public:
  using Complex = std::complex<Scalar>;

  explicit SpectralGrid(const PhaseSpace& space) : space_(space) {
    if (!space.is_grid()) throw DomainError("spectral operations need a spatial grid");
    const auto& g = space.grid();
    const int N = g.points_per_axis;
    axis_k_.resize(N);
    const Scalar dk = Scalar(2 * std::numbers::pi / g.box_length);
    for (int j = 0; j < N; ++j) axis_k_(j) = dk * Scalar(j <= N / 2 ? j : j - N);
    k_squared_ = Vector<Scalar>::Zero(space.n());
    for (Index idx = 0; idx < space.n(); ++idx) {
      Index rest = idx;
      for (int axis = 0; axis < g.dimension; ++axis) {
        const Scalar k = axis_k_(rest % N);
        k_squared_(idx) += k * k;
        rest /= N;
      }
    }
  }

  const PhaseSpace& space() const { return space_; }
  const Vector<Scalar>& k_squared() const { return k_squared_; }
  const Vector<Scalar>& axis_wavenumbers() const { return axis_k_; }

  /// Grid coordinate of site index `idx` along `axis`, centered on the box: [-L/2, L/2).
  Scalar coordinate(Index idx, int axis) const {
    const auto& g = space_.grid();
    Index rest = idx;
    for (int a = 0; a < axis; ++a) rest /= g.points_per_axis;
    rest %= g.points_per_axis;
    return Scalar(-g.box_length / 2 + g.spacing() * double(rest));
  }

  ComplexVector<Scalar> forward(const ComplexVector<Scalar>& f) const { return transform(f, false); }
  /// Inverse including the 1/N normalization.
  ComplexVector<Scalar> inverse(const ComplexVector<Scalar>& F) const { return transform(F, true); }

  /// IFFT(symbol .* FFT(f)).
  ComplexVector<Scalar> apply_symbol(const ComplexVector<Scalar>& f, const Vector<Scalar>& symbol) const {
    ComplexVector<Scalar> F = forward(f);
    F.array() *= symbol.array().template cast<Complex>();
    return inverse(F);
  }

 private:
  ComplexVector<Scalar> transform(const ComplexVector<Scalar>& in, bool inverse) const {
    const auto& g = space_.grid();
    const Index N = g.points_per_axis;
    if (in.size() != space_.n()) throw DimensionError("field size does not match the grid");
    ComplexVector<Scalar> out = in;
    std::vector<Complex> line(static_cast<std::size_t>(N)), res;
    Index stride = 1;
    for (int axis = 0; axis < g.dimension; ++axis) {
      const Index lines = space_.n() / N;
      for (Index l = 0; l < lines; ++l) {
        // decompose l into (inner < stride, outer) and address the line
        const Index inner = l % stride;
        const Index outer = l / stride;
        const Index base = inner + outer * stride * N;
        for (Index j = 0; j < N; ++j) line[static_cast<std::size_t>(j)] = out(base + j * stride);
        if (inverse) {
          fft_.inv(res, line);
        } else {
          fft_.fwd(res, line);
        }
        for (Index j = 0; j < N; ++j) out(base + j * stride) = res[static_cast<std::size_t>(j)];
      }
      stride *= N;
    }
    return out;
  }

  PhaseSpace space_;
  Vector<Scalar> axis_k_;
  Vector<Scalar> k_squared_;
  mutable Eigen::FFT<Scalar> fft_;
};

}  // namespace pcsft

#endif  // PCSFT_SPECTRAL_HPP
