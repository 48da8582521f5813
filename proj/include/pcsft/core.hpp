#ifndef PCSFT_CORE_HPP
#define PCSFT_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace pcsft {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Vector<std::complex<Scalar>>;
template <typename Scalar>
using ComplexMatrix = Matrix<std::complex<Scalar>>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operator or matrix violates a structural requirement
/// (symmetry, antisymmetry, Hermiticity, commutation with J).
class StructureError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside its domain (alpha <= 0, negative bound, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefinite : public Error {
 public:
  using Error::Error;
};

/// Finite differences at the origin do not settle: the variable is not C^2 at 0.
class NonSmoothError : public Error {
 public:
  using Error::Error;
};

/// A sample produced a non-finite variable value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::int64_t sample_index)
      : Error(what), sample_index_(sample_index) {}
  std::int64_t sample_index() const { return sample_index_; }

 private:
  std::int64_t sample_index_;
};

/// Integration blow-up, NaN propagation or solver non-convergence.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Precision-dependent tolerances. The double values are the contract; the
// float values are the closest meaningful analogue in single precision.

template <typename Scalar>
constexpr Scalar structure_tolerance() {
  if constexpr (std::is_same_v<Scalar, float>) {
    return Scalar(2e-5);
  } else {
    return Scalar(1e-12);
  }
}

template <typename Scalar>
constexpr Scalar invariance_tolerance() {
  if constexpr (std::is_same_v<Scalar, float>) {
    return Scalar(1e-4);
  } else {
    return Scalar(1e-10);
  }
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// ---------------------------------------------------------------------------
// Parallelism. PCSFT_THREADS caps the worker count; results never depend on it.

inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PCSFT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

/// Runs body(i) for i in [0, count), distributing indices over worker threads.
/// body must write only to slot i of caller-owned storage.
template <typename Body>
void parallel_for(std::int64_t count, Body&& body) {
  const auto workers = static_cast<std::int64_t>(
      std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pcsft

#endif  // PCSFT_CORE_HPP
