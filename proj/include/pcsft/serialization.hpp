#ifndef PCSFT_SERIALIZATION_HPP
#define PCSFT_SERIALIZATION_HPP

// JSON for states, variables and reports; CSV tables; binary field snapshots.
//
// Snapshot file layout (all integers unsigned, everything little-endian):
//
//   offset  size  field
//   0       8     magic "PCSFSNAP"
//   8       4     version (1)
//   12      4     dtype: 1 = complex128, 2 = complex64
//   16      4     spatial dimension d (0 = abstract basis)
//   20      4     points per axis (abstract basis: n)
//   24      8     box length (float64; 0 on an abstract basis)
//   32      4     sample stride (steps between frames)
//   36      4     frame count
//   40      ...   frames: float64 time, then n values as (re, im) pairs
//
// n = points_per_axis^d on a grid.

#include "pcsft/dequantization.hpp"
#include "pcsft/dynamics.hpp"
#include "pcsft/states.hpp"
#include "pcsft/variables.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

namespace pcsft {

using json = nlohmann::json;

/// Shortest decimal representation that round-trips in the value's own precision.
template <typename Scalar>
std::string format_number(Scalar x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Matrices

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<double>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
Matrix<Scalar> matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw DomainError("ragged matrix rows");
    for (Index c = 0; c < cols; ++c) m(i, c) = static_cast<Scalar>(row.at(static_cast<std::size_t>(c)).get<double>());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Phase space and states

inline json to_json(const PhaseSpace& space) {
  if (!space.is_grid()) return {{"kind", "abstract-basis"}};
  const auto& g = space.grid();
  return {{"kind", "spatial-grid"},
          {"dimension", g.dimension},
          {"points_per_axis", g.points_per_axis},
          {"box_length", g.box_length}};
}

inline PhaseSpace phase_space_from_json(const json& j, Index n) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "abstract-basis") return PhaseSpace::abstract(n);
  if (kind == "spatial-grid") {
    PhaseSpace s = PhaseSpace::grid(j.at("dimension").get<int>(), j.at("points_per_axis").get<int>(),
                                    j.at("box_length").get<double>());
    if (s.n() != n) throw DimensionError("grid size does not match n");
    return s;
  }
  throw DomainError("unknown representation '" + kind + "'");
}

/// {n, representation, alpha, B (row-major), name}.
template <typename Scalar>
json to_json(const GaussianState<Scalar>& state) {
  json flat = json::array();
  const auto& B = state.covariance();
  for (Index i = 0; i < B.rows(); ++i)
    for (Index j = 0; j < B.cols(); ++j) flat.push_back(static_cast<double>(B(i, j)));
  return {{"n", state.n()},
          {"representation", to_json(state.space())},
          {"alpha", static_cast<double>(state.alpha())},
          {"B", std::move(flat)},
          {"name", state.name()}};
}

template <typename Scalar>
GaussianState<Scalar> state_from_json(const json& j) {
  const Index n = j.at("n").get<Index>();
  const PhaseSpace space = phase_space_from_json(j.at("representation"), n);
  const json& flat = j.at("B");
  if (!flat.is_array() || static_cast<Index>(flat.size()) != 4 * n * n)
    throw DimensionError("B must hold (2n)^2 row-major entries");
  Matrix<Scalar> B(2 * n, 2 * n);
  for (Index i = 0; i < 2 * n; ++i)
    for (Index c = 0; c < 2 * n; ++c) B(i, c) = static_cast<Scalar>(flat.at(static_cast<std::size_t>(i * 2 * n + c)).get<double>());
  return GaussianState<Scalar>(space, B, static_cast<Scalar>(j.at("alpha").get<double>()),
                               j.value("name", std::string{}));
}

/// Complex matrix as {"re": [[..]], "im": [[..]]}.
template <typename Scalar>
json complex_matrix_to_json(const ComplexMatrix<Scalar>& M) {
  return {{"re", matrix_to_json(M.real())}, {"im", matrix_to_json(M.imag())}};
}

template <typename Scalar>
ComplexMatrix<Scalar> complex_matrix_from_json(const json& j) {
  Matrix<Scalar> re = matrix_from_json<Scalar>(j.at("re"));
  Matrix<Scalar> im = j.contains("im") ? matrix_from_json<Scalar>(j.at("im")) : Matrix<Scalar>::Zero(re.rows(), re.cols());
  if (re.rows() != im.rows() || re.cols() != im.cols()) throw DimensionError("re and im parts differ in shape");
  ComplexMatrix<Scalar> M(re.rows(), re.cols());
  M.real() = re;
  M.imag() = im;
  return M;
}

// ---------------------------------------------------------------------------
// Variables

/// Named smooth J-invariant variables with f(0) = 0 (functions of ||psi||^2).
template <typename Scalar>
ClassicalVariable<Scalar> named_smooth(const std::string& name, Index n) {
  const Matrix<Scalar> two = Scalar(2) * Matrix<Scalar>::Identity(2 * n, 2 * n);
  if (name == "norm2-exp") {
    return smooth<Scalar>(n, name, [](const PhaseVector<Scalar>& v) {
      const Scalar r = v.squared_norm();
      return r * std::exp(-r);
    }, two);
  }
  if (name == "log1p-norm2") {
    return smooth<Scalar>(n, name, [](const PhaseVector<Scalar>& v) { return std::log1p(v.squared_norm()); }, two);
  }
  if (name == "sinh-norm2") {
    return smooth<Scalar>(n, name, [](const PhaseVector<Scalar>& v) { return std::sinh(v.squared_norm()); }, two);
  }
  throw DomainError("unknown smooth variable '" + name + "'");
}

/// Operator payloads: "identity", "zero", {"diagonal": [..]}, {"R": .., "T": ..},
/// {"random": {"seed": s, "scale": x}}, {"random-positive": {"seed": s, "shift": x}}.
template <typename Scalar>
SymplecticOperator<Scalar> operator_from_json(const json& j, Index n) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "identity") return SymplecticOperator<Scalar>::identity(n);
    if (s == "zero") return SymplecticOperator<Scalar>::zero(n);
    throw DomainError("unknown operator name '" + s + "'");
  }
  if (!j.is_object()) throw DomainError("operator must be a name or an object");
  for (const auto& [key, _] : j.items())
    if (key != "R" && key != "T" && key != "diagonal" && key != "random" && key != "random-positive")
      throw DomainError("unknown operator key '" + key + "'");
  if (j.contains("diagonal")) {
    const auto d = j.at("diagonal").get<std::vector<double>>();
    if (static_cast<Index>(d.size()) != n) throw DimensionError("diagonal length must equal n");
    Vector<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(d[static_cast<std::size_t>(i)]);
    return SymplecticOperator<Scalar>::diagonal(v);
  }
  if (j.contains("random")) {
    const json& r = j.at("random");
    Rng rng = make_rng(r.at("seed").get<std::uint64_t>(), 0x0b);
    return random_symplectic_operator<Scalar>(rng, n, static_cast<Scalar>(r.value("scale", 1.0)));
  }
  if (j.contains("random-positive")) {
    const json& r = j.at("random-positive");
    Rng rng = make_rng(r.at("seed").get<std::uint64_t>(), 0x0c);
    return random_positive_symplectic_operator<Scalar>(rng, n, static_cast<Scalar>(r.value("shift", 1.0)));
  }
  Matrix<Scalar> R = matrix_from_json<Scalar>(j.at("R"));
  Matrix<Scalar> T = j.contains("T") ? matrix_from_json<Scalar>(j.at("T")) : Matrix<Scalar>::Zero(R.rows(), R.cols());
  if (R.rows() != n) throw DimensionError("operator size must equal n");
  return SymplecticOperator<Scalar>(R, T);
}

template <typename Scalar>
json to_json(const SymplecticOperator<Scalar>& op) {
  return {{"R", matrix_to_json(op.R())}, {"T", matrix_to_json(op.T())}};
}

template <typename Scalar>
json to_json(const ClassicalVariable<Scalar>& f) {
  json terms = json::array();
  for (const auto& t : f.terms()) {
    terms.push_back(std::visit(
        [](const auto& term) -> json {
          using T = std::decay_t<decltype(term)>;
          if constexpr (std::is_same_v<T, QuadraticTerm<Scalar>>) {
            return {{"type", "quadratic"}, {"coeff", double(term.coeff)}, {"operator", to_json(term.op)}};
          } else if constexpr (std::is_same_v<T, FactoredQuarticTerm<Scalar>>) {
            return {{"type", "factored-quartic"},
                    {"coeff", double(term.coeff)},
                    {"gamma1", to_json(term.gamma1)},
                    {"gamma2", to_json(term.gamma2)}};
          } else if constexpr (std::is_same_v<T, KernelQuarticTerm<Scalar>>) {
            std::vector<double> w(term.weights.data(), term.weights.data() + term.weights.size());
            return {{"type", "kernel-quartic"}, {"coeff", double(term.coeff)}, {"weights", w}};
          } else {
            return {{"type", "smooth"}, {"name", term.name}};
          }
        },
        t));
  }
  return {{"n", f.n()}, {"terms", std::move(terms)}};
}

/// Accepts either {"n": n, "terms": [...]} or a bare term list with n given.
template <typename Scalar>
ClassicalVariable<Scalar> variable_from_json(const json& j, Index n = 0, const PhaseSpace* space = nullptr) {
  const json* terms = &j;
  if (j.is_object()) {
    n = j.at("n").get<Index>();
    terms = &j.at("terms");
  }
  if (n < 1) throw DimensionError("variable dimension n must be given");
  if (!terms->is_array()) throw DomainError("terms must be an array");
  ClassicalVariable<Scalar> f(n);
  for (const json& t : *terms) {
    const std::string type = t.at("type").get<std::string>();
    auto allow = [&t](std::initializer_list<const char*> keys) {
      for (const auto& [key, _] : t.items()) {
        bool ok = false;
        for (const char* k : keys) ok = ok || key == k;
        if (!ok) throw DomainError("unknown key '" + key + "' in term");
      }
    };
    const Scalar c = static_cast<Scalar>(t.value("coeff", 1.0));
    if (type == "quadratic") {
      allow({"type", "coeff", "operator"});
      f += quadratic<Scalar>(c, operator_from_json<Scalar>(t.at("operator"), n));
    } else if (type == "factored-quartic") {
      allow({"type", "coeff", "gamma1", "gamma2"});
      f += factored_quartic<Scalar>(c, operator_from_json<Scalar>(t.at("gamma1"), n),
                                    operator_from_json<Scalar>(t.at("gamma2"), n));
    } else if (type == "kernel-quartic") {
      allow({"type", "coeff", "weights"});
      Vector<Scalar> w = Vector<Scalar>::Constant(n, Scalar(space ? space->cell_volume() : 1.0));
      if (t.contains("weights")) {
        const auto v = t.at("weights").get<std::vector<double>>();
        if (static_cast<Index>(v.size()) != n) throw DimensionError("weights length must equal n");
        for (Index i = 0; i < n; ++i) w(i) = static_cast<Scalar>(v[static_cast<std::size_t>(i)]);
      }
      f.add(KernelQuarticTerm<Scalar>{c, w});
    } else if (type == "smooth") {
      allow({"type", "coeff", "name"});
      f += c * named_smooth<Scalar>(t.at("name").get<std::string>(), n);
    } else {
      throw DomainError("unknown term type '" + type + "'");
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Reports

template <typename Scalar>
void write_csv(std::ostream& os, const AsymptoticsReport<Scalar>& r) {
  os << "alpha,classical,classical_stderr,quantum_term,remainder\n";
  for (std::size_t i = 0; i < r.alphas.size(); ++i) {
    os << format_number(r.alphas[i]) << ',' << format_number(r.classical[i].value) << ','
       << format_number(r.classical[i].std_error) << ',' << format_number(r.quantum_term[i]) << ','
       << format_number(r.remainder[i]) << '\n';
  }
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <typename Scalar>
json to_json(const AsymptoticsReport<Scalar>& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.alphas.size(); ++i) {
    rows.push_back({{"alpha", double(r.alphas[i])},
                    {"classical", double(r.classical[i].value)},
                    {"classical_stderr", double(r.classical[i].std_error)},
                    {"count", r.classical[i].count},
                    {"quantum_term", double(r.quantum_term[i])},
                    {"remainder", double(r.remainder[i])},
                    {"remainder_stderr", double(r.remainder_stderr[i])},
                    {"fitted", static_cast<bool>(r.fitted_point[i])}});
  }
  return {{"path", to_string(r.path)},
          {"status", to_string(r.status)},
          {"fitted_slope", number_or_null(double(r.fitted_slope))},
          {"fitted_intercept", number_or_null(double(r.fitted_intercept))},
          {"quantum_average", double(r.quantum_average)},
          {"consistency_residual", double(r.consistency_residual)},
          {"points", std::move(rows)}};
}

template <typename Scalar>
void write_csv(std::ostream& os, const Trajectory<Scalar>& traj) {
  os << "t,norm,energy\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    os << format_number(traj.times[i]) << ',' << format_number(traj.norms[i]) << ','
       << format_number(traj.energies[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Snapshots

struct SnapshotHeader {
  std::uint32_t dtype = 1;
  std::uint32_t dimension = 0;
  std::uint32_t points_per_axis = 0;
  double box_length = 0;
  std::uint32_t stride = 1;
  std::uint32_t frames = 0;

  Index values_per_frame() const {
    Index n = 1;
    for (std::uint32_t i = 0; i < std::max<std::uint32_t>(dimension, 1); ++i) n *= points_per_axis;
    return n;
  }
};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw Error("truncated snapshot file");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

template <typename Scalar>
void write_snapshots(std::ostream& os, const PhaseSpace& space, const Trajectory<Scalar>& traj, std::uint32_t stride) {
  if (traj.states.size() != traj.times.size()) throw Error("trajectory does not hold its states");
  constexpr bool single = std::is_same_v<Scalar, float>;
  os.write("PCSFSNAP", 8);
  detail::put_le<std::uint32_t>(os, 1);
  detail::put_le<std::uint32_t>(os, single ? 2 : 1);
  detail::put_le<std::uint32_t>(os, space.is_grid() ? std::uint32_t(space.grid().dimension) : 0u);
  detail::put_le<std::uint32_t>(os, space.is_grid() ? std::uint32_t(space.grid().points_per_axis)
                                                   : std::uint32_t(space.n()));
  detail::put_le<double>(os, space.is_grid() ? space.grid().box_length : 0.0);
  detail::put_le<std::uint32_t>(os, stride);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(traj.times.size()));
  for (std::size_t f = 0; f < traj.times.size(); ++f) {
    detail::put_le<double>(os, double(traj.times[f]));
    for (const auto& z : traj.states[f]) {
      detail::put_le<Scalar>(os, z.real());
      detail::put_le<Scalar>(os, z.imag());
    }
  }
}

template <typename Scalar>
struct Snapshots {
  SnapshotHeader header;
  std::vector<double> times;
  std::vector<ComplexVector<Scalar>> frames;
};

template <typename Scalar>
Snapshots<Scalar> read_snapshots(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, "PCSFSNAP", 8) != 0) throw Error("not a snapshot file");
  if (detail::get_le<std::uint32_t>(is) != 1) throw Error("unsupported snapshot version");
  Snapshots<Scalar> out;
  auto& h = out.header;
  h.dtype = detail::get_le<std::uint32_t>(is);
  h.dimension = detail::get_le<std::uint32_t>(is);
  h.points_per_axis = detail::get_le<std::uint32_t>(is);
  h.box_length = detail::get_le<double>(is);
  h.stride = detail::get_le<std::uint32_t>(is);
  h.frames = detail::get_le<std::uint32_t>(is);
  if (h.dtype != 1 && h.dtype != 2) throw Error("unknown snapshot dtype");
  const Index n = h.values_per_frame();
  for (std::uint32_t f = 0; f < h.frames; ++f) {
    out.times.push_back(detail::get_le<double>(is));
    ComplexVector<Scalar> z(n);
    for (Index i = 0; i < n; ++i) {
      if (h.dtype == 1) {
        const double re = detail::get_le<double>(is);
        const double im = detail::get_le<double>(is);
        z(i) = {Scalar(re), Scalar(im)};
      } else {
        const float re = detail::get_le<float>(is);
        const float im = detail::get_le<float>(is);
        z(i) = {Scalar(re), Scalar(im)};
      }
    }
    out.frames.push_back(std::move(z));
  }
  return out;
}

}  // namespace pcsft

#endif  // PCSFT_SERIALIZATION_HPP
