#ifndef PCSFT_UNITS_HPP
#define PCSFT_UNITS_HPP

// Dimensional bookkeeping for Hamilton functions of the quantum field Psi
// (|Psi|^2 ~ 1/L^d) and of the prequantum field psi = sqrt(alpha) Psi
// (|psi|^2 ~ E/L^d, so alpha carries the dimension of energy).
//
// Dimensions are exponent vectors over (energy, length, time) with rational
// entries; they are assigned when a Hamiltonian is tagged with units and
// checked once, never per evaluation.

#include "pcsft/dynamics.hpp"
#include "pcsft/random.hpp"

#include <boost/rational.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pcsft::units {

using Exponent = boost::rational<int>;

struct Dimension {
  Exponent energy{0};
  Exponent length{0};
  Exponent time{0};

  friend Dimension operator+(Dimension a, const Dimension& b) {
    a.energy += b.energy;
    a.length += b.length;
    a.time += b.time;
    return a;
  }
  friend Dimension operator-(Dimension a, const Dimension& b) {
    a.energy -= b.energy;
    a.length -= b.length;
    a.time -= b.time;
    return a;
  }
  friend Dimension operator*(int k, Dimension a) {
    a.energy *= k;
    a.length *= k;
    a.time *= k;
    return a;
  }
  friend bool operator==(const Dimension&, const Dimension&) = default;

  bool dimensionless() const { return energy.numerator() == 0 && length.numerator() == 0 && time.numerator() == 0; }

  std::string to_string() const {
    auto show = [](const Exponent& e) {
      return e.denominator() == 1 ? std::to_string(e.numerator())
                                  : std::to_string(e.numerator()) + "/" + std::to_string(e.denominator());
    };
    return "E^" + show(energy) + " L^" + show(length) + " T^" + show(time);
  }
};

inline Dimension dimensionless() { return {}; }
inline Dimension energy() { return {Exponent(1), Exponent(0), Exponent(0)}; }
inline Dimension length() { return {Exponent(0), Exponent(1), Exponent(0)}; }
inline Dimension time() { return {Exponent(0), Exponent(0), Exponent(1)}; }

// ---------------------------------------------------------------------------

enum class UnitMode { natural, physical };

/// Energies are in joules in physical mode, in units of E_P in natural mode.
struct UnitSystem {
  UnitMode mode = UnitMode::natural;
  double h = 1.0;              // reduced Planck constant (action)
  double planck_energy = 1.0;  // E_P
  double planck_time = 1.0;    // t_P
  double electron_volt = 1.0;  // one eV in internal energy units

  static UnitSystem natural() { return {}; }
  static UnitSystem physical() {
    return {UnitMode::physical, 1.054571817e-34, 1.9561e9, 5.391247e-44, 1.602176634e-19};
  }

  void validate() const {
    if (!(h > 0 && planck_energy > 0 && planck_time > 0 && electron_volt > 0))
      throw DomainError("unit constants must be positive");
    if (mode == UnitMode::natural && (h != 1.0 || planck_energy != 1.0 || planck_time != 1.0))
      throw DomainError("natural units fix h = E_P = t_P = 1");
  }
};

struct AlphaBound {
  double alpha_upper_bound_ev = 0;
  std::string note;
};

/// Identifying the log-nonlinearity strength with the dispersion (b = alpha)
/// turns an experimental bound |b| <= b_bound into alpha <= b_bound.
inline AlphaBound alpha_bound_from_b(double b_bound_ev) {
  if (!(b_bound_ev >= 0) || !std::isfinite(b_bound_ev)) throw DomainError("b bound must be a non-negative number");
  return {b_bound_ev, "upper bound only: alpha may be substantially smaller"};
}

// ---------------------------------------------------------------------------

enum class FieldForm { quantum, prequantum };

/// One term  coefficient * (|field|^2)^field_power * (d/dx)^derivatives [* d^d x]
/// optionally multiplied by ln(log_argument_scale * |field|^2).
struct DimensionedTerm {
  std::string name;
  Dimension coefficient;
  int field_power = 1;
  int derivatives = 0;
  bool integrated = false;
  std::optional<Dimension> log_argument_scale;
};

template <typename Scalar>
struct HamiltonianWithUnits {
  std::string name;
  Hamiltonian<Scalar> hamiltonian;
  UnitSystem units;
  FieldForm form = FieldForm::quantum;
  int spatial_dimension = 0;  // 0 on an abstract basis
  std::vector<DimensionedTerm> terms;
};

/// Dimension of |field|^2.
inline Dimension field_density(FieldForm form, int spatial_dimension) {
  Dimension d = (-spatial_dimension) * length();
  if (form == FieldForm::prequantum) d = d + energy();
  return d;
}

/// Canonical dimensions of every term of a Hamiltonian in the given form.
template <typename Scalar>
HamiltonianWithUnits<Scalar> with_units(std::string name, Hamiltonian<Scalar> H, const UnitSystem& units,
                                        FieldForm form) {
  units.validate();
  HamiltonianWithUnits<Scalar> out;
  out.name = std::move(name);
  out.units = units;
  out.form = form;
  const PhaseSpace space = hamiltonian_space(H);
  out.spatial_dimension = space.is_grid() ? space.grid().dimension : 0;
  const int d = out.spatial_dimension;
  const bool pre = form == FieldForm::prequantum;
  // prequantum coefficients carry an extra 1/E_P, and each quartic an extra 1/alpha
  const Dimension linear_coeff = pre ? dimensionless() : energy();
  const Dimension kinetic_coeff = (pre ? dimensionless() : energy()) + 2 * length();
  const Dimension quartic_coeff = (pre ? dimensionless() - energy() : energy()) + d * length();

  auto grid_terms = [&](std::vector<DimensionedTerm>& terms) {
    terms.push_back({"kinetic", kinetic_coeff, 1, 2, true, std::nullopt});
    terms.push_back({"potential", linear_coeff, 1, 0, true, std::nullopt});
  };
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, QuadraticHamiltonian<Scalar>>) {
          out.terms.push_back({"quadratic", linear_coeff, 1, 0, false, std::nullopt});
        } else if constexpr (std::is_same_v<T, CubicNLS<Scalar>>) {
          grid_terms(out.terms);
          out.terms.push_back({"quartic", quartic_coeff, 2, 0, true, std::nullopt});
        } else if constexpr (std::is_same_v<T, BilinearHamiltonian<Scalar>>) {
          out.terms.push_back({"quadratic", linear_coeff, 1, 0, false, std::nullopt});
          out.terms.push_back({"bilinear-quartic", quartic_coeff, 2, 0, false, std::nullopt});
        } else if constexpr (std::is_same_v<T, LogNLS<Scalar>>) {
          grid_terms(out.terms);
          // c = a^d ~ L^d in the quantum form, a^d / alpha in the prequantum form
          const Dimension scale = d * length() - (pre ? energy() : dimensionless());
          out.terms.push_back({"log", linear_coeff, 1, 0, true, scale});
        } else {
          if (std::holds_alternative<GridLinear<Scalar>>(h.linear)) {
            grid_terms(out.terms);
          } else {
            out.terms.push_back({"quadratic", linear_coeff, 1, 0, false, std::nullopt});
          }
          // G(s) ~ F * s with F an energy (a potential) in the quantum form
          out.terms.push_back({"local-F", linear_coeff, 1, 0, d > 0, std::nullopt});
        }
      },
      H);
  out.hamiltonian = std::move(H);
  return out;
}

struct TermDimensionReport {
  std::string name;
  Dimension result;
  bool ok = false;
  std::string problem;
};

struct DimensionReport {
  std::vector<TermDimensionReport> terms;
  bool ok() const {
    for (const auto& t : terms)
      if (!t.ok) return false;
    return true;
  }
};

template <typename Scalar>
DimensionReport dimension_report(const HamiltonianWithUnits<Scalar>& H) {
  DimensionReport report;
  const Dimension density = field_density(H.form, H.spatial_dimension);
  for (const auto& term : H.terms) {
    TermDimensionReport r;
    r.name = term.name;
    r.result = term.coefficient + term.field_power * density + term.derivatives * (dimensionless() - length());
    if (term.integrated) r.result = r.result + H.spatial_dimension * length();
    r.ok = r.result == energy();
    if (!r.ok) r.problem = "evaluates to " + r.result.to_string() + ", expected energy";
    if (term.log_argument_scale) {
      const Dimension arg = *term.log_argument_scale + density;
      if (!arg.dimensionless()) {
        r.ok = false;
        if (!r.problem.empty()) r.problem += "; ";
        r.problem += "logarithm of a dimensional quantity (" + arg.to_string() + ")";
      }
    }
    report.terms.push_back(std::move(r));
  }
  return report;
}

/// Verifies that every term evaluates to an energy and every logarithm has a
/// dimensionless argument. Throws DimensionError naming the offending terms.
template <typename Scalar>
DimensionReport dimension_check(const HamiltonianWithUnits<Scalar>& H) {
  if (H.units.mode != UnitMode::physical) throw DomainError("dimension_check needs physical units");
  DimensionReport report = dimension_report(H);
  if (!report.ok()) {
    std::string msg = "dimension mismatch in '" + H.name + "':";
    for (const auto& t : report.terms)
      if (!t.ok) msg += " [" + t.name + ": " + t.problem + "]";
    throw DimensionError(msg);
  }
  return report;
}

// ---------------------------------------------------------------------------

/// Physical-mode presets for every Hamiltonian kind in both field forms: an
/// electron on a 1 nm periodic line, alpha at the 1e-15 eV bound.
template <typename Scalar>
std::vector<HamiltonianWithUnits<Scalar>> physical_presets(const UnitSystem& units = UnitSystem::physical()) {
  const Scalar ev = Scalar(units.electron_volt);
  const Scalar mass = Scalar(9.1093837015e-31);
  const Scalar kinetic = Scalar(units.h * units.h / 2) / mass;  // h^2 / 2m
  const Scalar alpha = Scalar(1e-15) * ev;
  const Scalar a = Scalar(1e-10);
  const PhaseSpace line = PhaseSpace::grid(1, 64, 1e-9);
  GridLinear<Scalar> lin = grid_linear<Scalar>(line, Vector<Scalar>::Constant(line.n(), Scalar(0.1) * ev), kinetic);

  pcsft::Rng rng = pcsft::make_rng(2024);
  const auto H4 = random_symplectic_operator<Scalar>(rng, 4, ev);
  const auto G = random_symplectic_operator<Scalar>(rng, 4, Scalar(1));

  std::vector<std::pair<std::string, Hamiltonian<Scalar>>> quantum{
      {"quadratic", QuadraticHamiltonian<Scalar>{H4}},
      {"cubic-nls", CubicNLS<Scalar>{lin, Scalar(1e-3) * ev * Scalar(1e-9)}},
      {"bilinear", BilinearHamiltonian<Scalar>{H4, Scalar(1e-3) * ev, G, SymplecticOperator<Scalar>::identity(4)}},
      {"log-nls", make_log_nls<Scalar>(lin, alpha, a)},
      {"general-f", GeneralF<Scalar>{lin, Nonlinearity<Scalar>::linear(Scalar(1e-3) * ev * Scalar(1e-9))}},
  };
  std::vector<HamiltonianWithUnits<Scalar>> out;
  for (auto& [name, H] : quantum) {
    Hamiltonian<Scalar> pre = prequantum_form<Scalar>(H, alpha, Scalar(units.planck_energy));
    out.push_back(with_units<Scalar>(name + "/quantum", std::move(H), units, FieldForm::quantum));
    out.push_back(with_units<Scalar>(name + "/prequantum", std::move(pre), units, FieldForm::prequantum));
  }
  return out;
}

}  // namespace pcsft::units

#endif  // PCSFT_UNITS_HPP
