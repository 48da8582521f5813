#include <doctest.h>

#include "pcsft/serialization.hpp"

#include <sstream>

using namespace pcsft;

TEST_CASE("numbers round-trip through their shortest text") {
  CHECK(format_number(1e-15) == "1e-15");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(0.1f) == "0.1");
  CHECK(format_number(std::nan("")) == "nan");
  Rng rng = make_rng(41);
  for (int i = 0; i < 100; ++i) {
    const double x = gaussian_vector<double>(rng, 1)(0) * std::pow(10.0, i % 30 - 15);
    CHECK(std::stod(format_number(x)) == x);
  }
}

TEST_CASE("states round-trip through JSON") {
  Rng rng = make_rng(42);
  const auto D = DensityOperator<double>(random_density_matrix<double>(rng, 3));
  const auto st = from_density_operator(D, 0.25);
  const auto back = state_from_json<double>(json::parse(to_json(st).dump()));
  CHECK(back.alpha() == 0.25);
  CHECK(back.n() == 3);
  CHECK(max_abs(back.covariance() - st.covariance()) == 0.0);

  const auto g = GaussianState<double>(PhaseSpace::grid(1, 2, 3.0), 0.25 * Matrix<double>::Identity(4, 4), 1.0, "iso");
  const auto g2 = state_from_json<double>(to_json(g));
  CHECK(g2.space().is_grid());
  CHECK(g2.space().grid().box_length == 3.0);
  CHECK(g2.name() == "iso");
  json broken = to_json(g);
  broken["B"].erase(0);
  CHECK_THROWS_AS(state_from_json<double>(broken), DimensionError);
}

TEST_CASE("variables round-trip through JSON") {
  const json doc = json::parse(R"({"n": 2, "terms": [
      {"type": "quadratic", "coeff": 0.5, "operator": {"diagonal": [1, 2]}},
      {"type": "factored-quartic", "coeff": 0.25, "gamma1": "identity", "gamma2": {"random-positive": {"seed": 4}}},
      {"type": "kernel-quartic", "coeff": 0.1},
      {"type": "smooth", "coeff": 2, "name": "log1p-norm2"}]})");
  const auto f = variable_from_json<double>(doc);
  CHECK(f.terms().size() == 4);
  CHECK(!f.is_polynomial());
  json j = to_json(f);
  j["terms"].erase(3);  // smooth terms serialize by name only, without the coefficient
  const auto g = variable_from_json<double>(j);
  Rng rng = make_rng(43);
  for (int i = 0; i < 10; ++i) {
    const auto v = random_unit_phase_vector<double>(rng, 2);
    const double smooth_part = 2 * std::log1p(v.squared_norm());
    CHECK(evaluate(g, v) == doctest::Approx(evaluate(f, v) - smooth_part).epsilon(1e-14));
  }
  CHECK_THROWS_AS(variable_from_json<double>(json::parse(R"([{"type": "quadratic", "operator": "identity", "typo": 1}])"), 2),
                  DomainError);
  CHECK_THROWS_AS(variable_from_json<double>(json::parse(R"([{"type": "cubic"}])"), 2), DomainError);
  CHECK_THROWS_AS(operator_from_json<double>(json::parse(R"({"diagonal": [1, 2, 3]})"), 2), DimensionError);
  CHECK_THROWS_AS(operator_from_json<double>(json::parse(R"({"rnd": {}})"), 2), DomainError);
}

TEST_CASE("operators from seeds are reproducible") {
  const json j = json::parse(R"({"random": {"seed": 9, "scale": 0.5}})");
  const auto a = operator_from_json<double>(j, 3), b = operator_from_json<double>(j, 3);
  CHECK(max_abs(a.R() - b.R()) == 0.0);
  const auto p = operator_from_json<double>(json::parse(R"({"random-positive": {"seed": 9}})"), 3);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<double>> es(to_complex_operator(p).matrix());
  CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-12);
  const auto back = operator_from_json<double>(to_json(a), 3);
  CHECK(max_abs(back.T() - a.T()) == 0.0);
}

TEST_CASE("complex matrices") {
  ComplexMatrix<double> M(2, 2);
  M << std::complex<double>(1, 2), std::complex<double>(0, -1), std::complex<double>(3, 0), std::complex<double>(0.5, 0.25);
  CHECK(complex_matrix_from_json<double>(complex_matrix_to_json(M)) == M);
}

TEST_CASE("trajectory CSV") {
  Trajectory<double> t;
  t.times = {0, 0.5};
  t.norms = {1, 1};
  t.energies = {0.25, 0.25};
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str() == "t,norm,energy\n0,1,0.25\n0.5,1,0.25\n");
}

TEST_CASE("snapshot files round-trip bit-exactly") {
  const PhaseSpace s = PhaseSpace::grid(2, 4, 6.5);
  Rng rng = make_rng(44);
  Trajectory<double> t;
  for (int f = 0; f < 3; ++f) {
    ComplexVector<double> z(16);
    z.real() = gaussian_vector<double>(rng, 16);
    z.imag() = gaussian_vector<double>(rng, 16);
    t.times.push_back(0.1 * f);
    t.states.push_back(z);
  }
  std::stringstream buf;
  write_snapshots(buf, s, t, 7);
  CHECK(buf.str().size() == 8 + 4 * 4 + 8 + 8 + 3 * (8 + 16 * 16));
  CHECK(buf.str().substr(0, 8) == "PCSFSNAP");
  const auto back = read_snapshots<double>(buf);
  CHECK(back.header.dimension == 2);
  CHECK(back.header.points_per_axis == 4);
  CHECK(back.header.box_length == 6.5);
  CHECK(back.header.stride == 7);
  REQUIRE(back.frames.size() == 3);
  for (int f = 0; f < 3; ++f) {
    CHECK(back.times[f] == t.times[f]);
    CHECK(back.frames[f] == t.states[f]);
  }

  Trajectory<float> tf;
  tf.times = {0.0f};
  tf.states = {ComplexVector<float>::Constant(16, {1.5f, -2.0f})};
  std::stringstream bf;
  write_snapshots(bf, s, tf, 1);
  const auto fb = read_snapshots<float>(bf);
  CHECK(fb.header.dtype == 2);
  CHECK(fb.frames[0] == tf.states[0]);

  std::stringstream truncated(buf.str().substr(0, 50));
  CHECK_THROWS_AS(read_snapshots<double>(truncated), Error);
  std::stringstream junk("NOTSNAPSxxxxxxxx");
  CHECK_THROWS_AS(read_snapshots<double>(junk), Error);
}
