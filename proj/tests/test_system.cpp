#include <catch2/catch_amalgamated.hpp>

#include "ecglab/system.hpp"
#include "test_helpers.hpp"

using namespace ecglab;
using namespace testing_helpers;

TEST_CASE("particles are canonically sorted heaviest-first, labels preserved") {
  ParticleSystem sys({{1.0, -1.0, "e"}, {1836.15267343, 1.0, "p"}});
  REQUIRE(sys.particle(0).label == "p");
  REQUIRE(sys.particle(1).label == "e");
  REQUIRE(sys.particle(0).mass > sys.particle(1).mass);
}

TEST_CASE("invalid systems are rejected") {
  REQUIRE_THROWS_AS(ParticleSystem({{1.0, 1.0, "a"}}), std::invalid_argument);
  REQUIRE_THROWS_AS(ParticleSystem({{-1.0, 1.0, "a"}, {1.0, -1.0, "b"}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ParticleSystem({{0.0, 1.0, "a"}, {1.0, -1.0, "b"}}),
                    std::invalid_argument);
}

TEST_CASE("hydrogen transformation matrix") {
  ParticleSystem sys = hydrogen();
  const Matrix T = build_transformation(sys);
  const double M = 1836.15267343 + 1.0;
  REQUIRE(T(0, 0) == 1836.15267343 / M);
  REQUIRE(T(0, 1) == 1.0 / M);
  REQUIRE(T(1, 0) == -1.0);
  REQUIRE(T(1, 1) == 1.0);
  REQUIRE(std::abs(T.determinant() - 1.0) < 1e-14);
}

TEST_CASE("three-particle transformation rows") {
  ParticleSystem sys({{3.0, 2.0, "n"}, {1.0, -1.0, "a"}, {1.0, -1.0, "b"}});
  const Matrix T = build_transformation(sys);
  REQUIRE(T(1, 0) == -1.0);
  REQUIRE(T(1, 1) == 1.0);
  REQUIRE(T(1, 2) == 0.0);
  REQUIRE(T(2, 0) == -1.0);
  REQUIRE(T(2, 1) == 0.0);
  REQUIRE(T(2, 2) == 1.0);
}

TEST_CASE("equal masses give half/half CM row") {
  ParticleSystem sys({{2.0, 1.0, "a"}, {2.0, -1.0, "b"}});
  const Matrix T = build_transformation(sys);
  REQUIRE(T(0, 0) == 0.5);
  REQUIRE(T(0, 1) == 0.5);
}

TEST_CASE("hydrogen kinetic matrix is the inverse reduced mass") {
  InternalSpec spec = build_internal_spec(hydrogen());
  const double expected = 1.0 / 1836.15267343 + 1.0;
  REQUIRE(rel_err(spec.lambda(0, 0), expected) < 1e-15);
}

TEST_CASE("three-particle toy kinetic couplings") {
  InternalSpec spec = build_internal_spec(three_body_toy());
  REQUIRE(rel_err(spec.lambda(0, 1), 1.0 / 3.0) < 1e-15);
  REQUIRE(rel_err(spec.lambda(0, 0), 1.0 / 3.0 + 1.0) < 1e-15);
}

TEST_CASE("CM row self-coupling equals 1/M") {
  ParticleSystem sys = three_body_toy();
  const Matrix T = build_transformation(sys);
  double cm = 0.0;
  for (int i = 0; i < sys.size(); ++i) cm += T(0, i) * T(0, i) / sys.particle(i).mass;
  REQUIRE(rel_err(cm, 1.0 / sys.total_mass()) < 1e-14);
}

TEST_CASE("CM kinetic coupling vanishes for random systems") {
  std::mt19937_64 rng(41);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const int N = 2 + static_cast<int>(rng() % 4);
    std::vector<Particle> parts;
    for (int i = 0; i < N; ++i)
      parts.push_back({std::exp(uni(-1.0, 8.0)), uni(-2.0, 2.0), "x"});
    ParticleSystem sys(parts);
    const Matrix T = build_transformation(sys);
    for (int k = 1; k < N; ++k) {
      double cross = 0.0;
      for (int i = 0; i < N; ++i) cross += T(0, i) * T(k, i) / sys.particle(i).mass;
      REQUIRE(std::abs(cross) <= 1e-14);
    }
    InternalSpec spec = internal_hamiltonian(sys, T);
    Eigen::SelfAdjointEigenSolver<Matrix> es(spec.lambda);
    REQUIRE(es.eigenvalues()(0) > 0.0);
    REQUIRE(static_cast<int>(spec.pairs.size()) == N * (N - 1) / 2);
  }
}

TEST_CASE("dipole coefficients: hydrogen internal coordinate carries -1") {
  InternalSpec spec = build_internal_spec(hydrogen());
  REQUIRE(spec.dipole_coeffs.has_value());
  REQUIRE(std::abs((*spec.dipole_coeffs)(0) + 1.0) < 1e-15);
}

TEST_CASE("dipole coefficients: CM column of T inverse carries the net charge") {
  ParticleSystem sys = three_body_toy();
  InternalSpec spec = build_internal_spec(sys);
  double cm_coeff = 0.0;
  for (int i = 0; i < sys.size(); ++i)
    cm_coeff += sys.particle(i).charge * spec.T_inv(i, 0);
  REQUIRE(std::abs(cm_coeff) < 1e-12);
}

TEST_CASE("charged system has no dipole coefficients") {
  ParticleSystem ion({{1836.15267343, 1.0, "p"}, {1836.15267343, 1.0, "p"},
                      {1.0, -1.0, "e"}});
  REQUIRE_FALSE(ion.neutral());
  InternalSpec spec = build_internal_spec(ion);
  REQUIRE_FALSE(spec.dipole_coeffs.has_value());
  REQUIRE_THROWS_AS(effective_dipole_charges(ion, spec.T_inv), std::invalid_argument);
}

TEST_CASE("frame independence of the classical dipole") {
  ParticleSystem sys = three_body_toy();
  InternalSpec spec = build_internal_spec(sys);
  std::mt19937_64 rng(7);
  auto uni = [&] { return (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 6.0 - 3.0; };
  for (int trial = 0; trial < 100; ++trial) {
    const int N = sys.size();
    Matrix r(N, 3);
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < 3; ++c) r(i, c) = uni();
    // original coordinates
    Eigen::RowVector3d mu_orig = Eigen::RowVector3d::Zero();
    for (int i = 0; i < N; ++i) mu_orig += sys.particle(i).charge * r.row(i);
    // internal-coordinate expression
    const Matrix rp = spec.T * r;
    Eigen::RowVector3d mu_int = Eigen::RowVector3d::Zero();
    for (int k = 0; k < N - 1; ++k) mu_int += (*spec.dipole_coeffs)(k)*rp.row(k + 1);
    REQUIRE((mu_orig - mu_int).norm() < 1e-12);
  }
}

TEST_CASE("mass presets") {
  REQUIRE(mass_preset("electron").value() == 1.0);
  REQUIRE(mass_preset("proton").value() == 1836.15267343);
  REQUIRE(mass_preset("fixed-nucleus").value() == 1e12);
  REQUIRE_FALSE(mass_preset("positron").has_value());
}

TEST_CASE("unsupported transformation kind rejected") {
  // Only the heavy-particle-centered transformation exists; the enum has a
  // single value, so misuse is covered at the config layer. The singular
  // check is still exercised through a valid call.
  REQUIRE_NOTHROW(build_transformation(hydrogen(), TransformKind::HeavyNucleusCentered));
}
