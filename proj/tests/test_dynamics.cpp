#include <doctest.h>

#include "mqskew/dynamics.hpp"
#include "mqskew/errors.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mqskew;
using oracle::Complex;

namespace {

struct Evolved {
  ZeemanBasis basis;
  DensityMatrix rho_eq;
  DensityMatrix rho;
};

Evolved evolved(const SpinSystem& system, double tau, double beta) {
  auto basis = build_zeeman_basis(system.n_spins());
  auto eq = thermal_state(basis, beta);
  auto rho = evolve(eq, build_mq_hamiltonian(system, basis), tau);
  return {std::move(basis), std::move(eq), std::move(rho)};
}

// Z = sum_i exp(beta m_i), summed over bitstrings
double brute_partition(int n, double beta) {
  double z = 0.0;
  for (long long i = 0; i < (1LL << n); ++i) z += std::exp(0.5 * beta * oracle::twice_m(i, n));
  return z;
}

}  // namespace

TEST_CASE("thermal state examples") {
  for (int n = 1; n <= 5; ++n) {
    const auto rho = thermal_state(build_zeeman_basis(n), 0.0).entries();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) CHECK(rho(i, i).real() == doctest::Approx(std::pow(2.0, -n)));
  }
  const double beta = 1.7;
  const auto rho = thermal_state(build_zeeman_basis(1), beta).entries();
  const double z = 2.0 * std::cosh(beta / 2.0);
  CHECK(rho(0, 0).real() == doctest::Approx(std::exp(-beta / 2.0) / z).epsilon(1e-14));
  CHECK(rho(1, 1).real() == doctest::Approx(std::exp(beta / 2.0) / z).epsilon(1e-14));
  CHECK(std::abs(rho(0, 1)) == 0.0);
}

TEST_CASE("thermal purity closed form") {
  for (int n = 1; n <= 8; ++n) {
    for (const double beta : {0.0, 0.3, 1.0, 4.0, 12.0}) {
      const auto rho = thermal_state(build_zeeman_basis(n), beta);
      const double purity = rho.entries().diagonal().squaredNorm();
      const double z = brute_partition(n, beta);
      const double closed = std::pow(2.0, n) * std::pow(std::cosh(beta), n) / (z * z);
      CHECK(std::abs(purity - closed) < 1e-12);
      CHECK(std::exp(log_thermal_purity(n, beta)) == doctest::Approx(closed).epsilon(1e-12));
      CHECK(log_partition(n, beta) == doctest::Approx(std::log(z)).epsilon(1e-13));
    }
  }
}

TEST_CASE("thermal state rejects bad beta and survives large beta") {
  const auto basis = build_zeeman_basis(3);
  CHECK_THROWS_AS(thermal_state(basis, NAN), DomainError);
  CHECK_THROWS_AS(thermal_state(basis, INFINITY), DomainError);
  CHECK_THROWS_AS(thermal_state(basis, -1.0), DomainError);
  CHECK_NOTHROW(thermal_state(basis, ThermalSpec(-1.0, true)));

  const auto hot = thermal_state(build_zeeman_basis(10), 800.0).entries();
  CHECK(hot.allFinite());
  CHECK(hot.trace().real() == doctest::Approx(1.0));
  CHECK(std::isfinite(log_thermal_purity(300, 800.0)));
  CHECK(std::isfinite(log_partition(300, 800.0)));
}

TEST_CASE("density matrix validation") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix::from_operator(HermitianOperator(m, {"zeeman", 1})), DomainError);
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix::from_operator(HermitianOperator(m, {"zeeman", 1})), DomainError);
  m(0, 0) = 0.25;
  m(1, 1) = 0.75;
  CHECK_NOTHROW(DensityMatrix::from_operator(HermitianOperator(m, {"zeeman", 1})));
}

TEST_CASE("evolution trivial cases") {
  std::mt19937_64 rng(3);
  const SpinSystem system(oracle::random_couplings(4, rng));
  const auto basis = build_zeeman_basis(4);
  const auto rho = thermal_state(basis, 1.2);
  const auto h = build_mq_hamiltonian(system, basis);
  CHECK((evolve(rho, h, 0.0).entries() - rho.entries()).norm() == 0.0);

  const auto zero = build_mq_hamiltonian(SpinSystem::uniform(4, 0.0), basis);
  for (const double tau : {0.1, 3.0, 100.0}) CHECK((evolve(rho, zero, tau).entries() - rho.entries()).norm() < 1e-15);

  CHECK_THROWS(evolve(rho, build_mq_hamiltonian(SpinSystem::uniform(3, 1.0), build_zeeman_basis(3)), 1.0));
  CHECK_THROWS_AS(evolve(rho, h, NAN), DomainError);
}

TEST_CASE("two-spin evolution closed form") {
  for (const double d : {0.5, 1.0, 2.3}) {
    for (const double tau : {0.1, 0.7, 2.0}) {
      for (const double beta : {0.2, 1.0, 5.0}) {
        const auto e = evolved(SpinSystem::uniform(2, d), tau, beta);
        const oracle::TwoSpin two{d, tau, beta};
        CHECK(std::abs(e.rho.entries()(3, 0) - two.corner()) < 1e-14);
        CHECK(std::abs(e.rho.entries()(0, 3) - std::conj(two.corner())) < 1e-14);
      }
    }
  }
}

TEST_CASE("evolution matches a taylor-series exponential") {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 5; ++n) {
    const SpinSystem system(oracle::random_couplings(n, rng));
    const auto basis = build_zeeman_basis(n);
    const auto h = build_mq_hamiltonian(system, basis);
    const auto rho = thermal_state(basis, 0.9);
    for (const double tau : {0.3, 2.5, 9.0}) {
      const Eigen::MatrixXcd u = oracle::expm(Complex(0.0, -tau) * h.entries());
      const Eigen::MatrixXcd expected = u * rho.entries() * u.adjoint();
      CHECK((evolve(rho, h, tau).entries() - expected).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((Propagator(h).unitary(tau) - u).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("evolution preserves trace and spectrum") {
  std::mt19937_64 rng(9);
  for (int n = 2; n <= 7; ++n) {
    const SpinSystem system(oracle::random_couplings(n, rng));
    const auto e = evolved(system, 4.2, 2.0);
    CHECK(std::abs(e.rho.entries().trace() - 1.0) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> pre(e.rho.entries());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eq(e.rho_eq.entries());
    CHECK((pre.eigenvalues() - eq.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("coherence decomposition") {
  const auto diag = thermal_state(build_zeeman_basis(3), 1.0);
  const auto dd = coherence_decomposition(diag, build_zeeman_basis(3));
  for (int n = -3; n <= 3; ++n) CHECK(dd.is_zero(n) == (n != 0));

  const auto e = evolved(SpinSystem::uniform(2, 1.0), 0.6, 1.5);
  const auto two = coherence_decomposition(e.rho, e.basis);
  CHECK_FALSE(two.is_zero(-2));
  CHECK_FALSE(two.is_zero(0));
  CHECK_FALSE(two.is_zero(2));
  CHECK(two.is_zero(-1));
  CHECK(two.is_zero(1));

  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const auto basis = build_zeeman_basis(3);
  const auto dm = DensityMatrix::from_operator(HermitianOperator(rho, basis.tag()));
  const auto parts = coherence_decomposition(dm, basis);
  CHECK((parts.reassemble() - rho).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::MatrixXcd iz = build_iz(basis).entries();
  for (int n = -3; n <= 3; ++n) {
    const Eigen::MatrixXcd& p = parts.part(n);
    CHECK((iz * p - p * iz - static_cast<double>(n) * p).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS(parts.part(4));
}

TEST_CASE("coherence spectrum examples") {
  const auto basis = build_zeeman_basis(4);
  const auto spec0 = coherence_spectrum(thermal_state(basis, 2.0), basis, 2.0);
  CHECK(spec0.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(second_moment(spec0) == doctest::Approx(0.0));
  CHECK(spec0.at(7) == 0.0);

  for (const double tau : {0.0, 0.5, 3.0}) {
    const auto e = evolved(SpinSystem::uniform(2, 1.0), tau, 1.3);
    const auto spec = coherence_spectrum(e.rho, e.basis, 1.3);
    const oracle::TwoSpin two{1.0, tau, 1.3};
    CHECK(std::abs(spec.at(2) - two.j2()) < 1e-12);
    CHECK(std::abs(spec.at(-2) - two.j2()) < 1e-12);
    CHECK(std::abs(spec.at(0) - (1.0 - 2.0 * two.j2())) < 1e-12);
    CHECK(std::abs(second_moment(spec) - two.m2()) < 1e-12);
  }

  std::mt19937_64 rng(17);
  const SpinSystem system(oracle::random_couplings(5, rng));
  for (const double tau : {0.4, 5.0}) {
    const auto e = evolved(system, tau, 0.0);
    const auto spec = coherence_spectrum(e.rho, e.basis, 0.0);
    CHECK(spec.at(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(second_moment(spec) < 1e-20);
  }

  const auto e = evolved(system, 1.0, 2.0);
  CHECK_THROWS_AS(coherence_spectrum(e.rho, e.basis, 0.5), ConsistencyError);
}

TEST_CASE("second moment arithmetic") {
  std::vector<double> j(5, 0.0);
  j[0] = j[4] = 0.5;
  CHECK(second_moment(CoherenceSpectrum(2, j)) == doctest::Approx(4.0));
  CHECK_THROWS_AS(CoherenceSpectrum(2, std::vector<double>(4, 0.0)), ShapeError);
}

TEST_CASE("spectrum normalization and symmetry for random couplings") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 2; n <= 8; ++n) {
    const SpinSystem system(oracle::random_couplings(n, rng));
    for (int point = 0; point < 3; ++point) {
      const double tau = 10.0 * unit(rng) / system.mean_abs_coupling();
      const double beta = 0.1 + 9.9 * unit(rng);
      const auto e = evolved(system, tau, beta);
      const auto spec = coherence_spectrum(e.rho, e.basis, beta);
      CHECK(std::abs(spec.total() - 1.0) < 1e-10);
      for (int k = 1; k <= n; ++k) {
        CHECK(spec.at(k) == doctest::Approx(spec.at(-k)).epsilon(1e-12));
        if (k % 2 == 1) CHECK(spec.at(k) == 0.0);
      }
      const double m2 = second_moment(spec);
      CHECK(m2 >= 0.0);
      CHECK(m2 <= n * n);
    }
  }
}

TEST_CASE("phase signal") {
  std::mt19937_64 rng(23);
  const auto diag = thermal_state(build_zeeman_basis(3), 1.0);
  const double g0 = phase_signal(diag, build_zeeman_basis(3), 0.0);
  CHECK(g0 == doctest::Approx(diag.entries().squaredNorm()));
  for (const double phi : {0.3, 1.0, 2.5}) CHECK(phase_signal(diag, build_zeeman_basis(3), phi) == doctest::Approx(g0));

  for (int n = 2; n <= 6; ++n) {
    const SpinSystem system(oracle::random_couplings(n, rng));
    const double beta = 1.1;
    const auto e = evolved(system, 2.0, beta);
    CHECK(phase_signal(e.rho, e.basis, 0.0) == doctest::Approx(e.rho.entries().squaredNorm()).epsilon(1e-12));

    const auto direct = coherence_spectrum(e.rho, e.basis, beta);
    const auto dft = spectrum_from_phase_signal(e.rho, e.basis, beta);
    for (int k = -n; k <= n; ++k) CHECK(std::abs(direct.at(k) - dft.at(k)) < 1e-10);

    // -G''(0)/G(0) against M2, centered differences
    const double h = 1e-3;
    const double gm = phase_signal(e.rho, e.basis, -h);
    const double gz = phase_signal(e.rho, e.basis, 0.0);
    const double gp = phase_signal(e.rho, e.basis, h);
    const double fd = -(gp - 2.0 * gz + gm) / (h * h) / gz;
    CHECK(std::abs(fd - second_moment(direct)) < 1e-6 * std::max(1.0, second_moment(direct)));
  }
}
