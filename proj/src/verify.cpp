#include "mqskew/verify.hpp"

#include "mqskew/dynamics.hpp"
#include "mqskew/errors.hpp"
#include "mqskew/nanopore.hpp"
#include "mqskew/qinfo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace mqskew {

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

SpinSystem random_system(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) d(j, k) = d(k, j) = dist(rng);
  return SpinSystem(std::move(d));
}

class Check {
 public:
  explicit Check(std::string name) : name_(std::move(name)) {}

  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_++ == 0) first_failure_ = what;
  }
  void note_worst(double value) { worst_ = std::max(worst_, value); }

  VerifyCheck result() const {
    std::ostringstream detail;
    detail.precision(3);
    detail << count_ << " comparisons";
    if (worst_ > 0.0) detail << ", worst deviation " << std::scientific << worst_;
    if (failures_ > 0) detail << "; " << failures_ << " failed, first: " << first_failure_;
    return {name_, failures_ == 0 && count_ > 0, detail.str()};
  }

 private:
  std::string name_;
  int count_ = 0;
  int failures_ = 0;
  double worst_ = 0.0;
  std::string first_failure_;
};

}  // namespace

std::vector<VerifyCheck> run_verification(const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VerifyCheck> out;

  Check theorem("I_WY(beta) = 2 M2(beta/2), random couplings");
  Check sandwich("I_WY <= I_F <= 2 I_WY");
  for (int n = 2; n <= options.max_n; ++n) {
    const SpinSystem system = random_system(n, rng);
    const DenseEngine engine(system, {.cross_check_cap = options.max_n});
    const double dbar = system.mean_abs_coupling();
    for (int p = 0; p < options.points_per_size; ++p) {
      const double tau = 10.0 / dbar * unit(rng);
      const double beta = 0.1 + 9.9 * unit(rng);
      try {
        const DepthReport r = engine.report(tau, beta);
        const double dev = rel_diff(*r.wy_direct, r.info.wy);
        theorem.note_worst(dev);
        std::ostringstream what;
        what << "N=" << n << " tau=" << tau << " beta=" << beta << " rel=" << dev;
        theorem.expect(dev < 1e-8, what.str());
        sandwich.expect(sandwich_violations(r).empty(), what.str());
      } catch (const Error& e) {
        theorem.expect(false, e.what());
      }
    }
  }
  out.push_back(theorem.result());
  out.push_back(sandwich.result());

  Check engines("sector engine matches dense engine (all-equal couplings)");
  for (int n = 2; n <= options.max_n; ++n) {
    const DenseEngine dense(SpinSystem::uniform(n, 1.0));
    const NanoporeEngine sector({n, 1.0});
    for (int p = 0; p < options.points_per_size; ++p) {
      const double tau = 3.0 * unit(rng);
      const double beta = 5.0 * unit(rng);
      const DepthReport a = dense.report(tau, beta);
      const DepthReport b = sector.report(tau, beta);
      std::ostringstream what;
      what << "N=" << n << " tau=" << tau << " beta=" << beta;
      double worst_j = 0.0;
      for (int order = -n; order <= n; ++order) {
        worst_j = std::max(worst_j, std::abs(a.spectrum.at(order) - b.spectrum.at(order)));
      }
      engines.note_worst(worst_j);
      engines.expect(worst_j < 1e-10, what.str() + " J_n");
      engines.expect(std::abs(a.m2 - b.m2) < 1e-10, what.str() + " M2");
      engines.expect(rel_diff(a.info.wy, b.info.wy) < 1e-8 || std::abs(a.info.wy - b.info.wy) < 1e-12,
                     what.str() + " I_WY");
      engines.expect(rel_diff(a.info.fisher, b.info.fisher) < 1e-8 || std::abs(a.info.fisher - b.info.fisher) < 1e-12,
                     what.str() + " I_F");
    }
  }
  out.push_back(engines.result());

  Check closed("two-spin closed forms");
  {
    const double d = 1.3;
    const DenseEngine engine(SpinSystem::uniform(2, d));
    for (int p = 0; p < options.points_per_size; ++p) {
      const double tau = 5.0 * unit(rng);
      const double beta = 0.1 + 5.0 * unit(rng);
      const DepthReport r = engine.report(tau, beta);
      const double s2 = std::pow(std::sin(d * tau), 2);
      const double m2 = 2.0 * s2 * std::pow(std::tanh(beta), 2);
      const double wy = 4.0 * s2 * std::pow(std::tanh(0.5 * beta), 2);
      const double fisher = 8.0 * s2 * std::pow(std::sinh(0.5 * beta), 2) / std::cosh(beta);
      const double dev = std::max({std::abs(r.m2 - m2), std::abs(r.info.wy - wy), std::abs(r.info.fisher - fisher)});
      closed.note_worst(dev);
      closed.expect(dev < 1e-10, "tau=" + std::to_string(tau) + " beta=" + std::to_string(beta));
    }
  }
  out.push_back(closed.result());

  Check fourier("phase-signal DFT reproduces J_n");
  for (int n = 2; n <= std::min(options.max_n, 5); ++n) {
    const SpinSystem system = random_system(n, rng);
    const ZeemanBasis basis = build_zeeman_basis(n);
    const Propagator prop(build_mq_hamiltonian(system, basis));
    const double tau = 5.0 * unit(rng);
    const double beta = 0.1 + 3.0 * unit(rng);
    const DensityMatrix rho = prop.evolve(thermal_state(basis, beta), tau);
    const CoherenceSpectrum direct = coherence_spectrum(rho, basis, beta);
    const CoherenceSpectrum dft = spectrum_from_phase_signal(rho, basis, beta);
    double worst = 0.0;
    for (int order = -n; order <= n; ++order) worst = std::max(worst, std::abs(direct.at(order) - dft.at(order)));
    fourier.note_worst(worst);
    fourier.expect(worst < 1e-10, "N=" + std::to_string(n));
  }
  out.push_back(fourier.result());

  Check degeneracy("sum_S (2S+1) n_N(S) = 2^N");
  for (int n = 1; n <= kDefaultNanoporeCap; ++n) {
    const double expected = n * std::log(2.0);
    // A log difference of x is a relative count error of about x.
    const double dev = std::abs(log_sector_state_count(n) - expected);
    degeneracy.note_worst(dev);
    degeneracy.expect(dev < 1e-10, "N=" + std::to_string(n));
  }
  out.push_back(degeneracy.result());

  return out;
}

}  // namespace mqskew
