#include "mqskew/qinfo.hpp"

#include "mqskew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mqskew {

namespace {

constexpr double kNegativeEigenvalueLimit = -1e-9;
constexpr double kCrossCheckRel = 1e-6;
constexpr double kSandwichRel = 1e-8;
constexpr double kAbsFloor = 1e-12;

bool leq_rel(double a, double b, double rel) { return a <= b + rel * std::max(std::abs(a), std::abs(b)) + kAbsFloor; }

Eigen::VectorXd clamped_eigenvalues(const Eigen::VectorXd& values) {
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < kNegativeEigenvalueLimit) {
      std::ostringstream msg;
      msg << "not a density matrix: eigenvalue " << out(i);
      throw DomainError(msg.str());
    }
    out(i) = std::max(out(i), 0.0);
  }
  return out;
}

}  // namespace

Eigensystem eigensystem_of(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.entries());
  if (solver.info() != Eigen::Success) throw ConsistencyError("density matrix eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double wy_skew_of_matrix(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& iz) {
  if (rho.rows() != iz.rows() || rho.cols() != iz.cols()) throw ShapeError("wy_skew: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
  if (solver.info() != Eigen::Success) throw ConsistencyError("density matrix eigendecomposition failed");
  const Eigen::VectorXd roots = clamped_eigenvalues(solver.eigenvalues()).cwiseSqrt();
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  const Eigen::MatrixXcd sqrt_rho = v * roots.cast<Complex>().asDiagonal() * v.adjoint();
  const Eigen::MatrixXcd comm = sqrt_rho * iz - iz * sqrt_rho;
  const Complex tr = comm.cwiseProduct(comm.transpose()).sum();
  const double value = -2.0 * tr.real();
  if (std::abs(tr.imag()) > 1e-10 * std::max(1.0, std::abs(value))) {
    std::ostringstream msg;
    msg << "skew information has imaginary residue " << tr.imag();
    throw ConsistencyError(msg.str());
  }
  return std::max(value, 0.0);
}

double wy_skew_direct(const DensityMatrix& rho, const HermitianOperator& iz) {
  require_same_basis(rho.tag(), iz.tag(), "wy_skew_direct");
  return wy_skew_of_matrix(rho.entries(), iz.entries());
}

double wy_skew_via_spectrum(double m2_at_half_beta) {
  if (!(m2_at_half_beta >= 0.0)) throw DomainError("second moment must be non-negative");
  return 2.0 * m2_at_half_beta;
}

double qfi_in_eigenbasis(const Eigen::VectorXd& values, const Eigen::MatrixXcd& generator) {
  const Eigen::VectorXd l = clamped_eigenvalues(values);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < l.size(); ++j) {
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const double s = l(i) + l(j);
      if (s < 1e-300) continue;
      const double d = l(i) - l(j);
      sum += d * d / s * std::norm(generator(i, j));
    }
  }
  return 2.0 * sum;
}

double qfi(const Eigensystem& rho_eigensystem, const HermitianOperator& iz) {
  const auto& v = rho_eigensystem.vectors;
  if (v.rows() != iz.dim() || v.cols() != iz.dim() || rho_eigensystem.values.size() != iz.dim()) {
    throw ShapeError("qfi: dimension mismatch");
  }
  const Eigen::MatrixXcd a = v.adjoint() * iz.entries() * v;
  return qfi_in_eigenbasis(rho_eigensystem.values, a);
}

double fisher_lower_bound(double m2) { return 2.0 * m2; }

double purity_weighted_fisher_bound(double m2, int n_spins, double beta) {
  return 2.0 * std::exp(log_thermal_purity(n_spins, beta)) * m2;
}

double producibility_bound(int k, int n_spins) {
  if (n_spins < 1 || k < 1 || k > n_spins) {
    std::ostringstream msg;
    msg << "producibility bound needs 1 <= k <= N (k=" << k << ", N=" << n_spins << ")";
    throw DomainError(msg.str());
  }
  const long long m = n_spins / k;
  const long long rest = n_spins - m * k;
  return static_cast<double>(m * k * k + rest * rest);
}

int entanglement_depth(double info_value, int n_spins) {
  if (n_spins < 1) throw DomainError("n_spins must be >= 1");
  int depth = 1;
  for (int k = 1; k < n_spins; ++k) {
    if (info_value > producibility_bound(k, n_spins)) depth = k + 1;
  }
  return std::min(depth, n_spins);
}

const char* engine_name(EngineKind kind) { return kind == EngineKind::dense ? "dense" : "nanopore"; }

DepthReport assemble_report(EngineKind engine, double tau, double beta, CoherenceSpectrum spectrum,
                            const CoherenceSpectrum& half_beta_spectrum, double fisher,
                            std::optional<double> wy_direct) {
  const int n = spectrum.n_spins();
  DepthReport r{.engine = engine,
                .n_spins = n,
                .beta = beta,
                .tau = tau,
                .spectrum = std::move(spectrum),
                .m2 = 0.0,
                .m2_half_beta = second_moment(half_beta_spectrum),
                .info = {},
                .wy_direct = wy_direct};
  r.m2 = second_moment(r.spectrum);
  r.info.wy = wy_skew_via_spectrum(std::max(r.m2_half_beta, 0.0));
  r.info.fisher = fisher;
  r.info.m2_bound = fisher_lower_bound(r.m2);
  r.depth_wy = entanglement_depth(r.info.wy, n);
  r.depth_fisher = entanglement_depth(r.info.fisher, n);

  if (wy_direct) {
    const double diff = std::abs(*wy_direct - r.info.wy);
    if (diff > kCrossCheckRel * std::max(std::abs(*wy_direct), std::abs(r.info.wy)) + 1e-10) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "skew information paths disagree at tau=" << tau << ", beta=" << beta << ": sqrt(rho) gives "
          << *wy_direct << ", 2 M2(beta/2) gives " << r.info.wy;
      throw ConsistencyError(msg.str());
    }
  }
  return r;
}

std::vector<std::string> sandwich_violations(const DepthReport& report) {
  std::vector<std::string> out;
  const auto& info = report.info;
  auto describe = [&](const char* what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " at tau=" << report.tau << ", beta=" << report.beta << " (I_WY=" << info.wy
        << ", I_F=" << info.fisher << ")";
    out.push_back(msg.str());
  };
  if (!leq_rel(info.wy, info.fisher, kSandwichRel)) describe("I_WY > I_F");
  if (!leq_rel(info.fisher, 2.0 * info.wy, kSandwichRel)) describe("I_F > 2 I_WY");
  const double n2 = static_cast<double>(report.n_spins) * report.n_spins;
  if (info.fisher > n2 + 1e-8) describe("I_F > N^2");
  if (report.depth_wy > report.depth_fisher) describe("depth_wy > depth_fisher");
  return out;
}

bool fisher_bound_holds(const DepthReport& report) {
  return leq_rel(report.info.m2_bound, report.info.fisher, kSandwichRel);
}

DenseEngine::DenseEngine(SpinSystem system, DenseEngineOptions options)
    : system_(std::move(system)),
      options_(options),
      basis_(build_zeeman_basis(system_.n_spins(), options.dense_cap)),
      hamiltonian_(build_mq_hamiltonian(system_, basis_)),
      propagator_(hamiltonian_) {}

std::vector<DepthReport> DenseEngine::reports_at_tau(double tau, std::span<const double> betas) const {
  if (!std::isfinite(tau)) throw DomainError("tau must be finite");
  const int n = basis_.n_spins();
  const bool cross_check = n <= options_.cross_check_cap;

  struct BlockAtTau {
    std::vector<int> twice_m;
    Eigen::MatrixXcd unitary;
    Eigen::MatrixXcd iz;          // diagonal I_z restricted to the block
    Eigen::MatrixXcd rotated_iz;  // U^dagger I_z U
  };
  std::vector<BlockAtTau> blocks;
  blocks.reserve(propagator_.blocks().size());
  for (const auto& block : propagator_.blocks()) {
    BlockAtTau b;
    const auto size = static_cast<Eigen::Index>(block.indices.size());
    b.twice_m.resize(block.indices.size());
    Eigen::VectorXcd iz_diag(size);
    for (Eigen::Index a = 0; a < size; ++a) {
      b.twice_m[static_cast<std::size_t>(a)] = basis_.twice_m(block.indices[a]);
      iz_diag(a) = 0.5 * b.twice_m[static_cast<std::size_t>(a)];
    }
    b.unitary = block.unitary(tau);
    b.iz = iz_diag.asDiagonal().toDenseMatrix();
    b.rotated_iz = b.unitary.adjoint() * b.iz * b.unitary;
    blocks.push_back(std::move(b));
  }

  std::vector<DepthReport> out;
  out.reserve(betas.size());
  for (const double beta : betas) {
    ThermalSpec(beta, options_.allow_negative_beta).validate();
    std::vector<double> weights(static_cast<std::size_t>(2 * n + 1), 0.0);
    std::vector<double> half_weights(weights.size(), 0.0);
    double fisher = 0.0;
    double wy_direct = 0.0;
    for (const auto& b : blocks) {
      const Eigen::VectorXd p = thermal_populations(b.twice_m, n, beta);
      const Eigen::VectorXd p_half = thermal_populations(b.twice_m, n, 0.5 * beta);
      const Eigen::MatrixXcd rho = b.unitary * p.cast<Complex>().asDiagonal() * b.unitary.adjoint();
      const Eigen::MatrixXcd rho_half = b.unitary * p_half.cast<Complex>().asDiagonal() * b.unitary.adjoint();
      accumulate_coherence_weights(rho, b.twice_m, n, weights);
      accumulate_coherence_weights(rho_half, b.twice_m, n, half_weights);
      // Eigenpairs of rho_pre are (p_i, U|i>), so I_F needs only U^dagger I_z U.
      fisher += qfi_in_eigenbasis(p, b.rotated_iz);
      if (cross_check) wy_direct += wy_skew_of_matrix(rho, b.iz);
    }
    out.push_back(assemble_report(EngineKind::dense, tau, beta, normalize_coherences(n, beta, std::move(weights)),
                                  normalize_coherences(n, 0.5 * beta, std::move(half_weights)), fisher,
                                  cross_check ? std::optional<double>(wy_direct) : std::nullopt));
  }
  return out;
}

DepthReport DenseEngine::report(double tau, double beta) const {
  const double betas[] = {beta};
  return std::move(reports_at_tau(tau, betas).front());
}

DepthReport information_report(const SpinSystem& system, double tau, double beta) {
  return DenseEngine(system).report(tau, beta);
}

}  // namespace mqskew
