#pragma once

#include "mqskew/dynamics.hpp"
#include "mqskew/spin_core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mqskew {

// Conventions used throughout:
//   I_WY = -2 Tr([sqrt(rho), I_z]^2)       (4x the textbook -1/2 Tr form)
//   I_F  = 2 sum_ij (l_i - l_j)^2 / (l_i + l_j) |<i|I_z|j>|^2
// With these, I_WY <= I_F <= 2 I_WY, and both are compared against the
// same k-producibility bound m k^2 + (N - m k)^2.

struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // columns are eigenvectors
};

Eigensystem eigensystem_of(const DensityMatrix& rho);

// -2 Tr([sqrt(rho), I_z]^2) with sqrt(rho) from an eigendecomposition of rho.
// Eigenvalues in [-1e-9, 0) are clamped to zero; anything lower throws.
double wy_skew_direct(const DensityMatrix& rho, const HermitianOperator& iz);

// Same quantity on raw matrices (rho need not have unit trace). Used for
// block-diagonal states.
double wy_skew_of_matrix(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& iz);

// 2 M_2(tau, beta/2).
double wy_skew_via_spectrum(double m2_at_half_beta);

double qfi(const Eigensystem& rho_eigensystem, const HermitianOperator& iz);

// QFI from eigenvalues and the generator already rotated into the
// eigenbasis: 2 sum (l_i - l_j)^2/(l_i + l_j) |A_ij|^2.
double qfi_in_eigenbasis(const Eigen::VectorXd& values, const Eigen::MatrixXcd& generator);

// 2 M_2(tau, beta).
double fisher_lower_bound(double m2);

// 2 Tr(rho_eq^2) M_2(tau, beta) = -2 Tr([rho, I_z]^2). Unlike fisher_lower_bound
// this one is guaranteed to sit below I_F for mixed states.
double purity_weighted_fisher_bound(double m2, int n_spins, double beta);

// m k^2 + (N - m k)^2 with m = floor(N/k).
double producibility_bound(int k, int n_spins);

// 1 + max{k in [1, N-1] : value > producibility_bound(k, N)}, or 1.
int entanglement_depth(double info_value, int n_spins);

struct InformationPair {
  double wy = 0.0;
  double fisher = 0.0;
  double m2_bound = 0.0;
};

enum class EngineKind { dense, nanopore };
const char* engine_name(EngineKind kind);

struct DepthReport {
  EngineKind engine = EngineKind::dense;
  int n_spins = 0;
  double beta = 0.0;
  double tau = 0.0;
  CoherenceSpectrum spectrum;
  double m2 = 0.0;
  double m2_half_beta = 0.0;
  InformationPair info;
  std::optional<double> wy_direct;  // present when the sqrt(rho) path ran
  int depth_wy = 1;
  int depth_fisher = 1;
};

// Fills moments, informations and depths from the two spectra and I_F.
DepthReport assemble_report(EngineKind engine, double tau, double beta, CoherenceSpectrum spectrum,
                            const CoherenceSpectrum& half_beta_spectrum, double fisher,
                            std::optional<double> wy_direct = std::nullopt);

// Violations of the sandwich I_WY <= I_F <= 2 I_WY (1e-8 relative), of
// I_F <= N^2, and of the depth ordering. Empty when consistent.
std::vector<std::string> sandwich_violations(const DepthReport& report);

// True when 2 M_2 <= I_F (1e-8 relative).
bool fisher_bound_holds(const DepthReport& report);

struct DenseEngineOptions {
  int dense_cap = kDefaultDenseCap;
  // Largest N for which the sqrt(rho) path is evaluated alongside the
  // spectrum path.
  int cross_check_cap = 10;
  bool allow_negative_beta = false;
};

// Exact simulation in the full Zeeman basis for arbitrary couplings.
class DenseEngine {
 public:
  explicit DenseEngine(SpinSystem system, DenseEngineOptions options = {});

  const SpinSystem& system() const { return system_; }
  const ZeemanBasis& basis() const { return basis_; }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  const Propagator& propagator() const { return propagator_; }

  // Throws ConsistencyError when the two I_WY paths disagree beyond 1e-6.
  DepthReport report(double tau, double beta) const;
  std::vector<DepthReport> reports_at_tau(double tau, std::span<const double> betas) const;

 private:
  SpinSystem system_;
  DenseEngineOptions options_;
  ZeemanBasis basis_;
  HermitianOperator hamiltonian_;
  Propagator propagator_;
};

DepthReport information_report(const SpinSystem& system, double tau, double beta);

}  // namespace mqskew
