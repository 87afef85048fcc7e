#pragma once

#include "mqskew/spin_core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mqskew {

// Dimensionless inverse temperature hbar*omega_0/(kT) of the initial state.
struct ThermalSpec {
  ThermalSpec(double beta_value, bool allow_negative_beta = false)  // NOLINT(google-explicit-constructor)
      : beta(beta_value), allow_negative(allow_negative_beta) {}

  double beta;
  bool allow_negative;

  // Throws DomainError for non-finite beta, or negative beta without the flag.
  void validate() const;
};

// ln Z for Z = (2 cosh(beta/2))^N.
double log_partition(int n_spins, double beta);

// ln Tr(rho_eq^2) = ln(2^N cosh^N(beta) / Z^2), evaluated in closed form.
double log_thermal_purity(int n_spins, double beta);

// Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  // Validates unit trace (1e-12) and eigenvalues >= -1e-12.
  static DensityMatrix from_operator(HermitianOperator op);

  const HermitianOperator& op() const { return op_; }
  const Eigen::MatrixXcd& entries() const { return op_.entries(); }
  Eigen::Index dim() const { return op_.dim(); }
  const BasisTag& tag() const { return op_.tag(); }

 private:
  struct Trusted {};
  DensityMatrix(HermitianOperator op, Trusted) : op_(std::move(op)) {}

  friend DensityMatrix thermal_state(const ZeemanBasis&, ThermalSpec);
  friend class Propagator;

  HermitianOperator op_;
};

// rho_eq = exp(beta I_z) / Z, diagonal in the Zeeman basis.
DensityMatrix thermal_state(const ZeemanBasis& basis, ThermalSpec thermal);

// Diagonal of rho_eq for the given 2m values: exp(beta m - ln Z).
Eigen::VectorXd thermal_populations(const std::vector<int>& twice_m, int n_spins, double beta);

// Spectral factorization of a Hermitian generator, split into the
// connected blocks of its sparsity pattern. One factorization serves any
// number of evolution times.
class Propagator {
 public:
  struct Block {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;

    // exp(-i H tau) restricted to this block.
    Eigen::MatrixXcd unitary(double tau) const;
  };

  explicit Propagator(const HermitianOperator& h);

  Eigen::Index dim() const { return dim_; }
  const BasisTag& tag() const { return tag_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  // Full exp(-i H tau).
  Eigen::MatrixXcd unitary(double tau) const;

  // exp(-i H tau) rho exp(i H tau).
  DensityMatrix evolve(const DensityMatrix& rho, double tau) const;

 private:
  Eigen::Index dim_;
  BasisTag tag_;
  std::vector<Block> blocks_;
};

DensityMatrix evolve(const DensityMatrix& rho, const HermitianOperator& h, double tau);

// Normalized MQ intensities J_n for n in [-N, N].
class CoherenceSpectrum {
 public:
  CoherenceSpectrum(int n_spins, std::vector<double> intensities);

  int n_spins() const { return n_spins_; }
  int max_order() const { return n_spins_; }
  // J_n; zero for |n| > N.
  double at(int order) const;
  const std::vector<double>& intensities() const { return intensities_; }
  double total() const;

 private:
  int n_spins_;
  std::vector<double> intensities_;
};

// rho = sum_n rho_n with rho_n holding the elements whose magnetization
// difference m(i) - m(i') equals n.
class CoherenceDecomposition {
 public:
  CoherenceDecomposition(int n_spins, std::vector<Eigen::MatrixXcd> parts)
      : n_spins_(n_spins), parts_(std::move(parts)) {}

  int n_spins() const { return n_spins_; }
  const Eigen::MatrixXcd& part(int order) const;
  bool is_zero(int order) const;
  Eigen::MatrixXcd reassemble() const;

 private:
  int n_spins_;
  std::vector<Eigen::MatrixXcd> parts_;
};

CoherenceDecomposition coherence_decomposition(const DensityMatrix& rho, const ZeemanBasis& basis);

// Adds |rho_ab|^2 into sums[(twice_m[a] - twice_m[b]) / 2 + n_spins].
void accumulate_coherence_weights(const Eigen::MatrixXcd& rho, const std::vector<int>& twice_m, int n_spins,
                                  std::vector<double>& sums);

// J_n = Tr{rho_n rho_-n} / Tr(rho_eq^2), normalization from the closed form.
// Throws ConsistencyError when sum J_n deviates from 1 by more than 1e-8.
CoherenceSpectrum coherence_spectrum(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double beta);

// Builds a spectrum from unnormalized coherence weights, dividing by the
// closed-form purity and applying the same consistency check.
CoherenceSpectrum normalize_coherences(int n_spins, double beta, std::vector<double> weights);

double second_moment(const CoherenceSpectrum& spectrum);

// G(phi) = Tr{exp(i phi I_z) rho exp(-i phi I_z) rho}.
double phase_signal(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double phi);

// J_n recovered from a (2N+1)-point DFT of G(phi), divided by Tr(rho_eq^2).
// No normalization check; the result is compared against coherence_spectrum.
CoherenceSpectrum spectrum_from_phase_signal(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double beta);

}  // namespace mqskew
