#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace mqskew {

using Complex = std::complex<double>;

inline constexpr int kDefaultDenseCap = 14;

// Identifies the basis an operator is written in. Arithmetic between
// operators with different tags is rejected.
struct BasisTag {
  std::string kind;
  int n_spins = 0;

  bool operator==(const BasisTag&) const = default;
  std::string str() const { return kind + "/" + std::to_string(n_spins); }
};

// N spin-1/2 nuclei with a symmetric dipolar coupling matrix D_jk
// (angular-frequency units, zero diagonal).
class SpinSystem {
 public:
  explicit SpinSystem(Eigen::MatrixXd couplings);

  // All pairs coupled with the same constant d.
  static SpinSystem uniform(int n_spins, double d);

  int n_spins() const { return static_cast<int>(couplings_.rows()); }
  double coupling(int j, int k) const { return couplings_(j, k); }
  const Eigen::MatrixXd& couplings() const { return couplings_; }

  // Mean |D_jk| over pairs j<k; 0 for a single spin.
  double mean_abs_coupling() const;

 private:
  Eigen::MatrixXd couplings_;
};

// Zeeman product basis. Bit b of index i set <=> spin b is up, so
// m(i) = popcount(i) - N/2.
class ZeemanBasis {
 public:
  int n_spins() const { return n_spins_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_spins_; }

  // 2 m(i); integer-valued so coherence orders are exact.
  int twice_m(Eigen::Index i) const { return twice_m_[static_cast<std::size_t>(i)]; }
  double magnetization(Eigen::Index i) const { return 0.5 * twice_m(i); }
  const std::vector<int>& twice_magnetization() const { return twice_m_; }

  // Number of basis states with the given magnetization.
  long long multiplicity(double m) const;

  BasisTag tag() const { return {"zeeman", n_spins_}; }

 private:
  friend ZeemanBasis build_zeeman_basis(int n_spins, int dense_cap);
  explicit ZeemanBasis(int n_spins);

  int n_spins_;
  std::vector<int> twice_m_;
};

ZeemanBasis build_zeeman_basis(int n_spins, int dense_cap = kDefaultDenseCap);

// Complex Hermitian matrix tagged with its basis. Hermiticity is checked
// on construction to 1e-12 relative to the largest entry.
class HermitianOperator {
 public:
  HermitianOperator(Eigen::MatrixXcd entries, BasisTag tag);

  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  const BasisTag& tag() const { return tag_; }

  // True when every imaginary part is exactly zero.
  bool is_real() const;

 private:
  Eigen::MatrixXcd entries_;
  BasisTag tag_;
};

void require_same_basis(const BasisTag& a, const BasisTag& b, const char* what);

struct Geometry {
  std::vector<Eigen::Vector3d> positions;
  Eigen::Vector3d field_axis = Eigen::Vector3d::UnitZ();
  // Absorbs gamma^2 hbar (and the 1/2) into one coupling unit.
  double prefactor = 1.0;

  // Throws GeometryError: non-unit axis, coincident or non-finite positions.
  void validate() const;
};

// D_jk = prefactor (1 - 3 cos^2 theta_jk) / r_jk^3.
SpinSystem dipolar_couplings_from_geometry(const Geometry& geom);

HermitianOperator build_iz(const ZeemanBasis& basis);

// H_MQ = -(1/2) sum_{j<k} D_jk (I_j^+ I_k^+ + I_j^- I_k^-).
HermitianOperator build_mq_hamiltonian(const SpinSystem& system, const ZeemanBasis& basis);

// I_j^+ for one spin, and the collective I^+ = sum_j I_j^+, as plain
// (non-Hermitian) matrices in the Zeeman basis.
Eigen::MatrixXcd single_spin_raising(const ZeemanBasis& basis, int spin);
Eigen::MatrixXcd collective_raising(const ZeemanBasis& basis);

}  // namespace mqskew
