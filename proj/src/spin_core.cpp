#include "mqskew/spin_core.hpp"

#include "mqskew/errors.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace mqskew {

SpinSystem::SpinSystem(Eigen::MatrixXd couplings) : couplings_(std::move(couplings)) {
  if (couplings_.rows() < 1 || couplings_.rows() != couplings_.cols()) {
    throw ShapeError("coupling matrix must be square with N >= 1");
  }
  const auto n = couplings_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (couplings_(j, j) != 0.0) throw DomainError("coupling matrix diagonal must be zero");
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!std::isfinite(couplings_(j, k))) throw DomainError("coupling matrix has non-finite entries");
      if (couplings_(j, k) != couplings_(k, j)) {
        std::ostringstream msg;
        msg << "coupling matrix not symmetric at (" << j << "," << k << ")";
        throw DomainError(msg.str());
      }
    }
  }
}

SpinSystem SpinSystem::uniform(int n_spins, double d) {
  if (n_spins < 1) throw DomainError("n_spins must be >= 1");
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n_spins, n_spins, d);
  c.diagonal().setZero();
  return SpinSystem(std::move(c));
}

double SpinSystem::mean_abs_coupling() const {
  const int n = n_spins();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) sum += std::abs(couplings_(j, k));
  return sum / (0.5 * n * (n - 1));
}

ZeemanBasis::ZeemanBasis(int n_spins) : n_spins_(n_spins) {
  const auto dim = std::size_t{1} << n_spins;
  twice_m_.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    twice_m_[i] = 2 * std::popcount(i) - n_spins;
  }
}

long long ZeemanBasis::multiplicity(double m) const {
  const double up = n_spins_ / 2.0 + m;
  const double rounded = std::round(up);
  if (std::abs(up - rounded) > 1e-12 || rounded < 0 || rounded > n_spins_) return 0;
  const int k = static_cast<int>(rounded);
  long long c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n_spins_ - k + i) / i;
  return c;
}

ZeemanBasis build_zeeman_basis(int n_spins, int dense_cap) {
  if (n_spins < 1) throw DomainError("n_spins must be >= 1");
  if (n_spins > dense_cap) {
    std::ostringstream msg;
    msg << "N=" << n_spins << " exceeds the dense engine cap of " << dense_cap;
    throw SizeError(msg.str());
  }
  return ZeemanBasis(n_spins);
}

HermitianOperator::HermitianOperator(Eigen::MatrixXcd entries, BasisTag tag)
    : entries_(std::move(entries)), tag_(std::move(tag)) {
  if (entries_.rows() != entries_.cols()) throw ShapeError("operator matrix must be square");
  const double scale = entries_.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
      std::ostringstream msg;
      msg << "matrix is not Hermitian (|A - A^H| = " << asym << ", max |A| = " << scale << ")";
      throw DomainError(msg.str());
    }
  }
}

bool HermitianOperator::is_real() const { return entries_.imag().cwiseAbs().maxCoeff() == 0.0; }

void require_same_basis(const BasisTag& a, const BasisTag& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": basis mismatch (" + a.str() + " vs " + b.str() + ")");
  }
}

void Geometry::validate() const {
  if (positions.empty()) throw GeometryError("geometry has no positions");
  if (!field_axis.allFinite() || std::abs(field_axis.norm() - 1.0) > 1e-9) {
    throw GeometryError("field_axis must be a unit vector");
  }
  if (!std::isfinite(prefactor)) throw GeometryError("prefactor must be finite");
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (!positions[j].allFinite()) throw GeometryError("position " + std::to_string(j) + " is not finite");
    for (std::size_t k = j + 1; k < positions.size(); ++k) {
      if ((positions[j] - positions[k]).norm() == 0.0) {
        throw GeometryError("positions " + std::to_string(j) + " and " + std::to_string(k) + " coincide");
      }
    }
  }
}

SpinSystem dipolar_couplings_from_geometry(const Geometry& geom) {
  geom.validate();
  const auto n = static_cast<Eigen::Index>(geom.positions.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const Eigen::Vector3d r = geom.positions[j] - geom.positions[k];
      const double dist = r.norm();
      const double cos_theta = r.dot(geom.field_axis) / dist;
      const double value = geom.prefactor * (1.0 - 3.0 * cos_theta * cos_theta) / (dist * dist * dist);
      d(j, k) = value;
      d(k, j) = value;
    }
  }
  return SpinSystem(std::move(d));
}

HermitianOperator build_iz(const ZeemanBasis& basis) {
  Eigen::VectorXcd diag(basis.dim());
  for (Eigen::Index i = 0; i < basis.dim(); ++i) diag(i) = basis.magnetization(i);
  return HermitianOperator(diag.asDiagonal().toDenseMatrix(), basis.tag());
}

HermitianOperator build_mq_hamiltonian(const SpinSystem& system, const ZeemanBasis& basis) {
  const int n = basis.n_spins();
  if (system.n_spins() != n) throw ShapeError("spin system and basis disagree on N");
  const Eigen::Index dim = basis.dim();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  // I_j^+ I_k^+ maps |..down_j..down_k..> to |..up_j..up_k..>; its adjoint
  // does the reverse. Both carry -D_jk/2.
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double d = system.coupling(j, k);
      if (d == 0.0) continue;
      const Eigen::Index pair = (Eigen::Index{1} << j) | (Eigen::Index{1} << k);
      for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & pair) != 0) continue;
        const Eigen::Index up = i | pair;
        h(up, i) += -0.5 * d;
        h(i, up) += -0.5 * d;
      }
    }
  }
  return HermitianOperator(std::move(h), basis.tag());
}

Eigen::MatrixXcd single_spin_raising(const ZeemanBasis& basis, int spin) {
  if (spin < 0 || spin >= basis.n_spins()) throw DomainError("spin index out of range");
  const Eigen::Index dim = basis.dim();
  const Eigen::Index bit = Eigen::Index{1} << spin;
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & bit) == 0) op(i | bit, i) = 1.0;
  }
  return op;
}

Eigen::MatrixXcd collective_raising(const ZeemanBasis& basis) {
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
  for (int j = 0; j < basis.n_spins(); ++j) op += single_spin_raising(basis, j);
  return op;
}

}  // namespace mqskew
