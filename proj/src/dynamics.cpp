#include "mqskew/dynamics.hpp"

#include "mqskew/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace mqskew {

namespace {

// ln(2 cosh x) without overflow.
double log_two_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

void ThermalSpec::validate() const {
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
  if (beta < 0.0 && !allow_negative) throw DomainError("negative beta requires allow_negative");
}

double log_partition(int n_spins, double beta) { return n_spins * log_two_cosh(0.5 * beta); }

double log_thermal_purity(int n_spins, double beta) {
  // ln(2^N cosh^N beta) = N ln(2 cosh beta).
  return n_spins * log_two_cosh(beta) - 2.0 * log_partition(n_spins, beta);
}

DensityMatrix DensityMatrix::from_operator(HermitianOperator op) {
  const Complex trace = op.entries().trace();
  if (std::abs(trace - Complex(1.0, 0.0)) > 1e-12) {
    std::ostringstream msg;
    msg << "density matrix trace is " << trace << ", expected 1";
    throw DomainError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.entries(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConsistencyError("eigenvalue solver failed");
  if (solver.eigenvalues().minCoeff() < -1e-12) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << solver.eigenvalues().minCoeff();
    throw DomainError(msg.str());
  }
  return DensityMatrix(std::move(op), Trusted{});
}

Eigen::VectorXd thermal_populations(const std::vector<int>& twice_m, int n_spins, double beta) {
  const double log_z = log_partition(n_spins, beta);
  Eigen::VectorXd p(static_cast<Eigen::Index>(twice_m.size()));
  for (std::size_t i = 0; i < twice_m.size(); ++i) {
    p(static_cast<Eigen::Index>(i)) = std::exp(0.5 * beta * twice_m[i] - log_z);
  }
  return p;
}

DensityMatrix thermal_state(const ZeemanBasis& basis, ThermalSpec thermal) {
  thermal.validate();
  const Eigen::VectorXd p = thermal_populations(basis.twice_magnetization(), basis.n_spins(), thermal.beta);
  Eigen::MatrixXcd rho = p.cast<Complex>().asDiagonal().toDenseMatrix();
  return DensityMatrix(HermitianOperator(std::move(rho), basis.tag()), DensityMatrix::Trusted{});
}

Eigen::MatrixXcd Propagator::Block::unitary(double tau) const {
  const Eigen::VectorXcd phases =
      (energies.cast<Complex>() * Complex(0.0, -tau)).array().exp().matrix();
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

Propagator::Propagator(const HermitianOperator& h) : dim_(h.dim()), tag_(h.tag()) {
  const auto n = static_cast<std::size_t>(dim_);
  const Eigen::MatrixXcd& m = h.entries();

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (Eigen::Index j = 0; j < dim_; ++j) {
    for (Eigen::Index i = j + 1; i < dim_; ++i) {
      if (m(i, j) != Complex(0.0, 0.0)) {
        const auto a = find_root(parent, static_cast<std::size_t>(i));
        const auto b = find_root(parent, static_cast<std::size_t>(j));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::vector<long> block_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find_root(parent, i);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<long>(blocks_.size());
      blocks_.emplace_back();
    }
    blocks_[static_cast<std::size_t>(block_of[root])].indices.push_back(static_cast<Eigen::Index>(i));
  }

  const bool real = h.is_real();
  for (auto& block : blocks_) {
    const auto size = static_cast<Eigen::Index>(block.indices.size());
    Eigen::MatrixXcd sub(size, size);
    for (Eigen::Index a = 0; a < size; ++a)
      for (Eigen::Index b = 0; b < size; ++b) sub(a, b) = m(block.indices[a], block.indices[b]);
    if (real) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub.real());
      if (solver.info() != Eigen::Success) throw ConsistencyError("Hamiltonian eigendecomposition failed");
      block.energies = solver.eigenvalues();
      block.vectors = solver.eigenvectors().cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sub);
      if (solver.info() != Eigen::Success) throw ConsistencyError("Hamiltonian eigendecomposition failed");
      block.energies = solver.eigenvalues();
      block.vectors = solver.eigenvectors();
    }
  }
}

Eigen::MatrixXcd Propagator::unitary(double tau) const {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& block : blocks_) {
    const Eigen::MatrixXcd ub = block.unitary(tau);
    const auto size = static_cast<Eigen::Index>(block.indices.size());
    for (Eigen::Index a = 0; a < size; ++a)
      for (Eigen::Index b = 0; b < size; ++b) u(block.indices[a], block.indices[b]) = ub(a, b);
  }
  return u;
}

DensityMatrix Propagator::evolve(const DensityMatrix& rho, double tau) const {
  require_same_basis(rho.tag(), tag_, "evolve");
  if (rho.dim() != dim_) throw ShapeError("evolve: dimension mismatch");
  if (!std::isfinite(tau)) throw DomainError("tau must be finite");
  if (tau == 0.0) return rho;
  const Eigen::MatrixXcd u = unitary(tau);
  Eigen::MatrixXcd out = u * rho.entries() * u.adjoint();
  // Restore exact Hermiticity lost to roundoff.
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(HermitianOperator(std::move(out), tag_), DensityMatrix::Trusted{});
}

DensityMatrix evolve(const DensityMatrix& rho, const HermitianOperator& h, double tau) {
  require_same_basis(rho.tag(), h.tag(), "evolve");
  return Propagator(h).evolve(rho, tau);
}

CoherenceSpectrum::CoherenceSpectrum(int n_spins, std::vector<double> intensities)
    : n_spins_(n_spins), intensities_(std::move(intensities)) {
  if (n_spins_ < 1 || intensities_.size() != static_cast<std::size_t>(2 * n_spins_ + 1)) {
    throw ShapeError("coherence spectrum needs 2N+1 intensities");
  }
}

double CoherenceSpectrum::at(int order) const {
  if (order < -n_spins_ || order > n_spins_) return 0.0;
  return intensities_[static_cast<std::size_t>(order + n_spins_)];
}

double CoherenceSpectrum::total() const { return std::accumulate(intensities_.begin(), intensities_.end(), 0.0); }

const Eigen::MatrixXcd& CoherenceDecomposition::part(int order) const {
  if (order < -n_spins_ || order > n_spins_) throw DomainError("coherence order out of range");
  return parts_[static_cast<std::size_t>(order + n_spins_)];
}

bool CoherenceDecomposition::is_zero(int order) const { return part(order).cwiseAbs().maxCoeff() == 0.0; }

Eigen::MatrixXcd CoherenceDecomposition::reassemble() const {
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(parts_.front().rows(), parts_.front().cols());
  for (const auto& p : parts_) sum += p;
  return sum;
}

CoherenceDecomposition coherence_decomposition(const DensityMatrix& rho, const ZeemanBasis& basis) {
  require_same_basis(rho.tag(), basis.tag(), "coherence_decomposition");
  const int n = basis.n_spins();
  const Eigen::Index dim = basis.dim();
  std::vector<Eigen::MatrixXcd> parts(static_cast<std::size_t>(2 * n + 1), Eigen::MatrixXcd::Zero(dim, dim));
  const auto& entries = rho.entries();
  for (Eigen::Index b = 0; b < dim; ++b) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      const int order = (basis.twice_m(a) - basis.twice_m(b)) / 2;
      parts[static_cast<std::size_t>(order + n)](a, b) = entries(a, b);
    }
  }
  return CoherenceDecomposition(n, std::move(parts));
}

void accumulate_coherence_weights(const Eigen::MatrixXcd& rho, const std::vector<int>& twice_m, int n_spins,
                                  std::vector<double>& sums) {
  const Eigen::Index dim = rho.rows();
  for (Eigen::Index b = 0; b < dim; ++b) {
    const int mb = twice_m[static_cast<std::size_t>(b)];
    for (Eigen::Index a = 0; a < dim; ++a) {
      const int order = (twice_m[static_cast<std::size_t>(a)] - mb) / 2;
      sums[static_cast<std::size_t>(order + n_spins)] += std::norm(rho(a, b));
    }
  }
}

CoherenceSpectrum normalize_coherences(int n_spins, double beta, std::vector<double> weights) {
  const double purity = std::exp(log_thermal_purity(n_spins, beta));
  for (auto& w : weights) w /= purity;
  CoherenceSpectrum spectrum(n_spins, std::move(weights));
  const double total = spectrum.total();
  if (!(std::abs(total - 1.0) <= 1e-8)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "sum of coherence intensities is " << total << " (beta=" << beta
        << "); input is not an evolved thermal state at this beta";
    throw ConsistencyError(msg.str());
  }
  return spectrum;
}

CoherenceSpectrum coherence_spectrum(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double beta) {
  require_same_basis(rho_pre.tag(), basis.tag(), "coherence_spectrum");
  const int n = basis.n_spins();
  std::vector<double> sums(static_cast<std::size_t>(2 * n + 1), 0.0);
  accumulate_coherence_weights(rho_pre.entries(), basis.twice_magnetization(), n, sums);
  return normalize_coherences(n, beta, std::move(sums));
}

double second_moment(const CoherenceSpectrum& spectrum) {
  double m2 = 0.0;
  for (int order = -spectrum.max_order(); order <= spectrum.max_order(); ++order) {
    m2 += static_cast<double>(order) * order * spectrum.at(order);
  }
  return m2;
}

double phase_signal(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double phi) {
  require_same_basis(rho_pre.tag(), basis.tag(), "phase_signal");
  const Eigen::Index dim = basis.dim();
  Eigen::VectorXcd rotor(dim);
  for (Eigen::Index i = 0; i < dim; ++i) rotor(i) = std::polar(1.0, phi * basis.magnetization(i));
  const Eigen::MatrixXcd& rho = rho_pre.entries();
  const Eigen::MatrixXcd rotated = rotor.asDiagonal() * rho * rotor.conjugate().asDiagonal();
  // Tr(A B) as an elementwise sum of A .* B^T.
  const Complex g = rotated.cwiseProduct(rho.transpose()).sum();
  const double scale = rho.squaredNorm();
  if (std::abs(g.imag()) > 1e-12 * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "phase signal has imaginary part " << g.imag();
    throw ConsistencyError(msg.str());
  }
  return g.real();
}

CoherenceSpectrum spectrum_from_phase_signal(const DensityMatrix& rho_pre, const ZeemanBasis& basis, double beta) {
  const int n = basis.n_spins();
  const int samples = 2 * n + 1;
  std::vector<double> g(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    g[static_cast<std::size_t>(k)] = phase_signal(rho_pre, basis, 2.0 * std::numbers::pi * k / samples);
  }
  const double purity = std::exp(log_thermal_purity(n, beta));
  std::vector<double> j(static_cast<std::size_t>(samples));
  for (int order = -n; order <= n; ++order) {
    Complex acc = 0.0;
    for (int k = 0; k < samples; ++k) {
      acc += g[static_cast<std::size_t>(k)] * std::polar(1.0, -2.0 * std::numbers::pi * order * k / samples);
    }
    j[static_cast<std::size_t>(order + n)] = acc.real() / samples / purity;
  }
  return CoherenceSpectrum(n, std::move(j));
}

}  // namespace mqskew
