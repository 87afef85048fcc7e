#include "mqskew/nanopore.hpp"

#include "mqskew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mqskew {

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Adds exp(log_scale) * |rho_ab|^2 into weights[(2m_a - 2m_b)/2 + N], with
// rho = B B^dagger. Only the lower triangle is formed.
void add_scaled_coherences(const Eigen::MatrixXcd& b, const std::vector<int>& twice_m, int n_spins, double log_scale,
                           std::vector<double>& weights) {
  const Eigen::Index dim = b.rows();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(b);
  const double scale = std::exp(log_scale);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const int mc = twice_m[static_cast<std::size_t>(col)];
    weights[static_cast<std::size_t>(n_spins)] += scale * std::norm(rho(col, col));
    for (Eigen::Index row = col + 1; row < dim; ++row) {
      const double w = scale * std::norm(rho(row, col));
      const int order = (twice_m[static_cast<std::size_t>(row)] - mc) / 2;
      weights[static_cast<std::size_t>(order + n_spins)] += w;
      weights[static_cast<std::size_t>(-order + n_spins)] += w;
    }
  }
}

}  // namespace

double sector_multiplicity_log(int n_spins, int twice_s) {
  if (n_spins < 1) throw DomainError("n_spins must be >= 1");
  if (twice_s < 0 || twice_s > n_spins || (n_spins - twice_s) % 2 != 0) {
    std::ostringstream msg;
    msg << "total spin S=" << 0.5 * twice_s << " incompatible with N=" << n_spins;
    throw DomainError(msg.str());
  }
  // n_N(S) = (2S+1)/(N/2+S+1) * C(N, N/2-S)
  const int k = (n_spins - twice_s) / 2;
  return std::log(twice_s + 1.0) - std::log(k + twice_s + 1.0) + log_binomial(n_spins, k);
}

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (const double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

double log_sector_state_count(int n_spins) {
  std::vector<double> terms;
  for (int twice_s = n_spins; twice_s >= 0; twice_s -= 2) {
    terms.push_back(std::log(twice_s + 1.0) + sector_multiplicity_log(n_spins, twice_s));
  }
  return log_sum_exp(terms);
}

SectorBlock::SectorBlock(int n_spins, int twice_s)
    : twice_s_(twice_s), log_multiplicity_(sector_multiplicity_log(n_spins, twice_s)) {}

Eigen::MatrixXd SectorBlock::iz() const {
  Eigen::VectorXd d(dim());
  for (Eigen::Index a = 0; a < dim(); ++a) d(a) = 0.5 * twice_m(a);
  return d.asDiagonal().toDenseMatrix();
}

Eigen::MatrixXd SectorBlock::raising() const {
  const double s = spin();
  Eigen::MatrixXd up = Eigen::MatrixXd::Zero(dim(), dim());
  // index a holds m = S - a, so I^+ maps a -> a - 1.
  for (Eigen::Index a = 1; a < dim(); ++a) {
    const double m = 0.5 * twice_m(a);
    up(a - 1, a) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  return up;
}

Eigen::MatrixXd SectorBlock::hamiltonian(double coupling) const {
  const Eigen::MatrixXd up = raising();
  const Eigen::MatrixXd up2 = up * up;
  return -0.25 * coupling * (up2 + up2.transpose());
}

NanoporeEngine::NanoporeEngine(NanoporeModel model, NanoporeOptions options) : model_(model), options_(options) {
  if (model_.n_spins < 1) throw DomainError("n_spins must be >= 1");
  if (model_.n_spins > options_.cap) {
    std::ostringstream msg;
    msg << "N=" << model_.n_spins << " exceeds the nanopore engine cap of " << options_.cap;
    throw SizeError(msg.str());
  }
  if (!std::isfinite(model_.coupling)) throw DomainError("coupling must be finite");

  for (int twice_s = model_.n_spins; twice_s >= 0; twice_s -= 2) {
    sectors_.emplace_back(model_.n_spins, twice_s);
    const SectorBlock& sector = sectors_.back();
    const Eigen::MatrixXd h = sector.hamiltonian(model_.coupling);

    SectorCache cache{sector.log_multiplicity(), sector.spin(), {}};
    for (Eigen::Index parity = 0; parity < 2 && parity < sector.dim(); ++parity) {
      ParityBlock part;
      std::vector<Eigen::Index> idx;
      for (Eigen::Index a = parity; a < sector.dim(); a += 2) {
        idx.push_back(a);
        part.twice_m.push_back(sector.twice_m(a));
      }
      const auto size = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd sub(size, size);
      for (Eigen::Index i = 0; i < size; ++i)
        for (Eigen::Index j = 0; j < size; ++j) sub(i, j) = h(idx[i], idx[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
      if (solver.info() != Eigen::Success) throw ConsistencyError("sector eigendecomposition failed");
      part.energies = solver.eigenvalues();
      part.vectors = solver.eigenvectors();
      cache.parts.push_back(std::move(part));
    }
    cache_.push_back(std::move(cache));
  }
}

struct NanoporeEngine::Accumulator {
  double beta = 0.0;
  std::vector<double> weights;
  std::vector<double> half_weights;
  double fisher = 0.0;
};

void NanoporeEngine::accumulate(double tau, std::span<const double> betas, std::vector<Accumulator>& acc,
                                bool with_fisher) const {
  const int n = model_.n_spins;
  acc.assign(betas.size(), Accumulator{});
  for (std::size_t i = 0; i < betas.size(); ++i) {
    ThermalSpec(betas[i], options_.allow_negative_beta).validate();
    acc[i].beta = betas[i];
    acc[i].weights.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    acc[i].half_weights.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
  }

  // Per sector, with the largest Boltzmann exponent |beta| S factored out:
  //   Tr{rho_n rho_-n}: n_N(S) e^{2|beta|S} / Z^2 times |rho~_ab|^2
  //   I_F: n_N(S) e^{|beta|S} / Z times the spectral sum over w~
  // Both scale factors are at most 1.
  for (const auto& sector : cache_) {
    for (const auto& part : sector.parts) {
      const Eigen::VectorXcd phases =
          (part.energies.cast<Complex>() * Complex(0.0, -tau)).array().exp().matrix();
      const Eigen::MatrixXcd v = part.vectors.cast<Complex>();
      const Eigen::MatrixXcd u = v * phases.asDiagonal() * v.transpose();
      Eigen::MatrixXcd rotated_iz;
      if (with_fisher) {
        Eigen::VectorXd iz(static_cast<Eigen::Index>(part.twice_m.size()));
        for (Eigen::Index a = 0; a < iz.size(); ++a) iz(a) = 0.5 * part.twice_m[static_cast<std::size_t>(a)];
        rotated_iz = u.adjoint() * iz.cast<Complex>().asDiagonal() * u;
      }

      auto coherences = [&](double beta, std::vector<double>& out) {
        const double shift = std::abs(beta) * sector.spin;
        Eigen::VectorXd root_w(static_cast<Eigen::Index>(part.twice_m.size()));
        for (Eigen::Index a = 0; a < root_w.size(); ++a) {
          root_w(a) = std::exp(0.5 * (0.5 * beta * part.twice_m[static_cast<std::size_t>(a)] - shift));
        }
        const Eigen::MatrixXcd b = u * root_w.cast<Complex>().asDiagonal();
        const double log_scale = sector.log_multiplicity + 2.0 * shift - 2.0 * log_partition(n, beta);
        add_scaled_coherences(b, part.twice_m, n, log_scale, out);
      };

      for (auto& a : acc) {
        coherences(a.beta, a.weights);
        coherences(0.5 * a.beta, a.half_weights);
        if (with_fisher) {
          const double shift = std::abs(a.beta) * sector.spin;
          Eigen::VectorXd w(static_cast<Eigen::Index>(part.twice_m.size()));
          for (Eigen::Index k = 0; k < w.size(); ++k) {
            w(k) = std::exp(0.5 * a.beta * part.twice_m[static_cast<std::size_t>(k)] - shift);
          }
          const double log_scale = sector.log_multiplicity + shift - log_partition(n, a.beta);
          a.fisher += std::exp(log_scale) * qfi_in_eigenbasis(w, rotated_iz);
        }
      }
    }
  }
}

CoherenceSpectrum NanoporeEngine::spectrum(double tau, double beta) const {
  if (!std::isfinite(tau)) throw DomainError("tau must be finite");
  std::vector<Accumulator> acc;
  const double betas[] = {beta};
  accumulate(tau, betas, acc, false);
  return normalize_coherences(model_.n_spins, beta, std::move(acc.front().weights));
}

std::vector<DepthReport> NanoporeEngine::reports_at_tau(double tau, std::span<const double> betas) const {
  if (!std::isfinite(tau)) throw DomainError("tau must be finite");
  std::vector<Accumulator> acc;
  accumulate(tau, betas, acc, true);
  std::vector<DepthReport> out;
  out.reserve(acc.size());
  for (auto& a : acc) {
    out.push_back(assemble_report(EngineKind::nanopore, tau, a.beta,
                                  normalize_coherences(model_.n_spins, a.beta, std::move(a.weights)),
                                  normalize_coherences(model_.n_spins, 0.5 * a.beta, std::move(a.half_weights)),
                                  a.fisher));
  }
  return out;
}

DepthReport NanoporeEngine::report(double tau, double beta) const {
  const double betas[] = {beta};
  return std::move(reports_at_tau(tau, betas).front());
}

CoherenceSpectrum nanopore_spectrum(const NanoporeModel& model, double tau, double beta) {
  return NanoporeEngine(model).spectrum(tau, beta);
}

DepthReport nanopore_information(const NanoporeModel& model, double tau, double beta) {
  return NanoporeEngine(model).report(tau, beta);
}

}  // namespace mqskew
