#pragma once

#include "mqskew/dynamics.hpp"
#include "mqskew/qinfo.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mqskew {

inline constexpr int kDefaultNanoporeCap = 300;

// ln n_N(S), the number of total-spin-S multiplets among N spin-1/2,
// n_N(S) = C(N, N/2 - S) - C(N, N/2 - S - 1). S is passed as 2S.
double sector_multiplicity_log(int n_spins, int twice_s);

// ln sum_S (2S+1) n_N(S); equals N ln 2.
double log_sector_state_count(int n_spins);

// Numerically stable ln(sum exp(x_i)).
double log_sum_exp(std::span<const double> terms);

// One total-spin block of the all-equal-coupling model, states ordered
// m = S, S-1, ..., -S.
class SectorBlock {
 public:
  SectorBlock(int n_spins, int twice_s);

  int twice_s() const { return twice_s_; }
  double spin() const { return 0.5 * twice_s_; }
  Eigen::Index dim() const { return twice_s_ + 1; }
  double log_multiplicity() const { return log_multiplicity_; }
  // 2m of the state at index a.
  int twice_m(Eigen::Index a) const { return twice_s_ - 2 * static_cast<int>(a); }

  Eigen::MatrixXd iz() const;
  // <m+1|I^+|m> = sqrt(S(S+1) - m(m+1)).
  Eigen::MatrixXd raising() const;
  Eigen::MatrixXd lowering() const { return raising().transpose(); }
  // H_S = -(D/4) [(I^+)^2 + (I^-)^2].
  Eigen::MatrixXd hamiltonian(double coupling) const;

 private:
  int twice_s_;
  double log_multiplicity_;
};

struct NanoporeModel {
  int n_spins = 1;
  double coupling = 1.0;
};

struct NanoporeOptions {
  int cap = kDefaultNanoporeCap;
  bool allow_negative_beta = false;
};

// Large-N engine: conserves total spin, so each sector evolves on its own
// (2S+1)-dim space; H_S further splits by the parity of S - m. Sector
// eigendecompositions are built once and shared read-only.
class NanoporeEngine {
 public:
  explicit NanoporeEngine(NanoporeModel model, NanoporeOptions options = {});

  const NanoporeModel& model() const { return model_; }
  const std::vector<SectorBlock>& sectors() const { return sectors_; }

  CoherenceSpectrum spectrum(double tau, double beta) const;
  DepthReport report(double tau, double beta) const;
  std::vector<DepthReport> reports_at_tau(double tau, std::span<const double> betas) const;

 private:
  struct ParityBlock {
    std::vector<int> twice_m;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
  };
  struct SectorCache {
    double log_multiplicity;
    double spin;
    std::vector<ParityBlock> parts;
  };
  struct Accumulator;

  void accumulate(double tau, std::span<const double> betas, std::vector<Accumulator>& acc,
                  bool with_fisher) const;

  NanoporeModel model_;
  NanoporeOptions options_;
  std::vector<SectorBlock> sectors_;
  std::vector<SectorCache> cache_;
};

CoherenceSpectrum nanopore_spectrum(const NanoporeModel& model, double tau, double beta);
DepthReport nanopore_information(const NanoporeModel& model, double tau, double beta);

}  // namespace mqskew
