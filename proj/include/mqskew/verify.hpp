#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mqskew {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20201015;
  int max_n = 6;
  int points_per_size = 5;
};

// Built-in invariant suite: skew-information theorem on random couplings,
// dense/sector engine agreement, two-spin closed forms, phase-signal DFT
// equivalence, the sandwich inequality and the sector degeneracy count.
std::vector<VerifyCheck> run_verification(const VerifyOptions& options = {});

}  // namespace mqskew
