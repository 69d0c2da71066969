#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bspc/matrix.hpp"

namespace bspc::harness {

/// Controlled-instance shape for one batch of certification trials.
struct TrialConfig {
  std::size_t m = 8;
  std::size_t n = 4;
  std::size_t k = 3;
  std::size_t base_rank = 4;   // target rank of generated base blocks
  double eps = 0.05;           // perturbation spectral-norm cap
  std::uint64_t seed = 0;      // master seed
  std::size_t trials = 100;
};

enum class BoundKind {
  gram_right,
  gram_left,
  thm2_nonzero,
  thm2_zero,
  prop3,
  cor1,
  cor2_envelope,
};

const char* bound_kind_name(BoundKind kind);

/// One measured-versus-analytical comparison. ratio is actual/bound, defined
/// as 0 when both vanish; soundness demands actual <= bound + 1e-9 * scale.
struct TightnessRecord {
  BoundKind bound_name = BoundKind::gram_left;
  double actual = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool sound = true;
  std::size_t trial = 0;
  std::uint64_t seed = 0;  // per-trial seed, for replay
};

/// i-th value of the splitmix64 stream seeded at master. Trials draw their
/// seeds from this derivation so they are independent yet reproducible.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Deterministic generator: splitmix64 state with Box-Muller gaussians on top.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double next_unit();      // [0, 1)
  double next_gaussian();  // standard normal

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Product of m-by-rank and rank-by-n standard gaussian factors, rescaled to
/// unit spectral norm. The numerical rank equals rank.
DenseMatrix gen_block(std::size_t m, std::size_t n, std::size_t rank, std::uint64_t seed);

/// Gaussian matrix rescaled to spectral norm eps; the zero matrix when eps is 0.
DenseMatrix gen_perturbation(std::size_t m, std::size_t n, double eps, std::uint64_t seed);

/// Evaluate every bound family against full-SVD oracles on cfg.trials random
/// instances. Emits one record per bound per applicable index.
std::vector<TightnessRecord> run_bound_trials(const TrialConfig& cfg);

struct SweepRow {
  double eps = 0.0;
  double measured = 0.0;  // max top-r deviation from the replicated spectrum
  double envelope = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool sound = true;          // measured <= envelope + slack at every row
  bool decay_checked = false; // grid spans at least two decades
  bool decay_ok = true;       // last measured <= first measured / 10
};

/// Shrinking-perturbation sweep: the same gaussian directions rescaled to each
/// eps in the strictly decreasing grid, measured against the continuity
/// envelope at sigma_r of the reference.
SweepResult run_continuity_sweep(const TrialConfig& cfg, std::span<const double> eps_grid);

}  // namespace bspc::harness
