#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bspc/matrix.hpp"

namespace bspc {

/// The (r, tau) pair governing planner decisions: the top r singular values of
/// a merged group must provably stay within tau of the replicated reference
/// spectrum.
struct SpectralBudget {
  std::size_t target_rank = 1;
  double tolerance = 0.0;  // absolute, sigma units

  SpectralBudget(std::size_t r, double tau);
};

/// Group-size factor in the feasibility test. The published corollary bounds
/// the perturbation mass by k copies of the worst term; its proof passes
/// through the slightly tighter k-1 multiple.
enum class KForm { paper_k, proof_k_minus_1 };

/// True iff a group of size k with running perturbation cap eps_bar is
/// certified by the budget: mult(k) * (2 base_norm eps_bar + eps_bar^2) /
/// sqrt(k) <= tau * sigma_r, where mult is k or k-1 per KForm.
bool group_feasible(std::size_t k, double eps_bar, double base_norm, double sigma_r,
                    const SpectralBudget& budget, KForm form = KForm::paper_k);

/// One planned compression group: a contiguous run of stream indices, the
/// designated reference block, the running perturbation cap and the
/// deviation bound the group was certified at. Groups whose reference lacks
/// the budget rank are emitted as singletons with certified = false.
struct GroupSpec {
  std::vector<std::size_t> member_indices;
  std::size_t reference_index = 0;
  double eps_bar = 0.0;
  double certified_bound = 0.0;
  bool certified = true;
};

struct GroupingPlan {
  std::vector<GroupSpec> groups;
  SpectralBudget budget;
  std::size_t total_blocks = 0;
};

/// Greedy left-to-right segmentation of a block stream. Each group opens at
/// the next unassigned block, which becomes the reference; subsequent blocks
/// are admitted while the feasibility test holds for the running max of
/// ||A_j - A_0||_2, and the first violation closes the group.
GroupingPlan plan_groups(std::span<const DenseMatrix> blocks, const SpectralBudget& budget,
                         std::optional<double> rank_tol = std::nullopt,
                         KForm form = KForm::paper_k);

/// Measured counterpart of each group's certificate: the max over the top
/// target_rank indices of |sigma_i(actual concatenation) - sqrt(k)
/// sigma_i(reference)|, by full SVD. For every certified group the value is
/// at most certified_bound up to floating-point slack.
std::vector<double> certify_plan(const GroupingPlan& plan, std::span<const DenseMatrix> blocks);

}  // namespace bspc
