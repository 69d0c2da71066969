#include "bspc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bspc/bounds.hpp"

namespace bspc {

namespace {

double k_multiplier(std::size_t k, KForm form) {
  return form == KForm::paper_k ? static_cast<double>(k) : static_cast<double>(k - 1);
}

double deviation_bound(std::size_t k, double eps_bar, double base_norm, double sigma_r,
                       KForm form) {
  const double mass = 2.0 * base_norm * eps_bar + eps_bar * eps_bar;
  return k_multiplier(k, form) * mass / (std::sqrt(static_cast<double>(k)) * sigma_r);
}

}  // namespace

SpectralBudget::SpectralBudget(std::size_t r, double tau) : target_rank(r), tolerance(tau) {
  if (r < 1) throw InvalidArgument("budget rank must be at least 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw NonpositiveTau("budget tolerance must be positive");
}

bool group_feasible(std::size_t k, double eps_bar, double base_norm, double sigma_r,
                    const SpectralBudget& budget, KForm form) {
  if (k < 1) throw InvalidArgument("group size must be at least 1");
  if (!(eps_bar >= 0.0) || !std::isfinite(eps_bar)) {
    throw InvalidArgument("eps_bar must be finite and nonnegative");
  }
  if (!(sigma_r > 0.0)) throw NonpositiveSigma("sigma_r must be positive");
  const double mass = 2.0 * base_norm * eps_bar + eps_bar * eps_bar;
  return k_multiplier(k, form) * mass <=
         std::sqrt(static_cast<double>(k)) * budget.tolerance * sigma_r;
}

GroupingPlan plan_groups(std::span<const DenseMatrix> blocks, const SpectralBudget& budget,
                         std::optional<double> rank_tol, KForm form) {
  if (blocks.empty()) throw EmptyBlockList("plan_groups requires at least one block");
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (!blocks[i].same_shape(blocks[0])) {
      throw ShapeMismatch("block " + std::to_string(i) + " is " +
                          std::to_string(blocks[i].rows()) + "x" +
                          std::to_string(blocks[i].cols()) + " but block 0 is " +
                          std::to_string(blocks[0].rows()) + "x" +
                          std::to_string(blocks[0].cols()));
    }
  }

  GroupingPlan plan{.groups = {}, .budget = budget, .total_blocks = blocks.size()};
  std::size_t next = 0;
  while (next < blocks.size()) {
    const std::size_t ref = next;
    const DenseMatrix& reference = blocks[ref];
    const std::vector<double> ref_sv = singular_values(reference);
    const std::size_t ref_rank =
        numerical_rank(ref_sv, reference.rows(), reference.cols(), rank_tol);

    GroupSpec group;
    group.reference_index = ref;
    group.member_indices.push_back(ref);
    ++next;

    if (ref_rank < budget.target_rank) {
      // Reference cannot certify the budget at rank r; emit it alone and keep
      // the stream moving.
      group.certified = false;
      group.eps_bar = 0.0;
      group.certified_bound = 0.0;
      plan.groups.push_back(std::move(group));
      continue;
    }

    const double base_norm = ref_sv.front();
    const double sigma_r = ref_sv[budget.target_rank - 1];
    double eps_bar = 0.0;
    while (next < blocks.size()) {
      const double e_next = spectral_norm(blocks[next] - reference);
      const double candidate_eps = std::max(eps_bar, e_next);
      if (!group_feasible(group.member_indices.size() + 1, candidate_eps, base_norm, sigma_r,
                          budget, form)) {
        break;
      }
      eps_bar = candidate_eps;
      group.member_indices.push_back(next);
      ++next;
    }
    group.eps_bar = eps_bar;
    group.certified_bound =
        deviation_bound(group.member_indices.size(), eps_bar, base_norm, sigma_r, form);
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

std::vector<double> certify_plan(const GroupingPlan& plan, std::span<const DenseMatrix> blocks) {
  if (plan.total_blocks != blocks.size()) {
    throw PlanMismatch("plan covers " + std::to_string(plan.total_blocks) + " blocks but " +
                       std::to_string(blocks.size()) + " were supplied");
  }
  std::vector<double> deviations;
  deviations.reserve(plan.groups.size());
  for (const auto& group : plan.groups) {
    if (group.member_indices.empty()) throw PlanMismatch("plan contains an empty group");
    for (std::size_t idx : group.member_indices) {
      if (idx >= blocks.size()) {
        throw PlanMismatch("plan references block " + std::to_string(idx) +
                           " beyond the stream of " + std::to_string(blocks.size()));
      }
    }
    const std::size_t k = group.member_indices.size();
    const DenseMatrix& reference = blocks[group.reference_index];
    const std::vector<double> ideal = replicated_spectrum(singular_values(reference), k);

    std::vector<DenseMatrix> members;
    members.reserve(k);
    for (std::size_t idx : group.member_indices) members.push_back(blocks[idx]);
    const std::vector<double> actual = singular_values(concat_h(members));

    const std::size_t top =
        std::min({plan.budget.target_rank, ideal.size(), actual.size()});
    double max_dev = 0.0;
    for (std::size_t i = 0; i < top; ++i) {
      max_dev = std::max(max_dev, std::abs(actual[i] - ideal[i]));
    }
    deviations.push_back(max_dev);
  }
  return deviations;
}

}  // namespace bspc
