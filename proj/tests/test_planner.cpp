#include <doctest.h>

#include <cmath>
#include <vector>

#include "bspc/harness.hpp"
#include "bspc/planner.hpp"

using namespace bspc;

namespace {

// 30-block stream: an identity reference plus perturbations of spectral norm
// exactly 0.01. With tau = 0.1 and sigma_r = 1 the feasibility boundary sits
// at k = 24.
std::vector<DenseMatrix> boundary_stream(std::size_t blocks, std::size_t dim, double eps) {
  std::vector<DenseMatrix> stream;
  const DenseMatrix reference = DenseMatrix::identity(dim);
  stream.push_back(reference);
  for (std::size_t j = 1; j < blocks; ++j) {
    stream.push_back(reference + harness::gen_perturbation(dim, dim, eps, 800 + j));
  }
  return stream;
}

}  // namespace

TEST_CASE("SpectralBudget validation") {
  CHECK_THROWS_AS(SpectralBudget(0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(SpectralBudget(1, 0.0), NonpositiveTau);
  CHECK_THROWS_AS(SpectralBudget(1, -1.0), NonpositiveTau);
}

TEST_CASE("group_feasible boundary arithmetic") {
  const SpectralBudget budget(1, 0.1);
  // zero perturbation is always feasible
  CHECK(group_feasible(1, 0.0, 1.0, 1.0, budget));
  CHECK(group_feasible(1000, 0.0, 1.0, 1.0, budget));
  // sqrt(24) * 0.0201 = 0.0985 fits, sqrt(25) * 0.0201 = 0.1005 does not
  CHECK(group_feasible(24, 0.01, 1.0, 1.0, budget));
  CHECK_FALSE(group_feasible(25, 0.01, 1.0, 1.0, budget));
  CHECK_THROWS_AS(group_feasible(2, 0.01, 1.0, 0.0, budget), NonpositiveSigma);
}

TEST_CASE("group_feasible k-1 form is weaker than the paper form") {
  const SpectralBudget budget(1, 0.1);
  // the proof's k-1 multiplier stretches the boundary from 24 to 26 here:
  // 25 * 0.0201 = 0.5025 <= sqrt(26) * 0.1, 26 * 0.0201 = 0.5226 > sqrt(27) * 0.1
  CHECK(group_feasible(25, 0.01, 1.0, 1.0, budget, KForm::proof_k_minus_1));
  CHECK(group_feasible(26, 0.01, 1.0, 1.0, budget, KForm::proof_k_minus_1));
  CHECK_FALSE(group_feasible(27, 0.01, 1.0, 1.0, budget, KForm::proof_k_minus_1));
}

TEST_CASE("identical blocks collapse into a single group") {
  const DenseMatrix block = harness::gen_block(6, 3, 3, 42);
  const std::vector<DenseMatrix> stream(10, block);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(2, 1e-6));
  REQUIRE(plan.groups.size() == 1);
  CHECK(plan.groups[0].member_indices.size() == 10);
  CHECK(plan.groups[0].certified);
  CHECK(plan.groups[0].eps_bar == 0.0);
  CHECK(plan.groups[0].certified_bound == 0.0);
}

TEST_CASE("noisy boundary stream closes the first group at 24") {
  const auto stream = boundary_stream(30, 8, 0.01);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(4, 0.1));
  REQUIRE(plan.groups.size() >= 2);
  CHECK(plan.groups[0].member_indices.size() == 24);
  CHECK(plan.groups[0].certified);
  CHECK(plan.groups[0].eps_bar == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(plan.groups[0].certified_bound <= 0.1);
  // groups partition the stream contiguously
  std::size_t expected = 0;
  for (const auto& group : plan.groups) {
    for (std::size_t idx : group.member_indices) CHECK(idx == expected++);
  }
  CHECK(expected == 30);
}

TEST_CASE("huge tolerance admits the whole stream") {
  const auto stream = boundary_stream(12, 5, 0.05);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(3, 1e9));
  REQUIRE(plan.groups.size() == 1);
  CHECK(plan.groups[0].member_indices.size() == 12);
}

TEST_CASE("rank-deficient reference becomes an uncertified singleton") {
  std::vector<DenseMatrix> stream;
  stream.push_back(harness::gen_block(6, 4, 2, 7));  // rank 2 < budget rank 3
  stream.push_back(harness::gen_block(6, 4, 4, 8));
  stream.push_back(stream[1]);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(3, 0.5));
  REQUIRE(plan.groups.size() == 2);
  CHECK_FALSE(plan.groups[0].certified);
  CHECK(plan.groups[0].member_indices == std::vector<std::size_t>{0});
  CHECK(plan.groups[1].certified);
  CHECK(plan.groups[1].member_indices == std::vector<std::size_t>{1, 2});
}

TEST_CASE("plan_groups rejects mixed shapes and empty streams") {
  CHECK_THROWS_AS(plan_groups({}, SpectralBudget(1, 0.1)), EmptyBlockList);
  std::vector<DenseMatrix> stream;
  stream.push_back(DenseMatrix::identity(3));
  stream.push_back(DenseMatrix::identity(4));
  CHECK_THROWS_AS(plan_groups(stream, SpectralBudget(1, 0.1)), ShapeMismatch);
}

TEST_CASE("certify_plan stays within the certificate") {
  const auto stream = boundary_stream(30, 8, 0.01);
  const SpectralBudget budget(4, 0.1);
  const GroupingPlan plan = plan_groups(stream, budget);
  const auto deviations = certify_plan(plan, stream);
  REQUIRE(deviations.size() == plan.groups.size());
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    CHECK(deviations[g] <= plan.groups[g].certified_bound + 1e-9);
    CHECK(deviations[g] <= budget.tolerance);
  }
}

TEST_CASE("certify_plan reports zero for identical and singleton groups") {
  const DenseMatrix block = harness::gen_block(5, 3, 3, 99);
  const std::vector<DenseMatrix> stream(4, block);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(2, 0.5));
  const auto deviations = certify_plan(plan, stream);
  REQUIRE(deviations.size() == 1);
  CHECK(deviations[0] <= 1e-12);

  const std::vector<DenseMatrix> single(1, block);
  const GroupingPlan lone = plan_groups(single, SpectralBudget(2, 0.5));
  CHECK(certify_plan(lone, single)[0] <= 1e-12);
}

TEST_CASE("certify_plan rejects a mismatched stream") {
  const auto stream = boundary_stream(6, 5, 0.02);
  const GroupingPlan plan = plan_groups(stream, SpectralBudget(2, 0.2));
  const auto shorter = std::vector<DenseMatrix>(stream.begin(), stream.end() - 1);
  CHECK_THROWS_AS(certify_plan(plan, shorter), PlanMismatch);
}

TEST_CASE("randomized streams: soundness, maximality, determinism, monotonicity") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    harness::Rng meta(1234 + trial);
    const std::size_t m = 4 + meta.next_u64() % 5;
    const std::size_t n = 2 + meta.next_u64() % 4;
    const std::size_t rank = 1 + meta.next_u64() % std::min(m, n);
    const std::size_t segments = 1 + meta.next_u64() % 3;
    const double eps = 0.002 + 0.05 * meta.next_unit();

    std::vector<DenseMatrix> stream;
    for (std::size_t s = 0; s < segments; ++s) {
      const DenseMatrix base =
          harness::gen_block(m, n, rank, harness::trial_seed(trial, s));
      const std::size_t len = 3 + meta.next_u64() % 10;
      for (std::size_t j = 0; j < len; ++j) {
        stream.push_back(base + harness::gen_perturbation(
                                    m, n, eps, harness::trial_seed(trial, 100 + s * 50 + j)));
      }
    }

    const SpectralBudget budget(rank, 0.05 + 0.3 * meta.next_unit());
    const GroupingPlan plan = plan_groups(stream, budget);
    const auto deviations = certify_plan(plan, stream);

    std::size_t covered = 0;
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
      const auto& group = plan.groups[g];
      covered += group.member_indices.size();
      if (!group.certified) continue;
      CHECK(group.certified_bound <= budget.tolerance + 1e-15);
      CHECK(deviations[g] <= group.certified_bound + 1e-9);

      // greedy maximality: the next stream block must have violated the test
      const std::size_t last = group.member_indices.back();
      if (last + 1 < stream.size()) {
        const DenseMatrix& reference = stream[group.reference_index];
        const auto ref_sv = singular_values(reference);
        const double e_next = spectral_norm(stream[last + 1] - reference);
        const double candidate = std::max(group.eps_bar, e_next);
        CHECK_FALSE(group_feasible(group.member_indices.size() + 1, candidate, ref_sv.front(),
                                   ref_sv[budget.target_rank - 1], budget));
      }
    }
    CHECK(covered == stream.size());

    // determinism
    const GroupingPlan replay = plan_groups(stream, budget);
    REQUIRE(replay.groups.size() == plan.groups.size());
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
      CHECK(replay.groups[g].member_indices == plan.groups[g].member_indices);
      CHECK(replay.groups[g].eps_bar == plan.groups[g].eps_bar);
      CHECK(replay.groups[g].certified_bound == plan.groups[g].certified_bound);
    }

    // a looser budget never yields more groups
    const SpectralBudget looser(budget.target_rank, budget.tolerance * 4.0);
    CHECK(plan_groups(stream, looser).groups.size() <= plan.groups.size());
  }
}
