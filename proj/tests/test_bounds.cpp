#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bspc/bounds.hpp"
#include "bspc/harness.hpp"
#include "bspc/matrix.hpp"

using namespace bspc;

TEST_CASE("block_norm_bound is the root sum of squares") {
  CHECK(block_norm_bound({{5.0}}) == doctest::Approx(5.0));
  CHECK(block_norm_bound({{0.0, 0.0}, {0.0, 0.0}}) == 0.0);
  CHECK(block_norm_bound({{3.0, 0.0}, {0.0, 4.0}}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(block_norm_bound({{1.0, 2.0}}), NonSquareGrid);
  CHECK_THROWS_AS(block_norm_bound({}), NonSquareGrid);
}

TEST_CASE("gram_right_bound hand values") {
  CHECK(gram_right_bound(BlockNorms({1.0}, {0.0})) == 0.0);
  CHECK(gram_right_bound(BlockNorms({1.0}, {1.0})) == doctest::Approx(3.0));
  // terms d11=0, d12=1, d21=1, d22=1
  CHECK(gram_right_bound(BlockNorms({1.0, 0.0}, {0.0, 1.0})) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("gram_left_bound hand values") {
  CHECK(gram_left_bound(BlockNorms({1.0}, {0.0})) == 0.0);
  CHECK(gram_left_bound(BlockNorms({1.0, 1.0}, {0.1, 0.1})) == doctest::Approx(0.42));
  const BlockNorms cross({1.0, 0.0}, {0.0, 1.0});
  CHECK(gram_left_bound(cross) == doctest::Approx(1.0));
  CHECK(gram_left_bound(cross) < gram_right_bound(cross));
}

TEST_CASE("BlockNorms validation") {
  CHECK_THROWS_AS(BlockNorms({}, {}), InvalidArgument);
  CHECK_THROWS_AS(BlockNorms({1.0, 2.0}, {0.1}), LengthMismatch);
  CHECK_THROWS_AS(BlockNorms({-1.0}, {0.0}), InvalidArgument);
}

TEST_CASE("sv_deviation_bounds on the unperturbed collection") {
  const std::vector<double> sv{2.0, 1.0};
  const auto report = sv_deviation_bounds(BlockNorms({1.0, 1.0}, {0.0, 0.0}), sv, 2);
  CHECK(report.gram_left == 0.0);
  CHECK(report.gram_right == 0.0);
  CHECK(report.nonzero_index_bounds == std::vector<double>{0.0, 0.0});
  CHECK(report.zero_index_bound == 0.0);
}

TEST_CASE("sv_deviation_bounds matches the identity-pair oracle") {
  // M = [I2, I2], M~ = [I2, 1.1 I2]
  const DenseMatrix eye = DenseMatrix::identity(2);
  const DenseMatrix scaled = 1.1 * eye;
  const DenseMatrix m = concat_h({eye, eye});
  const DenseMatrix m_tilde = concat_h({eye, scaled});

  const auto sv_m = singular_values(m);
  const double root2 = std::sqrt(2.0);
  CHECK(sv_m[0] == doctest::Approx(root2).epsilon(1e-12));

  const auto report = sv_deviation_bounds(BlockNorms({1.0, 1.0}, {0.0, 0.1}), sv_m, 2);
  CHECK(report.nonzero_index_bounds[0] == doctest::Approx(0.21 / root2).epsilon(1e-12));
  CHECK(report.nonzero_index_bounds[1] == doctest::Approx(0.21 / root2).epsilon(1e-12));

  const auto sv_tilde = singular_values(m_tilde);
  const double actual = std::abs(sv_tilde[0] - sv_m[0]);
  CHECK(actual == doctest::Approx(std::sqrt(2.21) - root2).epsilon(1e-10));
  CHECK(actual <= report.nonzero_index_bounds[0]);
}

TEST_CASE("sv_deviation_bounds on the scalar example") {
  // 1x1 blocks A = (1), E = (1): sigma moves from 1 to 2, bound is 3
  const std::vector<double> sv{1.0};
  const auto report = sv_deviation_bounds(BlockNorms({1.0}, {1.0}), sv, 1);
  CHECK(report.nonzero_index_bounds[0] == doctest::Approx(3.0));
  CHECK(std::abs(2.0 - 1.0) <= report.nonzero_index_bounds[0]);
}

TEST_CASE("sv_deviation_bounds rejects a zero sigma at the declared rank") {
  const std::vector<double> sv{1.0, 0.0};
  CHECK_THROWS_AS(sv_deviation_bounds(BlockNorms({1.0}, {0.1}), sv, 2), ZeroSigmaAtRank);
  CHECK_THROWS_AS(sv_deviation_bounds(BlockNorms({1.0}, {0.1}), sv, 3), InvalidArgument);
}

TEST_CASE("centroid_bounds hand values") {
  const std::vector<double> unit_pair{1.0, 1.0};
  const auto lone = centroid_bounds(1.0, unit_pair, 2, {}, 1);
  CHECK(lone.gram_left == 0.0);
  CHECK(lone.zero_index_bound == 0.0);

  const std::vector<double> one_pert{0.1};
  const auto pair = centroid_bounds(1.0, unit_pair, 2, one_pert, 2);
  CHECK(pair.nonzero_index_bounds[0] == doctest::Approx(0.21 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(pair.nonzero_index_bounds[1] == doctest::Approx(0.21 / std::sqrt(2.0)).epsilon(1e-12));

  const std::vector<double> sv_a{2.0, 1.0};
  const std::vector<double> two_perts{0.1, 0.1};
  const auto triple = centroid_bounds(2.0, sv_a, 2, two_perts, 3);
  CHECK(triple.gram_left == doctest::Approx(0.82).epsilon(1e-12));
  CHECK(triple.nonzero_index_bounds[1] ==
        doctest::Approx(0.82 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("centroid_bounds validation") {
  const std::vector<double> sv{1.0};
  const std::vector<double> perts{0.1, 0.1};
  CHECK_THROWS_AS(centroid_bounds(1.0, sv, 1, perts, 2), LengthMismatch);
  const std::vector<double> degenerate{0.0};
  const std::vector<double> one{0.1};
  CHECK_THROWS_AS(centroid_bounds(1.0, degenerate, 1, one, 2), ZeroSigmaAtRank);
}

TEST_CASE("continuity_envelope hand values and limits") {
  const auto small = continuity_envelope(1.0, 1.0, 2, 0.1);
  CHECK(small.nonzero == doctest::Approx(0.1 * 2.1 / std::sqrt(2.0)).epsilon(1e-12));

  const auto five = continuity_envelope(1.0, 1.0, 5, 0.01);
  CHECK(five.zero == doctest::Approx(std::sqrt(4.0 * 0.01 * 2.01)).epsilon(1e-12));

  // both envelope values shrink monotonically with eps
  double prev_nonzero = std::numeric_limits<double>::max();
  double prev_zero = std::numeric_limits<double>::max();
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto env = continuity_envelope(1.0, 1.0, 4, eps);
    CHECK(env.nonzero < prev_nonzero);
    CHECK(env.zero < prev_zero);
    prev_nonzero = env.nonzero;
    prev_zero = env.zero;
  }

  CHECK_THROWS_AS(continuity_envelope(1.0, 1.0, 1, 0.1), InvalidArgument);
  CHECK_THROWS_AS(continuity_envelope(1.0, 0.0, 2, 0.1), NonpositiveSigma);
}

TEST_CASE("kmax hand values") {
  CHECK(!kmax(0.1, 1.0, 1.0, 0.0).has_value());  // unbounded
  CHECK(kmax(0.1, 1.0, 1.0, 0.01).value() == 24);
  CHECK(kmax(0.001, 1.0, 1.0, 1.0).value() == 0);
  CHECK_THROWS_AS(kmax(0.0, 1.0, 1.0, 0.1), NonpositiveTau);
  CHECK_THROWS_AS(kmax(0.1, 0.0, 1.0, 0.1), NonpositiveSigma);
}

TEST_CASE("kmax monotonicity") {
  harness::Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const double tau = 0.01 + rng.next_unit();
    const double sigma = 0.1 + rng.next_unit();
    const double base = rng.next_unit() * 2.0;
    const double eps = 0.001 + rng.next_unit() * 0.5;
    const auto mid = kmax(tau, sigma, base, eps);
    CHECK(kmax(tau, sigma, base, eps * 2.0).value() <= mid.value());
    CHECK(kmax(tau * 2.0, sigma, base, eps).value() >= mid.value());
    CHECK(kmax(tau, sigma * 2.0, base, eps).value() >= mid.value());
  }
}

TEST_CASE("gram_left never exceeds gram_right") {
  harness::Rng rng(31337);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    std::vector<double> base(k), pert(k);
    for (std::size_t i = 0; i < k; ++i) {
      base[i] = rng.next_unit() * 3.0;
      pert[i] = rng.next_unit() * 1.5;
    }
    const BlockNorms norms(base, pert);
    const double left = gram_left_bound(norms);
    const double right = gram_right_bound(norms);
    CHECK(left <= right + 1e-12 * std::max(1.0, right));
  }
}

TEST_CASE("homogeneous norms give equal gram bounds") {
  harness::Rng rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    const double a = rng.next_unit() * 2.0;
    const double e = rng.next_unit();
    const BlockNorms norms(std::vector<double>(k, a), std::vector<double>(k, e));
    const double left = gram_left_bound(norms);
    const double right = gram_right_bound(norms);
    const double expected = static_cast<double>(k) * (2.0 * a * e + e * e);
    CHECK(left == doctest::Approx(expected).epsilon(1e-12));
    CHECK(right == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(left - right) <= 1e-12 * std::max(1.0, right));
  }
}

TEST_CASE("gram bounds are covariant under uniform scaling") {
  harness::Rng rng(555);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.next_u64() % 5);
    std::vector<double> base(k), pert(k);
    for (std::size_t i = 0; i < k; ++i) {
      base[i] = rng.next_unit() * 2.0;
      pert[i] = rng.next_unit();
    }
    const double c = 0.1 + rng.next_unit() * 5.0;
    std::vector<double> base_c(base), pert_c(pert);
    for (std::size_t i = 0; i < k; ++i) {
      base_c[i] *= c;
      pert_c[i] *= c;
    }
    const BlockNorms norms(base, pert);
    const BlockNorms scaled(base_c, pert_c);
    CHECK(gram_left_bound(scaled) ==
          doctest::Approx(c * c * gram_left_bound(norms)).epsilon(1e-12));
    CHECK(gram_right_bound(scaled) ==
          doctest::Approx(c * c * gram_right_bound(norms)).epsilon(1e-12));
  }
}

TEST_CASE("gram bounds are sound against the explicit Gram oracle") {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    harness::Rng meta(9000 + trial);
    const std::size_t m = 2 + meta.next_u64() % 5;
    const std::size_t n = 1 + meta.next_u64() % 5;
    const std::size_t k = 1 + meta.next_u64() % 4;
    const double eps = trial % 5 == 0 ? 0.0 : 0.3 * meta.next_unit();

    std::vector<DenseMatrix> base, perturbed;
    std::vector<double> base_norms, pert_norms;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t rank = 1 + meta.next_u64() % std::min(m, n);
      DenseMatrix a = harness::gen_block(m, n, rank, harness::trial_seed(trial, 2 * i));
      DenseMatrix e =
          harness::gen_perturbation(m, n, eps, harness::trial_seed(trial, 2 * i + 1));
      base_norms.push_back(spectral_norm(a));
      pert_norms.push_back(spectral_norm(e));
      perturbed.push_back(a + e);
      base.push_back(std::move(a));
    }
    const BlockNorms norms(base_norms, pert_norms);
    const DenseMatrix m_mat = concat_h(base);
    const DenseMatrix t_mat = concat_h(perturbed);

    const double sigma1 = spectral_norm(m_mat);
    const double scale = std::max(1.0, sigma1 * sigma1);
    const DenseMatrix d_right = transpose(t_mat) * t_mat - transpose(m_mat) * m_mat;
    const DenseMatrix d_left = t_mat * transpose(t_mat) - m_mat * transpose(m_mat);
    CHECK(spectral_norm(d_right) <= gram_right_bound(norms) + 1e-9 * scale);
    CHECK(spectral_norm(d_left) <= gram_left_bound(norms) + 1e-9 * scale);

    // Theorem-level soundness on the same instance
    const auto sv_m = singular_values(m_mat);
    const auto sv_t = singular_values(t_mat);
    const std::size_t rank = numerical_rank(sv_m, m, k * n);
    const auto report = sv_deviation_bounds(norms, sv_m, rank);
    const double sv_scale = std::max(1.0, sigma1);
    CHECK(report.zero_index_bound == std::sqrt(report.gram_left));
    for (std::size_t i = 0; i < rank; ++i) {
      CHECK(std::abs(sv_t[i] - sv_m[i]) <= report.nonzero_index_bounds[i] + 1e-9 * sv_scale);
      if (i > 0) CHECK(report.nonzero_index_bounds[i] >= report.nonzero_index_bounds[i - 1]);
    }
    for (std::size_t i = rank; i < sv_t.size(); ++i) {
      CHECK(sv_t[i] <= report.zero_index_bound + 1e-9 * sv_scale);
    }
  }
}

TEST_CASE("block_norm_bound is sound for assembled block matrices") {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    harness::Rng meta(700 + trial);
    const std::size_t g = 1 + meta.next_u64() % 3;
    const std::size_t m = 2 + meta.next_u64() % 4;
    const std::size_t n = 2 + meta.next_u64() % 4;
    std::vector<std::vector<double>> grid(g, std::vector<double>(g, 0.0));
    Eigen::MatrixXd assembled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g * m),
                                                      static_cast<Eigen::Index>(g * n));
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        const DenseMatrix block = harness::gen_perturbation(
            m, n, meta.next_unit(), harness::trial_seed(trial, 10 + i * g + j));
        grid[i][j] = spectral_norm(block);
        assembled.block(static_cast<Eigen::Index>(i * m), static_cast<Eigen::Index>(j * n),
                        static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
            block.eigen();
      }
    }
    const double bound = block_norm_bound(grid);
    CHECK(spectral_norm(DenseMatrix(assembled)) <= bound + 1e-9 * std::max(1.0, bound));
  }
}
