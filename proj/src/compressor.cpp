#include "bspc/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bspc {

namespace {

// Flip columns so the largest-magnitude entry of each is positive; ties go to
// the lowest row index. Makes the factorization reproducible across runs.
void normalize_column_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index pivot = 0;
    basis.col(j).cwiseAbs().maxCoeff(&pivot);
    if (basis(pivot, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

}  // namespace

CompressedGroup compress_group(std::span<const DenseMatrix> blocks, std::size_t r) {
  if (blocks.empty()) throw EmptyBlockList("compress_group requires at least one block");
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (!blocks[i].same_shape(blocks[0])) {
      throw ShapeMismatch("block " + std::to_string(i) + " is " +
                          std::to_string(blocks[i].rows()) + "x" +
                          std::to_string(blocks[i].cols()) + " but block 0 is " +
                          std::to_string(blocks[0].rows()) + "x" +
                          std::to_string(blocks[0].cols()));
    }
  }
  const std::size_t m = blocks[0].rows();
  const std::size_t n = blocks[0].cols();
  const std::size_t k = blocks.size();
  if (r < 1) throw InvalidArgument("retained rank must be at least 1");
  if (r > std::min(m, k * n)) {
    throw RankTooLarge("rank " + std::to_string(r) + " exceeds min(m, k*n) = " +
                       std::to_string(std::min(m, k * n)));
  }

  const SvdFactors factors = svd(concat_h(blocks));
  Eigen::MatrixXd basis =
      factors.left.eigen().leftCols(static_cast<Eigen::Index>(r));
  normalize_column_signs(basis);

  CompressedGroup group{.basis = DenseMatrix(basis),
                        .coefficients = {},
                        .rank = r,
                        .block_rows = m,
                        .block_cols = n,
                        .block_count = k};
  group.coefficients.reserve(k);
  for (const auto& block : blocks) {
    group.coefficients.emplace_back(Eigen::MatrixXd(basis.transpose() * block.eigen()));
  }
  return group;
}

CompressedGroup compress_group(std::initializer_list<DenseMatrix> blocks, std::size_t r) {
  return compress_group(std::span<const DenseMatrix>(blocks.begin(), blocks.size()), r);
}

DenseMatrix reconstruct_block(const CompressedGroup& group, std::size_t i) {
  if (i >= group.coefficients.size()) {
    throw IndexOutOfRange("block index " + std::to_string(i) + " out of range for group of " +
                          std::to_string(group.coefficients.size()));
  }
  return DenseMatrix(group.basis.eigen() * group.coefficients[i].eigen());
}

ReconstructionError group_reconstruction_error(const CompressedGroup& group,
                                               std::span<const DenseMatrix> blocks) {
  if (blocks.size() != group.block_count) {
    throw PlanMismatch("group was compressed from " + std::to_string(group.block_count) +
                       " blocks but " + std::to_string(blocks.size()) + " were supplied");
  }
  ReconstructionError result;
  result.per_block.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != group.block_rows || blocks[i].cols() != group.block_cols) {
      throw PlanMismatch("block " + std::to_string(i) + " shape does not match the group");
    }
    result.per_block.push_back(spectral_norm(blocks[i] - reconstruct_block(group, i)));
  }
  const DenseMatrix m = concat_h(blocks);
  const Eigen::MatrixXd projected =
      group.basis.eigen() * (group.basis.eigen().transpose() * m.eigen());
  const Eigen::MatrixXd residual = m.eigen() - projected;
  result.concatenated = residual.isZero(0.0) ? 0.0 : spectral_norm(DenseMatrix(residual));
  return result;
}

StorageStats storage_accounting(std::size_t m, std::size_t n, std::size_t k,
                                std::size_t r_joint,
                                std::span<const std::size_t> per_block_ranks) {
  if (m < 1 || n < 1 || k < 1) throw InvalidArgument("dimensions must be positive");
  if (r_joint < 1) throw InvalidArgument("joint rank must be at least 1");
  if (r_joint > std::min(m, k * n)) {
    throw RankTooLarge("joint rank " + std::to_string(r_joint) + " exceeds min(m, k*n) = " +
                       std::to_string(std::min(m, k * n)));
  }
  std::vector<std::size_t> ranks;
  if (per_block_ranks.empty()) {
    ranks.assign(k, r_joint);
  } else {
    if (per_block_ranks.size() != k) {
      throw LengthMismatch("expected " + std::to_string(k) + " per-block ranks, got " +
                           std::to_string(per_block_ranks.size()));
    }
    ranks.assign(per_block_ranks.begin(), per_block_ranks.end());
  }
  StorageStats stats;
  stats.joint_scalars = r_joint * m + k * r_joint * n;
  stats.separate_scalars = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw InvalidArgument("per-block rank " + std::to_string(i) + " is zero");
    if (ranks[i] > std::min(m, n)) {
      throw RankTooLarge("per-block rank " + std::to_string(ranks[i]) + " exceeds min(m, n) = " +
                         std::to_string(std::min(m, n)));
    }
    stats.separate_scalars += ranks[i] * (m + n + 1);
  }
  stats.ratio = static_cast<double>(stats.joint_scalars) /
                static_cast<double>(stats.separate_scalars);
  return stats;
}

}  // namespace bspc
