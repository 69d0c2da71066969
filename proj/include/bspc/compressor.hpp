#pragma once

#include <span>
#include <vector>

#include "bspc/matrix.hpp"

namespace bspc {

/// Joint rank-r factors for one group: a shared orthonormal left basis and one
/// coefficient matrix C_i = basis^T A_i per block. Column signs are normalized
/// so each basis column's largest-magnitude entry is positive.
struct CompressedGroup {
  DenseMatrix basis;                     // m x r
  std::vector<DenseMatrix> coefficients; // k matrices, each r x n
  std::size_t rank = 0;
  std::size_t block_rows = 0;  // m
  std::size_t block_cols = 0;  // n
  std::size_t block_count = 0; // k
};

/// Scalar counts for storing a group jointly (one shared basis plus k
/// coefficient matrices) versus truncating every block separately.
struct StorageStats {
  std::size_t joint_scalars = 0;     // r*m + k*r*n
  std::size_t separate_scalars = 0;  // sum of r_i * (m + n + 1)
  double ratio = 0.0;                // joint / separate
};

/// Extract the top-r left singular vectors of the concatenation as the shared
/// basis and project every block onto it. Requires equal block shapes and
/// 1 <= r <= min(m, k*n).
CompressedGroup compress_group(std::span<const DenseMatrix> blocks, std::size_t r);
CompressedGroup compress_group(std::initializer_list<DenseMatrix> blocks, std::size_t r);

/// basis * coefficients[i], the rank-r approximation of block i.
DenseMatrix reconstruct_block(const CompressedGroup& group, std::size_t i);

struct ReconstructionError {
  std::vector<double> per_block;  // ||A_i - basis C_i||_2
  double concatenated = 0.0;      // ||M - basis basis^T M||_2, i.e. sigma_{r+1}(M)
};

/// Spectral-norm reconstruction errors against the blocks the group was
/// compressed from.
ReconstructionError group_reconstruction_error(const CompressedGroup& group,
                                               std::span<const DenseMatrix> blocks);

/// Storage accounting for the joint-versus-separate trade-off. per_block_ranks
/// may be empty, in which case every block is costed at r_joint.
StorageStats storage_accounting(std::size_t m, std::size_t n, std::size_t k,
                                std::size_t r_joint,
                                std::span<const std::size_t> per_block_ranks = {});

}  // namespace bspc
