#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bspc/errors.hpp"

namespace bspc {

/// Spectral-norm summary of a block collection: a_j = ||A_j||_2 and
/// e_j = ||E_j||_2 for j = 1..k. Every bound in this module consumes only
/// these scalars, so callers can cache them instead of re-touching matrices.
class BlockNorms {
 public:
  /// Both sequences must have the same length k >= 1 with finite nonnegative
  /// entries.
  BlockNorms(std::vector<double> base_norms, std::vector<double> pert_norms);

  std::size_t size() const { return base_.size(); }
  std::span<const double> base_norms() const { return base_; }
  std::span<const double> pert_norms() const { return pert_; }

 private:
  std::vector<double> base_;
  std::vector<double> pert_;
};

/// Every bound value for one block collection. gram_right and gram_left bound
/// the spectral norm of the right and left Gram perturbations (sigma^2 units);
/// nonzero_index_bounds[i] bounds |sigma_{i+1}(M~) - sigma_{i+1}(M)| for
/// indices up to rank_used, and zero_index_bound = sqrt(gram_left) bounds
/// sigma_i(M~) beyond the rank.
struct GroupBoundReport {
  std::size_t k = 0;
  double gram_right = 0.0;
  double gram_left = 0.0;
  std::vector<double> nonzero_index_bounds;
  double zero_index_bound = 0.0;
  std::size_t rank_used = 0;
};

/// Upper bound on the spectral norm of a block matrix assembled from a k-by-k
/// grid with per-block norms grid[i][j]: the root of the sum of squares.
double block_norm_bound(const std::vector<std::vector<double>>& block_norm_grid);

/// Bound on ||M~^T M~ - M^T M||_2: the root-sum-square over all k^2 cross
/// terms (a_i e_j + e_i a_j + e_i e_j).
double gram_right_bound(const BlockNorms& norms);

/// Bound on ||M~ M~^T - M M^T||_2: the diagonal-only sum of 2 a_i e_i + e_i^2.
/// Never exceeds gram_right_bound on the same input.
double gram_left_bound(const BlockNorms& norms);

/// Per-index singular value deviation bounds for a concatenation with spectrum
/// sv_of_m and the given rank: gram_left / sigma_i for i <= rank, and
/// sqrt(gram_left) beyond. Requires sigma_rank > 0 when rank > 0.
GroupBoundReport sv_deviation_bounds(const BlockNorms& norms, std::span<const double> sv_of_m,
                                     std::size_t rank);

/// Deviation bounds for the centroid setting: k copies of one reference block
/// with spectrum sv_of_a and norm base_norm, of which copies 2..k are perturbed
/// by pert_norms (length k-1). The reference spectrum is sqrt(k) * sigma_i(A).
GroupBoundReport centroid_bounds(double base_norm, std::span<const double> sv_of_a,
                                 std::size_t rank, std::span<const double> pert_norms,
                                 std::size_t k);

struct ContinuityEnvelope {
  double nonzero = 0.0;  // on |sigma_i(M~) - sqrt(k) sigma_i(A)|, i <= rank
  double zero = 0.0;     // on sigma_i(M~), i > rank
};

/// Envelope of the centroid bounds when every perturbation norm is capped by
/// eps: (k-1) eps (2 base_norm + eps) / (sqrt(k) sigma_i) and the root of
/// (k-1) eps (2 base_norm + eps). Requires k >= 2, eps > 0, sigma_i > 0.
ContinuityEnvelope continuity_envelope(double base_norm, double sigma_i_of_a, std::size_t k,
                                       double eps);

/// Largest group size guaranteed to satisfy the (r, tau) spectral budget for
/// perturbation norms capped by eps_bar:
/// floor((tau sigma_r / (2 base_norm eps_bar + eps_bar^2))^2). Returns nullopt
/// ("unbounded") when eps_bar is zero; saturates at the uint64 maximum.
std::optional<std::uint64_t> kmax(double tau, double sigma_r_of_a, double base_norm,
                                  double eps_bar);

}  // namespace bspc
