#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "bspc/errors.hpp"

namespace bspc {

/// Dense real matrix with finite entries, the carrier for blocks, perturbations
/// and their horizontal concatenations. Instances are immutable after
/// construction and safe to share across threads.
class DenseMatrix {
 public:
  /// Zero matrix of the given shape. Both dimensions must be positive.
  DenseMatrix(std::size_t rows, std::size_t cols);

  /// Build from row-major entries; length must equal rows*cols and every
  /// entry must be finite.
  DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> row_major);

  /// Build from nested initializer lists, one inner list per row.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  /// Wrap an Eigen matrix, validating shape and finiteness.
  explicit DenseMatrix(Eigen::MatrixXd data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data_.cols()); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Entries in row-major order.
  std::vector<double> row_major_entries() const;

  const Eigen::MatrixXd& eigen() const { return data_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows() == other.rows() && cols() == other.cols();
  }

 private:
  Eigen::MatrixXd data_;
};

/// Thin SVD of an m-by-n matrix: left (m x p), singular_values (p, nonincreasing,
/// nonnegative) and right (n x p, columns are right singular vectors), p = min(m, n).
struct SvdFactors {
  DenseMatrix left;
  std::vector<double> singular_values;
  DenseMatrix right;
};

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double scalar, const DenseMatrix& a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
bool equal_entries(const DenseMatrix& a, const DenseMatrix& b);

/// Horizontal concatenation [A_1 A_2 ... A_k]. All blocks must share the same
/// row count; column blocks appear in input order.
DenseMatrix concat_h(std::span<const DenseMatrix> blocks);
DenseMatrix concat_h(std::initializer_list<DenseMatrix> blocks);

/// Deterministic thin SVD. The factors satisfy the SvdFactors invariants:
/// orthonormal columns within 1e-10 and reconstruction error below
/// 1e-9 * max(1, sigma_1) in the spectral norm.
SvdFactors svd(const DenseMatrix& a);

/// Largest singular value. Computed via full SVD up to a size threshold of 512
/// on the larger dimension, power iteration on the Gram operator above it
/// (tolerance 1e-12, iteration cap 10000, all-ones start vector).
double spectral_norm(const DenseMatrix& a);

/// Nonincreasing singular values of a, length min(rows, cols).
std::vector<double> singular_values(const DenseMatrix& a);

/// Count of singular values above rel_tol * sigma_1. The default tolerance is
/// max(rows, cols) times the double-precision machine epsilon. Returns 0 for
/// the zero spectrum.
std::size_t numerical_rank(std::span<const double> sv, std::size_t rows, std::size_t cols,
                           std::optional<double> rel_tol = std::nullopt);

/// Spectrum of the k-fold horizontal replication of a matrix with singular
/// values sv: every value scaled by sqrt(k). Zero padding to the concatenated
/// shape is the caller's concern.
std::vector<double> replicated_spectrum(std::span<const double> sv, std::size_t k);

}  // namespace bspc
