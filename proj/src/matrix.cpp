#include "bspc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bspc {

namespace {

void validate(const Eigen::MatrixXd& data) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw InvalidArgument("matrix dimensions must be positive, got " +
                          std::to_string(data.rows()) + "x" + std::to_string(data.cols()));
  }
  if (!data.allFinite()) {
    throw InvalidArgument("matrix entries must be finite");
  }
}

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// Dominant singular value of a via power iteration on the Gram operator.
// Deterministic all-ones start; restarts on a canonical basis vector if an
// iterate lands in the null space.
double power_iteration_norm(const Eigen::MatrixXd& a) {
  constexpr double kTol = 1e-12;
  constexpr std::size_t kMaxIter = 10000;
  const Eigen::Index n = a.cols();

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v.normalize();
  double lambda = 0.0;  // estimate of sigma_1^2
  Eigen::Index restart = 0;
  for (std::size_t it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double wnorm = w.norm();
    if (wnorm == 0.0) {
      if (restart >= n) return 0.0;  // every direction annihilated: zero matrix
      v = Eigen::VectorXd::Unit(n, restart++);
      continue;
    }
    const double next = v.dot(w);
    v = w / wnorm;
    if (it > 0 && std::abs(next - lambda) <= kTol * std::max(next, 1e-300)) {
      return std::sqrt(std::max(next, 0.0));
    }
    lambda = next;
  }
  throw ConvergenceFailure(
      "power iteration did not reach tolerance 1e-12 within 10000 iterations", kMaxIter);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : data_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(cols))) {
  validate(data_);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> row_major)
    : data_(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)) {
  if (row_major.size() != rows * cols) {
    throw InvalidArgument("entry count " + std::to_string(row_major.size()) +
                          " does not match shape " + shape_str(rows, cols));
  }
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * cols + j];
  validate(data_);
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m > 0 ? rows.begin()->size() : 0;
  if (m == 0 || n == 0) throw InvalidArgument("matrix dimensions must be positive");
  data_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != n) {
      throw InvalidArgument("ragged initializer: row " + std::to_string(i) + " has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(n));
    }
    std::size_t j = 0;
    for (double x : row) data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j++)) = x;
    ++i;
  }
  validate(data_);
}

DenseMatrix::DenseMatrix(Eigen::MatrixXd data) : data_(std::move(data)) { validate(data_); }

DenseMatrix DenseMatrix::identity(std::size_t n) {
  return DenseMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n)));
}

std::vector<double> DenseMatrix::row_major_entries() const {
  std::vector<double> out;
  out.reserve(rows() * cols());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) out.push_back((*this)(i, j));
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("cannot add " + shape_str(a.rows(), a.cols()) + " and " +
                        shape_str(b.rows(), b.cols()));
  }
  return DenseMatrix(a.eigen() + b.eigen());
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch("cannot subtract " + shape_str(b.rows(), b.cols()) + " from " +
                        shape_str(a.rows(), a.cols()));
  }
  return DenseMatrix(a.eigen() - b.eigen());
}

DenseMatrix operator*(double scalar, const DenseMatrix& a) {
  return DenseMatrix(scalar * a.eigen());
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("cannot multiply " + shape_str(a.rows(), a.cols()) + " by " +
                        shape_str(b.rows(), b.cols()));
  }
  return DenseMatrix(a.eigen() * b.eigen());
}

DenseMatrix transpose(const DenseMatrix& a) { return DenseMatrix(a.eigen().transpose()); }

bool equal_entries(const DenseMatrix& a, const DenseMatrix& b) {
  return a.same_shape(b) && a.eigen() == b.eigen();
}

DenseMatrix concat_h(std::span<const DenseMatrix> blocks) {
  if (blocks.empty()) throw EmptyBlockList("concat_h requires at least one block");
  const std::size_t m = blocks[0].rows();
  std::size_t total_cols = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != m) {
      throw ShapeMismatch("block " + std::to_string(i) + " is " +
                          shape_str(blocks[i].rows(), blocks[i].cols()) +
                          " but block 0 is " + shape_str(m, blocks[0].cols()));
    }
    total_cols += blocks[i].cols();
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(total_cols));
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    out.middleCols(col, b.eigen().cols()) = b.eigen();
    col += b.eigen().cols();
  }
  return DenseMatrix(std::move(out));
}

DenseMatrix concat_h(std::initializer_list<DenseMatrix> blocks) {
  return concat_h(std::span<const DenseMatrix>(blocks.begin(), blocks.size()));
}

SvdFactors svd(const DenseMatrix& a) {
  const auto& m = a.eigen();
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  // Jacobi at small sizes for its extra relative accuracy, divide-and-conquer
  // above; both are deterministic.
  if (std::min(m.rows(), m.cols()) <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
      throw ConvergenceFailure("Jacobi SVD failed to converge", 0);
    }
    u = solver.matrixU();
    s = solver.singularValues();
    v = solver.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
      throw ConvergenceFailure("divide-and-conquer SVD failed to converge", 0);
    }
    u = solver.matrixU();
    s = solver.singularValues();
    v = solver.matrixV();
  }
  std::vector<double> values(s.data(), s.data() + s.size());
  for (double& x : values) x = std::max(x, 0.0);
  return SvdFactors{DenseMatrix(std::move(u)), std::move(values), DenseMatrix(std::move(v))};
}

double spectral_norm(const DenseMatrix& a) {
  if (a.eigen().isZero(0.0)) return 0.0;
  if (std::max(a.rows(), a.cols()) > 512) return power_iteration_norm(a.eigen());
  return singular_values(a).front();
}

std::vector<double> singular_values(const DenseMatrix& a) { return svd(a).singular_values; }

std::size_t numerical_rank(std::span<const double> sv, std::size_t rows, std::size_t cols,
                           std::optional<double> rel_tol) {
  for (std::size_t i = 0; i < sv.size(); ++i) {
    if (sv[i] < 0.0) throw UnsortedSpectrum("negative singular value at index " + std::to_string(i));
    if (i > 0 && sv[i] > sv[i - 1]) {
      throw UnsortedSpectrum("spectrum increases at index " + std::to_string(i));
    }
  }
  if (sv.empty()) return 0;
  double tol = rel_tol.value_or(static_cast<double>(std::max(rows, cols)) *
                                std::numeric_limits<double>::epsilon());
  if (tol < 0.0 || !std::isfinite(tol)) {
    throw InvalidArgument("rank tolerance must be finite and nonnegative");
  }
  const double threshold = tol * sv[0];
  std::size_t rank = 0;
  while (rank < sv.size() && sv[rank] > threshold) ++rank;
  return rank;
}

std::vector<double> replicated_spectrum(std::span<const double> sv, std::size_t k) {
  if (k < 1) throw ZeroK("replication count must be at least 1");
  const double scale = std::sqrt(static_cast<double>(k));
  std::vector<double> out(sv.begin(), sv.end());
  for (double& x : out) x *= scale;
  return out;
}

}  // namespace bspc
