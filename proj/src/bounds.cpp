#include "bspc/bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bspc {

namespace {

void check_norm_sequence(std::span<const double> values, const char* name) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw InvalidArgument(std::string(name) + "[" + std::to_string(i) +
                            "] must be finite and nonnegative");
    }
  }
}

}  // namespace

BlockNorms::BlockNorms(std::vector<double> base_norms, std::vector<double> pert_norms)
    : base_(std::move(base_norms)), pert_(std::move(pert_norms)) {
  if (base_.empty()) throw InvalidArgument("block norm sequences must be nonempty");
  if (base_.size() != pert_.size()) {
    throw LengthMismatch("base norms have length " + std::to_string(base_.size()) +
                         " but perturbation norms have length " + std::to_string(pert_.size()));
  }
  check_norm_sequence(base_, "base_norms");
  check_norm_sequence(pert_, "pert_norms");
}

double block_norm_bound(const std::vector<std::vector<double>>& block_norm_grid) {
  const std::size_t k = block_norm_grid.size();
  if (k == 0) throw NonSquareGrid("block norm grid must be nonempty");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (block_norm_grid[i].size() != k) {
      throw NonSquareGrid("grid row " + std::to_string(i) + " has " +
                          std::to_string(block_norm_grid[i].size()) + " entries, expected " +
                          std::to_string(k));
    }
    check_norm_sequence(block_norm_grid[i], "grid");
    for (double x : block_norm_grid[i]) sum += x * x;
  }
  return std::sqrt(sum);
}

double gram_right_bound(const BlockNorms& norms) {
  const auto a = norms.base_norms();
  const auto e = norms.pert_norms();
  double sum = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    for (std::size_t j = 0; j < norms.size(); ++j) {
      const double d = a[i] * e[j] + e[i] * a[j] + e[i] * e[j];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

double gram_left_bound(const BlockNorms& norms) {
  const auto a = norms.base_norms();
  const auto e = norms.pert_norms();
  double sum = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    sum += 2.0 * a[i] * e[i] + e[i] * e[i];
  }
  return sum;
}

GroupBoundReport sv_deviation_bounds(const BlockNorms& norms, std::span<const double> sv_of_m,
                                     std::size_t rank) {
  if (rank > sv_of_m.size()) {
    throw InvalidArgument("rank " + std::to_string(rank) + " exceeds spectrum length " +
                          std::to_string(sv_of_m.size()));
  }
  if (rank > 0 && !(sv_of_m[rank - 1] > 0.0)) {
    throw ZeroSigmaAtRank("sigma_" + std::to_string(rank) +
                          " is zero, contradicting the declared rank");
  }
  GroupBoundReport report;
  report.k = norms.size();
  report.gram_right = gram_right_bound(norms);
  report.gram_left = gram_left_bound(norms);
  report.rank_used = rank;
  report.nonzero_index_bounds.reserve(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    report.nonzero_index_bounds.push_back(report.gram_left / sv_of_m[i]);
  }
  report.zero_index_bound = std::sqrt(report.gram_left);
  return report;
}

GroupBoundReport centroid_bounds(double base_norm, std::span<const double> sv_of_a,
                                 std::size_t rank, std::span<const double> pert_norms,
                                 std::size_t k) {
  if (k < 1) throw ZeroK("centroid setting requires k >= 1");
  if (pert_norms.size() != k - 1) {
    throw LengthMismatch("expected " + std::to_string(k - 1) + " perturbation norms for k = " +
                         std::to_string(k) + ", got " + std::to_string(pert_norms.size()));
  }
  if (rank > sv_of_a.size()) {
    throw InvalidArgument("rank " + std::to_string(rank) + " exceeds spectrum length " +
                          std::to_string(sv_of_a.size()));
  }
  if (rank > 0 && !(sv_of_a[rank - 1] > 0.0)) {
    throw ZeroSigmaAtRank("sigma_" + std::to_string(rank) +
                          " of the reference is zero, contradicting the declared rank");
  }
  // The implied block collection: k copies of the reference, the first
  // unperturbed. Routing through the generic bounds keeps the gram values and
  // their ordering invariant in the report.
  std::vector<double> base(k, base_norm);
  std::vector<double> pert(k, 0.0);
  for (std::size_t j = 0; j < pert_norms.size(); ++j) pert[j + 1] = pert_norms[j];
  const BlockNorms norms(std::move(base), std::move(pert));

  GroupBoundReport report;
  report.k = k;
  report.gram_right = gram_right_bound(norms);
  report.gram_left = gram_left_bound(norms);
  report.rank_used = rank;
  const double root_k = std::sqrt(static_cast<double>(k));
  report.nonzero_index_bounds.reserve(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    report.nonzero_index_bounds.push_back(report.gram_left / (root_k * sv_of_a[i]));
  }
  report.zero_index_bound = std::sqrt(report.gram_left);
  return report;
}

ContinuityEnvelope continuity_envelope(double base_norm, double sigma_i_of_a, std::size_t k,
                                       double eps) {
  if (k < 2) throw InvalidArgument("continuity envelope requires k >= 2");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
  if (!(sigma_i_of_a > 0.0)) throw NonpositiveSigma("sigma_i must be positive");
  if (!(base_norm >= 0.0) || !std::isfinite(base_norm)) {
    throw InvalidArgument("base norm must be finite and nonnegative");
  }
  const double mass = static_cast<double>(k - 1) * eps * (2.0 * base_norm + eps);
  return ContinuityEnvelope{mass / (std::sqrt(static_cast<double>(k)) * sigma_i_of_a),
                            std::sqrt(mass)};
}

std::optional<std::uint64_t> kmax(double tau, double sigma_r_of_a, double base_norm,
                                  double eps_bar) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw NonpositiveTau("tau must be positive");
  if (!(sigma_r_of_a > 0.0) || !std::isfinite(sigma_r_of_a)) {
    throw NonpositiveSigma("sigma_r must be positive");
  }
  if (!(eps_bar >= 0.0) || !std::isfinite(eps_bar)) {
    throw InvalidArgument("eps_bar must be finite and nonnegative");
  }
  if (!(base_norm >= 0.0) || !std::isfinite(base_norm)) {
    throw InvalidArgument("base norm must be finite and nonnegative");
  }
  if (eps_bar == 0.0) return std::nullopt;  // any group size fits the budget
  const double denom = 2.0 * base_norm * eps_bar + eps_bar * eps_bar;
  const double ratio = tau * sigma_r_of_a / denom;
  const double value = std::floor(ratio * ratio);
  constexpr double kMax = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
  if (value >= kMax) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(value);
}

}  // namespace bspc
