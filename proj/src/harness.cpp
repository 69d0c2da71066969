#include "bspc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bspc/bounds.hpp"

namespace bspc::harness {

namespace {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Record scales: gram-level comparisons live in sigma^2 units, singular-value
// comparisons in sigma units.
double make_scale(double reference) { return std::max(1.0, reference); }

TightnessRecord make_record(BoundKind kind, double actual, double bound, double scale,
                            std::size_t trial, std::uint64_t seed) {
  TightnessRecord rec;
  rec.bound_name = kind;
  rec.actual = actual;
  rec.bound = bound;
  rec.trial = trial;
  rec.seed = seed;
  rec.sound = actual <= bound + 1e-9 * scale;
  if (bound > 0.0) {
    rec.ratio = actual / bound;
  } else {
    // Unperturbed instances: a zero bound with only floating-point residue in
    // the measurement counts as ratio 0.
    rec.ratio = actual <= 1e-9 * scale ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return rec;
}

Eigen::MatrixXd gaussian_matrix(std::size_t m, std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.next_gaussian();
  return g;
}

// Per-block perturbation cap: zero for roughly one block in eight, otherwise
// a draw in [0.1, 1) of eps. Keeping nonzero draws away from zero keeps the
// tightness ratios well conditioned.
double draw_pert_scale(double eps, Rng& rng) {
  const double u = rng.next_unit();
  if (eps == 0.0 || u < 0.125) return 0.0;
  return eps * (0.1 + 0.9 * rng.next_unit());
}

struct GeneralInstance {
  std::vector<DenseMatrix> base;
  std::vector<DenseMatrix> perturbed;
  std::vector<double> base_norms;
  std::vector<double> pert_norms;
};

GeneralInstance build_general_instance(const TrialConfig& cfg, std::uint64_t seed) {
  GeneralInstance inst;
  Rng scale_rng(trial_seed(seed, 0));
  for (std::size_t i = 0; i < cfg.k; ++i) {
    const double block_scale = 0.5 + 1.5 * scale_rng.next_unit();
    const double pert_scale = draw_pert_scale(cfg.eps, scale_rng);
    DenseMatrix a = block_scale * gen_block(cfg.m, cfg.n, cfg.base_rank,
                                            trial_seed(seed, 100 + i));
    DenseMatrix e = gen_perturbation(cfg.m, cfg.n, pert_scale, trial_seed(seed, 200 + i));
    inst.base_norms.push_back(spectral_norm(a));
    inst.pert_norms.push_back(spectral_norm(e));
    inst.perturbed.push_back(a + e);
    inst.base.push_back(std::move(a));
  }
  return inst;
}

void run_gram_and_thm2(const TrialConfig& cfg, std::size_t trial, std::uint64_t seed,
                       std::vector<TightnessRecord>& records) {
  const GeneralInstance inst = build_general_instance(cfg, seed);
  const BlockNorms norms(inst.base_norms, inst.pert_norms);

  const DenseMatrix m = concat_h(inst.base);
  const DenseMatrix m_tilde = concat_h(inst.perturbed);

  const Eigen::MatrixXd d_right =
      m_tilde.eigen().transpose() * m_tilde.eigen() - m.eigen().transpose() * m.eigen();
  const Eigen::MatrixXd d_left =
      m_tilde.eigen() * m_tilde.eigen().transpose() - m.eigen() * m.eigen().transpose();

  const std::vector<double> sv_m = singular_values(m);
  const std::vector<double> sv_tilde = singular_values(m_tilde);
  const double sigma1 = sv_m.front();
  const double gram_scale = make_scale(sigma1 * sigma1);
  const double sv_scale = make_scale(sigma1);

  records.push_back(make_record(BoundKind::gram_right,
                                spectral_norm(DenseMatrix(d_right)),
                                gram_right_bound(norms), gram_scale, trial, seed));
  records.push_back(make_record(BoundKind::gram_left,
                                spectral_norm(DenseMatrix(d_left)),
                                gram_left_bound(norms), gram_scale, trial, seed));

  const std::size_t rank = numerical_rank(sv_m, m.rows(), m.cols());
  const GroupBoundReport report = sv_deviation_bounds(norms, sv_m, rank);
  if (report.gram_left > report.gram_right + 1e-12 * gram_scale) {
    throw Error("bound ordering violated on trial seed " + std::to_string(seed));
  }
  for (std::size_t i = 0; i < rank; ++i) {
    records.push_back(make_record(BoundKind::thm2_nonzero, std::abs(sv_tilde[i] - sv_m[i]),
                                  report.nonzero_index_bounds[i], sv_scale, trial, seed));
  }
  for (std::size_t i = rank; i < sv_tilde.size(); ++i) {
    records.push_back(make_record(BoundKind::thm2_zero, sv_tilde[i], report.zero_index_bound,
                                  sv_scale, trial, seed));
  }
}

void run_prop3(const TrialConfig& cfg, std::size_t trial, std::uint64_t seed,
               std::vector<TightnessRecord>& records) {
  const std::size_t g = std::max<std::size_t>(1, std::min<std::size_t>(cfg.k, 4));
  Rng scale_rng(trial_seed(seed, 1));
  std::vector<std::vector<double>> grid(g, std::vector<double>(g, 0.0));
  Eigen::MatrixXd assembled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g * cfg.m),
                                                    static_cast<Eigen::Index>(g * cfg.n));
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      const double pert_scale = draw_pert_scale(cfg.eps, scale_rng);
      const DenseMatrix block =
          gen_perturbation(cfg.m, cfg.n, pert_scale, trial_seed(seed, 300 + i * g + j));
      grid[i][j] = spectral_norm(block);
      assembled.block(static_cast<Eigen::Index>(i * cfg.m), static_cast<Eigen::Index>(j * cfg.n),
                      static_cast<Eigen::Index>(cfg.m), static_cast<Eigen::Index>(cfg.n)) =
          block.eigen();
    }
  }
  const double bound = block_norm_bound(grid);
  const double actual =
      assembled.isZero(0.0) ? 0.0 : spectral_norm(DenseMatrix(assembled));
  records.push_back(
      make_record(BoundKind::prop3, actual, bound, make_scale(bound), trial, seed));
}

void run_cor1(const TrialConfig& cfg, std::size_t trial, std::uint64_t seed,
              std::vector<TightnessRecord>& records) {
  Rng scale_rng(trial_seed(seed, 2));
  const double block_scale = 0.5 + 1.5 * scale_rng.next_unit();
  const DenseMatrix a0 =
      block_scale * gen_block(cfg.m, cfg.n, cfg.base_rank, trial_seed(seed, 400));
  const std::vector<double> sv_a0 = singular_values(a0);
  const double base_norm = sv_a0.front();

  std::vector<DenseMatrix> perturbed{a0};
  std::vector<double> pert_norms;
  for (std::size_t j = 1; j < cfg.k; ++j) {
    const double pert_scale = draw_pert_scale(cfg.eps, scale_rng);
    const DenseMatrix e = gen_perturbation(cfg.m, cfg.n, pert_scale, trial_seed(seed, 500 + j));
    pert_norms.push_back(spectral_norm(e));
    perturbed.push_back(a0 + e);
  }
  const DenseMatrix m_tilde = concat_h(perturbed);
  const std::vector<double> sv_tilde = singular_values(m_tilde);

  const std::size_t rank = numerical_rank(sv_a0, cfg.m, cfg.n);
  const GroupBoundReport report = centroid_bounds(base_norm, sv_a0, rank, pert_norms, cfg.k);
  const std::vector<double> ideal = replicated_spectrum(sv_a0, cfg.k);
  const double sv_scale = make_scale(ideal.front());

  for (std::size_t i = 0; i < rank; ++i) {
    records.push_back(make_record(BoundKind::cor1, std::abs(sv_tilde[i] - ideal[i]),
                                  report.nonzero_index_bounds[i], sv_scale, trial, seed));
  }
  for (std::size_t i = rank; i < sv_tilde.size(); ++i) {
    records.push_back(make_record(BoundKind::cor1, sv_tilde[i], report.zero_index_bound,
                                  sv_scale, trial, seed));
  }
}

}  // namespace

const char* bound_kind_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::gram_right: return "gram_right";
    case BoundKind::gram_left: return "gram_left";
    case BoundKind::thm2_nonzero: return "thm2_nonzero";
    case BoundKind::thm2_zero: return "thm2_zero";
    case BoundKind::prop3: return "prop3";
    case BoundKind::cor1: return "cor1";
    case BoundKind::cor2_envelope: return "cor2_envelope";
  }
  return "unknown";
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return splitmix64_mix(state_);
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - next_unit();  // (0, 1], keeps the log finite
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

DenseMatrix gen_block(std::size_t m, std::size_t n, std::size_t rank, std::uint64_t seed) {
  if (rank < 1) throw InvalidArgument("block rank must be at least 1");
  if (rank > std::min(m, n)) {
    throw RankTooLarge("block rank " + std::to_string(rank) + " exceeds min(m, n) = " +
                       std::to_string(std::min(m, n)));
  }
  Rng rng(seed);
  const Eigen::MatrixXd left = gaussian_matrix(m, rank, rng);
  const Eigen::MatrixXd right = gaussian_matrix(rank, n, rng);
  DenseMatrix product{Eigen::MatrixXd(left * right)};
  const double norm = spectral_norm(product);
  return DenseMatrix(product.eigen() / norm);
}

DenseMatrix gen_perturbation(std::size_t m, std::size_t n, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("perturbation norm must be finite and nonnegative");
  }
  if (eps == 0.0) return DenseMatrix(m, n);
  Rng rng(seed);
  DenseMatrix g{gaussian_matrix(m, n, rng)};
  const double norm = spectral_norm(g);
  return DenseMatrix(g.eigen() * (eps / norm));
}

std::vector<TightnessRecord> run_bound_trials(const TrialConfig& cfg) {
  if (cfg.trials < 1) throw InvalidArgument("trial count must be at least 1");
  if (cfg.k < 1) throw ZeroK("block count must be at least 1");
  if (cfg.base_rank < 1 || cfg.base_rank > std::min(cfg.m, cfg.n)) {
    throw RankTooLarge("base rank must lie in [1, min(m, n)]");
  }
  if (!(cfg.eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");

  std::vector<TightnessRecord> records;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = trial_seed(cfg.seed, t);
    try {
      run_gram_and_thm2(cfg, t, seed, records);
      run_prop3(cfg, t, seed, records);
      run_cor1(cfg, t, seed, records);
    } catch (const Error& e) {
      throw Error("trial " + std::to_string(t) + " (seed " + std::to_string(seed) +
                  "): " + e.what());
    }
  }
  return records;
}

SweepResult run_continuity_sweep(const TrialConfig& cfg, std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw EmptyGrid("eps grid must be nonempty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw InvalidArgument("eps grid entries must be positive");
    if (i > 0 && eps_grid[i] >= eps_grid[i - 1]) {
      throw InvalidArgument("eps grid must be strictly decreasing");
    }
  }
  if (cfg.k < 2) throw InvalidArgument("continuity sweep requires k >= 2");
  if (cfg.base_rank < 1 || cfg.base_rank > std::min(cfg.m, cfg.n)) {
    throw RankTooLarge("base rank must lie in [1, min(m, n)]");
  }
  if (cfg.trials < 1) throw InvalidArgument("trial count must be at least 1");

  SweepResult result;
  result.rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    SweepRow row{.eps = eps, .measured = 0.0, .envelope = 0.0};
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = trial_seed(cfg.seed, t);
      const DenseMatrix a0 = gen_block(cfg.m, cfg.n, cfg.base_rank, trial_seed(seed, 0));
      const std::vector<double> sv_a0 = singular_values(a0);
      const std::size_t rank = numerical_rank(sv_a0, cfg.m, cfg.n);

      std::vector<DenseMatrix> perturbed{a0};
      for (std::size_t j = 1; j < cfg.k; ++j) {
        // Same seed across grid points: the direction is fixed, only the
        // magnitude shrinks, so decay along the grid is clean.
        perturbed.push_back(a0 + gen_perturbation(cfg.m, cfg.n, eps, trial_seed(seed, j)));
      }
      const std::vector<double> sv_tilde = singular_values(concat_h(perturbed));
      const std::vector<double> ideal = replicated_spectrum(sv_a0, cfg.k);

      double measured = 0.0;
      for (std::size_t i = 0; i < rank; ++i) {
        measured = std::max(measured, std::abs(sv_tilde[i] - ideal[i]));
      }
      const double envelope =
          continuity_envelope(sv_a0.front(), sv_a0[rank - 1], cfg.k, eps).nonzero;
      if (measured > envelope + 1e-9 * make_scale(ideal.front())) result.sound = false;
      row.measured = std::max(row.measured, measured);
      row.envelope = std::max(row.envelope, envelope);
    }
    result.rows.push_back(row);
  }
  if (eps_grid.front() / eps_grid.back() >= 100.0) {
    result.decay_checked = true;
    result.decay_ok = result.rows.back().measured <= result.rows.front().measured / 10.0;
  }
  return result;
}

}  // namespace bspc::harness
