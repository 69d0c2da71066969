// bspc: singular-value perturbation bounds for concatenated matrices,
// spectral-budget group planning, joint truncated-SVD compression and
// Monte-Carlo certification of every bound.
//
// Exit codes: 0 ok, 1 usage or internal error, 2 I/O, 3 shape mismatch,
// 4 rank-deficient reference, 5 rank too large, 6 soundness violation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bspc/bounds.hpp"
#include "bspc/compressor.hpp"
#include "bspc/harness.hpp"
#include "bspc/io.hpp"
#include "bspc/matrix.hpp"
#include "bspc/planner.hpp"
#include "bspc/version.hpp"

namespace {

using nlohmann::ordered_json;

struct CommonOptions {
  std::string manifest_path;
  std::optional<std::size_t> rank;
  std::optional<double> tau;
  std::optional<double> rank_tol;
  bool strict_paper_k = true;
  std::string out_path;
};

struct GeneratorOptions {
  std::size_t m = 8;
  std::size_t n = 4;
  std::size_t k = 3;
  std::size_t rank = 4;
  double eps = 0.05;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::string out_path;
};

struct LoadedManifest {
  bspc::io::Manifest manifest;
  std::vector<bspc::DenseMatrix> blocks;
};

ordered_json report_header(const std::string& command) {
  ordered_json report;
  report["schema_version"] = bspc::io::kReportSchemaVersion;
  report["library_version"] = bspc::kLibraryVersion;
  report["command"] = command;
  return report;
}

void emit_report(const ordered_json& report, const std::string& out_path) {
  const std::string text = bspc::io::dump_json_17(report);
  std::fwrite(text.data(), 1, text.size(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw bspc::IoError("cannot open " + out_path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw bspc::IoError("failed writing " + out_path);
  }
}

LoadedManifest load_manifest_blocks(const CommonOptions& opts) {
  LoadedManifest loaded{.manifest = bspc::io::read_manifest(opts.manifest_path), .blocks = {}};
  if (opts.rank) {
    loaded.manifest.budget =
        bspc::SpectralBudget(*opts.rank, opts.tau.value_or(loaded.manifest.budget.tolerance));
  } else if (opts.tau) {
    loaded.manifest.budget = bspc::SpectralBudget(loaded.manifest.budget.target_rank, *opts.tau);
  }
  if (opts.rank_tol) loaded.manifest.rank_tol = opts.rank_tol;
  loaded.blocks.reserve(loaded.manifest.block_paths.size());
  for (const auto& path : loaded.manifest.block_paths) {
    loaded.blocks.push_back(bspc::io::read_matrix_csv(path));
  }
  for (std::size_t i = 1; i < loaded.blocks.size(); ++i) {
    if (!loaded.blocks[i].same_shape(loaded.blocks[0])) {
      throw bspc::ShapeMismatch(
          loaded.manifest.block_paths[i].string() + " is " +
          std::to_string(loaded.blocks[i].rows()) + "x" + std::to_string(loaded.blocks[i].cols()) +
          " but " + loaded.manifest.block_paths[0].string() + " is " +
          std::to_string(loaded.blocks[0].rows()) + "x" + std::to_string(loaded.blocks[0].cols()));
    }
  }
  return loaded;
}

ordered_json manifest_config(const CommonOptions& opts, const LoadedManifest& loaded) {
  ordered_json config;
  config["manifest"] = opts.manifest_path;
  ordered_json blocks = ordered_json::array();
  for (const auto& path : loaded.manifest.block_paths) blocks.push_back(path.string());
  config["blocks"] = blocks;
  config["target_rank"] = loaded.manifest.budget.target_rank;
  config["tau"] = loaded.manifest.budget.tolerance;
  if (loaded.manifest.rank_tol) {
    config["rank_tol"] = *loaded.manifest.rank_tol;
  } else {
    config["rank_tol"] = nullptr;
  }
  config["reference_policy"] = loaded.manifest.reference_policy;
  return config;
}

ordered_json bound_report_json(const bspc::GroupBoundReport& report) {
  ordered_json out;
  out["k"] = report.k;
  out["gram_left"] = report.gram_left;
  out["gram_right"] = report.gram_right;
  out["nonzero_index_bounds"] = report.nonzero_index_bounds;
  out["zero_index_bound"] = report.zero_index_bound;
  out["rank_used"] = report.rank_used;
  return out;
}

int run_bounds(const CommonOptions& opts) {
  const LoadedManifest loaded = load_manifest_blocks(opts);
  const auto& blocks = loaded.blocks;
  const auto& budget = loaded.manifest.budget;

  const bspc::DenseMatrix& reference = blocks.front();
  const std::vector<double> ref_sv = bspc::singular_values(reference);
  const std::size_t ref_rank = bspc::numerical_rank(ref_sv, reference.rows(), reference.cols(),
                                                    loaded.manifest.rank_tol);
  if (ref_rank < budget.target_rank) {
    throw bspc::RankDeficientReference(
        loaded.manifest.block_paths.front().string() + " has numerical rank " +
        std::to_string(ref_rank) + ", below the budget rank " +
        std::to_string(budget.target_rank));
  }
  std::vector<double> pert_norms;
  for (std::size_t j = 1; j < blocks.size(); ++j) {
    pert_norms.push_back(bspc::spectral_norm(blocks[j] - reference));
  }
  const bspc::GroupBoundReport report = bspc::centroid_bounds(
      ref_sv.front(), ref_sv, budget.target_rank, pert_norms, blocks.size());

  ordered_json out = report_header("bounds");
  out["config"] = manifest_config(opts, loaded);
  ordered_json result;
  result["base_norm"] = ref_sv.front();
  result["reference_spectrum"] = ref_sv;
  result["reference_rank"] = ref_rank;
  result["pert_norms"] = pert_norms;
  result["bounds"] = bound_report_json(report);
  out["result"] = result;
  emit_report(out, opts.out_path);
  return 0;
}

ordered_json group_json(const bspc::GroupSpec& group) {
  ordered_json out;
  out["members"] = group.member_indices;
  out["reference_index"] = group.reference_index;
  out["k"] = group.member_indices.size();
  out["eps_bar"] = group.eps_bar;
  out["certified_bound"] = group.certified_bound;
  out["certified"] = group.certified;
  return out;
}

int run_plan(const CommonOptions& opts) {
  const LoadedManifest loaded = load_manifest_blocks(opts);
  const bspc::KForm form =
      opts.strict_paper_k ? bspc::KForm::paper_k : bspc::KForm::proof_k_minus_1;
  const bspc::GroupingPlan plan = bspc::plan_groups(loaded.blocks, loaded.manifest.budget,
                                                    loaded.manifest.rank_tol, form);
  ordered_json out = report_header("plan");
  ordered_json config = manifest_config(opts, loaded);
  config["k_form"] = opts.strict_paper_k ? "paper_k" : "proof_k_minus_1";
  out["config"] = config;
  ordered_json result;
  result["total_blocks"] = plan.total_blocks;
  result["group_count"] = plan.groups.size();
  ordered_json groups = ordered_json::array();
  for (const auto& group : plan.groups) groups.push_back(group_json(group));
  result["groups"] = groups;
  out["result"] = result;
  emit_report(out, opts.out_path);
  return 0;
}

int run_compress(const CommonOptions& opts, std::size_t rank, const std::string& container_path) {
  const LoadedManifest loaded = load_manifest_blocks(opts);
  const bspc::KForm form =
      opts.strict_paper_k ? bspc::KForm::paper_k : bspc::KForm::proof_k_minus_1;
  const bspc::GroupingPlan plan = bspc::plan_groups(loaded.blocks, loaded.manifest.budget,
                                                    loaded.manifest.rank_tol, form);

  std::vector<bspc::CompressedGroup> compressed;
  ordered_json groups = ordered_json::array();
  for (const auto& group : plan.groups) {
    std::vector<bspc::DenseMatrix> members;
    for (std::size_t idx : group.member_indices) members.push_back(loaded.blocks[idx]);
    bspc::CompressedGroup cg = bspc::compress_group(members, rank);
    const bspc::ReconstructionError err = bspc::group_reconstruction_error(cg, members);
    const bspc::StorageStats stats =
        bspc::storage_accounting(cg.block_rows, cg.block_cols, cg.block_count, rank);

    ordered_json entry = group_json(group);
    ordered_json storage;
    storage["joint_scalars"] = stats.joint_scalars;
    storage["separate_scalars"] = stats.separate_scalars;
    storage["ratio"] = stats.ratio;
    entry["storage"] = storage;
    ordered_json reconstruction;
    reconstruction["per_block"] = err.per_block;
    reconstruction["concatenated"] = err.concatenated;
    entry["reconstruction"] = reconstruction;
    groups.push_back(entry);
    compressed.push_back(std::move(cg));
  }
  bspc::io::write_container(container_path, compressed);

  ordered_json out = report_header("compress");
  ordered_json config = manifest_config(opts, loaded);
  config["rank"] = rank;
  config["container"] = container_path;
  out["config"] = config;
  ordered_json result;
  result["group_count"] = plan.groups.size();
  result["groups"] = groups;
  out["result"] = result;
  emit_report(out, "");
  return 0;
}

int run_verify(const GeneratorOptions& opts) {
  const bspc::harness::TrialConfig cfg{.m = opts.m,
                                       .n = opts.n,
                                       .k = opts.k,
                                       .base_rank = opts.rank,
                                       .eps = opts.eps,
                                       .seed = opts.seed,
                                       .trials = opts.trials};
  std::vector<bspc::harness::TightnessRecord> records = bspc::harness::run_bound_trials(cfg);
#ifdef BSPC_FAULT_INJECTION
  // Negative control: shrink every bound so the soundness gate must trip.
  for (auto& rec : records) {
    rec.bound *= 1e-3;
    rec.sound = rec.actual <= rec.bound + 1e-15;
    rec.ratio = rec.bound > 0 ? rec.actual / rec.bound : (rec.actual > 0 ? 1e300 : 0.0);
  }
#endif

  std::map<std::string, double> max_ratio;
  ordered_json violations = ordered_json::array();
  bool sound = true;
  for (const auto& rec : records) {
    const std::string name = bspc::harness::bound_kind_name(rec.bound_name);
    auto [it, inserted] = max_ratio.try_emplace(name, rec.ratio);
    if (!inserted && rec.ratio > it->second) it->second = rec.ratio;
    if (!rec.sound) {
      sound = false;
      ordered_json violation;
      violation["bound"] = name;
      violation["trial"] = rec.trial;
      violation["seed"] = rec.seed;
      violation["actual"] = rec.actual;
      violation["bound_value"] = rec.bound;
      violation["ratio"] = rec.ratio;
      violations.push_back(violation);
      std::fprintf(stderr, "soundness violation: %s trial %zu seed %llu actual %.17g bound %.17g\n",
                   name.c_str(), rec.trial, static_cast<unsigned long long>(rec.seed), rec.actual,
                   rec.bound);
    }
  }

  ordered_json out = report_header("verify");
  ordered_json config;
  config["m"] = opts.m;
  config["n"] = opts.n;
  config["k"] = opts.k;
  config["base_rank"] = opts.rank;
  config["eps"] = opts.eps;
  config["seed"] = opts.seed;
  config["trials"] = opts.trials;
  out["config"] = config;
  ordered_json result;
  result["records"] = records.size();
  ordered_json ratios;
  for (const auto& [name, ratio] : max_ratio) ratios[name] = ratio;
  result["max_ratio"] = ratios;
  result["violations"] = violations;
  result["sound"] = sound;
  out["result"] = result;
  emit_report(out, opts.out_path);

  for (const auto& [name, ratio] : max_ratio) {
    std::fprintf(stderr, "%-13s max ratio %.17g\n", name.c_str(), ratio);
  }
  return sound ? 0 : 6;
}

int run_sweep(const GeneratorOptions& opts, const std::vector<double>& eps_grid) {
  const bspc::harness::TrialConfig cfg{.m = opts.m,
                                       .n = opts.n,
                                       .k = opts.k,
                                       .base_rank = opts.rank,
                                       .eps = opts.eps,
                                       .seed = opts.seed,
                                       .trials = opts.trials};
  const bspc::harness::SweepResult sweep = bspc::harness::run_continuity_sweep(cfg, eps_grid);

  ordered_json out = report_header("sweep");
  ordered_json config;
  config["m"] = opts.m;
  config["n"] = opts.n;
  config["k"] = opts.k;
  config["base_rank"] = opts.rank;
  config["seed"] = opts.seed;
  config["trials"] = opts.trials;
  config["eps_grid"] = eps_grid;
  out["config"] = config;

  ordered_json rows = ordered_json::array();
  std::vector<std::string> csv;
  csv.push_back("eps,measured,envelope");
  for (const auto& row : sweep.rows) {
    ordered_json entry;
    entry["eps"] = row.eps;
    entry["measured"] = row.measured;
    entry["envelope"] = row.envelope;
    rows.push_back(entry);
    csv.push_back(bspc::io::format_double_17(row.eps) + "," +
                  bspc::io::format_double_17(row.measured) + "," +
                  bspc::io::format_double_17(row.envelope));
  }
  ordered_json result;
  result["rows"] = rows;
  result["csv"] = csv;
  result["sound"] = sweep.sound;
  result["decay_checked"] = sweep.decay_checked;
  result["decay_ok"] = sweep.decay_ok;
  out["result"] = result;
  emit_report(out, opts.out_path);
  return sweep.sound ? 0 : 6;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"singular-value perturbation bounds and joint compression for "
               "horizontally concatenated matrices"};
  app.require_subcommand(1);

  CommonOptions bounds_opts, plan_opts, compress_opts;
  GeneratorOptions verify_opts, sweep_opts;
  std::size_t compress_rank = 1;
  std::string container_path;
  std::vector<double> eps_grid;

  auto add_manifest_options = [](CLI::App* cmd, CommonOptions& opts, bool planner_flags,
                                 bool budget_rank_override) {
    cmd->add_option("--manifest", opts.manifest_path, "manifest JSON path")
        ->required();
    if (budget_rank_override) {
      cmd->add_option("--rank", opts.rank, "override the manifest budget rank");
    }
    cmd->add_option("--tau", opts.tau, "override the manifest budget tolerance");
    cmd->add_option("--rank-tol", opts.rank_tol, "relative numerical-rank tolerance");
    if (planner_flags) {
      cmd->add_option("--strict-paper-k", opts.strict_paper_k,
                      "use the k multiplier (true) or the tighter k-1 form (false)");
    }
  };

  auto add_generator_options = [](CLI::App* cmd, GeneratorOptions& opts, bool with_eps) {
    cmd->add_option("--m", opts.m, "block row count")->check(CLI::PositiveNumber);
    cmd->add_option("--n", opts.n, "block column count")->check(CLI::PositiveNumber);
    cmd->add_option("--k", opts.k, "blocks per instance")->check(CLI::PositiveNumber);
    cmd->add_option("--rank", opts.rank, "generated base-block rank")
        ->check(CLI::PositiveNumber);
    if (with_eps) {
      cmd->add_option("--eps", opts.eps, "perturbation spectral-norm cap")
          ->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--seed", opts.seed, "master seed (required)")->required();
    cmd->add_option("--trials", opts.trials, "instances per configuration")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts.out_path, "also write the report to this file");
  };

  CLI::App* bounds_cmd =
      app.add_subcommand("bounds", "centroid deviation bounds for a block manifest");
  add_manifest_options(bounds_cmd, bounds_opts, false, true);
  bounds_cmd->add_option("--out", bounds_opts.out_path, "also write the report to this file");

  CLI::App* plan_cmd =
      app.add_subcommand("plan", "greedy grouping of a block stream under the budget");
  add_manifest_options(plan_cmd, plan_opts, true, true);
  plan_cmd->add_option("--out", plan_opts.out_path, "also write the report to this file");

  CLI::App* compress_cmd =
      app.add_subcommand("compress", "plan, jointly compress and write a container");
  add_manifest_options(compress_cmd, compress_opts, true, false);
  compress_cmd->add_option("--rank", compress_rank, "retained rank per group")
      ->required()
      ->check(CLI::PositiveNumber);
  compress_cmd->add_option("--out", container_path, "output container path")->required();

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "randomized soundness certification of every bound");
  add_generator_options(verify_cmd, verify_opts, true);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "continuity sweep over a decreasing eps grid");
  add_generator_options(sweep_cmd, sweep_opts, false);
  sweep_cmd->add_option("--eps-grid", eps_grid, "strictly decreasing eps values")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto started = std::chrono::steady_clock::now();
  int status = 1;
  if (bounds_cmd->parsed()) {
    status = run_bounds(bounds_opts);
  } else if (plan_cmd->parsed()) {
    status = run_plan(plan_opts);
  } else if (compress_cmd->parsed()) {
    status = run_compress(compress_opts, compress_rank, container_path);
  } else if (verify_cmd->parsed()) {
    status = run_verify(verify_opts);
  } else if (sweep_cmd->parsed()) {
    status = run_sweep(sweep_opts, eps_grid);
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  std::fprintf(stderr, "elapsed: %.3f s\n", elapsed.count());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const bspc::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const bspc::ShapeMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const bspc::RankDeficientReference& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const bspc::RankTooLarge& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const bspc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
