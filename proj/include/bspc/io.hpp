#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bspc/compressor.hpp"
#include "bspc/matrix.hpp"
#include "bspc/planner.hpp"

namespace bspc::io {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::uint32_t kContainerSchemaVersion = 1;

/// Input description for the file-driven commands: ordered block paths plus
/// the spectral budget. Relative block paths resolve against the manifest's
/// directory.
struct Manifest {
  std::vector<std::filesystem::path> block_paths;
  SpectralBudget budget{1, 1.0};
  std::optional<double> rank_tol;
  std::string reference_policy = "first-of-group";
};

/// CSV matrix interchange: one row per line, comma-separated decimal floats.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& matrix);

Manifest read_manifest(const std::filesystem::path& path);

/// Compressed-group container: magic "BSPC1", little-endian u32 schema version
/// and group count, then per group u32 m, n, k, r, the basis in column-major
/// f64 and each block's coefficients in row-major f64.
void write_container(const std::filesystem::path& path,
                     std::span<const CompressedGroup> groups);
std::vector<CompressedGroup> read_container(const std::filesystem::path& path);

/// Serialize a report with every floating-point value at 17 significant
/// digits, so equal inputs yield byte-identical output.
std::string dump_json_17(const nlohmann::ordered_json& value, int indent = 2);

/// %.17g rendering of one double.
std::string format_double_17(double value);

}  // namespace bspc::io
