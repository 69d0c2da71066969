#include "bspc/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace bspc::io {

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

namespace {

constexpr char kMagic[5] = {'B', 'S', 'P', 'C', '1'};

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

double parse_field(const std::string& field, const std::filesystem::path& path,
                   std::size_t line_no) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + field +
                  "' as a number");
  }
  return value;
}

void write_u32(std::ofstream& out, std::uint32_t value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::uint32_t read_u32(std::ifstream& in, const std::filesystem::path& path) {
  std::uint32_t value = 0;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(value))) {
    throw IoError(path.string() + ": truncated container");
  }
  return value;
}

void write_doubles(std::ofstream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t count,
                                 const std::filesystem::path& path) {
  std::vector<double> values(count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw IoError(path.string() + ": truncated container");
  }
  return values;
}

void dump_value(const nlohmann::ordered_json& value, std::string& out, int indent, int depth);

void dump_indent(std::string& out, int indent, int depth) {
  out.push_back('\n');
  out.append(static_cast<std::size_t>(indent) * depth, ' ');
}

void dump_value(const nlohmann::ordered_json& value, std::string& out, int indent, int depth) {
  using value_t = nlohmann::ordered_json::value_t;
  switch (value.type()) {
    case value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        dump_indent(out, indent, depth + 1);
        out += nlohmann::ordered_json(key).dump();
        out += ": ";
        dump_value(item, out, indent, depth + 1);
      }
      dump_indent(out, indent, depth);
      out.push_back('}');
      return;
    }
    case value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        dump_indent(out, indent, depth + 1);
        dump_value(item, out, indent, depth + 1);
      }
      dump_indent(out, indent, depth);
      out.push_back(']');
      return;
    }
    case value_t::number_float:
      out += format_double_17(value.get<double>());
      return;
    default:
      out += value.dump();
      return;
  }
}

}  // namespace

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::in);
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string field;
    std::size_t this_cols = 0;
    while (std::getline(fields, field, ',')) {
      entries.push_back(parse_field(field, path, line_no));
      ++this_cols;
    }
    if (rows == 0) {
      cols = this_cols;
    } else if (this_cols != cols) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": row has " +
                    std::to_string(this_cols) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": empty matrix file");
  try {
    return DenseMatrix(rows, cols, entries);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& matrix) {
  std::ofstream out = open_output(path, std::ios::out);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out.put(',');
      out << format_double_17(matrix(i, j));
    }
    out.put('\n');
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::in);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    if (doc.value("schema_version", kManifestSchemaVersion) != kManifestSchemaVersion) {
      throw IoError(path.string() + ": unsupported manifest schema version");
    }
    const auto& blocks = doc.at("blocks");
    if (!blocks.is_array() || blocks.empty()) {
      throw IoError(path.string() + ": manifest must list at least one block path");
    }
    Manifest manifest{.block_paths = {},
                      .budget = SpectralBudget(doc.at("budget").at("target_rank").get<std::size_t>(),
                                               doc.at("budget").at("tau").get<double>()),
                      .rank_tol = std::nullopt,
                      .reference_policy = doc.value("reference_policy", "first-of-group")};
    if (manifest.reference_policy != "first-of-group") {
      throw IoError(path.string() + ": unsupported reference policy '" +
                    manifest.reference_policy + "'");
    }
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    for (const auto& entry : blocks) {
      std::filesystem::path block = entry.get<std::string>();
      manifest.block_paths.push_back(block.is_absolute() ? block : base / block);
    }
    if (doc.contains("rank_tol") && !doc.at("rank_tol").is_null()) {
      manifest.rank_tol = doc.at("rank_tol").get<double>();
    }
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const NonpositiveTau& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_container(const std::filesystem::path& path,
                     std::span<const CompressedGroup> groups) {
  std::ofstream out = open_output(path, std::ios::binary);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kContainerSchemaVersion);
  write_u32(out, static_cast<std::uint32_t>(groups.size()));
  for (const auto& group : groups) {
    write_u32(out, static_cast<std::uint32_t>(group.block_rows));
    write_u32(out, static_cast<std::uint32_t>(group.block_cols));
    write_u32(out, static_cast<std::uint32_t>(group.block_count));
    write_u32(out, static_cast<std::uint32_t>(group.rank));
    // basis in column-major
    std::vector<double> basis;
    basis.reserve(group.block_rows * group.rank);
    for (std::size_t j = 0; j < group.rank; ++j)
      for (std::size_t i = 0; i < group.block_rows; ++i) basis.push_back(group.basis(i, j));
    write_doubles(out, basis);
    for (const auto& coeff : group.coefficients) {
      write_doubles(out, coeff.row_major_entries());
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<CompressedGroup> read_container(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  char magic[sizeof(kMagic)] = {};
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path.string() + ": not a compressed-group container");
  }
  if (read_u32(in, path) != kContainerSchemaVersion) {
    throw IoError(path.string() + ": unsupported container schema version");
  }
  const std::uint32_t group_count = read_u32(in, path);
  std::vector<CompressedGroup> groups;
  groups.reserve(group_count);
  for (std::uint32_t g = 0; g < group_count; ++g) {
    const std::size_t m = read_u32(in, path);
    const std::size_t n = read_u32(in, path);
    const std::size_t k = read_u32(in, path);
    const std::size_t r = read_u32(in, path);
    if (m < 1 || n < 1 || k < 1 || r < 1) {
      throw IoError(path.string() + ": corrupt group header");
    }
    const std::vector<double> basis_cm = read_doubles(in, m * r, path);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r));
    std::memcpy(basis.data(), basis_cm.data(), basis_cm.size() * sizeof(double));
    CompressedGroup group{.basis = DenseMatrix(std::move(basis)),
                          .coefficients = {},
                          .rank = r,
                          .block_rows = m,
                          .block_cols = n,
                          .block_count = k};
    for (std::size_t i = 0; i < k; ++i) {
      const std::vector<double> coeff = read_doubles(in, r * n, path);
      group.coefficients.emplace_back(r, n, coeff);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::string format_double_17(double value) {
  if (!std::isfinite(value)) {
    // reports must stay valid JSON; clamp the (never expected) non-finite case
    value = value > 0 ? std::numeric_limits<double>::max()
                      : std::numeric_limits<double>::lowest();
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string dump_json_17(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_value(value, out, indent, 0);
  out.push_back('\n');
  return out;
}

}  // namespace bspc::io
