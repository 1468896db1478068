#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bangbang/optimizer.hpp"
#include "bangbang/sweep.hpp"

namespace bangbang {

inline constexpr int kFormatVersion = 1;

// Everything that determines a run. Persisted in resolved form next to
// every output; the hash covers all fields except threads and output_dir.
struct RunConfig {
  SystemSpec system{};
  double grid_lo = kDefaultGridLo;
  double grid_hi = kDefaultGridHi;
  std::size_t grid_points = kDefaultGridPoints;
  PipelineConfig pipeline{};
  double skip_threshold = kDefaultSkipThreshold;
  double width_floor = kDefaultWidthFloor;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output_dir = "bangbang-out";

  GridAxis axis() const { return GridAxis::uniform(grid_lo, grid_hi, grid_points); }
  SweepOptions sweep_options() const;
  void validate() const;
};

// Pretty-printed JSON of the resolved config.
std::string dump_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
// 16 hex digits of FNV-1a over the canonical config dump.
std::string config_hash(const RunConfig& config);

// Bit-exact float text: C99 hexadecimal literal.
std::string hex_double(double v);
double parse_hex_double(const std::string& text);

struct ProtocolRecord {
  SystemSpec system{};
  double ln_ri = 0.0;
  double ln_rt = 0.0;
  double tau = 0.0;
  double tau_extrapolated = 0.0;
  double ds = 0.0;
  JumpProtocol protocol;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string provenance = "dbmc>cbmc";
  std::vector<std::pair<double, double>> history;  // (tau, D_S) probes

  bool operator==(const ProtocolRecord&) const = default;
};

std::string serialize_record(const ProtocolRecord& record);
// Throws FormatError on unknown versions, truncation (naming the missing
// section) or malformed content.
ProtocolRecord deserialize_record(const std::string& text);

std::string serialize_cell(const CellResult& cell, const std::string& config_hash);
CellResult deserialize_cell(const std::string& text);

struct SweepMeta {
  SystemSpec system{};
  GridAxis axis;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string config;  // resolved config dump
};

std::string serialize_meta(const SweepMeta& meta);
SweepMeta deserialize_meta(const std::string& text);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and a rename, so readers never see a
// partial document.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Sweep output directory: meta.json plus cells/cell_<i>_<j>.json.
class SweepDirectory {
 public:
  // Creates the directory, or reopens it when `resume` is set. Reopening
  // refuses a directory whose config hash differs (IncompatibleInputs).
  static SweepDirectory open(const std::filesystem::path& root, const SweepMeta& meta, bool resume);
  // Read-only access to an existing sweep.
  static SweepDirectory existing(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const SweepMeta& meta() const { return meta_; }
  std::filesystem::path cell_path(std::size_t i, std::size_t j) const;

  // Valid stored cell, or nothing. Unreadable files are renamed to
  // *.corrupt so the cell is recomputed.
  std::optional<CellResult> load(std::size_t i, std::size_t j) const;
  void store(const CellResult& cell) const;
  SweepHooks hooks() const;

  // Everything on disk; never modifies the directory.
  SweepGrid grid() const;
  std::size_t quarantined() const { return quarantined_; }

 private:
  std::filesystem::path root_;
  SweepMeta meta_;
  mutable std::size_t quarantined_ = 0;
};

// Self-describing columnar text for plotting. Every file starts with
// '#' comment lines carrying the provenance fields.
struct PlotHeader {
  std::string title;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;
};

// Matrix with row axis ln r_i and column axis ln r_t; NaN entries are
// written as "nan".
void write_matrix(const std::filesystem::path& path, const PlotHeader& header,
                  const GridAxis& axis, const Eigen::MatrixXd& values,
                  const std::string& value_name);
void write_columns(const std::filesystem::path& path, const PlotHeader& header,
                   const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);
std::string format_decimal(double v);  // 17 significant digits

// Machine-readable failure description written by the CLI.
std::string error_document(int exit_code, const std::string& kind, const std::string& message);

}  // namespace bangbang
