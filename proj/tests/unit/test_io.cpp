#include <bangbang/io.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace bangbang;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bangbang_io_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(p);
  return p;
}

ProtocolRecord sample_record() {
  ProtocolRecord r;
  r.system = {{3, Boundary::periodic, true}, 4};
  r.ln_ri = -1.5;
  r.ln_rt = 0.1;  // not exactly representable
  r.tau = 1.0 / 3.0;
  r.tau_extrapolated = 0.30000000000000004;
  r.ds = 0.0199999;
  r.protocol = {1.0 / 3.0, {true, {0.1, 0.2, 0.25}}, {false, {std::nextafter(0.1, 1.0)}}};
  r.seed = 0xfedcba9876543210ULL;
  r.config_hash = "0123456789abcdef";
  r.history = {{0.5, 0.0}, {0.25, 0.3}, {1.0 / 3.0, 0.0199999}};
  return r;
}

CellResult sample_cell() {
  CellResult c;
  c.i = 2;
  c.j = 5;
  c.ln_ri = -0.7;
  c.ln_rt = 1.1;
  c.seed = 99;
  c.overlap = 0.8123;
  c.tau_critical = 0.28125;
  c.tau_extrapolated = 0.3;
  c.ds = 0.0186;
  c.tolerance_met = true;
  c.p_j = 2;
  c.p_k = 1;
  c.on_fraction_j = 0.4;
  c.protocol = {0.28125, {true, {0.1, 0.2}}, {false, {0.05}}};
  c.history = {{0.5, 0.0}, {0.28125, 0.0186}};
  return c;
}

SweepMeta sample_meta(const std::string& hash = "aaaaaaaaaaaaaaaa") {
  RunConfig cfg;
  cfg.grid_points = 3;
  return {cfg.system, cfg.axis(), hash, 7, dump_config(cfg)};
}

}  // namespace

TEST(HexDouble, BitExact) {
  for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max()}) {
    const double back = parse_hex_double(hex_double(v));
    EXPECT_EQ(std::signbit(back), std::signbit(v));
    EXPECT_EQ(back, v) << hex_double(v);
  }
  EXPECT_THROW(parse_hex_double(""), FormatError);
  EXPECT_THROW(parse_hex_double("0x1p0junk"), FormatError);
}

TEST(Config, RoundTripAndHash) {
  RunConfig cfg;
  cfg.system = {{3, Boundary::periodic, true}, 3};
  cfg.pipeline.epsilon = 0.03;
  cfg.pipeline.dbmc.reroll = false;
  cfg.pipeline.cbmc.bound.floor = 0.01;
  cfg.seed = 12345;
  const RunConfig back = parse_config(dump_config(cfg));
  EXPECT_EQ(dump_config(back), dump_config(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_EQ(config_hash(cfg).size(), 16u);

  RunConfig other = cfg;
  other.threads = 8;
  other.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(other), config_hash(cfg));
  other.seed = 12346;
  EXPECT_NE(config_hash(other), config_hash(cfg));
  other = cfg;
  other.pipeline.n_max = 32;
  EXPECT_NE(config_hash(other), config_hash(cfg));
}

TEST(Config, ValidationAndErrors) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grid_points = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_THROW(parse_config("{not json"), FormatError);
  EXPECT_THROW(parse_config("{\"format_version\": 2}"), FormatError);
}

TEST(Record, RoundTripIsBitExact) {
  const ProtocolRecord r = sample_record();
  const std::string text = serialize_record(r);
  const ProtocolRecord back = deserialize_record(text);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize_record(back), text);
}

TEST(Record, TruncationNamesMissingSection) {
  const std::string text = serialize_record(sample_record());
  const std::string cut = text.substr(0, text.find("\"protocol\""));
  try {
    deserialize_record(cut);
    FAIL() << "truncated record accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("protocol"), std::string::npos) << e.what();
  }
}

TEST(Record, UnknownVersionRejected) {
  std::string text = serialize_record(sample_record());
  const auto pos = text.find("\"format_version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 19, "\"format_version\": 99");
  try {
    deserialize_record(text);
    FAIL() << "version 99 accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported format version"), std::string::npos);
  }
}

TEST(Cell, RoundTrip) {
  const CellResult c = sample_cell();
  EXPECT_EQ(deserialize_cell(serialize_cell(c, "0123456789abcdef")), c);
  CellResult skipped;
  skipped.i = 1;
  skipped.j = 1;
  skipped.skipped = true;
  skipped.overlap = 1.0;
  EXPECT_EQ(deserialize_cell(serialize_cell(skipped, "h")), skipped);
  CellResult failed = skipped;
  failed.skipped = false;
  failed.error = "degenerate ground state";
  EXPECT_EQ(deserialize_cell(serialize_cell(failed, "h")), failed);
}

TEST(Meta, RoundTrip) {
  const SweepMeta m = sample_meta();
  const SweepMeta back = deserialize_meta(serialize_meta(m));
  EXPECT_EQ(back.system, m.system);
  EXPECT_EQ(back.axis, m.axis);
  EXPECT_EQ(back.config_hash, m.config_hash);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.config, m.config);
}

TEST(SweepDirectoryTest, StoreLoadAndQuarantine) {
  const fs::path root = scratch_dir("dir");
  const SweepDirectory dir = SweepDirectory::open(root, sample_meta(), false);
  EXPECT_TRUE(fs::exists(root / "meta.json"));
  CellResult c = sample_cell();
  c.i = 0;
  c.j = 1;
  dir.store(c);
  EXPECT_EQ(dir.load(0, 1), c);
  EXPECT_FALSE(dir.load(1, 0).has_value());

  {
    std::ofstream(dir.cell_path(1, 0)) << "{\"format_version\": 1, \"meta\"";
  }
  EXPECT_FALSE(dir.load(1, 0).has_value());
  EXPECT_EQ(dir.quarantined(), 1u);
  EXPECT_FALSE(fs::exists(dir.cell_path(1, 0)));
  EXPECT_TRUE(fs::exists(dir.cell_path(1, 0).string() + ".corrupt"));

  const SweepGrid g = SweepDirectory::existing(root).grid();
  EXPECT_EQ(g.rows(), 3u);
  EXPECT_EQ(g.at(0, 1), c);
  EXPECT_FALSE(g.at(1, 0).has_value());

  EXPECT_THROW(SweepDirectory::open(root, sample_meta(), false), InvalidArgument);
  EXPECT_NO_THROW(SweepDirectory::open(root, sample_meta(), true));
  EXPECT_THROW(SweepDirectory::open(root, sample_meta("bbbbbbbbbbbbbbbb"), true), IncompatibleInputs);
  EXPECT_THROW(SweepDirectory::existing(root / "nowhere"), InvalidArgument);
  fs::remove_all(root);
}

TEST(SweepDirectoryTest, ForeignHashCellIsRecomputed) {
  const fs::path root = scratch_dir("hash");
  const SweepDirectory dir = SweepDirectory::open(root, sample_meta(), false);
  CellResult c = sample_cell();
  c.i = 0;
  c.j = 2;
  write_file_atomic(dir.cell_path(0, 2), serialize_cell(c, "ffffffffffffffff"));
  EXPECT_FALSE(dir.load(0, 2).has_value());
  fs::remove_all(root);
}

TEST(PlotFiles, MatrixLayout) {
  const fs::path root = scratch_dir("plot");
  fs::create_directories(root);
  const GridAxis axis{{-1.0, 1.0}};
  Eigen::MatrixXd m(2, 2);
  m << 1.0, std::nan(""), 0.5, 2.0;
  write_matrix(root / "m.dat", {"tau", "abc", 3, {"note"}}, axis, m, "tau_critical");
  const std::string text = read_file(root / "m.dat");
  EXPECT_EQ(text.front(), '#');
  EXPECT_NE(text.find("abc"), std::string::npos);
  EXPECT_NE(text.find("nan"), std::string::npos);
  EXPECT_EQ(format_decimal(0.1), "0.10000000000000001");
  EXPECT_EQ(format_decimal(std::nan("")), "nan");
  write_columns(root / "c.dat", {"cols", "abc", 3, {}}, {"x", "y"}, {{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_NE(read_file(root / "c.dat").find("# x y"), std::string::npos);
  fs::remove_all(root);
}

TEST(ErrorDocument, IsJson) {
  const std::string doc = error_document(3, "StatesCoincide", "initial \"and\" target");
  EXPECT_NE(doc.find("\"exit_code\": 3"), std::string::npos);
  EXPECT_NE(doc.find("\\\"and\\\""), std::string::npos);
}
