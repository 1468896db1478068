#include "bangbang/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace bangbang {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------- helpers ----------

Json hex_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(hex_double(x));
  return a;
}

std::vector<double> parse_hex_array(const Json& a) {
  std::vector<double> out;
  for (const Json& x : a) out.push_back(parse_hex_double(x.get<std::string>()));
  return out;
}

double hex_field(const Json& j, const char* key) { return parse_hex_double(j.at(key).get<std::string>()); }

Json system_json(const SystemSpec& s) {
  return Json{{"sites", s.sites()},
              {"side_length", s.lattice.side_length},
              {"boundary", std::string(to_string(s.lattice.boundary))},
              {"deduplicate", s.lattice.deduplicate},
              {"occupants", s.occupants}};
}

SystemSpec parse_system(const Json& j) {
  SystemSpec s;
  s.lattice.side_length = j.at("side_length").get<int>();
  s.lattice.boundary = parse_boundary(j.at("boundary").get<std::string>());
  s.lattice.deduplicate = j.at("deduplicate").get<bool>();
  s.occupants = j.at("occupants").get<int>();
  return s;
}

Json trace_json(const ControlTrace& c) {
  return Json{{"initial_on", c.initial_on}, {"jumps", hex_array(c.jumps)}};
}

ControlTrace parse_trace(const Json& j) {
  ControlTrace c;
  c.initial_on = j.at("initial_on").get<bool>();
  c.jumps = parse_hex_array(j.at("jumps"));
  return c;
}

Json protocol_json(const JumpProtocol& p) {
  return Json{{"tau", hex_double(p.tau)}, {"j", trace_json(p.j)}, {"k", trace_json(p.k)}};
}

JumpProtocol parse_protocol(const Json& j) {
  JumpProtocol p;
  p.tau = hex_field(j, "tau");
  p.j = parse_trace(j.at("j"));
  p.k = parse_trace(j.at("k"));
  return p;
}

Json history_json(const std::vector<std::pair<double, double>>& h) {
  Json a = Json::array();
  for (const auto& [tau, ds] : h) a.push_back(Json::array({hex_double(tau), hex_double(ds)}));
  return a;
}

std::vector<std::pair<double, double>> parse_history(const Json& a) {
  std::vector<std::pair<double, double>> out;
  for (const Json& e : a)
    out.emplace_back(parse_hex_double(e.at(0).get<std::string>()), parse_hex_double(e.at(1).get<std::string>()));
  return out;
}

Json optional_hex(const std::optional<double>& v) { return v ? Json(hex_double(*v)) : Json(nullptr); }

std::optional<double> parse_optional_hex(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_hex_double(j.get<std::string>());
}

void check_version(const Json& version) {
  const std::string text = version.is_string() ? version.get<std::string>() : version.dump();
  if (text != std::to_string(kFormatVersion))
    throw FormatError("unsupported format version " + text + " (expected " + std::to_string(kFormatVersion) + ")");
}

// Parses a versioned document whose top-level sections must appear in
// `sections` order. Truncated text names the first section it lacks.
Json parse_document(const std::string& text, const std::vector<std::string>& sections,
                    const char* kind) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    static const std::regex version_re("\"format_version\"\\s*:\\s*\"?([^\",}\\s]+)");
    std::smatch m;
    if (std::regex_search(text, m, version_re)) check_version(Json(m[1].str()));
    for (const std::string& s : sections)
      if (text.find('"' + s + '"') == std::string::npos)
        throw FormatError(std::string("truncated ") + kind + ": missing section '" + s + "'");
    throw FormatError(std::string("malformed ") + kind + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(std::string("malformed ") + kind + ": not an object");
  if (!doc.contains("format_version")) throw FormatError(std::string(kind) + " lacks section 'format_version'");
  check_version(doc["format_version"]);
  for (const std::string& s : sections)
    if (!doc.contains(s)) throw FormatError(std::string(kind) + " lacks section '" + s + "'");
  return doc;
}

template <class F>
auto with_format_errors(const char* kind, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed ") + kind + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("malformed ") + kind + ": " + e.what());
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json anneal_json(const AnnealOptions& a) {
  return Json{{"decay", a.decay},
              {"cooling_ratio", a.cooling_ratio},
              {"frozen_stages", a.frozen_stages},
              {"moves_per_parameter", a.moves_per_parameter},
              {"calibration_samples", a.calibration_samples},
              {"target_acceptance", a.target_acceptance}};
}

void parse_anneal(const Json& j, AnnealOptions& a) {
  a.decay = j.at("decay").get<double>();
  a.cooling_ratio = j.at("cooling_ratio").get<double>();
  a.frozen_stages = j.at("frozen_stages").get<int>();
  a.moves_per_parameter = j.at("moves_per_parameter").get<double>();
  a.calibration_samples = j.at("calibration_samples").get<int>();
  a.target_acceptance = j.at("target_acceptance").get<double>();
}

Json config_json(const RunConfig& c, bool with_local) {
  const PipelineConfig& p = c.pipeline;
  Json dbmc = anneal_json(p.dbmc.anneal);
  dbmc["refine_temperature_scale"] = p.dbmc.refine_temperature_scale;
  dbmc["reroll"] = p.dbmc.reroll;
  Json cbmc = anneal_json(p.cbmc.anneal);
  cbmc["bound_initial"] = p.cbmc.bound.initial;
  cbmc["bound_floor"] = p.cbmc.bound.floor;
  Json j{{"format_version", kFormatVersion},
         {"system", system_json(c.system)},
         {"grid", {{"lo", c.grid_lo}, {"hi", c.grid_hi}, {"points", c.grid_points}}},
         {"pipeline",
          {{"epsilon", p.epsilon},
           {"epsilon_tol", p.epsilon_tol},
           {"n_min", p.n_min},
           {"n_max", p.n_max},
           {"restarts", p.restarts},
           {"initial_tau", p.initial_tau},
           {"extrapolation_target", p.extrapolation_target},
           {"kappa", p.kappa},
           {"max_probes", p.max_probes},
           {"dbmc", dbmc},
           {"cbmc", cbmc}}},
         {"analysis", {{"skip_threshold", c.skip_threshold}, {"width_floor", c.width_floor}}},
         {"seed", c.seed}};
  if (with_local) {
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

std::string cells_dir(const fs::path& root) { return (root / "cells").string(); }

}  // namespace

// ---------- config ----------

SweepOptions RunConfig::sweep_options() const {
  SweepOptions o;
  o.seed = seed;
  o.threads = threads;
  o.skip_threshold = skip_threshold;
  o.width_floor = width_floor;
  return o;
}

void RunConfig::validate() const {
  if (system.lattice.side_length < 1) throw InvalidArgument("lattice side length must be >= 1");
  if (system.occupants < 0 || system.occupants > system.sites())
    throw InvalidArgument("occupant count must lie in [0, M]");
  axis();
  pipeline.validate();
  if (!(skip_threshold > 0.0 && skip_threshold <= 1.0)) throw InvalidArgument("skip threshold must lie in (0, 1]");
  if (!(width_floor >= 0.0 && width_floor < 0.5)) throw InvalidArgument("width floor must lie in [0, 0.5)");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

std::string dump_config(const RunConfig& config) { return config_json(config, true).dump(2) + "\n"; }

RunConfig parse_config(const std::string& text) {
  const Json j = parse_document(text, {"system", "grid", "pipeline", "analysis", "seed"}, "config");
  return with_format_errors("config", [&] {
    RunConfig c;
    c.system = parse_system(j.at("system"));
    c.grid_lo = j.at("grid").at("lo").get<double>();
    c.grid_hi = j.at("grid").at("hi").get<double>();
    c.grid_points = j.at("grid").at("points").get<std::size_t>();
    const Json& p = j.at("pipeline");
    c.pipeline.epsilon = p.at("epsilon").get<double>();
    c.pipeline.epsilon_tol = p.at("epsilon_tol").get<double>();
    c.pipeline.n_min = p.at("n_min").get<std::size_t>();
    c.pipeline.n_max = p.at("n_max").get<std::size_t>();
    c.pipeline.restarts = p.at("restarts").get<int>();
    c.pipeline.initial_tau = p.at("initial_tau").get<double>();
    c.pipeline.extrapolation_target = p.at("extrapolation_target").get<double>();
    c.pipeline.kappa = p.at("kappa").get<double>();
    c.pipeline.max_probes = p.at("max_probes").get<int>();
    parse_anneal(p.at("dbmc"), c.pipeline.dbmc.anneal);
    c.pipeline.dbmc.refine_temperature_scale = p.at("dbmc").at("refine_temperature_scale").get<double>();
    c.pipeline.dbmc.reroll = p.at("dbmc").at("reroll").get<bool>();
    parse_anneal(p.at("cbmc"), c.pipeline.cbmc.anneal);
    c.pipeline.cbmc.bound.initial = p.at("cbmc").at("bound_initial").get<double>();
    c.pipeline.cbmc.bound.floor = p.at("cbmc").at("bound_floor").get<double>();
    c.skip_threshold = j.at("analysis").at("skip_threshold").get<double>();
    c.width_floor = j.at("analysis").at("width_floor").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    return c;
  });
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_json(config, false).dump())));
  return buf;
}

// ---------- floats ----------

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& text) {
  if (text.empty()) throw FormatError("empty float literal");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw FormatError("invalid float literal '" + text + "'");
  return v;
}

// ---------- records ----------

std::string serialize_record(const ProtocolRecord& r) {
  Json doc{{"format_version", kFormatVersion},
           {"meta", {{"config_hash", r.config_hash}, {"seed", r.seed}}},
           {"system", system_json(r.system)},
           {"run",
            {{"ln_ri", hex_double(r.ln_ri)},
             {"ln_rt", hex_double(r.ln_rt)},
             {"tau", hex_double(r.tau)},
             {"tau_extrapolated", hex_double(r.tau_extrapolated)},
             {"ds", hex_double(r.ds)},
             {"provenance", r.provenance},
             {"history", history_json(r.history)}}},
           {"protocol", protocol_json(r.protocol)}};
  return doc.dump(2) + "\n";
}

ProtocolRecord deserialize_record(const std::string& text) {
  const Json doc = parse_document(text, {"meta", "system", "run", "protocol"}, "protocol record");
  return with_format_errors("protocol record", [&] {
    ProtocolRecord r;
    r.config_hash = doc.at("meta").at("config_hash").get<std::string>();
    r.seed = doc.at("meta").at("seed").get<std::uint64_t>();
    r.system = parse_system(doc.at("system"));
    const Json& run = doc.at("run");
    r.ln_ri = hex_field(run, "ln_ri");
    r.ln_rt = hex_field(run, "ln_rt");
    r.tau = hex_field(run, "tau");
    r.tau_extrapolated = hex_field(run, "tau_extrapolated");
    r.ds = hex_field(run, "ds");
    r.provenance = run.at("provenance").get<std::string>();
    r.history = parse_history(run.at("history"));
    r.protocol = parse_protocol(doc.at("protocol"));
    r.protocol.validate();
    return r;
  });
}

std::string serialize_cell(const CellResult& c, const std::string& hash) {
  Json cell{{"i", c.i},
            {"j", c.j},
            {"ln_ri", hex_double(c.ln_ri)},
            {"ln_rt", hex_double(c.ln_rt)},
            {"overlap", hex_double(c.overlap)},
            {"skipped", c.skipped},
            {"error", c.error ? Json(*c.error) : Json(nullptr)},
            {"tau_critical", hex_double(c.tau_critical)},
            {"tau_extrapolated", hex_double(c.tau_extrapolated)},
            {"ds", hex_double(c.ds)},
            {"tolerance_met", c.tolerance_met},
            {"p_j", c.p_j},
            {"p_k", c.p_k},
            {"on_fraction_j", optional_hex(c.on_fraction_j)},
            {"on_fraction_k", optional_hex(c.on_fraction_k)},
            {"history", history_json(c.history)}};
  Json doc{{"format_version", kFormatVersion},
           {"meta", {{"config_hash", hash}, {"seed", c.seed}}},
           {"cell", cell},
           {"protocol", protocol_json(c.protocol)}};
  return doc.dump(2) + "\n";
}

CellResult deserialize_cell(const std::string& text) {
  const Json doc = parse_document(text, {"meta", "cell", "protocol"}, "cell record");
  return with_format_errors("cell record", [&] {
    CellResult c;
    const Json& j = doc.at("cell");
    c.i = j.at("i").get<std::size_t>();
    c.j = j.at("j").get<std::size_t>();
    c.seed = doc.at("meta").at("seed").get<std::uint64_t>();
    c.ln_ri = hex_field(j, "ln_ri");
    c.ln_rt = hex_field(j, "ln_rt");
    c.overlap = hex_field(j, "overlap");
    c.skipped = j.at("skipped").get<bool>();
    if (!j.at("error").is_null()) c.error = j.at("error").get<std::string>();
    c.tau_critical = hex_field(j, "tau_critical");
    c.tau_extrapolated = hex_field(j, "tau_extrapolated");
    c.ds = hex_field(j, "ds");
    c.tolerance_met = j.at("tolerance_met").get<bool>();
    c.p_j = j.at("p_j").get<int>();
    c.p_k = j.at("p_k").get<int>();
    c.on_fraction_j = parse_optional_hex(j.at("on_fraction_j"));
    c.on_fraction_k = parse_optional_hex(j.at("on_fraction_k"));
    c.history = parse_history(j.at("history"));
    c.protocol = parse_protocol(doc.at("protocol"));
    if (c.ok()) c.protocol.validate();
    return c;
  });
}

std::string serialize_meta(const SweepMeta& m) {
  Json doc{{"format_version", kFormatVersion},
           {"meta", {{"config_hash", m.config_hash}, {"seed", m.seed}}},
           {"system", system_json(m.system)},
           {"axis", {{"ln_r", hex_array(m.axis.ln_r)}}},
           {"config", m.config.empty() ? Json(nullptr) : Json::parse(m.config)}};
  return doc.dump(2) + "\n";
}

SweepMeta deserialize_meta(const std::string& text) {
  const Json doc = parse_document(text, {"meta", "system", "axis", "config"}, "sweep metadata");
  return with_format_errors("sweep metadata", [&] {
    SweepMeta m;
    m.config_hash = doc.at("meta").at("config_hash").get<std::string>();
    m.seed = doc.at("meta").at("seed").get<std::uint64_t>();
    m.system = parse_system(doc.at("system"));
    m.axis.ln_r = parse_hex_array(doc.at("axis").at("ln_r"));
    m.axis.validate();
    if (!doc.at("config").is_null()) m.config = doc.at("config").dump(2) + "\n";
    return m;
  });
}

// ---------- files ----------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

SweepDirectory SweepDirectory::open(const fs::path& root, const SweepMeta& meta, bool resume) {
  const fs::path meta_path = root / "meta.json";
  SweepDirectory dir;
  dir.root_ = root;
  if (fs::exists(meta_path)) {
    if (!resume) throw InvalidArgument("output directory " + root.string() + " already holds a sweep; use --resume");
    dir.meta_ = deserialize_meta(read_file(meta_path));
    if (dir.meta_.config_hash != meta.config_hash)
      throw IncompatibleInputs("sweep in " + root.string() + " was made with config " + dir.meta_.config_hash +
                               ", not " + meta.config_hash);
  } else {
    fs::create_directories(root);
    dir.meta_ = meta;
    write_file_atomic(meta_path, serialize_meta(meta));
  }
  fs::create_directories(cells_dir(root));
  return dir;
}

SweepDirectory SweepDirectory::existing(const fs::path& root) {
  const fs::path meta_path = root / "meta.json";
  if (!fs::exists(meta_path)) throw InvalidArgument(root.string() + " is not a sweep directory (no meta.json)");
  SweepDirectory dir;
  dir.root_ = root;
  dir.meta_ = deserialize_meta(read_file(meta_path));
  return dir;
}

fs::path SweepDirectory::cell_path(std::size_t i, std::size_t j) const {
  return fs::path(cells_dir(root_)) / ("cell_" + std::to_string(i) + "_" + std::to_string(j) + ".json");
}

std::optional<CellResult> SweepDirectory::load(std::size_t i, std::size_t j) const {
  const fs::path path = cell_path(i, j);
  if (!fs::exists(path)) return std::nullopt;
  try {
    CellResult c = deserialize_cell(read_file(path));
    const Json doc = Json::parse(read_file(path));
    if (c.i != i || c.j != j) throw FormatError("cell indices do not match the file name");
    if (doc["meta"]["config_hash"] != meta_.config_hash) throw FormatError("cell config hash differs");
    return c;
  } catch (const std::exception&) {
    fs::rename(path, path.string() + ".corrupt");
    ++quarantined_;
    return std::nullopt;
  }
}

void SweepDirectory::store(const CellResult& cell) const {
  write_file_atomic(cell_path(cell.i, cell.j), serialize_cell(cell, meta_.config_hash));
}

SweepHooks SweepDirectory::hooks() const {
  return {[this](std::size_t i, std::size_t j) { return load(i, j); },
          [this](const CellResult& c) { store(c); }};
}

SweepGrid SweepDirectory::grid() const {
  SweepGrid g;
  g.system = meta_.system;
  g.axis = meta_.axis;
  g.seed = meta_.seed;
  g.cells.resize(g.rows() * g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const fs::path path = cell_path(i, j);
      if (!fs::exists(path)) continue;
      try {
        CellResult c = deserialize_cell(read_file(path));
        if (c.i == i && c.j == j) g.at(i, j) = std::move(c);
      } catch (const FormatError&) {
        // Left absent; the sweep command repairs it.
      }
    }
  return g;
}

// ---------- plot data ----------

std::string format_decimal(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& out, const PlotHeader& h) {
  out << "# " << h.title << "\n";
  out << "# format_version: " << kFormatVersion << "\n";
  out << "# config_hash: " << h.config_hash << "\n";
  out << "# seed: " << h.seed << "\n";
  for (const std::string& n : h.notes) out << "# " << n << "\n";
}

}  // namespace

void write_matrix(const fs::path& path, const PlotHeader& header, const GridAxis& axis,
                  const Eigen::MatrixXd& values, const std::string& value_name) {
  if (values.rows() != static_cast<Eigen::Index>(axis.size()) || values.cols() != values.rows())
    throw InvalidArgument("matrix does not match the grid axis");
  std::ostringstream out;
  write_header(out, header);
  out << "# layout: gnuplot nonuniform matrix; first row = column count, then ln r_t (dimensionless)\n";
  out << "# rows: ln r_i (dimensionless) followed by " << value_name << "\n";
  out << axis.size();
  for (double x : axis.ln_r) out << ' ' << format_decimal(x);
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << format_decimal(axis.ln_r[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ' ' << format_decimal(values(i, j));
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

void write_columns(const fs::path& path, const PlotHeader& header, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InvalidArgument("column names and data differ in count");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidArgument("columns differ in length");
  std::ostringstream out;
  write_header(out, header);
  out << "#";
  for (const std::string& n : names) out << ' ' << n;
  out << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? " " : "") << format_decimal(columns[c][r]);
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

std::string error_document(int exit_code, const std::string& kind, const std::string& message) {
  Json doc{{"format_version", kFormatVersion},
           {"error", {{"exit_code", exit_code}, {"kind", kind}, {"message", message}}}};
  return doc.dump(2) + "\n";
}

}  // namespace bangbang
