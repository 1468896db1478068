// bangbang: command-line driver for bang-bang protocol optimization on the
// square-lattice XXZ model.

#include <bangbang/correlation.hpp>
#include <bangbang/fit.hpp>
#include <bangbang/io.hpp>
#include <bangbang/optimizer.hpp>
#include <bangbang/phases.hpp>
#include <bangbang/pontryagin.hpp>
#include <bangbang/sweep.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bangbang;
using Json = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kDegenerate = 3, kIncompatible = 4 };

// Command failures that carry their own exit code.
struct CommandError : Error {
  CommandError(int c, std::string kind_name, const std::string& what)
      : Error(what), code(c), kind(std::move(kind_name)) {}
  int code;
  std::string kind;
};

struct Options {
  RunConfig config;
  int sites = 0;
  std::string boundary = "open";
  double lnri = std::numeric_limits<double>::quiet_NaN();
  double lnrt = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::string cost = "state";
  std::string output;
  bool verify = false;
  std::size_t samples = kDefaultSamples;
  bool resume = false;
  bool dry_run = false;
  std::optional<std::size_t> max_cells;
  std::size_t baseline_steps = 16;
  std::string input;       // record file or sweep directory
  std::string compare;     // second sweep for tau ratio
  std::vector<std::size_t> reference;  // i j
  std::optional<std::size_t> fit_row;
  std::string fit_control = "j";
  double fit_lo = -std::numeric_limits<double>::infinity();
  double fit_hi = std::numeric_limits<double>::infinity();
};

std::string default_output(const std::string& command) {
  const char* root = std::getenv("BANGBANG_OUTPUT_ROOT");
  return (fs::path(root && *root ? root : "bangbang-out") / command).string();
}

void require(bool present, const std::string& flag, const std::string& command) {
  if (!present) throw CLI::RequiredError(flag + " is required for " + command);
}

// Fills the system part of the config from --M / --boundary.
void resolve_system(Options& o, const std::string& command, bool needs_system) {
  if (needs_system) {
    require(o.sites > 0, "--M", command);
    require(o.config.system.occupants >= 0, "--C", command);
  }
  if (o.sites > 0) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(o.sites))));
    if (side * side != o.sites) throw InvalidArgument("--M must be a square number (L x L lattice)");
    o.config.system.lattice.side_length = side;
  }
  o.config.system.lattice.boundary = parse_boundary(o.boundary);
  o.config.output_dir = o.output.empty() ? default_output(command) : o.output;
  o.config.validate();
}

PlotHeader header(const std::string& title, const RunConfig& config, std::vector<std::string> notes = {}) {
  return {title, config_hash(config), config.seed, std::move(notes)};
}

PlotHeader header(const std::string& title, const SweepMeta& meta, std::vector<std::string> notes = {}) {
  return {title, meta.config_hash, meta.seed, std::move(notes)};
}

// ---------------- optimize ----------------

int run_optimize(Options& o) {
  resolve_system(o, "optimize", true);
  require(std::isfinite(o.lnri), "--lnri", "optimize");
  require(std::isfinite(o.lnrt), "--lnrt", "optimize");
  const RunConfig& cfg = o.config;
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  write_file_atomic(out / "config.json", dump_config(cfg));

  const XxzSystem system(cfg.system.lattice, cfg.system.occupants);
  const ControlSpectra spectra(system);
  const GroundState gi = system.ground_state(CouplingRatio::from_log(o.lnri));
  const GroundState gt = system.ground_state(CouplingRatio::from_log(o.lnrt));
  const Objective objective =
      o.cost == "energy"
          ? Objective::energy_distance(gi.state, gt.state, system.hamiltonian(CouplingRatio::from_log(o.lnrt).normalized()),
                                       gt.energy)
          : Objective::state_distance(gi.state, gt.state);

  std::ofstream trace(out / "trace.log");
  const TraceSink sink = [&](const TraceRecord& r) { trace << format_trace(r) << '\n'; };
  Rng rng(cfg.seed);
  const TauSearchResult r = find_tau_critical(objective, spectra, cfg.pipeline, rng, sink);

  ProtocolRecord rec;
  rec.system = cfg.system;
  rec.ln_ri = o.lnri;
  rec.ln_rt = o.lnrt;
  rec.tau = r.tau_critical;
  rec.tau_extrapolated = r.tau_extrapolated;
  rec.ds = r.ds;
  rec.protocol = r.protocol;
  rec.seed = cfg.seed;
  rec.config_hash = config_hash(cfg);
  rec.provenance = o.cost == "energy" ? "dbmc>cbmc (energy cost)" : "dbmc>cbmc";
  for (const TauProbe& p : r.history) rec.history.emplace_back(p.tau, p.ds);
  write_file_atomic(out / "record.json", serialize_record(rec));

  std::vector<double> taus, dss, phases;
  for (const TauProbe& p : r.history) {
    taus.push_back(p.tau);
    dss.push_back(p.ds);
    phases.push_back(static_cast<double>(p.phase));
  }
  write_columns(out / "history.dat", header("D_S against total time tau, in probe order", cfg,
                                            {"phase: 0 extrapolating, 1 scaling, 2 bisecting"}),
                {"tau", "D_S", "phase"}, {taus, dss, phases});

  if (o.verify) {
    const SwitchingTrace tr = switching_trace(gi.state, gt.state, r.protocol, spectra, o.samples);
    write_columns(out / "switching.dat",
                  header("switching functions Im<Pi|O|psi> and controls", cfg,
                         {"sign tolerance: " + format_decimal(tr.sign_tolerance)}),
                  {"t", "switch_J", "switch_K", "g_J", "g_K", "consistent"},
                  {tr.times, tr.switch_j, tr.switch_k, {tr.g_j.begin(), tr.g_j.end()},
                   {tr.g_k.begin(), tr.g_k.end()}, {tr.consistent.begin(), tr.consistent.end()}});
    std::cout << "sign rule holds on " << format_decimal(100.0 * tr.consistent_fraction()) << "% of "
              << tr.times.size() << " samples\n";
  }

  std::cout << "tau_critical " << format_decimal(r.tau_critical) << "\nD_S " << format_decimal(r.ds)
            << "\ntau_extrapolated " << format_decimal(r.tau_extrapolated) << "\njumps J "
            << r.protocol.j.jumps.size() << " K " << r.protocol.k.jumps.size() << "\nrecord "
            << (out / "record.json").string() << "\n";
  if (!(r.ds <= cfg.pipeline.epsilon))
    throw CommandError(kInternal, "not_converged", "final D_S exceeds epsilon");
  if (!r.tolerance_met)
    std::cerr << "warning: D_S not within [epsilon - epsilon_tol, epsilon] after " << r.history.size()
              << " probes\n";
  return kOk;
}

// ---------------- sweep ----------------

int run_sweep_command(Options& o) {
  resolve_system(o, "sweep", true);
  const RunConfig& cfg = o.config;
  const GridAxis axis = cfg.axis();
  if (o.dry_run) {
    const XxzSystem system(cfg.system.lattice, cfg.system.occupants);
    const OverlapGrid ov = overlap_grid(system, axis);
    const std::size_t skipped = count_skipped(ov, cfg.skip_threshold) + axis.size();
    std::cout << "cells " << axis.size() * axis.size() << "\nestimated_skipped " << skipped << "\nto_compute "
              << axis.size() * axis.size() - skipped << "\n";
    return kOk;
  }
  SweepMeta meta{cfg.system, axis, config_hash(cfg), cfg.seed, dump_config(cfg)};
  const SweepDirectory dir = SweepDirectory::open(cfg.output_dir, meta, o.resume);
  SweepOptions so = cfg.sweep_options();
  so.max_new_cells = o.max_cells;
  const SweepGrid grid = run_sweep(cfg.system, axis, cfg.pipeline, so, dir.hooks());

  std::size_t ok = 0, skipped = 0, failed = 0, missing = 0;
  for (const auto& c : grid.cells) {
    if (!c) ++missing;
    else if (c->skipped) ++skipped;
    else if (c->error) ++failed;
    else ++ok;
  }
  std::cout << "directory " << cfg.output_dir << "\ncomputed " << ok << "\nskipped " << skipped << "\nfailed "
            << failed << "\npending " << missing << "\nquarantined " << dir.quarantined() << "\n";
  return kOk;
}

// ---------------- analyze ----------------

Eigen::MatrixXd cell_matrix(const SweepGrid& g, const std::function<double(const CellResult&)>& f) {
  const auto n = static_cast<Eigen::Index>(g.rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      if (const CellResult* c = g.ok_cell(i, j)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(*c);
  return m;
}

double opt(const std::optional<double>& v) { return v.value_or(std::numeric_limits<double>::quiet_NaN()); }

Json fit_json(const PowerLawFit& f) {
  return Json{{"alpha", f.alpha},      {"r0", f.r0},
              {"c", f.c},              {"residual_norm", f.residual_norm},
              {"data_range", f.data_range}, {"points", f.points},
              {"window", {f.window.lo, f.window.hi}}, {"converged", f.converged}};
}

int run_analyze(Options& o) {
  require(!o.input.empty(), "SWEEP_DIR", "analyze");
  const SweepDirectory dir = SweepDirectory::existing(o.input);
  const SweepMeta& meta = dir.meta();
  const SweepGrid grid = dir.grid();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < grid.rows(); ++i)
    for (std::size_t j = 0; j < grid.cols(); ++j) ok += grid.ok_cell(i, j) != nullptr;
  if (ok == 0)
    throw CommandError(kDegenerate, "empty_sweep",
                       "sweep in " + o.input + " holds no optimized cells; run or resume the sweep first");

  const fs::path out = o.output.empty() ? fs::path(o.input + "_analysis") : fs::path(o.output);
  if (fs::weakly_canonical(out) == fs::weakly_canonical(o.input))
    throw InvalidArgument("analysis output must not be the sweep directory");
  fs::create_directories(out);

  const std::string sys = meta.system.label();
  auto matrix = [&](const std::string& name, const std::string& title, const Eigen::MatrixXd& m) {
    write_matrix(out / (name + ".dat"), header(title + ", " + sys, meta), meta.axis, m, name);
  };
  matrix("tau_critical", "critical time tau_c at D_S = epsilon", cell_matrix(grid, [](auto& c) { return c.tau_critical; }));
  matrix("tau_extrapolated", "extrapolated time of D_S = 0", cell_matrix(grid, [](auto& c) { return c.tau_extrapolated; }));
  matrix("overlap", "ground-state overlap |<target|initial>|^2", cell_matrix(grid, [](auto& c) { return c.overlap; }));
  matrix("p_j", "pulse count of J", cell_matrix(grid, [](auto& c) { return double(c.p_j); }));
  matrix("p_k", "pulse count of K", cell_matrix(grid, [](auto& c) { return double(c.p_k); }));
  matrix("on_fraction_j", "t_on / (P tau) of J", cell_matrix(grid, [](auto& c) { return opt(c.on_fraction_j); }));
  matrix("on_fraction_k", "t_on / (P tau) of K", cell_matrix(grid, [](auto& c) { return opt(c.on_fraction_k); }));

  const PhaseMap phases = detect_phases(grid);
  Eigen::MatrixXd labels(static_cast<Eigen::Index>(grid.rows()), static_cast<Eigen::Index>(grid.cols()));
  for (std::size_t i = 0; i < grid.rows(); ++i)
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const int r = phases.region_at(i, j);
      labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          r < 0 ? std::numeric_limits<double>::quiet_NaN() : r;
    }
  matrix("phase_labels", "connected (P_J, P_K) regions", labels);
  Json pj{{"format_version", kFormatVersion},
          {"meta", {{"config_hash", meta.config_hash}, {"seed", meta.seed}}},
          {"layered", phases.layered()}};
  Json regions = Json::array();
  for (const PhaseRegion& r : phases.regions) {
    Json cells = Json::array();
    for (const CellIndex& c : r.cells) cells.push_back({c.i, c.j});
    regions.push_back({{"id", r.id}, {"p_j", r.label.p_j}, {"p_k", r.label.p_k}, {"cells", cells}});
  }
  pj["regions"] = regions;
  Json bounds = Json::array();
  for (const PhaseBoundary& b : phases.boundaries) bounds.push_back({{b.a.i, b.a.j}, {b.b.i, b.b.j}});
  pj["boundaries"] = bounds;
  Json profiles = Json::array();
  for (const BoundaryProfile& p : boundary_profiles(grid, phases))
    profiles.push_back({{"high", {p.high.i, p.high.j}},
                        {"control", p.control == Control::j ? "J" : "K"},
                        {"widths", p.widths},
                        {"monotone", p.monotone}});
  pj["nascent_profiles"] = profiles;
  write_file_atomic(out / "phases.json", pj.dump(2) + "\n");

  // Correlation maps against the reference cell (default: first computed cell).
  std::size_t ri = 0, rj = 0;
  if (o.reference.size() == 2) {
    ri = o.reference[0];
    rj = o.reference[1];
    if (ri >= grid.rows() || rj >= grid.cols()) throw InvalidArgument("--reference lies outside the grid");
  } else {
    bool found = false;
    for (std::size_t k = 0; k < grid.cells.size() && !found; ++k)
      if (grid.ok_cell(k / grid.cols(), k % grid.cols())) {
        ri = k / grid.cols();
        rj = k % grid.cols();
        found = true;
      }
  }
  const std::string ref = "reference cell (" + std::to_string(ri) + ", " + std::to_string(rj) + ")";
  matrix("correlation_j", "modified correlation C_m of J against the " + ref, correlation_map(grid, ri, rj, Control::j));
  matrix("correlation_k", "modified correlation C_m of K against the " + ref, correlation_map(grid, ri, rj, Control::k));

  // Row cross-sections for bifurcation plots.
  fs::create_directories(out / "cross_sections");
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    std::vector<double> lnrt, rt, pjc, pkc, wj, wk, tau;
    for (std::size_t j = 0; j < grid.cols(); ++j)
      if (const CellResult* c = grid.ok_cell(i, j)) {
        lnrt.push_back(c->ln_rt);
        rt.push_back(std::exp(c->ln_rt));
        pjc.push_back(c->p_j);
        pkc.push_back(c->p_k);
        wj.push_back(opt(nascent_width(c->protocol, Control::j)));
        wk.push_back(opt(nascent_width(c->protocol, Control::k)));
        tau.push_back(c->tau_critical);
      }
    write_columns(out / "cross_sections" / ("row_" + std::to_string(i) + ".dat"),
                  header("cross-section at ln r_i = " + format_decimal(grid.axis.ln_r[i]), meta,
                         {"widths are fractions of tau; nan where the control has fewer than two jumps"}),
                  {"ln_rt", "r_t", "P_J", "P_K", "nascent_width_J", "nascent_width_K", "tau_c"},
                  {lnrt, rt, pjc, pkc, wj, wk, tau});
  }

  if (o.fit_row) {
    if (*o.fit_row >= grid.rows()) throw InvalidArgument("--fit-row lies outside the grid");
    const Control control = o.fit_control == "k" || o.fit_control == "K" ? Control::k : Control::j;
    std::vector<FitPoint> pts;
    for (std::size_t j = 0; j < grid.cols(); ++j)
      if (const CellResult* c = grid.ok_cell(*o.fit_row, j))
        if (const auto w = nascent_width(c->protocol, control)) pts.push_back({std::exp(c->ln_rt), *w * c->tau_critical});
    Json doc{{"format_version", kFormatVersion},
             {"meta", {{"config_hash", meta.config_hash}, {"seed", meta.seed}}},
             {"row", *o.fit_row},
             {"control", control == Control::j ? "J" : "K"},
             {"model", "t_pulse = (r_t - r0)^alpha + c"}};
    try {
      doc["fit"] = fit_json(fit_bifurcation(pts, {o.fit_lo, o.fit_hi}));
    } catch (const FitFailure& e) {
      doc["fit"] = fit_json(e.best());
      doc["error"] = e.what();
    } catch (const InvalidArgument& e) {
      doc["error"] = e.what();
    }
    write_file_atomic(out / "fit.json", doc.dump(2) + "\n");
  }

  if (!o.compare.empty()) {
    const SweepDirectory other = SweepDirectory::existing(o.compare);
    const TauRatio tr = tau_ratio(grid, other.grid());
    matrix("tau_ratio", "ln(tau_a / tau_b) against " + other.meta().system.label(), tr.log_ratio);
    Json doc{{"format_version", kFormatVersion},
             {"meta", {{"config_hash", meta.config_hash}, {"seed", meta.seed}}},
             {"mean_a", tr.mean_a}, {"std_a", tr.std_a}, {"mean_b", tr.mean_b}, {"std_b", tr.std_b},
             {"mean_log", tr.mean_log}, {"std_log", tr.std_log}, {"cells", tr.cells},
             {"negative_quadrant_a_longer",
              tr.negative_quadrant_a_longer ? Json(*tr.negative_quadrant_a_longer) : Json(nullptr)}};
    write_file_atomic(out / "tau_ratio.json", doc.dump(2) + "\n");
    std::cout << "tau ratio mean_a " << format_decimal(tr.mean_a) << " mean_b " << format_decimal(tr.mean_b) << "\n";
  }

  const auto rho = row_spearman(grid);
  std::vector<double> rows, values;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i]) {
      rows.push_back(grid.axis.ln_r[i]);
      values.push_back(*rho[i]);
    }
  write_columns(out / "spearman.dat", header("per-row Spearman correlation of tau_c against overlap", meta),
                {"ln_ri", "spearman"}, {rows, values});

  std::cout << "cells " << ok << "\nregions " << phases.regions.size() << "\nboundaries " << phases.boundaries.size()
            << "\noutput " << out.string() << "\n";
  return kOk;
}

// ---------------- verify ----------------

int run_verify(Options& o) {
  require(!o.input.empty(), "RECORD", "verify");
  const ProtocolRecord rec = deserialize_record(read_file(o.input));
  const XxzSystem system(rec.system.lattice, rec.system.occupants);
  const ControlSpectra spectra(system);
  const GroundState gi = system.ground_state(CouplingRatio::from_log(rec.ln_ri));
  const GroundState gt = system.ground_state(CouplingRatio::from_log(rec.ln_rt));
  const Objective objective = Objective::state_distance(gi.state, gt.state);
  const double ds = objective.state_distance(evolve_continuous(gi.state, rec.protocol, spectra));
  const SwitchingTrace tr = switching_trace(gi.state, gt.state, rec.protocol, spectra, o.samples);
  const std::vector<JumpCheck> jumps = check_jumps(gi.state, gt.state, rec.protocol, spectra, tr.sign_tolerance);

  const fs::path out = o.output.empty() ? fs::path(o.input).replace_extension(".switching.dat") : fs::path(o.output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_columns(out,
                {"switching functions Im<Pi|O|psi> and controls", rec.config_hash, rec.seed,
                 {"sign tolerance: " + format_decimal(tr.sign_tolerance)}},
                {"t", "switch_J", "switch_K", "g_J", "g_K", "consistent"},
                {tr.times, tr.switch_j, tr.switch_k, {tr.g_j.begin(), tr.g_j.end()}, {tr.g_k.begin(), tr.g_k.end()},
                 {tr.consistent.begin(), tr.consistent.end()}});
  std::size_t jumps_ok = 0;
  for (const JumpCheck& c : jumps) jumps_ok += c.ok;
  std::cout << "D_S stored " << format_decimal(rec.ds) << " recomputed " << format_decimal(ds) << "\nsign_rule "
            << format_decimal(tr.consistent_fraction()) << "\njumps_consistent " << jumps_ok << "/" << jumps.size()
            << "\nsingular_arcs " << tr.singular_arcs.size() << "\ntrace " << out.string() << "\n";
  return kOk;
}

// ---------------- overlap ----------------

int run_overlap(Options& o) {
  resolve_system(o, "overlap", true);
  const RunConfig& cfg = o.config;
  const XxzSystem system(cfg.system.lattice, cfg.system.occupants);
  const GridAxis axis = cfg.axis();
  const OverlapGrid ov = overlap_grid(system, axis);
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / "overlap.dat";
  write_matrix(path, header("ground-state overlap |<target|initial>|^2, " + cfg.system.label(), cfg), axis, ov.overlap,
               "overlap");
  std::size_t degenerate = 0;
  for (auto d : ov.degenerate) degenerate += d;
  std::cout << "points " << axis.size() << "\ndegenerate " << degenerate << "\nskipped_offdiagonal "
            << count_skipped(ov, cfg.skip_threshold) << "\noutput " << path.string() << "\n";
  return kOk;
}

// ---------------- baseline ----------------

int run_baseline(Options& o) {
  resolve_system(o, "baseline", true);
  require(std::isfinite(o.lnri), "--lnri", "baseline");
  require(std::isfinite(o.lnrt), "--lnrt", "baseline");
  require(std::isfinite(o.tau), "--tau", "baseline");
  const RunConfig& cfg = o.config;
  const XxzSystem system(cfg.system.lattice, cfg.system.occupants);
  const CouplingRatio ri = CouplingRatio::from_log(o.lnri), rt = CouplingRatio::from_log(o.lnrt);
  const GroundState gi = system.ground_state(ri);
  const GroundState gt = system.ground_state(rt);
  const BaselineResult b = adiabatic_baseline(system, gi.state, gt.state, ri, rt, o.tau, o.baseline_steps);
  std::cout << "tau " << format_decimal(o.tau) << "\nD_S " << format_decimal(b.ds) << "\nsteps " << b.steps << "\n";
  return kOk;
}

void add_system_options(CLI::App& app, Options& o) {
  RunConfig& c = o.config;
  PipelineConfig& p = c.pipeline;
  app.add_option("--M", o.sites, "number of lattice sites (L x L)")->group("System");
  app.add_option("--C", c.system.occupants, "number of up spins (occupants)")->group("System");
  app.add_option("--boundary", o.boundary, "lattice boundary: open | periodic")->capture_default_str()->group("System");
  app.add_flag("--deduplicate", c.system.lattice.deduplicate, "drop repeated bonds of periodic L <= 2")->group("System");
  app.add_option("--seed", c.seed, "global random seed")->capture_default_str()->group("Run");
  app.add_option("--threads", c.threads, "worker threads for sweeps")
      ->envname("BANGBANG_THREADS")
      ->capture_default_str()
      ->group("Run");
  app.add_option("-o,--output", o.output, "output directory or file (default $BANGBANG_OUTPUT_ROOT/<command>)")
      ->group("Run");
  app.add_option("--epsilon", p.epsilon, "D_S threshold")->capture_default_str()->group("Pipeline");
  app.add_option("--epsilon-tol", p.epsilon_tol, "accepted band below epsilon")->capture_default_str()->group("Pipeline");
  app.add_option("--n-min", p.n_min, "coarsest DBMC interval count")->capture_default_str()->group("Pipeline");
  app.add_option("--n-max", p.n_max, "finest DBMC interval count")->capture_default_str()->group("Pipeline");
  app.add_option("--restarts", p.restarts, "independent BBMC runs per tau probe")->capture_default_str()->group("Pipeline");
  app.add_option("--initial-tau", p.initial_tau, "first tau probe")->capture_default_str()->group("Pipeline");
  app.add_option("--max-probes", p.max_probes, "tau probes before giving up")->capture_default_str()->group("Pipeline");
  app.add_option("--decay", p.dbmc.anneal.decay, "temperature decay per stage (DBMC and CBMC)")
      ->capture_default_str()
      ->group("Pipeline")
      ->each([&p](const std::string&) { p.cbmc.anneal.decay = p.dbmc.anneal.decay; });
  app.add_option("--frozen-stages", p.dbmc.anneal.frozen_stages, "T = 0 stages after cooling (DBMC and CBMC)")
      ->capture_default_str()
      ->group("Pipeline")
      ->each([&p](const std::string&) { p.cbmc.anneal.frozen_stages = p.dbmc.anneal.frozen_stages; });
  app.add_option("--dbmc-moves", p.dbmc.anneal.moves_per_parameter, "DBMC moves per interval per stage")
      ->capture_default_str()
      ->group("Pipeline");
  app.add_option("--cbmc-moves", p.cbmc.anneal.moves_per_parameter, "CBMC moves per jump per stage")
      ->capture_default_str()
      ->group("Pipeline");
  app.add_option("--bound-initial", p.cbmc.bound.initial, "CBMC move bound at T0, fraction of tau")
      ->capture_default_str()
      ->group("Pipeline");
  app.add_option("--bound-floor", p.cbmc.bound.floor, "smallest CBMC move bound, fraction of tau")
      ->capture_default_str()
      ->group("Pipeline");
  app.add_option("--refine-scale", p.dbmc.refine_temperature_scale, "T0 factor on DBMC refinement rungs")
      ->capture_default_str()
      ->group("Pipeline");
  app.add_option("--grid-lo", c.grid_lo, "smallest ln r on both axes")->capture_default_str()->group("Grid");
  app.add_option("--grid-hi", c.grid_hi, "largest ln r on both axes")->capture_default_str()->group("Grid");
  app.add_option("--grid-points", c.grid_points, "points per axis")->capture_default_str()->group("Grid");
  app.add_option("--skip-threshold", c.skip_threshold, "skip cells whose overlap exceeds this")
      ->capture_default_str()
      ->group("Grid");
  app.add_option("--width-floor", c.width_floor, "pulses narrower than this fraction of tau are not counted")
      ->capture_default_str()
      ->group("Grid");
}

int report(int code, const std::string& kind, const std::string& message) {
  std::cerr << error_document(code, kind, message);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bangbang: bang-bang optimal control of the square-lattice XXZ model"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  Options o;
  o.config.system.occupants = -1;
  add_system_options(app, o);

  auto* optimize = app.add_subcommand("optimize", "find tau_critical and the optimal protocol for one (r_i, r_t)");
  optimize->add_option("--lnri", o.lnri, "ln r of the initial Hamiltonian")->allow_extra_args(false);
  optimize->add_option("--lnrt", o.lnrt, "ln r of the target Hamiltonian")->allow_extra_args(false);
  optimize->add_option("--cost", o.cost, "objective: state | energy")
      ->check(CLI::IsMember({"state", "energy"}))
      ->capture_default_str();
  optimize->add_flag("--verify", o.verify, "also write the switching-function trace");
  optimize->add_option("--samples", o.samples, "samples of the switching trace")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "optimize every (r_i, r_t) cell of a grid");
  sweep->add_flag("--resume", o.resume, "continue an existing sweep directory");
  sweep->add_flag("--dry-run", o.dry_run, "print the cell count and estimated skips, compute nothing");
  sweep->add_option("--max-cells", o.max_cells, "stop after computing this many new cells");

  auto* analyze = app.add_subcommand("analyze", "derive phase labels, correlation maps, fits and plot data");
  analyze->add_option("sweep", o.input, "sweep directory")->required();
  analyze->add_option("--compare", o.compare, "second sweep for the tau ratio");
  analyze->add_option("--reference", o.reference, "reference cell 'i j' for correlation maps")->expected(2);
  analyze->add_option("--fit-row", o.fit_row, "row whose nascent pulse widths are fitted");
  analyze->add_option("--fit-control", o.fit_control, "control of the fitted pulse: j | k")
      ->check(CLI::IsMember({"j", "k", "J", "K"}));
  analyze->add_option("--fit-lo", o.fit_lo, "smallest r_t in the fit window");
  analyze->add_option("--fit-hi", o.fit_hi, "largest r_t in the fit window");

  auto* verify = app.add_subcommand("verify", "check a protocol record against the Pontryagin sign rule");
  verify->add_option("record", o.input, "protocol record file")->required();
  verify->add_option("--samples", o.samples, "samples of the switching trace")->capture_default_str();

  auto* overlap = app.add_subcommand("overlap", "ground-state overlap grid, no optimization");
  auto* baseline = app.add_subcommand("baseline", "D_S of a linear adiabatic ramp");
  baseline->add_option("--lnri", o.lnri, "ln r of the initial Hamiltonian");
  baseline->add_option("--lnrt", o.lnrt, "ln r of the target Hamiltonian");
  baseline->add_option("--tau", o.tau, "ramp duration");
  baseline->add_option("--steps", o.baseline_steps, "initial step count")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*optimize) return run_optimize(o);
    if (*sweep) return run_sweep_command(o);
    if (*analyze) return run_analyze(o);
    if (*verify) return run_verify(o);
    if (*overlap) return run_overlap(o);
    if (*baseline) return run_baseline(o);
    return kUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for more information.\n";
    return kUsage;
  } catch (const CommandError& e) {
    return report(e.code, e.kind, e.what());
  } catch (const StatesCoincide& e) {
    return report(kDegenerate, "states_coincide", e.what());
  } catch (const DegenerateGroundState& e) {
    return report(kDegenerate, "degenerate_ground_state", e.what());
  } catch (const IncompatibleInputs& e) {
    return report(kIncompatible, "incompatible_inputs", e.what());
  } catch (const FormatError& e) {
    return report(kIncompatible, "format_error", e.what());
  } catch (const InvalidArgument& e) {
    return report(kUsage, "invalid_argument", e.what());
  } catch (const std::exception& e) {
    return report(kInternal, "internal", e.what());
  }
}
