#include "bangbang/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace bangbang {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {kNaN, kNaN};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t s = 0;
  while (s < order.size()) {
    std::size_t e = s;
    while (e + 1 < order.size() && v[order[e + 1]] == v[order[s]]) ++e;
    const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t k = s; k <= e; ++k) r[order[k]] = avg;
    s = e + 1;
  }
  return r;
}

}  // namespace

std::string SystemSpec::label() const {
  std::ostringstream os;
  os << "M=" << sites() << " C=" << occupants << ' ' << to_string(lattice.boundary);
  return os.str();
}

GridAxis GridAxis::uniform(double lo, double hi, std::size_t points) {
  if (points == 0) throw InvalidArgument("grid axis needs at least one point");
  GridAxis a;
  if (points == 1) {
    a.ln_r = {lo};
  } else {
    for (std::size_t k = 0; k < points; ++k)
      a.ln_r.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
    a.ln_r.back() = hi;
  }
  a.validate();
  return a;
}

void GridAxis::validate() const {
  if (ln_r.empty()) throw InvalidArgument("grid axis is empty");
  for (std::size_t k = 0; k < ln_r.size(); ++k) {
    if (!std::isfinite(ln_r[k])) throw InvalidArgument("grid axis values must be finite");
    if (k > 0 && !(ln_r[k] > ln_r[k - 1]))
      throw InvalidArgument("grid axis must be strictly increasing");
  }
}

const CellResult* SweepGrid::ok_cell(std::size_t i, std::size_t j) const {
  const auto& c = at(i, j);
  return c && c->ok() ? &*c : nullptr;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t i, std::size_t j) {
  return Rng::mix_seed(seed, i, j);
}

CellResult compute_cell(const XxzSystem& system, const ControlSpectra& spectra,
                        const GridAxis& axis, std::size_t i, std::size_t j,
                        const PipelineConfig& config, const SweepOptions& options) {
  CellResult cell;
  cell.i = i;
  cell.j = j;
  cell.ln_ri = axis.ln_r.at(i);
  cell.ln_rt = axis.ln_r.at(j);
  cell.seed = cell_seed(options.seed, i, j);
  try {
    const GroundState gi = system.ground_state(CouplingRatio::from_log(cell.ln_ri));
    const GroundState gt = system.ground_state(CouplingRatio::from_log(cell.ln_rt));
    cell.overlap = std::norm(gt.state.dot(gi.state));
    if (cell.overlap > options.skip_threshold) {
      cell.skipped = true;
      return cell;
    }
    const Objective objective = Objective::state_distance(gi.state, gt.state);
    Rng rng(cell.seed);
    const TauSearchResult r = find_tau_critical(objective, spectra, config, rng);
    cell.tau_critical = r.tau_critical;
    cell.tau_extrapolated = r.tau_extrapolated;
    cell.ds = r.ds;
    cell.tolerance_met = r.tolerance_met;
    cell.protocol = r.protocol;
    for (const TauProbe& p : r.history) cell.history.emplace_back(p.tau, p.ds);
    const PulseStats stats = count_pulses(canonicalize(r.protocol, options.width_floor).protocol);
    cell.p_j = stats.p_j;
    cell.p_k = stats.p_k;
    cell.on_fraction_j = stats.on_fraction_j;
    cell.on_fraction_k = stats.on_fraction_k;
  } catch (const StatesCoincide&) {
    cell.skipped = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

SweepGrid run_sweep(const SystemSpec& spec, const GridAxis& axis,
                    const PipelineConfig& config, const SweepOptions& options,
                    const SweepHooks& hooks) {
  axis.validate();
  config.validate();
  if (!(options.skip_threshold > 0.0 && options.skip_threshold <= 1.0))
    throw InvalidArgument("skip threshold must lie in (0, 1]");
  const XxzSystem system(spec.lattice, spec.occupants);
  const ControlSpectra spectra(system);

  SweepGrid grid;
  grid.system = spec;
  grid.axis = axis;
  grid.seed = options.seed;
  grid.cells.resize(axis.size() * axis.size());

  std::vector<std::pair<std::size_t, std::size_t>> pending;
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j) {
      std::optional<CellResult> done = hooks.load ? hooks.load(i, j) : std::nullopt;
      if (done) grid.at(i, j) = std::move(done);
      else pending.emplace_back(i, j);
    }
  if (options.max_new_cells && pending.size() > *options.max_new_cells)
    pending.resize(*options.max_new_cells);

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const auto [i, j] = pending[k];
      CellResult cell = compute_cell(system, spectra, axis, i, j, config, options);
      const std::lock_guard<std::mutex> lock(writer);
      try {
        if (hooks.store) hooks.store(cell);
      } catch (...) {
        if (!failure) failure = std::current_exception();
        next.store(pending.size());
      }
      grid.at(i, j) = std::move(cell);
    }
  };
  const unsigned threads = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(pending.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return grid;
}

OverlapGrid overlap_grid(const XxzSystem& system, const GridAxis& axis) {
  axis.validate();
  const std::size_t n = axis.size();
  std::vector<std::optional<Vector>> states(n);
  OverlapGrid out;
  out.degenerate.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    try {
      states[k] = system.ground_state(CouplingRatio::from_log(axis.ln_r[k])).state;
    } catch (const DegenerateGroundState&) {
      out.degenerate[k] = 1;
    }
  }
  out.overlap = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), kNaN);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      if (!states[a] || !states[b]) continue;
      const double v = std::norm(states[a]->dot(*states[b]));
      out.overlap(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      out.overlap(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  return out;
}

std::size_t count_skipped(const OverlapGrid& grid, double threshold) {
  std::size_t n = 0;
  for (Eigen::Index a = 0; a < grid.overlap.rows(); ++a)
    for (Eigen::Index b = 0; b < grid.overlap.cols(); ++b)
      if (a != b && grid.overlap(a, b) > threshold) ++n;
  return n;
}

TauRatio tau_ratio(const SweepGrid& a, const SweepGrid& b) {
  const bool same_lattice = a.system.lattice.side_length == b.system.lattice.side_length &&
                            a.system.lattice.boundary == b.system.lattice.boundary;
  if (!same_lattice) throw IncompatibleInputs("tau ratio needs sweeps of the same lattice");
  if (!(a.axis == b.axis)) throw IncompatibleInputs("tau ratio needs sweeps on identical axes");

  const auto n = static_cast<Eigen::Index>(a.rows());
  TauRatio out;
  out.log_ratio = Eigen::MatrixXd::Constant(n, n, kNaN);
  std::vector<double> ta, tb, lr;
  std::size_t quadrant = 0, quadrant_longer = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const CellResult* ca = a.ok_cell(i, j);
      const CellResult* cb = b.ok_cell(i, j);
      if (ca) ta.push_back(ca->tau_critical);
      if (cb) tb.push_back(cb->tau_critical);
      if (!ca || !cb) continue;
      const double v = std::log(ca->tau_critical / cb->tau_critical);
      out.log_ratio(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      lr.push_back(v);
      if (a.axis.ln_r[i] < 0.0 && a.axis.ln_r[j] < 0.0) {
        ++quadrant;
        if (ca->tau_critical > cb->tau_critical) ++quadrant_longer;
      }
    }
  std::tie(out.mean_a, out.std_a) = mean_std(ta);
  std::tie(out.mean_b, out.std_b) = mean_std(tb);
  std::tie(out.mean_log, out.std_log) = mean_std(lr);
  out.cells = lr.size();
  if (quadrant > 0)
    out.negative_quadrant_a_longer = static_cast<double>(quadrant_longer) / static_cast<double>(quadrant);
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman needs equal-length inputs");
  if (x.size() < 2) throw InvalidArgument("spearman needs at least two points");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const auto [mx, sx] = mean_std(rx);
  const auto [my, sy] = mean_std(ry);
  if (sx == 0.0 || sy == 0.0) return kNaN;
  double cov = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) cov += (rx[k] - mx) * (ry[k] - my);
  return cov / (static_cast<double>(rx.size() - 1) * sx * sy);
}

std::vector<std::optional<double>> row_spearman(const SweepGrid& grid) {
  std::vector<std::optional<double>> out(grid.rows());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    std::vector<double> tau, overlap;
    for (std::size_t j = 0; j < grid.cols(); ++j)
      if (const CellResult* c = grid.ok_cell(i, j)) {
        tau.push_back(c->tau_critical);
        overlap.push_back(c->overlap);
      }
    if (tau.size() >= 3) {
      const double rho = spearman(tau, overlap);
      if (std::isfinite(rho)) out[i] = rho;
    }
  }
  return out;
}

Eigen::MatrixXd correlation_map(const SweepGrid& grid, std::size_t ref_i,
                                std::size_t ref_j, Control control) {
  const CellResult* ref = grid.ok_cell(ref_i, ref_j);
  if (!ref) throw InvalidArgument("reference cell has no optimized protocol");
  const auto n = static_cast<Eigen::Index>(grid.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (std::size_t i = 0; i < grid.rows(); ++i)
    for (std::size_t j = 0; j < grid.cols(); ++j)
      if (const CellResult* c = grid.ok_cell(i, j))
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            correlation(c->protocol, ref->protocol, control).modified;
  return out;
}

}  // namespace bangbang
