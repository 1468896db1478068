#include "bangbang/phases.hpp"

#include <algorithm>
#include <cstdlib>

namespace bangbang {

PulseMap PulseMap::from(const SweepGrid& grid) {
  PulseMap m{grid.rows(), grid.cols(), {}};
  m.labels.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (const CellResult* c = grid.ok_cell(i, j)) m.labels[i * m.cols + j] = PulseLabel{c->p_j, c->p_k};
  return m;
}

PhaseMap detect_phases(const PulseMap& map) {
  if (map.labels.size() != map.rows * map.cols) throw InvalidArgument("pulse map size mismatch");
  PhaseMap out;
  out.rows = map.rows;
  out.cols = map.cols;
  out.region.assign(map.labels.size(), -1);

  std::vector<CellIndex> stack;
  for (std::size_t i = 0; i < map.rows; ++i)
    for (std::size_t j = 0; j < map.cols; ++j) {
      if (!map.at(i, j) || out.region_at(i, j) >= 0) continue;
      PhaseRegion reg;
      reg.id = static_cast<int>(out.regions.size());
      reg.label = *map.at(i, j);
      stack.push_back({i, j});
      out.region[i * map.cols + j] = reg.id;
      while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        reg.cells.push_back(c);
        auto visit = [&](std::size_t a, std::size_t b) {
          if (!map.at(a, b) || *map.at(a, b) != reg.label || out.region_at(a, b) >= 0) return;
          out.region[a * map.cols + b] = reg.id;
          stack.push_back({a, b});
        };
        if (c.i > 0) visit(c.i - 1, c.j);
        if (c.i + 1 < map.rows) visit(c.i + 1, c.j);
        if (c.j > 0) visit(c.i, c.j - 1);
        if (c.j + 1 < map.cols) visit(c.i, c.j + 1);
      }
      std::sort(reg.cells.begin(), reg.cells.end(),
                [](const CellIndex& a, const CellIndex& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
      out.regions.push_back(std::move(reg));
    }

  auto check = [&](CellIndex a, CellIndex b) {
    const auto& la = map.at(a.i, a.j);
    const auto& lb = map.at(b.i, b.j);
    if (!la || !lb || *la == *lb) return;
    out.boundaries.push_back({a, b});
    if (std::abs(la->p_j - lb->p_j) + std::abs(la->p_k - lb->p_k) != 1) out.unlayered.push_back({a, b});
  };
  for (std::size_t i = 0; i < map.rows; ++i)
    for (std::size_t j = 0; j < map.cols; ++j) {
      if (j + 1 < map.cols) check({i, j}, {i, j + 1});
      if (i + 1 < map.rows) check({i, j}, {i + 1, j});
    }
  return out;
}

PhaseMap detect_phases(const SweepGrid& grid) { return detect_phases(PulseMap::from(grid)); }

std::optional<double> nascent_width(const JumpProtocol& p, Control control) {
  const ControlTrace& c = control == Control::j ? p.j : p.k;
  if (c.jumps.size() < 2 || !(p.tau > 0.0)) return std::nullopt;
  double w = p.tau;
  for (std::size_t k = 0; k + 1 < c.jumps.size(); ++k) w = std::min(w, c.jumps[k + 1] - c.jumps[k]);
  return w / p.tau;
}

std::vector<BoundaryProfile> boundary_profiles(const SweepGrid& grid, const PhaseMap& phases,
                                               std::size_t depth) {
  std::vector<BoundaryProfile> out;
  for (const PhaseBoundary& b : phases.boundaries) {
    const CellResult* ca = grid.ok_cell(b.a.i, b.a.j);
    const CellResult* cb = grid.ok_cell(b.b.i, b.b.j);
    if (!ca || !cb) continue;
    const int dj = cb->p_j - ca->p_j;
    const int dk = cb->p_k - ca->p_k;
    if (std::abs(dj) + std::abs(dk) != 1) continue;

    BoundaryProfile prof;
    prof.boundary = b;
    const bool b_high = dj + dk > 0;
    const CellIndex high = b_high ? b.b : b.a;
    const CellIndex low = b_high ? b.a : b.b;
    prof.high = high;
    prof.control = dj != 0 ? Control::j : Control::k;
    const long di = static_cast<long>(high.i) - static_cast<long>(low.i);
    const long dc = static_cast<long>(high.j) - static_cast<long>(low.j);
    const int region = phases.region_at(high.i, high.j);
    long ci = static_cast<long>(high.i), cj = static_cast<long>(high.j);
    for (std::size_t s = 0; s < depth; ++s, ci += di, cj += dc) {
      if (ci < 0 || cj < 0 || ci >= static_cast<long>(grid.rows()) || cj >= static_cast<long>(grid.cols())) break;
      const auto ui = static_cast<std::size_t>(ci), uj = static_cast<std::size_t>(cj);
      if (phases.region_at(ui, uj) != region) break;
      const auto w = nascent_width(grid.ok_cell(ui, uj)->protocol, prof.control);
      if (!w) break;
      prof.widths.push_back(*w);
    }
    prof.monotone = prof.widths.size() >= 2 &&
                    std::adjacent_find(prof.widths.begin(), prof.widths.end(),
                                       [](double x, double y) { return !(y > x); }) == prof.widths.end();
    out.push_back(std::move(prof));
  }
  return out;
}

}  // namespace bangbang
