#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sqclock/stability.hpp"
#include "sqclock/units.hpp"

namespace sqclock {

enum class AxisField { atom_count, xi2, chi2, area2, prep_contrast, ramsey_contrast };
enum class AxisScale { linear, decibel, log10 };

inline const char* axis_field_name(AxisField f) {
  switch (f) {
    case AxisField::atom_count: return "atom_count";
    case AxisField::xi2: return "xi2";
    case AxisField::chi2: return "chi2";
    case AxisField::area2: return "area2";
    case AxisField::prep_contrast: return "prep_contrast";
    case AxisField::ramsey_contrast: return "ramsey_contrast";
  }
  return "?";
}

/// One sweep axis: which ensemble field varies and the sample points in the
/// chosen scale (dB and log10 samples are converted to linear on use).
struct AxisSpec {
  AxisField field = AxisField::xi2;
  AxisScale scale = AxisScale::linear;
  std::vector<double> samples;

  double linear_value(std::size_t i) const {
    const double v = samples.at(i);
    switch (scale) {
      case AxisScale::linear: return v;
      case AxisScale::decibel: return db_to_linear(v);
      case AxisScale::log10: return std::pow(10.0, v);
    }
    return v;
  }

  bool monotone() const {
    if (samples.size() < 2) return true;
    const bool inc = samples[1] > samples[0];
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (inc ? samples[i] <= samples[i - 1] : samples[i] >= samples[i - 1])
        return false;
    }
    return true;
  }
};

struct SweepCell {
  std::vector<double> axis_values;  // linear-scale values, one per axis
  StabilityResult result;
  bool ok = false;
  std::string error;
};

/// Row-major (axis-0 major) grid of optimized stability results.
struct SweepGrid {
  std::vector<AxisSpec> axes;
  std::vector<std::size_t> shape;
  std::vector<SweepCell> cells;  // shape[0]-major order

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }
};

namespace detail {

inline void apply_axis_value(EnsembleSpec& spec, AxisField field, double v) {
  switch (field) {
    case AxisField::atom_count: spec.atom_count = v; break;
    case AxisField::xi2: spec.xi2 = v; break;
    case AxisField::chi2: spec.chi2 = v; break;
    case AxisField::area2: spec.chi2 = v / spec.xi2; break;
    case AxisField::prep_contrast: spec.prep_contrast = v; break;
    case AxisField::ramsey_contrast: spec.ramsey_contrast = v; break;
  }
}

} // namespace detail

/// Optimized stability for the perfect-contrast coherent state with the same
/// atom number; the baseline for sql_ratio_db.
inline StabilityResult css_baseline(double atom_count, double gamma, double T) {
  EnsembleSpec css;
  css.atom_count = atom_count;
  css = validate_spec(css);
  return optimize_ramsey_time(PhaseErrorCurve(css), gamma, T);
}

/// Evaluates optimize_ramsey_time over a 1-D or 2-D parameter grid. Cells are
/// independent and may be computed in parallel; the output ordering is fixed
/// by the grid index, so results do not depend on the thread count. Per-cell
/// validation failures are recorded and the sweep continues.
inline SweepGrid stability_map(const EnsembleSpec& spec_template,
                               std::vector<AxisSpec> axes, double gamma,
                               double T, unsigned jobs = 0) {
  if (axes.empty() || axes.size() > 2)
    throw std::invalid_argument("stability_map supports 1 or 2 axes");
  for (const auto& ax : axes) {
    if (ax.samples.empty()) throw std::invalid_argument("empty sweep axis");
    if (!ax.monotone())
      throw std::invalid_argument("axis samples must be strictly monotone");
  }

  SweepGrid grid;
  grid.axes = std::move(axes);
  for (const auto& ax : grid.axes) grid.shape.push_back(ax.samples.size());
  grid.cells.resize(grid.cell_count());

  // Baselines per distinct atom count (only varies if N is an axis).
  std::map<double, StabilityResult> baselines;
  auto baseline_for = [&](double n) -> const StabilityResult& {
    auto it = baselines.find(n);
    if (it == baselines.end())
      it = baselines.emplace(n, css_baseline(n, gamma, T)).first;
    return it->second;
  };
  // Populate every needed baseline before the parallel region; run_cell then
  // only reads the map.
  bool n_swept = false;
  for (const auto& ax : grid.axes) {
    if (ax.field != AxisField::atom_count) continue;
    n_swept = true;
    for (std::size_t i = 0; i < ax.samples.size(); ++i)
      baseline_for(ax.linear_value(i));
  }
  if (!n_swept) baseline_for(spec_template.atom_count);

  auto run_cell = [&](std::size_t idx) {
    SweepCell& cell = grid.cells[idx];
    std::vector<std::size_t> sub(grid.axes.size());
    std::size_t rem = idx;
    for (std::size_t d = grid.axes.size(); d-- > 0;) {
      sub[d] = rem % grid.shape[d];
      rem /= grid.shape[d];
    }
    EnsembleSpec spec = spec_template;
    cell.axis_values.resize(grid.axes.size());
    // Apply area2 after the others so it sees the swept xi2.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t d = 0; d < grid.axes.size(); ++d) {
        const bool is_area = grid.axes[d].field == AxisField::area2;
        if (is_area != (pass == 1)) continue;
        const double v = grid.axes[d].linear_value(sub[d]);
        cell.axis_values[d] = v;
        detail::apply_axis_value(spec, grid.axes[d].field, v);
      }
    }
    try {
      spec = validate_spec(spec);
      cell.result = optimize_ramsey_time(PhaseErrorCurve(spec), gamma, T);
      cell.result.sql_ratio_db =
          compare_to_css(cell.result, baseline_for(spec.atom_count));
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };

  const std::size_t total = grid.cells.size();
  unsigned workers = jobs ? jobs : std::thread::hardware_concurrency();
  if (workers < 1) workers = 1;
  workers = std::min<std::size_t>(workers, total);
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1))
          run_cell(i);
      });
    for (auto& t : pool) t.join();
  }
  return grid;
}

} // namespace sqclock
