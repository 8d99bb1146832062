#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/image.hpp"
#include "phasync/integrator.hpp"

namespace phasync {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maps an angle into (-pi, pi].
inline double wrap_angle(double a) noexcept {
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

inline double amplitude(double x, double y) noexcept { return std::hypot(x, y); }

// Continuous phase of a sampled (x, y) rotation. The first sample is the
// four-quadrant angle; each later sample takes the 2*pi branch nearest to
// its predecessor.
inline std::vector<double> unwrap_phase(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "unwrap_phase: x and y lengths differ");
  std::vector<double> phi(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] == 0.0 && y[s] == 0.0) throw OriginSampleError(s);
    const double raw = std::atan2(y[s], x[s]);
    if (s == 0) {
      phi[s] = raw;
      continue;
    }
    const double turns = std::nearbyint((phi[s - 1] - raw) / kTwoPi);
    phi[s] = raw + kTwoPi * turns;
  }
  return phi;
}

// Unwrapped phases and amplitudes of every oscillator in a trajectory,
// stored sample-major like the trajectory itself.
struct PhaseTrace {
  Shape shape;
  std::vector<double> times;
  std::vector<double> phi;
  std::vector<double> amplitude;

  std::size_t cells() const noexcept { return shape.size(); }
  std::size_t samples() const noexcept { return times.size(); }
  double phi_at(std::size_t sample, std::size_t cell) const { return phi[sample * cells() + cell]; }
  double& phi_at(std::size_t sample, std::size_t cell) { return phi[sample * cells() + cell]; }

  std::vector<double> phi_series(std::size_t cell) const {
    std::vector<double> out(samples());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = phi_at(s, cell);
    return out;
  }

  // First sample index with time >= t.
  std::size_t sample_at_or_after(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), t - 1e-9) - times.begin());
  }
};

inline PhaseTrace phase_trace(const Trajectory& traj) {
  PhaseTrace tr;
  tr.shape = traj.shape;
  tr.times = traj.times;
  const std::size_t n = traj.cells();
  const std::size_t ns = traj.samples();
  tr.phi.resize(n * ns);
  tr.amplitude.resize(n * ns);
  for (std::size_t c = 0; c < n; ++c) {
    const auto xs = traj.x_series(c);
    const auto ys = traj.y_series(c);
    const auto phi = unwrap_phase(xs, ys);
    for (std::size_t s = 0; s < ns; ++s) {
      tr.phi[s * n + c] = phi[s];
      tr.amplitude[s * n + c] = amplitude(xs[s], ys[s]);
    }
  }
  return tr;
}

// Builds a trace from explicit per-cell phase series (amplitudes left at 1).
inline PhaseTrace trace_from_series(Shape shape, std::vector<double> times,
                                    const std::vector<std::vector<double>>& series) {
  detail::require(series.size() == shape.size(), "one phase series per cell required");
  PhaseTrace tr;
  tr.shape = shape;
  tr.times = std::move(times);
  const std::size_t n = shape.size();
  tr.phi.resize(n * tr.samples());
  tr.amplitude.assign(n * tr.samples(), 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    detail::require(series[c].size() == tr.samples(), "phase series length mismatch");
    for (std::size_t s = 0; s < tr.samples(); ++s) tr.phi[s * n + c] = series[c][s];
  }
  return tr;
}

// Circular mean of the given cells' phases at one sample.
inline double circular_mean(const PhaseTrace& tr, std::span<const std::size_t> cells,
                            std::size_t sample) {
  double sx = 0.0, sy = 0.0;
  for (auto c : cells) {
    sx += std::cos(tr.phi_at(sample, c));
    sy += std::sin(tr.phi_at(sample, c));
  }
  return std::atan2(sy, sx);
}

// Whole 2*pi turns that bring phi within pi of the reference angle.
inline double branch_shift(double phi, double reference) noexcept {
  return kTwoPi * std::nearbyint((reference - phi) / kTwoPi);
}

struct Group {
  int id = 0;
  std::vector<std::size_t> cells;
};

// Distinct label ids > 0 in ascending order, each with its cells.
inline std::vector<Group> groups_from_labels(const LabelMap& labels) {
  std::map<int, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) by_id[labels[i]].push_back(i);
  std::vector<Group> out;
  for (auto& [id, cells] : by_id) out.push_back({id, std::move(cells)});
  return out;
}

struct GroupSeries {
  int id = 0;
  std::size_t members = 0;
  std::vector<double> s;  // population std of member phases per sample
};

struct GroupStats {
  std::vector<double> times;
  std::vector<GroupSeries> groups;
  std::vector<std::string> warnings;

  double sample_period() const {
    return times.size() >= 2 ? times[1] - times[0] : 0.0;
  }
};

// Per-group phase spread from `start_time` on. Each member's phase is
// referenced to its own value at the first analyzed sample, so s(t) measures
// how far members have drifted apart since then and starts at zero. Fixed
// phase offsets present at the start (random initial states) do not count.
inline GroupStats group_phase_std(const PhaseTrace& tr, const std::vector<Group>& groups,
                                  double start_time = 0.0) {
  GroupStats st;
  const std::size_t first = tr.sample_at_or_after(start_time);
  detail::require(first < tr.samples(), "no samples after the analysis start time");
  st.times.assign(tr.times.begin() + static_cast<std::ptrdiff_t>(first), tr.times.end());
  const std::size_t ns = st.times.size();

  for (const auto& g : groups) {
    if (g.cells.empty()) {
      st.warnings.push_back("group " + std::to_string(g.id) + " is empty; skipped");
      continue;
    }
    for (auto c : g.cells)
      detail::require(c < tr.cells(), "group cell index outside the trace");

    GroupSeries gs{g.id, g.cells.size(), std::vector<double>(ns)};
    const double count = static_cast<double>(g.cells.size());
    std::vector<double> drift(g.cells.size());
    for (std::size_t k = 0; k < ns; ++k) {
      const std::size_t s = first + k;
      double mean = 0.0;
      for (std::size_t m = 0; m < g.cells.size(); ++m) {
        drift[m] = tr.phi_at(s, g.cells[m]) - tr.phi_at(first, g.cells[m]);
        mean += drift[m];
      }
      mean /= count;
      double var = 0.0;
      for (double d : drift) var += (d - mean) * (d - mean);
      gs.s[k] = std::sqrt(var / count);
    }
    st.groups.push_back(std::move(gs));
  }
  return st;
}

inline GroupStats group_phase_std(const PhaseTrace& tr, const LabelMap& labels,
                                  double start_time = 0.0) {
  detail::require(labels.shape() == tr.shape, "label map shape does not match the trace");
  return group_phase_std(tr, groups_from_labels(labels), start_time);
}

inline double least_squares_slope(std::span<const double> t, std::span<const double> v) {
  detail::require(t.size() == v.size() && t.size() >= 2, "slope needs >= 2 paired samples");
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double vm = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - tm) * (v[i] - vm);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return num / den;
}

// Thresholds deciding plateau (synchronized) versus growth of a phase spread.
struct SyncCriteria {
  double window = 100.0;           // W, time units
  double slope_tolerance = 0.002;  // eps_s, rad per time unit
  double level_bound = kTwoPi;     // S_max, rad
  double phase_bound = std::numbers::pi / 2.0;  // M, rad

  void validate() const {
    detail::require(window > 0.0, "window must be positive");
    detail::require(slope_tolerance > 0.0, "slope tolerance must be positive");
    detail::require(level_bound > 0.0, "level bound must be positive");
    detail::require(phase_bound > 0.0, "phase bound must be positive");
  }
};

struct Interval {
  double start = 0.0;
  double stop = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SyncVerdict {
  int id = 0;
  bool synchronized = false;
  std::vector<Interval> intervals;
  double final_slope = 0.0;
  double final_level = 0.0;
};

namespace detail {

inline std::size_t window_samples(const std::vector<double>& times, double window) {
  detail::require(times.size() >= 2, "need at least two samples to classify");
  const double period = times[1] - times[0];
  const auto w = static_cast<std::size_t>(std::llround(window / period));
  detail::require(w >= 1 && w < times.size(),
                  "window of " + std::to_string(window) + " time units exceeds the analyzed span");
  return w;
}

}  // namespace detail

// Every trailing window [t - W, t] whose least-squares slope of s is below
// eps_s while s stays below S_max counts as synchronized; intervals are the
// merged union of those windows. The verdict flag reflects the final window.
inline std::vector<SyncVerdict> classify_sync(const GroupStats& stats, const SyncCriteria& crit) {
  crit.validate();
  const std::size_t w = detail::window_samples(stats.times, crit.window);
  const auto& t = stats.times;
  std::vector<SyncVerdict> out;
  for (const auto& g : stats.groups) {
    SyncVerdict v;
    v.id = g.id;
    for (std::size_t end = w; end < t.size(); ++end) {
      const std::size_t begin = end - w;
      const std::span<const double> ts(t.data() + begin, w + 1);
      const std::span<const double> ss(g.s.data() + begin, w + 1);
      const double slope = least_squares_slope(ts, ss);
      const double peak = *std::max_element(ss.begin(), ss.end());
      const bool ok = slope < crit.slope_tolerance && peak < crit.level_bound;
      if (end + 1 == t.size()) {
        v.synchronized = ok;
        v.final_slope = slope;
        v.final_level = g.s[end];
      }
      if (!ok) continue;
      if (!v.intervals.empty() && v.intervals.back().stop >= t[begin])
        v.intervals.back().stop = t[end];
      else
        v.intervals.push_back({t[begin], t[end]});
    }
    out.push_back(std::move(v));
  }
  return out;
}

struct AttentionEvent {
  int id = 0;
  Interval interval;
};

struct AttentionSequence {
  std::vector<SyncVerdict> per_group;
  std::vector<AttentionEvent> events;  // ordered by interval start, then id
};

inline AttentionSequence sync_intervals(std::vector<SyncVerdict> verdicts) {
  AttentionSequence seq;
  for (const auto& v : verdicts)
    for (const auto& iv : v.intervals) seq.events.push_back({v.id, iv});
  std::stable_sort(seq.events.begin(), seq.events.end(), [](const auto& a, const auto& b) {
    if (a.interval.start != b.interval.start) return a.interval.start < b.interval.start;
    return a.id < b.id;
  });
  seq.per_group = std::move(verdicts);
  return seq;
}

struct SalientMask {
  Grid<std::uint8_t> mask;
  std::size_t count = 0;
  bool found = false;
};

namespace detail {

// Grows a coherent cluster from a seed set. The reference is the members'
// median phase drift since `first`; a cell belongs when its own drift minus
// that reference stays within `bound` of its mean offset at every sample of
// [first, last]. Iterates until the member set is stable.
inline std::vector<std::size_t> coherent_cluster(const PhaseTrace& tr,
                                                 std::vector<std::size_t> members,
                                                 std::size_t first, std::size_t last,
                                                 double bound) {
  const std::size_t n = tr.cells();
  const std::size_t len = last - first + 1;
  std::vector<double> scratch;
  std::vector<double> median(len);
  std::vector<double> offset(len);
  for (int iter = 0; iter < 32 && members.size() >= 2; ++iter) {
    for (std::size_t s = first; s <= last; ++s) {
      scratch.clear();
      for (auto c : members) scratch.push_back(tr.phi_at(s, c) - tr.phi_at(first, c));
      const auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(scratch.size() / 2);
      std::nth_element(scratch.begin(), mid, scratch.end());
      double m = *mid;
      if (scratch.size() % 2 == 0) m = 0.5 * (m + *std::max_element(scratch.begin(), mid));
      median[s - first] = m;
    }
    std::vector<std::size_t> next;
    for (std::size_t c = 0; c < n; ++c) {
      double mean = 0.0;
      for (std::size_t s = first; s <= last; ++s) {
        offset[s - first] = tr.phi_at(s, c) - tr.phi_at(first, c) - median[s - first];
        mean += offset[s - first];
      }
      mean /= static_cast<double>(len);
      bool inside = true;
      for (std::size_t k = 0; k < len && inside; ++k) inside = std::abs(offset[k] - mean) <= bound;
      if (inside) next.push_back(c);
    }
    if (next == members) break;
    members = std::move(next);
  }
  return members;
}

}  // namespace detail

// Label-free selection over the final window of length `window`: cells are
// seeded by their mean phase velocity, each seed is grown into a coherent
// cluster, and the largest cluster with >= 2 cells becomes the mask.
inline SalientMask salient_mask(const PhaseTrace& tr, double window, double bound,
                                std::size_t max_seeds = 32) {
  detail::require(bound > 0.0, "phase bound must be positive");
  const std::size_t w = detail::window_samples(tr.times, window);
  const std::size_t last = tr.samples() - 1;
  const std::size_t first = last - w;
  const double span_t = tr.times[last] - tr.times[first];
  const std::size_t n = tr.cells();

  SalientMask result{Grid<std::uint8_t>(tr.shape, 0), 0, false};
  if (n < 2) return result;

  std::vector<double> rate(n);
  for (std::size_t c = 0; c < n; ++c) rate[c] = (tr.phi_at(last, c) - tr.phi_at(first, c)) / span_t;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return rate[a] != rate[b] ? rate[a] < rate[b] : a < b;
  });

  // Seeds are the densest phase-velocity windows: cells locked together
  // cannot differ in mean velocity by more than 2M over the window.
  const double width = 2.0 * bound / span_t;
  std::vector<char> used(n, 0);
  std::vector<std::vector<std::size_t>> seeds;
  for (std::size_t k = 0; k < max_seeds; ++k) {
    std::vector<std::size_t> free;
    for (auto c : order)
      if (!used[c]) free.push_back(c);
    if (free.size() < 2) break;
    std::size_t best_lo = 0, best_count = 0;
    for (std::size_t lo = 0, hi = 0; lo < free.size(); ++lo) {
      if (hi < lo) hi = lo;
      while (hi < free.size() && rate[free[hi]] - rate[free[lo]] <= width) ++hi;
      if (hi - lo > best_count) {
        best_count = hi - lo;
        best_lo = lo;
      }
    }
    if (best_count < 2) break;
    std::vector<std::size_t> seed(free.begin() + static_cast<std::ptrdiff_t>(best_lo),
                                  free.begin() + static_cast<std::ptrdiff_t>(best_lo + best_count));
    for (auto c : seed) used[c] = 1;
    seeds.push_back(std::move(seed));
  }

  std::vector<std::size_t> best;
  for (auto& seed : seeds) {
    if (seed.size() < 2) continue;
    std::sort(seed.begin(), seed.end());
    auto cluster = detail::coherent_cluster(tr, std::move(seed), first, last, bound);
    if (cluster.size() > best.size()) best = std::move(cluster);
  }
  if (best.size() < 2) return result;
  for (auto c : best) result.mask[c] = 1;
  result.count = best.size();
  result.found = true;
  return result;
}

// Intersection over union of a mask against the cells carrying `id`.
inline double mask_iou(const Grid<std::uint8_t>& mask, const LabelMap& labels, int id) {
  require_same_shape(mask, labels, "mask_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool a = mask[i] != 0;
    const bool b = labels[i] == id;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace phasync
