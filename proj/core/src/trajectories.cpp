#include "lfgc/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace lfgc {

namespace {

constexpr double kTimeEps = 1e-9;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Profile p of length len, step 0 most significant.
std::vector<double> profile_of(std::size_t p, int len,
                               const std::vector<double>& levels) {
  std::vector<double> out(static_cast<std::size_t>(len));
  for (int k = len - 1; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = levels[p % levels.size()];
    p /= levels.size();
  }
  return out;
}

struct LateralSegment {
  QuinticSegment quintic;
  double start = 0.0;
  double elapsed0 = 0.0;
  double total = 0.0;
  double origin_y = 0.0;
  double goal_y = 0.0;
};

// Piecewise lateral reference: hold hold_y until the first segment starts.
class LateralReference {
 public:
  explicit LateralReference(double hold_y) : hold_y_(hold_y) {}

  void add(const LateralSegment& seg) { segs_.push_back(seg); }
  bool any() const { return !segs_.empty(); }

  // Segment governing the sample at time t. A segment that starts exactly at
  // t governs it only when it continues an earlier maneuver at t = 0.
  const LateralSegment* governing(double t) const {
    const LateralSegment* g = nullptr;
    for (const auto& s : segs_) {
      if (s.start < t - kTimeEps) g = &s;
    }
    if (!g && !segs_.empty() && segs_.front().start <= kTimeEps &&
        segs_.front().elapsed0 > 0 && t <= kTimeEps) {
      g = &segs_.front();
    }
    return g;
  }

  BoundaryState reference(double t) const {
    const LateralSegment* g = governing(t);
    if (!g) {
      BoundaryState b;
      b.y = hold_y_;
      return b;
    }
    const double local = std::min(t - g->start, g->quintic.duration);
    return g->quintic.evaluate(local);
  }

  double y(double t) const {
    const LateralSegment* g = governing(t);
    if (!g) return hold_y_;
    if (t - g->start >= g->quintic.duration - kTimeEps) return g->goal_y;
    return g->quintic.evaluate(t - g->start).y;
  }

  std::optional<double> speed(double t) const {
    const LateralSegment* g = governing(t);
    if (!g) return std::nullopt;
    const BoundaryState b = g->quintic.evaluate(std::min(t - g->start, g->quintic.duration));
    return std::hypot(b.xd, b.yd);
  }

  std::optional<LaneChangeProgress> progress(double t) const {
    const LateralSegment* g = governing(t);
    if (!g) return std::nullopt;
    const double local = t - g->start;
    if (local >= g->quintic.duration - kTimeEps) return std::nullopt;
    const BoundaryState b = g->quintic.evaluate(local);
    LaneChangeProgress p;
    p.elapsed = g->elapsed0 + local;
    p.duration = g->total;
    p.origin_y = g->origin_y;
    p.goal_y = g->goal_y;
    p.y_rate = b.yd;
    p.y_accel = b.ydd;
    return p;
  }

  const std::vector<LateralSegment>& segments() const { return segs_; }

 private:
  double hold_y_;
  std::vector<LateralSegment> segs_;
};

LateralSegment make_segment(const BoundaryState& ini, double goal_y,
                            double duration, double start, double elapsed0,
                            double total, double origin_y) {
  BoundaryState term;
  term.x = ini.x + ini.xd * duration;
  term.xd = ini.xd;
  term.xdd = 0.0;
  term.y = goal_y;
  LateralSegment seg;
  BoundaryState from = ini;
  from.xdd = 0.0;
  seg.quintic = solve_quintic(from, term, duration);
  seg.start = start;
  seg.elapsed0 = elapsed0;
  seg.total = total;
  seg.origin_y = origin_y;
  seg.goal_y = goal_y;
  return seg;
}

BoundaryState boundary_from_state(const VehicleState& s, double y_rate,
                                  double y_accel) {
  BoundaryState b;
  b.x = s.x;
  b.xd = std::sqrt(std::max(s.v * s.v - y_rate * y_rate, 0.0));
  b.y = s.y;
  b.yd = y_rate;
  b.ydd = y_accel;
  return b;
}

struct PlanSpec {
  ManeuverKind kind = ManeuverKind::lane_keep;
  int step = -1;
  std::vector<double> prefix;
};

std::optional<Trajectory> build_plan(
    const VehicleState& s0, const std::optional<LaneChangeProgress>& prog,
    const PlanSpec& spec, const TrajectoryGenConfig& cfg,
    const VehicleParams& params) {
  const double dt = cfg.integration.dt;
  LateralReference lat(s0.y);
  if (spec.kind == ManeuverKind::continue_change ||
      spec.kind == ManeuverKind::abort) {
    lat.add(make_segment(boundary_from_state(s0, prog->y_rate, prog->y_accel),
                         prog->goal_y, prog->remaining(), 0.0, prog->elapsed,
                         prog->duration, prog->origin_y));
  }

  Trajectory tr;
  tr.integration = cfg.integration;
  tr.maneuver.kind = spec.kind;
  tr.maneuver.step = spec.step;
  tr.maneuver.profile = spec.prefix;
  const auto n = static_cast<std::size_t>(cfg.horizon);
  tr.states.reserve(n + 1);
  tr.controls.reserve(n);
  tr.progress.reserve(n + 1);
  tr.states.push_back(s0);
  tr.progress.push_back(prog);

  VehicleState cur = s0;
  for (int k = 0; k < cfg.horizon; ++k) {
    const double t0 = k * dt;
    const double t1 = (k + 1) * dt;
    if (spec.kind == ManeuverKind::lane_change && k == spec.step) {
      lat.add(make_segment(boundary_from_state(cur, 0.0, 0.0), cfg.target_lane_y,
                           cfg.lane_change_duration, t0, 0.0,
                           cfg.lane_change_duration, cfg.origin_lane_y));
    }
    if (spec.kind == ManeuverKind::abort && k == spec.step) {
      lat.add(make_segment(lat.reference(t0), prog->origin_y,
                           cfg.lane_change_duration, t0, 0.0,
                           cfg.lane_change_duration, prog->goal_y));
    }

    double a = 0.0;
    if (static_cast<std::size_t>(k) < spec.prefix.size()) {
      a = spec.prefix[static_cast<std::size_t>(k)];
    } else if (auto v_ref = lat.speed(t1)) {
      a = (*v_ref - cur.v) / dt;
    }
    a = speed_limited_accel(cur.v, a, params, dt);

    auto u = lateral_tracking_control(cur, a, lat.y(t1), params, cfg.integration);
    if (!u) return std::nullopt;
    cur = propagate(cur, *u, params, cfg.integration);
    tr.controls.push_back(*u);
    tr.states.push_back(cur);
    tr.progress.push_back(lat.progress(t1));
  }
  for (const auto& seg : lat.segments()) {
    tr.maneuver.segments.push_back(seg.quintic);
    tr.maneuver.segment_starts.push_back(seg.start);
  }
  return tr;
}

void check_progress(const std::optional<LaneChangeProgress>& prog) {
  if (!prog) return;
  if (!(prog->elapsed >= 0) || !(prog->elapsed < prog->duration) ||
      !std::isfinite(prog->y_rate) || !std::isfinite(prog->y_accel)) {
    throw std::invalid_argument(
        "generate_merge_set: lane-change progress must lie in [0, duration)");
  }
}

}  // namespace

const char* to_string(ManeuverKind kind) {
  switch (kind) {
    case ManeuverKind::lane_keep: return "lane_keep";
    case ManeuverKind::lane_change: return "lane_change";
    case ManeuverKind::abort: return "abort";
    case ManeuverKind::continue_change: return "continue_change";
  }
  return "unknown";
}

void TrajectoryGenConfig::validate() const {
  integration.validate();
  if (horizon < 1) throw std::invalid_argument("trajectory config: horizon must be >= 1");
  if (accel_levels.empty()) {
    throw std::invalid_argument("trajectory config: accel_levels must be non-empty");
  }
  if (!(lane_change_duration > 0) || !(lane_width > 0)) {
    throw std::invalid_argument(
        "trajectory config: lane_change_duration and lane_width must be positive");
  }
  if (horizon < static_cast<int>(std::ceil(lane_change_duration / integration.dt - kTimeEps))) {
    throw std::invalid_argument(
        "trajectory config: horizon must cover a full lane change");
  }
}

std::vector<Trajectory> generate_longitudinal_set(const VehicleState& s,
                                                  const TrajectoryGenConfig& cfg,
                                                  const VehicleParams& params) {
  if (!is_finite(s)) throw DomainError("generate_longitudinal_set: non-finite state");
  const std::size_t count = ipow(cfg.accel_levels.size(), cfg.horizon);
  const double dt = cfg.integration.dt;
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Trajectory tr;
    tr.integration = cfg.integration;
    tr.maneuver.profile = profile_of(p, cfg.horizon, cfg.accel_levels);
    tr.states.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
    tr.states.push_back(s);
    tr.progress.assign(static_cast<std::size_t>(cfg.horizon) + 1, std::nullopt);
    VehicleState cur = s;
    for (double level : tr.maneuver.profile) {
      const double a = speed_limited_accel(cur.v, level, params, dt);
      cur = propagate_longitudinal(cur, a, params, cfg.integration);
      tr.controls.push_back(Control{a, 0.0});
      tr.states.push_back(cur);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::size_t nominal_merge_set_size(
    const TrajectoryGenConfig& cfg,
    const std::optional<LaneChangeProgress>& progress) {
  const std::size_t levels = cfg.accel_levels.size();
  if (!progress) {
    std::size_t n = ipow(levels, cfg.horizon);
    for (int t = 0; t < cfg.horizon; ++t) n += ipow(levels, t);
    return n;
  }
  std::size_t n = 1;
  for (int t = 0; t < cfg.horizon; ++t) {
    if (t * cfg.integration.dt < progress->remaining() - kTimeEps) ++n;
  }
  return n;
}

MergeSet generate_merge_set(const VehicleState& s,
                            const std::optional<LaneChangeProgress>& progress,
                            const TrajectoryGenConfig& cfg,
                            const VehicleParams& params) {
  if (!is_finite(s)) throw DomainError("generate_merge_set: non-finite state");
  check_progress(progress);

  std::vector<PlanSpec> specs;
  if (!progress) {
    const std::size_t keep = ipow(cfg.accel_levels.size(), cfg.horizon);
    for (std::size_t p = 0; p < keep; ++p) {
      specs.push_back({ManeuverKind::lane_keep, -1,
                       profile_of(p, cfg.horizon, cfg.accel_levels)});
    }
    for (int t = 0; t < cfg.horizon; ++t) {
      const std::size_t prefixes = ipow(cfg.accel_levels.size(), t);
      for (std::size_t p = 0; p < prefixes; ++p) {
        specs.push_back({ManeuverKind::lane_change, t,
                         profile_of(p, t, cfg.accel_levels)});
      }
    }
  } else {
    specs.push_back({ManeuverKind::continue_change, -1, {}});
    for (int t = 0; t < cfg.horizon; ++t) {
      if (t * cfg.integration.dt < progress->remaining() - kTimeEps) {
        specs.push_back({ManeuverKind::abort, t, {}});
      }
    }
  }

  MergeSet out;
  out.trajectories.reserve(specs.size());
  for (const auto& spec : specs) {
    if (auto tr = build_plan(s, progress, spec, cfg, params)) {
      out.trajectories.push_back(std::move(*tr));
    } else {
      ++out.rejected;
    }
  }
  return out;
}

std::optional<Control> lateral_tracking_control(const VehicleState& s, double a,
                                                double y_target,
                                                const VehicleParams& params,
                                                const Integration& integ) {
  auto miss = [&](double beta) {
    const Control u{a, steering_for_slip(beta, params)};
    return propagate(s, u, params, integ).y - y_target;
  };
  const double f0 = miss(0.0);
  if (f0 == 0.0) return Control{a, 0.0};

  const double beta_max = slip_angle(params.delta_bound, params);
  const double v_mean = s.v + 0.5 * a * integ.dt;
  double guess = 1e-4;
  if (v_mean > 0) {
    const double gain = v_mean * integ.dt * (1.0 + v_mean * integ.dt / (2.0 * params.l_r));
    guess = std::max(std::abs(f0) / gain, 1e-8);
  }
  const double dir = f0 > 0 ? -1.0 : 1.0;

  double lo = 0.0, f_lo = f0;
  double step = std::min(guess * 1.5, beta_max);
  double hi = dir * step, f_hi = miss(hi);
  while (f_lo * f_hi > 0) {
    if (std::abs(hi) >= beta_max) return std::nullopt;
    lo = hi;
    f_lo = f_hi;
    hi = dir * std::min(std::abs(hi) * 2.0, beta_max);
    f_hi = miss(hi);
  }
  if (f_hi == 0.0) return Control{a, steering_for_slip(hi, params)};

  double a_end = std::min(lo, hi), b_end = std::max(lo, hi);
  double fa = lo < hi ? f_lo : f_hi, fb = lo < hi ? f_hi : f_lo;
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      miss, a_end, b_end, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
  const double beta = 0.5 * (root.first + root.second);
  const double delta = steering_for_slip(beta, params);
  if (std::abs(delta) > params.delta_bound + 1e-12) return std::nullopt;
  return Control{a, std::clamp(delta, -params.delta_bound, params.delta_bound)};
}

std::vector<Control> recover_controls(const Trajectory& traj,
                                      const VehicleParams& params) {
  const Integration& integ = traj.integration;
  const int n = integ.substeps;
  const double h = integ.substep();
  std::vector<Control> out;
  out.reserve(traj.states.size());
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const VehicleState& s = traj.states[k];
    const VehicleState& next = traj.states[k + 1];
    const int step = static_cast<int>(k);
    const double a = (next.v - s.v) / integ.dt;
    if (std::abs(a) > params.a_bound + 1e-9) {
      throw InfeasibleStep(step, "recover_controls: step " + std::to_string(step) +
                                     " needs acceleration beyond bounds");
    }
    const double speed_sum = n * s.v + a * h * n * (n - 1) / 2.0;
    const double dpsi = next.psi - s.psi;
    double beta = 0.0;
    if (std::abs(speed_sum) < 1e-12) {
      if (std::abs(dpsi) > 1e-12) {
        throw InfeasibleStep(step, "recover_controls: step " + std::to_string(step) +
                                       " turns without moving");
      }
    } else {
      const double sin_beta = params.l_r * dpsi / (h * speed_sum);
      if (std::abs(sin_beta) >= 1.0) {
        throw InfeasibleStep(step, "recover_controls: step " + std::to_string(step) +
                                       " turns faster than the geometry allows");
      }
      beta = std::asin(sin_beta);
    }
    const double delta = steering_for_slip(beta, params);
    if (std::abs(delta) > params.delta_bound + 1e-9) {
      throw InfeasibleStep(step, "recover_controls: step " + std::to_string(step) +
                                     " needs steering beyond bounds");
    }
    out.push_back(Control{a, delta});
  }
  return out;
}

std::vector<VehicleState> replay_controls(const VehicleState& start,
                                          const std::vector<Control>& controls,
                                          const VehicleParams& params,
                                          const Integration& integ) {
  std::vector<VehicleState> out{start};
  out.reserve(controls.size() + 1);
  for (const auto& u : controls) out.push_back(propagate(out.back(), u, params, integ));
  return out;
}

}  // namespace lfgc
