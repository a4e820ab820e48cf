// Copyright 2026 The HCRMP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic 2D multi-lane driving micro-simulator.
//
// Road frame: x runs along the road, y across it. Lane i occupies
// y in [i * lane_width, (i + 1) * lane_width]. The ego follows a kinematic
// bicycle model integrated with explicit Euler; traffic is non-reactive
// lane-following with hard braking on short gaps.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcrmp/common.hpp"

namespace hcrmp {

inline constexpr double kTickSeconds = 0.05;
inline constexpr double kMaxAccel = 4.0;         // m/s^2
inline constexpr double kMaxSpeed = 20.0;        // m/s
inline constexpr double kWheelbase = 2.7;        // m
inline constexpr double kMaxSteerAngle = 0.5;    // rad at steer = 1
inline constexpr double kLaneWidth = 3.5;        // m
inline constexpr double kGoalX = 250.0;          // m
inline constexpr int kMaxTicks = 1200;
inline constexpr double kVehicleLength = 4.5;
inline constexpr double kVehicleWidth = 2.0;
inline constexpr double kPedestrianSize = 0.6;
inline constexpr double kBrakeGap = 5.0;         // m, traffic hard-braking trigger
inline constexpr double kTrafficHardBrake = 8.0; // m/s^2
inline constexpr double kTrafficRecover = 2.0;   // m/s^2
inline constexpr double kPedestrianSpeed = 1.4;  // m/s
inline constexpr double kPedestrianTrigger = 25.0;
inline constexpr double kTtcNone = 1e9;

enum class AgentKind { ego, vehicle, pedestrian };
enum class Scenario { overtaking, merging, trilemma, occluded_pedestrian };
enum class Density { low, medium, high };
enum class Terminal { none, collision, off_road, goal_reached, timeout };

inline constexpr std::array<Scenario, 4> kAllScenarios = {
    Scenario::overtaking, Scenario::merging, Scenario::trilemma, Scenario::occluded_pedestrian};
inline constexpr std::array<Density, 3> kAllDensities = {Density::low, Density::medium,
                                                         Density::high};

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::overtaking: return "overtaking";
    case Scenario::merging: return "merging";
    case Scenario::trilemma: return "trilemma";
    case Scenario::occluded_pedestrian: return "occluded_pedestrian";
  }
  return "?";
}

inline std::string_view to_string(Density d) {
  switch (d) {
    case Density::low: return "low";
    case Density::medium: return "medium";
    case Density::high: return "high";
  }
  return "?";
}

inline std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::none: return "none";
    case Terminal::collision: return "collision";
    case Terminal::off_road: return "off_road";
    case Terminal::goal_reached: return "goal_reached";
    case Terminal::timeout: return "timeout";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  for (auto v : kAllScenarios)
    if (to_string(v) == s) return v;
  throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

inline Density parse_density(std::string_view s) {
  for (auto v : kAllDensities)
    if (to_string(v) == s) return v;
  throw ConfigError("unknown density '" + std::string(s) + "'");
}

/// Number of traffic participants spawned per density level.
inline int agent_count(Density d) {
  switch (d) {
    case Density::low: return 2;
    case Density::medium: return 5;
    case Density::high: return 9;
  }
  return 0;
}

struct AgentState {
  double x = 0.0;        // m, longitudinal
  double y = 0.0;        // m, lateral
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s
  double accel = 0.0;    // m/s^2
  AgentKind kind = AgentKind::vehicle;
  int lane_index = 0;

  double length() const { return kind == AgentKind::pedestrian ? kPedestrianSize : kVehicleLength; }
  double width() const { return kind == AgentKind::pedestrian ? kPedestrianSize : kVehicleWidth; }
};

struct Rect {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

struct RoadSpec {
  int lane_count = 2;
  double lane_width = kLaneWidth;
  double length = 300.0;
  std::optional<double> merge_point;  // lane 0 ends here (merging only)
  std::optional<Rect> occluder;       // roadside obstruction (occluded_pedestrian only)

  double width() const { return lane_count * lane_width; }
  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  /// Lane containing lateral position y, or -1 when off the carriageway.
  int lane_of(double y) const {
    if (y < 0.0 || y >= width()) return -1;
    return static_cast<int>(y / lane_width);
  }
};

struct WorldSnapshot {
  int tick = 0;
  AgentState ego{.kind = AgentKind::ego};
  std::vector<AgentState> agents;
  RoadSpec road;
  Scenario scenario = Scenario::overtaking;
  Density density = Density::low;
  double goal_x = kGoalX;
};

struct Action {
  double throttle_brake = 0.0;
  double steer = 0.0;

  Action clamped() const {
    return {std::clamp(throttle_brake, -1.0, 1.0), std::clamp(steer, -1.0, 1.0)};
  }
};

struct RewardVector {
  double safety = 0.0;
  double efficiency = 0.0;
  double comfort = 0.0;

  std::array<double, kAttributes> as_array() const { return {safety, efficiency, comfort}; }
};

struct StepOutcome {
  WorldSnapshot snapshot;
  RewardVector rewards;
  Terminal terminal = Terminal::none;
};

// ---------------------------------------------------------------------------
// Geometry

/// Oriented rectangle footprint.
struct Footprint {
  double cx, cy, heading, half_length, half_width;

  std::array<std::array<double, 2>, 4> corners() const {
    const double c = std::cos(heading), s = std::sin(heading);
    std::array<std::array<double, 2>, 4> out{};
    const double sl[4] = {1, 1, -1, -1};
    const double sw[4] = {1, -1, -1, 1};
    for (int i = 0; i < 4; ++i) {
      const double lx = sl[i] * half_length, ly = sw[i] * half_width;
      out[i] = {cx + c * lx - s * ly, cy + s * lx + c * ly};
    }
    return out;
  }
};

inline Footprint footprint(const AgentState& a) {
  return {a.x, a.y, a.heading, 0.5 * a.length(), 0.5 * a.width()};
}

/// Separating-axis test; touching edges do not count as overlap.
inline bool overlaps(const Footprint& a, const Footprint& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const double axes[4][2] = {{std::cos(a.heading), std::sin(a.heading)},
                             {-std::sin(a.heading), std::cos(a.heading)},
                             {std::cos(b.heading), std::sin(b.heading)},
                             {-std::sin(b.heading), std::cos(b.heading)}};
  for (const auto& ax : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (int i = 0; i < 4; ++i) {
      const double pa = ca[i][0] * ax[0] + ca[i][1] * ax[1];
      const double pb = cb[i][0] * ax[0] + cb[i][1] * ax[1];
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    if (amax <= bmin || bmax <= amin) return false;
  }
  return true;
}

inline bool ego_collides(const WorldSnapshot& snap) {
  const Footprint ego = footprint(snap.ego);
  return std::any_of(snap.agents.begin(), snap.agents.end(),
                     [&](const AgentState& a) { return overlaps(ego, footprint(a)); });
}

inline bool ego_off_road(const WorldSnapshot& snap) {
  const auto& e = snap.ego;
  const auto& road = snap.road;
  if (e.y < 0.0 || e.y > road.width()) return true;
  if (e.x < -50.0 || e.x > road.length) return true;
  if (road.merge_point && e.x > *road.merge_point && e.y < road.lane_width) return true;
  return false;
}

/// Velocity component along the road axis.
inline double longitudinal_velocity(const AgentState& a) { return a.speed * std::cos(a.heading); }

/// Minimum time-to-collision against agents ahead in the ego's lane.
/// Gap is bumper to bumper; closing speed is floored at 0.1 m/s.
/// Returns kTtcNone (1e9) when nothing is ahead.
inline double compute_ttc(const AgentState& ego, std::span<const AgentState> agents,
                          const RoadSpec& road) {
  const int lane = road.lane_of(ego.y);
  double best = kTtcNone;
  if (lane < 0) return best;
  for (const auto& a : agents) {
    if (road.lane_of(a.y) != lane) continue;
    const double dx = a.x - ego.x;
    if (dx <= 0.0) continue;
    const double gap = std::max(0.0, dx - 0.5 * (ego.length() + a.length()));
    const double closing = longitudinal_velocity(ego) - longitudinal_velocity(a);
    best = std::min(best, gap / std::max(closing, 0.1));
  }
  return best;
}

inline double compute_ttc(const WorldSnapshot& snap) {
  return compute_ttc(snap.ego, snap.agents, snap.road);
}

// ---------------------------------------------------------------------------
// Rewards

inline constexpr double kTargetSpeed = 12.0;  // m/s
inline constexpr double kJerkRef = 10.0;      // m/s^3
inline constexpr double kTtcHorizon = 3.0;    // s

/// Reward terms from the closed-form formulas, given the collision flag,
/// TTC, and ego kinematics of the new tick.
inline RewardVector reward_terms(bool collided, double ttc, double speed, double accel,
                                 double jerk) {
  RewardVector r;
  if (collided) {
    r.safety = -1.0;
  } else if (ttc > kTtcHorizon) {
    r.safety = 0.02;
  } else {
    r.safety = std::clamp(-0.5 * std::max(0.0, 1.0 - ttc / kTtcHorizon), -1.0, 0.0);
  }
  r.efficiency = std::clamp(speed / kTargetSpeed, 0.0, 1.0) * 0.05;
  const double a = accel / kMaxAccel, j = jerk / kJerkRef;
  r.comfort = std::clamp(-0.01 * a * a - 0.01 * j * j, -1.0, 0.0);
  return r;
}

inline RewardVector reward_components(const WorldSnapshot& prev, const Action& /*action*/,
                                      const WorldSnapshot& next) {
  if (prev.tick + 1 != next.tick)
    throw ContractViolation("reward_components: snapshots are not consecutive ticks");
  const double jerk = (next.ego.accel - prev.ego.accel) / kTickSeconds;
  return reward_terms(ego_collides(next), compute_ttc(next), next.ego.speed, next.ego.accel, jerk);
}

// ---------------------------------------------------------------------------
// Simulator

class World {
 public:
  World() = default;

  /// Starts from an arbitrary snapshot; traffic cruise speeds are taken from
  /// the agents' current speeds.
  explicit World(WorldSnapshot initial) { load(std::move(initial)); }

  const WorldSnapshot& reset(Scenario scenario, Density density, std::uint64_t seed);

  StepOutcome step(const Action& action);

  const WorldSnapshot& snapshot() const { return snap_; }
  bool terminated() const { return terminated_; }

 private:
  void load(WorldSnapshot s) {
    snap_ = std::move(s);
    cruise_.clear();
    for (const auto& a : snap_.agents) cruise_.push_back(a.speed);
    pedestrian_triggered_ = false;
    terminated_ = false;
  }

  void advance_traffic(const WorldSnapshot& before);

  WorldSnapshot snap_;
  std::vector<double> cruise_;
  bool pedestrian_triggered_ = false;
  bool terminated_ = false;
};

namespace detail {

inline AgentState make_vehicle(const RoadSpec& road, int lane, double x, double speed,
                               bool oncoming = false) {
  AgentState a;
  a.kind = AgentKind::vehicle;
  a.lane_index = lane;
  a.x = x;
  a.y = road.lane_center(lane);
  a.heading = oncoming ? std::numbers::pi : 0.0;
  a.speed = speed;
  return a;
}

// Rejection-samples a same-direction vehicle that keeps 12 m spacing from
// every agent already in its lane.
inline bool place_vehicle(std::mt19937_64& rng, const RoadSpec& road,
                          std::vector<AgentState>& agents, std::span<const int> lanes,
                          double x_lo, double x_hi, double v_lo, double v_hi) {
  std::uniform_int_distribution<std::size_t> pick_lane(0, lanes.size() - 1);
  std::uniform_real_distribution<double> pick_x(x_lo, x_hi);
  std::uniform_real_distribution<double> pick_v(v_lo, v_hi);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int lane = lanes[pick_lane(rng)];
    const double x = pick_x(rng);
    const double v = pick_v(rng);
    const bool clear = std::none_of(agents.begin(), agents.end(), [&](const AgentState& o) {
      return o.lane_index == lane && std::abs(o.x - x) < 12.0;
    });
    if (clear) {
      agents.push_back(make_vehicle(road, lane, x, v));
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline const WorldSnapshot& World::reset(Scenario scenario, Density density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  WorldSnapshot s;
  s.tick = 0;
  s.scenario = scenario;
  s.density = density;
  s.goal_x = kGoalX;
  s.road.length = 300.0;
  s.road.lane_width = kLaneWidth;

  const int count = agent_count(density);
  auto& agents = s.agents;
  int ego_lane = 0;

  switch (scenario) {
    case Scenario::overtaking: {
      s.road.lane_count = 3;
      const double lead_x = std::uniform_real_distribution<double>(30.0, 50.0)(rng);
      agents.push_back(detail::make_vehicle(s.road, 0, lead_x, 4.0));
      const int lanes[] = {0, 1, 2};
      while (static_cast<int>(agents.size()) < count &&
             detail::place_vehicle(rng, s.road, agents, lanes, 20.0, 230.0, 6.0, 11.0)) {
      }
      break;
    }
    case Scenario::merging: {
      s.road.lane_count = 2;
      s.road.merge_point = std::uniform_real_distribution<double>(80.0, 120.0)(rng);
      const int lanes[] = {1};
      while (static_cast<int>(agents.size()) < count &&
             detail::place_vehicle(rng, s.road, agents, lanes, 15.0, 230.0, 6.0, 10.0)) {
      }
      break;
    }
    case Scenario::trilemma: {
      s.road.lane_count = 2;
      const double stop_x = std::uniform_real_distribution<double>(50.0, 80.0)(rng);
      const double oncoming_x = std::uniform_real_distribution<double>(120.0, 180.0)(rng);
      agents.push_back(detail::make_vehicle(s.road, 0, stop_x, 0.0));
      agents.push_back(detail::make_vehicle(s.road, 1, oncoming_x, 8.0, /*oncoming=*/true));
      const int lanes[] = {0};
      while (static_cast<int>(agents.size()) < count &&
             detail::place_vehicle(rng, s.road, agents, lanes, stop_x + 15.0, 240.0, 5.0, 9.0)) {
      }
      break;
    }
    case Scenario::occluded_pedestrian: {
      s.road.lane_count = 2;
      const double ped_x = std::uniform_real_distribution<double>(40.0, 80.0)(rng);
      AgentState ped;
      ped.kind = AgentKind::pedestrian;
      ped.x = ped_x;
      ped.y = -1.5;
      ped.heading = 0.5 * std::numbers::pi;
      ped.speed = 0.0;
      ped.lane_index = 0;
      agents.push_back(ped);
      s.road.occluder = Rect{ped_x - 10.0, ped_x - 1.0, -3.0, -0.3};
      const int lanes[] = {0, 1};
      while (static_cast<int>(agents.size()) < count &&
             detail::place_vehicle(rng, s.road, agents, lanes, 15.0, 230.0, 6.0, 10.0)) {
      }
      break;
    }
  }

  s.ego = AgentState{.x = 0.0,
                     .y = s.road.lane_center(ego_lane),
                     .heading = 0.0,
                     .speed = 0.0,
                     .accel = 0.0,
                     .kind = AgentKind::ego,
                     .lane_index = ego_lane};
  load(std::move(s));
  return snap_;
}

inline void World::advance_traffic(const WorldSnapshot& before) {
  const auto& road = before.road;
  const double half_lane = 0.5 * road.lane_width;
  for (std::size_t i = 0; i < snap_.agents.size(); ++i) {
    const AgentState& cur = before.agents[i];
    AgentState& nxt = snap_.agents[i];
    if (cur.kind == AgentKind::pedestrian) {
      if (!pedestrian_triggered_ && std::abs(cur.x - before.ego.x) <= kPedestrianTrigger) {
        pedestrian_triggered_ = true;
        nxt.speed = kPedestrianSpeed;
      }
      if (pedestrian_triggered_) {
        if (cur.y < road.width() + 1.5) {
          nxt.y = cur.y + nxt.speed * kTickSeconds;
        } else {
          nxt.speed = 0.0;
        }
      }
      nxt.lane_index = std::max(0, road.lane_of(nxt.y));
      continue;
    }

    const double dir = std::cos(cur.heading) >= 0.0 ? 1.0 : -1.0;
    double gap = std::numeric_limits<double>::infinity();
    auto consider = [&](const AgentState& other) {
      if (std::abs(other.y - cur.y) >= half_lane) return;
      const double ahead = (other.x - cur.x) * dir;
      if (ahead <= 0.0) return;
      gap = std::min(gap, ahead - 0.5 * (cur.length() + other.length()));
    };
    consider(before.ego);
    for (std::size_t j = 0; j < before.agents.size(); ++j)
      if (j != i) consider(before.agents[j]);

    double v = cur.speed;
    if (gap < kBrakeGap) {
      v = std::max(0.0, v - kTrafficHardBrake * kTickSeconds);
    } else {
      v = std::min(cruise_[i], v + kTrafficRecover * kTickSeconds);
    }
    nxt.accel = (v - cur.speed) / kTickSeconds;
    nxt.speed = v;
    nxt.x = cur.x + dir * cur.speed * kTickSeconds;
  }
}

inline StepOutcome World::step(const Action& raw_action) {
  if (terminated_) throw ContractViolation("World::step called on a terminated episode");
  const Action act = raw_action.clamped();
  const WorldSnapshot before = snap_;

  // Ego: kinematic bicycle, explicit Euler.
  const AgentState& e = before.ego;
  AgentState& ego = snap_.ego;
  const double delta = act.steer * kMaxSteerAngle;
  ego.x = e.x + e.speed * std::cos(e.heading) * kTickSeconds;
  ego.y = e.y + e.speed * std::sin(e.heading) * kTickSeconds;
  ego.heading = wrap_angle(e.heading + (e.speed / kWheelbase) * std::tan(delta) * kTickSeconds);
  ego.speed = std::clamp(e.speed + act.throttle_brake * kMaxAccel * kTickSeconds, 0.0, kMaxSpeed);
  ego.accel = (ego.speed - e.speed) / kTickSeconds;
  ego.lane_index = std::max(0, snap_.road.lane_of(ego.y));

  advance_traffic(before);
  snap_.tick = before.tick + 1;

  StepOutcome out;
  out.rewards = reward_components(before, act, snap_);
  if (ego_collides(snap_)) {
    out.terminal = Terminal::collision;
  } else if (ego_off_road(snap_)) {
    out.terminal = Terminal::off_road;
  } else if (ego.x >= snap_.goal_x) {
    out.terminal = Terminal::goal_reached;
  } else if (snap_.tick >= kMaxTicks) {
    out.terminal = Terminal::timeout;
  }
  terminated_ = out.terminal != Terminal::none;
  out.snapshot = snap_;
  return out;
}

}  // namespace hcrmp
