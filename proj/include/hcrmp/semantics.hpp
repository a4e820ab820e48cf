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

// Semantic state augmentation: scenario-level one-hot (4), object-level
// sector occupancy (9), and the 29-dim observation fed to the agent.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>

#include "hcrmp/driveworld.hpp"

namespace hcrmp {

inline constexpr std::size_t kScenarioDim = 4;
inline constexpr std::size_t kObjectDim = 9;
inline constexpr std::size_t kSectors = 8;
inline constexpr std::size_t kRawDim = 16;
inline constexpr std::size_t kLlmDim = kScenarioDim + kObjectDim;
inline constexpr std::size_t kStateDim = kRawDim + kLlmDim;

inline constexpr double kSensingRange = 50.0;  // m
inline constexpr double kHazardTtc = 2.0;      // s
inline constexpr double kMergeLookahead = 60.0;
inline constexpr double kLeadLookahead = 40.0;

enum class SceneCategory { cruise = 0, lead_vehicle = 1, merge_conflict = 2, hazard = 3 };

inline std::string_view to_string(SceneCategory c) {
  switch (c) {
    case SceneCategory::cruise: return "cruise";
    case SceneCategory::lead_vehicle: return "lead_vehicle";
    case SceneCategory::merge_conflict: return "merge_conflict";
    case SceneCategory::hazard: return "hazard";
  }
  return "?";
}

inline constexpr std::array<std::string_view, kSectors> kSectorNames = {
    "front", "front_left", "left", "rear_left", "rear", "rear_right", "right", "front_right"};

struct ScenarioVector {
  std::array<double, kScenarioDim> v{};

  SceneCategory category() const {
    return static_cast<SceneCategory>(std::max_element(v.begin(), v.end()) - v.begin());
  }
};

struct ObjectVector {
  std::array<double, kObjectDim> v{};

  double critical_fraction() const { return v[0]; }
  double sector(std::size_t s) const { return v[1 + s]; }
};

struct AugmentedState {
  std::array<double, kRawDim> raw{};
  std::array<double, kLlmDim> llm{};

  std::array<double, kStateDim> flat() const {
    std::array<double, kStateDim> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    std::copy(llm.begin(), llm.end(), out.begin() + kRawDim);
    return out;
  }
};

inline bool has_pedestrian(const WorldSnapshot& snap) {
  return std::any_of(snap.agents.begin(), snap.agents.end(),
                     [](const AgentState& a) { return a.kind == AgentKind::pedestrian; });
}

/// Rule-based scene category. Priority: hazard > merge_conflict >
/// lead_vehicle > cruise.
inline SceneCategory classify_scene(const WorldSnapshot& snap) {
  if (has_pedestrian(snap) || compute_ttc(snap) < kHazardTtc) return SceneCategory::hazard;
  if (snap.road.merge_point) {
    const double ahead = *snap.road.merge_point - snap.ego.x;
    if (ahead >= 0.0 && ahead <= kMergeLookahead) return SceneCategory::merge_conflict;
  }
  const int lane = snap.road.lane_of(snap.ego.y);
  for (const auto& a : snap.agents) {
    const double dx = a.x - snap.ego.x;
    if (lane >= 0 && snap.road.lane_of(a.y) == lane && dx > 0.0 && dx <= kLeadLookahead)
      return SceneCategory::lead_vehicle;
  }
  return SceneCategory::cruise;
}

inline ScenarioVector encode_scenario(const WorldSnapshot& snap) {
  ScenarioVector sv;
  sv.v[static_cast<std::size_t>(classify_scene(snap))] = 1.0;
  return sv;
}

/// Ego-relative sector index of a bearing: sector 0 is centred on the ego
/// heading, indices increase counterclockwise in 45 degree steps.
inline std::size_t sector_of(double bearing, double ego_heading) {
  constexpr double width = std::numbers::pi / 4.0;
  const double rel = wrap_angle(bearing - ego_heading);  // (-pi, pi]
  double shifted = rel + 0.5 * width;
  if (shifted < 0.0) shifted += 2.0 * std::numbers::pi;
  return static_cast<std::size_t>(std::floor(shifted / width)) % kSectors;
}

inline ObjectVector encode_objects(const WorldSnapshot& snap) {
  ObjectVector ov;
  std::fill(ov.v.begin() + 1, ov.v.end(), 1.0);  // compensation sentinel
  int critical = 0;
  for (const auto& a : snap.agents) {
    const double dx = a.x - snap.ego.x, dy = a.y - snap.ego.y;
    const double dist = std::hypot(dx, dy);
    if (dist > kSensingRange) continue;
    ++critical;
    const std::size_t s = sector_of(std::atan2(dy, dx), snap.ego.heading);
    ov.v[1 + s] = std::min(ov.v[1 + s], dist / kSensingRange);
  }
  ov.v[0] = std::clamp(critical / 8.0, 0.0, 1.0);
  return ov;
}

namespace detail {

// Distance along a unit ray to the entry point of an axis-aligned box, or
// +inf when missed. Slab method.
inline double ray_box(double ox, double oy, double dx, double dy, const Rect& r) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  const double o[2] = {ox, oy}, d[2] = {dx, dy};
  const double lo[2] = {r.x_min, r.y_min}, hi[2] = {r.x_max, r.y_max};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d[k]) < 1e-12) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double ta = (lo[k] - o[k]) / d[k], tb = (hi[k] - o[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

}  // namespace detail

/// Eight raycasts from the ego centre at the sector-centre bearings. An agent
/// is hit when its centre lies within its bounding radius of the ray; the
/// reported distance is the centre's projection onto the ray. The occluder
/// blocks rays. Distances are normalized by the sensing range, 1.0 on no hit.
inline std::array<double, kSectors> raycast(const WorldSnapshot& snap) {
  std::array<double, kSectors> out{};
  const auto& e = snap.ego;
  for (std::size_t s = 0; s < kSectors; ++s) {
    const double ang = e.heading + static_cast<double>(s) * std::numbers::pi / 4.0;
    const double dx = std::cos(ang), dy = std::sin(ang);
    double best = kSensingRange;
    for (const auto& a : snap.agents) {
      const double rx = a.x - e.x, ry = a.y - e.y;
      const double along = rx * dx + ry * dy;
      if (along <= 0.0) continue;
      const double across = std::abs(-rx * dy + ry * dx);
      const double radius = 0.5 * std::hypot(a.length(), a.width());
      if (across <= radius) best = std::min(best, along);
    }
    if (snap.road.occluder) best = std::min(best, detail::ray_box(e.x, e.y, dx, dy, *snap.road.occluder));
    out[s] = std::min(best, kSensingRange) / kSensingRange;
  }
  return out;
}

inline AugmentedState augment(const WorldSnapshot& snap, const ScenarioVector& sv,
                              const ObjectVector& ov) {
  AugmentedState st;
  const auto& e = snap.ego;
  const auto& road = snap.road;
  const int lane = std::clamp(static_cast<int>(std::floor(e.y / road.lane_width)), 0,
                              road.lane_count - 1);
  st.raw[0] = e.speed / kMaxSpeed;
  st.raw[1] = e.accel / kMaxAccel;
  st.raw[2] = e.heading / std::numbers::pi;
  st.raw[3] = std::clamp((e.y - road.lane_center(lane)) / (0.5 * road.lane_width), -2.0, 2.0);
  // Lane one-hot with three slots; lanes beyond the third share the last slot.
  st.raw[4 + std::min(lane, 2)] = 1.0;
  st.raw[7] = std::clamp((snap.goal_x - e.x) / snap.goal_x, -1.0, 1.0);
  const auto rays = raycast(snap);
  std::copy(rays.begin(), rays.end(), st.raw.begin() + 8);

  std::copy(sv.v.begin(), sv.v.end(), st.llm.begin());
  std::copy(ov.v.begin(), ov.v.end(), st.llm.begin() + kScenarioDim);
  return st;
}

inline AugmentedState augment(const WorldSnapshot& snap) {
  return augment(snap, encode_scenario(snap), encode_objects(snap));
}

}  // namespace hcrmp
