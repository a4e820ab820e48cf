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

// Training / evaluation orchestration, episode metrics and run outputs.

#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcrmp/anchor.hpp"
#include "hcrmp/cache.hpp"
#include "hcrmp/driveworld.hpp"
#include "hcrmp/hinter.hpp"
#include "hcrmp/policy.hpp"
#include "hcrmp/semantics.hpp"

#ifndef HCRMP_DEFAULT_CORPUS
#define HCRMP_DEFAULT_CORPUS "data/corpus.txt"
#endif

namespace hcrmp {

// ---------------------------------------------------------------------------
// Configuration

enum class RunMode { train, eval };

struct HintMode {
  enum class Kind { mock, faulty, remote, none_uniform } kind = Kind::mock;
  Fault fault = Fault::timeout;

  static HintMode parse(std::string_view s) {
    if (s == "mock") return {Kind::mock};
    if (s == "remote") return {Kind::remote};
    if (s == "none-uniform") return {Kind::none_uniform};
    if (s.starts_with("faulty:")) return {Kind::faulty, parse_fault(s.substr(7))};
    throw ConfigError("unknown hint mode '" + std::string(s) + "'");
  }

  std::string str() const {
    switch (kind) {
      case Kind::mock: return "mock";
      case Kind::remote: return "remote";
      case Kind::none_uniform: return "none-uniform";
      case Kind::faulty: return "faulty:" + std::string(to_string(fault));
    }
    return "?";
  }
};

/// Builds the provider for a hint mode; none-uniform has no provider.
inline std::unique_ptr<HintProvider> make_provider(const HintMode& m) {
  switch (m.kind) {
    case HintMode::Kind::mock: return std::make_unique<MockHinter>();
    case HintMode::Kind::faulty: return std::make_unique<FaultyHinter>(m.fault);
    case HintMode::Kind::remote: return std::make_unique<RemoteHinter>(RemoteHinter::from_environment());
    case HintMode::Kind::none_uniform: return nullptr;
  }
  return nullptr;
}

struct RunConfig {
  RunMode mode = RunMode::train;
  Scenario scenario = Scenario::overtaking;
  Density density = Density::low;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 200000;
  int episodes = 100;
  HintMode hint_mode;
  std::string output_dir = "runs/default";
  std::optional<std::string> checkpoint;
  std::string corpus = HCRMP_DEFAULT_CORPUS;
  bool sync_test_mode = false;
  int hint_window = 20;
  PpoConfig ppo;

  void validate() const {
    if (total_steps <= 0) throw ConfigError("total_steps must be positive");
    if (episodes <= 0) throw ConfigError("episodes must be positive");
    if (mode == RunMode::eval && !checkpoint) throw ConfigError("eval mode requires a checkpoint");
    if (ppo.rollout <= 0 || ppo.minibatch <= 0 || ppo.epochs <= 0)
      throw ConfigError("rollout, minibatch and epochs must be positive");
  }
};

/// Applies one key/value setting. Keys match the long CLI flags.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto as_int = [&](const std::string& v) -> std::int64_t {
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("setting '" + key + "' expects an integer, got '" + v + "'");
    }
  };
  auto as_bool = [&](const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("setting '" + key + "' expects a boolean, got '" + v + "'");
  };
  if (key == "mode") {
    if (value == "train") cfg.mode = RunMode::train;
    else if (value == "eval") cfg.mode = RunMode::eval;
    else throw ConfigError("unknown mode '" + value + "'");
  } else if (key == "scenario") {
    cfg.scenario = parse_scenario(value);
  } else if (key == "density") {
    cfg.density = parse_density(value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_int(value));
  } else if (key == "steps") {
    cfg.total_steps = as_int(value);
  } else if (key == "episodes") {
    cfg.episodes = static_cast<int>(as_int(value));
  } else if (key == "hint-mode" || key == "hint_mode") {
    cfg.hint_mode = HintMode::parse(value);
  } else if (key == "out") {
    cfg.output_dir = value;
  } else if (key == "checkpoint") {
    cfg.checkpoint = value;
  } else if (key == "corpus") {
    cfg.corpus = value;
  } else if (key == "sync-test-mode" || key == "sync_test_mode") {
    cfg.sync_test_mode = as_bool(value);
  } else if (key == "hint-window" || key == "hint_window") {
    cfg.hint_window = static_cast<int>(as_int(value));
  } else if (key == "rollout") {
    cfg.ppo.rollout = static_cast<int>(as_int(value));
  } else if (key == "minibatch") {
    cfg.ppo.minibatch = static_cast<int>(as_int(value));
  } else if (key == "epochs") {
    cfg.ppo.epochs = static_cast<int>(as_int(value));
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

/// Flat "key = value" file; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Metrics

struct EpisodeMetrics {
  bool success = false;
  bool collision = false;
  double avg_speed = 0.0;       // AS, m/s
  double total_distance = 0.0;  // TD, m
  double time_steps = 0.0;      // TS, s
  double speed_variance = 0.0;  // SV
  double accel_variance = 0.0;  // AV
};

namespace detail {

inline double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double population_variance(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

}  // namespace detail

inline EpisodeMetrics compute_metrics(std::span<const double> speeds, std::span<const double> accels,
                                      Terminal outcome) {
  if (speeds.empty() || speeds.size() != accels.size())
    throw ContractViolation("compute_metrics: trace must be non-empty with matching lengths");
  EpisodeMetrics m;
  m.success = outcome == Terminal::goal_reached;
  m.collision = outcome == Terminal::collision;
  m.avg_speed = detail::mean_of(speeds);
  m.total_distance = std::accumulate(speeds.begin(), speeds.end(), 0.0) * kTickSeconds;
  m.time_steps = static_cast<double>(speeds.size()) * kTickSeconds;
  m.speed_variance = detail::population_variance(speeds);
  m.accel_variance = detail::population_variance(accels);
  return m;
}

// ---------------------------------------------------------------------------
// Output helpers

inline void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = std::filesystem::path(dir) / ".write_probe";
  std::ofstream f(probe);
  if (ec || !f) throw ConfigError("output directory '" + dir + "' is not writable");
  f.close();
  std::filesystem::remove(probe, ec);
}

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct EpisodeRecord {
  std::int64_t index = 0;
  std::int64_t end_step = 0;
  Terminal outcome = Terminal::none;
  double discounted_return = 0.0;  // sum_t gamma^t r_t of the lambda-scalarized reward
  double trailing_sr = 0.0;        // over the last <= 100 episodes
};

/// Rollout storage.
struct Rollout {
  std::vector<StateVec> states;
  std::vector<std::array<double, kActionDim>> actions;
  std::vector<double> log_probs;
  std::array<std::vector<double>, kAttributes> rewards;
  std::array<std::vector<double>, kAttributes> values;
  std::vector<std::uint8_t> dones;
  std::vector<WeightVector> weights;
  std::array<double, kAttributes> bootstrap{};

  std::size_t size() const { return states.size(); }
};

struct TrainSummary {
  std::int64_t steps = 0;
  int updates = 0;
  std::int64_t episodes = 0;
  double final_trailing_sr = 0.0;
  double trailing_mean_return = 0.0;
  double baseline_mean_return = 0.0;  // episodes finished within the first rollout
  std::int64_t baseline_episodes = 0;
  SchedulerStats hints;
};

/// Couples one environment, one hint scheduler and one learner.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, std::unique_ptr<HintProvider> provider, std::vector<KnowledgeDoc> corpus)
      : cfg_(cfg),
        rng_(derive_seed(cfg.seed, 1)),
        learner_(Networks::make(rng_), cfg.ppo),
        scheduler_(SchedulerConfig{.window_ticks = cfg.hint_window,
                                   .synchronous = cfg.sync_test_mode,
                                   .deadline = std::chrono::milliseconds(1000),
                                   .scenario = cfg.scenario},
                   std::move(provider), std::move(corpus)) {
    start_episode();
  }

  Rollout collect(int steps) {
    Rollout ro;
    for (int n = 0; n < steps; ++n) {
      const WorldSnapshot& snap = world_.snapshot();
      const ScenarioVector sv = encode_scenario(snap);
      const ObjectVector ov = encode_objects(snap);
      const StateVec state = augment(snap, sv, ov).flat();
      const WeightSource ws = scheduler_.current_weights(global_step_, query_inputs(snap, sv, ov));

      const BetaParams bp = actor_forward(learner_.nets, state, tape_);
      const SampledAction sa = sample_action(bp, rng_);
      const auto v = critic_values(learner_.nets, state);
      const StepOutcome out = world_.step(sa.action);
      const auto r = out.rewards.as_array();

      ro.states.push_back(state);
      ro.actions.push_back({sa.action.throttle_brake, sa.action.steer});
      ro.log_probs.push_back(sa.log_prob);
      double scalar = 0.0;
      for (std::size_t i = 0; i < kAttributes; ++i) {
        ro.rewards[i].push_back(r[i]);
        ro.values[i].push_back(v[i]);
        scalar += ws.weights.lambda[i] * r[i];
      }
      ro.dones.push_back(out.terminal != Terminal::none ? 1 : 0);
      ro.weights.push_back(ws.weights);
      episode_rewards_.push_back(scalar);
      ++global_step_;

      if (out.terminal != Terminal::none) finish_episode(out.terminal);
    }
    if (!ro.dones.empty() && !ro.dones.back()) {
      const WorldSnapshot& snap = world_.snapshot();
      ro.bootstrap = critic_values(learner_.nets, augment(snap).flat());
    }
    return ro;
  }

  /// GAE per critic, weight integration, standardization, clipped update.
  UpdateStats update(const Rollout& ro) {
    const auto& p = learner_.cfg;
    std::array<std::vector<double>, kAttributes> adv;
    std::array<std::vector<double>, kAttributes> targets;
    for (std::size_t i = 0; i < kAttributes; ++i) {
      auto g = compute_gae(ro.rewards[i], ro.values[i], ro.dones, ro.bootstrap[i], p.gamma, p.gae_lambda);
      adv[i] = std::move(g.advantages);
      targets[i] = std::move(g.targets);
    }
    std::vector<double> a_int = integrate_advantages(adv, ro.weights);
    standardize(a_int);
    std::vector<PpoSample> batch(ro.size());
    for (std::size_t t = 0; t < ro.size(); ++t) {
      batch[t].state = ro.states[t];
      batch[t].action = ro.actions[t];
      batch[t].old_log_prob = ro.log_probs[t];
      batch[t].advantage = a_int[t];
      for (std::size_t i = 0; i < kAttributes; ++i) batch[t].target[i] = targets[i][t];
    }
    ++updates_;
    return ppo_update(std::span<const PpoSample>(batch), learner_, rng_);
  }

  const std::vector<EpisodeRecord>& episodes() const { return episodes_; }
  const HintScheduler& scheduler() const { return scheduler_; }
  HintScheduler& scheduler() { return scheduler_; }
  const Learner& learner() const { return learner_; }
  std::int64_t global_step() const { return global_step_; }
  int updates() const { return updates_; }

 private:
  void start_episode() {
    world_.reset(cfg_.scenario, cfg_.density, derive_seed(cfg_.seed, 1000 + episode_index_));
    scheduler_.new_episode();
    episode_rewards_.clear();
  }

  void finish_episode(Terminal outcome) {
    EpisodeRecord rec;
    rec.index = episode_index_;
    rec.end_step = global_step_;
    rec.outcome = outcome;
    rec.discounted_return = hcrmp::discounted_return(episode_rewards_, learner_.cfg.gamma);
    recent_success_.push_back(outcome == Terminal::goal_reached);
    if (recent_success_.size() > 100) recent_success_.pop_front();
    rec.trailing_sr = static_cast<double>(std::count(recent_success_.begin(), recent_success_.end(), true)) /
                      static_cast<double>(recent_success_.size());
    episodes_.push_back(rec);
    ++episode_index_;
    start_episode();
  }

  RunConfig cfg_;
  std::mt19937_64 rng_;
  Learner learner_;
  HintScheduler scheduler_;
  World world_;
  Mlp::Tape tape_;
  std::vector<double> episode_rewards_;
  std::deque<bool> recent_success_;
  std::vector<EpisodeRecord> episodes_;
  std::int64_t episode_index_ = 0;
  std::int64_t global_step_ = 0;
  int updates_ = 0;
};

inline std::vector<KnowledgeDoc> load_corpus_for(const RunConfig& cfg) { return load_corpus(cfg.corpus); }

inline TrainSummary run_train(const RunConfig& cfg) {
  cfg.validate();
  ensure_output_dir(cfg.output_dir);
  Trainer trainer(cfg, make_provider(cfg.hint_mode), load_corpus_for(cfg));

  auto updates_csv = open_output(cfg.output_dir, "updates.csv");
  updates_csv << "update,end_step,mean_ratio,clip_fraction,value_loss_safety,value_loss_efficiency,"
                 "value_loss_comfort,entropy\n";
  std::int64_t baseline_episodes = -1;
  while (trainer.global_step() < cfg.total_steps) {
    const int n = static_cast<int>(std::min<std::int64_t>(cfg.ppo.rollout, cfg.total_steps - trainer.global_step()));
    const Rollout ro = trainer.collect(n);
    if (baseline_episodes < 0) baseline_episodes = static_cast<std::int64_t>(trainer.episodes().size());
    const UpdateStats st = trainer.update(ro);
    updates_csv << trainer.updates() << ',' << trainer.global_step() << ',' << fmt_num(st.mean_ratio) << ','
                << fmt_num(st.clip_fraction) << ',' << fmt_num(st.value_loss[0]) << ','
                << fmt_num(st.value_loss[1]) << ',' << fmt_num(st.value_loss[2]) << ','
                << fmt_num(st.entropy) << '\n';
  }
  trainer.scheduler().stop();

  const auto& eps = trainer.episodes();
  {
    auto lc = open_output(cfg.output_dir, "learning_curve.csv");
    lc << "episode,end_step,outcome,return,trailing_sr\n";
    for (const auto& e : eps)
      lc << e.index << ',' << e.end_step << ',' << to_string(e.outcome) << ',' << fmt_num(e.discounted_return)
         << ',' << fmt_num(e.trailing_sr) << '\n';
  }
  {
    auto ws = open_output(cfg.output_dir, "weight_stream.csv");
    ws << "tick,source,lambda_safety,lambda_efficiency,lambda_comfort\n";
    for (const auto& row : trainer.scheduler().weight_log()) {
      const auto& l = row.source.weights.lambda;
      ws << row.tick << ',' << to_string(row.source.source) << ',' << fmt_num(l[0]) << ',' << fmt_num(l[1])
         << ',' << fmt_num(l[2]) << '\n';
    }
  }
  save_checkpoint((std::filesystem::path(cfg.output_dir) / "checkpoint.bin").string(), trainer.learner().nets);

  TrainSummary s;
  s.steps = trainer.global_step();
  s.updates = trainer.updates();
  s.episodes = static_cast<std::int64_t>(eps.size());
  s.hints = trainer.scheduler().stats();
  if (!eps.empty()) {
    s.final_trailing_sr = eps.back().trailing_sr;
    const std::size_t from = eps.size() > 100 ? eps.size() - 100 : 0;
    double sum = 0.0;
    for (std::size_t i = from; i < eps.size(); ++i) sum += eps[i].discounted_return;
    s.trailing_mean_return = sum / static_cast<double>(eps.size() - from);
  }
  s.baseline_episodes = std::max<std::int64_t>(0, baseline_episodes);
  if (s.baseline_episodes > 0) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < s.baseline_episodes; ++i) sum += eps[static_cast<std::size_t>(i)].discounted_return;
    s.baseline_mean_return = sum / static_cast<double>(s.baseline_episodes);
  }

  nlohmann::ordered_json j;
  j["steps"] = s.steps;
  j["updates"] = s.updates;
  j["episodes"] = s.episodes;
  j["final_trailing_sr"] = s.final_trailing_sr;
  j["trailing_mean_return"] = s.trailing_mean_return;
  j["baseline_mean_return"] = s.baseline_mean_return;
  j["baseline_episodes"] = s.baseline_episodes;
  j["hint_mode"] = cfg.hint_mode.str();
  j["hints"] = {{"fresh", s.hints.fresh},
                {"cached", s.hints.cached},
                {"default", s.hints.fallback},
                {"repairs", s.hints.repairs}};
  open_output(cfg.output_dir, "train_summary.json") << j.dump(2) << '\n';
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalEpisode {
  Terminal outcome = Terminal::none;
  EpisodeMetrics metrics;
  std::vector<double> speeds;
  std::vector<double> accels;
};

struct EvalSummary {
  int episodes = 0;
  double success_rate = 0.0;  // percentages
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  double off_road_rate = 0.0;
  double avg_speed = 0.0;
  double total_distance = 0.0;
  double time_steps = 0.0;
  double speed_variance = 0.0;
  double accel_variance = 0.0;
  std::vector<EvalEpisode> per_episode;
};

/// Rolls out one episode with the Beta mean as the action.
inline EvalEpisode run_eval_episode(const Networks& nets, Scenario sc, Density d, std::uint64_t seed) {
  World world;
  world.reset(sc, d, seed);
  EvalEpisode ep;
  Mlp::Tape tape;
  for (;;) {
    const StateVec state = augment(world.snapshot()).flat();
    const StepOutcome out = world.step(mean_action(actor_forward(nets, state, tape)));
    ep.speeds.push_back(out.snapshot.ego.speed);
    ep.accels.push_back(out.snapshot.ego.accel);
    if (out.terminal != Terminal::none) {
      ep.outcome = out.terminal;
      break;
    }
  }
  ep.metrics = compute_metrics(ep.speeds, ep.accels, ep.outcome);
  return ep;
}

inline EvalSummary aggregate(std::vector<EvalEpisode> eps) {
  EvalSummary s;
  s.episodes = static_cast<int>(eps.size());
  if (eps.empty()) return s;
  const double n = static_cast<double>(eps.size());
  for (const auto& e : eps) {
    s.success_rate += e.outcome == Terminal::goal_reached ? 100.0 / n : 0.0;
    s.collision_rate += e.outcome == Terminal::collision ? 100.0 / n : 0.0;
    s.timeout_rate += e.outcome == Terminal::timeout ? 100.0 / n : 0.0;
    s.off_road_rate += e.outcome == Terminal::off_road ? 100.0 / n : 0.0;
    s.avg_speed += e.metrics.avg_speed / n;
    s.total_distance += e.metrics.total_distance / n;
    s.time_steps += e.metrics.time_steps / n;
    s.speed_variance += e.metrics.speed_variance / n;
    s.accel_variance += e.metrics.accel_variance / n;
  }
  s.per_episode = std::move(eps);
  return s;
}

inline std::uint64_t eval_episode_seed(std::uint64_t run_seed, int episode) {
  return derive_seed(run_seed, 1'000'000'000ULL + static_cast<std::uint64_t>(episode));
}

inline EvalSummary evaluate_policy(const Networks& nets, Scenario sc, Density d, std::uint64_t seed, int episodes) {
  std::vector<EvalEpisode> eps;
  eps.reserve(static_cast<std::size_t>(episodes));
  for (int i = 0; i < episodes; ++i) eps.push_back(run_eval_episode(nets, sc, d, eval_episode_seed(seed, i)));
  return aggregate(std::move(eps));
}

inline nlohmann::ordered_json eval_summary_json(const RunConfig& cfg, const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["scenario"] = std::string(to_string(cfg.scenario));
  j["density"] = std::string(to_string(cfg.density));
  j["seed"] = cfg.seed;
  j["episodes"] = s.episodes;
  j["SR"] = s.success_rate;
  j["CR"] = s.collision_rate;
  j["timeout_rate"] = s.timeout_rate;
  j["off_road_rate"] = s.off_road_rate;
  j["AS"] = s.avg_speed;
  j["TD"] = s.total_distance;
  j["TS"] = s.time_steps;
  j["SV"] = s.speed_variance;
  j["AV"] = s.accel_variance;
  return j;
}

inline EvalSummary run_eval(const RunConfig& cfg) {
  cfg.validate();
  ensure_output_dir(cfg.output_dir);
  const Networks nets = load_checkpoint(*cfg.checkpoint);
  EvalSummary s = evaluate_policy(nets, cfg.scenario, cfg.density, cfg.seed, cfg.episodes);

  auto ep_csv = open_output(cfg.output_dir, "eval_episodes.csv");
  ep_csv << "episode,outcome,success,collision,AS,TD,TS,SV,AV\n";
  auto tr_csv = open_output(cfg.output_dir, "eval_traces.csv");
  tr_csv << "episode,tick,speed,accel\n";
  for (std::size_t i = 0; i < s.per_episode.size(); ++i) {
    const auto& e = s.per_episode[i];
    const auto& m = e.metrics;
    ep_csv << i << ',' << to_string(e.outcome) << ',' << (m.success ? 1 : 0) << ',' << (m.collision ? 1 : 0)
           << ',' << fmt_num(m.avg_speed, 17) << ',' << fmt_num(m.total_distance, 17) << ','
           << fmt_num(m.time_steps, 17) << ',' << fmt_num(m.speed_variance, 17) << ','
           << fmt_num(m.accel_variance, 17) << '\n';
    for (std::size_t t = 0; t < e.speeds.size(); ++t)
      tr_csv << i << ',' << t + 1 << ',' << fmt_num(e.speeds[t], 17) << ',' << fmt_num(e.accels[t], 17) << '\n';
  }
  open_output(cfg.output_dir, "eval_summary.json") << eval_summary_json(cfg, s).dump(2) << '\n';
  return s;
}

}  // namespace hcrmp
