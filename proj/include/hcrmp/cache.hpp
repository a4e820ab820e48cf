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

// Semantic cache: a FIFO memory bank of (context embedding, weights) pairs
// with exact nearest-neighbour fallback, and the scheduler that decouples
// low-frequency hinting from the per-tick control loop.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hcrmp/anchor.hpp"
#include "hcrmp/hinter.hpp"

namespace hcrmp {

struct MemoryEntry {
  Embedding key{};
  WeightVector weights;
  std::int64_t tick = 0;
  Scenario scenario = Scenario::overtaking;
};

/// Bounded append-only bank; the oldest entry is evicted when full.
class MemoryBank {
 public:
  static constexpr std::size_t kDefaultCapacity = 4096;

  explicit MemoryBank(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

  void insert(MemoryEntry entry) {
    if (!on_simplex(entry.weights))
      throw ContractViolation("MemoryBank::insert: weights are not on the simplex");
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(entry));
  }

  /// Exact argmax cosine. Ties go to the larger tick, then to the later insert.
  std::optional<MemoryEntry> lookup_nearest(const Embedding& query) const {
    if (entries_.empty()) return std::nullopt;
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double sim = cosine(query, entries_[i].key);
      if (sim > best_sim || (sim == best_sim && entries_[i].tick >= entries_[best].tick)) {
        best = i;
        best_sim = sim;
      }
    }
    return entries_[best];
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<MemoryEntry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<MemoryEntry> entries_;
};

enum class WeightOrigin { fresh, cached, fallback };

inline std::string_view to_string(WeightOrigin s) {
  switch (s) {
    case WeightOrigin::fresh: return "fresh";
    case WeightOrigin::cached: return "cached";
    case WeightOrigin::fallback: return "default";
  }
  return "?";
}

struct WeightSource {
  WeightVector weights = WeightVector::uniform();
  WeightOrigin source = WeightOrigin::fallback;
};

struct WeightLogRow {
  std::int64_t tick = 0;
  WeightSource source;
};

struct SchedulerConfig {
  int window_ticks = 20;  // control ticks per hint window (1 Hz at 20 Hz control)
  /// Provider called inline at each window start; deadlines measured in
  /// ticks. Otherwise a worker thread serves requests against wall time.
  bool synchronous = true;
  std::chrono::milliseconds deadline{1000};
  Scenario scenario = Scenario::overtaking;
  std::size_t bank_capacity = MemoryBank::kDefaultCapacity;
};

struct SchedulerStats {
  std::int64_t fresh = 0;
  std::int64_t cached = 0;
  std::int64_t fallback = 0;
  std::int64_t repairs = 0;
  std::int64_t dropped_requests = 0;  // async: request replaced before the worker took it
};

/// Supplies the attribute weights in effect at every control tick.
///
/// A window opens every `window_ticks` ticks (and at every episode start).
/// The weights chosen at a window's first tick are held for the whole window.
/// Synchronous mode resolves the window inline: a validated in-deadline
/// response is fresh and goes into the bank; otherwise the nearest bank
/// entry is used; otherwise uniform. Asynchronous mode runs the same
/// resolution on a worker thread; the control side only latches the most
/// recent published result and never waits.
class HintScheduler {
 public:
  HintScheduler(SchedulerConfig cfg, std::unique_ptr<HintProvider> provider,
                std::vector<KnowledgeDoc> corpus)
      : cfg_(cfg), provider_(std::move(provider)), corpus_(std::move(corpus)),
        bank_(cfg.bank_capacity) {
    if (cfg_.window_ticks <= 0) throw ConfigError("hint window must be positive");
    if (cfg_.deadline.count() <= 0) throw ConfigError("hint deadline must be positive");
    if (!cfg_.synchronous && provider_) worker_ = std::thread([this] { worker_loop(); });
  }

  HintScheduler(const HintScheduler&) = delete;
  HintScheduler& operator=(const HintScheduler&) = delete;

  ~HintScheduler() { stop(); }

  /// Next call to current_weights opens a new window.
  void new_episode() { window_open_ = false; }

  WeightSource current_weights(std::int64_t tick, const QueryInputs& query) {
    if (window_open_ && tick - window_start_ < cfg_.window_ticks) return held_;
    window_open_ = true;
    window_start_ = tick;
    if (!provider_) {
      held_ = WeightSource{};
    } else if (cfg_.synchronous) {
      held_ = resolve(Job{tick, query}, /*wall_clock=*/false);
    } else {
      held_ = exchange_async(Job{tick, query});
    }
    count(held_);
    log_.push_back({tick, held_});
    return held_;
  }

  const std::vector<WeightLogRow>& weight_log() const { return log_; }
  SchedulerStats stats() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

  /// Stops the worker (if any). The bank may be inspected afterwards.
  void stop() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  /// Only valid in synchronous mode or after stop().
  const MemoryBank& bank() const { return bank_; }

  const SchedulerConfig& config() const { return cfg_; }
  std::string provider_name() const { return provider_ ? provider_->name() : "none-uniform"; }

 private:
  struct Job {
    std::int64_t tick;
    QueryInputs query;
  };

  WeightSource resolve(const Job& job, bool wall_clock) {
    HintContext ctx = make_context(job.query, corpus_);
    const Embedding key = embed(ctx.query_text);
    HintRequest req{std::move(ctx), cfg_.deadline, wall_clock};
    const auto resp = provider_->request(req);
    if (resp && in_deadline(*resp)) {
      const auto v = validate_weights(resp->raw_weights);
      if (v.repair != WeightRepair::none && v.repair != WeightRepair::renormalized) {
        std::lock_guard lock(mu_);
        ++stats_.repairs;
        log(LogLevel::debug, "hint weights repaired: " + std::string(to_string(v.repair)));
      }
      bank_.insert({key, v.weights, job.tick, cfg_.scenario});
      return {v.weights, WeightOrigin::fresh};
    }
    if (auto hit = bank_.lookup_nearest(key)) return {hit->weights, WeightOrigin::cached};
    return {};
  }

  bool in_deadline(const HintResponse& r) const {
    if (r.latency_ms < 0.0) return false;
    if (cfg_.synchronous) {
      const double ticks = r.latency_ms / (1000.0 * kTickSeconds);
      return ticks <= cfg_.window_ticks;
    }
    return r.latency_ms <= static_cast<double>(cfg_.deadline.count());
  }

  WeightSource exchange_async(Job job) {
    WeightSource latched;
    {
      std::lock_guard lock(mu_);
      if (published_) latched = *published_;
      if (pending_) ++stats_.dropped_requests;
      pending_ = std::move(job);
    }
    cv_.notify_one();
    return latched;
  }

  void worker_loop() {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || pending_.has_value(); });
        if (stopping_) return;
        job = std::move(*pending_);
        pending_.reset();
      }
      const WeightSource ws = resolve(job, /*wall_clock=*/true);
      std::lock_guard lock(mu_);
      published_ = ws;
    }
  }

  void count(const WeightSource& ws) {
    std::lock_guard lock(mu_);
    switch (ws.source) {
      case WeightOrigin::fresh: ++stats_.fresh; break;
      case WeightOrigin::cached: ++stats_.cached; break;
      case WeightOrigin::fallback: ++stats_.fallback; break;
    }
  }

  SchedulerConfig cfg_;
  std::unique_ptr<HintProvider> provider_;
  std::vector<KnowledgeDoc> corpus_;
  MemoryBank bank_;  // owned by whoever runs resolve(): caller (sync) or worker (async)

  // Control-side state.
  bool window_open_ = false;
  std::int64_t window_start_ = 0;
  WeightSource held_;
  std::vector<WeightLogRow> log_;

  // Channel between control and worker.
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<Job> pending_;
  std::optional<WeightSource> published_;
  bool stopping_ = false;
  SchedulerStats stats_;
  std::thread worker_;
};

}  // namespace hcrmp
