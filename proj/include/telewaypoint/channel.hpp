// Copyright 2026 The Telewaypoint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace telewaypoint {

// Simulation clock. Integer nanoseconds keep tick arithmetic exact.
using SimTime = std::chrono::nanoseconds;

inline SimTime from_seconds(double seconds) {
  return SimTime(std::llround(seconds * 1e9));
}
inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1e9; }

class ClockRegression : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Uniform double in [0, 1) from a 64-bit engine, identical on every platform
// (std::uniform_real_distribution is implementation-defined).
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ChannelConfig {
  double uplink_delay = 0.0;
  double downlink_delay = 0.0;
  // Optional extra per-message delay drawn from [0, jitter); 0 keeps the
  // delay fixed.
  double jitter = 0.0;
  std::uint64_t jitter_seed = 0;

  void validate() const {
    if (uplink_delay < 0.0 || downlink_delay < 0.0 || jitter < 0.0) {
      throw std::invalid_argument("channel delays must be >= 0");
    }
  }
};

template <class T>
struct Envelope {
  T payload;
  SimTime send_time;
  SimTime deliver_time;
};

// One-way link that delivers messages after a delay and never reorders them.
// A message's delivery time is max(now + delay, previous delivery time), so a
// delay cut mid-session cannot let a later message overtake an earlier one.
template <class T>
class DelayChannel {
 public:
  explicit DelayChannel(SimTime delay = SimTime::zero(), SimTime jitter = SimTime::zero(),
                        std::uint64_t jitter_seed = 0)
      : delay_(delay), jitter_(jitter), rng_(jitter_seed) {
    if (delay < SimTime::zero() || jitter < SimTime::zero()) {
      throw std::invalid_argument("channel delay must be >= 0");
    }
  }

  void send(T payload, SimTime now) {
    observe(now);
    SimTime deliver = now + delay_;
    if (jitter_ > SimTime::zero()) {
      deliver += SimTime(static_cast<std::int64_t>(
          unit_uniform(rng_) * static_cast<double>(jitter_.count())));
    }
    if (last_deliver_ && deliver < *last_deliver_) deliver = *last_deliver_;
    last_deliver_ = deliver;
    queue_.push_back({std::move(payload), now, deliver});
  }

  // Everything due at `now`, oldest first.
  std::vector<T> poll(SimTime now) {
    observe(now);
    std::vector<T> out;
    while (!queue_.empty() && queue_.front().deliver_time <= now) {
      out.push_back(std::move(queue_.front().payload));
      queue_.pop_front();
    }
    return out;
  }

  // Same as poll() but keeps the envelope timestamps.
  std::vector<Envelope<T>> poll_envelopes(SimTime now) {
    observe(now);
    std::vector<Envelope<T>> out;
    while (!queue_.empty() && queue_.front().deliver_time <= now) {
      out.push_back(std::move(queue_.front()));
      queue_.pop_front();
    }
    return out;
  }

  // Applies to later sends only.
  void set_delay(SimTime delay, SimTime now) {
    if (delay < SimTime::zero()) throw std::invalid_argument("channel delay must be >= 0");
    observe(now);
    delay_ = delay;
  }

  SimTime delay() const { return delay_; }
  std::size_t in_flight() const { return queue_.size(); }
  const std::deque<Envelope<T>>& pending() const { return queue_; }

 private:
  void observe(SimTime now) {
    if (last_now_ && now < *last_now_) {
      throw ClockRegression("channel clock moved backwards");
    }
    last_now_ = now;
  }

  SimTime delay_;
  SimTime jitter_;
  std::mt19937_64 rng_;
  std::deque<Envelope<T>> queue_;
  std::optional<SimTime> last_now_;
  std::optional<SimTime> last_deliver_;
};

}  // namespace telewaypoint
