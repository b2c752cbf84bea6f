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

#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "telewaypoint/channel.hpp"

using namespace telewaypoint;

namespace {

SimTime s(double seconds) { return from_seconds(seconds); }

}  // namespace

TEST(Channel, ZeroDelayDeliversImmediately) {
  DelayChannel<int> ch;
  ch.send(1, s(5.0));
  EXPECT_EQ(ch.poll(s(5.0)), std::vector<int>{1});
}

TEST(Channel, FixedDelay) {
  DelayChannel<int> ch(s(1.0));
  ch.send(7, s(2.0));
  EXPECT_TRUE(ch.poll(s(2.98)).empty());
  const auto env = ch.poll_envelopes(s(3.0));
  ASSERT_EQ(env.size(), 1u);
  EXPECT_EQ(env[0].send_time, s(2.0));
  EXPECT_EQ(env[0].deliver_time, s(3.0));
}

TEST(Channel, CuttingTheDelayDoesNotLetMessagesOvertake) {
  DelayChannel<char> ch(s(1.0));
  ch.send('A', s(0.0));
  ch.set_delay(SimTime::zero(), s(0.5));
  ch.send('B', s(0.5));
  EXPECT_TRUE(ch.poll(s(0.5)).empty());
  EXPECT_TRUE(ch.poll(s(0.98)).empty());
  EXPECT_EQ(ch.poll(s(1.0)), (std::vector<char>{'A', 'B'}));
}

TEST(Channel, PollBeforeDueIsEmptyAndDueInOrder) {
  DelayChannel<int> ch(s(0.5));
  ch.send(1, s(0.0));
  ch.send(2, s(0.1));
  EXPECT_TRUE(ch.poll(s(0.2)).empty());
  EXPECT_EQ(ch.poll(s(0.6)), (std::vector<int>{1, 2}));
}

TEST(Channel, RaisingDelayHasNoRetroEffect) {
  DelayChannel<int> ch;
  ch.send(1, s(0.0));
  ch.set_delay(s(1.0), s(0.0));
  ch.send(2, s(0.0));
  EXPECT_EQ(ch.poll(s(0.0)), std::vector<int>{1});
  EXPECT_EQ(ch.poll(s(1.0)), std::vector<int>{2});
}

TEST(Channel, SetDelayIdempotent) {
  DelayChannel<int> a(s(1.0)), b(s(1.0));
  b.set_delay(s(1.0), s(0.0));
  b.set_delay(s(1.0), s(0.0));
  for (int k = 0; k < 100; ++k) {
    if (k % 5 == 0) {
      a.send(k, s(0.02 * k));
      b.send(k, s(0.02 * k));
    }
    EXPECT_EQ(a.poll(s(0.02 * k)), b.poll(s(0.02 * k)));
  }
}

TEST(Channel, ClockRegression) {
  DelayChannel<int> ch;
  ch.send(1, s(2.0));
  EXPECT_THROW(ch.send(2, s(1.0)), ClockRegression);
  EXPECT_THROW(ch.poll(s(1.5)), ClockRegression);
}

TEST(Channel, NegativeDelayRejected) {
  EXPECT_THROW(DelayChannel<int>(s(-1.0)), std::invalid_argument);
  DelayChannel<int> ch;
  EXPECT_THROW(ch.set_delay(s(-0.5), s(0.0)), std::invalid_argument);
  EXPECT_THROW((ChannelConfig{-1.0, 0.0}.validate()), std::invalid_argument);
}

TEST(Channel, ConstantDelayExactOnTickGrid) {
  const SimTime dt = s(0.02);
  DelayChannel<int> ch(s(1.0));
  std::mt19937_64 rng(1);
  std::bernoulli_distribution send(0.5);
  int next = 0;
  std::map<int, SimTime> sent;
  for (int tick = 0; tick < 4000; ++tick) {
    const SimTime now = tick * dt;
    for (const auto& e : ch.poll_envelopes(now)) {
      ASSERT_EQ(e.deliver_time - e.send_time, s(1.0));
      ASSERT_EQ(now, e.deliver_time);
      ASSERT_EQ(sent.at(e.payload), e.send_time);
    }
    if (next < 1000 && send(rng)) {
      sent[next] = now;
      ch.send(next++, now);
    }
  }
  EXPECT_EQ(next, 1000);
  EXPECT_EQ(ch.in_flight(), 0u);
}

TEST(Channel, RandomDelaySchedulesNeverReorder) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> delay_ticks(0, 75);
  std::uniform_int_distribution<int> op(0, 9);
  for (int c = 0; c < 12000; ++c) {
    DelayChannel<int> ch(from_seconds(0.02 * delay_ticks(rng)));
    int next = 0;
    int expected = 0;
    SimTime now{0};
    for (int i = 0; i < 60; ++i) {
      now += from_seconds(0.02);
      switch (op(rng)) {
        case 0:
        case 1:
          ch.set_delay(from_seconds(0.02 * delay_ticks(rng)), now);
          break;
        default:
          ch.send(next++, now);
      }
      for (const auto& e : ch.poll_envelopes(now)) {
        ASSERT_EQ(e.payload, expected++);
        ASSERT_GE(e.deliver_time, e.send_time);
      }
    }
    for (int v : ch.poll(now + from_seconds(10.0))) ASSERT_EQ(v, expected++);
    ASSERT_EQ(expected, next);
  }
}

TEST(Channel, JitterKeepsOrder) {
  DelayChannel<int> ch(s(0.2), s(0.5), 99);
  for (int i = 0; i < 500; ++i) ch.send(i, s(0.01 * i));
  int expected = 0;
  for (int v : ch.poll(s(100.0))) EXPECT_EQ(v, expected++);
  EXPECT_EQ(expected, 500);
}
