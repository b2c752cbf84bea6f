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

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "telewaypoint/protocol.hpp"

namespace telewaypoint {

class OutOfRangeItem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kSusItems = 10;
inline constexpr std::size_t kTlxScales = 6;
inline constexpr std::array<std::string_view, kTlxScales> kTlxScaleNames = {
    "mental", "physical", "temporal", "performance", "effort", "frustration"};

// System Usability Scale: ten items on 1..5, odd items positively worded.
// Returns 0..100 in steps of 2.5. Throws OutOfRangeItem.
double sus_score(const std::vector<int>& items);

// Raw (unweighted) TLX: mean of six scales on 0..100 in steps of 5.
double tlx_raw(const std::vector<int>& scales);

// Distribution functions. Upper tails are computed directly rather than as
// 1 - cdf so small p-values keep their precision.
double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);
double t_cdf(double x, double df);
// Two-sided p-value for a t statistic.
double t_two_sided_p(double t, double df);

class UnbalancedDesign : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class InsufficientSubjects : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cell index in a subject's row: control (0 direct, 1 waypoint) x delay
// (0 none, 1 delayed).
constexpr std::size_t cell_index(int control, int delay) {
  return static_cast<std::size_t>(control * 2 + delay);
}

struct Subject {
  std::string id;
  ControlOrder group = ControlOrder::DCFirst;
  std::array<double, 4> cells{};
};

// Two within factors (control, delay), one between factor (order group).
struct RmDataset {
  std::vector<Subject> subjects;

  // Throws UnbalancedDesign on non-finite cells, InsufficientSubjects when a
  // present group has fewer than two subjects.
  void validate() const;
  std::size_t group_count() const;
};

enum class Effect {
  Control,
  Delay,
  Order,
  ControlDelay,
  ControlOrder,
  DelayOrder,
  ControlDelayOrder,
};
std::string_view to_string(Effect e);

struct AnovaRow {
  Effect effect = Effect::Control;
  double ss = 0.0;
  int df_num = 0;
  double ss_error = 0.0;
  int df_den = 0;
  double f = 0.0;
  double p = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  double ss_total = 0.0;
  // Every partitioned sum of squares (effects and error terms), which add up
  // to ss_total.
  std::vector<double> partition;

  const AnovaRow& row(Effect e) const;
  bool has(Effect e) const;
};

// Mixed design ANOVA with sequential (weighted-means) sums of squares. With a
// single group the order rows are omitted.
AnovaTable mixed_anova(const RmDataset& data);

struct FTest {
  double f = 0.0;
  int df_num = 0;
  int df_den = 0;
  double p = 1.0;
};

enum class Factor { Control, Delay };

// Effect of the other factor with `fixed` held at `level`, error term from
// that slice (subjects within groups).
FTest simple_effect(const RmDataset& data, Factor fixed, int level);

struct TTest {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
  // All differences equal: t is 0 or infinite, p is 1 or 0.
  bool degenerate_variance = false;
};

TTest paired_t(const std::vector<double>& x, const std::vector<double>& y);

struct CellStats {
  std::optional<ControlOrder> group;
  int control = 0;
  int delay = 0;
  double mean = 0.0;
  // Sample standard deviation; 0 with n = 1.
  double sd = 0.0;
  std::size_t n = 0;
  bool single_observation = false;
};

std::vector<CellStats> marginal_means(const RmDataset& data, bool split_by_group);

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One row of a results CSV.
struct ResultRow {
  std::string participant;
  ControlOrder order = ControlOrder::DCFirst;
  ControlMethod control = ControlMethod::Direct;
  double delay = 0.0;
  double completion_time = 0.0;
  double distance = 0.0;
  std::optional<double> mean_rt;
  int errors = 0;
};

struct QuestionnaireRow {
  std::string participant;
  std::size_t trial = 0;
  ControlMethod control = ControlMethod::Direct;
  double delay = 0.0;
  std::string instrument;
  double score = 0.0;
  std::vector<int> items;
};

std::vector<ResultRow> parse_results_csv(std::string_view text);
std::vector<QuestionnaireRow> parse_questionnaire_csv(std::string_view text);

// Builds one dataset per measure (completion_time, distance, mean_rt, errors,
// sus, tlx, tlx_<scale>). Participants missing a cell are left out of that
// measure; bonus rows are ignored.
std::map<std::string, RmDataset> build_datasets(const std::vector<ResultRow>& results,
                                                const std::vector<QuestionnaireRow>& questionnaires);

// Analysis report CSV: an ANOVA table, simple effects and marginal means per
// measure. Throws InsufficientData when no measure can be analysed.
std::string analysis_report(const std::map<std::string, RmDataset>& datasets);

}  // namespace telewaypoint
