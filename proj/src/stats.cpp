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

#include "telewaypoint/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

namespace telewaypoint {

double sus_score(const std::vector<int>& items) {
  if (items.size() != kSusItems) {
    throw OutOfRangeItem(fmt::format("SUS needs {} items, got {}", kSusItems, items.size()));
  }
  int sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const int v = items[i];
    if (v < 1 || v > 5) throw OutOfRangeItem(fmt::format("SUS item {} out of 1..5: {}", i + 1, v));
    sum += (i % 2 == 0) ? v - 1 : 5 - v;
  }
  return sum * 2.5;
}

double tlx_raw(const std::vector<int>& scales) {
  if (scales.size() != kTlxScales) {
    throw OutOfRangeItem(fmt::format("TLX needs {} scales, got {}", kTlxScales, scales.size()));
  }
  int sum = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const int v = scales[i];
    if (v < 0 || v > 100 || v % 5 != 0) {
      throw OutOfRangeItem(
          fmt::format("TLX {} scale must be 0..100 in steps of 5: {}", kTlxScaleNames[i], v));
    }
    sum += v;
  }
  return static_cast<double>(sum) / static_cast<double>(kTlxScales);
}

namespace {

void check_df(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) throw std::invalid_argument("degrees of freedom must be > 0");
}

}  // namespace

double f_cdf(double x, double d1, double d2) {
  check_df(d1);
  check_df(d2);
  if (std::isnan(x)) throw std::invalid_argument("f_cdf of NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::ibeta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_sf(double x, double d1, double d2) {
  check_df(d1);
  check_df(d2);
  if (std::isnan(x)) throw std::invalid_argument("f_sf of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

double t_two_sided_p(double t, double df) {
  check_df(df);
  if (std::isnan(t)) throw std::invalid_argument("t of NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

double t_cdf(double x, double df) {
  const double tail = 0.5 * t_two_sided_p(x, df);
  return x < 0.0 ? tail : 1.0 - tail;
}

std::string_view to_string(Effect e) {
  switch (e) {
    case Effect::Control:
      return "control";
    case Effect::Delay:
      return "delay";
    case Effect::Order:
      return "order";
    case Effect::ControlDelay:
      return "control x delay";
    case Effect::ControlOrder:
      return "control x order";
    case Effect::DelayOrder:
      return "delay x order";
    case Effect::ControlDelayOrder:
      return "control x delay x order";
  }
  return "unknown";
}

void RmDataset::validate() const {
  std::map<ControlOrder, std::size_t> counts;
  for (const auto& s : subjects) {
    for (double v : s.cells) {
      if (!std::isfinite(v)) throw UnbalancedDesign("subject " + s.id + " has a missing cell");
    }
    ++counts[s.group];
  }
  if (counts.empty()) throw InsufficientSubjects("dataset is empty");
  for (const auto& [g, n] : counts) {
    if (n < 2) {
      throw InsufficientSubjects(fmt::format("group {} has {} subject(s); need at least 2",
                                             to_string(g), n));
    }
  }
}

std::size_t RmDataset::group_count() const {
  std::set<ControlOrder> groups;
  for (const auto& s : subjects) groups.insert(s.group);
  return groups.size();
}

const AnovaRow& AnovaTable::row(Effect e) const {
  for (const auto& r : rows) {
    if (r.effect == e) return r;
  }
  throw std::out_of_range(fmt::format("no '{}' row in this table", to_string(e)));
}

bool AnovaTable::has(Effect e) const {
  return std::any_of(rows.begin(), rows.end(), [e](const AnovaRow& r) { return r.effect == e; });
}

namespace {

double ratio(double ms_effect, double ms_error) {
  if (ms_effect == 0.0) return 0.0;
  if (ms_error == 0.0) return std::numeric_limits<double>::infinity();
  return ms_effect / ms_error;
}

AnovaRow make_row(Effect e, double ss, int df_num, double ss_error, int df_den) {
  AnovaRow r{e, ss, df_num, ss_error, df_den, 0.0, 1.0};
  r.f = ratio(ss / df_num, ss_error / df_den);
  r.p = f_sf(r.f, df_num, df_den);
  return r;
}

// Group membership as dense indices.
struct Groups {
  std::vector<std::size_t> of;  // per subject
  std::vector<std::size_t> size;
};

Groups index_groups(const RmDataset& data) {
  std::map<ControlOrder, std::size_t> ids;
  Groups g;
  for (const auto& s : data.subjects) {
    auto [it, inserted] = ids.emplace(s.group, ids.size());
    if (inserted) g.size.push_back(0);
    g.of.push_back(it->second);
    ++g.size[it->second];
  }
  return g;
}

// Decomposition of one per-subject score into grand, between-group and
// within-group parts: returns {n * mean^2, sum n_j (mean_j - mean)^2,
// sum (x_i - mean_j)^2}.
struct Split {
  double grand = 0.0;
  double between = 0.0;
  double within = 0.0;
};

Split split_scores(const std::vector<double>& x, const Groups& g) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> gsum(g.size.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) gsum[g.of[i]] += x[i];
  std::vector<double> gmean(g.size.size());
  for (std::size_t j = 0; j < gmean.size(); ++j) gmean[j] = gsum[j] / static_cast<double>(g.size[j]);
  Split s;
  s.grand = static_cast<double>(n) * mean * mean;
  for (std::size_t j = 0; j < gmean.size(); ++j) {
    s.between += static_cast<double>(g.size[j]) * (gmean[j] - mean) * (gmean[j] - mean);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - gmean[g.of[i]];
    s.within += d * d;
  }
  return s;
}

}  // namespace

AnovaTable mixed_anova(const RmDataset& data) {
  data.validate();
  const Groups g = index_groups(data);
  const std::size_t n = data.subjects.size();
  const int groups = static_cast<int>(g.size.size());
  const int df_err = static_cast<int>(n) - groups;
  if (df_err < 1) throw InsufficientSubjects("no error degrees of freedom");

  // Orthogonal +-1 contrasts over the four cells (c0d0, c0d1, c1d0, c1d1).
  // A contrast score L with coefficients c carries SS = L^2 / sum(c^2).
  constexpr std::array<std::array<double, 4>, 3> kContrasts = {{
      {1.0, 1.0, -1.0, -1.0},
      {1.0, -1.0, 1.0, -1.0},
      {1.0, -1.0, -1.0, 1.0},
  }};
  constexpr std::array<Effect, 3> kMain = {Effect::Control, Effect::Delay, Effect::ControlDelay};
  constexpr std::array<Effect, 3> kByOrder = {Effect::ControlOrder, Effect::DelayOrder,
                                              Effect::ControlDelayOrder};

  double grand = 0.0;
  for (const auto& s : data.subjects) grand += std::accumulate(s.cells.begin(), s.cells.end(), 0.0);
  grand /= static_cast<double>(4 * n);

  AnovaTable table;
  for (const auto& s : data.subjects) {
    for (double v : s.cells) table.ss_total += (v - grand) * (v - grand);
  }

  // Between subjects: subject means.
  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = data.subjects[i].cells;
    means[i] = (c[0] + c[1] + c[2] + c[3]) / 4.0;
  }
  const Split between = split_scores(means, g);
  const double ss_group = 4.0 * between.between;
  const double ss_subjects = 4.0 * between.within;
  if (groups > 1) {
    table.rows.push_back(make_row(Effect::Order, ss_group, groups - 1, ss_subjects, df_err));
    table.partition.push_back(ss_group);
  }
  table.partition.push_back(ss_subjects);

  for (std::size_t k = 0; k < kContrasts.size(); ++k) {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = data.subjects[i].cells;
      double l = 0.0;
      for (std::size_t m = 0; m < 4; ++m) l += kContrasts[k][m] * c[m];
      scores[i] = l;
    }
    const Split sp = split_scores(scores, g);
    const double ss_effect = sp.grand / 4.0;
    const double ss_by_group = sp.between / 4.0;
    const double ss_error = sp.within / 4.0;
    table.rows.push_back(make_row(kMain[k], ss_effect, 1, ss_error, df_err));
    table.partition.push_back(ss_effect);
    if (groups > 1) {
      table.rows.push_back(make_row(kByOrder[k], ss_by_group, groups - 1, ss_error, df_err));
      table.partition.push_back(ss_by_group);
    }
    table.partition.push_back(ss_error);
  }

  constexpr std::array<Effect, 7> kOrder = {Effect::Control,      Effect::Delay,
                                            Effect::Order,        Effect::ControlDelay,
                                            Effect::ControlOrder, Effect::DelayOrder,
                                            Effect::ControlDelayOrder};
  std::stable_sort(table.rows.begin(), table.rows.end(), [&](const AnovaRow& a, const AnovaRow& b) {
    return std::find(kOrder.begin(), kOrder.end(), a.effect) <
           std::find(kOrder.begin(), kOrder.end(), b.effect);
  });
  return table;
}

FTest simple_effect(const RmDataset& data, Factor fixed, int level) {
  if (level != 0 && level != 1) throw std::invalid_argument("factor level must be 0 or 1");
  data.validate();
  const Groups g = index_groups(data);
  const std::size_t n = data.subjects.size();
  const int df_err = static_cast<int>(n) - static_cast<int>(g.size.size());
  if (df_err < 1) throw InsufficientSubjects("no error degrees of freedom");

  std::vector<double> diffs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = data.subjects[i].cells;
    diffs[i] = fixed == Factor::Control ? c[cell_index(level, 0)] - c[cell_index(level, 1)]
                                        : c[cell_index(0, level)] - c[cell_index(1, level)];
  }
  const Split sp = split_scores(diffs, g);
  FTest out;
  out.df_num = 1;
  out.df_den = df_err;
  out.f = ratio(sp.grand / 2.0, (sp.within / 2.0) / df_err);
  out.p = f_sf(out.f, 1, df_err);
  return out;
}

TTest paired_t(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw LengthMismatch(fmt::format("paired samples differ in length: {} vs {}", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);

  TTest out;
  out.df = static_cast<int>(n) - 1;
  const bool all_equal = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });
  if (all_equal || ss == 0.0) {
    out.degenerate_variance = true;
    out.t = d[0] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d[0]);
    out.p = d[0] == 0.0 ? 1.0 : 0.0;
    return out;
  }
  const double sd = std::sqrt(ss / out.df);
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p = t_two_sided_p(out.t, out.df);
  return out;
}

std::vector<CellStats> marginal_means(const RmDataset& data, bool split_by_group) {
  std::vector<std::optional<ControlOrder>> groups;
  if (split_by_group) {
    std::set<ControlOrder> present;
    for (const auto& s : data.subjects) present.insert(s.group);
    for (auto gr : present) groups.emplace_back(gr);
  } else {
    groups.emplace_back(std::nullopt);
  }
  std::vector<CellStats> out;
  for (const auto& gr : groups) {
    for (int c = 0; c < 2; ++c) {
      for (int d = 0; d < 2; ++d) {
        std::vector<double> v;
        for (const auto& s : data.subjects) {
          if (!gr || s.group == *gr) v.push_back(s.cells[cell_index(c, d)]);
        }
        CellStats cs;
        cs.group = gr;
        cs.control = c;
        cs.delay = d;
        cs.n = v.size();
        if (!v.empty()) {
          cs.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
          double ss = 0.0;
          for (double x : v) ss += (x - cs.mean) * (x - cs.mean);
          cs.single_observation = v.size() == 1;
          cs.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        }
        out.push_back(cs);
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.emplace_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> csv_rows(std::string_view text,
                                               const std::vector<std::string>& required) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      if (header.size() < required.size() ||
          !std::equal(required.begin(), required.end(), header.begin())) {
        throw std::invalid_argument("unexpected CSV header: " + std::string(line));
      }
      continue;
    }
    if (fields.size() != header.size()) {
      throw std::invalid_argument("CSV row has the wrong number of fields: " + std::string(line));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

}  // namespace

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  const std::vector<std::string> header = {"participant", "order",    "control", "delay",
                                           "completion_time", "distance", "mean_rt", "errors"};
  std::vector<ResultRow> out;
  for (const auto& f : csv_rows(text, header)) {
    ResultRow r;
    r.participant = f[0];
    r.order = parse_order(f[1]);
    r.control = parse_method(f[2]);
    r.delay = to_double(f[3]);
    r.completion_time = to_double(f[4]);
    r.distance = to_double(f[5]);
    if (!f[6].empty()) r.mean_rt = to_double(f[6]);
    r.errors = to_int(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuestionnaireRow> parse_questionnaire_csv(std::string_view text) {
  const std::vector<std::string> header = {"participant", "trial", "control", "delay",
                                           "instrument",  "score"};
  std::vector<QuestionnaireRow> out;
  for (const auto& f : csv_rows(text, header)) {
    QuestionnaireRow r;
    r.participant = f[0];
    r.trial = static_cast<std::size_t>(to_int(f[1]));
    r.control = parse_method(f[2]);
    r.delay = to_double(f[3]);
    r.instrument = f[4];
    r.score = to_double(f[5]);
    for (std::size_t i = 6; i < f.size(); ++i) {
      if (!f[i].empty()) r.items.push_back(to_int(f[i]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

struct PartialSubject {
  ControlOrder group = ControlOrder::DCFirst;
  std::array<std::optional<double>, 4> cells;
};

std::optional<std::size_t> cell_for(ControlMethod control, double delay) {
  if (control == ControlMethod::Switchable) return std::nullopt;
  return cell_index(control == ControlMethod::Direct ? 0 : 1, delay > 0.0 ? 1 : 0);
}

void put(std::map<std::string, std::map<std::string, PartialSubject>>& acc,
         const std::string& measure, const std::string& participant, ControlOrder group,
         std::size_t cell, double value) {
  auto& subject = acc[measure][participant];
  subject.group = group;
  subject.cells[cell] = value;
}

}  // namespace

std::map<std::string, RmDataset> build_datasets(
    const std::vector<ResultRow>& results, const std::vector<QuestionnaireRow>& questionnaires) {
  std::map<std::string, std::map<std::string, PartialSubject>> acc;
  std::map<std::string, ControlOrder> group_of;
  for (const auto& r : results) {
    const auto cell = cell_for(r.control, r.delay);
    if (!cell) continue;
    group_of[r.participant] = r.order;
    put(acc, "completion_time", r.participant, r.order, *cell, r.completion_time);
    put(acc, "distance", r.participant, r.order, *cell, r.distance);
    if (r.mean_rt) put(acc, "mean_rt", r.participant, r.order, *cell, *r.mean_rt);
    put(acc, "errors", r.participant, r.order, *cell, r.errors);
  }
  for (const auto& q : questionnaires) {
    const auto cell = cell_for(q.control, q.delay);
    const auto g = group_of.find(q.participant);
    if (!cell || g == group_of.end()) continue;
    if (q.instrument == "SUS") {
      put(acc, "sus", q.participant, g->second, *cell, q.score);
    } else if (q.instrument == "TLX") {
      put(acc, "tlx", q.participant, g->second, *cell, q.score);
      for (std::size_t k = 0; k < kTlxScales && k < q.items.size(); ++k) {
        put(acc, "tlx_" + std::string(kTlxScaleNames[k]), q.participant, g->second, *cell,
            q.items[k]);
      }
    }
  }
  std::map<std::string, RmDataset> out;
  for (const auto& [measure, subjects] : acc) {
    RmDataset ds;
    for (const auto& [id, ps] : subjects) {
      if (!std::all_of(ps.cells.begin(), ps.cells.end(), [](const auto& c) { return c.has_value(); })) {
        continue;
      }
      Subject s{id, ps.group, {}};
      for (std::size_t k = 0; k < 4; ++k) s.cells[k] = *ps.cells[k];
      ds.subjects.push_back(std::move(s));
    }
    out.emplace(measure, std::move(ds));
  }
  return out;
}

std::string analysis_report(const std::map<std::string, RmDataset>& datasets) {
  std::string out = "section,measure,effect,ss,df_num,ss_error,df_den,f,p\n";
  std::string simple = "section,measure,fixed,level,f,df_num,df_den,p\n";
  std::string means = "section,measure,group,control,delay,mean,sd,n\n";
  std::size_t analysed = 0;
  for (const auto& [measure, ds] : datasets) {
    AnovaTable table;
    try {
      table = mixed_anova(ds);
    } catch (const std::invalid_argument&) {
      continue;
    }
    ++analysed;
    for (const auto& r : table.rows) {
      out += fmt::format("anova,{},{},{},{},{},{},{},{}\n", measure, to_string(r.effect), r.ss,
                         r.df_num, r.ss_error, r.df_den, r.f, r.p);
    }
    for (Factor fixed : {Factor::Delay, Factor::Control}) {
      for (int level = 0; level < 2; ++level) {
        const FTest f = simple_effect(ds, fixed, level);
        simple += fmt::format("simple_effect,{},{},{},{},{},{},{}\n", measure,
                              fixed == Factor::Delay ? "delay" : "control", level, f.f, f.df_num,
                              f.df_den, f.p);
      }
    }
    for (bool split : {false, true}) {
      for (const auto& c : marginal_means(ds, split)) {
        means += fmt::format("marginal_mean,{},{},{},{},{},{},{}\n", measure,
                             c.group ? to_string(*c.group) : "all",
                             c.control == 0 ? "direct" : "waypoint", c.delay, c.mean, c.sd, c.n);
      }
    }
  }
  if (analysed == 0) throw InsufficientData("no measure has enough complete subjects for analysis");
  return out + "\n" + simple + "\n" + means;
}

}  // namespace telewaypoint
