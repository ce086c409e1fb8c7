#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "vpr/error.hpp"
#include "vpr/text.hpp"

namespace vpr::stats {

enum class Prototype { P1, P2, P3, P4 };

inline constexpr std::array<Prototype, 4> kAllPrototypes = {Prototype::P1, Prototype::P2, Prototype::P3,
                                                            Prototype::P4};

inline std::string_view to_string(Prototype p) {
  switch (p) {
    case Prototype::P1: return "P1";
    case Prototype::P2: return "P2";
    case Prototype::P3: return "P3";
    case Prototype::P4: return "P4";
  }
  return "?";
}

inline std::optional<Prototype> parse_prototype(std::string_view s) {
  for (auto p : kAllPrototypes) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

struct ResponseRecord {
  std::string participant_id;
  Prototype prototype = Prototype::P1;
  int task = 1;
  char part = 'A';
  std::string question_id;
  std::string answer;
  double time_sec = 0.0;
};

struct AnswerKeyEntry {
  std::string correct_answer;
  int task = 1;
  char part = 'A';
};

using AnswerKey = std::map<std::string, AnswerKeyEntry>;

struct ScoreRow {
  std::string participant_id;
  Prototype prototype = Prototype::P1;
  int task = 1;
  char part = 'A';
  int score = 0;
  int questions = 0;
  double total_time_sec = 0.0;
  double mean_time_per_q = 0.0;
};

/// Number of key questions in each (task, part).
inline std::map<std::pair<int, char>, int> questions_per_part(const AnswerKey& key) {
  std::map<std::pair<int, char>, int> out;
  for (const auto& [_, entry] : key) ++out[{entry.task, entry.part}];
  return out;
}

/// One row per (participant, task, part), ordered by those keys.
inline std::vector<ScoreRow> score_responses(const std::vector<ResponseRecord>& records, const AnswerKey& key) {
  std::set<std::tuple<std::string, int, char, std::string>> seen;
  std::map<std::tuple<std::string, int, char>, ScoreRow> rows;
  std::map<std::string, Prototype> prototype_of;

  for (const auto& r : records) {
    auto it = key.find(r.question_id);
    if (it == key.end()) throw Error(ErrorCode::UnknownQuestion, r.question_id);
    if (it->second.task != r.task || it->second.part != r.part) {
      throw Error(ErrorCode::InconsistentRecord,
                  "question " + r.question_id + " belongs to a different task/part than recorded");
    }
    if (!(r.time_sec >= 0.0)) throw Error(ErrorCode::InconsistentRecord, "negative time for " + r.participant_id);
    if (!seen.emplace(r.participant_id, r.task, r.part, r.question_id).second) {
      throw Error(ErrorCode::DuplicateResponse, r.participant_id + " answered " + r.question_id + " twice");
    }
    if (auto [p, inserted] = prototype_of.emplace(r.participant_id, r.prototype); !inserted && p->second != r.prototype) {
      throw Error(ErrorCode::InconsistentRecord, r.participant_id + " appears under two prototypes");
    }

    auto& row = rows[{r.participant_id, r.task, r.part}];
    row.participant_id = r.participant_id;
    row.prototype = r.prototype;
    row.task = r.task;
    row.part = r.part;
    row.score += r.answer == it->second.correct_answer ? 1 : 0;
    row.questions += 1;
    row.total_time_sec += r.time_sec;
  }

  std::vector<ScoreRow> out;
  out.reserve(rows.size());
  for (auto& [_, row] : rows) {
    row.mean_time_per_q = row.total_time_sec / row.questions;
    out.push_back(std::move(row));
  }
  return out;
}

struct TaskScore {
  std::string participant_id;
  Prototype prototype = Prototype::P1;
  int task = 1;
  int score = 0;
  double total_time_sec = 0.0;
};

/// Parts A and B summed per (participant, task).
inline std::vector<TaskScore> task_scores(const std::vector<ScoreRow>& rows) {
  std::map<std::pair<std::string, int>, TaskScore> acc;
  for (const auto& r : rows) {
    auto& t = acc[{r.participant_id, r.task}];
    t.participant_id = r.participant_id;
    t.prototype = r.prototype;
    t.task = r.task;
    t.score += r.score;
    t.total_time_sec += r.total_time_sec;
  }
  std::vector<TaskScore> out;
  for (auto& [_, t] : acc) out.push_back(std::move(t));
  return out;
}

inline constexpr double kDefaultFastThresholdSec = 30.0;

struct Exclusion {
  std::vector<ScoreRow> kept;
  std::vector<ScoreRow> excluded;
};

/// A participant is dropped from a task, both parts, when their mean time
/// per question over that task is strictly below the threshold.
inline Exclusion exclude_fast(const std::vector<ScoreRow>& rows, double threshold_sec = kDefaultFastThresholdSec) {
  std::map<std::pair<std::string, int>, std::pair<double, int>> per_task;
  for (const auto& r : rows) {
    auto& [time, count] = per_task[{r.participant_id, r.task}];
    time += r.total_time_sec;
    count += r.questions;
  }
  Exclusion out;
  for (const auto& r : rows) {
    const auto& [time, count] = per_task.at({r.participant_id, r.task});
    const double mean = count > 0 ? time / count : 0.0;
    (mean < threshold_sec ? out.excluded : out.kept).push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise comparison

struct ComparisonCore {
  double coef = 0.0;
  double t = 0.0;
  double p = 1.0;
  double cohens_d = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Bessel-corrected sample variance.
inline double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double pooled_variance(std::span<const double> a, std::span<const double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
}

/// Two-sided p-value of a t statistic.
inline double two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

/// Regresses the pooled outcomes on a 0/1 group indicator (1 = group b).
/// The slope equals mean(b) - mean(a); its t statistic equals the pooled
/// two-sample t with n_a + n_b - 2 degrees of freedom. Cohen's d is
/// (mean(a) - mean(b)) / pooled sd, so its sign is opposite to the slope.
inline ComparisonCore pairwise_compare(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, "each group needs at least two observations");
  }
  const std::size_t n = a.size() + b.size();

  double x_mean = static_cast<double>(b.size()) / static_cast<double>(n);
  double y_mean = 0.0;
  for (double y : a) y_mean += y;
  for (double y : b) y_mean += y;
  y_mean /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0;
  auto accumulate = [&](std::span<const double> ys, double x) {
    for (double y : ys) {
      sxx += (x - x_mean) * (x - x_mean);
      sxy += (x - x_mean) * (y - y_mean);
    }
  };
  accumulate(a, 0.0);
  accumulate(b, 1.0);
  const double slope = sxy / sxx;
  const double intercept = y_mean - slope * x_mean;

  double sse = 0.0;
  auto residuals = [&](std::span<const double> ys, double x) {
    for (double y : ys) {
      const double r = y - (intercept + slope * x);
      sse += r * r;
    }
  };
  residuals(a, 0.0);
  residuals(b, 1.0);

  const double df = static_cast<double>(n - 2);
  const double pooled = pooled_variance(a, b);
  if (!(pooled > 0.0)) throw Error(ErrorCode::DegenerateVariance, "both groups are constant");

  ComparisonCore out;
  out.n_a = a.size();
  out.n_b = b.size();
  out.coef = slope;
  const double se = std::sqrt(sse / df / sxx);
  out.t = slope == 0.0 ? 0.0 : slope / se;
  out.p = two_sided_p(out.t, df);
  out.cohens_d = (mean(a) - mean(b)) / std::sqrt(pooled);
  return out;
}

/// min(1, m * p).
inline double bonferroni(double p, std::size_t m) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p-value outside [0, 1]");
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "number of tests must be positive");
  return std::min(1.0, static_cast<double>(m) * p);
}

/// Pearson correlation coefficient.
inline double correlate(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::LengthMismatch, "series differ in length");
  if (xs.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least two points");
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantSeries, "correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Share of ratings >= 4 per question, as a percentage with one decimal.
inline std::vector<double> likert_summary(const std::vector<std::vector<int>>& ratings) {
  std::vector<double> out;
  out.reserve(ratings.size());
  for (const auto& question : ratings) {
    if (question.empty()) throw Error(ErrorCode::TooFewSamples, "question without ratings");
    int agree = 0;
    for (int r : question) {
      if (r < 1 || r > 5) throw Error(ErrorCode::OutOfRangeRating, std::to_string(r));
      agree += r >= 4 ? 1 : 0;
    }
    out.push_back(std::round(1000.0 * agree / static_cast<double>(question.size())) / 10.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct LikertRecord {
  std::string participant_id;
  Prototype prototype = Prototype::P1;
  std::string question_id;
  int rating = 0;
};

enum class Measure { ScorePartA, ScorePartB, TotalTime };

inline std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::ScorePartA: return "score_part_a";
    case Measure::ScorePartB: return "score_part_b";
    case Measure::TotalTime: return "total_time";
  }
  return "?";
}

inline std::string_view describe(Measure m) {
  switch (m) {
    case Measure::ScorePartA: return "Part A score";
    case Measure::ScorePartB: return "Part B score";
    case Measure::TotalTime: return "Total time on task (s)";
  }
  return "?";
}

struct ComparisonRow {
  int task = 1;
  Measure measure = Measure::ScorePartA;
  Prototype first = Prototype::P1;
  Prototype second = Prototype::P2;
  // Unset when the pair could not be compared (too few samples, zero variance).
  std::optional<ComparisonCore> core;
  double corrected_p = std::numeric_limits<double>::quiet_NaN();
  std::size_t m = 1;
  std::string note;
};

struct CorrelationMatrix {
  int task = 1;
  Prototype prototype = Prototype::P1;
  std::size_t n = 0;
  // Variables: score A, time A, score B, time B. NaN where undefined.
  std::array<std::array<double, 4>, 4> r{};
};

inline constexpr std::array<std::string_view, 4> kCorrelationVariables = {"score_a", "time_a", "score_b", "time_b"};

struct LikertRow {
  Prototype prototype = Prototype::P1;
  std::string question_id;
  std::size_t n = 0;
  double agree_pct = 0.0;
};

struct ReportConfig {
  bool apply_exclusion = true;
  double threshold_sec = kDefaultFastThresholdSec;
};

struct Report {
  std::vector<Prototype> prototypes;
  std::size_t tests_per_family = 0;
  std::vector<ComparisonRow> comparisons;
  std::vector<CorrelationMatrix> correlations;
  std::vector<LikertRow> likert;
  std::size_t excluded_rows = 0;
  std::vector<std::pair<std::string, int>> excluded;  // (participant, task)
};

namespace detail {

/// Orders "Q2" before "Q10".
inline bool natural_less(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    auto pos = s.find_first_of("0123456789");
    if (pos == std::string::npos) return std::make_tuple(s, -1L, std::string());
    auto end = s.find_first_not_of("0123456789", pos);
    const std::string digits = s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    return std::make_tuple(s.substr(0, pos), digits.size() < 18 ? std::stol(digits) : -1L,
                           end == std::string::npos ? std::string() : s.substr(end));
  };
  auto ka = split(a), kb = split(b);
  if (ka != kb) return ka < kb;
  return a < b;
}

}  // namespace detail

/// Applies the fast-responder exclusion, then builds pairwise comparison
/// tables per (task, measure) with Bonferroni m = C(k,2) over the k
/// prototypes present, per-prototype time/score correlation matrices, and
/// Likert agreement. Throws InsufficientGroups when fewer than two
/// prototypes have data.
inline Report build_report(const std::vector<ScoreRow>& all_rows, const ReportConfig& config = {},
                           const std::vector<LikertRecord>& likert = {}) {
  Report report;
  Exclusion split = config.apply_exclusion ? exclude_fast(all_rows, config.threshold_sec) : Exclusion{all_rows, {}};
  const std::vector<ScoreRow>& rows = split.kept;
  report.excluded_rows = split.excluded.size();
  for (const auto& r : split.excluded) {
    std::pair<std::string, int> key{r.participant_id, r.task};
    if (std::find(report.excluded.begin(), report.excluded.end(), key) == report.excluded.end()) {
      report.excluded.push_back(std::move(key));
    }
  }
  std::set<Prototype> present;
  std::set<int> tasks;
  for (const auto& r : rows) {
    present.insert(r.prototype);
    tasks.insert(r.task);
  }
  if (present.size() < 2) {
    throw Error(ErrorCode::InsufficientGroups, "need at least two prototypes, found " + std::to_string(present.size()));
  }
  report.prototypes.assign(present.begin(), present.end());
  const std::size_t k = report.prototypes.size();
  report.tests_per_family = k * (k - 1) / 2;

  // Per (participant, task) view used by comparisons and correlations.
  struct Sheet {
    Prototype prototype;
    std::optional<ScoreRow> a, b;
  };
  std::map<int, std::map<std::string, Sheet>> sheets;
  for (const auto& r : rows) {
    auto& sheet = sheets[r.task][r.participant_id];
    sheet.prototype = r.prototype;
    (r.part == 'A' ? sheet.a : sheet.b) = r;
  }

  for (int task : tasks) {
    for (Measure measure : {Measure::ScorePartA, Measure::ScorePartB, Measure::TotalTime}) {
      std::map<Prototype, std::vector<double>> groups;
      for (const auto& [_, sheet] : sheets[task]) {
        switch (measure) {
          case Measure::ScorePartA:
            if (sheet.a) groups[sheet.prototype].push_back(sheet.a->score);
            break;
          case Measure::ScorePartB:
            if (sheet.b) groups[sheet.prototype].push_back(sheet.b->score);
            break;
          case Measure::TotalTime:
            if (sheet.a && sheet.b) groups[sheet.prototype].push_back(sheet.a->total_time_sec + sheet.b->total_time_sec);
            break;
        }
      }
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          ComparisonRow row;
          row.task = task;
          row.measure = measure;
          row.first = report.prototypes[i];
          row.second = report.prototypes[j];
          row.m = report.tests_per_family;
          try {
            row.core = pairwise_compare(groups[row.first], groups[row.second]);
            row.corrected_p = bonferroni(row.core->p, row.m);
          } catch (const Error& e) {
            row.note = std::string(to_string(e.code()));
          }
          report.comparisons.push_back(std::move(row));
        }
      }
    }

    for (Prototype proto : report.prototypes) {
      std::array<std::vector<double>, 4> vars;
      for (const auto& [_, sheet] : sheets[task]) {
        if (sheet.prototype != proto || !sheet.a || !sheet.b) continue;
        vars[0].push_back(sheet.a->score);
        vars[1].push_back(sheet.a->total_time_sec);
        vars[2].push_back(sheet.b->score);
        vars[3].push_back(sheet.b->total_time_sec);
      }
      if (vars[0].size() < 2) continue;
      CorrelationMatrix cm;
      cm.task = task;
      cm.prototype = proto;
      cm.n = vars[0].size();
      for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) {
          try {
            cm.r[x][y] = correlate(vars[x], vars[y]);
          } catch (const Error&) {
            cm.r[x][y] = std::numeric_limits<double>::quiet_NaN();
          }
        }
      }
      report.correlations.push_back(cm);
    }
  }

  std::map<std::pair<Prototype, std::string>, std::vector<int>> ratings;
  for (const auto& l : likert) ratings[{l.prototype, l.question_id}].push_back(l.rating);
  std::vector<std::pair<Prototype, std::string>> keys;
  for (const auto& [key, _] : ratings) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return detail::natural_less(x.second, y.second);
  });
  for (const auto& key : keys) {
    const auto& rs = ratings.at(key);
    report.likert.push_back({key.first, key.second, rs.size(), likert_summary({rs}).front()});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report output

inline nlohmann::ordered_json report_to_json(const Report& report) {
  using J = nlohmann::ordered_json;
  auto num = [](double v) { return std::isnan(v) ? J(nullptr) : J(v); };
  J j;
  j["prototypes"] = J::array();
  for (auto p : report.prototypes) j["prototypes"].push_back(std::string(to_string(p)));
  j["tests_per_family"] = report.tests_per_family;
  j["excluded"] = J::array();
  for (const auto& [pid, task] : report.excluded) j["excluded"].push_back({{"participant_id", pid}, {"task", task}});
  j["comparisons"] = J::array();
  for (const auto& row : report.comparisons) {
    J o;
    o["task"] = row.task;
    o["measure"] = std::string(to_string(row.measure));
    o["pair"] = std::string(to_string(row.first)) + " vs " + std::string(to_string(row.second));
    if (row.core) {
      o["coef"] = row.core->coef;
      o["t"] = row.core->t;
      o["p"] = row.core->p;
      o["corrected_p"] = row.corrected_p;
      o["cohens_d"] = row.core->cohens_d;
      o["n_a"] = row.core->n_a;
      o["n_b"] = row.core->n_b;
    } else {
      o["coef"] = o["t"] = o["p"] = o["corrected_p"] = o["cohens_d"] = nullptr;
      o["note"] = row.note;
    }
    o["m"] = row.m;
    j["comparisons"].push_back(std::move(o));
  }
  j["correlations"] = J::array();
  for (const auto& cm : report.correlations) {
    J o;
    o["task"] = cm.task;
    o["prototype"] = std::string(to_string(cm.prototype));
    o["n"] = cm.n;
    o["variables"] = J::array();
    for (auto v : kCorrelationVariables) o["variables"].push_back(std::string(v));
    o["r"] = J::array();
    for (const auto& line : cm.r) {
      J arr = J::array();
      for (double v : line) arr.push_back(num(v));
      o["r"].push_back(std::move(arr));
    }
    j["correlations"].push_back(std::move(o));
  }
  j["likert"] = J::array();
  for (const auto& l : report.likert) {
    j["likert"].push_back({{"prototype", std::string(to_string(l.prototype))},
                           {"question_id", l.question_id},
                           {"n", l.n},
                           {"agree_pct", l.agree_pct}});
  }
  return j;
}

namespace detail {

inline std::string pad(std::string s, std::size_t width, bool right_align = false) {
  if (s.size() >= width) return s + " ";
  const std::string fill(width - s.size(), ' ');
  return right_align ? fill + s + " " : s + fill + " ";
}

}  // namespace detail

/// Aligned plain-text tables; comparison columns follow
/// Pair, Coef, t, P>|t|, Corrected p, Cohen's d.
inline std::string report_to_text(const Report& report) {
  using detail::pad;
  std::ostringstream out;
  std::map<std::pair<int, Measure>, std::vector<const ComparisonRow*>> families;
  for (const auto& row : report.comparisons) families[{row.task, row.measure}].push_back(&row);

  for (const auto& [key, rows] : families) {
    out << "Task " << key.first << ", " << describe(key.second) << " (Bonferroni m = " << report.tests_per_family
        << ")\n";
    out << pad("Pair", 10) << pad("Coef", 11, true) << pad("t", 8, true) << pad("P>|t|", 7, true)
        << pad("Corrected p", 12, true) << pad("Cohen's d", 10, true) << "n\n";
    for (const auto* row : rows) {
      out << pad(std::string(to_string(row->first)) + " vs " + std::string(to_string(row->second)), 10);
      if (row->core) {
        const auto& c = *row->core;
        out << pad(format_fixed(c.coef, 4), 11, true) << pad(format_fixed(c.t, 3), 8, true)
            << pad(format_fixed(c.p, 3), 7, true) << pad(format_fixed(row->corrected_p, 3), 12, true)
            << pad(format_fixed(c.cohens_d, 3), 10, true) << c.n_a << "/" << c.n_b << "\n";
      } else {
        out << "(" << row->note << ")\n";
      }
    }
    out << "\n";
  }

  for (const auto& cm : report.correlations) {
    out << "Task " << cm.task << ", " << to_string(cm.prototype) << " correlations (n = " << cm.n << ")\n";
    out << pad("", 8);
    for (auto v : kCorrelationVariables) out << pad(std::string(v), 8, true);
    out << "\n";
    for (std::size_t x = 0; x < 4; ++x) {
      out << pad(std::string(kCorrelationVariables[x]), 8);
      for (std::size_t y = 0; y < 4; ++y) out << pad(format_fixed(cm.r[x][y], 3), 8, true);
      out << "\n";
    }
    out << "\n";
  }

  if (!report.likert.empty()) {
    out << "Likert agreement (ratings 4-5)\n";
    out << pad("Prototype", 10) << pad("Question", 10) << pad("n", 5, true) << "Agree %\n";
    for (const auto& l : report.likert) {
      out << pad(std::string(to_string(l.prototype)), 10) << pad(l.question_id, 10)
          << pad(std::to_string(l.n), 5, true) << format_fixed(l.agree_pct, 1) << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Delimited input

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::SchemaError, "missing column '" + std::string(name) + "'");
  }
};

/// Comma-separated text with a header row; fields may be double-quoted with
/// "" as an escaped quote. Quoted fields may not span lines.
inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  auto split = [&](const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (quoted) {
        if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c != '\r') {
        field += c;
      }
    }
    if (quoted) throw Error(ErrorCode::SchemaError, "unterminated quoted field", line_no);
    fields.push_back(std::move(field));
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::SchemaError,
                  "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()),
                  line_no);
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }
  if (table.header.empty()) throw Error(ErrorCode::SchemaError, "missing header row");
  return table;
}

namespace detail {

inline int parse_int_field(const std::string& s, const char* what, std::size_t line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::SchemaError, std::string("bad ") + what + " '" + s + "'", line);
}

inline double parse_double_field(const std::string& s, const char* what, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::SchemaError, std::string("bad ") + what + " '" + s + "'", line);
}

inline Prototype parse_prototype_field(const std::string& s, std::size_t line) {
  auto p = parse_prototype(s);
  if (!p) throw Error(ErrorCode::SchemaError, "bad prototype '" + s + "'", line);
  return *p;
}

inline char parse_part_field(const std::string& s, std::size_t line) {
  if (s == "A" || s == "B") return s[0];
  throw Error(ErrorCode::SchemaError, "bad part '" + s + "'", line);
}

inline int parse_task_field(const std::string& s, std::size_t line) {
  const int task = parse_int_field(s, "task", line);
  if (task < 1) throw Error(ErrorCode::SchemaError, "task must be positive", line);
  return task;
}

}  // namespace detail

/// Columns: participant_id, prototype, task, part, question_id, answer, time_sec.
inline std::vector<ResponseRecord> parse_responses(std::istream& in) {
  const CsvTable t = read_csv(in);
  const auto c_pid = t.column("participant_id"), c_proto = t.column("prototype"), c_task = t.column("task"),
             c_part = t.column("part"), c_q = t.column("question_id"), c_ans = t.column("answer"),
             c_time = t.column("time_sec");
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto line = t.lines[i];
    ResponseRecord r;
    r.participant_id = row[c_pid];
    r.prototype = detail::parse_prototype_field(row[c_proto], line);
    r.task = detail::parse_task_field(row[c_task], line);
    r.part = detail::parse_part_field(row[c_part], line);
    r.question_id = row[c_q];
    r.answer = row[c_ans];
    r.time_sec = detail::parse_double_field(row[c_time], "time_sec", line);
    if (r.time_sec < 0) throw Error(ErrorCode::SchemaError, "time_sec must be non-negative", line);
    out.push_back(std::move(r));
  }
  return out;
}

/// Columns: question_id, correct_answer, task, part.
inline AnswerKey parse_answer_key(std::istream& in) {
  const CsvTable t = read_csv(in);
  const auto c_q = t.column("question_id"), c_ans = t.column("correct_answer"), c_task = t.column("task"),
             c_part = t.column("part");
  AnswerKey key;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto line = t.lines[i];
    AnswerKeyEntry e{row[c_ans], detail::parse_task_field(row[c_task], line), detail::parse_part_field(row[c_part], line)};
    if (!key.emplace(row[c_q], e).second) throw Error(ErrorCode::SchemaError, "duplicate question " + row[c_q], line);
  }
  return key;
}

/// Columns: participant_id, prototype, question_id, rating.
inline std::vector<LikertRecord> parse_likert(std::istream& in) {
  const CsvTable t = read_csv(in);
  const auto c_pid = t.column("participant_id"), c_proto = t.column("prototype"), c_q = t.column("question_id"),
             c_rating = t.column("rating");
  std::vector<LikertRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto line = t.lines[i];
    const int rating = detail::parse_int_field(row[c_rating], "rating", line);
    if (rating < 1 || rating > 5) throw Error(ErrorCode::OutOfRangeRating, std::to_string(rating), line);
    out.push_back({row[c_pid], detail::parse_prototype_field(row[c_proto], line), row[c_q], rating});
  }
  return out;
}

}  // namespace vpr::stats
