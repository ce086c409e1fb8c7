#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vpr/error.hpp"
#include "vpr/step_mapper.hpp"

namespace vpr {

struct StepSequence {
  std::string trace_id;
  std::vector<StepKind> kinds;
};

struct Pattern {
  std::vector<StepKind> kinds;
  std::size_t support = 0;  // number of traces containing `kinds` as a subsequence
  bool operator==(const Pattern&) const = default;
};

struct Variant {
  std::vector<StepKind> kinds;
  std::size_t count = 0;
  std::vector<std::string> trace_ids;
  bool operator==(const Variant&) const = default;
};

struct StepRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
  bool operator==(const StepRange&) const = default;
};

struct Section {
  std::size_t index = 0;
  KmSubprocess subprocess = KmSubprocess::NoProcess;
  std::string title;
  StepRange steps;
  bool operator==(const Section&) const = default;
};

inline StepSequence to_sequence(std::string trace_id, const std::vector<Step>& steps) {
  StepSequence seq{std::move(trace_id), {}};
  seq.kinds.reserve(steps.size());
  for (const auto& s : steps) seq.kinds.push_back(s.kind);
  return seq;
}

/// Default minimum support: half the database, rounded up.
inline std::size_t default_min_support(std::size_t db_size) { return (db_size + 1) / 2; }

inline constexpr std::size_t kDefaultMaxPatternLength = 5;

namespace detail {

/// Position in a projected database: a trace and the offset just past the
/// matched prefix.
struct Projection {
  std::size_t trace;
  std::size_t start;
};

inline void grow_patterns(const std::vector<StepSequence>& db, const std::vector<Projection>& projected,
                          std::vector<StepKind>& prefix, std::size_t min_support, std::size_t max_len,
                          std::vector<Pattern>& out) {
  if (prefix.size() >= max_len) return;
  // Support of each extension item counted once per trace; remember the
  // first occurrence so the projection for that item is its suffix.
  std::map<StepKind, std::vector<Projection>> extensions;
  for (const auto& p : projected) {
    const auto& kinds = db[p.trace].kinds;
    std::vector<bool> seen(kAllStepKinds.size(), false);
    for (std::size_t i = p.start; i < kinds.size(); ++i) {
      const auto slot = static_cast<std::size_t>(kinds[i]);
      if (seen[slot]) continue;
      seen[slot] = true;
      extensions[kinds[i]].push_back({p.trace, i + 1});
    }
  }
  for (const auto& [item, next] : extensions) {
    if (next.size() < min_support) continue;
    prefix.push_back(item);
    out.push_back({prefix, next.size()});
    grow_patterns(db, next, prefix, min_support, max_len, out);
    prefix.pop_back();
  }
}

}  // namespace detail

/// Frequent order-preserving (gapped) subsequences of length 1..max_len
/// whose trace support reaches `min_support`, found by prefix projection.
/// Sorted by descending support, then ascending length, then kinds.
inline std::vector<Pattern> mine_patterns(const std::vector<StepSequence>& db, std::size_t min_support,
                                          std::size_t max_len = kDefaultMaxPatternLength) {
  if (db.empty()) throw Error(ErrorCode::EmptyDatabase, "no traces to mine");
  if (min_support < 1 || min_support > db.size()) {
    throw Error(ErrorCode::InvalidSupport,
                "min_support " + std::to_string(min_support) + " outside [1, " + std::to_string(db.size()) + "]");
  }
  if (max_len < 1) throw Error(ErrorCode::InvalidSupport, "max_len must be at least 1");
  for (const auto& seq : db) {
    if (seq.kinds.empty()) throw Error(ErrorCode::EmptyTrace, "trace '" + seq.trace_id + "' has no steps");
  }

  std::vector<detail::Projection> root;
  root.reserve(db.size());
  for (std::size_t t = 0; t < db.size(); ++t) root.push_back({t, 0});

  std::vector<Pattern> out;
  std::vector<StepKind> prefix;
  detail::grow_patterns(db, root, prefix, min_support, max_len, out);

  std::sort(out.begin(), out.end(), [](const Pattern& a, const Pattern& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.kinds.size() != b.kinds.size()) return a.kinds.size() < b.kinds.size();
    return a.kinds < b.kinds;
  });
  return out;
}

/// One variant per distinct complete sequence, most frequent first.
inline std::vector<Variant> compute_variants(const std::vector<StepSequence>& db) {
  if (db.empty()) throw Error(ErrorCode::EmptyDatabase, "no traces");
  std::map<std::vector<StepKind>, Variant> by_kinds;
  for (const auto& seq : db) {
    auto& v = by_kinds[seq.kinds];
    v.kinds = seq.kinds;
    ++v.count;
    v.trace_ids.push_back(seq.trace_id);
  }
  std::vector<Variant> out;
  out.reserve(by_kinds.size());
  for (auto& [_, v] : by_kinds) out.push_back(std::move(v));
  std::stable_sort(out.begin(), out.end(), [](const Variant& a, const Variant& b) { return a.count > b.count; });
  return out;
}

inline std::string default_section_title(KmSubprocess subprocess, std::size_t step_count) {
  return std::string(display_name(subprocess)) + " (" + std::to_string(step_count) +
         (step_count == 1 ? " step)" : " steps)");
}

/// Maximal runs of consecutive steps with the same subprocess.
inline std::vector<Section> sectionize(const std::vector<Step>& steps) {
  if (steps.empty()) throw Error(ErrorCode::EmptySteps, "cannot sectionize zero steps");
  std::vector<Section> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= steps.size(); ++i) {
    if (i < steps.size() && steps[i].subprocess == steps[begin].subprocess) continue;
    Section s;
    s.index = out.size();
    s.subprocess = steps[begin].subprocess;
    s.steps = {begin, i};
    s.title = default_section_title(s.subprocess, i - begin);
    out.push_back(std::move(s));
    begin = i;
  }
  return out;
}

}  // namespace vpr
