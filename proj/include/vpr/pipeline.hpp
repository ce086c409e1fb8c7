#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vpr/event_log.hpp"
#include "vpr/pattern_miner.hpp"
#include "vpr/step_mapper.hpp"
#include "vpr/vpr_model.hpp"

namespace vpr {

struct TraceInput {
  std::string trace_id;
  EventLog log;
};

struct MineOptions {
  MappingRules rules = default_rules();
  std::filesystem::path asset_dir = "assets";
  std::optional<std::string> title;       // falls back to the first log's task title
  std::optional<std::size_t> min_support;  // default: half the traces, rounded up
  std::size_t max_len = kDefaultMaxPatternLength;
  // Cap on stored patterns: highest support first, longer before shorter.
  std::size_t max_document_patterns = 50;
};

/// Steps -> sections -> patterns and variants over all traces -> document.
/// The first trace is the one the document depicts.
inline VprDocument mine_document(const std::vector<TraceInput>& traces, const MineOptions& options) {
  if (traces.empty()) throw Error(ErrorCode::EmptyDatabase, "no logs given");

  std::vector<StepSequence> db;
  std::vector<Step> primary;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto steps = map_steps(traces[i].log, options.rules);
    db.push_back(to_sequence(traces[i].trace_id, steps));
    if (i == 0) primary = std::move(steps);
  }
  primary = attach_context(std::move(primary), traces.front().log, options.asset_dir);
  auto sections = sectionize(primary);
  auto patterns = mine_patterns(db, options.min_support.value_or(default_min_support(db.size())), options.max_len);
  if (patterns.size() > options.max_document_patterns) {
    std::stable_sort(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
      if (a.support != b.support) return a.support > b.support;
      return a.kinds.size() > b.kinds.size();
    });
    patterns.resize(options.max_document_patterns);
    std::stable_sort(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
      if (a.support != b.support) return a.support > b.support;
      return a.kinds.size() < b.kinds.size();
    });
  }
  auto variants = compute_variants(db);

  std::string title = options.title.value_or(traces.front().log.task_title);
  BuildOptions build;
  build.actor_id = traces.front().log.actor_id;
  return build_document(std::move(primary), std::move(sections), std::move(patterns), std::move(variants),
                        std::move(title), options.asset_dir, build);
}

}  // namespace vpr
