#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "vpr/event_log.hpp"
#include "vpr/pattern_miner.hpp"
#include "vpr/step_mapper.hpp"
#include "vpr/vpr_model.hpp"

namespace vpr::testing {

inline RawEvent ev(EventKind kind, std::int64_t ts, std::string url, std::string actor = "T1") {
  RawEvent e;
  e.kind = kind;
  e.timestamp = ts;
  e.url = std::move(url);
  e.actor_id = std::move(actor);
  switch (kind) {
    case EventKind::Click: e.coords = Coords{10, 20}; break;
    case EventKind::Keyup: e.key_value = "a"; break;
    case EventKind::Select: e.selected_text = "text"; break;
    case EventKind::Scroll: e.scroll_dy = 100; break;
    case EventKind::Change: e.new_value = "v"; break;
    default: break;
  }
  return e;
}

inline EventLog make_log(std::vector<RawEvent> events, std::string title = "Task") {
  EventLog log;
  log.actor_id = events.empty() ? "T1" : events.front().actor_id;
  log.events = std::move(events);
  log.task_title = std::move(title);
  return log;
}

// Brute-force SPM oracle: every distinct subsequence of every trace up to
// max_len, counted once per trace.
inline void subsequences(const std::vector<StepKind>& trace, std::size_t max_len, std::size_t from,
                         std::vector<StepKind>& cur, std::set<std::vector<StepKind>>& out) {
  if (!cur.empty()) out.insert(cur);
  if (cur.size() == max_len) return;
  for (std::size_t i = from; i < trace.size(); ++i) {
    cur.push_back(trace[i]);
    subsequences(trace, max_len, i + 1, cur, out);
    cur.pop_back();
  }
}

inline std::map<std::vector<StepKind>, std::size_t> brute_force_patterns(const std::vector<StepSequence>& db,
                                                                         std::size_t min_support,
                                                                         std::size_t max_len) {
  std::map<std::vector<StepKind>, std::size_t> counts;
  for (const auto& seq : db) {
    std::set<std::vector<StepKind>> mine;
    std::vector<StepKind> cur;
    subsequences(seq.kinds, max_len, 0, cur, mine);
    for (const auto& p : mine) ++counts[p];
  }
  std::erase_if(counts, [&](const auto& kv) { return kv.second < min_support; });
  return counts;
}

inline bool is_subsequence(const std::vector<StepKind>& needle, const std::vector<StepKind>& hay) {
  std::size_t i = 0;
  for (auto k : hay) {
    if (i < needle.size() && needle[i] == k) ++i;
  }
  return i == needle.size();
}

inline std::vector<StepSequence> random_db(std::mt19937_64& rng, std::size_t max_traces, std::size_t max_len,
                                           std::size_t alphabet) {
  std::vector<StepSequence> db(1 + rng() % max_traces);
  for (std::size_t t = 0; t < db.size(); ++t) {
    db[t].trace_id = "t" + std::to_string(t);
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) db[t].kinds.push_back(kAllStepKinds[rng() % alphabet]);
  }
  return db;
}

inline Step make_step(std::size_t index, StepKind kind, std::size_t begin, std::size_t end, std::int64_t ts) {
  Step s;
  s.index = index;
  s.kind = kind;
  s.subprocess = taxonomy(kind);
  s.event_span = {begin, end};
  s.primary_url = "https://lms.example.edu/page/" + std::to_string(index);
  s.summary = std::string(plain_label(kind)) + ": step " + std::to_string(index + 1);
  s.start_ts = ts;
  s.end_ts = ts + 500;
  return s;
}

// A 10-step document over four subprocess families with every kind of context
// asset. Screenshots are written to `asset_dir` when given.
inline VprDocument ten_step_document(const std::filesystem::path& asset_dir) {
  const StepKind kinds[10] = {StepKind::Navigate, StepKind::Navigate,      StepKind::Search,
                              StepKind::Fill,     StepKind::Fill,          StepKind::Upload,
                              StepKind::Highlight, StepKind::Annotate,     StepKind::ApplyResource,
                              StepKind::Unknown};
  std::vector<Step> steps;
  for (std::size_t i = 0; i < 10; ++i) {
    auto s = make_step(i, kinds[i], 2 * i, 2 * i + 2, 1'000'000 + 10'000 * static_cast<std::int64_t>(i));
    if (i % 3 == 0) s.context.push_back({AssetKind::Screenshot, "shot-" + std::to_string(i) + ".png", Coords{4, 8}});
    if (kinds[i] == StepKind::Highlight) s.context.push_back({AssetKind::HighlightedText, "policy <3>", std::nullopt});
    if (kinds[i] == StepKind::Annotate) s.context.push_back({AssetKind::Annotation, "check & confirm", std::nullopt});
    if (i != 4) s.context.push_back({AssetKind::Link, s.primary_url, std::nullopt});
    steps.push_back(std::move(s));
  }
  if (!asset_dir.empty()) {
    std::filesystem::create_directories(asset_dir);
    for (const auto& s : steps) {
      for (const auto& a : s.context) {
        if (a.kind == AssetKind::Screenshot) std::ofstream(asset_dir / a.payload, std::ios::binary) << "PNGDATA" << s.index;
      }
    }
  }
  auto sections = sectionize(steps);
  std::vector<Pattern> patterns = {{{StepKind::Navigate}, 1}, {{StepKind::Navigate, StepKind::Search}, 1}};
  std::vector<Variant> variants = {{to_sequence("fixture", steps).kinds, 1, {"fixture"}}};
  BuildOptions opts;
  opts.actor_id = "T1";
  return build_document(std::move(steps), std::move(sections), std::move(patterns), std::move(variants),
                        "Fixture workflow", asset_dir, opts);
}

inline std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

// Removes every context block (HTML form) from a rendered document.
inline std::string strip_context_blocks(const std::string& html) {
  static const std::regex block(R"(<div class="vpr-context">[\s\S]*?</div>\n)");
  return std::regex_replace(html, block, "");
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vpr-test-" + std::to_string(::getpid()) + "-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vpr::testing
