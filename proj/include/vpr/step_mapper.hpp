#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vpr/error.hpp"
#include "vpr/event_log.hpp"

namespace vpr {

enum class StepKind {
  Navigate,
  Search,
  Fill,
  Upload,
  Annotate,
  Highlight,
  ApplyResource,
  ApplyRecommendation,
  Unknown,
};

inline constexpr std::array<StepKind, 9> kAllStepKinds = {
    StepKind::Navigate, StepKind::Search,        StepKind::Fill,
    StepKind::Upload,   StepKind::Annotate,      StepKind::Highlight,
    StepKind::ApplyResource, StepKind::ApplyRecommendation, StepKind::Unknown};

inline std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Navigate: return "NAVIGATE";
    case StepKind::Search: return "SEARCH";
    case StepKind::Fill: return "FILL";
    case StepKind::Upload: return "UPLOAD";
    case StepKind::Annotate: return "ANNOTATE";
    case StepKind::Highlight: return "HIGHLIGHT";
    case StepKind::ApplyResource: return "APPLY_RESOURCE";
    case StepKind::ApplyRecommendation: return "APPLY_RECOMMENDATION";
    case StepKind::Unknown: return "UNKNOWN";
  }
  return "?";
}

inline std::optional<StepKind> parse_step_kind(std::string_view text) {
  for (StepKind kind : kAllStepKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

/// Plain-language action labels surfaced to readers.
inline std::string_view plain_label(StepKind kind) {
  switch (kind) {
    case StepKind::Navigate: return "Go to";
    case StepKind::Search: return "Find";
    case StepKind::Fill: return "Fill in";
    case StepKind::Upload: return "Upload";
    case StepKind::Annotate: return "Annotate";
    case StepKind::Highlight: return "Highlight";
    case StepKind::ApplyResource: return "Use resource";
    case StepKind::ApplyRecommendation: return "Follow recommendation";
    case StepKind::Unknown: return "Other action";
  }
  return "?";
}

enum class KmProcess { Access, Store, Sharing, Application };

inline std::string_view to_string(KmProcess p) {
  switch (p) {
    case KmProcess::Access: return "Access";
    case KmProcess::Store: return "Store";
    case KmProcess::Sharing: return "Sharing";
    case KmProcess::Application: return "Application";
  }
  return "?";
}

enum class KmSubprocess {
  Navigation,
  Search,
  FillingInformation,
  UploadingResources,
  DocumentAnnotation,
  HighlightInformation,
  InteractWithResources,
  RelyOnRecommendations,
  NoProcess,
};

inline constexpr std::array<KmSubprocess, 9> kAllSubprocesses = {
    KmSubprocess::Navigation,           KmSubprocess::Search,
    KmSubprocess::FillingInformation,   KmSubprocess::UploadingResources,
    KmSubprocess::DocumentAnnotation,   KmSubprocess::HighlightInformation,
    KmSubprocess::InteractWithResources, KmSubprocess::RelyOnRecommendations,
    KmSubprocess::NoProcess};

inline std::string_view to_string(KmSubprocess s) {
  switch (s) {
    case KmSubprocess::Navigation: return "Navigation";
    case KmSubprocess::Search: return "Search";
    case KmSubprocess::FillingInformation: return "FillingInformation";
    case KmSubprocess::UploadingResources: return "UploadingResources";
    case KmSubprocess::DocumentAnnotation: return "DocumentAnnotation";
    case KmSubprocess::HighlightInformation: return "HighlightInformation";
    case KmSubprocess::InteractWithResources: return "InteractWithResources";
    case KmSubprocess::RelyOnRecommendations: return "RelyOnRecommendations";
    case KmSubprocess::NoProcess: return "NoProcess";
  }
  return "?";
}

inline std::optional<KmSubprocess> parse_subprocess(std::string_view text) {
  for (KmSubprocess s : kAllSubprocesses) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

/// Human-readable subprocess name used in section titles.
inline std::string_view display_name(KmSubprocess s) {
  switch (s) {
    case KmSubprocess::Navigation: return "Navigation";
    case KmSubprocess::Search: return "Search";
    case KmSubprocess::FillingInformation: return "Filling information";
    case KmSubprocess::UploadingResources: return "Uploading resources";
    case KmSubprocess::DocumentAnnotation: return "Document annotation";
    case KmSubprocess::HighlightInformation: return "Highlight information";
    case KmSubprocess::InteractWithResources: return "Interact with resources";
    case KmSubprocess::RelyOnRecommendations: return "Rely on recommendations";
    case KmSubprocess::NoProcess: return "No process";
  }
  return "?";
}

/// NoProcess has no parent.
inline std::optional<KmProcess> parent(KmSubprocess s) {
  switch (s) {
    case KmSubprocess::Navigation:
    case KmSubprocess::Search: return KmProcess::Access;
    case KmSubprocess::FillingInformation:
    case KmSubprocess::UploadingResources: return KmProcess::Store;
    case KmSubprocess::DocumentAnnotation:
    case KmSubprocess::HighlightInformation: return KmProcess::Sharing;
    case KmSubprocess::InteractWithResources:
    case KmSubprocess::RelyOnRecommendations: return KmProcess::Application;
    case KmSubprocess::NoProcess: return std::nullopt;
  }
  return std::nullopt;
}

inline KmSubprocess taxonomy(StepKind kind) {
  switch (kind) {
    case StepKind::Navigate: return KmSubprocess::Navigation;
    case StepKind::Search: return KmSubprocess::Search;
    case StepKind::Fill: return KmSubprocess::FillingInformation;
    case StepKind::Upload: return KmSubprocess::UploadingResources;
    case StepKind::Annotate: return KmSubprocess::DocumentAnnotation;
    case StepKind::Highlight: return KmSubprocess::HighlightInformation;
    case StepKind::ApplyResource: return KmSubprocess::InteractWithResources;
    case StepKind::ApplyRecommendation: return KmSubprocess::RelyOnRecommendations;
    case StepKind::Unknown: return KmSubprocess::NoProcess;
  }
  return KmSubprocess::NoProcess;
}

enum class AssetKind { Screenshot, Link, Annotation, HighlightedText };

inline std::string_view to_string(AssetKind k) {
  switch (k) {
    case AssetKind::Screenshot: return "Screenshot";
    case AssetKind::Link: return "Link";
    case AssetKind::Annotation: return "Annotation";
    case AssetKind::HighlightedText: return "HighlightedText";
  }
  return "?";
}

inline std::optional<AssetKind> parse_asset_kind(std::string_view text) {
  for (AssetKind k : {AssetKind::Screenshot, AssetKind::Link, AssetKind::Annotation, AssetKind::HighlightedText}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

struct ContextAsset {
  AssetKind kind;
  std::string payload;  // relative path, URL, or text depending on kind
  std::optional<Coords> anchor;
  bool operator==(const ContextAsset&) const = default;
};

struct EventSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - begin; }
  bool operator==(const EventSpan&) const = default;
};

struct Step {
  std::size_t index = 0;
  StepKind kind = StepKind::Unknown;
  KmSubprocess subprocess = KmSubprocess::NoProcess;
  EventSpan event_span;
  std::string primary_url;
  std::string summary;
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
  std::vector<ContextAsset> context;
  bool operator==(const Step&) const = default;
};

// ---------------------------------------------------------------------------
// Mapping rules

struct Rule {
  std::vector<EventKind> on;  // empty matches every kind
  std::string url;            // regex source, empty matches anything
  std::string element;        // matched against element_kind
  std::string text;           // matched against element_name or element_text
  StepKind step = StepKind::Unknown;
};

/// Ordered rule table. Patterns are ECMAScript regexes, case-insensitive,
/// searched anywhere in the field. A missing field is matched as "".
class MappingRules {
 public:
  static constexpr std::int64_t kDefaultCoalesceGapMs = 10'000;

  MappingRules() = default;
  MappingRules(std::vector<Rule> rules, std::int64_t coalesce_gap_ms) : coalesce_gap_ms_(coalesce_gap_ms) {
    if (coalesce_gap_ms < 0) throw Error(ErrorCode::InvalidRules, "coalesce_gap_ms must be non-negative");
    compiled_.reserve(rules.size());
    for (auto& rule : rules) compiled_.push_back(compile(std::move(rule)));
  }

  std::vector<Rule> rules() const {
    std::vector<Rule> out;
    for (const auto& c : compiled_) out.push_back(c.rule);
    return out;
  }
  std::int64_t coalesce_gap_ms() const { return coalesce_gap_ms_; }

  /// First matching rule's step kind; Unknown when nothing matches.
  StepKind classify(const RawEvent& e) const {
    for (const auto& c : compiled_) {
      if (matches(c, e)) return c.rule.step;
    }
    return StepKind::Unknown;
  }

  static MappingRules from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
      throw Error(ErrorCode::InvalidRules, "expected an object with a 'rules' array");
    }
    std::int64_t gap = kDefaultCoalesceGapMs;
    if (j.contains("coalesce_gap_ms")) {
      if (!j["coalesce_gap_ms"].is_number_integer()) {
        throw Error(ErrorCode::InvalidRules, "coalesce_gap_ms must be an integer");
      }
      gap = j["coalesce_gap_ms"].get<std::int64_t>();
    }
    std::vector<Rule> rules;
    for (const auto& r : j["rules"]) {
      if (!r.is_object()) throw Error(ErrorCode::InvalidRules, "rule must be an object");
      Rule rule;
      if (r.contains("on")) {
        if (!r["on"].is_array()) throw Error(ErrorCode::InvalidRules, "'on' must be an array of event kinds");
        for (const auto& k : r["on"]) {
          auto kind = k.is_string() ? parse_event_kind(k.get<std::string>()) : std::nullopt;
          if (!kind) throw Error(ErrorCode::InvalidRules, "unknown event kind in 'on': " + k.dump());
          rule.on.push_back(*kind);
        }
      }
      auto str = [&](const char* key) -> std::string {
        if (!r.contains(key)) return {};
        if (!r[key].is_string()) throw Error(ErrorCode::InvalidRules, std::string("'") + key + "' must be a string");
        return r[key].get<std::string>();
      };
      rule.url = str("url");
      rule.element = str("element");
      rule.text = str("text");
      auto step = parse_step_kind(str("step"));
      if (!step) throw Error(ErrorCode::InvalidRules, "rule has missing or unknown 'step'");
      rule.step = *step;
      rules.push_back(std::move(rule));
    }
    return MappingRules(std::move(rules), gap);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["coalesce_gap_ms"] = coalesce_gap_ms_;
    j["rules"] = nlohmann::ordered_json::array();
    for (const auto& c : compiled_) {
      nlohmann::ordered_json r;
      r["on"] = nlohmann::ordered_json::array();
      for (auto k : c.rule.on) r["on"].push_back(std::string(to_string(k)));
      if (!c.rule.url.empty()) r["url"] = c.rule.url;
      if (!c.rule.element.empty()) r["element"] = c.rule.element;
      if (!c.rule.text.empty()) r["text"] = c.rule.text;
      r["step"] = std::string(to_string(c.rule.step));
      j["rules"].push_back(std::move(r));
    }
    return j;
  }

  static MappingRules load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open rules file " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidRules, "rules file is not valid JSON: " + path.string());
    return from_json(j);
  }

 private:
  struct Compiled {
    Rule rule;
    std::optional<std::regex> url, element, text;
  };

  static std::optional<std::regex> make_regex(const std::string& src) {
    if (src.empty()) return std::nullopt;
    try {
      return std::regex(src, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error&) {
      throw Error(ErrorCode::InvalidRules, "invalid regex: " + src);
    }
  }

  static Compiled compile(Rule rule) {
    Compiled c;
    c.url = make_regex(rule.url);
    c.element = make_regex(rule.element);
    c.text = make_regex(rule.text);
    c.rule = std::move(rule);
    return c;
  }

  static bool search(const std::regex& re, const std::optional<std::string>& field) {
    return std::regex_search(field ? *field : std::string(), re);
  }

  static bool matches(const Compiled& c, const RawEvent& e) {
    if (!c.rule.on.empty() && std::find(c.rule.on.begin(), c.rule.on.end(), e.kind) == c.rule.on.end()) {
      return false;
    }
    if (c.url && !std::regex_search(e.url, *c.url)) return false;
    if (c.element && !search(*c.element, e.element_kind)) return false;
    if (c.text && !search(*c.text, e.element_name) && !search(*c.text, e.element_text)) return false;
    return true;
  }

  std::vector<Compiled> compiled_;
  std::int64_t coalesce_gap_ms_ = kDefaultCoalesceGapMs;
};

/// The shipped default table (mirrored in rules/default.json).
inline const MappingRules& default_rules() {
  using K = EventKind;
  static const MappingRules rules(
      {
          {{K::Navigate, K::SwitchTab}, "", "", "", StepKind::Navigate},
          {{K::Keyup, K::Click, K::Focus, K::Change, K::Submit}, "", "", "search|query|find", StepKind::Search},
          {{K::Keyup, K::Click, K::Submit}, "[?&]q=|search", "", "", StepKind::Search},
          {{K::Click}, "", "", "recommend", StepKind::ApplyRecommendation},
          {{K::Click}, "", "", "tutorial|video|help", StepKind::ApplyResource},
          {{K::Change}, "", "^file$", "", StepKind::Upload},
          {{K::Submit}, "", "", "", StepKind::Upload},
          {{K::Click, K::Change}, "upload", "", "", StepKind::Upload},
          {{K::Keyup, K::Change, K::Focus}, "", "", "comment|annot|note", StepKind::Annotate},
          {{K::Keyup, K::Change, K::Focus}, "reader|policy|/doc|\\.pdf", "^textarea$", "", StepKind::Annotate},
          {{K::Keyup, K::Change, K::Focus}, "", "^(input|textarea|select|checkbox|radio|text|number)$", "",
           StepKind::Fill},
          {{K::Select}, "", "", "", StepKind::Highlight},
          {{K::Scroll}, "", "", "", StepKind::Navigate},
          {{K::Click}, "", "^(a|anchor|link)$", "", StepKind::Navigate},
      },
      MappingRules::kDefaultCoalesceGapMs);
  return rules;
}

inline StepKind classify_event(const RawEvent& e, const MappingRules& rules) { return rules.classify(e); }

// ---------------------------------------------------------------------------
// Step construction

/// Host and path of a URL, without scheme, query, or fragment.
inline std::string url_host_path(std::string_view url) {
  if (auto scheme = url.find("://"); scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
  if (auto cut = url.find_first_of("?#"); cut != std::string_view::npos) url = url.substr(0, cut);
  return std::string(url);
}

namespace detail {

inline std::string clip(std::string s, std::size_t max_len = 60) {
  if (s.size() <= max_len) return s;
  std::size_t cut = max_len;
  // Do not split a UTF-8 sequence.
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut) + "...";
}

inline std::string quoted(const std::string& s) { return "\"" + clip(s) + "\""; }

/// Concatenates single-character key values; named keys (Enter, Shift) are skipped.
inline std::string typed_text(const std::vector<RawEvent>& events, EventSpan span) {
  std::string out;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    const auto& e = events[i];
    if (e.kind != EventKind::Keyup || !e.key_value) continue;
    const auto& k = *e.key_value;
    if (k == "Backspace") {
      if (!out.empty()) out.pop_back();
    } else if (k == "Space") {
      out += ' ';
    } else if (k.size() == 1) {
      out += k;
    }
  }
  return out;
}

template <typename Field>
std::optional<std::string> first_of(const std::vector<RawEvent>& events, EventSpan span, Field field) {
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (const auto& v = field(events[i]); v && !v->empty()) return *v;
  }
  return std::nullopt;
}

template <typename Field>
std::optional<std::string> last_of(const std::vector<RawEvent>& events, EventSpan span, Field field) {
  for (std::size_t i = span.end; i > span.begin; --i) {
    if (const auto& v = field(events[i - 1]); v && !v->empty()) return *v;
  }
  return std::nullopt;
}

inline std::string summarize(StepKind kind, const std::vector<RawEvent>& events, EventSpan span) {
  const std::string page = url_host_path(events[span.begin].url);
  auto name = first_of(events, span, [](const RawEvent& e) -> const auto& { return e.element_name; });
  auto label = first_of(events, span, [](const RawEvent& e) -> const auto& { return e.element_text; });
  auto value = last_of(events, span, [](const RawEvent& e) -> const auto& { return e.new_value; });
  auto selected = first_of(events, span, [](const RawEvent& e) -> const auto& { return e.selected_text; });
  const std::string typed = typed_text(events, span);
  std::string detail;

  switch (kind) {
    case StepKind::Navigate: detail = page; break;
    case StepKind::Search:
      if (!typed.empty()) detail = detail::quoted(typed) + " on " + page;
      else if (label) detail = detail::quoted(*label) + " on " + page;
      else detail = page;
      break;
    case StepKind::Fill: {
      detail = name ? *name : std::string("form");
      if (value) detail += " = " + detail::quoted(*value);
      else if (!typed.empty()) detail += " = " + detail::quoted(typed);
      detail += " on " + page;
      break;
    }
    case StepKind::Upload:
      if (value) detail = detail::quoted(*value) + " on " + page;
      else detail = "form on " + page;
      break;
    case StepKind::Annotate:
      detail = selected ? detail::quoted(*selected) : page;
      if (value) detail += " with note " + detail::quoted(*value);
      else if (!typed.empty()) detail += " with note " + detail::quoted(typed);
      break;
    case StepKind::Highlight: detail = selected ? detail::quoted(*selected) + " on " + page : page; break;
    case StepKind::ApplyResource:
    case StepKind::ApplyRecommendation: detail = (label ? detail::quoted(*label) : page) + " on " + page; break;
    case StepKind::Unknown: detail = std::string(to_string(events[span.begin].kind)) + " on " + page; break;
  }
  return std::string(plain_label(kind)) + ": " + detail;
}

}  // namespace detail

/// Partitions the log into maximal runs of events sharing step kind and
/// page (host+path) with inter-event gaps within the coalescing window. A
/// Select immediately followed, within the window and on the same page, by
/// an event classified ANNOTATE is itself treated as ANNOTATE.
inline std::vector<Step> map_steps(const EventLog& log, const MappingRules& rules = default_rules()) {
  const auto& events = log.events;
  if (events.empty()) throw Error(ErrorCode::EmptyLog, "cannot map steps of an empty log");

  std::vector<StepKind> kinds(events.size());
  std::vector<std::string> pages(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    kinds[i] = rules.classify(events[i]);
    pages[i] = url_host_path(events[i].url);
  }
  const auto gap_ok = [&](std::size_t i) {
    return events[i + 1].timestamp - events[i].timestamp <= rules.coalesce_gap_ms();
  };
  // Lookahead pass runs right-to-left so a run of selections before a note all join it.
  for (std::size_t i = events.size() - 1; i-- > 0;) {
    if (events[i].kind == EventKind::Select && kinds[i + 1] == StepKind::Annotate && pages[i] == pages[i + 1] &&
        gap_ok(i)) {
      kinds[i] = StepKind::Annotate;
    }
  }

  std::vector<Step> steps;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= events.size(); ++i) {
    const bool boundary =
        i == events.size() || kinds[i] != kinds[begin] || pages[i] != pages[begin] || !gap_ok(i - 1);
    if (!boundary) continue;
    Step s;
    s.index = steps.size();
    s.kind = kinds[begin];
    s.subprocess = taxonomy(s.kind);
    s.event_span = {begin, i};
    s.primary_url = events[begin].url;
    s.start_ts = events[begin].timestamp;
    s.end_ts = events[i - 1].timestamp;
    s.summary = detail::summarize(s.kind, events, s.event_span);
    steps.push_back(std::move(s));
    begin = i;
  }
  return steps;
}

/// Harvests context assets from each step's span, in event order:
/// screenshots, highlighted text, and (inside ANNOTATE steps) annotation
/// text; then one Link per distinct URL.
inline std::vector<Step> attach_context(std::vector<Step> steps, const EventLog& log,
                                        const std::filesystem::path& asset_dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(asset_dir, ec)) {
    throw Error(ErrorCode::AssetDirMissing, asset_dir.string());
  }
  for (auto& step : steps) {
    std::vector<ContextAsset> assets;
    std::vector<std::string> urls;
    std::set<std::string> seen_shots, seen_urls;
    for (std::size_t i = step.event_span.begin; i < step.event_span.end; ++i) {
      const RawEvent& e = log.events.at(i);
      if (e.screenshot_ref && seen_shots.insert(*e.screenshot_ref).second) {
        assets.push_back({AssetKind::Screenshot, *e.screenshot_ref, e.coords});
      }
      if (e.selected_text && !e.selected_text->empty()) {
        assets.push_back({AssetKind::HighlightedText, *e.selected_text, e.coords});
      }
      if (step.kind == StepKind::Annotate && e.kind == EventKind::Change && e.new_value && !e.new_value->empty()) {
        assets.push_back({AssetKind::Annotation, *e.new_value, e.coords});
      }
      if (seen_urls.insert(e.url).second) urls.push_back(e.url);
    }
    for (auto& url : urls) assets.push_back({AssetKind::Link, std::move(url), std::nullopt});
    step.context = std::move(assets);
  }
  return steps;
}

}  // namespace vpr
