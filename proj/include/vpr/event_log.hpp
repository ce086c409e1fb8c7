#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vpr/error.hpp"

namespace vpr {

using OrderedJson = nlohmann::ordered_json;

enum class EventKind { Click, Keyup, Select, Scroll, SwitchTab, Focus, Change, Submit, Navigate, Close };

inline constexpr std::array<EventKind, 10> kAllEventKinds = {
    EventKind::Click,  EventKind::Keyup,  EventKind::Select, EventKind::Scroll,   EventKind::SwitchTab,
    EventKind::Focus,  EventKind::Change, EventKind::Submit, EventKind::Navigate, EventKind::Close};

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Click: return "click";
    case EventKind::Keyup: return "keyup";
    case EventKind::Select: return "select";
    case EventKind::Scroll: return "scroll";
    case EventKind::SwitchTab: return "switchtab";
    case EventKind::Focus: return "focus";
    case EventKind::Change: return "change";
    case EventKind::Submit: return "submit";
    case EventKind::Navigate: return "navigate";
    case EventKind::Close: return "close";
  }
  return "?";
}

inline std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "switch-tab") return EventKind::SwitchTab;
  for (EventKind kind : kAllEventKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

struct Coords {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const Coords&) const = default;
};

struct RawEvent {
  EventKind kind = EventKind::Navigate;
  std::int64_t timestamp = 0;  // ms since epoch, UTC
  std::string url;
  std::optional<std::string> element_name;
  std::optional<std::string> element_kind;
  std::optional<std::string> element_text;
  std::optional<Coords> coords;
  std::optional<std::string> key_value;
  std::optional<std::string> selected_text;
  std::optional<std::int64_t> scroll_dx;
  std::optional<std::int64_t> scroll_dy;
  std::optional<std::string> new_value;
  std::string actor_id;
  std::optional<std::string> screenshot_ref;
  // Keys not part of the schema, kept in input order so serialization round-trips.
  OrderedJson extra = OrderedJson::object();

  bool operator==(const RawEvent&) const = default;
};

/// Immutable after construction; events are sorted by timestamp (stable).
struct EventLog {
  std::vector<RawEvent> events;
  std::string actor_id;
  std::string task_title;
  std::optional<std::string> capture_notes;

  bool operator==(const EventLog&) const = default;
};

enum class DiagnosticKind { DuplicateTimestamp, NonHttpUrl, IdleGap, DanglingAsset, OutOfOrder, SkippedRecord };

inline std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::DuplicateTimestamp: return "DuplicateTimestamp";
    case DiagnosticKind::NonHttpUrl: return "NonHttpUrl";
    case DiagnosticKind::IdleGap: return "IdleGap";
    case DiagnosticKind::DanglingAsset: return "DanglingAsset";
    case DiagnosticKind::OutOfOrder: return "OutOfOrder";
    case DiagnosticKind::SkippedRecord: return "SkippedRecord";
  }
  return "?";
}

struct Diagnostic {
  DiagnosticKind kind;
  std::optional<std::size_t> event_index;
  std::optional<std::size_t> line;
  std::string message;
};

inline std::string format_diagnostic(const Diagnostic& d) {
  std::string out = "warning: ";
  out += to_string(d.kind);
  if (d.line) out += " line " + std::to_string(*d.line);
  if (d.event_index) out += " event #" + std::to_string(*d.event_index);
  if (!d.message.empty()) out += ": " + d.message;
  return out;
}

struct ParseOptions {
  // Strict parsing throws on the first bad record and on an empty stream.
  // Lenient parsing skips bad records and reports them as diagnostics.
  bool strict = true;
};

struct ParseResult {
  EventLog log;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<std::string> opt_string(const OrderedJson& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::MalformedRecord, std::string("field '") + key + "' must be a string", line);
  }
  return it->get<std::string>();
}

inline std::optional<std::int64_t> opt_int(const OrderedJson& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw Error(ErrorCode::MalformedRecord, std::string("field '") + key + "' must be an integer", line);
  }
  return it->get<std::int64_t>();
}

inline constexpr std::array<const char*, 15> kSchemaKeys = {
    "kind", "ts", "url", "actor", "el_name", "el_kind", "el_text", "x", "y", "key", "sel", "dx", "dy", "val", "shot"};

inline bool is_schema_key(const std::string& key) {
  return std::any_of(kSchemaKeys.begin(), kSchemaKeys.end(), [&](const char* k) { return key == k; });
}

inline void require(bool present, const char* field, std::size_t line) {
  if (!present) throw Error(ErrorCode::MissingField, field, line);
}

}  // namespace detail

/// Decodes one event object. `line` is only used for error reporting.
inline RawEvent event_from_json(const OrderedJson& obj, std::size_t line) {
  using detail::opt_int;
  using detail::opt_string;
  if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object", line);

  RawEvent e;
  auto kind_text = opt_string(obj, "kind", line);
  detail::require(kind_text.has_value(), "kind", line);
  auto kind = parse_event_kind(*kind_text);
  if (!kind) throw Error(ErrorCode::UnknownEventKind, *kind_text, line);
  e.kind = *kind;

  auto ts = opt_int(obj, "ts", line);
  detail::require(ts.has_value(), "ts", line);
  if (*ts <= 0) throw Error(ErrorCode::MalformedRecord, "timestamp must be positive", line);
  e.timestamp = *ts;

  auto url = opt_string(obj, "url", line);
  detail::require(url.has_value() && !url->empty(), "url", line);
  e.url = *url;

  auto actor = opt_string(obj, "actor", line);
  detail::require(actor.has_value(), "actor", line);
  e.actor_id = *actor;

  e.element_name = opt_string(obj, "el_name", line);
  e.element_kind = opt_string(obj, "el_kind", line);
  e.element_text = opt_string(obj, "el_text", line);
  auto x = opt_int(obj, "x", line);
  auto y = opt_int(obj, "y", line);
  if (x.has_value() != y.has_value()) detail::require(false, x ? "y" : "x", line);
  if (x) {
    if (*x < 0 || *y < 0) throw Error(ErrorCode::MalformedRecord, "coordinates must be non-negative", line);
    e.coords = Coords{*x, *y};
  }
  e.key_value = opt_string(obj, "key", line);
  e.selected_text = opt_string(obj, "sel", line);
  e.scroll_dx = opt_int(obj, "dx", line);
  e.scroll_dy = opt_int(obj, "dy", line);
  e.new_value = opt_string(obj, "val", line);
  e.screenshot_ref = opt_string(obj, "shot", line);

  switch (e.kind) {
    case EventKind::Click: detail::require(e.coords.has_value(), "x", line); break;
    case EventKind::Keyup: detail::require(e.key_value.has_value(), "key", line); break;
    case EventKind::Select: detail::require(e.selected_text.has_value(), "sel", line); break;
    case EventKind::Scroll: detail::require(e.scroll_dx || e.scroll_dy, "dx", line); break;
    case EventKind::Change: detail::require(e.new_value.has_value(), "val", line); break;
    default: break;
  }

  for (const auto& [key, value] : obj.items()) {
    if (!detail::is_schema_key(key)) e.extra[key] = value;
  }
  return e;
}

inline OrderedJson event_to_json(const RawEvent& e) {
  OrderedJson j = OrderedJson::object();
  j["kind"] = std::string(to_string(e.kind));
  j["ts"] = e.timestamp;
  j["url"] = e.url;
  j["actor"] = e.actor_id;
  if (e.element_name) j["el_name"] = *e.element_name;
  if (e.element_kind) j["el_kind"] = *e.element_kind;
  if (e.element_text) j["el_text"] = *e.element_text;
  if (e.coords) {
    j["x"] = e.coords->x;
    j["y"] = e.coords->y;
  }
  if (e.key_value) j["key"] = *e.key_value;
  if (e.selected_text) j["sel"] = *e.selected_text;
  if (e.scroll_dx) j["dx"] = *e.scroll_dx;
  if (e.scroll_dy) j["dy"] = *e.scroll_dy;
  if (e.new_value) j["val"] = *e.new_value;
  if (e.screenshot_ref) j["shot"] = *e.screenshot_ref;
  for (const auto& [key, value] : e.extra.items()) j[key] = value;
  return j;
}

/// Reads newline-delimited event records. A leading `{"log": {"task": ..,
/// "notes": ..}}` record carries the task title and capture notes.
/// Out-of-order input is stably sorted and reported as an OutOfOrder
/// diagnostic.
inline ParseResult read_log(std::istream& in, const ParseOptions& options = {}) {
  ParseResult result;
  EventLog& log = result.log;
  std::vector<std::size_t> lines;
  std::string raw;
  std::size_t line_no = 0;
  bool have_actor = false;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto text = detail::trim(raw);
    if (text.empty()) continue;
    try {
      auto obj = OrderedJson::parse(text, nullptr, /*allow_exceptions=*/false);
      if (obj.is_discarded()) throw Error(ErrorCode::MalformedRecord, "not a JSON object", line_no);
      if (obj.is_object() && obj.contains("log") && !obj.contains("kind")) {
        const auto& meta = obj["log"];
        if (!meta.is_object()) throw Error(ErrorCode::MalformedRecord, "'log' must be an object", line_no);
        if (auto task = detail::opt_string(meta, "task", line_no)) log.task_title = *task;
        log.capture_notes = detail::opt_string(meta, "notes", line_no);
        continue;
      }
      RawEvent e = event_from_json(obj, line_no);
      if (!have_actor) {
        log.actor_id = e.actor_id;
        have_actor = true;
      } else if (e.actor_id != log.actor_id) {
        throw Error(ErrorCode::MixedActors, "expected actor '" + log.actor_id + "', got '" + e.actor_id + "'",
                    line_no);
      }
      log.events.push_back(std::move(e));
      lines.push_back(line_no);
    } catch (const Error& err) {
      if (options.strict) throw;
      result.diagnostics.push_back({DiagnosticKind::SkippedRecord, std::nullopt, line_no, err.what()});
    }
  }

  if (log.events.empty() && options.strict) throw Error(ErrorCode::EmptyLog, "no event records");

  const bool sorted = std::is_sorted(log.events.begin(), log.events.end(),
                                     [](const RawEvent& a, const RawEvent& b) { return a.timestamp < b.timestamp; });
  if (!sorted) {
    std::vector<std::size_t> order(log.events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return log.events[a].timestamp < log.events[b].timestamp;
    });
    std::vector<RawEvent> reordered;
    reordered.reserve(order.size());
    for (std::size_t idx : order) reordered.push_back(std::move(log.events[idx]));
    log.events = std::move(reordered);
    result.diagnostics.push_back({DiagnosticKind::OutOfOrder, std::nullopt, std::nullopt,
                                  "input was not sorted by timestamp; events were reordered"});
  }
  return result;
}

inline EventLog parse_log(std::istream& in, const ParseOptions& options = {}) {
  return read_log(in, options).log;
}

inline EventLog parse_log(std::string_view text, const ParseOptions& options = {}) {
  std::istringstream in{std::string(text)};
  return parse_log(in, options);
}

inline std::string serialize_log(const EventLog& log) {
  std::string out;
  if (!log.task_title.empty() || log.capture_notes) {
    OrderedJson meta = OrderedJson::object();
    if (!log.task_title.empty()) meta["task"] = log.task_title;
    if (log.capture_notes) meta["notes"] = *log.capture_notes;
    OrderedJson header = OrderedJson::object();
    header["log"] = meta;
    out += header.dump();
    out += '\n';
  }
  for (const auto& e : log.events) {
    out += event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

struct ValidateOptions {
  std::int64_t idle_threshold_ms = 120'000;
  // Screenshot references are checked only when an asset directory is given.
  std::optional<std::filesystem::path> asset_dir;
};

inline std::vector<Diagnostic> validate_log(const EventLog& log, const ValidateOptions& options = {}) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const RawEvent& e = log.events[i];
    if (!(e.url.starts_with("http://") || e.url.starts_with("https://"))) {
      out.push_back({DiagnosticKind::NonHttpUrl, i, std::nullopt, e.url});
    }
    if (i > 0) {
      const auto gap = e.timestamp - log.events[i - 1].timestamp;
      if (gap == 0) {
        out.push_back({DiagnosticKind::DuplicateTimestamp, i, std::nullopt, std::to_string(e.timestamp)});
      } else if (gap > options.idle_threshold_ms) {
        out.push_back({DiagnosticKind::IdleGap, i, std::nullopt, std::to_string(gap) + " ms idle"});
      }
    }
    if (options.asset_dir && e.screenshot_ref) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(*options.asset_dir / *e.screenshot_ref, ec)) {
        out.push_back({DiagnosticKind::DanglingAsset, i, std::nullopt, *e.screenshot_ref});
      }
    }
  }
  return out;
}

}  // namespace vpr
