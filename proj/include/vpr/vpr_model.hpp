#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vpr/error.hpp"
#include "vpr/pattern_miner.hpp"
#include "vpr/step_mapper.hpp"

namespace vpr {

inline constexpr int kDocumentVersion = 1;
inline constexpr std::string_view kDocumentFormat = "vpr-document";

// ---------------------------------------------------------------------------
// Pictograph dictionary

struct Glyph {
  StepKind step_kind;
  std::string_view symbol_id;
  std::string_view vector_markup;  // children of a 24x24 <symbol>
  std::string_view caption_template;
};

namespace detail {

// clang-format off
inline constexpr std::array<Glyph, 9> kGlyphs = {{
    {StepKind::Navigate, "glyph-navigate",
     "<circle cx=\"12\" cy=\"12\" r=\"9\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M12 5l3 7-3 7-3-7z\" fill=\"currentColor\"/>",
     "Go to: {detail}"},
    {StepKind::Search, "glyph-search",
     "<circle cx=\"10\" cy=\"10\" r=\"6\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M14.5 14.5L20 20\" stroke=\"currentColor\" stroke-width=\"2.5\" stroke-linecap=\"round\"/>",
     "Find: {detail}"},
    {StepKind::Fill, "glyph-fill",
     "<rect x=\"4\" y=\"3\" width=\"16\" height=\"18\" rx=\"2\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M7 8h10M7 12h10M7 16h6\" stroke=\"currentColor\" stroke-width=\"2\"/>",
     "Fill in: {detail}"},
    {StepKind::Upload, "glyph-upload",
     "<path d=\"M4 15v4h16v-4\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M12 15V4M7 9l5-5 5 5\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>",
     "Upload: {detail}"},
    {StepKind::Annotate, "glyph-annotate",
     "<path d=\"M5 3h9l5 5v13H5z\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M9 17l1-3 6-6 2 2-6 6z\" fill=\"currentColor\"/>",
     "Annotate: {detail}"},
    {StepKind::Highlight, "glyph-highlight",
     "<path d=\"M14 3l5 5-8 8H6v-5z\" fill=\"currentColor\"/>"
     "<path d=\"M4 21h16\" stroke=\"currentColor\" stroke-width=\"3\"/>",
     "Highlight: {detail}"},
    {StepKind::ApplyResource, "glyph-apply-resource",
     "<circle cx=\"12\" cy=\"12\" r=\"9\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M10 8l6 4-6 4z\" fill=\"currentColor\"/>",
     "Use resource: {detail}"},
    {StepKind::ApplyRecommendation, "glyph-apply-recommendation",
     "<path d=\"M12 2l2 7 7 3-7 3-2 7-2-7-7-3 7-3z\" fill=\"currentColor\"/>",
     "Follow recommendation: {detail}"},
    {StepKind::Unknown, "glyph-unknown",
     "<circle cx=\"12\" cy=\"12\" r=\"9\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<path d=\"M9.5 9a2.5 2.5 0 1 1 3.5 2.3c-.8.4-1 1-1 1.7v.5\" fill=\"none\" stroke=\"currentColor\" stroke-width=\"2\"/>"
     "<circle cx=\"12\" cy=\"17\" r=\"1.2\" fill=\"currentColor\"/>",
     "Other action: {detail}"},
}};
// clang-format on

}  // namespace detail

inline const Glyph& glyph_for(StepKind kind) {
  for (const auto& g : detail::kGlyphs) {
    if (g.step_kind == kind) return g;
  }
  return detail::kGlyphs.back();
}

inline const std::array<Glyph, 9>& glyph_dictionary() { return detail::kGlyphs; }

// ---------------------------------------------------------------------------
// Document

struct AssetRef {
  std::string media_type;
  std::optional<std::uintmax_t> size;  // bytes, when the file was found at build time
  bool operator==(const AssetRef&) const = default;
};

struct VprDocument {
  int version = kDocumentVersion;
  std::string title;
  std::string actor_id;
  std::int64_t created_at = 0;
  std::vector<Section> sections;
  std::vector<Step> steps;
  std::vector<Pattern> patterns;
  std::vector<Variant> variants;
  std::map<std::string, AssetRef> assets;
  std::vector<std::size_t> decision_points;

  bool operator==(const VprDocument&) const = default;
};

struct Panel {
  std::size_t step_index = 0;
  std::string_view glyph;
  std::string caption;
  bool emphasized = false;
  bool context_visible = false;
};

inline const std::string& step_caption(const Step& step) { return step.summary; }

inline bool is_decision_point(const VprDocument& doc, std::size_t step_index) {
  return std::binary_search(doc.decision_points.begin(), doc.decision_points.end(), step_index);
}

/// One panel per step, in step order.
inline std::vector<Panel> make_panels(const VprDocument& doc, bool context_visible) {
  std::vector<Panel> out;
  out.reserve(doc.steps.size());
  for (const auto& s : doc.steps) {
    out.push_back({s.index, glyph_for(s.kind).symbol_id, step_caption(s), is_decision_point(doc, s.index),
                   context_visible && !s.context.empty()});
  }
  return out;
}

/// First step of the first section and of every section whose parent
/// process differs from the previous section's (NoProcess counts as its
/// own parent).
inline std::vector<std::size_t> decision_points_for(const std::vector<Section>& sections) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i == 0 || parent(sections[i].subprocess) != parent(sections[i - 1].subprocess)) {
      out.push_back(sections[i].steps.begin);
    }
  }
  return out;
}

inline std::string media_type_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

/// Throws InconsistentSections or MissingTitle. An empty document (no steps,
/// no sections) is structurally valid; renderers reject it.
inline void validate_document(const VprDocument& doc) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InconsistentSections, msg); };
  if (doc.title.empty()) throw Error(ErrorCode::MissingTitle, "document title is empty");

  const std::size_t n = doc.steps.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Step& s = doc.steps[i];
    if (s.index != i) fail("step " + std::to_string(i) + " has index " + std::to_string(s.index));
    if (s.subprocess != taxonomy(s.kind)) fail("step " + std::to_string(i) + " subprocess disagrees with its kind");
    if (s.event_span.size() == 0 || s.event_span.begin > s.event_span.end) fail("step " + std::to_string(i) + " has an empty span");
    if (i > 0 && s.event_span.begin != doc.steps[i - 1].event_span.end) {
      fail("step " + std::to_string(i) + " span is not contiguous with the previous step");
    }
    if (s.end_ts < s.start_ts) fail("step " + std::to_string(i) + " ends before it starts");
  }

  std::size_t expected_begin = 0;
  for (std::size_t k = 0; k < doc.sections.size(); ++k) {
    const Section& sec = doc.sections[k];
    if (sec.index != k) fail("section " + std::to_string(k) + " has index " + std::to_string(sec.index));
    if (sec.steps.begin != expected_begin || sec.steps.end <= sec.steps.begin) {
      fail("section " + std::to_string(k) + " does not continue the previous section");
    }
    if (sec.steps.end > n) fail("section " + std::to_string(k) + " references step index beyond " + std::to_string(n));
    for (std::size_t i = sec.steps.begin; i < sec.steps.end; ++i) {
      if (doc.steps[i].subprocess != sec.subprocess) {
        fail("step " + std::to_string(i) + " does not belong to section " + std::to_string(k));
      }
    }
    if (k > 0 && doc.sections[k - 1].subprocess == sec.subprocess) {
      fail("sections " + std::to_string(k - 1) + " and " + std::to_string(k) + " are not maximal");
    }
    expected_begin = sec.steps.end;
  }
  if (expected_begin != n) fail("sections do not cover all steps");

  for (std::size_t i = 0; i < doc.decision_points.size(); ++i) {
    if (doc.decision_points[i] >= n) fail("decision point beyond the last step");
    if (i > 0 && doc.decision_points[i] <= doc.decision_points[i - 1]) fail("decision points must be ascending");
  }
}

struct BuildOptions {
  std::string actor_id;
  std::optional<std::int64_t> created_at;  // defaults to the last step's end time
  // Replaces templated section titles when set.
  std::function<std::string(const Section&, const std::vector<Step>&)> section_title;
};

inline VprDocument build_document(std::vector<Step> steps, std::vector<Section> sections, std::vector<Pattern> patterns,
                                  std::vector<Variant> variants, std::string title,
                                  const std::filesystem::path& asset_dir, const BuildOptions& options = {}) {
  if (title.empty()) throw Error(ErrorCode::MissingTitle, "a document needs a title");
  if (steps.empty()) throw Error(ErrorCode::EmptySteps, "a document needs at least one step");

  VprDocument doc;
  doc.title = std::move(title);
  doc.actor_id = options.actor_id;
  doc.created_at = options.created_at.value_or(steps.back().end_ts);
  doc.steps = std::move(steps);
  doc.sections = std::move(sections);
  doc.patterns = std::move(patterns);
  doc.variants = std::move(variants);
  validate_document(doc);

  if (options.section_title) {
    for (auto& sec : doc.sections) sec.title = options.section_title(sec, doc.steps);
  }
  doc.decision_points = decision_points_for(doc.sections);

  for (const auto& s : doc.steps) {
    for (const auto& a : s.context) {
      if (a.kind != AssetKind::Screenshot || doc.assets.contains(a.payload)) continue;
      AssetRef ref{media_type_for(a.payload), std::nullopt};
      std::error_code ec;
      if (auto size = std::filesystem::file_size(asset_dir / a.payload, ec); !ec) ref.size = size;
      doc.assets.emplace(a.payload, std::move(ref));
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

using DocJson = nlohmann::ordered_json;

inline DocJson kinds_to_json(const std::vector<StepKind>& kinds) {
  DocJson arr = DocJson::array();
  for (auto k : kinds) arr.push_back(std::string(to_string(k)));
  return arr;
}

inline std::vector<StepKind> kinds_from_json(const DocJson& arr) {
  std::vector<StepKind> out;
  for (const auto& k : arr) {
    auto kind = parse_step_kind(k.get<std::string>());
    if (!kind) throw Error(ErrorCode::CorruptDocument, "unknown step kind " + k.dump());
    out.push_back(*kind);
  }
  return out;
}

inline KmSubprocess subprocess_from_json(const DocJson& j) {
  auto s = parse_subprocess(j.get<std::string>());
  if (!s) throw Error(ErrorCode::CorruptDocument, "unknown subprocess " + j.dump());
  return *s;
}

}  // namespace detail

/// Pretty-printed JSON with a fixed key order; byte-identical for equal documents.
inline std::string serialize_document(const VprDocument& doc) {
  using J = detail::DocJson;
  J j;
  j["format"] = std::string(kDocumentFormat);
  j["version"] = doc.version;
  j["title"] = doc.title;
  j["actor_id"] = doc.actor_id;
  j["created_at"] = doc.created_at;
  j["decision_points"] = doc.decision_points;

  j["sections"] = J::array();
  for (const auto& s : doc.sections) {
    J o;
    o["index"] = s.index;
    o["subprocess"] = std::string(to_string(s.subprocess));
    o["title"] = s.title;
    o["steps"] = {s.steps.begin, s.steps.end};
    j["sections"].push_back(std::move(o));
  }

  j["steps"] = J::array();
  for (const auto& s : doc.steps) {
    J o;
    o["index"] = s.index;
    o["kind"] = std::string(to_string(s.kind));
    o["subprocess"] = std::string(to_string(s.subprocess));
    o["span"] = {s.event_span.begin, s.event_span.end};
    o["url"] = s.primary_url;
    o["summary"] = s.summary;
    o["start_ts"] = s.start_ts;
    o["end_ts"] = s.end_ts;
    o["context"] = J::array();
    for (const auto& a : s.context) {
      J c;
      c["kind"] = std::string(to_string(a.kind));
      c["payload"] = a.payload;
      if (a.anchor) c["anchor"] = {a.anchor->x, a.anchor->y};
      o["context"].push_back(std::move(c));
    }
    j["steps"].push_back(std::move(o));
  }

  j["patterns"] = J::array();
  for (const auto& p : doc.patterns) {
    J o;
    o["kinds"] = detail::kinds_to_json(p.kinds);
    o["support"] = p.support;
    j["patterns"].push_back(std::move(o));
  }

  j["variants"] = J::array();
  for (const auto& v : doc.variants) {
    J o;
    o["kinds"] = detail::kinds_to_json(v.kinds);
    o["count"] = v.count;
    o["trace_ids"] = v.trace_ids;
    j["variants"].push_back(std::move(o));
  }

  j["assets"] = J::object();
  for (const auto& [path, ref] : doc.assets) {
    J o;
    o["media_type"] = ref.media_type;
    o["size"] = ref.size ? J(*ref.size) : J(nullptr);
    j["assets"][path] = std::move(o);
  }
  return j.dump(2) + "\n";
}

/// Inverse of serialize_document. Throws SchemaVersionMismatch for other
/// versions and CorruptDocument for anything malformed or inconsistent.
inline VprDocument deserialize_document(std::string_view bytes) {
  using J = detail::DocJson;
  auto j = J::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::CorruptDocument, "not a JSON object");
  if (!j.contains("format") || j["format"] != std::string(kDocumentFormat)) {
    throw Error(ErrorCode::CorruptDocument, "missing or wrong 'format' tag");
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw Error(ErrorCode::CorruptDocument, "missing 'version'");
  }
  if (j["version"].get<int>() != kDocumentVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "document version " + j["version"].dump() + ", expected " + std::to_string(kDocumentVersion));
  }

  VprDocument doc;
  try {
    doc.version = j.at("version").get<int>();
    doc.title = j.at("title").get<std::string>();
    doc.actor_id = j.at("actor_id").get<std::string>();
    doc.created_at = j.at("created_at").get<std::int64_t>();
    doc.decision_points = j.at("decision_points").get<std::vector<std::size_t>>();
    for (const auto& o : j.at("sections")) {
      Section s;
      s.index = o.at("index").get<std::size_t>();
      s.subprocess = detail::subprocess_from_json(o.at("subprocess"));
      s.title = o.at("title").get<std::string>();
      s.steps = {o.at("steps").at(0).get<std::size_t>(), o.at("steps").at(1).get<std::size_t>()};
      doc.sections.push_back(std::move(s));
    }
    for (const auto& o : j.at("steps")) {
      Step s;
      s.index = o.at("index").get<std::size_t>();
      auto kind = parse_step_kind(o.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::CorruptDocument, "unknown step kind");
      s.kind = *kind;
      s.subprocess = detail::subprocess_from_json(o.at("subprocess"));
      s.event_span = {o.at("span").at(0).get<std::size_t>(), o.at("span").at(1).get<std::size_t>()};
      s.primary_url = o.at("url").get<std::string>();
      s.summary = o.at("summary").get<std::string>();
      s.start_ts = o.at("start_ts").get<std::int64_t>();
      s.end_ts = o.at("end_ts").get<std::int64_t>();
      for (const auto& c : o.at("context")) {
        auto akind = parse_asset_kind(c.at("kind").get<std::string>());
        if (!akind) throw Error(ErrorCode::CorruptDocument, "unknown asset kind");
        ContextAsset a{*akind, c.at("payload").get<std::string>(), std::nullopt};
        if (c.contains("anchor")) a.anchor = Coords{c["anchor"].at(0).get<std::int64_t>(), c["anchor"].at(1).get<std::int64_t>()};
        s.context.push_back(std::move(a));
      }
      doc.steps.push_back(std::move(s));
    }
    for (const auto& o : j.at("patterns")) {
      doc.patterns.push_back({detail::kinds_from_json(o.at("kinds")), o.at("support").get<std::size_t>()});
    }
    for (const auto& o : j.at("variants")) {
      doc.variants.push_back({detail::kinds_from_json(o.at("kinds")), o.at("count").get<std::size_t>(),
                              o.at("trace_ids").get<std::vector<std::string>>()});
    }
    for (const auto& [path, o] : j.at("assets").items()) {
      AssetRef ref{o.at("media_type").get<std::string>(), std::nullopt};
      if (o.contains("size") && !o["size"].is_null()) ref.size = o["size"].get<std::uintmax_t>();
      doc.assets.emplace(path, std::move(ref));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptDocument, e.what());
  }

  try {
    validate_document(doc);
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptDocument, e.what());
  }
  return doc;
}

}  // namespace vpr
