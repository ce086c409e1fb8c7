#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vpr/error.hpp"
#include "vpr/text.hpp"
#include "vpr/vpr_model.hpp"

namespace vpr {

enum class Format { P1, P2, P3, P4 };
enum class OutputKind { InteractiveDocument, StaticVector };

inline std::string_view to_string(Format f) {
  switch (f) {
    case Format::P1: return "P1";
    case Format::P2: return "P2";
    case Format::P3: return "P3";
    case Format::P4: return "P4";
  }
  return "?";
}

inline std::optional<Format> parse_format(std::string_view text) {
  if (text == "p1" || text == "P1") return Format::P1;
  if (text == "p2" || text == "P2") return Format::P2;
  if (text == "p3" || text == "P3") return Format::P3;
  if (text == "p4" || text == "P4") return Format::P4;
  return std::nullopt;
}

/// P2 and P4 draw panels with glyphs; P1 and P3 are numbered lists.
inline bool is_pictorial(Format f) { return f == Format::P2 || f == Format::P4; }
/// P3 and P4 carry screenshots, links, highlights and annotations.
inline bool includes_context(Format f) { return f == Format::P3 || f == Format::P4; }

struct RenderConfig {
  Format format = Format::P1;
  bool embed_assets = true;
  std::string color_scheme = "default";
  bool section_colors = true;
  OutputKind output_kind = OutputKind::InteractiveDocument;
};

/// Placeholder for the interactive viewer bundle; real builds pass the
/// compiled bundle through RenderEnvironment::runtime_bundle.
inline constexpr std::string_view kStubRuntime =
    "/* vpr viewer runtime: stub bundle, no interactivity */\n"
    "window.VPR_RUNTIME = { version: \"stub\" };\n";

struct RenderEnvironment {
  std::filesystem::path asset_dir = "assets";
  // Prefix for asset references when assets are not embedded.
  std::string asset_href_base = "assets";
  std::string runtime_bundle = std::string(kStubRuntime);
};

// ---------------------------------------------------------------------------
// Palettes

struct Palette {
  std::string_view name;
  std::array<std::string_view, 9> subprocess;  // indexed by KmSubprocess
  std::string_view neutral;
  std::string_view emphasis;
};

// One hue per parent process, two shades for its two subprocesses.
inline constexpr std::array<Palette, 2> kPalettes = {{
    {"default",
     {"#1f5fa8", "#5b9bd5", "#2e7d32", "#66bb6a", "#6a1b9a", "#ab47bc", "#e65100", "#ffa726", "#9e9e9e"},
     "#607d8b",
     "#c0392b"},
    {"print",
     {"#0d3c73", "#3d7ab8", "#1b5e20", "#4c8c4a", "#4a148c", "#7b3f99", "#a33a00", "#c77800", "#6d6d6d"},
     "#455a64",
     "#b71c1c"},
}};

inline const Palette& palette_named(std::string_view name) {
  for (const auto& p : kPalettes) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::UnknownPalette, std::string(name));
}

inline std::string_view section_color(const Section& section, const RenderConfig& cfg) {
  const Palette& p = palette_named(cfg.color_scheme);
  return cfg.section_colors ? p.subprocess[static_cast<std::size_t>(section.subprocess)] : p.neutral;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Resolves every screenshot the document references. Throws
/// UnresolvedAsset naming all missing paths.
class AssetResolver {
 public:
  AssetResolver(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env)
      : cfg_(cfg), env_(env) {
    if (!includes_context(cfg.format) || !cfg.embed_assets) return;
    std::vector<std::string> missing;
    for (const auto& s : doc.steps) {
      for (const auto& a : s.context) {
        if (a.kind != AssetKind::Screenshot || data_.contains(a.payload)) continue;
        const auto path = env.asset_dir / a.payload;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec)) {
          if (std::find(missing.begin(), missing.end(), a.payload) == missing.end()) missing.push_back(a.payload);
          continue;
        }
        data_.emplace(a.payload, "data:" + media_type_for(a.payload) + ";base64," + base64_encode(read_file(path)));
      }
    }
    if (!missing.empty()) {
      std::string msg;
      for (const auto& m : missing) msg += (msg.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::UnresolvedAsset, msg);
    }
  }

  std::string href(const std::string& path) const {
    if (cfg_.embed_assets) return data_.at(path);
    return env_.asset_href_base.empty() ? path : env_.asset_href_base + "/" + path;
  }

 private:
  const RenderConfig& cfg_;
  const RenderEnvironment& env_;
  std::map<std::string, std::string> data_;
};

inline std::string section_process(const Section& s) {
  auto p = parent(s.subprocess);
  return p ? std::string(to_string(*p)) : std::string("None");
}

/// Highest-support mined pattern, longest among equals; needs length >= 2.
inline const Pattern* common_path(const VprDocument& doc) {
  const Pattern* best = nullptr;
  for (const auto& p : doc.patterns) {
    if (p.kinds.size() < 2) continue;
    if (!best || p.support > best->support || (p.support == best->support && p.kinds.size() > best->kinds.size()))
      best = &p;
  }
  return best;
}

inline std::string glyph_defs_html() {
  std::string out = "<svg class=\"vpr-glyph-defs\" aria-hidden=\"true\" width=\"0\" height=\"0\"><defs>\n";
  for (const auto& g : glyph_dictionary()) {
    out += "<symbol id=\"";
    out += g.symbol_id;
    out += "\" viewBox=\"0 0 24 24\">";
    out += g.vector_markup;
    out += "</symbol>\n";
  }
  out += "</defs></svg>\n";
  return out;
}

inline std::string context_block_html(const Step& step, const AssetResolver& assets) {
  if (step.context.empty()) return {};
  std::string out = "<div class=\"vpr-context\">\n";
  std::string links;
  for (const auto& a : step.context) {
    switch (a.kind) {
      case AssetKind::Screenshot:
        out += "<img class=\"vpr-shot\" src=\"" + xml_escape(assets.href(a.payload)) + "\" alt=\"Screenshot for step " +
               std::to_string(step.index + 1) + "\" data-asset=\"" + xml_escape(a.payload) + "\" loading=\"lazy\">\n";
        break;
      case AssetKind::HighlightedText:
        out += "<blockquote class=\"vpr-highlight\">" + xml_escape(a.payload) + "</blockquote>\n";
        break;
      case AssetKind::Annotation:
        out += "<p class=\"vpr-annotation\">Note: " + xml_escape(a.payload) + "</p>\n";
        break;
      case AssetKind::Link:
        links += "<li><a href=\"" + xml_escape(a.payload) + "\" rel=\"noopener\">" + xml_escape(url_host_path(a.payload)) +
                 "</a></li>";
        break;
    }
  }
  if (!links.empty()) out += "<ul class=\"vpr-links\">" + links + "</ul>\n";
  out += "</div>\n";
  return out;
}

inline constexpr std::string_view kStyleSheet =
    "body.vpr{margin:0;font-family:system-ui,-apple-system,'Segoe UI',sans-serif;color:#222;background:#fafafa}"
    ".vpr-header,.vpr-main,.vpr-overview,.vpr-common-path{max-width:52rem;margin:0 auto;padding:0 1rem}"
    ".vpr-overview{position:sticky;top:0;background:#fff;border-bottom:1px solid #ddd;z-index:2}"
    ".vpr-overview ol{display:flex;flex-wrap:wrap;gap:.4rem;list-style:none;margin:0;padding:.5rem 0}"
    ".vpr-ov-entry a{display:block;padding:.25rem .6rem;border-radius:1rem;color:#fff;background:var(--vpr-color);"
    "text-decoration:none;font-size:.85rem}"
    ".vpr-ov-entry.vpr-active a{outline:3px solid #222}"
    ".vpr-ov-entry.vpr-done a{opacity:.6}"
    ".vpr-section{border-left:6px solid var(--vpr-color);margin:1.5rem 0;padding:.25rem 1rem;background:#fff}"
    ".vpr-steps{padding-left:0;list-style:none}"
    ".vpr-step,.vpr-panel{margin:.6rem 0;padding:.5rem;border-radius:6px}"
    ".vpr-num{font-weight:700;margin-right:.4rem}"
    ".vpr-decision{border-left:4px solid #c0392b;background:#fdecea}"
    ".vpr-panels{display:grid;grid-template-columns:repeat(auto-fill,minmax(14rem,1fr));gap:.8rem}"
    ".vpr-panel{border:2px solid var(--vpr-color);text-align:center}"
    ".vpr-glyph{width:3rem;height:3rem;color:var(--vpr-color)}"
    ".vpr-context{margin-top:.4rem;font-size:.9rem;text-align:left}"
    ".vpr-shot{max-width:100%;width:12rem;cursor:zoom-in;border:1px solid #ccc}"
    ".vpr-highlight{background:#fff59d;margin:.3rem 0;padding:.2rem .5rem}"
    ".vpr-context-off .vpr-context{display:none}"
    ".vpr-completed{opacity:.55;text-decoration:line-through}"
    "@media (max-width:40rem){.vpr-panels{grid-template-columns:1fr}}";

inline std::string payload_for_script(const VprDocument& doc) {
  std::string json = serialize_document(doc);
  std::string out;
  out.reserve(json.size());
  for (std::size_t i = 0; i < json.size(); ++i) {
    // "<\/" is a valid JSON escape for "</" and keeps the script block closed.
    if (json[i] == '<' && i + 1 < json.size() && json[i + 1] == '/') {
      out += "<\\/";
      ++i;
    } else if (json.compare(i, 4, "<!--") == 0) {
      out += "<\\u0021--";
      i += 3;
    } else {
      out += json[i];
    }
  }
  return out;
}

inline std::string render_html(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env);
inline std::string render_svg(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env);

}  // namespace detail

/// Navigation strip: one entry per section, in order, colored by subprocess.
inline std::string render_overview(const VprDocument& doc, const RenderConfig& cfg = {}) {
  std::string out = "<nav class=\"vpr-overview\" id=\"vpr-overview\" aria-label=\"Process overview\">\n<ol>\n";
  for (const auto& s : doc.sections) {
    const auto idx = std::to_string(s.index);
    out += "<li class=\"vpr-ov-entry\" data-section=\"" + idx + "\" style=\"--vpr-color:" +
           std::string(section_color(s, cfg)) + "\"><a href=\"#vpr-section-" + idx + "\">" + xml_escape(s.title) +
           "</a></li>\n";
  }
  out += "</ol>\n</nav>\n";
  return out;
}

/// Renders one of the four formats as a self-contained HTML document or a
/// static SVG. Output is a pure function of (doc, cfg, env contents).
inline std::string render(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env = {}) {
  validate_document(doc);
  if (doc.steps.empty()) throw Error(ErrorCode::EmptyDocument, "nothing to render");
  palette_named(cfg.color_scheme);
  return cfg.output_kind == OutputKind::InteractiveDocument ? detail::render_html(doc, cfg, env)
                                                           : detail::render_svg(doc, cfg, env);
}

/// Recovers the document embedded in an interactive render.
inline VprDocument extract_document(std::string_view html) {
  constexpr std::string_view open = "<script type=\"application/json\" id=\"vpr-data\">";
  const auto start = html.find(open);
  if (start == std::string_view::npos) throw Error(ErrorCode::CorruptDocument, "no vpr-data block");
  const auto body = start + open.size();
  const auto stop = html.find("</script>", body);
  if (stop == std::string_view::npos) throw Error(ErrorCode::CorruptDocument, "unterminated vpr-data block");
  return deserialize_document(html.substr(body, stop - body));
}

namespace detail {

inline std::string render_html(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env) {
  const AssetResolver assets(doc, cfg, env);
  const bool pictorial = is_pictorial(cfg.format);
  const bool context = includes_context(cfg.format);
  const Palette& palette = palette_named(cfg.color_scheme);

  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
  out += "<title>" + xml_escape(doc.title) + "</title>\n";
  out += "<style>";
  out += kStyleSheet;
  out += ".vpr-decision{border-left-color:";
  out += palette.emphasis;
  out += "}</style>\n</head>\n<body class=\"vpr\">\n";

  out += "<header class=\"vpr-header\">\n<h1 class=\"vpr-title\">" + xml_escape(doc.title) + "</h1>\n";
  out += "<p class=\"vpr-meta\">" + std::to_string(doc.steps.size()) + " steps in " +
         std::to_string(doc.sections.size()) + " sections</p>\n</header>\n";
  out += render_overview(doc, cfg);
  if (const Pattern* path = common_path(doc)) {
    out += "<p class=\"vpr-common-path\">Common path: ";
    for (std::size_t i = 0; i < path->kinds.size(); ++i) {
      if (i) out += " &rarr; ";
      out += plain_label(path->kinds[i]);
    }
    out += " (" + std::to_string(path->support) + (path->support == 1 ? " trace)</p>\n" : " traces)</p>\n");
  }

  out += "<main class=\"vpr-main\">\n";
  for (const auto& sec : doc.sections) {
    const auto idx = std::to_string(sec.index);
    out += "<section class=\"vpr-section\" id=\"vpr-section-" + idx + "\" data-section=\"" + idx +
           "\" data-subprocess=\"" + std::string(to_string(sec.subprocess)) + "\" data-process=\"" +
           section_process(sec) + "\" style=\"--vpr-color:" + std::string(section_color(sec, cfg)) + "\">\n";
    out += "<h2 class=\"vpr-section-title\">" + xml_escape(sec.title) + "</h2>\n";
    out += pictorial ? "<div class=\"vpr-panels\">\n" : "<ol class=\"vpr-steps\" start=\"" +
                                                         std::to_string(sec.steps.begin + 1) + "\">\n";
    for (std::size_t i = sec.steps.begin; i < sec.steps.end; ++i) {
      const Step& step = doc.steps[i];
      const std::string num = std::to_string(i + 1);
      const std::string emphasis = is_decision_point(doc, i) ? " vpr-decision" : "";
      const std::string caption = xml_escape(step_caption(step));
      const std::string block = context ? context_block_html(step, assets) : std::string();
      if (pictorial) {
        const Glyph& g = glyph_for(step.kind);
        out += "<figure class=\"vpr-panel" + emphasis + "\" id=\"vpr-step-" + std::to_string(i) + "\" data-step=\"" +
               std::to_string(i) + "\" data-glyph=\"" + std::string(g.symbol_id) +
               "\"><svg class=\"vpr-glyph\" viewBox=\"0 0 24 24\" role=\"img\" aria-label=\"" +
               std::string(plain_label(step.kind)) + "\"><use href=\"#" + std::string(g.symbol_id) +
               "\"/></svg><figcaption class=\"vpr-caption\"><span class=\"vpr-num\">" + num + "</span>" + caption +
               "</figcaption>\n" + block + "</figure>\n";
      } else {
        out += "<li class=\"vpr-step" + emphasis + "\" id=\"vpr-step-" + std::to_string(i) + "\" data-step=\"" +
               std::to_string(i) + "\"><span class=\"vpr-num\">" + num + "</span><span class=\"vpr-caption\">" +
               caption + "</span>\n" + block + "</li>\n";
      }
    }
    out += pictorial ? "</div>\n" : "</ol>\n";
    out += "</section>\n";
  }
  out += "</main>\n";
  if (pictorial) out += glyph_defs_html();
  out += "<script type=\"application/json\" id=\"vpr-data\">" + payload_for_script(doc) + "</script>\n";
  out += "<script id=\"vpr-runtime\">\n" + env.runtime_bundle + "</script>\n";
  out += "</body>\n</html>\n";
  return out;
}

inline std::string render_svg(const VprDocument& doc, const RenderConfig& cfg, const RenderEnvironment& env) {
  const AssetResolver assets(doc, cfg, env);
  const bool pictorial = is_pictorial(cfg.format);
  const bool context = includes_context(cfg.format);
  const Palette& palette = palette_named(cfg.color_scheme);
  constexpr int kWidth = 800;
  constexpr int kMargin = 24;

  std::ostringstream body;
  int y = 44;
  body << "<text class=\"vpr-title\" x=\"" << kMargin << "\" y=\"" << y
       << "\" font-size=\"22\" font-weight=\"bold\">" << xml_escape(doc.title) << "</text>\n";
  y += 20;

  // Overview strip: numbered chips, one per section.
  body << "<g class=\"vpr-overview\">\n";
  const int chip = std::max(16, std::min(80, (kWidth - 2 * kMargin) / static_cast<int>(doc.sections.size())));
  for (const auto& sec : doc.sections) {
    const int x = kMargin + static_cast<int>(sec.index) * chip;
    body << "<g class=\"vpr-ov-entry\" data-section=\"" << sec.index << "\"><rect x=\"" << x << "\" y=\"" << y
         << "\" width=\"" << chip - 4 << "\" height=\"20\" rx=\"4\" fill=\"" << section_color(sec, cfg)
         << "\"/><text x=\"" << x + 6 << "\" y=\"" << y + 14 << "\" font-size=\"11\" fill=\"#fff\">" << sec.index + 1
         << "</text></g>\n";
  }
  body << "</g>\n";
  y += 44;

  for (const auto& sec : doc.sections) {
    body << "<g class=\"vpr-section\" data-section=\"" << sec.index << "\">\n";
    body << "<rect x=\"" << kMargin << "\" y=\"" << y << "\" width=\"" << kWidth - 2 * kMargin
         << "\" height=\"26\" fill=\"" << section_color(sec, cfg) << "\"/>";
    body << "<text x=\"" << kMargin + 8 << "\" y=\"" << y + 18 << "\" font-size=\"14\" fill=\"#fff\">"
         << xml_escape(sec.title) << "</text>\n";
    y += 36;
    for (std::size_t i = sec.steps.begin; i < sec.steps.end; ++i) {
      const Step& step = doc.steps[i];
      const bool emphasized = is_decision_point(doc, i);
      const std::string caption = std::to_string(i + 1) + ". " + step_caption(step);
      if (pictorial) {
        const Glyph& g = glyph_for(step.kind);
        body << "<g class=\"vpr-panel\" data-step=\"" << i << "\" transform=\"translate(" << kMargin << "," << y
             << ")\"><rect width=\"" << kWidth - 2 * kMargin << "\" height=\"48\" rx=\"6\" fill=\"#fff\" stroke=\""
             << (emphasized ? palette.emphasis : section_color(sec, cfg)) << "\" stroke-width=\""
             << (emphasized ? 3 : 2) << "\"/><use href=\"#" << g.symbol_id
             << "\" x=\"8\" y=\"8\" width=\"32\" height=\"32\" color=\"" << section_color(sec, cfg)
             << "\"/><text x=\"52\" y=\"29\" font-size=\"13\">" << xml_escape(caption) << "</text></g>\n";
        y += 56;
      } else {
        if (emphasized) {
          body << "<rect class=\"vpr-decision\" x=\"" << kMargin << "\" y=\"" << y - 14
               << "\" width=\"4\" height=\"18\" fill=\"" << palette.emphasis << "\"/>";
        }
        body << "<text class=\"vpr-step\" data-step=\"" << i << "\" x=\"" << kMargin + 12 << "\" y=\"" << y
             << "\" font-size=\"13\">" << xml_escape(caption) << "</text>\n";
        y += 22;
      }
      if (!context || step.context.empty()) continue;
      body << "<g class=\"vpr-context\" data-step=\"" << i << "\">\n";
      for (const auto& a : step.context) {
        switch (a.kind) {
          case AssetKind::Screenshot:
            body << "<image class=\"vpr-shot\" x=\"" << kMargin + 12 << "\" y=\"" << y
                 << "\" width=\"160\" height=\"100\" href=\"" << xml_escape(assets.href(a.payload)) << "\"/>\n";
            y += 108;
            break;
          case AssetKind::HighlightedText:
            body << "<text class=\"vpr-highlight\" x=\"" << kMargin + 12 << "\" y=\"" << y + 12
                 << "\" font-size=\"12\" font-style=\"italic\">" << xml_escape("\"" + a.payload + "\"") << "</text>\n";
            y += 18;
            break;
          case AssetKind::Annotation:
            body << "<text class=\"vpr-annotation\" x=\"" << kMargin + 12 << "\" y=\"" << y + 12
                 << "\" font-size=\"12\">" << xml_escape("Note: " + a.payload) << "</text>\n";
            y += 18;
            break;
          case AssetKind::Link:
            body << "<a href=\"" << xml_escape(a.payload) << "\"><text class=\"vpr-link\" x=\"" << kMargin + 12
                 << "\" y=\"" << y + 12 << "\" font-size=\"12\" fill=\"#1a0dab\">" << xml_escape(url_host_path(a.payload))
                 << "</text></a>\n";
            y += 18;
            break;
        }
      }
      body << "</g>\n";
      y += 6;
    }
    body << "</g>\n";
    y += 10;
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << y + kMargin
      << "\" viewBox=\"0 0 " << kWidth << " " << y + kMargin << "\" font-family=\"sans-serif\">\n";
  out << "<title>" << xml_escape(doc.title) << "</title>\n";
  if (pictorial) {
    out << "<defs>\n";
    for (const auto& g : glyph_dictionary()) {
      out << "<symbol id=\"" << g.symbol_id << "\" viewBox=\"0 0 24 24\">" << g.vector_markup << "</symbol>\n";
    }
    out << "</defs>\n";
  }
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n" << body.str() << "</svg>\n";
  return out.str();
}

}  // namespace detail

}  // namespace vpr
