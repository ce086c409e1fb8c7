#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "golden.hpp"
#include "support.hpp"
#include "vpr/renderer.hpp"

namespace vpr {
namespace {

using testing::count_of;
using testing::make_step;
using testing::strip_context_blocks;

constexpr Format kFormats[] = {Format::P1, Format::P2, Format::P3, Format::P4};

struct Fixture {
  std::filesystem::path assets;
  VprDocument doc;
  RenderEnvironment env;
};

Fixture ten_steps() {
  Fixture f;
  f.assets = testing::scratch_dir("render-assets");
  f.doc = testing::ten_step_document(f.assets);
  f.env.asset_dir = f.assets;
  return f;
}

VprDocument three_steps() {
  std::vector<Step> steps = {make_step(0, StepKind::Navigate, 0, 2, 1000), make_step(1, StepKind::Search, 2, 3, 5000),
                             make_step(2, StepKind::Annotate, 3, 5, 9000)};
  steps[0].context.push_back({AssetKind::Link, "https://lms/a", std::nullopt});
  steps[2].context.push_back({AssetKind::Annotation, "remember", std::nullopt});
  return build_document(steps, sectionize(steps), {}, {}, "Three steps", "");
}

RenderConfig cfg_for(Format f, OutputKind kind = OutputKind::InteractiveDocument) {
  RenderConfig cfg;
  cfg.format = f;
  cfg.output_kind = kind;
  return cfg;
}

std::vector<std::string> captions(const std::string& html) {
  static const std::regex re(R"(<span class="vpr-caption">([^<]*)</span>|</span>([^<]*)</figcaption>)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].matched ? (*it)[1].str() : (*it)[2].str());
  }
  return out;
}

TEST(Render, TextualListOfThree) {
  const auto html = render(three_steps(), cfg_for(Format::P1));
  EXPECT_EQ(count_of(html, "<li class=\"vpr-step"), 3u);
  EXPECT_EQ(count_of(html, "vpr-context\""), 0u);
  EXPECT_EQ(count_of(html, "<img"), 0u);
  EXPECT_EQ(count_of(html, "<figure"), 0u);
}

TEST(Render, PanelsOfThree) {
  const auto html = render(three_steps(), cfg_for(Format::P2));
  EXPECT_EQ(count_of(html, "<figure class=\"vpr-panel"), 3u);
  EXPECT_EQ(count_of(html, "<li class=\"vpr-step"), 0u);
  std::set<std::string> ids;
  for (const auto& g : glyph_dictionary()) ids.insert(std::string(g.symbol_id));
  static const std::regex glyph(R"re(data-glyph="([^"]+)")re");
  std::size_t seen = 0;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), glyph); it != std::sregex_iterator(); ++it, ++seen) {
    EXPECT_TRUE(ids.contains((*it)[1].str()));
  }
  EXPECT_EQ(seen, 3u);
  // Every referenced glyph has a definition in the file.
  for (const auto& id : ids) EXPECT_EQ(count_of(html, "<symbol id=\"" + id + "\""), 1u);
}

TEST(Render, ContextFormatsAddOnlyContextBlocks) {
  auto f = ten_steps();
  const auto p1 = render(f.doc, cfg_for(Format::P1), f.env);
  const auto p2 = render(f.doc, cfg_for(Format::P2), f.env);
  const auto p3 = render(f.doc, cfg_for(Format::P3), f.env);
  const auto p4 = render(f.doc, cfg_for(Format::P4), f.env);
  EXPECT_EQ(strip_context_blocks(p3), p1);
  EXPECT_EQ(strip_context_blocks(p4), p2);
  EXPECT_EQ(captions(p1), captions(p3));
  EXPECT_EQ(captions(p2), captions(p4));
  EXPECT_EQ(captions(p1), captions(p2));
  EXPECT_EQ(captions(p1).size(), 10u);
}

TEST(Render, ContextBlocksCarryEveryAsset) {
  auto f = ten_steps();
  const auto p3 = render(f.doc, cfg_for(Format::P3), f.env);
  std::size_t with_context = 0;
  for (const auto& s : f.doc.steps) {
    if (s.context.empty()) continue;
    ++with_context;
    for (const auto& a : s.context) {
      switch (a.kind) {
        case AssetKind::Screenshot: EXPECT_EQ(count_of(p3, "data-asset=\"" + a.payload + "\""), 1u); break;
        case AssetKind::Link: EXPECT_EQ(count_of(p3, "<a href=\"" + a.payload + "\""), 1u); break;
        case AssetKind::HighlightedText: EXPECT_NE(p3.find(xml_escape(a.payload)), std::string::npos); break;
        case AssetKind::Annotation: EXPECT_NE(p3.find("Note: " + xml_escape(a.payload)), std::string::npos); break;
      }
    }
  }
  EXPECT_EQ(count_of(p3, "<div class=\"vpr-context\">"), with_context);
  EXPECT_EQ(count_of(p3, "<img class=\"vpr-shot\" src=\"data:image/png;base64,"), 4u);
}

TEST(Render, LinksAppearOncePerStep) {
  auto f = ten_steps();
  for (auto fmt : {Format::P3, Format::P4}) {
    const auto html = render(f.doc, cfg_for(fmt), f.env);
    static const std::regex step_block(R"re(id="vpr-step-(\d+)"[\s\S]*?(</li>|</figure>))re");
    for (auto it = std::sregex_iterator(html.begin(), html.end(), step_block); it != std::sregex_iterator(); ++it) {
      const auto& step = f.doc.steps.at(std::stoul((*it)[1].str()));
      const std::string block = (*it)[0].str();
      for (const auto& a : step.context) {
        if (a.kind == AssetKind::Link) EXPECT_EQ(count_of(block, "href=\"" + a.payload + "\""), 1u);
      }
    }
  }
}

TEST(Render, DecisionPointsAreEmphasized) {
  auto f = ten_steps();
  const auto html = render(f.doc, cfg_for(Format::P1), f.env);
  EXPECT_EQ(count_of(html, "vpr-step vpr-decision\""), f.doc.decision_points.size());
  for (auto i : f.doc.decision_points) {
    EXPECT_NE(html.find("<li class=\"vpr-step vpr-decision\" id=\"vpr-step-" + std::to_string(i) + "\""), std::string::npos);
  }
  EXPECT_NE(html.find(".vpr-decision{border-left-color:#c0392b}"), std::string::npos);
  const auto p2 = render(f.doc, cfg_for(Format::P2), f.env);
  EXPECT_EQ(count_of(p2, "vpr-panel vpr-decision\""), f.doc.decision_points.size());
}

TEST(Render, SelfContained) {
  auto f = ten_steps();
  RenderEnvironment env = f.env;
  env.runtime_bundle = "console.log('viewer bundle 1.2');\n";
  for (auto fmt : kFormats) {
    const auto html = render(f.doc, cfg_for(fmt), env);
    EXPECT_EQ(count_of(html, "<script src"), 0u);
    EXPECT_EQ(count_of(html, "<link "), 0u);
    EXPECT_EQ(count_of(html, "src=\"http"), 0u);
    EXPECT_EQ(count_of(html, "url(http"), 0u);
    EXPECT_EQ(count_of(html, "id=\"vpr-data\""), 1u);
    EXPECT_NE(html.find("console.log('viewer bundle 1.2');"), std::string::npos);
    EXPECT_EQ(extract_document(html), f.doc);
  }
}

TEST(Render, PayloadSurvivesScriptTerminators) {
  auto steps = std::vector<Step>{make_step(0, StepKind::Fill, 0, 1, 10)};
  steps[0].summary = "Fill in: </script><!-- trick";
  auto doc = build_document(steps, sectionize(steps), {}, {}, "</script>", "");
  const auto html = render(doc, cfg_for(Format::P1));
  EXPECT_EQ(extract_document(html), doc);
  EXPECT_EQ(count_of(html, "</script>"), 2u);
}

TEST(Render, Deterministic) {
  auto f = ten_steps();
  for (auto fmt : kFormats) {
    for (auto kind : {OutputKind::InteractiveDocument, OutputKind::StaticVector}) {
      EXPECT_EQ(render(f.doc, cfg_for(fmt, kind), f.env), render(f.doc, cfg_for(fmt, kind), f.env));
    }
  }
}

TEST(Render, Goldens) {
  auto f = ten_steps();
  for (auto fmt : kFormats) {
    std::string name(to_string(fmt));
    name[0] = 'p';
    EXPECT_EQ(testing::check_golden("fixture." + name + ".vpr.html", render(f.doc, cfg_for(fmt), f.env)), "");
    EXPECT_EQ(testing::check_golden("fixture." + name + ".vpr.svg",
                                    render(f.doc, cfg_for(fmt, OutputKind::StaticVector), f.env)),
              "");
  }
}

TEST(Render, UnresolvedAssetsAreListed) {
  auto f = ten_steps();
  std::filesystem::remove(f.assets / "shot-0.png");
  std::filesystem::remove(f.assets / "shot-6.png");
  try {
    render(f.doc, cfg_for(Format::P3), f.env);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnresolvedAsset);
    EXPECT_NE(std::string(e.what()).find("shot-0.png"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("shot-6.png"), std::string::npos);
  }
  // Formats without context, and linked assets, do not need the files.
  EXPECT_NO_THROW(render(f.doc, cfg_for(Format::P1), f.env));
  EXPECT_NO_THROW(render(f.doc, cfg_for(Format::P2), f.env));
  auto linked = cfg_for(Format::P4);
  linked.embed_assets = false;
  const auto html = render(f.doc, linked, f.env);
  EXPECT_NE(html.find("src=\"assets/shot-0.png\""), std::string::npos);
}

TEST(Render, Errors) {
  VprDocument empty;
  empty.title = "Nothing";
  try {
    render(empty, cfg_for(Format::P1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDocument);
  }
  auto cfg = cfg_for(Format::P1);
  cfg.color_scheme = "neon";
  try {
    render(three_steps(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPalette);
  }
  auto broken = three_steps();
  broken.title.clear();
  try {
    render(broken, cfg_for(Format::P1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingTitle);
  }
}

TEST(Render, StaticVector) {
  auto f = ten_steps();
  const auto p1 = render(f.doc, cfg_for(Format::P1, OutputKind::StaticVector), f.env);
  const auto p2 = render(f.doc, cfg_for(Format::P2, OutputKind::StaticVector), f.env);
  const auto p3 = render(f.doc, cfg_for(Format::P3, OutputKind::StaticVector), f.env);
  const auto p4 = render(f.doc, cfg_for(Format::P4, OutputKind::StaticVector), f.env);
  EXPECT_TRUE(p1.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
  EXPECT_EQ(count_of(p1, "<text class=\"vpr-step\""), 10u);
  EXPECT_EQ(count_of(p3, "<text class=\"vpr-step\""), 10u);
  EXPECT_EQ(count_of(p2, "<g class=\"vpr-panel\""), 10u);
  EXPECT_EQ(count_of(p4, "<g class=\"vpr-panel\""), 10u);
  EXPECT_EQ(count_of(p1, "vpr-context"), 0u);
  EXPECT_EQ(count_of(p2, "vpr-context"), 0u);
  EXPECT_GT(count_of(p3, "<g class=\"vpr-context\""), 0u);
  EXPECT_EQ(count_of(p4, "<image class=\"vpr-shot\""), 4u);
  for (const auto* svg : {&p1, &p2, &p3, &p4}) {
    EXPECT_EQ(count_of(*svg, "<script"), 0u);
    EXPECT_EQ(count_of(*svg, "<g class=\"vpr-ov-entry\""), f.doc.sections.size());
  }
}

TEST(Overview, EntriesInSectionOrder) {
  const auto doc = three_steps();
  ASSERT_EQ(doc.sections.size(), 3u);
  const auto nav = render_overview(doc);
  EXPECT_EQ(count_of(nav, "<li class=\"vpr-ov-entry\""), doc.sections.size());
  std::size_t last = 0;
  for (const auto& sec : doc.sections) {
    auto pos = nav.find("href=\"#vpr-section-" + std::to_string(sec.index) + "\"");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GT(pos, last);
    last = pos;
  }
}

TEST(Overview, ThreeAndOneSections) {
  std::vector<Step> steps = {make_step(0, StepKind::Navigate, 0, 1, 1), make_step(1, StepKind::Search, 1, 2, 2),
                             make_step(2, StepKind::Fill, 2, 3, 3)};
  auto doc = build_document(steps, sectionize(steps), {}, {}, "T", "");
  EXPECT_EQ(count_of(render_overview(doc), "<a href=\"#vpr-section-"), 3u);
  std::vector<Step> one = {make_step(0, StepKind::Fill, 0, 1, 1)};
  auto single = build_document(one, sectionize(one), {}, {}, "T", "");
  EXPECT_EQ(count_of(render_overview(single), "<a href=\"#vpr-section-"), 1u);
}

TEST(Overview, AdjacentColorsDiffer) {
  for (const auto& palette : kPalettes) {
    RenderConfig cfg;
    cfg.color_scheme = std::string(palette.name);
    for (auto a : kAllStepKinds) {
      for (auto b : kAllStepKinds) {
        if (taxonomy(a) == taxonomy(b)) continue;
        std::vector<Step> steps = {make_step(0, a, 0, 1, 1), make_step(1, b, 1, 2, 2)};
        auto doc = build_document(steps, sectionize(steps), {}, {}, "T", "");
        static const std::regex color(R"(--vpr-color:(#[0-9a-f]{6}))");
        const auto nav = render_overview(doc, cfg);
        std::vector<std::string> colors;
        for (auto it = std::sregex_iterator(nav.begin(), nav.end(), color); it != std::sregex_iterator(); ++it) {
          colors.push_back((*it)[1].str());
        }
        ASSERT_EQ(colors.size(), 2u);
        EXPECT_NE(colors[0], colors[1]) << to_string(a) << " " << to_string(b);
      }
    }
  }
}

TEST(Overview, SharedHuePerParentProcess) {
  // Subprocesses of one parent share a hue family: same dominant channel.
  const auto& p = palette_named("default");
  auto dominant = [](std::string_view hex) {
    const int r = std::stoi(std::string(hex.substr(1, 2)), nullptr, 16);
    const int g = std::stoi(std::string(hex.substr(3, 2)), nullptr, 16);
    const int b = std::stoi(std::string(hex.substr(5, 2)), nullptr, 16);
    return std::array{r, g, b};
  };
  for (auto s : kAllSubprocesses) {
    for (auto t : kAllSubprocesses) {
      if (s == t || !parent(s) || parent(s) != parent(t)) continue;
      EXPECT_NE(p.subprocess[static_cast<std::size_t>(s)], p.subprocess[static_cast<std::size_t>(t)]);
      const auto a = dominant(p.subprocess[static_cast<std::size_t>(s)]);
      const auto b = dominant(p.subprocess[static_cast<std::size_t>(t)]);
      EXPECT_EQ(std::max_element(a.begin(), a.end()) - a.begin(), std::max_element(b.begin(), b.end()) - b.begin());
    }
  }
}

TEST(Overview, SectionColorsOff) {
  auto f = ten_steps();
  RenderConfig cfg;
  cfg.section_colors = false;
  const auto nav = render_overview(f.doc, cfg);
  EXPECT_EQ(count_of(nav, "--vpr-color:#607d8b"), f.doc.sections.size());
}

TEST(Properties, StructuralCountsOnRandomDocuments) {
  std::mt19937_64 rng(404);
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<Step> steps;
    for (std::size_t i = 0, n = 1 + rng() % 25; i < n; ++i) {
      auto s = make_step(i, kAllStepKinds[rng() % kAllStepKinds.size()], i, i + 1, static_cast<std::int64_t>(10 * (i + 1)));
      if (rng() % 2) s.context.push_back({AssetKind::Link, "https://h/" + std::to_string(rng() % 50), std::nullopt});
      if (rng() % 3 == 0) s.context.push_back({AssetKind::HighlightedText, "a < b & c", std::nullopt});
      steps.push_back(std::move(s));
    }
    auto doc = build_document(steps, sectionize(steps), {}, {}, "Random", "");
    const auto p1 = render(doc, cfg_for(Format::P1));
    const auto p2 = render(doc, cfg_for(Format::P2));
    const auto p3 = render(doc, cfg_for(Format::P3));
    const auto p4 = render(doc, cfg_for(Format::P4));
    EXPECT_EQ(count_of(p1, "<li class=\"vpr-step"), steps.size());
    EXPECT_EQ(count_of(p3, "<li class=\"vpr-step"), steps.size());
    EXPECT_EQ(count_of(p2, "<figure class=\"vpr-panel"), steps.size());
    EXPECT_EQ(count_of(p4, "<figure class=\"vpr-panel"), steps.size());
    EXPECT_EQ(strip_context_blocks(p3), p1);
    EXPECT_EQ(strip_context_blocks(p4), p2);
    EXPECT_EQ(count_of(render_overview(doc), "<li class=\"vpr-ov-entry\""), doc.sections.size());
  }
}

TEST(Formats, Parsing) {
  EXPECT_EQ(parse_format("p3"), Format::P3);
  EXPECT_EQ(parse_format("P4"), Format::P4);
  EXPECT_EQ(parse_format("p5"), std::nullopt);
  EXPECT_FALSE(is_pictorial(Format::P1));
  EXPECT_TRUE(is_pictorial(Format::P2));
  EXPECT_FALSE(includes_context(Format::P2));
  EXPECT_TRUE(includes_context(Format::P3));
}

}  // namespace
}  // namespace vpr
