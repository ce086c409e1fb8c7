#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vpr/error.hpp"
#include "vpr/event_log.hpp"
#include "vpr/text.hpp"

namespace vpr {

inline constexpr std::array<std::string_view, 2> kSynthProfiles = {"marking_correction", "poll_creation"};

namespace detail {

/// Emits plausible expert browsing behaviour for one task profile. Only
/// std::mt19937_64 output is used (never std distributions) so logs are
/// identical across standard library implementations.
class LogSynthesizer {
 public:
  LogSynthesizer(std::uint64_t seed, std::size_t n_events, std::string_view profile)
      : rng_(seed), target_(n_events), profile_(profile) {
    ts_ = 1'700'000'000'000 + static_cast<std::int64_t>(seed % 1000) * 86'400'000;
  }

  EventLog run() {
    const bool marking = profile_ == "marking_correction";
    if (marking) {
      open_page("/course/101/gradebook");
      search("rubric");
      read_policy("/policy/marking-moderation.pdf");
    } else {
      open_page("/course/101");
      fill_form("/course/101/poll/new", {"poll_title", "question", "option_1", "option_2"});
      search("poll");
    }
    while (events_.size() < target_) {
      const auto pick = next(100);
      if (marking) {
        if (pick < 18) open_page("/course/101/submission/" + std::to_string(1 + next(40)));
        else if (pick < 30) fill_form("/course/101/submission/" + std::to_string(1 + next(40)), {"grade", "feedback"});
        else if (pick < 42) read_policy("/policy/marking-moderation.pdf");
        else if (pick < 50) search(pick_word({"rubric", "moderation", "late penalty", "criteria"}));
        else if (pick < 58) click_labelled("/course/101/help", "Marking tutorial video");
        else if (pick < 65) click_labelled("/course/101/gradebook", "Recommended rubric");
        else if (pick < 74) submit("/course/101/submission/" + std::to_string(1 + next(40)));
        else if (pick < 80) upload_file("/course/101/upload", "marked_" + std::to_string(1 + next(40)) + ".pdf");
        else if (pick < 88) scroll_page("/course/101/gradebook");
        else if (pick < 94) click_button("/course/101/gradebook", "Next");
        else close_tab("/course/101/submission/" + std::to_string(1 + next(40)));
      } else {
        if (pick < 15) open_page("/course/101/poll/new");
        else if (pick < 35) fill_form("/course/101/poll/new", {"question", "option_" + std::to_string(1 + next(5))});
        else if (pick < 45) search(pick_word({"poll", "feed-forward", "quiz template"}));
        else if (pick < 55) click_labelled("/course/101/poll/new", "Recommended: feed-forward poll template");
        else if (pick < 63) click_labelled("/course/101/help", "Poll help video");
        else if (pick < 71) upload_file("/course/101/poll/new", "poll_banner.png");
        else if (pick < 79) submit("/course/101/poll/new");
        else if (pick < 86) read_policy("/policy/student-feedback.pdf");
        else if (pick < 93) scroll_page("/course/101/poll/new");
        else if (pick < 97) click_button("/course/101/poll/new", "Preview");
        else close_tab("/course/101/poll/preview");
      }
    }
    events_.resize(target_);

    EventLog log;
    log.events = std::move(events_);
    log.actor_id = kActor;
    log.task_title = marking ? "Exam marking to ensure consistency" : "Online poll activity creation";
    log.capture_notes = "synthetic capture";
    return log;
  }

 private:
  static constexpr const char* kActor = "expert-01";
  static constexpr const char* kHost = "https://lms.example.edu";

  std::uint64_t next(std::uint64_t bound) { return rng_() % bound; }

  std::string pick_word(std::initializer_list<const char*> words) {
    return *(words.begin() + next(words.size()));
  }

  // Small pauses keep actions coalesced; the pause between actions sometimes
  // exceeds the default coalescing window so identical actions split.
  void tick_small() { ts_ += 150 + static_cast<std::int64_t>(next(900)); }
  void tick_action() { ts_ += 1'500 + static_cast<std::int64_t>(next(14'000)); }

  RawEvent base(EventKind kind, const std::string& path) {
    RawEvent e;
    e.kind = kind;
    e.timestamp = ts_;
    e.url = kHost + path;
    e.actor_id = kActor;
    return e;
  }

  std::string new_shot() {
    char name[32];
    std::snprintf(name, sizeof name, "shot-%04zu.svg", ++shots_);
    return name;
  }

  void emit(RawEvent e) {
    if (events_.size() >= target_) return;
    events_.push_back(std::move(e));
    tick_small();
  }

  Coords point() { return {static_cast<std::int64_t>(40 + next(1200)), static_cast<std::int64_t>(60 + next(700))}; }

  void open_page(const std::string& path) {
    tick_action();
    auto nav = base(EventKind::Navigate, path);
    nav.screenshot_ref = new_shot();
    emit(std::move(nav));
    for (auto k = next(3); k > 0; --k) {
      auto s = base(EventKind::Scroll, path);
      s.scroll_dx = 0;
      s.scroll_dy = static_cast<std::int64_t>(120 + next(480));
      emit(std::move(s));
    }
  }

  void scroll_page(const std::string& path) {
    tick_action();
    for (auto k = 1 + next(3); k > 0; --k) {
      auto s = base(EventKind::Scroll, path);
      s.scroll_dx = 0;
      s.scroll_dy = static_cast<std::int64_t>(next(2) ? 200 + next(400) : -static_cast<std::int64_t>(100 + next(200)));
      emit(std::move(s));
    }
  }

  void type_into(const std::string& path, const std::string& name, const std::string& kind, const std::string& text) {
    for (char c : text) {
      auto k = base(EventKind::Keyup, path);
      k.element_name = name;
      k.element_kind = kind;
      k.key_value = c == ' ' ? std::string("Space") : std::string(1, c);
      emit(std::move(k));
    }
  }

  void search(const std::string& query) {
    tick_action();
    const std::string page = "/course/101/search";
    auto focus = base(EventKind::Focus, page);
    focus.element_name = "search";
    focus.element_kind = "input";
    emit(std::move(focus));
    type_into(page, "search", "input", query);
    std::string encoded = query;
    for (auto& c : encoded) {
      if (c == ' ') c = '+';
    }
    tick_action();
    auto results = base(EventKind::Navigate, page + "?q=" + encoded);
    results.screenshot_ref = new_shot();
    emit(std::move(results));
  }

  void fill_form(const std::string& path, const std::vector<std::string>& fields) {
    tick_action();
    for (const auto& field : fields) {
      const std::string kind = field == "feedback" || field == "question" ? "textarea" : "input";
      auto focus = base(EventKind::Focus, path);
      focus.element_name = field;
      focus.element_kind = kind;
      emit(std::move(focus));
      std::string value;
      if (field == "grade") value = std::to_string(10 + next(11));
      else if (field == "feedback") value = pick_word({"good structure", "cite sources", "see rubric"});
      else if (field == "question") value = pick_word({"what did you find hard", "rate this week"});
      else value = pick_word({"yes", "no", "maybe", "week 3"});
      type_into(path, field, kind, value);
      auto change = base(EventKind::Change, path);
      change.element_name = field;
      change.element_kind = kind;
      change.new_value = value;
      emit(std::move(change));
    }
  }

  void read_policy(const std::string& path) {
    tick_action();
    auto tab = base(EventKind::SwitchTab, path);
    tab.screenshot_ref = new_shot();
    emit(std::move(tab));
    auto s = base(EventKind::Scroll, path);
    s.scroll_dy = static_cast<std::int64_t>(300 + next(600));
    emit(std::move(s));
    auto sel = base(EventKind::Select, path);
    sel.selected_text = pick_word({"second marker reviews 10% of scripts", "moderation within five days",
                                   "feedback must reference criteria"});
    sel.coords = point();
    emit(std::move(sel));
    if (next(2) == 0) {
      auto note = base(EventKind::Change, path);
      note.element_name = "annotation";
      note.element_kind = "textarea";
      note.new_value = pick_word({"apply to all cohorts", "check with coordinator"});
      emit(std::move(note));
    }
  }

  void click_labelled(const std::string& path, const std::string& label) {
    tick_action();
    auto c = base(EventKind::Click, path);
    c.element_kind = "button";
    c.element_text = label;
    c.coords = point();
    c.screenshot_ref = new_shot();
    emit(std::move(c));
  }

  void click_button(const std::string& path, const std::string& label) {
    tick_action();
    auto c = base(EventKind::Click, path);
    c.element_kind = "button";
    c.element_text = label;
    c.coords = point();
    emit(std::move(c));
  }

  void submit(const std::string& path) {
    tick_action();
    auto s = base(EventKind::Submit, path);
    s.screenshot_ref = new_shot();
    emit(std::move(s));
  }

  void upload_file(const std::string& path, const std::string& file) {
    tick_action();
    auto c = base(EventKind::Change, path);
    c.element_name = "attachment";
    c.element_kind = "file";
    c.new_value = file;
    emit(std::move(c));
  }

  void close_tab(const std::string& path) {
    tick_action();
    auto c = base(EventKind::Close, path);
    c.element_name = "tab";
    c.element_kind = "window";
    emit(std::move(c));
  }

  std::mt19937_64 rng_;
  std::size_t target_;
  std::string profile_;
  std::int64_t ts_;
  std::size_t shots_ = 0;
  std::vector<RawEvent> events_;
};

}  // namespace detail

/// Deterministic stand-in for a capture session of one of the two study
/// tasks. Throws UnknownProfile or EmptyLog (n_events == 0).
inline EventLog synth_log(std::uint64_t seed, std::size_t n_events, std::string_view profile) {
  if (std::find(kSynthProfiles.begin(), kSynthProfiles.end(), profile) == kSynthProfiles.end()) {
    throw Error(ErrorCode::UnknownProfile, std::string(profile));
  }
  if (n_events == 0) throw Error(ErrorCode::EmptyLog, "n_events must be positive");
  return detail::LogSynthesizer(seed, n_events, profile).run();
}

/// Placeholder screenshot bytes (SVG) for a synthetic screenshot reference.
inline std::string synth_screenshot(const RawEvent& e) {
  const std::string label = xml_escape(e.url);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"200\" viewBox=\"0 0 320 200\">"
         "<rect width=\"320\" height=\"200\" fill=\"#f4f6f8\" stroke=\"#8a96a3\"/>"
         "<rect width=\"320\" height=\"24\" fill=\"#d5dbe1\"/>"
         "<text x=\"8\" y=\"16\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" +
         label + "</text></svg>\n";
}

/// Writes a placeholder for every screenshot referenced by `log` into
/// `asset_dir`, creating it if needed.
inline void write_synth_assets(const EventLog& log, const std::filesystem::path& asset_dir) {
  std::filesystem::create_directories(asset_dir);
  for (const auto& e : log.events) {
    if (!e.screenshot_ref) continue;
    std::ofstream out(asset_dir / *e.screenshot_ref, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (asset_dir / *e.screenshot_ref).string());
    out << synth_screenshot(e);
  }
}

}  // namespace vpr
