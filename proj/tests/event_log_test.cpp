#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vpr/event_log.hpp"
#include "vpr/synth.hpp"

namespace vpr {
namespace {

using testing::ev;
using testing::make_log;

ErrorCode code_of(std::string_view text) {
  try {
    parse_log(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::Io;
}

TEST(ParseLog, EmptyStreamIsEmptyLog) {
  EXPECT_EQ(code_of(""), ErrorCode::EmptyLog);
  EXPECT_EQ(code_of("\n\n  \n"), ErrorCode::EmptyLog);
}

TEST(ParseLog, SingleClick) {
  auto log = parse_log(R"({"kind":"click","ts":1000,"url":"https://lms/x","x":10,"y":20,"actor":"T1"})");
  ASSERT_EQ(log.events.size(), 1u);
  const auto& e = log.events[0];
  EXPECT_EQ(e.kind, EventKind::Click);
  EXPECT_EQ(e.timestamp, 1000);
  EXPECT_EQ(e.url, "https://lms/x");
  EXPECT_EQ(e.coords, (Coords{10, 20}));
  EXPECT_EQ(log.actor_id, "T1");
}

TEST(ParseLog, SortsByTimestampStably) {
  std::string text;
  const int ts[] = {3, 1, 2, 5, 4};
  for (int t : ts) {
    text += R"({"kind":"navigate","ts":)" + std::to_string(t) + R"(,"url":"https://a/)" + std::to_string(t) +
            R"(","actor":"T1"})" "\n";
  }
  auto log = parse_log(text);
  std::vector<std::int64_t> got;
  for (const auto& e : log.events) got.push_back(e.timestamp);
  EXPECT_EQ(got, (std::vector<std::int64_t>{1, 2, 3, 4, 5}));
}

TEST(ParseLog, TiesKeepInputOrder) {
  auto log = parse_log(
      R"({"kind":"navigate","ts":5,"url":"https://a/first","actor":"T1"})" "\n"
      R"({"kind":"navigate","ts":2,"url":"https://a/early","actor":"T1"})" "\n"
      R"({"kind":"navigate","ts":5,"url":"https://a/second","actor":"T1"})" "\n");
  ASSERT_EQ(log.events.size(), 3u);
  EXPECT_EQ(log.events[1].url, "https://a/first");
  EXPECT_EQ(log.events[2].url, "https://a/second");
}

TEST(ParseLog, ReorderingIsReported) {
  std::istringstream in(R"({"kind":"navigate","ts":9,"url":"https://a","actor":"T1"})" "\n"
                        R"({"kind":"navigate","ts":1,"url":"https://a","actor":"T1"})" "\n");
  auto result = read_log(in);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].kind, DiagnosticKind::OutOfOrder);
}

TEST(ParseLog, ErrorsCarryLineNumbers) {
  try {
    parse_log(R"({"kind":"navigate","ts":1,"url":"https://a","actor":"T1"})" "\n"
              "\n"
              "{not json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseLog, RecordErrors) {
  EXPECT_EQ(code_of(R"({"kind":"hover","ts":1,"url":"https://a","actor":"T1"})"), ErrorCode::UnknownEventKind);
  EXPECT_EQ(code_of(R"({"kind":"navigate","url":"https://a","actor":"T1"})"), ErrorCode::MissingField);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":1,"actor":"T1"})"), ErrorCode::MissingField);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":1,"url":"","actor":"T1"})"), ErrorCode::MissingField);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":1,"url":"https://a"})"), ErrorCode::MissingField);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":0,"url":"https://a","actor":"T1"})"), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":"1","url":"https://a","actor":"T1"})"), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"({"kind":"click","ts":1,"url":"https://a","actor":"T1","x":-1,"y":2})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"([1,2])"), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"({"kind":"navigate","ts":1,"url":"https://a","actor":"T1"})" "\n"
                    R"({"kind":"navigate","ts":2,"url":"https://a","actor":"T2"})"),
            ErrorCode::MixedActors);
}

TEST(ParseLog, SwitchTabSpellings) {
  auto a = parse_log(R"({"kind":"switch-tab","ts":1,"url":"https://a","actor":"T1"})");
  auto b = parse_log(R"({"kind":"switchtab","ts":1,"url":"https://a","actor":"T1"})");
  EXPECT_EQ(a.events[0].kind, EventKind::SwitchTab);
  EXPECT_EQ(a, b);
}

// For every kind: one record that parses and one that breaks the
// kind-conditional field rule (kinds without a rule break the url rule).
TEST(ParseLog, KindConditionalFieldsAreTotal) {
  struct Case {
    const char* good;
    const char* bad;
  };
  const std::map<EventKind, Case> cases = {
      {EventKind::Click, {R"("x":1,"y":2)", R"("el_kind":"button")"}},
      {EventKind::Keyup, {R"("key":"a")", R"("el_kind":"input")"}},
      {EventKind::Select, {R"("sel":"abc")", R"("x":1,"y":1)"}},
      {EventKind::Scroll, {R"("dy":-40)", R"("el_kind":"page")"}},
      {EventKind::SwitchTab, {R"("shot":"s.png")", R"("url":"")"}},
      {EventKind::Focus, {R"("el_kind":"input")", R"("url":"")"}},
      {EventKind::Change, {R"("val":"new")", R"("el_kind":"input")"}},
      {EventKind::Submit, {R"("el_name":"form")", R"("url":"")"}},
      {EventKind::Navigate, {R"("shot":"s.png")", R"("url":"")"}},
      {EventKind::Close, {R"("el_kind":"window")", R"("url":"")"}},
  };
  ASSERT_EQ(cases.size(), kAllEventKinds.size());
  for (auto kind : kAllEventKinds) {
    const auto& c = cases.at(kind);
    const std::string head = R"({"kind":")" + std::string(to_string(kind)) + R"(","ts":5,"actor":"T1",)";
    const std::string good = head + R"("url":"https://a",)" + c.good + "}";
    EXPECT_NO_THROW(parse_log(good)) << good;
    const std::string bad_fields = c.bad;
    const std::string bad =
        head + (bad_fields.starts_with(R"("url")") ? bad_fields : R"("url":"https://a",)" + bad_fields) + "}";
    EXPECT_EQ(code_of(bad), ErrorCode::MissingField) << bad;
  }
}

TEST(ParseLog, UnknownKeysArePreserved) {
  const std::string line = R"({"kind":"navigate","ts":7,"url":"https://a","actor":"T1","tab_id":4,"meta":{"k":[1]}})";
  auto log = parse_log(line);
  EXPECT_EQ(log.events[0].extra["tab_id"], 4);
  EXPECT_EQ(serialize_log(log), line + "\n");
}

TEST(ParseLog, MetadataRecord) {
  auto log = parse_log(R"({"log":{"task":"Mark exams","notes":"pilot"}})" "\n"
                       R"({"kind":"navigate","ts":7,"url":"https://a","actor":"T1"})");
  EXPECT_EQ(log.task_title, "Mark exams");
  EXPECT_EQ(log.capture_notes, "pilot");
  EXPECT_EQ(parse_log(serialize_log(log)), log);
}

TEST(ParseLog, LenientModeReportsEverySkippedLine) {
  std::istringstream in("garbage\n"
                        R"({"kind":"navigate","ts":7,"url":"https://a","actor":"T1"})" "\n"
                        R"({"kind":"keyup","ts":8,"url":"https://a","actor":"T1"})" "\n");
  auto result = read_log(in, ParseOptions{.strict = false});
  EXPECT_EQ(result.log.events.size(), 1u);
  ASSERT_EQ(result.diagnostics.size(), 2u);
  EXPECT_EQ(result.diagnostics[0].line, 1u);
  EXPECT_EQ(result.diagnostics[1].line, 3u);
  EXPECT_EQ(result.diagnostics[1].kind, DiagnosticKind::SkippedRecord);
}

TEST(ValidateLog, WellFormedLogHasNoDiagnostics) {
  auto log = make_log({ev(EventKind::Navigate, 1000, "https://a/1"), ev(EventKind::Scroll, 2000, "https://a/1"),
                       ev(EventKind::Click, 3000, "https://a/1")});
  EXPECT_TRUE(validate_log(log).empty());
}

TEST(ValidateLog, DanglingAsset) {
  auto dir = testing::scratch_dir("dangling");
  std::ofstream(dir / "present.png") << "x";
  auto a = ev(EventKind::Navigate, 1000, "https://a/1");
  a.screenshot_ref = "missing.png";
  auto b = ev(EventKind::Navigate, 2000, "https://a/2");
  b.screenshot_ref = "present.png";
  auto diags = validate_log(make_log({a, b}), ValidateOptions{.asset_dir = dir});
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagnosticKind::DanglingAsset);
  EXPECT_EQ(diags[0].event_index, 0u);
  EXPECT_TRUE(validate_log(make_log({a, b})).empty());
}

TEST(ValidateLog, DuplicateTimestamp) {
  auto diags = validate_log(make_log({ev(EventKind::Navigate, 1000, "https://a"), ev(EventKind::Scroll, 1000, "https://a")}));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, DiagnosticKind::DuplicateTimestamp);
}

TEST(ValidateLog, SchemeAndIdleGap) {
  auto log = make_log({ev(EventKind::Navigate, 1000, "file:///tmp/x"), ev(EventKind::Navigate, 1000 + 120'000, "https://a"),
                       ev(EventKind::Navigate, 1000 + 240'001, "https://a")});
  auto diags = validate_log(log);
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_EQ(diags[0].kind, DiagnosticKind::NonHttpUrl);
  EXPECT_EQ(diags[1].kind, DiagnosticKind::IdleGap);
  EXPECT_EQ(diags[1].event_index, 2u);
  EXPECT_EQ(validate_log(log, ValidateOptions{.idle_threshold_ms = 1000}).size(), 3u);
}

TEST(Synth, ZeroEventsIsEmptyLog) {
  try {
    synth_log(1, 0, "marking_correction");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyLog);
  }
}

TEST(Synth, UnknownProfile) {
  try {
    synth_log(1, 5, "gardening");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownProfile);
  }
}

TEST(Synth, Deterministic) {
  for (auto profile : kSynthProfiles) {
    EXPECT_EQ(serialize_log(synth_log(42, 120, profile)), serialize_log(synth_log(42, 120, profile)));
  }
  EXPECT_NE(serialize_log(synth_log(1, 60, "poll_creation")), serialize_log(synth_log(2, 60, "poll_creation")));
}

TEST(Synth, ExactLengthAndValid) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (auto profile : kSynthProfiles) {
      const std::size_t n = 1 + seed * 7;
      auto log = synth_log(seed, n, profile);
      ASSERT_EQ(log.events.size(), n);
      auto reparsed = parse_log(serialize_log(log));
      EXPECT_EQ(reparsed, log);
      for (const auto& d : validate_log(log)) {
        EXPECT_NE(d.kind, DiagnosticKind::NonHttpUrl);
        EXPECT_NE(d.kind, DiagnosticKind::DuplicateTimestamp);
      }
    }
  }
}

TEST(Synth, AssetsResolve) {
  auto dir = testing::scratch_dir("synth-assets");
  auto log = synth_log(3, 80, "marking_correction");
  write_synth_assets(log, dir);
  for (const auto& d : validate_log(log, ValidateOptions{.asset_dir = dir})) {
    EXPECT_NE(d.kind, DiagnosticKind::DanglingAsset) << d.message;
  }
}

// Round-trip over randomly generated logs, including unknown keys and
// every optional field.
TEST(Properties, SerializeParseRoundTrip) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    EventLog log;
    log.actor_id = "A" + std::to_string(rng() % 5);
    if (rng() % 2) log.task_title = "task " + std::to_string(iter);
    if (rng() % 3 == 0) log.capture_notes = "n\"otes\n";
    std::int64_t ts = 1 + static_cast<std::int64_t>(rng() % 1000);
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      ts += static_cast<std::int64_t>(rng() % 3);
      auto e = ev(kAllEventKinds[rng() % kAllEventKinds.size()], ts, "https://h/p?i=" + std::to_string(i), log.actor_id);
      if (rng() % 2) e.element_name = "né" + std::to_string(rng() % 9);
      if (rng() % 2) e.element_kind = "input";
      if (rng() % 2) e.element_text = "Label \"q\"";
      if (rng() % 3 == 0) e.screenshot_ref = "s.png";
      if (rng() % 4 == 0) e.scroll_dx = -static_cast<std::int64_t>(rng() % 50);
      if (rng() % 5 == 0) e.extra["custom"] = static_cast<int>(rng() % 100);
      log.events.push_back(std::move(e));
    }
    auto once = parse_log(serialize_log(log));
    EXPECT_EQ(once, log);
    EXPECT_EQ(serialize_log(once), serialize_log(log));
    EXPECT_TRUE(std::is_sorted(once.events.begin(), once.events.end(),
                               [](const RawEvent& a, const RawEvent& b) { return a.timestamp < b.timestamp; }));
  }
}

TEST(Properties, ParseOutputIsSorted) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 200; ++iter) {
    std::string text;
    std::vector<std::int64_t> input;
    for (std::size_t i = 0, n = 1 + rng() % 15; i < n; ++i) {
      const auto t = 1 + static_cast<std::int64_t>(rng() % 20);
      input.push_back(t);
      text += R"({"kind":"navigate","ts":)" + std::to_string(t) + R"(,"url":"https://a/)" + std::to_string(i) +
              R"(","actor":"T1"})" "\n";
    }
    auto log = parse_log(text);
    std::vector<std::pair<std::int64_t, std::size_t>> expected;
    for (std::size_t i = 0; i < input.size(); ++i) expected.push_back({input[i], i});
    std::stable_sort(expected.begin(), expected.end(), [](auto& a, auto& b) { return a.first < b.first; });
    ASSERT_EQ(log.events.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(log.events[i].url, "https://a/" + std::to_string(expected[i].second));
    }
  }
}

}  // namespace
}  // namespace vpr
