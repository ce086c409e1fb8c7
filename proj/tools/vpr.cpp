// vpr: turn captured browser interaction logs into visual process
// representations, and analyze prototype comparison studies.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vpr/config.hpp"
#include "vpr/evalstats.hpp"
#include "vpr/event_log.hpp"
#include "vpr/pipeline.hpp"
#include "vpr/renderer.hpp"
#include "vpr/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vpr::Error(vpr::ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::string read_file(const fs::path& path) {
  auto in = open_input(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw vpr::Error(vpr::ErrorCode::Io, "cannot write " + path.string());
  out << bytes;
  if (!out) throw vpr::Error(vpr::ErrorCode::Io, "write failed for " + path.string());
}

/// flag > config file > VPR_ASSET_DIR > <fallback_base>/assets
fs::path resolve_asset_dir(const std::optional<std::string>& flag, const vpr::Config& config,
                           const fs::path& fallback_base) {
  if (flag) return *flag;
  if (config.asset_dir) return *config.asset_dir;
  if (const char* env = std::getenv("VPR_ASSET_DIR"); env && *env) return env;
  return fallback_base / "assets";
}

struct ValidateArgs {
  std::string log;
  std::optional<std::string> asset_dir;
};

int cmd_validate(const ValidateArgs& args, const vpr::Config& config) {
  auto in = open_input(args.log);
  auto result = vpr::read_log(in, vpr::ParseOptions{.strict = false});
  int errors = 0;
  for (const auto& d : result.diagnostics) {
    if (d.kind == vpr::DiagnosticKind::SkippedRecord) {
      std::cerr << args.log << ":" << d.line.value_or(0) << ": error: " << d.message << "\n";
      ++errors;
    } else {
      std::cerr << args.log << ": " << vpr::format_diagnostic(d) << "\n";
    }
  }
  if (result.log.events.empty() && errors == 0) {
    std::cerr << args.log << ": error: EmptyLog: no event records\n";
    ++errors;
  }
  vpr::ValidateOptions options;
  options.idle_threshold_ms = config.idle_threshold_ms;
  const fs::path base = fs::path(args.log).parent_path();
  if (auto dir = resolve_asset_dir(args.asset_dir, config, base); fs::is_directory(dir)) options.asset_dir = dir;
  for (const auto& d : vpr::validate_log(result.log, options)) {
    std::cerr << args.log << ": " << vpr::format_diagnostic(d) << "\n";
  }
  std::cout << args.log << ": " << result.log.events.size() << " events, " << errors << " errors\n";
  return errors == 0 ? kExitOk : kExitDomain;
}

struct MineArgs {
  std::vector<std::string> logs;
  std::string out;
  std::optional<std::string> rules;
  std::optional<std::string> title;
  std::optional<std::string> asset_dir;
  std::optional<std::size_t> min_support;
  std::optional<std::size_t> max_len;
  std::optional<std::int64_t> coalesce_gap_ms;
};

int cmd_mine(const MineArgs& args, const vpr::Config& config) {
  vpr::MineOptions options;
  if (args.rules) options.rules = vpr::MappingRules::load(*args.rules);
  else if (config.rules_path) options.rules = vpr::MappingRules::load(*config.rules_path);
  if (auto gap = args.coalesce_gap_ms ? args.coalesce_gap_ms : config.coalesce_gap_ms) {
    options.rules = vpr::MappingRules(options.rules.rules(), *gap);
  }
  options.asset_dir = resolve_asset_dir(args.asset_dir, config, fs::path(args.logs.front()).parent_path());
  options.title = args.title;
  options.min_support = args.min_support ? args.min_support : config.min_support;
  options.max_len = args.max_len.value_or(config.max_len);

  std::vector<vpr::TraceInput> traces;
  for (const auto& path : args.logs) {
    auto in = open_input(path);
    traces.push_back({fs::path(path).filename().string(), vpr::parse_log(in)});
  }
  const auto doc = vpr::mine_document(traces, options);
  write_file(args.out, vpr::serialize_document(doc));
  std::cout << args.out << "\n";
  return kExitOk;
}

struct RenderArgs {
  std::string model;
  std::optional<std::string> format;
  bool static_vector = false;
  std::optional<std::string> out;
  std::optional<std::string> asset_dir;
  std::optional<std::string> runtime;
  std::optional<std::string> palette;
  bool no_embed = false;
  bool no_section_colors = false;
};

int cmd_render(const RenderArgs& args, const vpr::Config& config) {
  const auto format = vpr::parse_format(args.format.value_or(config.format));
  if (!format) {
    std::cerr << "error: unknown format '" << args.format.value_or(config.format) << "'\n";
    return kExitUsage;
  }
  const auto doc = vpr::deserialize_document(read_file(args.model));

  vpr::RenderConfig cfg;
  cfg.format = *format;
  cfg.output_kind = args.static_vector ? vpr::OutputKind::StaticVector : vpr::OutputKind::InteractiveDocument;
  cfg.color_scheme = args.palette.value_or(config.palette);
  cfg.embed_assets = config.embed_assets && !args.no_embed;
  cfg.section_colors = config.section_colors && !args.no_section_colors;

  vpr::RenderEnvironment env;
  env.asset_dir = resolve_asset_dir(args.asset_dir, config, fs::path(args.model).parent_path());
  if (args.runtime) env.runtime_bundle = read_file(*args.runtime);

  fs::path out;
  if (args.out) {
    out = *args.out;
  } else {
    std::string stem = fs::path(args.model).filename().string();
    if (auto pos = stem.find(".vpr.json"); pos != std::string::npos) stem.erase(pos);
    std::string lower(vpr::to_string(*format));
    lower[0] = 'p';
    out = fs::path(args.model).parent_path() / (stem + "." + lower + (args.static_vector ? ".vpr.svg" : ".vpr.html"));
  }
  write_file(out, vpr::render(doc, cfg, env));
  std::cout << out.string() << "\n";
  return kExitOk;
}

struct AnalyzeArgs {
  std::string responses;
  std::string answers;
  std::string out = "report.json";
  std::optional<std::string> likert;
  std::optional<double> threshold;
};

int cmd_analyze(const AnalyzeArgs& args, const vpr::Config& config) {
  namespace st = vpr::stats;
  auto responses_in = open_input(args.responses);
  auto answers_in = open_input(args.answers);
  const auto records = st::parse_responses(responses_in);
  const auto key = st::parse_answer_key(answers_in);
  std::vector<st::LikertRecord> likert;
  if (args.likert) {
    auto in = open_input(*args.likert);
    likert = st::parse_likert(in);
  }
  const auto rows = st::score_responses(records, key);
  st::ReportConfig rc;
  rc.threshold_sec = args.threshold.value_or(config.threshold_sec);
  const auto report = st::build_report(rows, rc, likert);

  const fs::path json_path = args.out;
  fs::path text_path = json_path;
  text_path.replace_extension(".txt");
  const std::string text = st::report_to_text(report);
  write_file(json_path, st::report_to_json(report).dump(2) + "\n");
  write_file(text_path, text);
  std::cout << text;
  std::cout << json_path.string() << "\n" << text_path.string() << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t n = 0;
  std::string profile;
  std::string out;
  std::optional<std::string> asset_dir;
};

int cmd_synth(const SynthArgs& args, const vpr::Config& config) {
  const auto log = vpr::synth_log(args.seed, args.n, args.profile);
  write_file(args.out, vpr::serialize_log(log));
  const fs::path assets = args.asset_dir ? fs::path(*args.asset_dir)
                                         : resolve_asset_dir(std::nullopt, config, fs::path(args.out).parent_path());
  vpr::write_synth_assets(log, assets);
  std::cout << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build visual process representations from browser interaction logs."};
  app.footer(
      "Exit codes: 0 success, 1 domain error (invalid input, unresolved assets), 2 I/O or usage error.\n"
      "Settings are read from ./vpr.config.json when present (or --config); flags take precedence.\n"
      "VPR_ASSET_DIR supplies the asset directory when neither a flag nor the config sets one.");
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "Configuration file (JSON)");

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Parse and check an event log");
  validate->add_option("log", validate_args.log, "Line-delimited event log")->required();
  validate->add_option("--asset-dir", validate_args.asset_dir, "Directory holding screenshot files");

  MineArgs mine_args;
  auto* mine = app.add_subcommand("mine", "Map logs to steps, mine patterns, and write a model file");
  mine->add_option("logs", mine_args.logs, "Event logs; the first one is depicted")->required();
  mine->add_option("-o,--out", mine_args.out, "Output model file (*.vpr.json)")->required();
  mine->add_option("--rules", mine_args.rules, "Mapping rules file (JSON)");
  mine->add_option("--title", mine_args.title, "Document title (defaults to the log's task title)");
  mine->add_option("--asset-dir", mine_args.asset_dir, "Directory holding screenshot files");
  mine->add_option("--min-support", mine_args.min_support, "Minimum trace support")->check(CLI::PositiveNumber);
  mine->add_option("--max-len", mine_args.max_len, "Maximum pattern length")->check(CLI::PositiveNumber);
  mine->add_option("--coalesce-gap-ms", mine_args.coalesce_gap_ms, "Maximum gap inside one step")
      ->check(CLI::NonNegativeNumber);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render a model file as P1-P4");
  render->add_option("model", render_args.model, "Model file (*.vpr.json)")->required();
  render->add_option("-f,--format", render_args.format, "p1 | p2 | p3 | p4")
      ->check(CLI::IsMember({"p1", "p2", "p3", "p4", "P1", "P2", "P3", "P4"}));
  render->add_flag("--static", render_args.static_vector, "Write a static SVG instead of interactive HTML");
  render->add_option("-o,--out", render_args.out, "Output file");
  render->add_option("--asset-dir", render_args.asset_dir, "Directory holding screenshot files");
  render->add_option("--runtime", render_args.runtime, "Viewer runtime bundle to inline");
  render->add_option("--palette", render_args.palette, "Color palette (default | print)");
  render->add_flag("--no-embed", render_args.no_embed, "Reference screenshots instead of embedding them");
  render->add_flag("--no-section-colors", render_args.no_section_colors, "Use one neutral color for all sections");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Score responses and compare prototypes");
  analyze->add_option("responses", analyze_args.responses, "responses.csv")->required();
  analyze->add_option("answers", analyze_args.answers, "answers.csv")->required();
  analyze->add_option("-o,--out", analyze_args.out, "Report JSON path; a .txt table is written beside it");
  analyze->add_option("--likert", analyze_args.likert, "Likert ratings CSV");
  analyze->add_option("--threshold", analyze_args.threshold, "Exclusion threshold, seconds per question");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic event log");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("-n,--n", synth_args.n, "Number of events")->required();
  synth->add_option("--profile", synth_args.profile, "Workflow profile")
      ->required()
      ->check(CLI::IsMember({"marking_correction", "poll_creation"}));
  synth->add_option("-o,--out", synth_args.out, "Output log file")->required();
  synth->add_option("--asset-dir", synth_args.asset_dir, "Where placeholder screenshots are written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    vpr::Config config;
    if (config_path) config = vpr::load_config(*config_path);
    else if (fs::exists(vpr::kConfigFileName)) config = vpr::load_config(vpr::kConfigFileName);

    if (*validate) return cmd_validate(validate_args, config);
    if (*mine) return cmd_mine(mine_args, config);
    if (*render) return cmd_render(render_args, config);
    if (*analyze) return cmd_analyze(analyze_args, config);
    if (*synth) return cmd_synth(synth_args, config);
  } catch (const vpr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == vpr::ErrorCode::Io ? kExitUsage : kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
