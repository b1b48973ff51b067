#include "frames/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "frames/analysis.hpp"
#include "frames/annotation.hpp"
#include "frames/annotation_server.hpp"
#include "frames/classifier.hpp"
#include "frames/corpus.hpp"
#include "frames/csv.hpp"
#include "frames/store_lock.hpp"
#include "frames/translation.hpp"

namespace frames::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path parent_dir(const fs::path& p) {
  return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

void write_failures(const fs::path& path, const std::vector<ItemFailure>& failures, std::ostream& err) {
  std::vector<Json> rows;
  for (const auto& f : failures) {
    rows.push_back(to_json(f));
    err << "failed " << f.item_id << ": " << f.code << ": " << f.message << "\n";
  }
  if (failures.empty()) {
    std::error_code ec;
    fs::remove(path, ec);
  } else {
    write_jsonl_atomic(path, rows);
    err << failures.size() << " failure(s) written to " << path.string() << "\n";
  }
}

// Env vars that feed options. Inserted ahead of the user's flags so that
// flags > env > config file > defaults (options keep the last value).
struct EnvBinding {
  const char* subcommand;
  const char* env;
  const char* option;
};

constexpr EnvBinding kEnvBindings[] = {
    {"batches", "FRAMES_SEED", "--seed"},
    {"translate", "FRAMES_TRANSLATE_ENDPOINT", "--endpoint"},
    {"classify", "FRAMES_LLM_ENDPOINT", "--endpoint"},
    {"classify", "FRAMES_LLM_MODEL", "--model"},
};

std::vector<std::string> inject_env(std::vector<std::string> args, const std::vector<std::string>& subcommands) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (std::find(subcommands.begin(), subcommands.end(), args[i]) == subcommands.end()) continue;
    std::vector<std::string> injected;
    for (const auto& b : kEnvBindings) {
      if (args[i] != b.subcommand) continue;
      if (const char* v = std::getenv(b.env); v != nullptr && *v != '\0') {
        injected.push_back(std::string(b.option) + "=" + v);
      }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, injected.begin(), injected.end());
    break;
  }
  return args;
}

std::atomic<bool> g_stop_requested{false};
extern "C" void handle_stop_signal(int) { g_stop_requested = true; }

struct Options {
  // ingest
  fs::path input;
  std::string format = "jsonl";
  fs::path corpus_out = "corpus.jsonl";
  // shared
  fs::path corpus = "corpus.jsonl";
  fs::path translations;
  std::string target = "en";
  std::size_t concurrency = 4;
  std::string endpoint;
  std::string auth_env;
  int timeout_ms = 60000;
  int max_attempts = 5;
  fs::path script;
  // stats
  fs::path stats_out;
  // translate
  std::string translate_provider = "passthrough";
  fs::path cache = "translations.jsonl";
  bool force = false;
  // classify
  std::string llm_provider = "lexicon";
  std::string model;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_alternatives = 5;
  int max_tokens = 8;
  double rate_limit = 0.0;
  fs::path lexicon;
  fs::path template_file;
  fs::path definitions_file;
  fs::path classifications = "classifications.jsonl";
  // batches
  fs::path batches = "batches.jsonl";
  std::size_t per_batch = 50;
  std::size_t n_batches = 20;
  std::uint64_t seed = kDefaultSeed;
  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path annotations = "annotations.jsonl";
  fs::path static_dir;
  // analyze / export
  fs::path reports = "reports";
  bool renormalize = false;
  std::size_t bin_width = 100;
  std::size_t bin_cap = 800;
  std::string model_filter;
  std::string export_format = "csv";
};

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  StoreLock lock(parent_dir(o.corpus_out));
  const auto result = ingest_corpus(o.input, parse_corpus_format(o.format));
  save_corpus(o.corpus_out, result.items);
  for (const auto& m : result.malformed) {
    err << o.input.string() << ":" << m.line << ": malformed row: " << m.reason << "\n";
  }
  out << result.items.size() << " item(s) written to " << o.corpus_out.string();
  if (!result.malformed.empty()) out << ", " << result.malformed.size() << " malformed row(s) skipped";
  out << "\n";
  return result.malformed.empty() ? kExitOk : kExitPartial;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream&) {
  const auto items = load_corpus(o.corpus);
  std::ostringstream table;
  table << "program,count,mean_words,min_words,max_words\n";
  for (const auto& s : corpus_stats(items)) {
    table << csv::escape(s.program) << ',' << s.count << ',' << Json(s.mean_words).dump() << ','
        << s.min_words << ',' << s.max_words << '\n';
  }
  if (o.stats_out.empty()) {
    out << table.str();
  } else {
    write_file_atomic(o.stats_out, table.str());
  }
  return kExitOk;
}

int cmd_translate(const Options& o, std::ostream& out, std::ostream& err) {
  TranslationProviderConfig cfg;
  cfg.provider_id = parse_translation_provider(o.translate_provider);
  cfg.target_language = o.target;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.retry.max_attempts = o.max_attempts;
  cfg.script_path = o.script;
  if (cfg.provider_id == TranslationProviderId::http_mt) {
    cfg.endpoint = o.endpoint;
    cfg.auth_env = o.auth_env.empty() ? "FRAMES_TRANSLATE_API_KEY" : o.auth_env;
  } else if (!o.endpoint.empty()) {
    throw UsageError("--endpoint applies to --provider http_mt only");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  StoreLock lock(parent_dir(o.cache));
  const auto items = load_corpus(o.corpus);
  auto clock = system_clock();
  std::shared_ptr<HttpTransport> transport = make_http_transport();
  auto translator = make_translator(cfg, transport, clock);
  TranslationCache cache(o.cache);
  TranslateOptions opts;
  opts.concurrency = o.concurrency;
  opts.force = o.force;
  const auto result = translate_corpus(items, *translator, cache, *clock, opts);

  auto failures_path = o.cache;
  failures_path += ".failures.jsonl";
  write_failures(failures_path, result.failures, err);
  out << result.records.size() << " translated, " << result.failures.size() << " failed, "
      << result.provider_calls << " provider call(s)\n";
  return result.failures.empty() ? kExitOk : kExitPartial;
}

ClassifierConfig classifier_config(const Options& o) {
  ClassifierConfig cfg;
  cfg.provider_id = parse_llm_provider(o.llm_provider);
  cfg.temperature = o.temperature;
  cfg.top_p = o.top_p;
  cfg.max_alternatives = o.max_alternatives;
  cfg.max_tokens = o.max_tokens;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.retry.max_attempts = o.max_attempts;
  cfg.rate_limit = o.rate_limit;
  switch (cfg.provider_id) {
    case LlmProviderId::http_llm:
      cfg.model_id = o.model.empty() ? std::string(kDefaultLlmModel) : o.model;
      cfg.endpoint = o.endpoint;
      cfg.auth_env = o.auth_env.empty() ? "FRAMES_LLM_API_KEY" : o.auth_env;
      break;
    case LlmProviderId::scripted:
      cfg.model_id = o.model.empty() ? "scripted" : o.model;
      break;
    case LlmProviderId::lexicon:
      cfg.model_id = o.model.empty() ? "lexicon" : o.model;
      break;
  }
  if (cfg.provider_id != LlmProviderId::http_llm && !o.endpoint.empty()) {
    throw UsageError("--endpoint applies to --provider http_llm only");
  }
  return cfg;
}

int cmd_classify(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = classifier_config(o);
  auto tmpl = o.template_file.empty() ? PromptTemplate::defaults() : load_prompt_template(o.template_file);
  cfg.frame_order = tmpl.frame_order;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto definitions =
      o.definitions_file.empty() ? default_frame_definitions() : load_frame_definitions(o.definitions_file);

  StoreLock lock(parent_dir(o.classifications));
  const auto items = load_corpus(o.corpus);
  std::optional<TranslationCache> translations;
  if (!o.translations.empty()) translations.emplace(o.translations);

  std::vector<ClassifyInput> inputs;
  inputs.reserve(items.size());
  for (const auto& item : items) {
    if (translations) {
      if (auto t = translations->find_any(item.item_id, o.target)) {
        inputs.push_back({item.item_id, t->translated_text, "translation"});
        continue;
      }
    }
    inputs.push_back({item.item_id, item.text, "original"});
  }

  auto clock = system_clock();
  std::shared_ptr<HttpTransport> transport = make_http_transport();
  auto provider = make_completion_provider(cfg, transport, clock, o.script, o.lexicon);
  ClassificationStore store(o.classifications);
  ClassifyOptions opts;
  opts.concurrency = o.concurrency;
  const auto result = classify_corpus(inputs, tmpl, definitions, cfg, *provider, store, clock, opts);

  auto failures_path = o.classifications;
  failures_path += ".failures.jsonl";
  write_failures(failures_path, result.failures, err);
  std::map<std::string, std::size_t> by_code;
  for (const auto& f : result.failures) ++by_code[f.code];
  out << result.records.size() << " classified, " << result.failures.size() << " failed, "
      << result.provider_calls << " provider call(s)";
  for (const auto& [code, n] : by_code) out << ", " << code << "=" << n;
  out << "\n";
  return result.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_batches(const Options& o, std::ostream& out, std::ostream&) {
  StoreLock lock(parent_dir(o.batches));
  const auto items = load_corpus(o.corpus);
  BatchOptions opts{o.per_batch, o.n_batches, o.seed};
  const auto batches = generate_batches(items, opts, system_clock()->wall_now());
  save_batches(o.batches, batches);
  out << batches.size() << " batch(es) written to " << o.batches.string() << "\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream&) {
  StoreLock lock(parent_dir(o.annotations));
  std::optional<TranslationCache> translations;
  if (!o.translations.empty()) translations.emplace(o.translations);
  ItemCatalog catalog(load_corpus(o.corpus), translations ? &*translations : nullptr, o.target);
  AnnotationStore store(o.annotations);
  ServerOptions opts;
  opts.static_dir = o.static_dir;
  if (!o.definitions_file.empty()) opts.definitions = load_frame_definitions(o.definitions_file);
  AnnotationServer server(catalog, load_batches(o.batches), store, system_clock(), opts);
  const int port = server.bind(o.host, o.port);
  out << "listening on http://" << o.host << ":" << port << std::endl;

  g_stop_requested = false;
  auto previous_int = std::signal(SIGINT, handle_stop_signal);
  auto previous_term = std::signal(SIGTERM, handle_stop_signal);
  std::jthread watcher([&server](std::stop_token st) {
    while (!st.stop_requested() && !g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.listen();
  watcher.request_stop();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  return kExitOk;
}

ReportSet analyze_reports(const Options& o, std::ostream& err) {
  const auto annotations = load_annotations(o.annotations);
  auto classifications = load_classifications(o.classifications);
  if (!o.model_filter.empty()) {
    std::erase_if(classifications, [&](const ClassificationRecord& r) { return r.model_id != o.model_filter; });
  }
  const auto join = join_records(annotations, classifications);
  if (join.pairs.empty()) err << "warning: no annotation matched a classification\n";
  AnalysisOptions opts;
  opts.bins = BinSpec{o.bin_width, o.bin_cap};
  try {
    opts.bins.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  opts.renormalize = o.renormalize;
  return build_reports(join, opts);
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err, ExportFormat format) {
  const auto reports = analyze_reports(o, err);
  StoreLock lock(o.reports);
  const auto written = export_reports(reports, o.reports, format);
  const auto& a = reports.agreement;
  out << a.n_joined << " joined pair(s)";
  if (a.accuracy) out << ", accuracy " << Json(*a.accuracy).dump();
  out << "\n";
  for (const auto& p : written) out << "wrote " << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"News framing analysis workbench", "frames"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "Read options from a key = value file ([subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  bool show_config = false;
  app.add_flag("--show-config", show_config, "Print the effective configuration before running");
  app.require_subcommand(1, 1);

  Options o;
  auto* ingest = app.add_subcommand("ingest", "Validate a CSV/JSONL corpus and write corpus.jsonl");
  ingest->add_option("--input", o.input, "Corpus file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", o.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
  ingest->add_option("--out", o.corpus_out, "Output store")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Per-program word count summary (CSV)");
  stats->add_option("--corpus", o.corpus)->capture_default_str();
  stats->add_option("--out", o.stats_out, "Write CSV here instead of stdout");

  auto add_http = [&](CLI::App* sub) {
    sub->add_option("--endpoint", o.endpoint, "Provider URL (http providers)");
    sub->add_option("--auth-env", o.auth_env, "Env var holding the API key");
    sub->add_option("--timeout-ms", o.timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--max-attempts", o.max_attempts)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--concurrency", o.concurrency)->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* translate = app.add_subcommand("translate", "Translate the corpus through a cached provider");
  translate->add_option("--corpus", o.corpus)->capture_default_str();
  translate->add_option("--provider", o.translate_provider)
      ->check(CLI::IsMember({"http_mt", "passthrough", "scripted"}))->capture_default_str();
  translate->add_option("--cache", o.cache)->capture_default_str();
  translate->add_option("--target", o.target, "Target language")->capture_default_str();
  translate->add_option("--script", o.script, "Scripted provider fixture (JSONL)");
  translate->add_flag("--force", o.force, "Ignore cached translations");
  add_http(translate);

  auto* classify = app.add_subcommand("classify", "Classify the predominant frame of each item");
  classify->add_option("--corpus", o.corpus)->capture_default_str();
  classify->add_option("--out", o.classifications)->capture_default_str();
  classify->add_option("--provider", o.llm_provider)
      ->check(CLI::IsMember({"http_llm", "scripted", "lexicon"}))->capture_default_str();
  classify->add_option("--model", o.model, "Model id (default depends on provider)");
  classify->add_option("--temperature", o.temperature)->capture_default_str();
  classify->add_option("--top-p", o.top_p)->capture_default_str();
  classify->add_option("--max-alternatives", o.max_alternatives)->capture_default_str();
  classify->add_option("--max-tokens", o.max_tokens)->capture_default_str();
  classify->add_option("--rate-limit", o.rate_limit, "Requests per second, 0 = unlimited")->capture_default_str();
  classify->add_option("--script", o.script, "Scripted provider fixture (JSONL)");
  classify->add_option("--lexicon", o.lexicon, "Lexicon file (JSONL)");
  classify->add_option("--template", o.template_file, "Prompt template override");
  classify->add_option("--definitions", o.definitions_file, "Frame definitions override (JSONL)");
  classify->add_option("--translations", o.translations, "Classify translated text when available");
  classify->add_option("--target", o.target, "Translation language to use")->capture_default_str();
  add_http(classify);

  auto* batches = app.add_subcommand("batches", "Partition the corpus into annotation batches");
  batches->add_option("--corpus", o.corpus)->capture_default_str();
  batches->add_option("--out", o.batches)->capture_default_str();
  batches->add_option("--per-batch", o.per_batch)->check(CLI::PositiveNumber)->capture_default_str();
  batches->add_option("--n-batches", o.n_batches)->check(CLI::PositiveNumber)->capture_default_str();
  batches->add_option("--seed", o.seed)->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Serve the annotation API");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535))->capture_default_str();
  serve->add_option("--corpus", o.corpus)->capture_default_str();
  serve->add_option("--batches", o.batches)->capture_default_str();
  serve->add_option("--annotations", o.annotations)->capture_default_str();
  serve->add_option("--translations", o.translations, "Show translations when available");
  serve->add_option("--target", o.target)->capture_default_str();
  serve->add_option("--definitions", o.definitions_file, "Frame definitions override (JSONL)");
  serve->add_option("--static", o.static_dir, "Directory with the web UI assets");

  auto add_analysis = [&](CLI::App* sub) {
    sub->add_option("--annotations", o.annotations)->capture_default_str();
    sub->add_option("--classifications", o.classifications)->capture_default_str();
    sub->add_option("--out", o.reports, "Report directory")->capture_default_str();
    sub->add_flag("--renormalize", o.renormalize, "Rescale frame masses to sum to 1 for probability reports");
    sub->add_option("--bin-width", o.bin_width)->capture_default_str();
    sub->add_option("--cap", o.bin_cap, "Lower edge of the open-ended last bin")->capture_default_str();
    sub->add_option("--model", o.model_filter, "Only use classifications from this model");
  };
  auto* analyze = app.add_subcommand("analyze", "Agreement reports as CSV (plus agreement.json)");
  add_analysis(analyze);
  auto* exporter = app.add_subcommand("export", "Agreement reports in a chosen format");
  add_analysis(exporter);
  exporter->add_option("--format", o.export_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  std::vector<std::string> names;
  for (const auto* sub : app.get_subcommands({})) names.push_back(sub->get_name());
  auto args = inject_env(raw_args, names);
  std::reverse(args.begin(), args.end());  // CLI11 consumes from the back

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (show_config) out << app.config_to_str(true, false);

  try {
    if (*ingest) return cmd_ingest(o, out, err);
    if (*stats) return cmd_stats(o, out, err);
    if (*translate) return cmd_translate(o, out, err);
    if (*classify) return cmd_classify(o, out, err);
    if (*batches) return cmd_batches(o, out, err);
    if (*serve) return cmd_serve(o, out, err);
    if (*analyze) return cmd_analyze(o, out, err, ExportFormat::csv);
    if (*exporter) return cmd_analyze(o, out, err, parse_export_format(o.export_format));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const FramesError& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return kExitPartial;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}

}  // namespace frames::cli
