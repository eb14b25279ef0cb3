// delib: command-line front end for the deliberation analysis toolkit.
//
// Every subcommand writes its report files plus manifest.json into --out.
// Report files depend only on inputs, flags and seed; run-specific facts
// (timestamp, thread count, call counters) live in the manifest.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "delib/annotate/client.hpp"
#include "delib/csv.hpp"
#include "delib/error.hpp"
#include "delib/inference.hpp"
#include "delib/io.hpp"
#include "delib/irr.hpp"
#include "delib/metrics.hpp"
#include "delib/regression.hpp"
#include "delib/rng.hpp"
#include "delib/simd.hpp"
#include "delib/survey.hpp"
#include "delib/synth.hpp"
#include "delib/transcript.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kInternal = 1, kValidation = 2, kTransport = 3 };

struct Common {
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string format = "json";
  unsigned threads = 1;
  std::string config_path;
  std::string tau_mode = "deterministic";
  double epsilon_max = 0.1;
  std::size_t iterations = 10000;
  double level = 0.95;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--format", c.format, "Report format printed to stdout")
      ->check(CLI::IsMember({"json", "table"}));
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--config", c.config_path, "JSON config; flags given on the command line win");
  cmd->add_option("--tau-mode", c.tau_mode, "Kendall tie handling")
      ->check(CLI::IsMember({"deterministic", "deterministic_expectation", "perturbed"}));
  cmd->add_option("--epsilon-max", c.epsilon_max, "Perturbation bound in perturbed mode");
  cmd->add_option("--iterations", c.iterations, "Bootstrap iterations")->check(CLI::Range(1ul, 100000000ul));
  cmd->add_option("--level", c.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
}

/// Config keys use underscores ("tau_mode"). `section` values override
/// top-level ones; explicitly passed flags override both.
class ConfigMerge {
 public:
  ConfigMerge(const CLI::App* cmd, const std::string& section, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    json j;
    try {
      j = json::parse(delib::io::read_text(path));
    } catch (const json::exception& e) {
      throw delib::Error(delib::ErrorCode::InvalidParams, "config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw delib::Error(delib::ErrorCode::InvalidParams, "config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_object()) values_[it.key()] = it.value();
    }
    if (j.contains(section) && j[section].is_object()) {
      for (auto it = j[section].begin(); it != j[section].end(); ++it) values_[it.key()] = it.value();
    }
    raw_ = j;
  }

  template <class T>
  void apply(const std::string& flag, T& target) const {
    if (cmd_->count(flag) > 0) return;
    std::string key = flag.substr(2);
    std::replace(key.begin(), key.end(), '-', '_');
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    try {
      target = it->second.get<T>();
    } catch (const json::exception& e) {
      throw delib::Error(delib::ErrorCode::InvalidParams, "config key '" + key + "': " + e.what());
    }
  }

  const json& raw() const noexcept { return raw_; }

 private:
  const CLI::App* cmd_;
  std::map<std::string, json> values_;
  json raw_ = json::object();
};

void merge_common(const ConfigMerge& m, Common& c) {
  m.apply("--seed", c.seed);
  m.apply("--out", c.out);
  m.apply("--format", c.format);
  m.apply("--threads", c.threads);
  m.apply("--tau-mode", c.tau_mode);
  m.apply("--epsilon-max", c.epsilon_max);
  m.apply("--iterations", c.iterations);
  m.apply("--level", c.level);
  if (c.format != "json" && c.format != "table") {
    throw delib::Error(delib::ErrorCode::InvalidParams, "format must be json or table");
  }
  if (c.threads < 1) throw delib::Error(delib::ErrorCode::InvalidParams, "threads must be >= 1");
}

delib::PerturbationConfig perturbation(const Common& c) {
  delib::PerturbationConfig p = c.tau_mode == "perturbed"
                                    ? delib::PerturbationConfig::perturbed(c.seed, c.epsilon_max)
                                    : delib::PerturbationConfig::deterministic();
  p.validate();
  return p;
}

delib::BootstrapConfig bootstrap(const Common& c) {
  return {c.iterations, c.level, c.seed, c.threads};
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects outputs and writes the manifest.
class Run {
 public:
  Run(std::string subcommand, const Common& common) : subcommand_(std::move(subcommand)), common_(common) {
    fs::create_directories(common_.out);
  }

  void input(const fs::path& path) {
    inputs_.push_back({{"path", path.string()}, {"sha256", delib::io::file_sha256(path)}});
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path path = fs::path(common_.out) / name;
    delib::io::write_text(path, text);
    outputs_.push_back({{"path", name}, {"sha256", delib::io::sha256_hex(text)}});
  }

  void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

  /// JSON report file plus the text table when --format table.
  void report(const std::string& stem, const ordered_json& j, const std::string& table) {
    write_json(stem + ".json", j);
    if (common_.format == "table") {
      write(stem + ".txt", table);
      std::cout << table;
    } else {
      std::cout << j.dump(2) << "\n";
    }
  }

  ordered_json& config() { return config_; }
  ordered_json& stats() { return stats_; }

  void finish() {
    ordered_json m;
    m["tool"] = "delib";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["timestamp"] = utc_now();
    ordered_json cfg = {{"seed", common_.seed},         {"out", common_.out},
                        {"format", common_.format},     {"threads", common_.threads},
                        {"tau_mode", common_.tau_mode}, {"epsilon_max", common_.epsilon_max},
                        {"iterations", common_.iterations}, {"level", common_.level}};
    if (!common_.config_path.empty()) cfg["config_file"] = common_.config_path;
    for (auto it = config_.begin(); it != config_.end(); ++it) cfg[it.key()] = it.value();
    m["config"] = std::move(cfg);
    m["seeds"] = {{"master", common_.seed}};
    m["simd"] = std::string(delib::simd::to_string(delib::simd::active_isa()));
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    if (!stats_.empty()) m["run"] = stats_;
    delib::io::write_text(fs::path(common_.out) / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  const Common& common_;
  ordered_json inputs_ = ordered_json::array();
  ordered_json outputs_ = ordered_json::array();
  ordered_json config_ = ordered_json::object();
  ordered_json stats_ = ordered_json::object();
};

ordered_json metric_json(const delib::MetricValue& v) {
  return v.ok() ? ordered_json(*v.value) : ordered_json(nullptr);
}

std::string metric_csv(const delib::MetricValue& v) {
  return v.ok() ? delib::io::format_number(*v.value) : "NA";
}

struct ArmMetrics {
  std::vector<delib::ItemMetrics> items;
  ordered_json skipped = ordered_json::array();
  delib::DatasetSummary summary;
};

ArmMetrics arm_metrics(Run& run, const fs::path& pre, const fs::path& post, const delib::PerturbationConfig& cfg) {
  run.input(pre);
  run.input(post);
  const auto data = delib::ingest_surveys({pre, post});
  ArmMetrics out;
  out.summary = data.summary;
  for (const auto& [item, paired] : delib::pair_responses(data.records)) {
    if (paired.n() < 2) {
      out.skipped.push_back({{"item_id", item}, {"n", paired.n()},
                             {"reason", "TooFewRows: fewer than 2 paired respondents"}});
      continue;
    }
    out.items.push_back(delib::item_metrics(paired, cfg));
  }
  // Items with no paired rows at all never reach pair_responses output.
  for (const auto& s : data.summary.items) {
    bool seen = false;
    for (const auto& m : out.items) seen = seen || m.item_id == s.item_id;
    for (const auto& k : out.skipped) seen = seen || k["item_id"] == s.item_id;
    if (!seen) out.skipped.push_back({{"item_id", s.item_id}, {"n", 0}, {"reason", "TooFewRows: no paired respondents"}});
  }
  return out;
}

std::string metrics_csv(const std::vector<delib::ItemMetrics>& items) {
  std::ostringstream out;
  delib::csv::write_row(out, {"item_id", "n", "kendall_tau", "var_pre", "var_post", "variance_change_pct",
                              "mean_reversion"});
  for (const auto& m : items) {
    delib::csv::write_row(out, {m.item_id, std::to_string(m.n), metric_csv(m.tau),
                                delib::io::format_number(m.var_pre), delib::io::format_number(m.var_post),
                                metric_csv(m.var_change_pct), metric_csv(m.mean_reversion)});
  }
  return out.str();
}

ordered_json metrics_json(const ArmMetrics& arm, const delib::PerturbationConfig& cfg) {
  ordered_json j;
  j["metadata"] = {{"tau_mode", delib::to_string(cfg.mode)},
                   {"epsilon_max", cfg.epsilon_max},
                   {"seed", cfg.mode == delib::PerturbationConfig::Mode::Perturbed ? ordered_json(cfg.seed)
                                                                                   : ordered_json(nullptr)},
                   {"participants", arm.summary.participant_count},
                   {"survey_items", arm.summary.item_count}};
  auto items = ordered_json::array();
  for (const auto& m : arm.items) {
    ordered_json e = {{"item_id", m.item_id},
                      {"n", m.n},
                      {"kendall_tau", metric_json(m.tau)},
                      {"var_pre", m.var_pre},
                      {"var_post", m.var_post},
                      {"variance_change_pct", metric_json(m.var_change_pct)},
                      {"mean_reversion", metric_json(m.mean_reversion)}};
    ordered_json errors = ordered_json::object();
    if (!m.tau.ok()) errors["kendall_tau"] = m.tau.error;
    if (!m.var_change_pct.ok()) errors["variance_change_pct"] = m.var_change_pct.error;
    if (!m.mean_reversion.ok()) errors["mean_reversion"] = m.mean_reversion.error;
    if (!errors.empty()) e["errors"] = std::move(errors);
    items.push_back(std::move(e));
  }
  j["items"] = std::move(items);
  j["skipped"] = arm.skipped;
  return j;
}

std::string metrics_table(const std::vector<delib::ItemMetrics>& items) {
  std::ostringstream t;
  t << "item            n      tau   var_change%   mean_rev\n";
  auto cell = [](const delib::MetricValue& v, int d) { return v.ok() ? delib::io::format_fixed(*v.value, d) : "NA"; };
  for (const auto& m : items) {
    t << std::left << std::setw(12) << m.item_id << std::right << std::setw(6) << m.n << std::setw(9)
      << cell(m.tau, 3) << std::setw(14) << cell(m.var_change_pct, 2) << std::setw(11) << cell(m.mean_reversion, 3)
      << "\n";
  }
  return t.str();
}

// --- subcommands ---------------------------------------------------------

struct MetricsArgs {
  std::string pre, post;
};

int cmd_metrics(Common& c, const MetricsArgs& a) {
  Run run("metrics", c);
  const auto cfg = perturbation(c);
  const auto arm = arm_metrics(run, a.pre, a.post, cfg);
  run.write("metrics.csv", metrics_csv(arm.items));
  run.report("metrics", metrics_json(arm, cfg), metrics_table(arm.items));
  run.finish();
  return kOk;
}

struct CompareArgs {
  std::string treat_pre, treat_post, ctrl_pre, ctrl_post;
};

int cmd_compare(Common& c, const CompareArgs& a) {
  Run run("compare", c);
  const auto cfg = perturbation(c);
  const auto treat = arm_metrics(run, a.treat_pre, a.treat_post, cfg);
  const auto ctrl = arm_metrics(run, a.ctrl_pre, a.ctrl_post, cfg);
  delib::CompareConfig cc{bootstrap(c), delib::to_string(cfg.mode)};
  const auto report = delib::compare_arms(treat.items, ctrl.items, cc);
  auto j = delib::to_json(report);
  j["skipped"] = {{"treatment", treat.skipped}, {"control", ctrl.skipped}};
  run.write("metrics_treatment.csv", metrics_csv(treat.items));
  run.write("metrics_control.csv", metrics_csv(ctrl.items));
  run.report("compare", j, delib::render_table(report));
  run.finish();
  return kOk;
}

struct AggregateArgs {
  std::string transcripts, annotations, rosters, agenda_map, pre, post;
};

int cmd_aggregate(Common& c, const AggregateArgs& a) {
  Run run("aggregate", c);
  for (const auto& p : {a.transcripts, a.annotations, a.rosters, a.agenda_map, a.pre, a.post}) run.input(p);
  const auto statements = delib::read_transcripts(a.transcripts);
  const auto annotations = delib::read_annotations(a.annotations);
  const auto rosters = delib::read_rosters(a.rosters);
  const auto agenda = delib::read_agenda_map(a.agenda_map);
  const auto surveys = delib::ingest_surveys({a.pre, a.post});
  const auto result =
      delib::aggregate_room_agenda(statements, annotations, delib::pair_responses(surveys.records), rosters, agenda);
  std::ostringstream csv;
  delib::write_features_csv(csv, result.rows);
  run.write("features.csv", csv.str());
  ordered_json j;
  j["rows"] = result.rows.size();
  auto skipped = ordered_json::array();
  for (const auto& s : result.skipped) {
    skipped.push_back({{"room_id", s.room_id}, {"agenda_id", s.agenda_id}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skipped);
  std::ostringstream table;
  table << result.rows.size() << " room-agenda rows, " << result.skipped.size() << " empty cells skipped\n";
  run.report("aggregate", j, table.str());
  run.finish();
  return kOk;
}

struct AnnotateArgs {
  std::string transcripts, fewshots, cache;
  std::string transport = "http";
  std::string base_url = "http://localhost:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::size_t concurrency = 4;
  double rpm = 0.0;
  std::size_t max_attempts = 5;
  long backoff_ms = 500;
  std::size_t context_tokens = 3000;
};

int cmd_annotate(Common& c, AnnotateArgs a, const ConfigMerge& m) {
  namespace an = delib::annotate;
  Run run("annotate", c);
  run.input(a.transcripts);
  run.input(a.fewshots);
  if (a.cache.empty()) a.cache = (fs::path(c.out) / "annotation_cache.jsonl").string();

  std::map<std::string, std::string> models;
  if (m.raw().contains("annotate") && m.raw()["annotate"].contains("models")) {
    models = m.raw()["annotate"]["models"].get<std::map<std::string, std::string>>();
  }
  auto rubric = [&](an::Dimension d) {
    const auto name = an::to_string(d);
    auto r = an::default_rubric(d, models.count(name) ? models.at(name) : a.model);
    if (d == an::Dimension::Stance) r.few_shots = an::read_few_shots(a.fewshots);
    r.validate();
    return std::make_shared<const an::Rubric>(std::move(r));
  };
  const an::RubricSet rubrics{rubric(an::Dimension::Novelty), rubric(an::Dimension::Justification),
                              rubric(an::Dimension::Stance)};

  std::unique_ptr<an::Transport> transport;
  if (a.transport == "mock") {
    transport = std::make_unique<an::MockTransport>();
  } else {
    an::HttpConfig hc;
    hc.base_url = a.base_url;
    hc.path = a.path;
    transport = std::make_unique<an::HttpTransport>(hc);
  }
  an::AnnotationCache cache(a.cache);
  an::ClientConfig cc;
  cc.retry.max_attempts = a.max_attempts;
  cc.retry.initial_backoff = std::chrono::milliseconds(a.backoff_ms);
  cc.requests_per_minute = a.rpm;
  cc.prompt.context_token_budget = a.context_tokens;
  cc.concurrency = a.concurrency;
  an::Annotator annotator(*transport, cache, cc);

  const auto statements = delib::read_transcripts(a.transcripts);
  const auto result = an::annotate_corpus(statements, rubrics, annotator, a.concurrency);

  std::ostringstream csv;
  delib::write_annotations_csv(csv, result.annotations);
  run.write("annotations.csv", csv.str());
  std::ostringstream table;
  table << result.annotations.size() << " of " << statements.size() << " statements fully annotated, "
        << result.failures.size() << " failures\n";
  for (const auto& f : result.failures) {
    table << "  " << f.statement_id << " " << an::to_string(f.dimension) << ": " << f.code << " " << f.message << "\n";
  }
  run.report("annotate", an::to_json(result), table.str());

  run.config()["transport"] = a.transport;
  run.config()["base_url"] = a.base_url;
  run.config()["cache"] = a.cache;
  run.config()["concurrency"] = a.concurrency;
  run.config()["rpm"] = a.rpm;
  run.config()["max_attempts"] = a.max_attempts;
  run.config()["context_tokens"] = a.context_tokens;
  run.config()["prompt_version"] = std::string(an::kPromptVersion);
  for (auto d : an::kDimensions) run.config()["models"][an::to_string(d)] = rubrics.get(d)->model;
  run.stats() = {{"transport_calls", result.transport_calls},
                 {"cache_hits", result.cache_hits},
                 {"retries", result.retries}};
  run.finish();

  for (const auto& f : result.failures) {
    if (f.code == delib::to_string(delib::ErrorCode::TransportExhausted)) return kTransport;
  }
  return kOk;
}

struct RegressArgs {
  std::string features;
  std::string reference_agenda;
};

int cmd_regress(Common& c, const RegressArgs& a) {
  Run run("regress", c);
  run.input(a.features);
  const auto rows = delib::read_features(a.features);
  delib::RegressionSpec spec;
  if (!a.reference_agenda.empty()) spec.reference_agenda = a.reference_agenda;
  const auto report = delib::run_table3(rows, spec);
  run.report("regression", delib::to_json(report), delib::render_table(report));
  run.finish();
  return kOk;
}

struct IrrArgs {
  std::string ratings, model_labels;
};

int cmd_irr(Common& c, const IrrArgs& a) {
  Run run("irr", c);
  run.input(a.ratings);
  const auto matrix = delib::read_ratings(a.ratings);
  std::optional<std::vector<int>> model;
  if (!a.model_labels.empty()) {
    run.input(a.model_labels);
    model = delib::read_model_labels(a.model_labels, matrix);
  }
  const auto report = delib::irr_report(matrix, model, delib::IrrConfig{bootstrap(c)});
  run.report("irr", delib::to_json(report), delib::render_table(report));
  run.finish();
  return kOk;
}

struct SynthArgs {
  std::string scenario;
};

std::string survey_csv(const std::vector<delib::SurveyRecord>& records, delib::Phase phase) {
  std::vector<delib::SurveyRecord> subset;
  for (const auto& r : records)
    if (r.phase == phase) subset.push_back(r);
  std::ostringstream out;
  delib::write_surveys_csv(out, subset);
  return out.str();
}

int cmd_synth(Common& c, const SynthArgs& a, const CLI::App* cmd) {
  namespace sy = delib::synth;
  Run run("synth", c);
  run.input(a.scenario);
  json spec;
  try {
    spec = json::parse(delib::io::read_text(a.scenario));
  } catch (const json::exception& e) {
    throw delib::Error(delib::ErrorCode::InvalidParams, "scenario file: " + std::string(e.what()));
  }
  const bool seed_flag = cmd->count("--seed") > 0;
  ordered_json summary;

  auto emit_survey = [&](const std::string& prefix, json s, std::uint64_t fallback_seed) {
    if (seed_flag || !s.contains("seed")) s["seed"] = fallback_seed;
    const auto scenario = sy::scenario_from_json(s);
    const auto records = sy::to_records(sy::generate(scenario));
    run.write(prefix + "pre.csv", survey_csv(records, delib::Phase::Pre));
    run.write(prefix + "post.csv", survey_csv(records, delib::Phase::Post));
    return sy::to_json(scenario);
  };

  if (spec.contains("regression_fixture")) {
    json t = spec["regression_fixture"];
    if (seed_flag || !t.contains("seed")) t["seed"] = c.seed;
    const auto fx = sy::generate_regression_fixture(sy::truth_from_json(t));
    std::ostringstream csv;
    delib::write_features_csv(csv, fx.rows);
    run.write("features.csv", csv.str());
    summary["regression_fixture"] = {{"beta", fx.truth.beta},
                                     {"agenda_effects", fx.truth.agenda_effects},
                                     {"sigma", fx.truth.sigma},
                                     {"rows", fx.truth.rows},
                                     {"agendas", fx.truth.agendas},
                                     {"seed", fx.truth.seed}};
  }
  if (spec.contains("arms")) {
    if (!spec["arms"].is_object()) throw delib::Error(delib::ErrorCode::InvalidParams, "arms must be an object");
    for (auto it = spec["arms"].begin(); it != spec["arms"].end(); ++it) {
      const std::string arm = it.key();
      if (arm.empty() || arm.find_first_of("/\\.") != std::string::npos) {
        throw delib::Error(delib::ErrorCode::InvalidParams, "invalid arm name '" + arm + "'");
      }
      summary["arms"][arm] = emit_survey(arm + "/", it.value(), delib::rng::derive(c.seed, "synth/arm/" + arm));
    }
  }
  if (spec.contains("kind")) summary["scenario"] = emit_survey("", spec, c.seed);
  if (summary.empty()) {
    throw delib::Error(delib::ErrorCode::InvalidParams, "scenario file needs 'kind', 'arms' or 'regression_fixture'");
  }
  run.report("synth", summary, summary.dump(2) + "\n");
  run.finish();
  return kOk;
}

int exit_code(const delib::Error& e) {
  switch (e.code()) {
    case delib::ErrorCode::TransportExhausted: return kTransport;
    case delib::ErrorCode::CacheWrite: return kInternal;
    default: return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion-change metrics, arm comparison, annotation, reliability and regression for deliberation studies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "Per-item Kendall tau, variance change and mean reversion");
  add_common(m, common);
  m->add_option("--pre", metrics.pre, "Pre-survey CSV")->required()->check(CLI::ExistingFile);
  m->add_option("--post", metrics.post, "Post-survey CSV")->required()->check(CLI::ExistingFile);

  CompareArgs compare;
  auto* cp = app.add_subcommand("compare", "Treatment vs control report");
  add_common(cp, common);
  cp->add_option("--treat-pre", compare.treat_pre)->required()->check(CLI::ExistingFile);
  cp->add_option("--treat-post", compare.treat_post)->required()->check(CLI::ExistingFile);
  cp->add_option("--ctrl-pre", compare.ctrl_pre)->required()->check(CLI::ExistingFile);
  cp->add_option("--ctrl-post", compare.ctrl_post)->required()->check(CLI::ExistingFile);

  AggregateArgs aggregate;
  auto* ag = app.add_subcommand("aggregate", "Room-agenda features from transcripts, annotations and surveys");
  add_common(ag, common);
  ag->add_option("--transcripts", aggregate.transcripts)->required()->check(CLI::ExistingFile);
  ag->add_option("--annotations", aggregate.annotations)->required()->check(CLI::ExistingFile);
  ag->add_option("--rosters", aggregate.rosters)->required()->check(CLI::ExistingFile);
  ag->add_option("--agenda-map", aggregate.agenda_map)->required()->check(CLI::ExistingFile);
  ag->add_option("--pre", aggregate.pre)->required()->check(CLI::ExistingFile);
  ag->add_option("--post", aggregate.post)->required()->check(CLI::ExistingFile);

  AnnotateArgs annotate;
  auto* an = app.add_subcommand("annotate", "Rubric annotation through a chat-completion service");
  add_common(an, common);
  an->add_option("--transcripts", annotate.transcripts)->required()->check(CLI::ExistingFile);
  an->add_option("--fewshots", annotate.fewshots, "Stance examples JSON")->required()->check(CLI::ExistingFile);
  an->add_option("--cache", annotate.cache, "JSON-lines cache file");
  an->add_option("--transport", annotate.transport)->check(CLI::IsMember({"http", "mock"}));
  an->add_option("--base-url", annotate.base_url);
  an->add_option("--endpoint-path", annotate.path);
  an->add_option("--model", annotate.model, "Model for rubrics without a configured one");
  an->add_option("--concurrency", annotate.concurrency)->check(CLI::Range(1ul, 256ul));
  an->add_option("--rpm", annotate.rpm, "Requests per minute, 0 for unlimited");
  an->add_option("--max-attempts", annotate.max_attempts)->check(CLI::Range(1ul, 100ul));
  an->add_option("--backoff-ms", annotate.backoff_ms);
  an->add_option("--context-tokens", annotate.context_tokens);

  RegressArgs regress;
  auto* rg = app.add_subcommand("regress", "Room-agenda regression for both participant populations");
  add_common(rg, common);
  rg->add_option("--features", regress.features)->required()->check(CLI::ExistingFile);
  rg->add_option("--reference-agenda", regress.reference_agenda);

  IrrArgs irr;
  auto* ir = app.add_subcommand("irr", "Inter-rater reliability and leave-one-rater-out evaluation");
  add_common(ir, common);
  ir->add_option("--ratings", irr.ratings)->required()->check(CLI::ExistingFile);
  ir->add_option("--model-labels", irr.model_labels)->check(CLI::ExistingFile);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate synthetic surveys or regression fixtures");
  add_common(sy, common);
  sy->add_option("--scenario", synth.scenario)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    const ConfigMerge merge(cmd, cmd->get_name(), common.config_path);
    merge_common(merge, common);
    if (cmd == m) return cmd_metrics(common, metrics);
    if (cmd == cp) return cmd_compare(common, compare);
    if (cmd == ag) return cmd_aggregate(common, aggregate);
    if (cmd == an) {
      merge.apply("--transport", annotate.transport);
      merge.apply("--base-url", annotate.base_url);
      merge.apply("--endpoint-path", annotate.path);
      merge.apply("--model", annotate.model);
      merge.apply("--concurrency", annotate.concurrency);
      merge.apply("--rpm", annotate.rpm);
      merge.apply("--max-attempts", annotate.max_attempts);
      merge.apply("--backoff-ms", annotate.backoff_ms);
      merge.apply("--context-tokens", annotate.context_tokens);
      merge.apply("--cache", annotate.cache);
      return cmd_annotate(common, annotate, merge);
    }
    if (cmd == rg) {
      merge.apply("--reference-agenda", regress.reference_agenda);
      return cmd_regress(common, regress);
    }
    if (cmd == ir) return cmd_irr(common, irr);
    if (cmd == sy) return cmd_synth(common, synth, cmd);
  } catch (const delib::Error& e) {
    std::cerr << "delib " << cmd->get_name() << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "delib " << cmd->get_name() << ": internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
