#include "delib/annotate/client.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>
#include <cmath>
#include <ctime>
#include <thread>

#include "delib/error.hpp"
#include "delib/parallel.hpp"

namespace delib::annotate {

void real_sleep(std::chrono::milliseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

std::chrono::milliseconds RetryPolicy::delay(std::size_t retry) const {
  const double ms = static_cast<double>(initial_backoff.count()) *
                    std::pow(multiplier, static_cast<double>(retry > 0 ? retry - 1 : 0));
  const double capped = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

RateLimiter::RateLimiter(double requests_per_minute, Sleeper sleeper) : sleeper_(std::move(sleeper)) {
  if (requests_per_minute > 0.0) {
    interval_ = std::chrono::nanoseconds(static_cast<long long>(60e9 / requests_per_minute));
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  const auto wait = std::chrono::ceil<std::chrono::milliseconds>(slot - std::chrono::steady_clock::now());
  if (wait.count() > 0) sleeper_(wait);
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AnnotationResult from_raw(const std::string& raw, const Rubric& rubric, const Statement& s) {
  AnnotationResult r;
  r.statement_id = s.statement_id;
  r.dimension = rubric.dimension;
  r.model = rubric.model;
  r.raw = raw;
  auto parsed = parse_response(raw, rubric);
  r.label = parsed.label;
  r.rationale = std::move(parsed.rationale);
  r.problem = std::move(parsed.problem);
  r.status = r.label ? ResultStatus::Ok : ResultStatus::Unparseable;
  return r;
}

}  // namespace

Annotator::Annotator(Transport& transport, AnnotationCache& cache, ClientConfig config, Sleeper sleeper)
    : transport_(transport),
      cache_(cache),
      config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      limiter_(config_.requests_per_minute, sleeper_) {
  if (config_.retry.max_attempts < 1) throw Error(ErrorCode::InvalidParams, "max_attempts must be >= 1");
}

AnnotationResult Annotator::annotate(const AnnotationRequest& request) {
  const std::string prompt = build_prompt(request, config_.prompt);
  return complete_prompt(prompt, *request.rubric, request.statement);
}

AnnotationResult Annotator::complete_prompt(const std::string& prompt, const Rubric& rubric,
                                            const Statement& statement) {
  const std::string key = cache_key(prompt, rubric.model);
  if (auto hit = cache_.lookup(key)) {
    ++cache_hits_;
    auto r = from_raw(hit->raw_response, rubric, statement);
    r.from_cache = true;
    return r;
  }

  const ChatRequest chat{rubric.model, prompt, 0.0};
  std::string raw;
  std::size_t attempts = 0;
  const auto start = std::chrono::steady_clock::now();
  for (;;) {
    limiter_.acquire();
    ++attempts;
    ++transport_calls_;
    try {
      raw = transport_.complete(chat);
      break;
    } catch (const TransportFailure& e) {
      if (!e.transient()) {
        throw Error(ErrorCode::TransportExhausted, std::string("non-retryable: ") + e.what());
      }
      if (attempts >= config_.retry.max_attempts) {
        throw Error(ErrorCode::TransportExhausted,
                    std::to_string(attempts) + " attempts failed, last: " + e.what());
      }
      const auto wait = config_.retry.delay(attempts);
      {
        std::lock_guard lock(log_mutex_);
        retry_log_.push_back({key, attempts, wait, e.what()});
      }
      sleeper_(wait);
    }
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;

  auto r = from_raw(raw, rubric, statement);
  r.attempts = attempts;
  r.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();

  CacheRecord rec;
  rec.key = key;
  rec.request = {{"model", rubric.model},
                 {"dimension", to_string(rubric.dimension)},
                 {"statement_id", statement.statement_id},
                 {"agenda_id", statement.agenda_id},
                 {"prompt_version", std::string(kPromptVersion)},
                 {"prompt_chars", prompt.size()}};
  rec.raw_response = raw;
  rec.label = r.label;
  rec.timestamp = utc_timestamp();
  cache_.append(rec);
  return r;
}

std::vector<RetryEvent> Annotator::retry_log() const {
  std::lock_guard lock(log_mutex_);
  return retry_log_;
}

const std::shared_ptr<const Rubric>& RubricSet::get(Dimension d) const {
  switch (d) {
    case Dimension::Novelty: return novelty;
    case Dimension::Justification: return justification;
    case Dimension::Stance: break;
  }
  return stance;
}

CorpusResult annotate_corpus(const std::vector<Statement>& statements, const RubricSet& rubrics,
                             Annotator& annotator, std::size_t concurrency) {
  for (auto d : kDimensions) {
    if (!rubrics.get(d)) throw Error(ErrorCode::InvalidParams, "missing rubric for " + to_string(d));
    rubrics.get(d)->validate();
  }
  std::vector<Statement> sorted = statements;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Statement& a, const Statement& b) {
    return std::tie(a.room_id, a.agenda_id, a.seq) < std::tie(b.room_id, b.agenda_id, b.seq);
  });

  constexpr std::size_t kDims = std::size(kDimensions);
  struct Task {
    std::size_t statement;
    Dimension dimension;
    std::string prompt;
    std::string key;
    std::size_t unique = 0;  // index into the unique-prompt list
    std::optional<AnnotationFailure> failure;
  };
  std::vector<Task> tasks;
  tasks.reserve(sorted.size() * kDims);

  const std::size_t budget = annotator.config().prompt.context_token_budget;
  std::size_t group_start = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (i == 0 || s.room_id != sorted[i - 1].room_id || s.agenda_id != sorted[i - 1].agenda_id) group_start = i;
    std::size_t prior_end = i;
    while (prior_end > group_start && sorted[prior_end - 1].seq >= s.seq) --prior_end;
    for (auto d : kDimensions) {
      AnnotationRequest req{s, rubrics.get(d), {}};
      if (d == Dimension::Novelty) {
        req.prior.assign(sorted.begin() + static_cast<std::ptrdiff_t>(group_start),
                         sorted.begin() + static_cast<std::ptrdiff_t>(prior_end));
      }
      Task t{i, d, {}, {}, 0, std::nullopt};
      try {
        t.prompt = build_prompt(req, {budget});
        t.key = cache_key(t.prompt, req.rubric->model);
      } catch (const Error& e) {
        t.failure = AnnotationFailure{s.statement_id, d, std::string(to_string(e.code())), e.detail(), {}};
      }
      tasks.push_back(std::move(t));
    }
  }

  std::map<std::string, std::size_t> unique_index;
  std::vector<std::size_t> unique_tasks;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].failure) continue;
    const auto [it, fresh] = unique_index.emplace(tasks[t].key, unique_tasks.size());
    if (fresh) unique_tasks.push_back(t);
    tasks[t].unique = it->second;
  }

  const std::size_t calls_before = annotator.transport_calls();
  const std::size_t hits_before = annotator.cache_hits();
  const std::size_t retries_before = annotator.retry_log().size();

  std::vector<std::optional<AnnotationResult>> unique_results(unique_tasks.size());
  std::vector<std::optional<Error>> unique_errors(unique_tasks.size());
  const unsigned threads = static_cast<unsigned>(std::max<std::size_t>(1, concurrency));
  parallel_for(unique_tasks.size(), threads, [&](std::size_t u) {
    const Task& t = tasks[unique_tasks[u]];
    try {
      unique_results[u] = annotator.complete_prompt(t.prompt, *rubrics.get(t.dimension), sorted[t.statement]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CacheWrite) throw;
      unique_errors[u] = e;
    }
  });

  CorpusResult out;
  std::vector<std::array<std::optional<int>, kDims>> labels(sorted.size());
  std::vector<std::string> stance_rationale(sorted.size());
  for (auto& t : tasks) {
    const auto& s = sorted[t.statement];
    if (!t.failure && unique_errors[t.unique]) {
      const Error& e = *unique_errors[t.unique];
      t.failure = AnnotationFailure{s.statement_id, t.dimension, std::string(to_string(e.code())), e.detail(), {}};
    }
    if (t.failure) {
      out.failures.push_back(*t.failure);
      continue;
    }
    AnnotationResult r = *unique_results[t.unique];
    r.statement_id = s.statement_id;
    if (r.status == ResultStatus::Unparseable) {
      out.failures.push_back({s.statement_id, t.dimension, std::string(to_string(ErrorCode::Unparseable)),
                              r.problem, r.raw});
    } else {
      labels[t.statement][static_cast<std::size_t>(t.dimension)] = r.label;
      if (t.dimension == Dimension::Stance) stance_rationale[t.statement] = r.rationale;
    }
    out.results.push_back(std::move(r));
  }

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& l = labels[i];
    if (!l[0] || !l[1] || !l[2]) continue;
    out.annotations.push_back({sorted[i].statement_id, *l[0], *l[1], *l[2], stance_rationale[i]});
  }
  out.transport_calls = annotator.transport_calls() - calls_before;
  out.cache_hits = annotator.cache_hits() - hits_before;
  out.retries = annotator.retry_log().size() - retries_before;
  return out;
}

nlohmann::ordered_json to_json(const CorpusResult& result) {
  nlohmann::ordered_json j;
  j["annotated_statements"] = result.annotations.size();
  j["results"] = result.results.size();
  auto failures = nlohmann::ordered_json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"statement_id", f.statement_id},
                        {"dimension", to_string(f.dimension)},
                        {"code", f.code},
                        {"message", f.message},
                        {"raw", f.raw}});
  }
  j["failures"] = std::move(failures);
  return j;
}

}  // namespace delib::annotate
