#include "delib/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "delib/error.hpp"
#include "delib/rng.hpp"

namespace delib::synth {

namespace {

struct KindName {
  ScenarioKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ScenarioKind::ParallelShift, "parallel_shift"},
    {ScenarioKind::ProportionalCompression, "proportional_compression"},
    {ScenarioKind::RankPreservingExtremization, "rank_preserving_extremization"},
    {ScenarioKind::ReshuffleConvergence, "reshuffle_convergence"},
    {ScenarioKind::ReshuffleDivergence, "reshuffle_divergence"},
    {ScenarioKind::IndependentUniform, "independent_uniform"},
    {ScenarioKind::ControlNoise, "control_noise"},
};

std::string padded(char prefix, std::size_t index, std::size_t count) {
  const auto digits = std::to_string(count > 0 ? count - 1 : 0).size();
  auto s = std::to_string(index);
  return std::string(1, prefix) + std::string(digits > s.size() ? digits - s.size() : 0, '0') + s;
}

void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParams, what); }

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

ScenarioKind parse_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw Error(ErrorCode::InvalidParams, "unknown scenario kind '" + name + "'");
}

void Scenario::validate() const {
  if (participants < 2) invalid("need at least 2 participants");
  if (items < 1) invalid("need at least 1 item");
  switch (kind) {
    case ScenarioKind::ParallelShift:
      if (!std::isfinite(delta)) invalid("delta must be finite");
      break;
    case ScenarioKind::ProportionalCompression:
      if (!(lambda > 0.0 && lambda < 1.0)) invalid("compression needs lambda in (0, 1)");
      break;
    case ScenarioKind::RankPreservingExtremization:
      if (!(lambda > 1.0 && std::isfinite(lambda))) invalid("extremization needs lambda > 1");
      break;
    case ScenarioKind::ReshuffleConvergence:
      if (!(phi > 0.0 && phi <= 1.0)) invalid("reshuffle needs phi in (0, 1]");
      if (!(lambda > 0.0 && lambda <= 1.0)) invalid("reshuffle_convergence needs lambda in (0, 1]");
      break;
    case ScenarioKind::ReshuffleDivergence:
      if (!(phi > 0.0 && phi <= 1.0)) invalid("reshuffle needs phi in (0, 1]");
      if (!(lambda > 1.0 && std::isfinite(lambda))) invalid("reshuffle_divergence needs lambda > 1");
      break;
    case ScenarioKind::IndependentUniform:
      break;
    case ScenarioKind::ControlNoise:
      if (!(sigma >= 0.0 && std::isfinite(sigma))) invalid("control_noise needs sigma >= 0");
      break;
  }
}

std::string participant_id(std::size_t index, std::size_t count) { return padded('p', index, count); }
std::string item_id(std::size_t index, std::size_t count) { return padded('q', index, count); }

namespace {

SyntheticItem generate_item(const Scenario& s, std::size_t item) {
  const std::size_t n = s.participants;
  const std::string tag = "synth/" + std::to_string(item) + "/";
  const rng::CounterRng pre_rng(rng::derive(s.seed, tag + "pre"));
  SyntheticItem out;
  out.item_id = item_id(item, s.items);
  out.pre.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.pre[i] = static_cast<double>(pre_rng.below(i, 11));
  const double mean = std::accumulate(out.pre.begin(), out.pre.end(), 0.0) / static_cast<double>(n);

  out.post.resize(n);
  switch (s.kind) {
    case ScenarioKind::ParallelShift:
      for (std::size_t i = 0; i < n; ++i) out.post[i] = out.pre[i] + s.delta;
      break;
    case ScenarioKind::ProportionalCompression:
    case ScenarioKind::RankPreservingExtremization:
    case ScenarioKind::ReshuffleConvergence:
    case ScenarioKind::ReshuffleDivergence:
      for (std::size_t i = 0; i < n; ++i) out.post[i] = mean + s.lambda * (out.pre[i] - mean);
      break;
    case ScenarioKind::IndependentUniform: {
      const rng::CounterRng post_rng(rng::derive(s.seed, tag + "post"));
      for (std::size_t i = 0; i < n; ++i) out.post[i] = static_cast<double>(post_rng.below(i, 11));
      break;
    }
    case ScenarioKind::ControlNoise: {
      const rng::CounterRng noise(rng::derive(s.seed, tag + "noise"));
      for (std::size_t i = 0; i < n; ++i) out.post[i] = out.pre[i] + std::round(s.sigma * noise.normal(i));
      break;
    }
  }

  if (s.kind == ScenarioKind::ReshuffleConvergence || s.kind == ScenarioKind::ReshuffleDivergence) {
    // Partial Fisher-Yates picks the swapped participants; consecutive picks pair up.
    const std::size_t swapped = 2 * static_cast<std::size_t>(std::floor(s.phi * static_cast<double>(n) / 2.0));
    const rng::CounterRng swap_rng(rng::derive(s.seed, tag + "swap"));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = 0; k < swapped; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(swap_rng.below(k, n - k));
      std::swap(perm[k], perm[pick]);
    }
    for (std::size_t k = 0; k + 1 < swapped; k += 2) std::swap(out.post[perm[k]], out.post[perm[k + 1]]);
  }

  if (s.integer_grid) {
    for (auto& v : out.post) v = std::clamp(std::round(v), 0.0, 10.0);
  }
  return out;
}

}  // namespace

std::vector<SyntheticItem> generate(const Scenario& scenario) {
  scenario.validate();
  std::vector<SyntheticItem> items;
  items.reserve(scenario.items);
  for (std::size_t j = 0; j < scenario.items; ++j) items.push_back(generate_item(scenario, j));
  return items;
}

std::vector<SurveyRecord> to_records(const std::vector<SyntheticItem>& items) {
  std::vector<SurveyRecord> out;
  for (auto phase : {Phase::Pre, Phase::Post}) {
    for (const auto& item : items) {
      const auto& values = phase == Phase::Pre ? item.pre : item.post;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v != std::round(v)) throw Error(ErrorCode::InvalidParams, "non-integer synthetic opinion");
        out.push_back({participant_id(i, values.size()), item.item_id, phase,
                       ResponseValue::opinion(static_cast<int>(v))});
      }
    }
  }
  return out;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidParams, "scenario must be a JSON object");
  Scenario s;
  try {
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.participants = j.value("participants", s.participants);
    s.items = j.value("items", s.items);
    s.seed = j.value("seed", s.seed);
    s.delta = j.value("delta", s.delta);
    s.lambda = j.value("lambda", s.lambda);
    s.phi = j.value("phi", s.phi);
    s.sigma = j.value("sigma", s.sigma);
    s.integer_grid = j.value("integer_grid", s.integer_grid);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::ordered_json to_json(const Scenario& s) {
  return {{"kind", to_string(s.kind)}, {"participants", s.participants}, {"items", s.items},
          {"seed", s.seed}, {"delta", s.delta}, {"lambda", s.lambda}, {"phi", s.phi},
          {"sigma", s.sigma}, {"integer_grid", s.integer_grid}};
}

void RegressionTruth::validate() const {
  constexpr std::size_t kColumns = 8;
  if (agendas < 1) invalid("need at least 1 agenda level");
  if (rows <= kColumns + agendas - 1) invalid("need more rows than design columns");
  if (!(sigma >= 0.0 && std::isfinite(sigma))) invalid("sigma must be >= 0");
  if (!agenda_effects.empty() && agenda_effects.size() != agendas) {
    invalid("agenda_effects needs one entry per agenda level");
  }
}

RegressionFixture generate_regression_fixture(const RegressionTruth& truth) {
  truth.validate();
  const std::size_t n = truth.rows;
  const rng::CounterRng features(rng::derive(truth.seed, "fixture/features"));
  const rng::CounterRng noise_all(rng::derive(truth.seed, "fixture/noise/all"));
  const rng::CounterRng noise_quiet(rng::derive(truth.seed, "fixture/noise/noncontrib"));

  RegressionFixture fx;
  fx.truth = truth;
  fx.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = fx.rows[i];
    const std::uint64_t base = 16 * i;
    r.room_id = "R" + std::to_string(i / truth.agendas);
    r.agenda_id = "A" + std::to_string(i % truth.agendas + 1);
    r.support = std::clamp(1.0 + 0.35 * features.normal(base + 0), 0.0, 2.0);
    r.novelty = std::clamp(3.0 + 0.5 * features.normal(base + 1), 1.0, 5.0);
    r.justification = std::clamp(3.0 + 0.6 * features.normal(base + 2), 1.0, 5.0);
    r.pre_opinion = std::clamp(5.0 + 1.2 * features.normal(base + 3), 0.0, 10.0);
    r.pre_opinion_noncontrib = std::clamp(*r.pre_opinion + 0.3 * features.normal(base + 4), 0.0, 10.0);
    r.statements = 3 + static_cast<std::size_t>(features.below(base + 5, 40));
    r.log_statements = std::log(static_cast<double>(r.statements));
    r.n_speakers = 1 + static_cast<std::size_t>(features.below(base + 6, 6));
    r.n_silent = static_cast<std::size_t>(features.below(base + 7, 4));
  }

  auto mean_of = [&](auto get) {
    double s = 0.0;
    for (const auto& r : fx.rows) s += get(r);
    return s / static_cast<double>(n);
  };
  const double ms = mean_of([](const auto& r) { return r.support; });
  const double mn = mean_of([](const auto& r) { return r.novelty; });
  const double mj = mean_of([](const auto& r) { return r.justification; });
  const double mo = mean_of([](const auto& r) { return *r.pre_opinion; });
  const double mq = mean_of([](const auto& r) { return *r.pre_opinion_noncontrib; });
  const double ml = mean_of([](const auto& r) { return r.log_statements; });

  const auto& b = truth.beta;
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = fx.rows[i];
    const double s = r.support - ms, nv = r.novelty - mn, j = r.justification - mj, l = r.log_statements - ml;
    const double agenda = truth.agenda_effects.empty() ? 0.0 : truth.agenda_effects[i % truth.agendas];
    const double shared = b[0] + b[1] * s + b[2] * nv + b[3] * j + b[4] * s * nv + b[5] * s * j + b[7] * l + agenda;
    r.delta_all = shared + b[6] * (*r.pre_opinion - mo) + truth.sigma * noise_all.normal(i);
    r.delta_noncontrib = shared + b[6] * (*r.pre_opinion_noncontrib - mq) + truth.sigma * noise_quiet.normal(i);
  }
  return fx;
}

RegressionTruth truth_from_json(const nlohmann::json& j) {
  RegressionTruth t;
  try {
    if (j.contains("beta")) {
      const auto beta = j.at("beta").get<std::vector<double>>();
      if (beta.size() != t.beta.size()) invalid("beta needs 8 entries (intercept, S, N, J, S:N, S:J, O, L)");
      std::copy(beta.begin(), beta.end(), t.beta.begin());
    }
    t.agenda_effects = j.value("agenda_effects", t.agenda_effects);
    t.sigma = j.value("sigma", t.sigma);
    t.rows = j.value("rows", t.rows);
    t.agendas = j.value("agendas", t.agendas);
    t.seed = j.value("seed", t.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("regression fixture: ") + e.what());
  }
  t.validate();
  return t;
}

}  // namespace delib::synth
