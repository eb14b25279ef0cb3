#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "delib/survey.hpp"
#include "delib/transcript.hpp"
#include "json.hpp"

namespace delib::synth {

/// Opinion-change mechanisms with a known ground truth.
enum class ScenarioKind {
  ParallelShift,                // post = pre + delta
  ProportionalCompression,      // post = mean + lambda (pre - mean), 0 < lambda < 1
  RankPreservingExtremization,  // same map, lambda > 1
  ReshuffleConvergence,         // compression, then swap post values in random pairs
  ReshuffleDivergence,          // extremization, then swaps
  IndependentUniform,           // post redrawn uniformly
  ControlNoise,                 // post = pre + rounded N(0, sigma)
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_kind(const std::string& name);

struct Scenario {
  ScenarioKind kind = ScenarioKind::ControlNoise;
  std::size_t participants = 1000;
  std::size_t items = 1;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double lambda = 1.0;
  double phi = 0.0;    // fraction of participants whose post values are swapped
  double sigma = 1.0;
  bool integer_grid = true;  // round and clamp to 0..10 as the last step

  /// Throws Error(InvalidParams) for out-of-range parameters.
  void validate() const;
};

struct SyntheticItem {
  std::string item_id;
  std::vector<double> pre;
  std::vector<double> post;
};

/// Participant i has id "p<i>" (zero padded); item j has id "q<j>".
std::string participant_id(std::size_t index, std::size_t count);
std::string item_id(std::size_t index, std::size_t count);

/// Bit-deterministic in the scenario (seed included).
std::vector<SyntheticItem> generate(const Scenario& scenario);

/// Survey records for an integer-grid dataset, pre records then post.
std::vector<SurveyRecord> to_records(const std::vector<SyntheticItem>& items);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& s);

/// Coefficients of the room-agenda model, in design column order:
/// intercept, S, N, J, S:N, S:J, O, L.
using Beta = std::array<double, 8>;

struct RegressionTruth {
  Beta beta{};
  std::vector<double> agenda_effects;  // one per agenda level; level 0 is the reference (effect 0)
  double sigma = 0.5;
  std::size_t rows = 460;
  std::size_t agendas = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegressionFixture {
  std::vector<RoomAgendaFeatures> rows;
  RegressionTruth truth;
};

/// Features from fixed distributions (S ~ N(1, 0.35) on [0, 2], N ~ N(3, 0.5)
/// and J ~ N(3, 0.6) on [1, 5], O ~ N(5, 1.2) on [0, 10], 3..42 statements);
/// outcomes from the linear predictor on centered features plus N(0, sigma).
/// The non-contributor outcome uses its own pre-opinion and noise draws.
RegressionFixture generate_regression_fixture(const RegressionTruth& truth);

RegressionTruth truth_from_json(const nlohmann::json& j);

}  // namespace delib::synth
