#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "delib/error.hpp"
#include "delib/inference.hpp"
#include "json.hpp"

namespace delib {

/// statements x raters grid of optional integer labels.
struct RatingMatrix {
  std::vector<std::string> statement_ids;
  std::vector<std::string> rater_ids;
  std::vector<std::vector<std::optional<int>>> labels;  // [statement][rater]

  std::size_t statements() const noexcept { return statement_ids.size(); }
  std::size_t raters() const noexcept { return rater_ids.size(); }

  /// Builds a matrix from complete rows of labels (one row per statement).
  static RatingMatrix from_rows(const std::vector<std::vector<int>>& rows);

  /// Subset of statements (with repetition), used by the bootstrap.
  RatingMatrix select(const std::vector<std::size_t>& statement_indices) const;
};

enum class DistanceMetric { Ordinal, Nominal };

std::string to_string(DistanceMetric m);

/// Coincidence-matrix Krippendorff's alpha. Ordinal distance is the squared
/// difference of label ranks; nominal is 0/1. Statements with fewer than two
/// ratings are not pairable and are ignored. Throws DegenerateLabels when the
/// expected disagreement is zero (a single label value observed).
double krippendorff_alpha(const RatingMatrix& matrix, DistanceMetric metric);

/// Fleiss' kappa over the observed label set. Throws UnequalRaterCounts if
/// statements carry different numbers of ratings, DegenerateExpected when
/// chance agreement is 1.
double fleiss_kappa(const RatingMatrix& matrix);

struct AgreementFractions {
  double complete = 0.0;  // every rating identical
  double near = 0.0;      // at least r-1 of r ratings share a label
};

AgreementFractions agreement_fractions(const RatingMatrix& matrix);

enum class LooOutcome { ModelCloser, HumanCloser, Tie };

std::string to_string(LooOutcome o);

struct LooTally {
  std::size_t model_closer = 0;
  std::size_t human_closer = 0;
  std::size_t ties = 0;

  std::size_t total() const noexcept { return model_closer + human_closer + ties; }
  void add(LooOutcome o) noexcept;
};

struct LooFold {
  std::string statement_id;
  std::string rater_id;
  double target = 0.0;     // mean of the other raters
  double human_dev = 0.0;
  double model_dev = 0.0;
  LooOutcome outcome = LooOutcome::Tie;
};

struct LooStatement {
  std::string statement_id;
  double human_mean_dev = 0.0;  // averaged over folds
  double model_mean_dev = 0.0;
  LooOutcome outcome = LooOutcome::Tie;
};

struct LooReport {
  std::vector<LooFold> folds;
  LooTally pairs;
  std::map<std::string, LooTally> per_rater;
  std::vector<LooStatement> statements;
  LooTally statement_tally;
  std::optional<double> binomial_p;  // statement wins vs losses, ties excluded
};

/// Deviations are compared exactly: scaled by (raters - 1) they are integers.
inline constexpr double kLooTieTolerance = 1e-12;

/// Leave-one-rater-out comparison of each held-out human and the model
/// against the mean of the remaining raters. `model_labels` is aligned with
/// matrix.statement_ids. Throws MissingRatings for incomplete input.
LooReport loo_consensus(const RatingMatrix& matrix, const std::vector<int>& model_labels);

struct IrrConfig {
  BootstrapConfig bootstrap;
};

struct IrrReport {
  std::size_t statements = 0;
  std::size_t raters = 0;
  Fallible<double> alpha_ordinal;
  Fallible<double> alpha_nominal;
  Fallible<double> kappa;
  std::optional<Interval> alpha_ordinal_ci;
  std::optional<Interval> kappa_ci;
  std::size_t bootstrap_degenerate = 0;  // resamples where a statistic was undefined
  AgreementFractions agreement;
  std::optional<LooReport> loo;
  IrrConfig config;
};

/// Reliability metrics, statement-resampling bootstrap CIs and, if model
/// labels are given, the leave-one-out evaluation.
IrrReport irr_report(const RatingMatrix& matrix, const std::optional<std::vector<int>>& model_labels,
                     const IrrConfig& config);

nlohmann::ordered_json to_json(const IrrReport& report);
std::string render_table(const IrrReport& report);

/// Ratings CSV: statement_id,rater_id,label (labels 0..2).
RatingMatrix parse_ratings(std::string_view csv_text);
RatingMatrix read_ratings(const std::filesystem::path& path);

/// Model labels CSV: statement_id,label; returned aligned with `matrix`.
std::vector<int> parse_model_labels(std::string_view csv_text, const RatingMatrix& matrix);
std::vector<int> read_model_labels(const std::filesystem::path& path, const RatingMatrix& matrix);

}  // namespace delib
