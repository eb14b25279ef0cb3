#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "delib/transcript.hpp"
#include "json.hpp"

namespace delib {

enum class OutcomeVariant { AllParticipants, NonContributors };

std::string to_string(OutcomeVariant v);

/// Opinion change on expressed support (S), novelty (N), justification (J),
/// S x N, S x J, pre-opinion (O), log statement count (L) and agenda dummies.
struct RegressionSpec {
  OutcomeVariant outcome = OutcomeVariant::AllParticipants;
  bool center = true;
  /// Omitted agenda level; defaults to the lexicographically smallest id.
  std::optional<std::string> reference_agenda;
};

struct Design {
  Eigen::MatrixXd x;   // intercept first, then predictors, then dummies
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  std::vector<std::string> row_ids;    // "room/agenda"
  std::size_t predictor_columns = 0;   // columns 1..predictor_columns are non-dummy
  std::string reference_agenda;
  std::string pre_opinion_source;      // which O column fed the design
  std::vector<std::string> excluded;   // rows dropped for missing values
  std::vector<std::string> warnings;
};

/// Builds the design. Throws InvalidParams when there are no usable rows or
/// not more rows than columns. A single agenda level adds a warning and no
/// dummy columns.
Design build_design(const std::vector<RoomAgendaFeatures>& rows, const RegressionSpec& spec);

struct RegressionFit {
  std::vector<std::string> columns;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd se_hc3;
  Eigen::VectorXd t;
  Eigen::VectorXd p;
  Eigen::VectorXd residuals;
  Eigen::VectorXd leverage;
  Eigen::VectorXd fitted;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t df = 0;  // n - columns
  std::vector<double> vif;  // per non-dummy predictor; +inf when collinear
};

/// OLS through a column-pivoted Householder QR with HC3 covariance
/// (X'X)^-1 X' diag(e_i^2 / (1 - h_ii)^2) X (X'X)^-1. Throws RankDeficient,
/// LeverageOne (naming the row) or InvalidParams (no residual df).
RegressionFit fit_ols_hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<std::string>& row_ids = {});

/// VIF_j = 1 / (1 - R^2_j), regressing column j on the others plus an
/// intercept. Perfect collinearity gives +inf.
std::vector<double> vif(const Eigen::MatrixXd& predictors);

/// Fits `design`, filling VIF for its non-dummy predictors.
RegressionFit fit_design(const Design& design);

struct Table3Report {
  Design all_design;
  Design noncontrib_design;
  RegressionFit all;
  RegressionFit noncontrib;
};

/// Both populations with the same predictor construction.
Table3Report run_table3(const std::vector<RoomAgendaFeatures>& rows, const RegressionSpec& base = {});

nlohmann::ordered_json to_json(const Design& design, const RegressionFit& fit);
nlohmann::ordered_json to_json(const Table3Report& report);

/// Two-column layout with HC3 SEs in parentheses; ** p < 0.001, * p < 0.05.
std::string render_table(const Table3Report& report);

}  // namespace delib
