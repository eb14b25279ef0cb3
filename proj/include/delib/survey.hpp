#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace delib {

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 10;
/// Literal token for a "no opinion" answer in survey files.
inline constexpr std::string_view kNoOpinionToken = "NA";

/// A survey answer: an integer opinion 0..10, or no opinion.
class ResponseValue {
 public:
  static ResponseValue no_opinion() noexcept { return ResponseValue(); }
  /// Throws Error(OutOfRange) outside 0..10.
  static ResponseValue opinion(int score);

  bool has_opinion() const noexcept { return score_.has_value(); }
  int score() const { return score_.value(); }
  const std::optional<int>& optional() const noexcept { return score_; }

  friend bool operator==(const ResponseValue&, const ResponseValue&) = default;

 private:
  ResponseValue() = default;
  std::optional<int> score_;
};

enum class Phase { Pre, Post };

std::string_view to_string(Phase phase) noexcept;

struct SurveyRecord {
  std::string participant_id;
  std::string item_id;
  Phase phase = Phase::Pre;
  ResponseValue value = ResponseValue::no_opinion();
};

struct PairedRow {
  std::string participant_id;
  int pre = 0;
  int post = 0;

  int delta() const noexcept { return post - pre; }
};

/// Participants with an integer answer in both phases for one item,
/// sorted by participant id.
struct ItemPairedResponses {
  std::string item_id;
  std::vector<PairedRow> rows;

  std::size_t n() const noexcept { return rows.size(); }
  std::vector<double> pre_values() const;
  std::vector<double> post_values() const;
};

struct ItemSummary {
  std::string item_id;
  std::size_t paired = 0;          // n_j
  double no_opinion_pre = 0.0;     // fraction of pre answers that were NA
  double no_opinion_post = 0.0;
};

struct DatasetSummary {
  std::size_t participant_count = 0;  // n
  std::size_t item_count = 0;         // p
  std::vector<ItemSummary> items;     // sorted by item id
};

struct SurveyData {
  std::vector<SurveyRecord> records;
  DatasetSummary summary;
};

/// Parses one value token: an integer 0..10 or the literal NA.
ResponseValue parse_response_value(std::string_view token);

/// Parses survey CSV text (header participant_id,item_id,phase,value).
/// Errors carry the offending line number.
std::vector<SurveyRecord> parse_surveys(std::string_view csv_text);

/// Reads and validates one or more survey files as a single dataset; keys
/// must be unique across all of them.
SurveyData ingest_surveys(const std::vector<std::filesystem::path>& files);

/// Throws Error(DuplicateKey) if (participant, item, phase) repeats.
void validate_unique(const std::vector<SurveyRecord>& records);

DatasetSummary summarize(const std::vector<SurveyRecord>& records);

/// Listwise deletion per item. Independent of record order.
std::map<std::string, ItemPairedResponses> pair_responses(
    const std::vector<SurveyRecord>& records);

void write_surveys_csv(std::ostream& out, const std::vector<SurveyRecord>& records);

}  // namespace delib
