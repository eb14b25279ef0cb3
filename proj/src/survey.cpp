#include "delib/survey.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_set>

#include "delib/csv.hpp"
#include "delib/error.hpp"

namespace delib {

ResponseValue ResponseValue::opinion(int score) {
  if (score < kMinScore || score > kMaxScore) {
    throw Error(ErrorCode::OutOfRange, "score " + std::to_string(score) + " outside 0..10");
  }
  ResponseValue v;
  v.score_ = score;
  return v;
}

std::string_view to_string(Phase phase) noexcept {
  return phase == Phase::Pre ? "pre" : "post";
}

std::vector<double> ItemPairedResponses::pre_values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.pre);
  return out;
}

std::vector<double> ItemPairedResponses::post_values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.post);
  return out;
}

ResponseValue parse_response_value(std::string_view token) {
  if (token == kNoOpinionToken) return ResponseValue::no_opinion();
  int value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::MalformedRow, "value '" + std::string(token) + "' is not an integer or NA");
  }
  return ResponseValue::opinion(value);
}

std::vector<SurveyRecord> parse_surveys(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"participant_id", "item_id", "phase", "value"}, "survey");
  const auto c_pid = table.column("participant_id");
  const auto c_item = table.column("item_id");
  const auto c_phase = table.column("phase");
  const auto c_value = table.column("value");

  std::vector<SurveyRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    SurveyRecord rec;
    rec.participant_id = row.fields[c_pid];
    rec.item_id = row.fields[c_item];
    if (rec.participant_id.empty() || rec.item_id.empty()) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(row.line) + ": empty participant_id or item_id");
    }
    const auto& phase = row.fields[c_phase];
    if (phase == "pre") {
      rec.phase = Phase::Pre;
    } else if (phase == "post") {
      rec.phase = Phase::Post;
    } else {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(row.line) + ": phase '" + phase + "' not pre/post");
    }
    try {
      rec.value = parse_response_value(row.fields[c_value]);
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(row.line));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void validate_unique(const std::vector<SurveyRecord>& records) {
  std::unordered_set<std::string> seen;
  seen.reserve(records.size() * 2);
  for (const auto& r : records) {
    std::string key = r.participant_id;
    key.push_back('\x1f');
    key += r.item_id;
    key.push_back('\x1f');
    key += to_string(r.phase);
    if (!seen.insert(std::move(key)).second) {
      throw Error(ErrorCode::DuplicateKey, "(" + r.participant_id + ", " + r.item_id + ", " +
                                               std::string(to_string(r.phase)) + ") repeated");
    }
  }
}

DatasetSummary summarize(const std::vector<SurveyRecord>& records) {
  struct Counts {
    std::size_t pre = 0, pre_na = 0, post = 0, post_na = 0;
  };
  std::set<std::string> participants;
  std::map<std::string, Counts> counts;
  for (const auto& r : records) {
    participants.insert(r.participant_id);
    auto& c = counts[r.item_id];
    if (r.phase == Phase::Pre) {
      ++c.pre;
      c.pre_na += r.value.has_opinion() ? 0 : 1;
    } else {
      ++c.post;
      c.post_na += r.value.has_opinion() ? 0 : 1;
    }
  }
  const auto paired = pair_responses(records);
  DatasetSummary s;
  s.participant_count = participants.size();
  s.item_count = counts.size();
  for (const auto& [item, c] : counts) {
    ItemSummary is;
    is.item_id = item;
    auto it = paired.find(item);
    is.paired = it == paired.end() ? 0 : it->second.n();
    is.no_opinion_pre = c.pre ? static_cast<double>(c.pre_na) / c.pre : 0.0;
    is.no_opinion_post = c.post ? static_cast<double>(c.post_na) / c.post : 0.0;
    s.items.push_back(std::move(is));
  }
  return s;
}

SurveyData ingest_surveys(const std::vector<std::filesystem::path>& files) {
  SurveyData data;
  for (const auto& f : files) {
    const auto table_text = [&] {
      std::ifstream in(f, std::ios::binary);
      if (!in) throw Error(ErrorCode::MalformedRow, "cannot open " + f.string());
      return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    std::vector<SurveyRecord> recs;
    try {
      recs = parse_surveys(table_text);
    } catch (const Error& e) {
      throw e.with_context(f.string());
    }
    data.records.insert(data.records.end(), std::make_move_iterator(recs.begin()),
                        std::make_move_iterator(recs.end()));
  }
  validate_unique(data.records);
  data.summary = summarize(data.records);
  return data;
}

std::map<std::string, ItemPairedResponses> pair_responses(
    const std::vector<SurveyRecord>& records) {
  // item -> participant -> (pre, post)
  std::map<std::string, std::map<std::string, std::pair<std::optional<int>, std::optional<int>>>>
      grid;
  for (const auto& r : records) {
    auto& slot = grid[r.item_id][r.participant_id];
    (r.phase == Phase::Pre ? slot.first : slot.second) = r.value.optional();
  }
  std::map<std::string, ItemPairedResponses> out;
  for (const auto& [item, participants] : grid) {
    ItemPairedResponses paired;
    paired.item_id = item;
    for (const auto& [pid, slot] : participants) {
      if (slot.first && slot.second) {
        paired.rows.push_back(PairedRow{pid, *slot.first, *slot.second});
      }
    }
    out.emplace(item, std::move(paired));
  }
  return out;
}

void write_surveys_csv(std::ostream& out, const std::vector<SurveyRecord>& records) {
  csv::write_row(out, {"participant_id", "item_id", "phase", "value"});
  for (const auto& r : records) {
    csv::write_row(out, {r.participant_id, r.item_id, std::string(to_string(r.phase)),
                         r.value.has_opinion() ? std::to_string(r.value.score())
                                               : std::string(kNoOpinionToken)});
  }
}

}  // namespace delib
