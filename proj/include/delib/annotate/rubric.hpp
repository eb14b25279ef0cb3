#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "delib/transcript.hpp"

namespace delib::annotate {

enum class Dimension { Novelty, Justification, Stance };

std::string to_string(Dimension d);
Dimension parse_dimension(std::string_view name);
constexpr Dimension kDimensions[] = {Dimension::Novelty, Dimension::Justification, Dimension::Stance};

/// Bumped whenever the prompt skeleton changes; part of every cache record.
inline constexpr std::string_view kPromptVersion = "delib-prompt-1";

struct FewShot {
  std::string agenda_id;
  std::string statement;
  int label = 0;
  std::string rationale;
};

inline constexpr std::size_t kStanceFewShotsPerAgenda = 6;

struct Rubric {
  Dimension dimension = Dimension::Novelty;
  int min_label = 1;
  int max_label = 5;
  std::string criterion;
  std::vector<std::string> legend;  // legend[k] describes label min_label + k
  std::map<std::string, std::vector<FewShot>> few_shots;  // by agenda id; stance only
  std::string model;

  bool in_range(int label) const noexcept { return label >= min_label && label <= max_label; }
  /// Throws Error(InvalidParams) on a broken scale or an out-of-range example label.
  void validate() const;
};

/// Built-in rubric text for a dimension. Stance few-shots must be attached.
Rubric default_rubric(Dimension d, std::string model = {});

/// JSON array of {agenda_id, statement, label, rationale}, grouped by agenda.
std::map<std::string, std::vector<FewShot>> parse_few_shots(std::string_view json_text);
std::map<std::string, std::vector<FewShot>> read_few_shots(const std::filesystem::path& path);

struct AnnotationRequest {
  Statement statement;
  std::shared_ptr<const Rubric> rubric;
  std::vector<Statement> prior;  // earlier statements of the same room-agenda, seq ascending
};

struct PromptOptions {
  std::size_t context_token_budget = 3000;
};

/// Rough token estimate used for the context budget (4 bytes per token).
std::size_t approx_tokens(std::string_view text) noexcept;

/// Deterministic prompt text. Throws Error(MissingFewShots) for a stance
/// request whose agenda lacks exactly six examples.
std::string build_prompt(const AnnotationRequest& request, const PromptOptions& options = {});

struct ParsedResponse {
  std::optional<int> label;  // nullopt: unparseable or out of range
  std::string rationale;
  std::string problem;       // why label is missing
};

ParsedResponse parse_response(std::string_view text, const Rubric& rubric);

}  // namespace delib::annotate
