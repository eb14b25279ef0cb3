#include "delib/annotate/rubric.hpp"

#include <charconv>
#include <regex>
#include <sstream>

#include "delib/error.hpp"
#include "delib/io.hpp"
#include "json.hpp"

namespace delib::annotate {

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::Novelty: return "novelty";
    case Dimension::Justification: return "justification";
    case Dimension::Stance: return "stance";
  }
  return "?";
}

Dimension parse_dimension(std::string_view name) {
  for (auto d : kDimensions)
    if (name == to_string(d)) return d;
  throw Error(ErrorCode::InvalidParams, "unknown dimension '" + std::string(name) + "'");
}

void Rubric::validate() const {
  if (min_label > max_label) throw Error(ErrorCode::InvalidParams, "rubric scale is empty");
  if (legend.size() != static_cast<std::size_t>(max_label - min_label + 1)) {
    throw Error(ErrorCode::InvalidParams, "rubric legend must describe every label");
  }
  for (const auto& [agenda, shots] : few_shots) {
    for (const auto& s : shots) {
      if (!in_range(s.label)) {
        throw Error(ErrorCode::InvalidParams,
                    "few-shot label " + std::to_string(s.label) + " out of range for agenda " + agenda);
      }
    }
  }
}

Rubric default_rubric(Dimension d, std::string model) {
  Rubric r;
  r.dimension = d;
  r.model = std::move(model);
  switch (d) {
    case Dimension::Novelty:
      r.criterion =
          "How much does the statement add ideas, viewpoints or proposals that have not come up "
          "in the earlier statements of this discussion?";
      r.legend = {"only repeats points already made",
                  "mostly repeats, with a minor addition",
                  "adds one modest new point",
                  "adds a clearly new idea or angle",
                  "adds a substantial idea or proposal nobody raised before"};
      break;
    case Dimension::Justification:
      r.criterion =
          "How well does the statement back up its point with concrete examples, personal "
          "anecdotes or evidence?";
      r.legend = {"bare assertion with no support",
                  "vague gesture at a reason",
                  "a general reason without specifics",
                  "a specific example or anecdote",
                  "several specific examples or a detailed anecdote tied to the point"};
      break;
    case Dimension::Stance:
      r.min_label = 0;
      r.max_label = 2;
      r.criterion = "What position does the speaker take on the proposal under discussion?";
      r.legend = {"opposes the proposal", "neutral, mixed or unclear", "supports the proposal"};
      break;
  }
  return r;
}

std::map<std::string, std::vector<FewShot>> parse_few_shots(std::string_view json_text) {
  std::map<std::string, std::vector<FewShot>> out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRow, std::string("few-shot file: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::MalformedRow, "few-shot file must be a JSON array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      const auto& e = j[i];
      FewShot s{e.at("agenda_id").get<std::string>(), e.at("statement").get<std::string>(),
                e.at("label").get<int>(), e.value("rationale", std::string{})};
      out[s.agenda_id].push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRow, "few-shot entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::vector<FewShot>> read_few_shots(const std::filesystem::path& path) {
  try {
    return parse_few_shots(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::size_t approx_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

namespace {

std::string context_line(const Statement& s) {
  return "[" + std::to_string(s.seq) + "] " + s.participant_id + ": " + s.text + "\n";
}

}  // namespace

std::string build_prompt(const AnnotationRequest& request, const PromptOptions& options) {
  if (!request.rubric) throw Error(ErrorCode::InvalidParams, "annotation request without a rubric");
  const Rubric& r = *request.rubric;
  std::ostringstream p;
  p << "You are coding statements from a moderated small-group discussion about policy proposals.\n"
    << "Dimension: " << to_string(r.dimension) << "\n"
    << "Criterion: " << r.criterion << "\n"
    << "Scale:\n";
  for (int k = r.min_label; k <= r.max_label; ++k) p << "  " << k << " = " << r.legend[k - r.min_label] << "\n";

  if (r.dimension == Dimension::Stance) {
    const auto it = r.few_shots.find(request.statement.agenda_id);
    const std::size_t have = it == r.few_shots.end() ? 0 : it->second.size();
    if (have != kStanceFewShotsPerAgenda) {
      throw Error(ErrorCode::MissingFewShots, "agenda '" + request.statement.agenda_id + "' has " +
                                                  std::to_string(have) + " stance examples, need " +
                                                  std::to_string(kStanceFewShotsPerAgenda));
    }
    p << "\nLabeled examples for this agenda:\n";
    std::size_t k = 1;
    for (const auto& s : it->second) {
      p << "Example " << k++ << "\nStatement: " << s.statement << "\nRATING: " << s.label
        << "\nRATIONALE: " << s.rationale << "\n";
    }
  }

  if (r.dimension == Dimension::Novelty) {
    // Keep the newest statements that fit; print them oldest first.
    std::size_t budget = options.context_token_budget;
    std::size_t first = request.prior.size();
    while (first > 0) {
      const std::size_t cost = approx_tokens(context_line(request.prior[first - 1]));
      if (cost > budget) break;
      budget -= cost;
      --first;
    }
    p << "\nEarlier statements in this discussion, oldest first:\n";
    if (first > 0) p << "(" << first << " earlier statements omitted)\n";
    if (request.prior.empty()) p << "(none, this is the opening statement)\n";
    for (std::size_t i = first; i < request.prior.size(); ++i) p << context_line(request.prior[i]);
  }

  p << "\nStatement to rate:\n" << request.statement.text << "\n"
    << "\nAnswer with exactly two lines:\n"
    << "RATING: <integer from " << r.min_label << " to " << r.max_label << ">\n"
    << "RATIONALE: <one or two sentences>\n";
  return p.str();
}

ParsedResponse parse_response(std::string_view text, const Rubric& rubric) {
  static const std::regex rating_re(R"(^\s*\**\s*RATING\s*\**\s*:\s*\**\s*([+-]?\d+)(?![\d.]))",
                                    std::regex::icase);
  static const std::regex rationale_re(R"(^\s*\**\s*RATIONALE\s*\**\s*:\s*(.*)$)", std::regex::icase);
  ParsedResponse out;
  std::istringstream lines{std::string(text)};
  std::string line;
  bool in_rationale = false;
  bool seen_rating = false;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!seen_rating && std::regex_search(line, m, rating_re)) {
      seen_rating = true;
      in_rationale = false;
      int value = 0;
      const std::string digits = m[1].str();
      const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(b, digits.data() + digits.size(), value);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        out.problem = "rating is not an integer";
      } else if (!rubric.in_range(value)) {
        out.problem = "rating " + std::to_string(value) + " outside " + std::to_string(rubric.min_label) +
                      ".." + std::to_string(rubric.max_label);
      } else {
        out.label = value;
      }
      continue;
    }
    if (std::regex_search(line, m, rationale_re)) {
      in_rationale = true;
      out.rationale = m[1].str();
      continue;
    }
    if (in_rationale) out.rationale += "\n" + line;
  }
  while (!out.rationale.empty() && std::isspace(static_cast<unsigned char>(out.rationale.back()))) {
    out.rationale.pop_back();
  }
  if (!seen_rating) out.problem = "no RATING line";
  return out;
}

}  // namespace delib::annotate
