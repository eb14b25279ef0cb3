#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "delib/survey.hpp"

namespace delib {

struct Statement {
  std::string statement_id;
  std::string room_id;
  std::string agenda_id;
  std::string participant_id;
  long seq = 0;
  std::string text;
};

struct StatementAnnotation {
  std::string statement_id;
  int novelty = 1;        // 1..5
  int justification = 1;  // 1..5
  int stance = 1;         // 0 oppose, 1 neutral, 2 support
  std::string rationale;
};

/// Throws Error(OutOfRange) when a label is outside its scale.
void validate(const StatementAnnotation& a);

/// room id -> participant ids
using Rosters = std::map<std::string, std::set<std::string>>;
/// agenda id -> survey item id
using AgendaMap = std::map<std::string, std::string>;

/// One regression row per (room, agenda) discussion cell.
struct RoomAgendaFeatures {
  std::string room_id;
  std::string agenda_id;
  double support = 0.0;        // S: mean stance
  double novelty = 0.0;        // N
  double justification = 0.0;  // J
  double log_statements = 0.0; // L = ln(statement count)
  std::size_t statements = 0;
  // Over roster members with paired responses on the mapped item.
  std::optional<double> pre_opinion;     // O
  std::optional<double> delta_all;       // mean(post) - mean(pre)
  // Same, restricted to roster members with no statements on this agenda.
  std::optional<double> pre_opinion_noncontrib;
  std::optional<double> delta_noncontrib;
  std::size_t n_speakers = 0;
  std::size_t n_silent = 0;
};

struct SkippedCell {
  std::string room_id;
  std::string agenda_id;
  std::string reason;
};

struct AggregateResult {
  std::vector<RoomAgendaFeatures> rows;  // sorted by (room, agenda)
  std::vector<SkippedCell> skipped;      // RoomAgendaEmpty cells
};

/// Transcript CSV: statement_id,room_id,agenda_id,participant_id,seq,text.
/// Validates that seq is unique within each (room, agenda). Returned
/// statements are sorted by (room, agenda, seq); equal keys keep file order.
std::vector<Statement> parse_transcripts(std::string_view csv_text);
std::vector<Statement> read_transcripts(const std::filesystem::path& path);

/// Annotation CSV: statement_id,novelty,justification,stance,rationale.
std::vector<StatementAnnotation> parse_annotations(std::string_view csv_text);
std::vector<StatementAnnotation> read_annotations(const std::filesystem::path& path);
void write_annotations_csv(std::ostream& out, const std::vector<StatementAnnotation>& rows);

/// Roster CSV: room_id,participant_id.
Rosters parse_rosters(std::string_view csv_text);
Rosters read_rosters(const std::filesystem::path& path);

/// Agenda map CSV: agenda_id,item_id. Each agenda maps to exactly one item.
AgendaMap parse_agenda_map(std::string_view csv_text);
AgendaMap read_agenda_map(const std::filesystem::path& path);

/// Builds room-agenda regression rows. Every (room in rosters or transcripts)
/// x (agenda in the map) cell without statements is reported as skipped.
/// Throws Error(InvalidParams) if a statement lacks an annotation or refers
/// to an agenda missing from the map.
AggregateResult aggregate_room_agenda(const std::vector<Statement>& statements,
                                      const std::vector<StatementAnnotation>& annotations,
                                      const std::map<std::string, ItemPairedResponses>& paired,
                                      const Rosters& rosters, const AgendaMap& agenda_map);

/// Feature CSV: room_id,agenda_id,S,N,J,O,L,delta_all,delta_noncontrib,
/// n_speakers,n_silent[,O_noncontrib]. Missing values are written as NA.
void write_features_csv(std::ostream& out, const std::vector<RoomAgendaFeatures>& rows);
std::vector<RoomAgendaFeatures> parse_features(std::string_view csv_text);
std::vector<RoomAgendaFeatures> read_features(const std::filesystem::path& path);

}  // namespace delib
