#include "delib/transcript.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "delib/csv.hpp"
#include "delib/error.hpp"
#include "delib/io.hpp"

namespace delib {

void validate(const StatementAnnotation& a) {
  auto check = [&](int v, int lo, int hi, const char* name) {
    if (v < lo || v > hi) {
      throw Error(ErrorCode::OutOfRange, "statement " + a.statement_id + ": " + name + " " +
                                             std::to_string(v) + " outside " +
                                             std::to_string(lo) + ".." + std::to_string(hi));
    }
  };
  check(a.novelty, 1, 5, "novelty");
  check(a.justification, 1, 5, "justification");
  check(a.stance, 0, 2, "stance");
}

namespace {

std::string line_ctx(const csv::Row& row) { return "line " + std::to_string(row.line); }

}  // namespace

std::vector<Statement> parse_transcripts(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"statement_id", "room_id", "agenda_id", "participant_id", "seq", "text"},
                       "transcript");
  const auto c_id = table.column("statement_id"), c_room = table.column("room_id"),
             c_agenda = table.column("agenda_id"), c_pid = table.column("participant_id"),
             c_seq = table.column("seq"), c_text = table.column("text");
  std::vector<Statement> out;
  out.reserve(table.rows.size());
  std::map<std::string, std::size_t> ids;
  for (const auto& row : table.rows) {
    Statement s;
    s.statement_id = row.fields[c_id];
    s.room_id = row.fields[c_room];
    s.agenda_id = row.fields[c_agenda];
    s.participant_id = row.fields[c_pid];
    s.text = row.fields[c_text];
    try {
      s.seq = io::parse_integer(row.fields[c_seq], "seq");
    } catch (const Error& e) {
      throw e.with_context(line_ctx(row));
    }
    if (s.statement_id.empty() || s.room_id.empty() || s.agenda_id.empty()) {
      throw Error(ErrorCode::MalformedRow, line_ctx(row) + ": empty id field");
    }
    if (!ids.emplace(s.statement_id, row.line).second) {
      throw Error(ErrorCode::DuplicateKey, line_ctx(row) + ": statement_id " + s.statement_id);
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const Statement& a, const Statement& b) {
    return std::tie(a.room_id, a.agenda_id, a.seq) < std::tie(b.room_id, b.agenda_id, b.seq);
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    const auto& a = out[i - 1];
    const auto& b = out[i];
    if (a.room_id == b.room_id && a.agenda_id == b.agenda_id && a.seq == b.seq) {
      throw Error(ErrorCode::DuplicateKey, "seq " + std::to_string(b.seq) + " repeated in room " +
                                               b.room_id + ", agenda " + b.agenda_id);
    }
  }
  return out;
}

std::vector<Statement> read_transcripts(const std::filesystem::path& path) {
  try {
    return parse_transcripts(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::vector<StatementAnnotation> parse_annotations(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"statement_id", "novelty", "justification", "stance"}, "annotations");
  const auto c_id = table.column("statement_id"), c_nov = table.column("novelty"),
             c_just = table.column("justification"), c_stance = table.column("stance"),
             c_rat = table.column("rationale");
  std::vector<StatementAnnotation> out;
  for (const auto& row : table.rows) {
    StatementAnnotation a;
    a.statement_id = row.fields[c_id];
    try {
      a.novelty = static_cast<int>(io::parse_integer(row.fields[c_nov], "novelty"));
      a.justification = static_cast<int>(io::parse_integer(row.fields[c_just], "justification"));
      a.stance = static_cast<int>(io::parse_integer(row.fields[c_stance], "stance"));
      if (c_rat != csv::npos) a.rationale = row.fields[c_rat];
      validate(a);
    } catch (const Error& e) {
      throw e.with_context(line_ctx(row));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<StatementAnnotation> read_annotations(const std::filesystem::path& path) {
  try {
    return parse_annotations(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void write_annotations_csv(std::ostream& out, const std::vector<StatementAnnotation>& rows) {
  csv::write_row(out, {"statement_id", "novelty", "justification", "stance", "rationale"});
  for (const auto& a : rows) {
    csv::write_row(out, {a.statement_id, std::to_string(a.novelty), std::to_string(a.justification),
                         std::to_string(a.stance), a.rationale});
  }
}

Rosters parse_rosters(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"room_id", "participant_id"}, "roster");
  const auto c_room = table.column("room_id"), c_pid = table.column("participant_id");
  Rosters out;
  for (const auto& row : table.rows) {
    if (!out[row.fields[c_room]].insert(row.fields[c_pid]).second) {
      throw Error(ErrorCode::DuplicateKey, line_ctx(row) + ": participant " + row.fields[c_pid] +
                                               " listed twice in room " + row.fields[c_room]);
    }
  }
  return out;
}

Rosters read_rosters(const std::filesystem::path& path) {
  try {
    return parse_rosters(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

AgendaMap parse_agenda_map(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"agenda_id", "item_id"}, "agenda map");
  const auto c_agenda = table.column("agenda_id"), c_item = table.column("item_id");
  AgendaMap out;
  for (const auto& row : table.rows) {
    if (!out.emplace(row.fields[c_agenda], row.fields[c_item]).second) {
      throw Error(ErrorCode::DuplicateKey,
                  line_ctx(row) + ": agenda " + row.fields[c_agenda] + " mapped twice");
    }
  }
  return out;
}

AgendaMap read_agenda_map(const std::filesystem::path& path) {
  try {
    return parse_agenda_map(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

namespace {

struct OpinionMeans {
  std::optional<double> pre;
  std::optional<double> delta;
};

OpinionMeans opinion_means(const std::set<std::string>& members,
                           const std::unordered_map<std::string, const PairedRow*>& paired) {
  double pre_sum = 0.0, post_sum = 0.0;
  std::size_t count = 0;
  for (const auto& pid : members) {
    auto it = paired.find(pid);
    if (it == paired.end()) continue;  // no paired responses: excluded
    pre_sum += it->second->pre;
    post_sum += it->second->post;
    ++count;
  }
  if (count == 0) return {};
  const double n = static_cast<double>(count);
  return {pre_sum / n, post_sum / n - pre_sum / n};
}

}  // namespace

AggregateResult aggregate_room_agenda(const std::vector<Statement>& statements,
                                      const std::vector<StatementAnnotation>& annotations,
                                      const std::map<std::string, ItemPairedResponses>& paired,
                                      const Rosters& rosters, const AgendaMap& agenda_map) {
  std::unordered_map<std::string, const StatementAnnotation*> by_id;
  for (const auto& a : annotations) by_id[a.statement_id] = &a;

  using Cell = std::pair<std::string, std::string>;
  std::map<Cell, std::vector<const Statement*>> cells;
  std::set<std::string> rooms;
  for (const auto& [room, members] : rosters) rooms.insert(room);
  for (const auto& s : statements) {
    if (!by_id.count(s.statement_id)) {
      throw Error(ErrorCode::InvalidParams, "statement " + s.statement_id + " has no annotation");
    }
    if (!agenda_map.count(s.agenda_id)) {
      throw Error(ErrorCode::InvalidParams,
                  "agenda " + s.agenda_id + " (statement " + s.statement_id + ") not in agenda map");
    }
    cells[{s.room_id, s.agenda_id}].push_back(&s);
    rooms.insert(s.room_id);
  }

  AggregateResult result;
  static const std::set<std::string> kEmptyRoster;
  for (const auto& room : rooms) {
    auto roster_it = rosters.find(room);
    const auto& roster = roster_it == rosters.end() ? kEmptyRoster : roster_it->second;
    for (const auto& [agenda, item] : agenda_map) {
      auto cell_it = cells.find({room, agenda});
      if (cell_it == cells.end()) {
        result.skipped.push_back({room, agenda, "RoomAgendaEmpty: no statements"});
        continue;
      }
      const auto& cell = cell_it->second;
      RoomAgendaFeatures row;
      row.room_id = room;
      row.agenda_id = agenda;
      row.statements = cell.size();
      std::set<std::string> speakers;
      double s_sum = 0, n_sum = 0, j_sum = 0;
      for (const auto* st : cell) {
        const auto* a = by_id.at(st->statement_id);
        s_sum += a->stance;
        n_sum += a->novelty;
        j_sum += a->justification;
        speakers.insert(st->participant_id);
      }
      const double count = static_cast<double>(cell.size());
      row.support = s_sum / count;
      row.novelty = n_sum / count;
      row.justification = j_sum / count;
      row.log_statements = std::log(count);

      // Speakers absent from the roster still belong to the room.
      std::set<std::string> full = roster;
      full.insert(speakers.begin(), speakers.end());
      std::set<std::string> silent;
      std::set_difference(full.begin(), full.end(), speakers.begin(), speakers.end(),
                          std::inserter(silent, silent.end()));
      row.n_speakers = speakers.size();
      row.n_silent = silent.size();

      std::unordered_map<std::string, const PairedRow*> item_rows;
      if (auto p = paired.find(item); p != paired.end()) {
        for (const auto& r : p->second.rows) item_rows.emplace(r.participant_id, &r);
      }
      const auto all = opinion_means(full, item_rows);
      const auto quiet = opinion_means(silent, item_rows);
      row.pre_opinion = all.pre;
      row.delta_all = all.delta;
      row.pre_opinion_noncontrib = quiet.pre;
      row.delta_noncontrib = quiet.delta;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
  return v ? io::format_number(*v) : std::string("NA");
}

}  // namespace

void write_features_csv(std::ostream& out, const std::vector<RoomAgendaFeatures>& rows) {
  csv::write_row(out, {"room_id", "agenda_id", "S", "N", "J", "O", "L", "delta_all",
                       "delta_noncontrib", "n_speakers", "n_silent", "O_noncontrib"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.room_id, r.agenda_id, io::format_number(r.support),
                         io::format_number(r.novelty), io::format_number(r.justification),
                         opt_str(r.pre_opinion), io::format_number(r.log_statements),
                         opt_str(r.delta_all), opt_str(r.delta_noncontrib),
                         std::to_string(r.n_speakers), std::to_string(r.n_silent),
                         opt_str(r.pre_opinion_noncontrib)});
  }
}

std::vector<RoomAgendaFeatures> parse_features(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table,
                       {"room_id", "agenda_id", "S", "N", "J", "O", "L", "delta_all",
                        "delta_noncontrib", "n_speakers", "n_silent"},
                       "features");
  const auto col = [&](std::string_view name) { return table.column(name); };
  const auto c_onc = col("O_noncontrib");
  std::vector<RoomAgendaFeatures> out;
  for (const auto& row : table.rows) {
    RoomAgendaFeatures r;
    try {
      r.room_id = row.fields[col("room_id")];
      r.agenda_id = row.fields[col("agenda_id")];
      r.support = io::parse_number(row.fields[col("S")], "S");
      r.novelty = io::parse_number(row.fields[col("N")], "N");
      r.justification = io::parse_number(row.fields[col("J")], "J");
      r.pre_opinion = io::parse_optional_number(row.fields[col("O")]);
      r.log_statements = io::parse_number(row.fields[col("L")], "L");
      r.statements = static_cast<std::size_t>(std::llround(std::exp(r.log_statements)));
      r.delta_all = io::parse_optional_number(row.fields[col("delta_all")]);
      r.delta_noncontrib = io::parse_optional_number(row.fields[col("delta_noncontrib")]);
      r.n_speakers = static_cast<std::size_t>(io::parse_integer(row.fields[col("n_speakers")], "n_speakers"));
      r.n_silent = static_cast<std::size_t>(io::parse_integer(row.fields[col("n_silent")], "n_silent"));
      if (c_onc != csv::npos) r.pre_opinion_noncontrib = io::parse_optional_number(row.fields[c_onc]);
    } catch (const Error& e) {
      throw e.with_context(line_ctx(row));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RoomAgendaFeatures> read_features(const std::filesystem::path& path) {
  try {
    return parse_features(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace delib
