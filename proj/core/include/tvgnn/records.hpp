#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/dates.hpp"

namespace tvgnn::data {

enum class Role { Executive, Analyst };
enum class Part { Presentation, QA };

std::string_view to_string(Role r);
std::string_view to_string(Part p);
/// Throws ParseError for anything but "executive"/"analyst".
Role parse_role(std::string_view s);
/// Throws ParseError for anything but "presentation"/"qa".
Part parse_part(std::string_view s);
/// Speaker roles outside the two-role model; their sentences are dropped at ingestion.
bool is_excluded_role(std::string_view s);

struct Sentence {
  std::optional<std::string> text;
  std::optional<std::vector<double>> vector;
  std::size_t utterance_idx = 0;
  Role role = Role::Executive;
  Part part = Part::Presentation;
  std::size_t position = 0;
};

struct CallRecord {
  std::string call_id;
  std::string company_id;
  Date call_date{};
  std::vector<Sentence> sentences;
};

/// Throws ParseError describing the first violated invariant.
void validate(const CallRecord& call);

struct PriceSeries {
  std::string company_id;
  std::vector<Date> dates;  // strictly increasing trading days
  std::vector<double> adjusted_close;

  std::size_t size() const { return dates.size(); }
};

struct RelationRecord {
  std::string company_a;
  std::string company_b;
  int effective_year = 0;
  double similarity = 0.0;
};

struct Exclusion {
  std::string id;
  std::string reason;
};

/// What happened to every input record. records_read == records_kept + exclusions.size().
struct IngestReport {
  std::string source;
  std::size_t records_read = 0;
  std::size_t records_kept = 0;
  std::size_t sentences_dropped = 0;
  std::map<std::string, std::size_t> dropped_roles;
  std::vector<Exclusion> exclusions;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct TranscriptLoad {
  std::vector<CallRecord> calls;
  IngestReport report;
};
struct PriceLoad {
  std::vector<PriceSeries> series;
  IngestReport report;
};
struct RelationLoad {
  std::vector<RelationRecord> relations;
  IngestReport report;
};

TranscriptLoad load_transcripts(const std::filesystem::path& path);
PriceLoad load_prices(const std::filesystem::path& path);
RelationLoad load_relations(const std::filesystem::path& path);

TranscriptLoad parse_transcripts(std::string_view content, std::string source = "<memory>");
PriceLoad parse_prices(std::string_view content, std::string source = "<memory>");
RelationLoad parse_relations(std::string_view content, std::string source = "<memory>");

nlohmann::json call_to_json(const CallRecord& call);
void write_transcripts(const std::filesystem::path& path, const std::vector<CallRecord>& calls);
void write_prices(const std::filesystem::path& path, const std::vector<PriceSeries>& series);
void write_relations(const std::filesystem::path& path, const std::vector<RelationRecord>& rels);

/// Formats a double so that parsing it back yields the same bits.
std::string format_real(double v);

}  // namespace tvgnn::data
