#include "tvgnn/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tvgnn/errors.hpp"
#include "text_util.hpp"

namespace tvgnn::data {

using nlohmann::json;

std::string_view to_string(Role r) { return r == Role::Executive ? "executive" : "analyst"; }
std::string_view to_string(Part p) { return p == Part::Presentation ? "presentation" : "qa"; }

Role parse_role(std::string_view s) {
  if (s == "executive") return Role::Executive;
  if (s == "analyst") return Role::Analyst;
  throw ParseError("unknown role '" + std::string(s) + "'");
}

Part parse_part(std::string_view s) {
  if (s == "presentation") return Part::Presentation;
  if (s == "qa") return Part::QA;
  throw ParseError("unknown part '" + std::string(s) + "'");
}

bool is_excluded_role(std::string_view s) { return s == "operator" || s == "moderator"; }

void validate(const CallRecord& call) {
  if (call.company_id.empty()) throw ParseError("call '" + call.call_id + "': empty company_id");
  if (call.sentences.empty()) throw ParseError("call '" + call.call_id + "': no sentences");
  for (std::size_t i = 0; i < call.sentences.size(); ++i) {
    const auto& s = call.sentences[i];
    if (!s.text && !s.vector) {
      throw ParseError("call '" + call.call_id + "' sentence " + std::to_string(i) +
                       ": neither text nor vector");
    }
    if (i == 0) continue;
    const auto& prev = call.sentences[i - 1];
    if (s.position <= prev.position) {
      throw ParseError("call '" + call.call_id + "' sentence " + std::to_string(i) +
                       ": positions not strictly increasing");
    }
    if (s.utterance_idx < prev.utterance_idx) {
      throw ParseError("call '" + call.call_id + "' sentence " + std::to_string(i) +
                       ": field 'utterance_idx' decreases");
    }
    if (prev.part == Part::QA && s.part == Part::Presentation) {
      throw ParseError("call '" + call.call_id + "' sentence " + std::to_string(i) +
                       ": field 'part' returns to presentation after qa");
    }
  }
}

json IngestReport::to_json() const {
  json exclusions_json = json::array();
  for (const auto& e : exclusions) exclusions_json.push_back({{"id", e.id}, {"reason", e.reason}});
  return {{"source", source},
          {"records_read", records_read},
          {"records_kept", records_kept},
          {"sentences_dropped", sentences_dropped},
          {"dropped_roles", dropped_roles},
          {"exclusions", exclusions_json},
          {"warnings", warnings}};
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

using detail::blank;
using detail::for_each_line;
using detail::parse_double;
using detail::split_csv;
using detail::where;

template <class T>
T require_field(const json& obj, const char* field, const std::string& ctx) {
  if (!obj.contains(field)) throw ParseError(ctx + "missing field '" + field + "'");
  try {
    return obj.at(field).get<T>();
  } catch (const json::exception&) {
    throw ParseError(ctx + "field '" + field + "' has the wrong type");
  }
}

}  // namespace

TranscriptLoad parse_transcripts(std::string_view content, std::string source) {
  TranscriptLoad out;
  out.report.source = source;
  std::set<std::string> seen_ids;
  std::optional<std::size_t> vector_dim;

  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    const std::string ctx = where(source, line_no);
    ++out.report.records_read;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(ctx + "invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ParseError(ctx + "expected a JSON object");

    CallRecord call;
    call.call_id = require_field<std::string>(obj, "call_id", ctx);
    call.company_id = require_field<std::string>(obj, "company_id", ctx);
    if (call.call_id.empty()) throw ParseError(ctx + "field 'call_id' is empty");
    if (call.company_id.empty()) throw ParseError(ctx + "field 'company_id' is empty");
    try {
      call.call_date = parse_date(require_field<std::string>(obj, "date", ctx));
    } catch (const ParseError& e) {
      throw ParseError(ctx + "field 'date': " + e.what());
    }
    if (!seen_ids.insert(call.call_id).second) {
      throw ParseError(ctx + "field 'call_id': duplicate id '" + call.call_id + "'");
    }
    if (!obj.contains("sentences") || !obj["sentences"].is_array()) {
      throw ParseError(ctx + "missing field 'sentences'");
    }

    std::size_t position = 0;
    for (std::size_t j = 0; j < obj["sentences"].size(); ++j) {
      const json& sj = obj["sentences"][j];
      const std::string sctx = ctx + "sentence " + std::to_string(j) + ": ";
      if (!sj.is_object()) throw ParseError(sctx + "expected a JSON object");
      const auto role_s = require_field<std::string>(sj, "role", sctx);
      if (is_excluded_role(role_s)) {
        ++out.report.sentences_dropped;
        ++out.report.dropped_roles[role_s];
        continue;
      }
      Sentence s;
      try {
        s.role = parse_role(role_s);
      } catch (const ParseError& e) {
        throw ParseError(sctx + "field 'role': " + e.what());
      }
      const auto part_s = require_field<std::string>(sj, "part", sctx);
      try {
        s.part = parse_part(part_s);
      } catch (const ParseError& e) {
        throw ParseError(sctx + "field 'part': " + e.what());
      }
      const auto utt = require_field<long long>(sj, "utterance_idx", sctx);
      if (utt < 0) throw ParseError(sctx + "field 'utterance_idx' is negative");
      s.utterance_idx = static_cast<std::size_t>(utt);
      if (sj.contains("text") && !sj["text"].is_null()) s.text = require_field<std::string>(sj, "text", sctx);
      if (sj.contains("vector") && !sj["vector"].is_null()) {
        s.vector = require_field<std::vector<double>>(sj, "vector", sctx);
        if (s.vector->empty()) throw ParseError(sctx + "field 'vector' is empty");
        if (vector_dim && *vector_dim != s.vector->size()) {
          throw ParseError(sctx + "field 'vector' has length " + std::to_string(s.vector->size()) +
                           ", expected " + std::to_string(*vector_dim));
        }
        vector_dim = s.vector->size();
      }
      if (!s.text && !s.vector) throw ParseError(sctx + "field 'text' or 'vector' is required");
      s.position = position++;
      call.sentences.push_back(std::move(s));
    }

    if (call.sentences.empty()) {
      out.report.exclusions.push_back({call.call_id, "no executive or analyst sentences"});
      return;
    }
    try {
      validate(call);
    } catch (const ParseError& e) {
      throw ParseError(ctx + e.what());
    }
    out.calls.push_back(std::move(call));
  });

  out.report.records_kept = out.calls.size();
  if (out.report.records_read == 0) out.report.warnings.push_back(source + ": no call records");
  return out;
}

PriceLoad parse_prices(std::string_view content, std::string source) {
  PriceLoad out;
  out.report.source = source;
  std::map<std::string, std::vector<std::pair<Date, double>>> rows;
  std::vector<std::string> order;
  bool header_seen = false;

  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    const std::string ctx = where(source, line_no);
    const auto f = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (f.size() != 3 || f[0] != "company_id" || f[1] != "date" || f[2] != "adjusted_close") {
        throw ParseError(ctx + "expected header 'company_id,date,adjusted_close'");
      }
      return;
    }
    ++out.report.records_read;
    if (f.size() != 3) throw ParseError(ctx + "expected 3 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw ParseError(ctx + "field 'company_id' is empty");
    Date d;
    try {
      d = parse_date(f[1]);
    } catch (const ParseError& e) {
      throw ParseError(ctx + "field 'date': " + e.what());
    }
    const double p = parse_double(f[2], ctx, "adjusted_close");
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw ParseError(ctx + "field 'adjusted_close' must be positive");
    }
    auto [it, inserted] = rows.try_emplace(std::string(f[0]));
    if (inserted) order.emplace_back(f[0]);
    it->second.emplace_back(d, p);
  });

  for (const auto& id : order) {
    auto& r = rows[id];
    std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PriceSeries s;
    s.company_id = id;
    for (const auto& [d, p] : r) {
      if (!s.dates.empty() && s.dates.back() == d) {
        throw ParseError(source + ": company '" + id + "' has two prices on " + format_date(d));
      }
      s.dates.push_back(d);
      s.adjusted_close.push_back(p);
    }
    out.series.push_back(std::move(s));
  }
  out.report.records_kept = out.report.records_read;
  if (out.report.records_read == 0) out.report.warnings.push_back(source + ": no price rows");
  return out;
}

RelationLoad parse_relations(std::string_view content, std::string source) {
  RelationLoad out;
  out.report.source = source;
  bool header_seen = false;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (blank(line)) return;
    const std::string ctx = where(source, line_no);
    const auto f = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (f.size() != 4 || f[0] != "company_a" || f[1] != "company_b" || f[2] != "year" ||
          f[3] != "similarity") {
        throw ParseError(ctx + "expected header 'company_a,company_b,year,similarity'");
      }
      return;
    }
    ++out.report.records_read;
    if (f.size() != 4) throw ParseError(ctx + "expected 4 fields, got " + std::to_string(f.size()));
    RelationRecord r;
    r.company_a = std::string(f[0]);
    r.company_b = std::string(f[1]);
    if (r.company_a.empty()) throw ParseError(ctx + "field 'company_a' is empty");
    if (r.company_b.empty()) throw ParseError(ctx + "field 'company_b' is empty");
    if (r.company_a == r.company_b) throw ParseError(ctx + "field 'company_b' equals company_a");
    const double year = parse_double(f[2], ctx, "year");
    if (year != std::floor(year)) throw ParseError(ctx + "field 'year' must be an integer");
    r.effective_year = static_cast<int>(year);
    r.similarity = parse_double(f[3], ctx, "similarity");
    if (!(r.similarity >= 0.0 && r.similarity <= 1.0)) {
      throw ParseError(ctx + "field 'similarity' must lie in [0,1]");
    }
    out.relations.push_back(std::move(r));
  });
  out.report.records_kept = out.relations.size();
  if (out.report.records_read == 0) out.report.warnings.push_back(source + ": no relation rows");
  return out;
}

TranscriptLoad load_transcripts(const std::filesystem::path& path) {
  return parse_transcripts(detail::read_file(path), path.string());
}
PriceLoad load_prices(const std::filesystem::path& path) {
  return parse_prices(detail::read_file(path), path.string());
}
RelationLoad load_relations(const std::filesystem::path& path) {
  return parse_relations(detail::read_file(path), path.string());
}

json call_to_json(const CallRecord& call) {
  json sentences = json::array();
  for (const auto& s : call.sentences) {
    json sj = {{"utterance_idx", s.utterance_idx},
               {"role", to_string(s.role)},
               {"part", to_string(s.part)}};
    if (s.text) sj["text"] = *s.text;
    if (s.vector) sj["vector"] = *s.vector;
    sentences.push_back(std::move(sj));
  }
  return {{"call_id", call.call_id},
          {"company_id", call.company_id},
          {"date", format_date(call.call_date)},
          {"sentences", std::move(sentences)}};
}

using detail::open_out;

void write_transcripts(const std::filesystem::path& path, const std::vector<CallRecord>& calls) {
  auto out = open_out(path);
  for (const auto& c : calls) out << call_to_json(c).dump() << '\n';
}

void write_prices(const std::filesystem::path& path, const std::vector<PriceSeries>& series) {
  auto out = open_out(path);
  out << "company_id,date,adjusted_close\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.size(); ++i)
      out << s.company_id << ',' << format_date(s.dates[i]) << ',' << format_real(s.adjusted_close[i]) << '\n';
}

void write_relations(const std::filesystem::path& path, const std::vector<RelationRecord>& rels) {
  auto out = open_out(path);
  out << "company_a,company_b,year,similarity\n";
  for (const auto& r : rels)
    out << r.company_a << ',' << r.company_b << ',' << r.effective_year << ',' << format_real(r.similarity) << '\n';
}

}  // namespace tvgnn::data
