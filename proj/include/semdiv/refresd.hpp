// Rationale-annotated divergence datasets: records, adjudication, canonical
// JSONL storage, a brat-standoff importer, statistics and annotator quality
// checks.

#ifndef SEMDIV_REFRESD_HPP
#define SEMDIV_REFRESD_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semdiv/common.hpp"
#include "semdiv/corpus_io.hpp"
#include "semdiv/metrics.hpp"

namespace semdiv {

enum class SentenceClass : std::uint8_t { NoMeaningDifference, SomeMeaningDifference, Unrelated };

inline constexpr SentenceClass kAllSentenceClasses[] = {SentenceClass::NoMeaningDifference,
                                                        SentenceClass::SomeMeaningDifference,
                                                        SentenceClass::Unrelated};

inline const char* to_string(SentenceClass c) {
  switch (c) {
    case SentenceClass::NoMeaningDifference: return "no_meaning_difference";
    case SentenceClass::SomeMeaningDifference: return "some_meaning_difference";
    case SentenceClass::Unrelated: return "unrelated";
  }
  return "?";
}

inline const char* short_name(SentenceClass c) {
  switch (c) {
    case SentenceClass::NoMeaningDifference: return "nd";
    case SentenceClass::SomeMeaningDifference: return "sd";
    case SentenceClass::Unrelated: return "un";
  }
  return "?";
}

// Accepts the long names, nd/sd/un, and display forms such as
// "Some meaning difference" (case, spaces and underscores ignored).
inline SentenceClass sentence_class_from_string(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (k == "nomeaningdifference" || k == "nd") return SentenceClass::NoMeaningDifference;
  if (k == "somemeaningdifference" || k == "sd") return SentenceClass::SomeMeaningDifference;
  if (k == "unrelated" || k == "un") return SentenceClass::Unrelated;
  throw std::invalid_argument("unknown sentence class: " + std::string(s));
}

inline bool is_divergent(SentenceClass c) { return c != SentenceClass::NoMeaningDifference; }

struct AnnotationRecord {
  std::string annotator_id;
  std::string pair_id;
  SpanSet spans;
  SentenceClass sentence_class = SentenceClass::NoMeaningDifference;
  std::optional<std::string> notes;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// ---------------------------------------------------------------------------
// Adjudication

struct VoteOutcome {
  std::optional<SentenceClass> cls;
  std::string excluded_reason;  // set iff cls is empty

  bool excluded() const { return !cls.has_value(); }
};

inline constexpr const char* kTridisagreement = "tridisagreement";
inline constexpr const char* kExtremeBidisagreement = "extreme_bidisagreement";

// Majority of three. All-distinct votes, and 2-1 splits between the two
// extreme classes, are excluded.
inline VoteOutcome majority_vote(std::span<const SentenceClass> votes) {
  if (votes.size() != 3) {
    throw std::invalid_argument("majority_vote needs exactly 3 votes, got " +
                                std::to_string(votes.size()));
  }
  std::array<int, 3> n{};
  for (auto v : votes) ++n[static_cast<std::size_t>(v)];
  const int distinct = (n[0] > 0) + (n[1] > 0) + (n[2] > 0);
  if (distinct == 3) return {std::nullopt, kTridisagreement};
  if (distinct == 2 && n[1] == 0) return {std::nullopt, kExtremeBidisagreement};
  for (auto c : kAllSentenceClasses) {
    if (n[static_cast<std::size_t>(c)] >= 2) return {c, ""};
  }
  throw std::logic_error("unreachable vote state");
}

inline VoteOutcome majority_vote(const std::vector<AnnotationRecord>& records) {
  std::vector<SentenceClass> v;
  for (const auto& r : records) v.push_back(r.sentence_class);
  return majority_vote(std::span<const SentenceClass>(v));
}

struct AnnotatedPair {
  SentencePair pair;
  std::vector<AnnotationRecord> records;
  std::optional<SentenceClass> adjudicated;
  bool excluded = false;
  std::string exclusion_reason;

  friend bool operator==(const AnnotatedPair&, const AnnotatedPair&) = default;
};

// Fills adjudicated / excluded from the records.
inline void adjudicate(AnnotatedPair& p) {
  const auto v = majority_vote(p.records);
  p.adjudicated = v.cls;
  p.excluded = v.excluded();
  p.exclusion_reason = v.excluded_reason;
}

inline void validate_annotated_pair(const AnnotatedPair& p) {
  const std::string where = "pair " + p.pair.id + ": ";
  if (p.records.size() != 3) {
    throw ParseError(where + "expected 3 records, got " + std::to_string(p.records.size()));
  }
  std::set<std::string> who;
  for (const auto& r : p.records) {
    if (r.pair_id != p.pair.id) throw ParseError(where + "record refers to pair " + r.pair_id);
    if (!who.insert(r.annotator_id).second) {
      throw ParseError(where + "annotator " + r.annotator_id + " appears twice");
    }
    try {
      validate_spans(r.spans, p.pair.src_tokens.size(), p.pair.tgt_tokens.size());
    } catch (const std::exception& e) {
      throw ParseError(where + "annotator " + r.annotator_id + ": " + e.what());
    }
  }
  const auto v = majority_vote(p.records);
  if (p.adjudicated != v.cls || p.excluded != v.excluded()) {
    throw ParseError(where + "adjudication does not match the majority vote");
  }
}

struct RefresdDataset {
  std::vector<AnnotatedPair> pairs;

  // Pairs that enter metric computations.
  std::vector<const AnnotatedPair*> included() const {
    std::vector<const AnnotatedPair*> out;
    for (const auto& p : pairs) {
      if (!p.excluded) out.push_back(&p);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// JSONL

inline constexpr const char* kRefresdSchema = "semdiv.refresd/1";

inline nlohmann::json to_json(const Span& s) {
  return {{"side", to_string(s.side)}, {"start", s.start}, {"end", s.end},
          {"label", to_string(s.label)}};
}

inline Span span_from_json(const nlohmann::json& j) {
  Span s;
  const auto side = j.at("side").get<std::string>();
  if (side != "src" && side != "tgt") throw std::invalid_argument("side must be src or tgt");
  s.side = side == "src" ? Side::Src : Side::Tgt;
  const auto start = j.at("start").get<long long>(), end = j.at("end").get<long long>();
  if (start < 0 || end < 0) throw std::invalid_argument("span offsets must be non-negative");
  s.start = static_cast<std::size_t>(start);
  s.end = static_cast<std::size_t>(end);
  s.label = span_label_from_string(j.at("label").get<std::string>());
  return s;
}

inline nlohmann::json to_json(const AnnotationRecord& r) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : r.spans) spans.push_back(to_json(s));
  nlohmann::json j = {{"annotator_id", r.annotator_id},
                      {"pair_id", r.pair_id},
                      {"spans", spans},
                      {"sentence_class", to_string(r.sentence_class)}};
  if (r.notes) j["notes"] = *r.notes;
  return j;
}

inline AnnotationRecord record_from_json(const nlohmann::json& j) {
  AnnotationRecord r;
  r.annotator_id = j.at("annotator_id").get<std::string>();
  r.pair_id = j.at("pair_id").get<std::string>();
  for (const auto& s : j.at("spans")) r.spans.push_back(span_from_json(s));
  r.sentence_class = sentence_class_from_string(j.at("sentence_class").get<std::string>());
  if (j.contains("notes") && !j["notes"].is_null()) r.notes = j["notes"].get<std::string>();
  return r;
}

inline nlohmann::json to_json(const AnnotatedPair& p) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : p.records) records.push_back(to_json(r));
  return {{"schema", kRefresdSchema},
          {"id", p.pair.id},
          {"src", p.pair.src_tokens},
          {"tgt", p.pair.tgt_tokens},
          {"records", records},
          {"adjudicated", p.adjudicated ? nlohmann::json(to_string(*p.adjudicated)) : nlohmann::json()},
          {"excluded", p.excluded ? nlohmann::json(p.exclusion_reason) : nlohmann::json()}};
}

inline AnnotatedPair annotated_pair_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != kRefresdSchema) {
    throw std::invalid_argument("schema must be " + std::string(kRefresdSchema));
  }
  AnnotatedPair p;
  p.pair.id = j.at("id").get<std::string>();
  p.pair.src_tokens = j.at("src").get<std::vector<std::string>>();
  p.pair.tgt_tokens = j.at("tgt").get<std::vector<std::string>>();
  p.pair.src_raw = util::join(p.pair.src_tokens, " ");
  p.pair.tgt_raw = util::join(p.pair.tgt_tokens, " ");
  for (const auto& r : j.at("records")) p.records.push_back(record_from_json(r));
  const auto& adj = j.at("adjudicated");
  if (!adj.is_null()) p.adjudicated = sentence_class_from_string(adj.get<std::string>());
  const auto& ex = j.at("excluded");
  if (!ex.is_null()) {
    p.excluded = true;
    p.exclusion_reason = ex.get<std::string>();
  }
  validate_annotated_pair(p);
  return p;
}

// Keys come out sorted, so output is canonical.
inline void save_refresd(std::ostream& out, const RefresdDataset& d) {
  for (const auto& p : d.pairs) out << to_json(p).dump() << '\n';
}

inline RefresdDataset load_refresd(std::istream& in) {
  RefresdDataset d;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    try {
      auto p = annotated_pair_from_json(nlohmann::json::parse(line));
      if (!ids.insert(p.pair.id).second) throw std::invalid_argument("duplicate pair id " + p.pair.id);
      d.pairs.push_back(std::move(p));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return d;
}

inline RefresdDataset load_refresd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_refresd(in);
}

inline void save_refresd(const std::filesystem::path& path, const RefresdDataset& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_refresd(out, d);
}

// ---------------------------------------------------------------------------
// brat standoff import
//
// Layout: <root>/<annotator_id>/<pair_id>.txt and .ann. The .txt holds the
// English sentence on line 1 and the French sentence on line 2, tokens
// separated by single spaces. In the .ann file:
//   T<n>\t<Added|Changed|Other> <start> <end>\t<text>   character offsets
//   A<n>\tSentenceClass <target> <class>                  one per file
//   #<n>\tAnnotatorNotes <target>\t<text>                 optional
// A text-bound span covers every token it overlaps and must stay on one line.

namespace detail {

struct TokenOffsets {
  Side side;
  std::vector<std::pair<std::size_t, std::size_t>> chars;  // [begin, end) per token
};

inline std::vector<TokenOffsets> token_offsets(const std::string& text, std::vector<std::string>& en,
                                               std::vector<std::string>& fr) {
  std::vector<TokenOffsets> out = {{Side::Src, {}}, {Side::Tgt, {}}};
  std::size_t line = 0, i = 0;
  while (i < text.size() && line < 2) {
    if (text[i] == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (text[i] == ' ' || text[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\n' && text[j] != '\r') ++j;
    out[line].chars.emplace_back(i, j);
    (line == 0 ? en : fr).push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

struct BratDocument {
  SentencePair pair;
  AnnotationRecord record;
};

inline BratDocument parse_brat(const std::string& pair_id, const std::string& annotator_id,
                               const std::string& txt, const std::string& ann) {
  BratDocument doc;
  doc.pair.id = pair_id;
  const auto offsets = detail::token_offsets(txt, doc.pair.src_tokens, doc.pair.tgt_tokens);
  if (doc.pair.src_tokens.empty() || doc.pair.tgt_tokens.empty()) {
    throw ParseError(pair_id + ".txt: expected two non-empty lines");
  }
  doc.pair.src_raw = util::join(doc.pair.src_tokens, " ");
  doc.pair.tgt_raw = util::join(doc.pair.tgt_tokens, " ");
  doc.record.annotator_id = annotator_id;
  doc.record.pair_id = pair_id;
  bool have_class = false;
  std::size_t lineno = 0;
  for (const auto& raw : util::split(ann, '\n')) {
    ++lineno;
    const std::string line = util::strip_cr(raw);
    if (util::trim(line).empty()) continue;
    const auto cols = util::split(line, '\t');
    if (cols.size() < 2) throw ParseError(pair_id + ".ann: malformed line", lineno);
    const auto fields = util::split_ws(cols[1]);
    if (line[0] == 'T') {
      if (fields.size() != 3) throw ParseError(pair_id + ".ann: expected '<label> <start> <end>'", lineno);
      Span s;
      try {
        s.label = span_label_from_string(fields[0]);
      } catch (const std::exception& e) {
        throw ParseError(pair_id + ".ann: " + e.what(), lineno);
      }
      const auto b = detail::parse_long(fields[1]);
      const auto e = detail::parse_long(fields[2]);
      if (!b || !e || *b < 0 || *e <= *b) throw ParseError(pair_id + ".ann: bad offsets", lineno);
      bool found = false;
      for (const auto& side : offsets) {
        std::size_t first = SIZE_MAX, last = 0;
        for (std::size_t t = 0; t < side.chars.size(); ++t) {
          const auto [cb, ce] = side.chars[t];
          if (cb < static_cast<std::size_t>(*e) && static_cast<std::size_t>(*b) < ce) {
            first = std::min(first, t);
            last = t + 1;
          }
        }
        if (first != SIZE_MAX) {
          if (found) throw ParseError(pair_id + ".ann: span crosses both sentences", lineno);
          s.side = side.side;
          s.start = first;
          s.end = last;
          found = true;
        }
      }
      if (!found) throw ParseError(pair_id + ".ann: span covers no token", lineno);
      doc.record.spans.push_back(s);
    } else if (line[0] == 'A') {
      if (fields.size() != 3 || fields[0] != "SentenceClass") {
        throw ParseError(pair_id + ".ann: expected 'SentenceClass <target> <class>'", lineno);
      }
      try {
        doc.record.sentence_class = sentence_class_from_string(fields[2]);
      } catch (const std::exception& e) {
        throw ParseError(pair_id + ".ann: " + e.what(), lineno);
      }
      have_class = true;
    } else if (line[0] == '#') {
      if (cols.size() >= 3) doc.record.notes = cols[2];
    }
  }
  if (!have_class) throw ParseError(pair_id + ".ann: no SentenceClass attribute");
  std::sort(doc.record.spans.begin(), doc.record.spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.side, a.start, a.end) < std::tie(b.side, b.start, b.end);
  });
  // Overlapping brat spans on one side are merged into the first one.
  SpanSet merged;
  for (const auto& s : doc.record.spans) {
    if (!merged.empty() && merged.back().side == s.side && s.start < merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  doc.record.spans = std::move(merged);
  return doc;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Imports every annotator directory under `root`. Pairs with other than three
// annotators are rejected.
inline RefresdDataset import_brat(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::map<std::string, AnnotatedPair> by_id;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string annotator = dir.filename().string();
    std::vector<fs::path> anns;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".ann") anns.push_back(e.path());
    }
    std::sort(anns.begin(), anns.end());
    for (const auto& ann : anns) {
      const std::string pair_id = ann.stem().string();
      auto txt = ann;
      txt.replace_extension(".txt");
      auto doc = parse_brat(pair_id, annotator, read_file(txt), read_file(ann));
      auto [it, inserted] = by_id.try_emplace(pair_id);
      if (inserted) {
        it->second.pair = doc.pair;
      } else if (it->second.pair.src_tokens != doc.pair.src_tokens ||
                 it->second.pair.tgt_tokens != doc.pair.tgt_tokens) {
        throw ParseError("pair " + pair_id + ": text differs between annotators");
      }
      it->second.records.push_back(std::move(doc.record));
    }
  }
  RefresdDataset d;
  for (auto& [id, p] : by_id) {
    if (p.records.size() != 3) {
      throw ParseError("pair " + id + ": expected 3 annotators, found " +
                       std::to_string(p.records.size()));
    }
    adjudicate(p);
    validate_annotated_pair(p);
    d.pairs.push_back(std::move(p));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
  std::size_t nd = 0, sd = 0, un = 0;
  std::size_t excluded = 0;
  double pct_divergent = 0.0;     // (sd + un) / included
  double pct_fine_grained = 0.0;  // sd / included

  std::size_t included() const { return nd + sd + un; }
};

inline DatasetStats dataset_stats(const RefresdDataset& d) {
  DatasetStats s;
  for (const auto& p : d.pairs) {
    if (p.excluded || !p.adjudicated) {
      ++s.excluded;
      continue;
    }
    switch (*p.adjudicated) {
      case SentenceClass::NoMeaningDifference: ++s.nd; break;
      case SentenceClass::SomeMeaningDifference: ++s.sd; break;
      case SentenceClass::Unrelated: ++s.un; break;
    }
  }
  if (const auto n = s.included()) {
    s.pct_divergent = 100.0 * static_cast<double>(s.sd + s.un) / static_cast<double>(n);
    s.pct_fine_grained = 100.0 * static_cast<double>(s.sd) / static_cast<double>(n);
  }
  return s;
}

inline nlohmann::json to_json(const DatasetStats& s) {
  return {{"nd", s.nd},
          {"sd", s.sd},
          {"un", s.un},
          {"excluded", s.excluded},
          {"total", s.included()},
          {"pct_divergent", s.pct_divergent},
          {"pct_fine_grained", s.pct_fine_grained}};
}

// ---------------------------------------------------------------------------
// Agreement over a dataset

struct AgreementReport {
  std::optional<double> alpha;  // nullopt when undefined for the data
  IaaResult span;
  IaaResult token;
  std::size_t items = 0;
};

inline std::vector<IaaItem> iaa_items(const std::vector<const AnnotatedPair*>& pairs) {
  std::vector<IaaItem> out;
  for (const auto* p : pairs) {
    IaaItem it{p->pair.id, p->pair.src_tokens.size(), p->pair.tgt_tokens.size(), {}};
    for (const auto& r : p->records) it.by_annotator[r.annotator_id] = r.spans;
    out.push_back(std::move(it));
  }
  return out;
}

// Agreement over non-excluded pairs. Alpha uses one column per annotator id.
inline AgreementReport agreement(const std::vector<const AnnotatedPair*>& pairs,
                                 double iou_threshold = 0.5) {
  AgreementReport r;
  r.items = pairs.size();
  std::map<std::string, std::size_t> column;
  for (const auto* p : pairs) {
    for (const auto& rec : p->records) column.try_emplace(rec.annotator_id, column.size());
  }
  std::vector<std::vector<std::optional<int>>> ratings;
  for (const auto* p : pairs) {
    std::vector<std::optional<int>> row(column.size());
    for (const auto& rec : p->records) {
      row[column[rec.annotator_id]] = static_cast<int>(rec.sentence_class);
    }
    ratings.push_back(std::move(row));
  }
  try {
    r.alpha = krippendorff_alpha(ratings);
  } catch (const InsufficientData&) {
    r.alpha.reset();
  }
  const auto items = iaa_items(pairs);
  r.span = pairwise_iaa(items, IaaLevel::Span, iou_threshold);
  r.token = pairwise_iaa(items, IaaLevel::Token, iou_threshold);
  return r;
}

inline AgreementReport agreement(const RefresdDataset& d, double iou_threshold = 0.5) {
  return agreement(d.included(), iou_threshold);
}

inline nlohmann::json to_json(const IaaResult& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"reference", p.reference}, {"predicted", p.predicted},
                     {"macro_f1", 100.0 * p.f1}, {"items", p.items}});
  }
  return {{"mean", 100.0 * r.mean}, {"stdev", 100.0 * r.stdev}, {"pairs", pairs}};
}

inline nlohmann::json to_json(const AgreementReport& r) {
  return {{"items", r.items},
          {"krippendorff_alpha", r.alpha ? nlohmann::json(*r.alpha) : nlohmann::json()},
          {"span_macro_f1", to_json(r.span)},
          {"token_macro_f1", to_json(r.token)}};
}

// ---------------------------------------------------------------------------
// Annotator quality checks

struct QualityConfig {
  double min_reference_agreement = 0.6;    // strictly above
  double min_duplicate_consistency = 1.0;  // at or above
};

struct AnnotatorQuality {
  std::string annotator_id;
  std::size_t duplicate_checks = 0;
  std::size_t duplicate_consistent = 0;
  std::size_t reference_checks = 0;
  std::size_t reference_agreed = 0;
  std::vector<std::string> flags;

  std::optional<double> duplicate_consistency() const {
    if (!duplicate_checks) return std::nullopt;
    return static_cast<double>(duplicate_consistent) / static_cast<double>(duplicate_checks);
  }
  std::optional<double> reference_agreement() const {
    if (!reference_checks) return std::nullopt;
    return static_cast<double>(reference_agreed) / static_cast<double>(reference_checks);
  }
};

// `duplicate_of` maps an injected duplicate's pair id to the original;
// `reference` holds known classes for reference pairs.
inline std::vector<AnnotatorQuality> quality_report(
    const std::vector<AnnotationRecord>& records, const std::map<std::string, std::string>& duplicate_of,
    const std::map<std::string, SentenceClass>& reference, const QualityConfig& cfg = {}) {
  std::map<std::string, std::map<std::string, SentenceClass>> by_annotator;
  for (const auto& r : records) by_annotator[r.annotator_id][r.pair_id] = r.sentence_class;
  std::vector<AnnotatorQuality> out;
  for (const auto& [who, classes] : by_annotator) {
    AnnotatorQuality q;
    q.annotator_id = who;
    for (const auto& [dup, orig] : duplicate_of) {
      auto a = classes.find(dup), b = classes.find(orig);
      if (a == classes.end() || b == classes.end()) continue;
      ++q.duplicate_checks;
      q.duplicate_consistent += a->second == b->second;
    }
    for (const auto& [pid, cls] : reference) {
      auto a = classes.find(pid);
      if (a == classes.end()) continue;
      ++q.reference_checks;
      q.reference_agreed += a->second == cls;
    }
    if (auto c = q.duplicate_consistency(); c && *c < cfg.min_duplicate_consistency) {
      q.flags.push_back("inconsistent_on_duplicates");
    }
    if (auto a = q.reference_agreement(); a && !(*a > cfg.min_reference_agreement)) {
      q.flags.push_back("low_reference_agreement");
    }
    out.push_back(std::move(q));
  }
  return out;
}

inline nlohmann::json to_json(const AnnotatorQuality& q) {
  auto opt = [](std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"annotator_id", q.annotator_id},
          {"duplicate_checks", q.duplicate_checks},
          {"duplicate_consistency", opt(q.duplicate_consistency())},
          {"reference_checks", q.reference_checks},
          {"reference_agreement", opt(q.reference_agreement())},
          {"flags", q.flags}};
}

}  // namespace semdiv

#endif  // SEMDIV_REFRESD_HPP
