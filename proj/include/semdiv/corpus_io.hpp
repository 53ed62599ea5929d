// Corpus readers (bitext, CoNLL-U, Pharaoh alignments, similarity scores),
// curation filters and seed selection.

#ifndef SEMDIV_CORPUS_IO_HPP
#define SEMDIV_CORPUS_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semdiv/common.hpp"

namespace semdiv {

struct SentencePair {
  std::string id;
  std::vector<std::string> src_tokens;  // English
  std::vector<std::string> tgt_tokens;  // French
  std::string src_raw;
  std::string tgt_raw;

  const std::vector<std::string>& tokens(Side s) const {
    return s == Side::Src ? src_tokens : tgt_tokens;
  }
  std::vector<std::string>& tokens(Side s) {
    return s == Side::Src ? src_tokens : tgt_tokens;
  }

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

inline SentencePair make_pair_from_raw(std::string id, std::string src_raw,
                                       std::string tgt_raw) {
  SentencePair p;
  p.id = std::move(id);
  p.src_tokens = util::split_ws(src_raw);
  p.tgt_tokens = util::split_ws(tgt_raw);
  p.src_raw = std::move(src_raw);
  p.tgt_raw = std::move(tgt_raw);
  return p;
}

// Heads are 1-based token indices with 0 marking the root.
struct DependencyTree {
  std::vector<int> heads;
  std::vector<std::string> upos;

  std::size_t token_count() const { return heads.size(); }

  // 0-based children lists; root is the token whose head is 0.
  std::vector<std::vector<std::size_t>> children() const {
    std::vector<std::vector<std::size_t>> out(heads.size());
    for (std::size_t i = 0; i < heads.size(); ++i) {
      if (heads[i] > 0) out[static_cast<std::size_t>(heads[i] - 1)].push_back(i);
    }
    return out;
  }

  // Sorted 0-based token indices of the subtree rooted at `node`.
  std::vector<std::size_t> subtree(std::size_t node) const {
    const auto kids = children();
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      std::size_t n = stack.back();
      stack.pop_back();
      out.push_back(n);
      for (std::size_t c : kids[n]) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const DependencyTree&, const DependencyTree&) = default;
};

// Throws ParseError when the head array is not a single-rooted tree.
// `first_line` maps token i to its source line (i + first_line) for messages.
inline void validate_tree(const DependencyTree& t, std::size_t first_line = 0) {
  const std::size_t n = t.heads.size();
  auto line_of = [&](std::size_t i) { return first_line ? first_line + i : 0; };
  if (t.upos.size() != n) throw ParseError("upos/heads length mismatch");
  if (n == 0) throw ParseError("empty tree", first_line);
  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < n; ++i) {
    const int h = t.heads[i];
    if (h < 0 || static_cast<std::size_t>(h) > n) {
      throw ParseError("head " + std::to_string(h) + " out of range", line_of(i));
    }
    if (static_cast<std::size_t>(h) == i + 1) {
      throw ParseError("token is its own head", line_of(i));
    }
    if (h == 0) {
      if (root) throw ParseError("multiple roots", line_of(i));
      root = i;
    }
  }
  if (!root) throw ParseError("no root", first_line);
  // Every token must reach the root within n steps.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    std::size_t steps = 0;
    while (t.heads[cur] != 0) {
      cur = static_cast<std::size_t>(t.heads[cur] - 1);
      if (++steps > n) throw ParseError("cyclic heads", line_of(i));
    }
  }
}

// One CoNLL-U sentence block. Unparsed columns are kept verbatim so that
// serialization reproduces the input.
struct ConlluSentence {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> forms;
  std::vector<std::string> lemmas;
  std::vector<std::string> xpos;
  std::vector<std::string> feats;
  std::vector<std::string> deprels;
  std::vector<std::string> deps;
  std::vector<std::string> misc;
  DependencyTree tree;

  std::size_t size() const { return forms.size(); }

  friend bool operator==(const ConlluSentence&, const ConlluSentence&) = default;
};

namespace detail {

inline std::optional<long> parse_long(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

// Multiword ranges ("1-2") and empty nodes ("1.1") are skipped.
inline std::vector<ConlluSentence> parse_conllu(std::string_view text) {
  std::vector<ConlluSentence> out;
  ConlluSentence cur;
  std::size_t block_start = 0;
  auto flush = [&]() {
    if (!cur.forms.empty()) {
      validate_tree(cur.tree, block_start);
      out.push_back(std::move(cur));
    }
    cur = ConlluSentence{};
    block_start = 0;
  };

  const auto lines = util::split(text, '\n');
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    std::string_view line = lines[li];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (util::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      cur.comments.emplace_back(line.substr(1));
      continue;
    }
    auto cols = util::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    }
    if (cols[0].find('-') != std::string::npos ||
        cols[0].find('.') != std::string::npos) {
      continue;
    }
    auto id = detail::parse_long(cols[0]);
    if (!id || *id != static_cast<long>(cur.forms.size()) + 1) {
      throw ParseError("bad token id '" + cols[0] + "'", line_no);
    }
    auto head = detail::parse_long(cols[6]);
    if (!head) throw ParseError("non-integer HEAD '" + cols[6] + "'", line_no);
    if (cur.forms.empty()) block_start = line_no;
    cur.forms.push_back(cols[1]);
    cur.lemmas.push_back(cols[2]);
    cur.tree.upos.push_back(cols[3]);
    cur.xpos.push_back(cols[4]);
    cur.feats.push_back(cols[5]);
    cur.tree.heads.push_back(static_cast<int>(*head));
    cur.deprels.push_back(cols[7]);
    cur.deps.push_back(cols[8]);
    cur.misc.push_back(cols[9]);
  }
  flush();
  return out;
}

inline std::vector<ConlluSentence> read_conllu(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_conllu(ss.str());
}

inline std::string serialize_conllu(const std::vector<ConlluSentence>& sents) {
  std::string out;
  for (const auto& s : sents) {
    for (const auto& c : s.comments) out += "#" + c + "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto col = [&](const std::vector<std::string>& v) -> const std::string& {
        static const std::string underscore = "_";
        return i < v.size() ? v[i] : underscore;
      };
      out += std::to_string(i + 1) + '\t' + s.forms[i] + '\t' + col(s.lemmas) +
             '\t' + s.tree.upos[i] + '\t' + col(s.xpos) + '\t' + col(s.feats) +
             '\t' + std::to_string(s.tree.heads[i]) + '\t' + col(s.deprels) +
             '\t' + col(s.deps) + '\t' + col(s.misc) + '\n';
    }
    out += '\n';
  }
  return out;
}

// Word alignment as a sorted set of (src, tgt) 0-based links.
struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> links;

  // Target indices linked to any of `src_indices`.
  std::set<std::size_t> tgt_for(const std::set<std::size_t>& src_indices) const {
    std::set<std::size_t> out;
    for (auto [s, t] : links) {
      if (src_indices.count(s)) out.insert(t);
    }
    return out;
  }
  std::set<std::size_t> src_for(const std::set<std::size_t>& tgt_indices) const {
    std::set<std::size_t> out;
    for (auto [s, t] : links) {
      if (tgt_indices.count(t)) out.insert(s);
    }
    return out;
  }
  std::set<std::size_t> linked_on(Side side, const std::set<std::size_t>& from) const {
    return side == Side::Src ? src_for(from) : tgt_for(from);
  }

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

inline Alignment parse_pharaoh(std::string_view line) {
  Alignment a;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& item : util::split_ws(line)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      throw ParseError("alignment item '" + item + "' is not i-j");
    }
    const auto i = detail::parse_long(std::string_view(item).substr(0, dash));
    const auto j = detail::parse_long(std::string_view(item).substr(dash + 1));
    if (!i || !j) throw ParseError("non-numeric alignment item '" + item + "'");
    if (*i < 0 || *j < 0) throw ParseError("negative alignment index '" + item + "'");
    auto link = std::make_pair(static_cast<std::size_t>(*i), static_cast<std::size_t>(*j));
    if (!seen.insert(link).second) {
      throw ParseError("duplicate alignment link '" + item + "'");
    }
  }
  a.links.assign(seen.begin(), seen.end());
  return a;
}

inline std::string to_pharaoh(const Alignment& a) {
  std::string out;
  for (auto [s, t] : a.links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(s) + "-" + std::to_string(t);
  }
  return out;
}

inline void validate_alignment(const Alignment& a, std::size_t src_len,
                               std::size_t tgt_len) {
  for (auto [s, t] : a.links) {
    if (s >= src_len || t >= tgt_len) {
      throw ParseError("alignment link " + std::to_string(s) + "-" +
                       std::to_string(t) + " outside " + std::to_string(src_len) +
                       "x" + std::to_string(tgt_len));
    }
  }
}

// One alignment per line, same order as the bitext.
inline std::vector<Alignment> read_pharaoh(std::istream& in) {
  std::vector<Alignment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      out.push_back(parse_pharaoh(util::strip_cr(line)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

// `id \t src \t tgt` per line.
inline std::vector<SentencePair> read_bitext_tsv(std::istream& in) {
  std::vector<SentencePair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = util::strip_cr(line);
    if (util::trim(line).empty()) continue;
    auto cols = util::split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError("expected 'id<TAB>src<TAB>tgt'", line_no);
    }
    out.push_back(make_pair_from_raw(cols[0], cols[1], cols[2]));
  }
  return out;
}

// Two line-aligned files; ids are 1-based line numbers.
inline std::vector<SentencePair> read_bitext_files(std::istream& src,
                                                   std::istream& tgt) {
  std::vector<SentencePair> out;
  std::string a, b;
  std::size_t line_no = 0;
  for (;;) {
    const bool ga = static_cast<bool>(std::getline(src, a));
    const bool gb = static_cast<bool>(std::getline(tgt, b));
    if (!ga && !gb) break;
    ++line_no;
    if (ga != gb) throw ParseError("source and target line counts differ", line_no);
    out.push_back(make_pair_from_raw(std::to_string(line_no), util::strip_cr(a),
                                     util::strip_cr(b)));
  }
  return out;
}

inline void write_bitext_tsv(std::ostream& out, const std::vector<SentencePair>& pairs) {
  for (const auto& p : pairs) {
    out << p.id << '\t' << util::join(p.src_tokens, " ") << '\t'
        << util::join(p.tgt_tokens, " ") << '\n';
  }
}

struct SimilarityScore {
  std::string pair_id;
  double score = 0.0;
};

inline std::vector<SimilarityScore> read_scores(std::istream& in) {
  std::vector<SimilarityScore> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = util::strip_cr(line);
    if (util::trim(line).empty()) continue;
    auto cols = util::split(line, '\t');
    if (cols.size() != 2) throw ParseError("expected 'pair_id<TAB>score'", line_no);
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad score '" + cols[1] + "'", line_no);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite score", line_no);
    out.push_back({cols[0], v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

// Optional pre-pass: maps common Unicode punctuation to ASCII, drops control
// characters and squashes whitespace runs. Not a Moses replacement.
inline std::string normalize_text(std::string_view s) {
  static const std::vector<std::pair<std::string, std::string>> kMap = {
      {"\u2018", "'"},  {"\u2019", "'"},   {"\u201A", "'"},
      {"\u201C", "\""}, {"\u201D", "\""},  {"\u201E", "\""},
      {"\u00AB", "\""}, {"\u00BB", "\""},  {"\u2013", "-"},
      {"\u2014", "-"},  {"\u2212", "-"},   {"\u2026", "..."},
      {"\u00A0", " "},  {"\u202F", " "},   {"\u2009", " "},
      {"\u3001", ","},  {"\u3002", "."},   {"\uFF0C", ","},
      {"\uFF1A", ":"},  {"\uFF1F", "?"},   {"\uFF01", "!"},
      {"\u200B", ""},   {"\uFEFF", ""}};
  std::string mapped;
  mapped.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool hit = false;
    for (const auto& [from, to] : kMap) {
      if (s.compare(i, from.size(), from) == 0) {
        mapped += to;
        i += from.size();
        hit = true;
        break;
      }
    }
    if (hit) continue;
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x20 && c != '\t' && c != '\n') {
      ++i;
      continue;
    }
    mapped += s[i++];
  }
  std::string out;
  bool pending_space = false;
  for (char c : mapped) {
    if (util::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filtering

struct FilterConfig {
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 80;
  double max_numeric_ratio = 0.5;
  double min_edit_ratio = 0.15;

  void validate() const {
    if (min_tokens < 1) throw std::invalid_argument("min_tokens must be >= 1");
    if (min_tokens > max_tokens) throw std::invalid_argument("min_tokens > max_tokens");
    if (max_numeric_ratio < 0 || max_numeric_ratio > 1)
      throw std::invalid_argument("max_numeric_ratio outside [0,1]");
    if (min_edit_ratio < 0 || min_edit_ratio > 1)
      throw std::invalid_argument("min_edit_ratio outside [0,1]");
  }
};

// A token counts as numeric if it has a digit and nothing but digits and
// number punctuation ("1,000", "3.5", "-2", "12:30", "50%").
inline bool is_numeric_token(std::string_view tok) {
  bool digit = false;
  for (char c : tok) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (std::string_view(".,-+/:%").find(c) == std::string_view::npos) {
      return false;
    }
  }
  return digit;
}

inline double numeric_ratio(const std::vector<std::string>& toks) {
  if (toks.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& t : toks) n += is_numeric_token(t);
  return static_cast<double>(n) / static_cast<double>(toks.size());
}

inline std::size_t token_levenshtein(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Levenshtein over tokens divided by the longer side; 0 for two empty sides.
inline double edit_ratio(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 0.0;
  return static_cast<double>(token_levenshtein(a, b)) / static_cast<double>(m);
}

struct RejectedPair {
  SentencePair pair;
  std::vector<std::string> reasons;  // subset of {"length", "numeric", "edit"}
};

struct FilterResult {
  std::vector<SentencePair> kept;
  std::vector<RejectedPair> rejected;
};

inline std::vector<std::string> filter_reasons(const SentencePair& p,
                                               const FilterConfig& cfg) {
  std::vector<std::string> reasons;
  auto bad_len = [&](std::size_t n) { return n < cfg.min_tokens || n > cfg.max_tokens; };
  if (bad_len(p.src_tokens.size()) || bad_len(p.tgt_tokens.size())) {
    reasons.emplace_back("length");
  }
  if (numeric_ratio(p.src_tokens) > cfg.max_numeric_ratio ||
      numeric_ratio(p.tgt_tokens) > cfg.max_numeric_ratio) {
    reasons.emplace_back("numeric");
  }
  if (edit_ratio(p.src_tokens, p.tgt_tokens) < cfg.min_edit_ratio) {
    reasons.emplace_back("edit");
  }
  return reasons;
}

inline FilterResult filter_corpus(const std::vector<SentencePair>& pairs,
                                  const FilterConfig& cfg = {}) {
  cfg.validate();
  FilterResult r;
  for (const auto& p : pairs) {
    auto reasons = filter_reasons(p, cfg);
    if (reasons.empty()) {
      r.kept.push_back(p);
    } else {
      r.rejected.push_back({p, std::move(reasons)});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Seed selection

struct SeedSplit {
  std::vector<SentencePair> train;
  std::vector<SentencePair> dev;
};

// Top-k by descending score (ties by id), then a seeded shuffle assigns
// dev_n pairs to dev. Both halves keep rank order.
inline SeedSplit select_seed(const std::vector<SentencePair>& pairs,
                             const std::vector<SimilarityScore>& scores,
                             std::size_t k, std::size_t dev_n,
                             std::uint64_t split_seed = 0) {
  if (k > pairs.size()) throw std::invalid_argument("k exceeds number of pairs");
  if (dev_n >= k && k > 0) throw std::invalid_argument("dev_n must be < k");
  std::unordered_map<std::string, double> by_id;
  for (const auto& s : scores) by_id[s.pair_id] = s.score;
  std::vector<std::string> missing;
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.id).second) throw std::invalid_argument("duplicate pair id " + p.id);
    if (!by_id.count(p.id)) missing.push_back(p.id);
  }
  if (!missing.empty()) {
    throw std::invalid_argument("missing similarity score for: " + util::join(missing, ", "));
  }
  std::vector<const SentencePair*> ranked;
  ranked.reserve(pairs.size());
  for (const auto& p : pairs) ranked.push_back(&p);
  std::sort(ranked.begin(), ranked.end(), [&](const SentencePair* a, const SentencePair* b) {
    const double sa = by_id.at(a->id), sb = by_id.at(b->id);
    if (sa != sb) return sa > sb;
    return a->id < b->id;
  });
  ranked.resize(k);

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  auto rng = util::derive_rng(split_seed, "seed-split");
  util::shuffle(order, rng);
  std::vector<bool> is_dev(k, false);
  for (std::size_t i = 0; i < dev_n; ++i) is_dev[order[i]] = true;

  SeedSplit out;
  for (std::size_t i = 0; i < k; ++i) {
    (is_dev[i] ? out.dev : out.train).push_back(*ranked[i]);
  }
  return out;
}

}  // namespace semdiv

#endif  // SEMDIV_CORPUS_IO_HPP
