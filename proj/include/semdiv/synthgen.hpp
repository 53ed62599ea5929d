// Synthetic divergence generation: subtree deletion, phrase replacement and
// lexical substitution over seed equivalents, token-label projection through
// word alignments, and contrastive set assembly for the sampling strategies.

#ifndef SEMDIV_SYNTHGEN_HPP
#define SEMDIV_SYNTHGEN_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "semdiv/common.hpp"
#include "semdiv/corpus_io.hpp"

namespace semdiv {

enum class DivergenceType : std::uint8_t {
  SubtreeDeletion,
  PhraseReplacement,
  LexicalSubstitutionGeneralize,
  LexicalSubstitutionParticularize,
};

inline constexpr DivergenceType kAllDivergenceTypes[] = {
    DivergenceType::SubtreeDeletion, DivergenceType::PhraseReplacement,
    DivergenceType::LexicalSubstitutionGeneralize,
    DivergenceType::LexicalSubstitutionParticularize};

inline const char* to_string(DivergenceType t) {
  switch (t) {
    case DivergenceType::SubtreeDeletion: return "subtree_deletion";
    case DivergenceType::PhraseReplacement: return "phrase_replacement";
    case DivergenceType::LexicalSubstitutionGeneralize: return "lexsub_generalize";
    case DivergenceType::LexicalSubstitutionParticularize: return "lexsub_particularize";
  }
  return "?";
}

inline DivergenceType divergence_type_from_string(std::string_view s) {
  for (auto t : kAllDivergenceTypes) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown divergence type: " + std::string(s));
}

inline bool is_lexical(DivergenceType t) {
  return t == DivergenceType::LexicalSubstitutionGeneralize ||
         t == DivergenceType::LexicalSubstitutionParticularize;
}

// A sample's kind: nullopt for a seed equivalent.
using SampleKind = std::optional<DivergenceType>;

inline std::string kind_name(const SampleKind& k) {
  return k ? to_string(*k) : "equivalent";
}

inline SampleKind kind_from_string(std::string_view s) {
  if (s == "equivalent") return std::nullopt;
  return divergence_type_from_string(s);
}

// Coarseness order: equivalent (3) > lexical substitution (2) >
// {phrase replacement, subtree deletion} (1). Higher is finer-grained.
inline int granularity(const SampleKind& k) {
  if (!k) return 3;
  return is_lexical(*k) ? 2 : 1;
}

// A seed equivalent with the attachments the generators need.
struct Seed {
  SentencePair pair;
  DependencyTree src_tree;              // over pair.src_tokens
  std::vector<std::string> src_lemmas;  // empty: lower-cased forms are used
  std::vector<std::string> tgt_upos;    // empty: no target-side POS
  Alignment alignment;

  std::string lemma(std::size_t i) const {
    if (i < src_lemmas.size() && src_lemmas[i] != "_") return src_lemmas[i];
    std::string s = pair.src_tokens[i];
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }
  const std::vector<std::string>* upos(Side side) const {
    if (side == Side::Src) return &src_tree.upos;
    return tgt_upos.empty() ? nullptr : &tgt_upos;
  }
};

// Checks the attachments against the token counts; throws ParseError.
inline void validate_seed(const Seed& s) {
  if (s.pair.src_tokens.empty() || s.pair.tgt_tokens.empty()) {
    throw ParseError("seed " + s.pair.id + " has an empty side");
  }
  if (s.src_tree.token_count() != s.pair.src_tokens.size()) {
    throw ParseError("seed " + s.pair.id + ": parse length differs from source tokens");
  }
  validate_tree(s.src_tree);
  if (!s.tgt_upos.empty() && s.tgt_upos.size() != s.pair.tgt_tokens.size()) {
    throw ParseError("seed " + s.pair.id + ": target POS length differs from target tokens");
  }
  validate_alignment(s.alignment, s.pair.src_tokens.size(), s.pair.tgt_tokens.size());
}

// Joins a bitext with its source parses, alignments and (optionally) target
// parses, all in the same order. Token forms must agree.
inline std::vector<Seed> assemble_seeds(const std::vector<SentencePair>& pairs,
                                        const std::vector<ConlluSentence>& src_parses,
                                        const std::vector<Alignment>& alignments,
                                        const std::vector<ConlluSentence>* tgt_parses = nullptr) {
  if (src_parses.size() != pairs.size() || alignments.size() != pairs.size() ||
      (tgt_parses && tgt_parses->size() != pairs.size())) {
    throw ParseError("bitext, parses and alignments have different lengths");
  }
  std::vector<Seed> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Seed s;
    s.pair = pairs[i];
    if (src_parses[i].forms != s.pair.src_tokens) {
      throw ParseError("source parse tokens differ from bitext for pair " + s.pair.id);
    }
    s.src_tree = src_parses[i].tree;
    s.src_lemmas = src_parses[i].lemmas;
    if (tgt_parses) {
      if ((*tgt_parses)[i].forms != s.pair.tgt_tokens) {
        throw ParseError("target parse tokens differ from bitext for pair " + s.pair.id);
      }
      s.tgt_upos = (*tgt_parses)[i].tree.upos;
    }
    s.alignment = alignments[i];
    validate_seed(s);
    out.push_back(std::move(s));
  }
  return out;
}

struct DivergentExample {
  SentencePair base;  // post-edit pair
  DivergenceType dtype = DivergenceType::SubtreeDeletion;
  std::vector<Label> src_labels;
  std::vector<Label> tgt_labels;
  std::string seed_id;

  const std::vector<Label>& labels(Side s) const {
    return s == Side::Src ? src_labels : tgt_labels;
  }

  friend bool operator==(const DivergentExample&, const DivergentExample&) = default;
};

// Either side of a contrastive item.
struct Sample {
  SentencePair pair;
  SampleKind kind;
  std::vector<Label> src_labels;
  std::vector<Label> tgt_labels;

  static Sample equivalent(const SentencePair& p) {
    return {p, std::nullopt, std::vector<Label>(p.src_tokens.size(), Label::Eq),
            std::vector<Label>(p.tgt_tokens.size(), Label::Eq)};
  }
  static Sample from(const DivergentExample& d) {
    return {d.base, d.dtype, d.src_labels, d.tgt_labels};
  }
  bool is_equivalent() const { return !kind.has_value(); }

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct RankRelation {
  SampleKind higher;
  SampleKind lower;

  friend bool operator==(const RankRelation&, const RankRelation&) = default;
};

// An ordered pair x > y. The token labels z of y live in y.src_labels /
// y.tgt_labels.
struct ContrastiveItem {
  Sample x;
  Sample y;
  std::string seed_id;
  RankRelation rank_relation;

  friend bool operator==(const ContrastiveItem&, const ContrastiveItem&) = default;
};

inline bool respects_granularity(const ContrastiveItem& it) {
  return it.y.kind.has_value() && it.rank_relation.higher == it.x.kind &&
         it.rank_relation.lower == it.y.kind &&
         granularity(it.x.kind) > granularity(it.y.kind);
}

namespace detail {

inline std::string join_tokens(const std::vector<std::string>& t) {
  return util::join(t, " ");
}

inline void refresh_raw(SentencePair& p) {
  p.src_raw = join_tokens(p.src_tokens);
  p.tgt_raw = join_tokens(p.tgt_tokens);
}

inline std::string with_suffix(const std::string& id, DivergenceType t) {
  return id + "#" + to_string(t);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subtree deletion

struct SubtreeChoice {
  std::size_t head = 0;                 // 0-based root of the deleted subtree
  std::vector<std::size_t> src_tokens;  // sorted subtree span

  friend bool operator==(const SubtreeChoice&, const SubtreeChoice&) = default;
};

// Non-leaf subtrees spanning fewer than ceil(n/2) tokens that have at least
// one aligned target token (otherwise no label could be projected, or the
// target-side deletion would be empty).
inline std::vector<SubtreeChoice> eligible_subtrees(const Seed& seed, Side side) {
  const auto& tree = seed.src_tree;
  const std::size_t n = tree.token_count();
  const std::size_t limit = (n + 1) / 2;
  std::vector<SubtreeChoice> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto span = tree.subtree(i);
    if (span.size() < 2 || span.size() >= limit) continue;
    const std::set<std::size_t> src(span.begin(), span.end());
    const auto tgt = seed.alignment.tgt_for(src);
    if (tgt.empty()) continue;
    if (side == Side::Tgt && tgt.size() >= seed.pair.tgt_tokens.size()) continue;
    out.push_back({i, std::move(span)});
  }
  return out;
}

// Deletes `choice` on `side`: the source subtree itself, or the target tokens
// aligned to it. Surviving opposite-side tokens linked to a removed token are
// DIV.
inline DivergentExample delete_subtree(const Seed& seed, const SubtreeChoice& choice,
                                       Side side) {
  const std::set<std::size_t> src_span(choice.src_tokens.begin(), choice.src_tokens.end());
  std::set<std::size_t> removed =
      side == Side::Src ? src_span : seed.alignment.tgt_for(src_span);
  if (removed.empty()) throw NoEligibleEdit("subtree has no aligned target tokens");
  const auto div_opposite = seed.alignment.linked_on(opposite(side), removed);

  DivergentExample ex;
  ex.dtype = DivergenceType::SubtreeDeletion;
  ex.seed_id = seed.pair.id;
  ex.base.id = detail::with_suffix(seed.pair.id, ex.dtype);
  const auto& edited_in = seed.pair.tokens(side);
  const auto& other_in = seed.pair.tokens(opposite(side));
  std::vector<std::string> edited;
  for (std::size_t i = 0; i < edited_in.size(); ++i) {
    if (!removed.count(i)) edited.push_back(edited_in[i]);
  }
  std::vector<Label> edited_labels(edited.size(), Label::Eq);
  std::vector<Label> other_labels(other_in.size(), Label::Eq);
  for (std::size_t j : div_opposite) other_labels[j] = Label::Div;

  ex.base.tokens(side) = std::move(edited);
  ex.base.tokens(opposite(side)) = other_in;
  if (side == Side::Src) {
    ex.src_labels = std::move(edited_labels);
    ex.tgt_labels = std::move(other_labels);
  } else {
    ex.tgt_labels = std::move(edited_labels);
    ex.src_labels = std::move(other_labels);
  }
  detail::refresh_raw(ex.base);
  return ex;
}

inline DivergentExample subtree_deletion(const Seed& seed, Side side, std::mt19937_64& rng) {
  auto choices = eligible_subtrees(seed, side);
  if (choices.empty()) {
    throw NoEligibleEdit("no eligible subtree in seed " + seed.pair.id);
  }
  return delete_subtree(seed, choices[util::uniform_index(rng, choices.size())], side);
}

inline DivergentExample subtree_deletion(const Seed& seed, Side side, std::uint64_t rng_seed) {
  auto rng = util::derive_rng(rng_seed, seed.pair.id);
  return subtree_deletion(seed, side, rng);
}

// ---------------------------------------------------------------------------
// Phrase replacement

// POS-tagged sentences indexed by POS bigram, so that any POS sequence of
// length >= 2 can be looked up.
class DonorPool {
 public:
  struct Occurrence {
    std::uint32_t sentence;
    std::uint32_t start;
  };

  void add(std::vector<std::string> tokens, std::vector<std::string> upos) {
    if (tokens.size() != upos.size()) {
      throw std::invalid_argument("donor tokens/POS length mismatch");
    }
    const auto sid = static_cast<std::uint32_t>(tokens_.size());
    for (std::size_t i = 0; i + 1 < upos.size(); ++i) {
      index_[bigram(upos[i], upos[i + 1])].push_back({sid, static_cast<std::uint32_t>(i)});
    }
    tokens_.push_back(std::move(tokens));
    upos_.push_back(std::move(upos));
  }

  std::size_t size() const { return tokens_.size(); }

  // Distinct donor token sequences whose POS tags equal `pos_seq` exactly and
  // whose surface differs from `surface`, in first-occurrence order.
  std::vector<std::vector<std::string>> find(std::span<const std::string> pos_seq,
                                             std::span<const std::string> surface) const {
    std::vector<std::vector<std::string>> out;
    if (pos_seq.size() < 2) return out;
    auto it = index_.find(bigram(pos_seq[0], pos_seq[1]));
    if (it == index_.end()) return out;
    std::set<std::vector<std::string>> seen;
    for (const auto& occ : it->second) {
      const auto& up = upos_[occ.sentence];
      const auto& tk = tokens_[occ.sentence];
      if (occ.start + pos_seq.size() > up.size()) continue;
      if (!std::equal(pos_seq.begin(), pos_seq.end(), up.begin() + occ.start)) continue;
      std::vector<std::string> cand(tk.begin() + occ.start,
                                    tk.begin() + occ.start + pos_seq.size());
      if (std::equal(cand.begin(), cand.end(), surface.begin(), surface.end())) continue;
      if (seen.insert(cand).second) out.push_back(std::move(cand));
    }
    return out;
  }

 private:
  static std::string bigram(const std::string& a, const std::string& b) { return a + '\x1f' + b; }

  std::vector<std::vector<std::string>> tokens_;
  std::vector<std::vector<std::string>> upos_;
  std::unordered_map<std::string, std::vector<Occurrence>> index_;
};

struct PhraseReplacementConfig {
  std::size_t min_span = 2;
  std::size_t max_tries = 50;
};

// Replaces tokens [start, start+donor.size()) on `side` with `donor`. The new
// span and the opposite-side tokens aligned to the old span are DIV.
inline DivergentExample replace_phrase(const Seed& seed, Side side, std::size_t start,
                                       const std::vector<std::string>& donor) {
  const auto& edited_in = seed.pair.tokens(side);
  if (donor.empty() || start + donor.size() > edited_in.size()) {
    throw std::invalid_argument("replacement span out of range");
  }
  std::set<std::size_t> span;
  for (std::size_t i = start; i < start + donor.size(); ++i) span.insert(i);
  const auto div_opposite = seed.alignment.linked_on(opposite(side), span);

  DivergentExample ex;
  ex.dtype = DivergenceType::PhraseReplacement;
  ex.seed_id = seed.pair.id;
  ex.base = seed.pair;
  ex.base.id = detail::with_suffix(seed.pair.id, ex.dtype);
  auto& edited = ex.base.tokens(side);
  std::copy(donor.begin(), donor.end(), edited.begin() + static_cast<std::ptrdiff_t>(start));
  std::vector<Label> edited_labels(edited.size(), Label::Eq);
  for (std::size_t i : span) edited_labels[i] = Label::Div;
  std::vector<Label> other_labels(seed.pair.tokens(opposite(side)).size(), Label::Eq);
  for (std::size_t j : div_opposite) other_labels[j] = Label::Div;
  if (side == Side::Src) {
    ex.src_labels = std::move(edited_labels);
    ex.tgt_labels = std::move(other_labels);
  } else {
    ex.tgt_labels = std::move(edited_labels);
    ex.src_labels = std::move(other_labels);
  }
  detail::refresh_raw(ex.base);
  return ex;
}

inline DivergentExample phrase_replacement(const Seed& seed, const DonorPool& pool, Side side,
                                           std::mt19937_64& rng,
                                           const PhraseReplacementConfig& cfg = {}) {
  const auto* upos = seed.upos(side);
  if (!upos) throw NoEligibleEdit("no POS tags on the " + std::string(to_string(side)) + " side");
  const auto& toks = seed.pair.tokens(side);
  const std::size_t n = toks.size();
  const std::size_t max_len = std::min(n, (n + 1) / 2);
  if (max_len < cfg.min_span) {
    throw NoEligibleEdit("sentence too short for phrase replacement: " + seed.pair.id);
  }
  for (std::size_t attempt = 0; attempt < cfg.max_tries; ++attempt) {
    const std::size_t len = cfg.min_span + util::uniform_index(rng, max_len - cfg.min_span + 1);
    const std::size_t start = util::uniform_index(rng, n - len + 1);
    std::span<const std::string> pos_seq(upos->data() + start, len);
    std::span<const std::string> surface(toks.data() + start, len);
    auto donors = pool.find(pos_seq, surface);
    if (donors.empty()) continue;
    return replace_phrase(seed, side, start, donors[util::uniform_index(rng, donors.size())]);
  }
  throw NoEligibleEdit("no POS-matching donor after " + std::to_string(cfg.max_tries) +
                       " tries: " + seed.pair.id);
}

// ---------------------------------------------------------------------------
// Lexical substitution

enum class LexicalDirection : std::uint8_t { Generalize, Particularize };

// Candidate source; implementations may wrap any lexical database.
class LexicalProvider {
 public:
  virtual ~LexicalProvider() = default;
  virtual std::vector<std::string> candidates(const std::string& lemma, const std::string& pos,
                                              LexicalDirection dir) const = 0;
};

// In-memory hypernym/hyponym table, loadable from
// `lemma \t pos \t hyper|hypo \t candidate` lines.
class LexicalResource : public LexicalProvider {
 public:
  void add(const std::string& lemma, const std::string& pos, LexicalDirection dir,
           const std::string& candidate) {
    if (candidate.empty() || candidate == lemma) return;
    auto& list = table_[{lemma, pos}][dir == LexicalDirection::Generalize ? 0 : 1];
    if (std::find(list.begin(), list.end(), candidate) == list.end()) list.push_back(candidate);
  }

  std::vector<std::string> candidates(const std::string& lemma, const std::string& pos,
                                      LexicalDirection dir) const override {
    auto it = table_.find({lemma, pos});
    if (it == table_.end()) return {};
    return it->second[dir == LexicalDirection::Generalize ? 0 : 1];
  }

  std::size_t size() const { return table_.size(); }

  static LexicalResource read_tsv(std::istream& in) {
    LexicalResource r;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = util::strip_cr(line);
      if (util::trim(line).empty() || line[0] == '#') continue;
      auto cols = util::split(line, '\t');
      if (cols.size() != 4) throw ParseError("expected lemma, pos, relation, candidate", line_no);
      LexicalDirection dir;
      if (cols[2] == "hyper") {
        dir = LexicalDirection::Generalize;
      } else if (cols[2] == "hypo") {
        dir = LexicalDirection::Particularize;
      } else {
        throw ParseError("relation must be hyper or hypo, got '" + cols[2] + "'", line_no);
      }
      r.add(cols[0], cols[1], dir, cols[3]);
    }
    return r;
  }

  void write_tsv(std::ostream& out) const {
    for (const auto& [key, lists] : table_) {
      for (const auto& c : lists[0]) out << key.first << '\t' << key.second << "\thyper\t" << c << '\n';
      for (const auto& c : lists[1]) out << key.first << '\t' << key.second << "\thypo\t" << c << '\n';
    }
  }

 private:
  std::map<std::pair<std::string, std::string>, std::array<std::vector<std::string>, 2>> table_;
};

// Scores a candidate word placed at `position`.
class LmScorer {
 public:
  virtual ~LmScorer() = default;
  virtual double score_in_context(std::span<const std::string> tokens, std::size_t position,
                                  std::string_view candidate) const = 0;
};

// Context-free fallback: log(1 + corpus count).
class UnigramScorer : public LmScorer {
 public:
  void observe(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) ++counts_[t];
  }
  double score_in_context(std::span<const std::string>, std::size_t,
                          std::string_view candidate) const override {
    auto it = counts_.find(std::string(candidate));
    return std::log1p(it == counts_.end() ? 0.0 : static_cast<double>(it->second));
  }

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

inline bool is_content_pos(std::string_view upos) {
  return upos == "NOUN" || upos == "VERB" || upos == "ADJ";
}

// Candidates usable at source position i (self-substitutions removed).
inline std::vector<std::string> substitution_candidates(const Seed& seed, std::size_t i,
                                                        const LexicalProvider& resource,
                                                        LexicalDirection dir) {
  const auto& upos = seed.src_tree.upos[i];
  if (!is_content_pos(upos)) return {};
  auto cands = resource.candidates(seed.lemma(i), upos, dir);
  std::erase_if(cands, [&](const std::string& c) {
    return c.empty() || c == seed.pair.src_tokens[i] || c == seed.lemma(i);
  });
  return cands;
}

// Highest-scoring candidate; ties go to the lexicographically smallest.
inline std::string best_candidate(const Seed& seed, std::size_t i,
                                  const std::vector<std::string>& cands, const LmScorer& scorer) {
  std::span<const std::string> ctx(seed.pair.src_tokens);
  const std::string* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    const double s = scorer.score_in_context(ctx, i, c);
    if (!best || s > best_score || (s == best_score && c < *best)) {
      best = &c;
      best_score = s;
    }
  }
  if (!best) throw NoEligibleEdit("no substitution candidate");
  return *best;
}

inline DivergentExample substitute_word(const Seed& seed, std::size_t i,
                                        const std::string& replacement, LexicalDirection dir) {
  DivergentExample ex;
  ex.dtype = dir == LexicalDirection::Generalize
                 ? DivergenceType::LexicalSubstitutionGeneralize
                 : DivergenceType::LexicalSubstitutionParticularize;
  ex.seed_id = seed.pair.id;
  ex.base = seed.pair;
  ex.base.id = detail::with_suffix(seed.pair.id, ex.dtype);
  ex.base.src_tokens[i] = replacement;
  ex.src_labels.assign(ex.base.src_tokens.size(), Label::Eq);
  ex.src_labels[i] = Label::Div;
  ex.tgt_labels.assign(ex.base.tgt_tokens.size(), Label::Eq);
  for (std::size_t j : seed.alignment.tgt_for({i})) ex.tgt_labels[j] = Label::Div;
  detail::refresh_raw(ex.base);
  return ex;
}

inline DivergentExample lexical_substitution(const Seed& seed, const LexicalProvider& resource,
                                             const LmScorer& scorer, LexicalDirection dir,
                                             std::mt19937_64& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < seed.pair.src_tokens.size(); ++i) {
    if (!substitution_candidates(seed, i, resource, dir).empty()) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw NoEligibleEdit("no substitutable content word in seed " + seed.pair.id);
  }
  const std::size_t i = eligible[util::uniform_index(rng, eligible.size())];
  const auto cands = substitution_candidates(seed, i, resource, dir);
  return substitute_word(seed, i, best_candidate(seed, i, cands, scorer), dir);
}

// ---------------------------------------------------------------------------
// Contrastive sets

enum class StrategyKind : std::uint8_t { SingleType, Balanced, Concatenation, DivergenceRanking };

struct SamplingStrategy {
  StrategyKind kind = StrategyKind::DivergenceRanking;
  DivergenceType single = DivergenceType::SubtreeDeletion;  // SingleType only

  static SamplingStrategy single_type(DivergenceType t) { return {StrategyKind::SingleType, t}; }
  static SamplingStrategy balanced() { return {StrategyKind::Balanced}; }
  static SamplingStrategy concatenation() { return {StrategyKind::Concatenation}; }
  static SamplingStrategy divergence_ranking() { return {StrategyKind::DivergenceRanking}; }

  // "single:<type>", "balanced", "concatenation", "divergence-ranking"
  static SamplingStrategy parse(std::string_view s) {
    if (s == "balanced") return balanced();
    if (s == "concatenation") return concatenation();
    if (s == "divergence-ranking" || s == "divergence_ranking") return divergence_ranking();
    if (s.rfind("single:", 0) == 0) return single_type(divergence_type_from_string(s.substr(7)));
    for (auto t : kAllDivergenceTypes) {
      if (s == to_string(t)) return single_type(t);
    }
    throw std::invalid_argument("unknown sampling strategy: " + std::string(s));
  }

  std::string name() const {
    switch (kind) {
      case StrategyKind::SingleType: return std::string("single:") + to_string(single);
      case StrategyKind::Balanced: return "balanced";
      case StrategyKind::Concatenation: return "concatenation";
      case StrategyKind::DivergenceRanking: return "divergence-ranking";
    }
    return "?";
  }
};

// The (higher, lower) kinds emitted per seed under divergence ranking.
struct RankingComposition {
  std::vector<RankRelation> pairs = {
      {std::nullopt, DivergenceType::LexicalSubstitutionGeneralize},
      {std::nullopt, DivergenceType::LexicalSubstitutionParticularize},
      {DivergenceType::LexicalSubstitutionGeneralize, DivergenceType::PhraseReplacement},
      {DivergenceType::LexicalSubstitutionParticularize, DivergenceType::SubtreeDeletion},
  };

  void validate() const {
    for (const auto& r : pairs) {
      if (!r.lower || granularity(r.higher) <= granularity(r.lower)) {
        throw std::invalid_argument("ranking pair " + kind_name(r.higher) + " > " +
                                    kind_name(r.lower) + " violates the granularity order");
      }
    }
  }
};

struct Generators {
  const DonorPool* src_donors = nullptr;
  const DonorPool* tgt_donors = nullptr;  // optional
  const LexicalProvider* lexicon = nullptr;
  const LmScorer* lm = nullptr;
  PhraseReplacementConfig phrase;
  RankingComposition ranking;
};

// Owns the resources behind a Generators view: donor pools and a unigram
// scorer built from the seeds themselves, plus a lexicon.
struct GeneratorResources {
  DonorPool src_donors;
  DonorPool tgt_donors;
  LexicalResource lexicon;
  UnigramScorer lm;
  PhraseReplacementConfig phrase;
  RankingComposition ranking;

  GeneratorResources(const std::vector<Seed>& seeds, LexicalResource lex)
      : lexicon(std::move(lex)) {
    for (const auto& s : seeds) {
      src_donors.add(s.pair.src_tokens, s.src_tree.upos);
      if (!s.tgt_upos.empty()) tgt_donors.add(s.pair.tgt_tokens, s.tgt_upos);
      lm.observe(s.pair.src_tokens);
    }
  }

  // The returned view points into *this.
  Generators view() const {
    return {&src_donors, tgt_donors.size() ? &tgt_donors : nullptr, &lexicon, &lm, phrase,
            ranking};
  }
};

struct SkippedEdit {
  std::string seed_id;
  DivergenceType dtype;
  std::string reason;
};

struct ContrastiveSet {
  std::vector<ContrastiveItem> items;
  std::vector<SkippedEdit> skipped;
};

// Runs one generator on one seed. The RNG stream depends only on
// (rng_seed, seed id, type), so results do not depend on seed order.
inline DivergentExample generate_divergent(const Seed& seed, DivergenceType t,
                                           const Generators& gen, std::uint64_t rng_seed) {
  auto rng = util::derive_rng(rng_seed, seed.pair.id + "/" + to_string(t));
  switch (t) {
    case DivergenceType::SubtreeDeletion: {
      // 50/50 source or target deletion; fall back to the other side.
      const Side first = (rng() & 1) ? Side::Tgt : Side::Src;
      try {
        return subtree_deletion(seed, first, rng);
      } catch (const NoEligibleEdit&) {
        return subtree_deletion(seed, opposite(first), rng);
      }
    }
    case DivergenceType::PhraseReplacement: {
      if (!gen.src_donors) throw NoEligibleEdit("no donor pool configured");
      Side side = Side::Src;
      if (gen.tgt_donors && !seed.tgt_upos.empty() && (rng() & 1)) side = Side::Tgt;
      return phrase_replacement(seed, side == Side::Src ? *gen.src_donors : *gen.tgt_donors,
                                side, rng, gen.phrase);
    }
    case DivergenceType::LexicalSubstitutionGeneralize:
    case DivergenceType::LexicalSubstitutionParticularize: {
      if (!gen.lexicon || !gen.lm) throw NoEligibleEdit("no lexical resource configured");
      return lexical_substitution(seed, *gen.lexicon, *gen.lm,
                                  t == DivergenceType::LexicalSubstitutionGeneralize
                                      ? LexicalDirection::Generalize
                                      : LexicalDirection::Particularize,
                                  rng);
    }
  }
  throw std::logic_error("unhandled divergence type");
}

inline ContrastiveSet build_contrastive_set(const std::vector<Seed>& seeds,
                                            const SamplingStrategy& strategy,
                                            const Generators& gen, std::uint64_t rng_seed) {
  gen.ranking.validate();
  ContrastiveSet out;
  for (const auto& seed : seeds) {
    std::map<DivergenceType, std::optional<DivergentExample>> cache;
    auto get = [&](DivergenceType t) -> const DivergentExample* {
      auto it = cache.find(t);
      if (it == cache.end()) {
        std::optional<DivergentExample> ex;
        try {
          ex = generate_divergent(seed, t, gen, rng_seed);
        } catch (const NoEligibleEdit& e) {
          out.skipped.push_back({seed.pair.id, t, e.what()});
        }
        it = cache.emplace(t, std::move(ex)).first;
      }
      return it->second ? &*it->second : nullptr;
    };
    auto sample_of = [&](const SampleKind& k) -> std::optional<Sample> {
      if (!k) return Sample::equivalent(seed.pair);
      const auto* d = get(*k);
      if (!d) return std::nullopt;
      return Sample::from(*d);
    };
    auto emit = [&](const SampleKind& hi, DivergenceType lo) {
      auto x = sample_of(hi);
      if (!x) return;
      auto y = sample_of(lo);
      if (!y) return;
      out.items.push_back({std::move(*x), std::move(*y), seed.pair.id, {hi, lo}});
    };

    switch (strategy.kind) {
      case StrategyKind::SingleType:
        emit(std::nullopt, strategy.single);
        break;
      case StrategyKind::Balanced: {
        auto rng = util::derive_rng(rng_seed, seed.pair.id + "/balanced");
        emit(std::nullopt, kAllDivergenceTypes[util::uniform_index(rng, 4)]);
        break;
      }
      case StrategyKind::Concatenation:
        for (auto t : kAllDivergenceTypes) emit(std::nullopt, t);
        break;
      case StrategyKind::DivergenceRanking:
        for (const auto& r : gen.ranking.pairs) emit(r.higher, *r.lower);
        break;
    }
  }
  return out;
}

// Items a seed contributes when every edit it needs succeeds.
inline std::size_t items_per_seed(const SamplingStrategy& strategy, const Generators& gen) {
  switch (strategy.kind) {
    case StrategyKind::SingleType:
    case StrategyKind::Balanced: return 1;
    case StrategyKind::Concatenation: return std::size(kAllDivergenceTypes);
    case StrategyKind::DivergenceRanking: return gen.ranking.pairs.size();
  }
  return 0;
}

// Walks `seeds` in order and keeps the first `n_seeds` whose full item
// complement was generated. Seeds left incomplete are reported in `skipped`
// and contribute nothing.
inline ContrastiveSet build_complete_set(const std::vector<Seed>& seeds,
                                         const SamplingStrategy& strategy, const Generators& gen,
                                         std::uint64_t rng_seed, std::size_t n_seeds) {
  const std::size_t per = items_per_seed(strategy, gen);
  ContrastiveSet out;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < seeds.size() && kept < n_seeds; ++i) {
    auto one = build_contrastive_set({seeds[i]}, strategy, gen, rng_seed);
    out.skipped.insert(out.skipped.end(), one.skipped.begin(), one.skipped.end());
    if (one.items.size() != per) continue;
    out.items.insert(out.items.end(), std::make_move_iterator(one.items.begin()),
                     std::make_move_iterator(one.items.end()));
    ++kept;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL serialization

namespace detail {

inline nlohmann::json labels_json(const std::vector<Label>& ls) {
  auto a = nlohmann::json::array();
  for (auto l : ls) a.push_back(to_string(l));
  return a;
}

inline std::vector<Label> labels_from_json(const nlohmann::json& j) {
  std::vector<Label> out;
  for (const auto& v : j) out.push_back(label_from_string(v.get<std::string>()));
  return out;
}

inline nlohmann::json sample_json(const Sample& s) {
  return {{"id", s.pair.id},
          {"kind", kind_name(s.kind)},
          {"src", s.pair.src_tokens},
          {"tgt", s.pair.tgt_tokens},
          {"src_labels", labels_json(s.src_labels)},
          {"tgt_labels", labels_json(s.tgt_labels)}};
}

inline Sample sample_from_json(const nlohmann::json& j) {
  Sample s;
  s.pair.id = j.at("id").get<std::string>();
  s.kind = kind_from_string(j.at("kind").get<std::string>());
  s.pair.src_tokens = j.at("src").get<std::vector<std::string>>();
  s.pair.tgt_tokens = j.at("tgt").get<std::vector<std::string>>();
  refresh_raw(s.pair);
  s.src_labels = labels_from_json(j.at("src_labels"));
  s.tgt_labels = labels_from_json(j.at("tgt_labels"));
  if (s.src_labels.size() != s.pair.src_tokens.size() ||
      s.tgt_labels.size() != s.pair.tgt_tokens.size()) {
    throw ParseError("label count differs from token count in sample " + s.pair.id);
  }
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const ContrastiveItem& it) {
  return {{"x", detail::sample_json(it.x)},
          {"y", detail::sample_json(it.y)},
          {"z", {{"src", detail::labels_json(it.y.src_labels)},
                 {"tgt", detail::labels_json(it.y.tgt_labels)}}},
          {"dtype", kind_name(it.y.kind)},
          {"seed_id", it.seed_id},
          {"rank_relation", {{"higher", kind_name(it.rank_relation.higher)},
                             {"lower", kind_name(it.rank_relation.lower)}}}};
}

inline ContrastiveItem contrastive_item_from_json(const nlohmann::json& j) {
  ContrastiveItem it;
  it.x = detail::sample_from_json(j.at("x"));
  it.y = detail::sample_from_json(j.at("y"));
  const auto& z = j.at("z");
  if (detail::labels_from_json(z.at("src")) != it.y.src_labels ||
      detail::labels_from_json(z.at("tgt")) != it.y.tgt_labels) {
    throw ParseError("z does not match the labels of y");
  }
  if (kind_from_string(j.at("dtype").get<std::string>()) != it.y.kind) {
    throw ParseError("dtype does not match y.kind");
  }
  it.seed_id = j.at("seed_id").get<std::string>();
  it.rank_relation.higher = kind_from_string(j.at("rank_relation").at("higher").get<std::string>());
  it.rank_relation.lower = kind_from_string(j.at("rank_relation").at("lower").get<std::string>());
  return it;
}

inline std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline void write_contrastive_jsonl(std::ostream& out, const std::vector<ContrastiveItem>& items) {
  for (const auto& it : items) out << dump_line(to_json(it)) << '\n';
}

inline std::vector<ContrastiveItem> read_contrastive_jsonl(std::istream& in) {
  std::vector<ContrastiveItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(contrastive_item_from_json(nlohmann::json::parse(line)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace semdiv

#endif  // SEMDIV_SYNTHGEN_HPP
