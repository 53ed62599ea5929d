// Replays a generated edit against its seed and reports the first violated
// property, or an empty string. Shared by the unit tests and the acceptance
// runner.

#ifndef SEMDIV_TESTS_SYNTH_CHECKS_HPP
#define SEMDIV_TESTS_SYNTH_CHECKS_HPP

#include <set>
#include <string>
#include <vector>

#include "semdiv/synthgen.hpp"

namespace synth_checks {

using namespace semdiv;

inline std::set<std::size_t> div_set(const std::vector<Label>& v) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == Label::Div) out.insert(i);
  }
  return out;
}

// Opposite-side tokens linked to `from`, by scanning every link.
inline std::set<std::size_t> linked(const Alignment& a, Side from_side, const std::set<std::size_t>& from) {
  std::set<std::size_t> out;
  for (auto [s, t] : a.links) {
    if (from_side == Side::Src && from.count(s)) out.insert(t);
    if (from_side == Side::Tgt && from.count(t)) out.insert(s);
  }
  return out;
}

// Every token reachable from `root` by following children, computed from the
// head array directly.
inline std::set<std::size_t> descendants(const DependencyTree& t, std::size_t root) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < t.heads.size(); ++i) {
    std::size_t cur = i;
    for (std::size_t steps = 0; steps <= t.heads.size(); ++steps) {
      if (cur == root) {
        out.insert(i);
        break;
      }
      if (t.heads[cur] == 0) break;
      cur = static_cast<std::size_t>(t.heads[cur] - 1);
    }
  }
  return out;
}

inline std::string common(const Seed& seed, const DivergentExample& ex) {
  if (ex.src_labels.size() != ex.base.src_tokens.size()) return "src label count differs from token count";
  if (ex.tgt_labels.size() != ex.base.tgt_tokens.size()) return "tgt label count differs from token count";
  if (div_set(ex.src_labels).empty() && div_set(ex.tgt_labels).empty()) return "no DIV label";
  if (ex.base.src_tokens == seed.pair.src_tokens && ex.base.tgt_tokens == seed.pair.tgt_tokens) {
    return "edit left both sides unchanged";
  }
  if (ex.seed_id != seed.pair.id) return "seed_id not set";
  return "";
}

inline std::string check_subtree_deletion(const Seed& seed, const DivergentExample& ex) {
  if (auto e = common(seed, ex); !e.empty()) return e;
  const bool src_edit = ex.base.src_tokens.size() < seed.pair.src_tokens.size();
  const bool tgt_edit = ex.base.tgt_tokens.size() < seed.pair.tgt_tokens.size();
  if (src_edit == tgt_edit) return "subtree deletion must shorten exactly one side";
  const Side side = src_edit ? Side::Src : Side::Tgt;
  if (ex.base.tokens(opposite(side)) != seed.pair.tokens(opposite(side))) return "opposite side was changed";
  if (!div_set(ex.labels(side)).empty()) return "edited side carries DIV labels";

  const std::size_t n = seed.src_tree.heads.size();
  const std::size_t limit = (n + 1) / 2;
  // Find an eligible subtree whose deletion reproduces the output exactly.
  for (std::size_t root = 0; root < n; ++root) {
    const auto sub = descendants(seed.src_tree, root);
    if (sub.size() < 2 || sub.size() >= limit) continue;
    const auto removed = side == Side::Src ? sub : linked(seed.alignment, Side::Src, sub);
    if (removed.empty()) continue;
    std::vector<std::string> kept;
    const auto& in = seed.pair.tokens(side);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!removed.count(i)) kept.push_back(in[i]);
    }
    if (kept != ex.base.tokens(side)) continue;
    if (div_set(ex.labels(opposite(side))) == linked(seed.alignment, side, removed)) return "";
  }
  return "no eligible subtree reproduces the deletion and its labels";
}

inline std::string check_phrase_replacement(const Seed& seed, const DivergentExample& ex,
                                            const std::vector<std::vector<std::string>>& donor_tokens,
                                            const std::vector<std::vector<std::string>>& donor_upos) {
  if (auto e = common(seed, ex); !e.empty()) return e;
  if (ex.base.src_tokens.size() != seed.pair.src_tokens.size() ||
      ex.base.tgt_tokens.size() != seed.pair.tgt_tokens.size()) {
    return "phrase replacement changed a length";
  }
  const bool src_edit = ex.base.src_tokens != seed.pair.src_tokens;
  const bool tgt_edit = ex.base.tgt_tokens != seed.pair.tgt_tokens;
  if (src_edit == tgt_edit) return "phrase replacement must edit exactly one side";
  const Side side = src_edit ? Side::Src : Side::Tgt;
  const auto span = div_set(ex.labels(side));
  if (span.size() < 2) return "replaced span shorter than 2";
  const std::size_t a = *span.begin(), len = span.size();
  if (*span.rbegin() != a + len - 1) return "replaced span not contiguous";
  const std::size_t n = seed.pair.tokens(side).size();
  if (len > (n + 1) / 2) return "replaced span longer than half the sentence";
  const auto& before = seed.pair.tokens(side);
  const auto& after = ex.base.tokens(side);
  for (std::size_t i = 0; i < n; ++i) {
    if (!span.count(i) && before[i] != after[i]) return "token outside the span changed";
  }
  std::vector<std::string> old_surface(before.begin() + a, before.begin() + a + len);
  std::vector<std::string> new_surface(after.begin() + a, after.begin() + a + len);
  if (old_surface == new_surface) return "replacement has the original surface";
  const auto* upos = seed.upos(side);
  if (!upos) return "edited side has no POS tags";
  std::vector<std::string> sig(upos->begin() + a, upos->begin() + a + len);
  bool found = false;
  for (std::size_t d = 0; d < donor_tokens.size() && !found; ++d) {
    for (std::size_t o = 0; o + len <= donor_tokens[d].size() && !found; ++o) {
      bool ok = true;
      for (std::size_t k = 0; k < len && ok; ++k) {
        ok = donor_tokens[d][o + k] == new_surface[k] && donor_upos[d][o + k] == sig[k];
      }
      found = ok;
    }
  }
  if (!found) return "no donor substring has this surface with the span's POS signature";
  if (div_set(ex.labels(opposite(side))) != linked(seed.alignment, side, span)) {
    return "opposite-side DIV labels are not the tokens aligned to the span";
  }
  return "";
}

inline std::string check_lexical_substitution(const Seed& seed, const DivergentExample& ex) {
  if (auto e = common(seed, ex); !e.empty()) return e;
  if (ex.base.tgt_tokens != seed.pair.tgt_tokens) return "lexical substitution changed the target";
  if (ex.base.src_tokens.size() != seed.pair.src_tokens.size()) return "lexical substitution changed the length";
  std::set<std::size_t> changed;
  for (std::size_t i = 0; i < seed.pair.src_tokens.size(); ++i) {
    if (seed.pair.src_tokens[i] != ex.base.src_tokens[i]) changed.insert(i);
  }
  if (changed.size() != 1) return "lexical substitution must change exactly one token";
  const std::size_t i = *changed.begin();
  const auto& upos = seed.src_tree.upos[i];
  if (upos != "NOUN" && upos != "VERB" && upos != "ADJ") return "substituted a non-content word";
  if (div_set(ex.src_labels) != changed) return "src DIV labels are not the substituted token";
  if (div_set(ex.tgt_labels) != linked(seed.alignment, Side::Src, changed)) {
    return "tgt DIV labels are not the tokens aligned to the substitution";
  }
  return "";
}

}  // namespace synth_checks

#endif  // SEMDIV_TESTS_SYNTH_CHECKS_HPP
