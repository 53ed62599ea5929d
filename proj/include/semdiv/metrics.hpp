// Evaluation metrics: classification reports, token F1, rationale
// aggregation, IoU span F1, pairwise agreement, Krippendorff's alpha, and the
// threshold classifiers used for coarse and fine-grained decisions.

#ifndef SEMDIV_METRICS_HPP
#define SEMDIV_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semdiv/common.hpp"

namespace semdiv {

// ---------------------------------------------------------------------------
// Classification report

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
  bool zero_division = false;
};

template <class T>
struct ClassificationReport {
  std::map<T, ClassMetrics> per_class;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::size_t total = 0;

  const ClassMetrics& at(const T& c) const { return per_class.at(c); }
};

// Per-class P/R/F1 over the classes seen in gold or pred, weighted by gold
// support. A zero denominator yields 0 and sets zero_division.
template <class T>
ClassificationReport<T> classification_report(std::span<const T> gold, std::span<const T> pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("gold/pred length mismatch");
  if (gold.empty()) throw std::invalid_argument("classification_report needs at least one example");
  std::map<T, std::size_t> tp, gold_n, pred_n;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++gold_n[gold[i]];
    ++pred_n[pred[i]];
    if (gold[i] == pred[i]) ++tp[gold[i]];
  }
  ClassificationReport<T> r;
  r.total = gold.size();
  std::set<T> classes;
  for (const auto& [c, n] : gold_n) classes.insert(c);
  for (const auto& [c, n] : pred_n) classes.insert(c);
  for (const auto& c : classes) {
    ClassMetrics m;
    const double t = static_cast<double>(tp[c]);
    const std::size_t g = gold_n[c], p = pred_n[c];
    m.support = g;
    if (p) m.precision = t / static_cast<double>(p); else m.zero_division = true;
    if (g) m.recall = t / static_cast<double>(g); else m.zero_division = true;
    if (m.precision + m.recall > 0) {
      m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.zero_division = true;
    }
    const double w = static_cast<double>(g) / static_cast<double>(r.total);
    r.weighted_precision += w * m.precision;
    r.weighted_recall += w * m.recall;
    r.weighted_f1 += w * m.f1;
    r.per_class.emplace(c, m);
  }
  return r;
}

template <class T>
ClassificationReport<T> classification_report(const std::vector<T>& gold, const std::vector<T>& pred) {
  return classification_report(std::span<const T>(gold), std::span<const T>(pred));
}

// ---------------------------------------------------------------------------
// Token F1

struct TokenF1 {
  double eq = 0.0;
  double div = 0.0;
  double mul = 0.0;  // eq * div
};

inline double f1_from_counts(std::size_t tp, std::size_t gold, std::size_t pred) {
  return gold + pred == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(gold + pred);
}

// Both classes are always scored; an absent class gets F1 0.
inline TokenF1 token_f1(std::span<const Label> gold, std::span<const Label> pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("token label length mismatch");
  std::size_t tp[2] = {0, 0}, g[2] = {0, 0}, p[2] = {0, 0};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto a = static_cast<int>(gold[i]), b = static_cast<int>(pred[i]);
    ++g[a];
    ++p[b];
    if (a == b) ++tp[a];
  }
  TokenF1 out;
  out.eq = f1_from_counts(tp[0], g[0], p[0]);
  out.div = f1_from_counts(tp[1], g[1], p[1]);
  out.mul = out.eq * out.div;
  return out;
}

// ---------------------------------------------------------------------------
// Spans and rationales

enum class SpanLabel : std::uint8_t { Added, Changed, Other };

inline const char* to_string(SpanLabel l) {
  switch (l) {
    case SpanLabel::Added: return "Added";
    case SpanLabel::Changed: return "Changed";
    case SpanLabel::Other: return "Other";
  }
  return "?";
}

inline SpanLabel span_label_from_string(std::string_view s) {
  if (s == "Added") return SpanLabel::Added;
  if (s == "Changed") return SpanLabel::Changed;
  if (s == "Other") return SpanLabel::Other;
  throw std::invalid_argument("unknown span label: " + std::string(s));
}

// Half-open token interval [start, end) on one side.
struct Span {
  Side side = Side::Src;
  std::size_t start = 0;
  std::size_t end = 0;
  SpanLabel label = SpanLabel::Other;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

using SpanSet = std::vector<Span>;

// Bounds and no-overlap (per side) check; the message names the offending span.
inline void validate_spans(const SpanSet& spans, std::size_t src_len, std::size_t tgt_len) {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const std::size_t n = s.side == Side::Src ? src_len : tgt_len;
    if (s.start >= s.end || s.end > n) {
      throw std::out_of_range("spans[" + std::to_string(i) + "]: [" + std::to_string(s.start) +
                              ", " + std::to_string(s.end) + ") out of bounds for " +
                              to_string(s.side) + " side of length " + std::to_string(n));
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = spans[j];
      if (o.side == s.side && s.start < o.end && o.start < s.end) {
        throw std::invalid_argument("spans[" + std::to_string(i) + "] overlaps spans[" +
                                    std::to_string(j) + "]");
      }
    }
  }
}

struct TokenGold {
  std::vector<Label> src;
  std::vector<Label> tgt;

  std::vector<Label>& side(Side s) { return s == Side::Src ? src : tgt; }
  const std::vector<Label>& side(Side s) const { return s == Side::Src ? src : tgt; }
  friend bool operator==(const TokenGold&, const TokenGold&) = default;
};

// DIV wherever a span covers the token.
inline TokenGold spans_to_tokens(const SpanSet& spans, std::size_t src_len, std::size_t tgt_len) {
  TokenGold g{std::vector<Label>(src_len, Label::Eq), std::vector<Label>(tgt_len, Label::Eq)};
  for (const auto& s : spans) {
    auto& v = g.side(s.side);
    if (s.end > v.size() || s.start > s.end) throw std::out_of_range("span out of bounds");
    for (std::size_t i = s.start; i < s.end; ++i) v[i] = Label::Div;
  }
  return g;
}

// Maximal runs of DIV tokens as spans (label Other).
inline SpanSet tokens_to_spans(const TokenGold& g) {
  SpanSet out;
  for (Side side : {Side::Src, Side::Tgt}) {
    const auto& v = g.side(side);
    for (std::size_t i = 0; i < v.size();) {
      if (v[i] != Label::Div) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < v.size() && v[j] == Label::Div) ++j;
      out.push_back({side, i, j, SpanLabel::Other});
      i = j;
    }
  }
  return out;
}

enum class AggregationMode : std::uint8_t { Union, PairwiseUnion, Intersection };

inline const char* to_string(AggregationMode m) {
  switch (m) {
    case AggregationMode::Union: return "union";
    case AggregationMode::PairwiseUnion: return "pairwise-union";
    case AggregationMode::Intersection: return "intersection";
  }
  return "?";
}

// A token is DIV when at least 1 (Union), 2 (PairwiseUnion) or all
// (Intersection) annotators cover it. Span labels are ignored.
inline TokenGold aggregate_rationales(const std::vector<SpanSet>& annotations, std::size_t src_len,
                                      std::size_t tgt_len, AggregationMode mode) {
  if (annotations.empty()) throw std::invalid_argument("no annotations to aggregate");
  const std::size_t k = annotations.size();
  const std::size_t need = mode == AggregationMode::Union           ? 1
                           : mode == AggregationMode::PairwiseUnion ? std::min<std::size_t>(2, k)
                                                                    : k;
  std::vector<std::size_t> cover[2] = {std::vector<std::size_t>(src_len, 0),
                                       std::vector<std::size_t>(tgt_len, 0)};
  for (const auto& spans : annotations) {
    validate_spans(spans, src_len, tgt_len);
    for (const auto& s : spans) {
      for (std::size_t i = s.start; i < s.end; ++i) ++cover[static_cast<int>(s.side)][i];
    }
  }
  TokenGold g{std::vector<Label>(src_len, Label::Eq), std::vector<Label>(tgt_len, Label::Eq)};
  for (int s = 0; s < 2; ++s) {
    auto& v = g.side(static_cast<Side>(s));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (cover[s][i] >= need) v[i] = Label::Div;
    }
  }
  return g;
}

// Token IoU; spans on different sides do not overlap.
inline double span_iou(const Span& a, const Span& b) {
  if (a.side != b.side) return 0.0;
  const std::size_t lo = std::max(a.start, b.start), hi = std::min(a.end, b.end);
  const std::size_t inter = hi > lo ? hi - lo : 0;
  const std::size_t uni = a.length() + b.length() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Greedy one-to-one matching by descending IoU among pairs with IoU >
// threshold. For threshold >= 0.5 each span has at most one partner above
// threshold, so greedy is optimal there.
inline std::size_t match_spans(const SpanSet& reference, const SpanSet& predicted,
                               double iou_threshold = 0.5) {
  struct Cand {
    double iou;
    std::size_t p, r;
  };
  std::vector<Cand> cands;
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t r = 0; r < reference.size(); ++r) {
      const double iou = span_iou(predicted[p], reference[r]);
      if (iou > iou_threshold) cands.push_back({iou, p, r});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.iou > b.iou; });
  std::vector<bool> used_p(predicted.size()), used_r(reference.size());
  std::size_t matched = 0;
  for (const auto& c : cands) {
    if (used_p[c.p] || used_r[c.r]) continue;
    used_p[c.p] = used_r[c.r] = true;
    ++matched;
  }
  return matched;
}

// F1 of predicted spans against reference spans for one pair. Empty on both
// sides has no defined F1 and yields nullopt.
inline std::optional<double> span_f1(const SpanSet& reference, const SpanSet& predicted,
                                     double iou_threshold = 0.5) {
  if (reference.empty() && predicted.empty()) return std::nullopt;
  const std::size_t m = match_spans(reference, predicted, iou_threshold);
  return f1_from_counts(m, reference.size(), predicted.size());
}

// Mean per-pair span F1, skipping pairs where both sets are empty. Returns
// nullopt when every pair was skipped.
inline std::optional<double> span_macro_f1(const std::vector<SpanSet>& reference,
                                           const std::vector<SpanSet>& predicted,
                                           double iou_threshold = 0.5) {
  if (reference.size() != predicted.size()) throw std::invalid_argument("pair count mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (auto f = span_f1(reference[i], predicted[i], iou_threshold)) {
      sum += *f;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// DIV-class F1 over the tokens of one pair; nullopt if neither side marks any.
inline std::optional<double> token_div_f1(const TokenGold& reference, const TokenGold& predicted) {
  std::size_t tp = 0, g = 0, p = 0;
  for (Side side : {Side::Src, Side::Tgt}) {
    const auto& a = reference.side(side);
    const auto& b = predicted.side(side);
    if (a.size() != b.size()) throw std::invalid_argument("token count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
      g += a[i] == Label::Div;
      p += b[i] == Label::Div;
      tp += a[i] == Label::Div && b[i] == Label::Div;
    }
  }
  if (g + p == 0) return std::nullopt;
  return f1_from_counts(tp, g, p);
}

// ---------------------------------------------------------------------------
// Pairwise inter-annotator agreement

enum class IaaLevel : std::uint8_t { Span, Token };

struct IaaItem {
  std::string pair_id;
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::map<std::string, SpanSet> by_annotator;
};

struct AnnotatorPairScore {
  std::string reference;
  std::string predicted;
  double f1 = 0.0;
  std::size_t items = 0;
};

struct IaaResult {
  double mean = 0.0;
  double stdev = 0.0;  // population stdev across annotator pairs
  std::vector<AnnotatorPairScore> pairs;
};

// Every ordered annotator pair (a as reference, b as prediction) is scored by
// the mean per-item F1 over the items both annotated; mean and stdev are
// taken across pairs. Pairs with no scorable item are left out.
inline IaaResult pairwise_iaa(const std::vector<IaaItem>& items, IaaLevel level,
                              double iou_threshold = 0.5) {
  std::set<std::string> annotators;
  for (const auto& it : items) {
    for (const auto& [a, s] : it.by_annotator) annotators.insert(a);
  }
  IaaResult out;
  for (const auto& a : annotators) {
    for (const auto& b : annotators) {
      if (a == b) continue;
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& it : items) {
        auto ia = it.by_annotator.find(a), ib = it.by_annotator.find(b);
        if (ia == it.by_annotator.end() || ib == it.by_annotator.end()) continue;
        std::optional<double> f;
        if (level == IaaLevel::Span) {
          f = span_f1(ia->second, ib->second, iou_threshold);
        } else {
          f = token_div_f1(spans_to_tokens(ia->second, it.src_len, it.tgt_len),
                           spans_to_tokens(ib->second, it.src_len, it.tgt_len));
        }
        if (f) {
          sum += *f;
          ++n;
        }
      }
      if (n) out.pairs.push_back({a, b, sum / static_cast<double>(n), n});
    }
  }
  if (out.pairs.empty()) return out;
  for (const auto& p : out.pairs) out.mean += p.f1;
  out.mean /= static_cast<double>(out.pairs.size());
  for (const auto& p : out.pairs) out.stdev += (p.f1 - out.mean) * (p.f1 - out.mean);
  out.stdev = std::sqrt(out.stdev / static_cast<double>(out.pairs.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Krippendorff's alpha (nominal)

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ratings[item][annotator]; nullopt marks a missing rating. Items with fewer
// than two ratings do not contribute. Data with a single value everywhere
// gives 1.
template <class T>
double krippendorff_alpha(const std::vector<std::vector<std::optional<T>>>& ratings) {
  std::set<T> all_values;
  std::map<T, std::map<T, double>> o;
  for (const auto& item : ratings) {
    std::vector<T> vals;
    for (const auto& r : item) {
      if (r) {
        vals.push_back(*r);
        all_values.insert(*r);
      }
    }
    const std::size_t m = vals.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) o[vals[i]][vals[j]] += w;
      }
    }
  }
  if (all_values.size() == 1) return 1.0;
  std::map<T, double> n_c;
  double n = 0.0, observed = 0.0;
  for (const auto& [c, row] : o) {
    for (const auto& [k, v] : row) {
      n_c[c] += v;
      n += v;
      if (!(c == k)) observed += v;
    }
  }
  if (n < 2.0) throw InsufficientData("krippendorff_alpha: fewer than two pairable values");
  double expected = 0.0;
  for (const auto& [c, nc] : n_c) {
    for (const auto& [k, nk] : n_c) {
      if (!(c == k)) expected += nc * nk;
    }
  }
  if (expected == 0.0) {
    throw InsufficientData("krippendorff_alpha: no expected disagreement among pairable values");
  }
  return 1.0 - (n - 1.0) * observed / expected;
}

// ---------------------------------------------------------------------------
// Threshold classifiers

enum class FineClass : std::uint8_t { SomeMeaningDifference, Unrelated };

inline const char* to_string(FineClass c) {
  return c == FineClass::Unrelated ? "unrelated" : "some_meaning_difference";
}

enum class DivPctMode : std::uint8_t { Pooled, PerSideMean };

// Percentage of DIV tokens. Pooled counts both sides together; PerSideMean
// averages the two per-side percentages.
inline double div_percentage(std::span<const Label> src, std::span<const Label> tgt,
                             DivPctMode mode = DivPctMode::Pooled) {
  auto count = [](std::span<const Label> v) {
    return static_cast<double>(std::count(v.begin(), v.end(), Label::Div));
  };
  if (mode == DivPctMode::Pooled) {
    if (src.empty() && tgt.empty()) throw std::invalid_argument("no tokens to classify");
    return 100.0 * (count(src) + count(tgt)) / static_cast<double>(src.size() + tgt.size());
  }
  if (src.empty() || tgt.empty()) throw std::invalid_argument("per-side DIV% needs both sides");
  return 50.0 * (count(src) / static_cast<double>(src.size()) +
                 count(tgt) / static_cast<double>(tgt.size()));
}

// Unrelated iff DIV% > threshold_pct.
inline FineClass divpct_classify(std::span<const Label> src, std::span<const Label> tgt,
                                 double threshold_pct, DivPctMode mode = DivPctMode::Pooled) {
  if (!(threshold_pct > 0.0 && threshold_pct < 100.0)) {
    throw std::invalid_argument("threshold_pct must be in (0, 100)");
  }
  return div_percentage(src, tgt, mode) > threshold_pct ? FineClass::Unrelated
                                                        : FineClass::SomeMeaningDifference;
}

inline constexpr double kLaserCutoff = 1.04;

// Equivalent iff score > cutoff.
inline SentenceLabel score_threshold_classify(double score, double cutoff = kLaserCutoff) {
  if (!std::isfinite(score)) throw std::invalid_argument("score must be finite");
  return score > cutoff ? SentenceLabel::Equivalent : SentenceLabel::Divergent;
}

}  // namespace semdiv

#endif  // SEMDIV_METRICS_HPP
