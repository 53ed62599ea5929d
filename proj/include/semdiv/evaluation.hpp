// Scores a model (or supplied predictions) against an annotated dataset:
// sentence-level P/R/F1, token F1 under each rationale aggregation, and
// DIV%-threshold separation of fine-grained from unrelated pairs.

#ifndef SEMDIV_EVALUATION_HPP
#define SEMDIV_EVALUATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semdiv/metrics.hpp"
#include "semdiv/refresd.hpp"
#include "semdiv/scorer.hpp"

namespace semdiv {

struct EvaluationConfig {
  std::vector<double> divpct_thresholds = {10, 20, 30, 40};
  DivPctMode divpct_mode = DivPctMode::Pooled;
  // Token F1 is computed on pairs of this gold class; nullopt uses all.
  std::optional<SentenceClass> token_eval_class = SentenceClass::SomeMeaningDifference;
  double laser_cutoff = kLaserCutoff;
};

using PredictionMap = std::map<std::string, Prediction>;

inline PredictionMap predict_dataset(const ScorerParams& p, const RefresdDataset& d,
                                     double threshold = 0.5) {
  PredictionMap out;
  for (const auto* ap : d.included()) out.emplace(ap->pair.id, predict(p, ap->pair, threshold));
  return out;
}

inline SentenceLabel gold_binary(SentenceClass c) {
  return is_divergent(c) ? SentenceLabel::Divergent : SentenceLabel::Equivalent;
}

template <class T>
nlohmann::json report_json(const ClassificationReport<T>& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [c, m] : r.per_class) {
    per[to_string(c)] = {{"precision", 100 * m.precision}, {"recall", 100 * m.recall},
                         {"f1", 100 * m.f1},             {"support", m.support},
                         {"zero_division", m.zero_division}};
  }
  return {{"per_class", per},
          {"weighted_precision", 100 * r.weighted_precision},
          {"weighted_recall", 100 * r.weighted_recall},
          {"weighted_f1", 100 * r.weighted_f1},
          {"n", r.total}};
}

struct FineGrainedRow {
  double threshold = 0.0;
  ClassificationReport<FineClass> report;

  double recall(FineClass c) const {
    auto it = report.per_class.find(c);
    return it == report.per_class.end() ? 0.0 : it->second.recall;
  }
};

// SD vs UN by DIV% over gold-divergent pairs, one row per threshold.
inline std::vector<FineGrainedRow> fine_grained_table(const std::vector<FineClass>& gold,
                                                      const std::vector<double>& div_pct,
                                                      const std::vector<double>& thresholds) {
  if (gold.size() != div_pct.size()) throw std::invalid_argument("size mismatch");
  std::vector<FineGrainedRow> rows;
  if (gold.empty()) return rows;
  for (double t : thresholds) {
    if (!(t > 0.0 && t < 100.0)) throw std::invalid_argument("threshold must be in (0, 100)");
    std::vector<FineClass> pred;
    for (double v : div_pct) pred.push_back(v > t ? FineClass::Unrelated : FineClass::SomeMeaningDifference);
    rows.push_back({t, classification_report(gold, pred)});
  }
  return rows;
}

// `laser_scores` (pair id -> score) adds the similarity-threshold baseline.
inline nlohmann::json evaluate_report(const RefresdDataset& d, const PredictionMap& preds,
                                      const EvaluationConfig& cfg = {},
                                      const std::map<std::string, double>* laser_scores = nullptr) {
  const auto pairs = d.included();
  std::vector<SentenceLabel> gold, pred, laser_pred;
  std::vector<SentenceLabel> laser_gold;
  std::map<AggregationMode, std::pair<std::vector<Label>, std::vector<Label>>> tok;
  std::vector<FineClass> fine_gold;
  std::vector<double> fine_pct;
  std::size_t token_pairs = 0;

  for (const auto* ap : pairs) {
    auto it = preds.find(ap->pair.id);
    if (it == preds.end()) throw std::invalid_argument("no prediction for pair " + ap->pair.id);
    const Prediction& pr = it->second;
    const SentenceClass cls = *ap->adjudicated;
    gold.push_back(gold_binary(cls));
    pred.push_back(pr.sentence_label);
    if (laser_scores) {
      auto ls = laser_scores->find(ap->pair.id);
      if (ls != laser_scores->end()) {
        laser_gold.push_back(gold_binary(cls));
        laser_pred.push_back(score_threshold_classify(ls->second, cfg.laser_cutoff));
      }
    }
    if (pr.src_token_labels.size() != ap->pair.src_tokens.size() ||
        pr.tgt_token_labels.size() != ap->pair.tgt_tokens.size()) {
      throw std::invalid_argument("token prediction length mismatch for pair " + ap->pair.id);
    }
    if (!cfg.token_eval_class || *cfg.token_eval_class == cls) {
      ++token_pairs;
      std::vector<SpanSet> ann;
      for (const auto& r : ap->records) ann.push_back(r.spans);
      for (auto mode : {AggregationMode::Union, AggregationMode::PairwiseUnion,
                        AggregationMode::Intersection}) {
        const auto g = aggregate_rationales(ann, ap->pair.src_tokens.size(),
                                            ap->pair.tgt_tokens.size(), mode);
        auto& [gv, pv] = tok[mode];
        gv.insert(gv.end(), g.src.begin(), g.src.end());
        gv.insert(gv.end(), g.tgt.begin(), g.tgt.end());
        pv.insert(pv.end(), pr.src_token_labels.begin(), pr.src_token_labels.end());
        pv.insert(pv.end(), pr.tgt_token_labels.begin(), pr.tgt_token_labels.end());
      }
    }
    if (is_divergent(cls)) {
      fine_gold.push_back(cls == SentenceClass::Unrelated ? FineClass::Unrelated
                                                          : FineClass::SomeMeaningDifference);
      fine_pct.push_back(div_percentage(pr.src_token_labels, pr.tgt_token_labels, cfg.divpct_mode));
    }
  }

  nlohmann::json out;
  out["pairs"] = pairs.size();
  out["excluded"] = d.pairs.size() - pairs.size();
  if (!gold.empty()) out["sentence"]["model"] = report_json(classification_report(gold, pred));
  if (!laser_gold.empty()) {
    out["sentence"]["laser"] = report_json(classification_report(laser_gold, laser_pred));
    out["sentence"]["laser"]["cutoff"] = cfg.laser_cutoff;
  }
  out["token"]["pairs"] = token_pairs;
  out["token"]["gold_class"] =
      cfg.token_eval_class ? nlohmann::json(to_string(*cfg.token_eval_class)) : nlohmann::json("all");
  for (const auto& [mode, gp] : tok) {
    const auto f = token_f1(gp.first, gp.second);
    out["token"][to_string(mode)] = {{"f1_eq", 100 * f.eq}, {"f1_div", 100 * f.div},
                                     {"f1_mul", 100 * f.mul}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : fine_grained_table(fine_gold, fine_pct, cfg.divpct_thresholds)) {
    auto j = report_json(row.report);
    j["threshold"] = row.threshold;
    rows.push_back(std::move(j));
  }
  out["fine_grained"] = {{"mode", cfg.divpct_mode == DivPctMode::Pooled ? "pooled" : "per_side_mean"},
                         {"rows", rows}};
  return out;
}

}  // namespace semdiv

#endif  // SEMDIV_EVALUATION_HPP
