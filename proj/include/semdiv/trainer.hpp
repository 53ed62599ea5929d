// Training loop, calibration, margin search and gradient checking for the
// divergence scorer.

#ifndef SEMDIV_TRAINER_HPP
#define SEMDIV_TRAINER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semdiv/metrics.hpp"
#include "semdiv/scorer.hpp"
#include "semdiv/synthgen.hpp"

namespace semdiv {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const Tensors& like, AdamConfig cfg)
      : cfg_(cfg), m_(Tensors::zeros_like(like)), v_(Tensors::zeros_like(like)) {}

  void step(Tensors& w, const Tensors& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t b = 0; b < Tensors::kBlocks; ++b) {
      auto wb = w.block(b);
      auto gb = g.block(b);
      auto mb = m_.block(b);
      auto vb = v_.block(b);
      mb = cfg_.beta1 * mb + (1.0 - cfg_.beta1) * gb;
      vb = cfg_.beta2 * vb + (1.0 - cfg_.beta2) * gb.cwiseProduct(gb);
      wb.array() -= cfg_.lr * (mb.array() / c1) / ((vb.array() / c2).sqrt() + cfg_.eps);
    }
  }

  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Tensors m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  Objective objective = Objective::MultiTask;
  double margin = 5.0;
  double token_weight = 1.0;
  AdamConfig adam;
  int max_epochs = 5;
  int patience = 5;            // epochs without dev improvement before stopping
  std::size_t batch_size = 0;  // 0: 16 items for contrastive objectives, 32 examples otherwise
  std::uint64_t rng_seed = 0;
  int dim = 64;
  int hidden = 128;
  Activation activation = Activation::Tanh;
  bool calibrate = true;  // margin objectives only
  std::ostream* log = nullptr;  // JSONL, one line per epoch

  std::size_t effective_batch() const {
    if (batch_size) return batch_size;
    return objective == Objective::CeRandom ? 32 : 16;
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  double wallclock_s = 0.0;
};

inline nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", r.train_loss},
          {"dev_metric", r.dev_metric},
          {"wallclock_s", r.wallclock_s}};
}

struct TrainResult {
  ScorerParams params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::string dev_metric_name;
  double calibration_bias = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A labeled sentence pair for the CE objectives.
struct LabeledPair {
  SentencePair pair;
  bool equivalent = false;
};

// Distinct samples (by id) across items, in first-seen order.
inline std::vector<LabeledPair> unique_samples(const std::vector<ContrastiveItem>& items) {
  std::vector<LabeledPair> out;
  std::set<std::string> seen;
  for (const auto& it : items) {
    for (const Sample* s : {&it.x, &it.y}) {
      if (seen.insert(s->pair.id).second) out.push_back({s->pair, s->is_equivalent()});
    }
  }
  return out;
}

inline Vocab vocab_from_items(const std::vector<ContrastiveItem>& items) {
  Vocab v;
  for (const auto& it : items) {
    for (const Sample* s : {&it.x, &it.y}) {
      for (const auto& t : s->pair.src_tokens) v.add(t);
      for (const auto& t : s->pair.tgt_tokens) v.add(t);
    }
  }
  return v;
}

// Fraction of items with F(x) > F(y). With `equivalent_only`, only items
// whose higher member is the seed equivalent count.
inline double ranking_accuracy(const ScorerParams& p, const std::vector<ContrastiveItem>& items,
                               bool equivalent_only = false) {
  std::size_t ok = 0, n = 0;
  for (const auto& it : items) {
    if (equivalent_only && !it.x.is_equivalent()) continue;
    ++n;
    ok += score(p, it.x.pair) > score(p, it.y.pair);
  }
  return n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
}

inline double weighted_f1(const ScorerParams& p, const std::vector<LabeledPair>& data,
                          double threshold = 0.5) {
  if (data.empty()) return 0.0;
  std::vector<SentenceLabel> gold, pred;
  for (const auto& d : data) {
    gold.push_back(d.equivalent ? SentenceLabel::Equivalent : SentenceLabel::Divergent);
    pred.push_back(logistic(score(p, d.pair)) > threshold ? SentenceLabel::Equivalent
                                                          : SentenceLabel::Divergent);
  }
  return classification_report(gold, pred).weighted_f1;
}

// Logistic bias c minimizing the mean CE of logistic(F + c). The gradient in
// c is monotone, so bisection finds it. Returns 0 when only one class occurs.
inline double fit_logistic_bias(const std::vector<double>& scores, const std::vector<bool>& equivalent) {
  if (scores.size() != equivalent.size()) throw std::invalid_argument("size mismatch");
  const auto pos = std::count(equivalent.begin(), equivalent.end(), true);
  if (pos == 0 || pos == static_cast<long>(equivalent.size())) return 0.0;
  auto grad = [&](double c) {
    double g = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      g += logistic(scores[i] + c) - (equivalent[i] ? 1.0 : 0.0);
    }
    return g;
  };
  double lo = -1.0, hi = 1.0;
  while (grad(lo) > 0) lo *= 2;
  while (grad(hi) < 0) hi *= 2;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (grad(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Shifts the sentence-head output bias so that thresholding logistic(F) at
// 0.5 is calibrated on `dev`. Margin losses are unchanged by the shift.
inline double calibrate(ScorerParams& p, const std::vector<LabeledPair>& dev) {
  std::vector<double> s;
  std::vector<bool> y;
  for (const auto& d : dev) {
    s.push_back(score(p, d.pair));
    y.push_back(d.equivalent);
  }
  const double c = fit_logistic_bias(s, y);
  p.w.sent_b2(0) += c;
  return c;
}

namespace detail {

struct EncodedLabeled {
  EncodedPair pair;
  bool equivalent;
};

}  // namespace detail

// Minibatch Adam over the objective's view of `train`; keeps the parameters
// of the best dev epoch. Dev selection uses ranking accuracy for margin
// objectives and weighted F1 for CE objectives.
inline TrainResult train(const std::vector<ContrastiveItem>& train_items,
                         const std::vector<ContrastiveItem>& dev_items, const TrainConfig& cfg,
                         std::optional<ScorerParams> init = std::nullopt) {
  if (train_items.empty()) throw std::invalid_argument("empty training set");
  if (cfg.max_epochs < 1) throw std::invalid_argument("max_epochs must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult res;
  ScorerParams p = init ? std::move(*init)
                        : init_params(vocab_from_items(train_items), cfg.dim, cfg.hidden,
                                      cfg.rng_seed, cfg.activation);
  const bool contrastive = is_contrastive(cfg.objective);
  res.dev_metric_name = contrastive ? "ranking_accuracy" : "weighted_f1";

  // Training units: items for margin objectives and CE_contrastive (both
  // members go in the same batch); unique samples for CE_random.
  std::vector<EncodedItem> items;
  std::vector<detail::EncodedLabeled> singles;
  if (cfg.objective == Objective::CeRandom) {
    for (auto& s : unique_samples(train_items)) {
      singles.push_back({encode(p, s.pair), s.equivalent});
    }
  } else {
    for (const auto& it : train_items) items.push_back(encode(p, it));
  }
  const auto dev_samples = unique_samples(dev_items);
  auto dev_metric = [&](const ScorerParams& q) {
    if (contrastive) return ranking_accuracy(q, dev_items);
    return weighted_f1(q, dev_samples);
  };

  std::vector<const ContrastiveItem*> src_items;
  for (const auto& it : train_items) src_items.push_back(&it);

  Adam opt(p.w, cfg.adam);
  Tensors grad = Tensors::zeros_like(p.w);
  const std::size_t units = cfg.objective == Objective::CeRandom ? singles.size() : items.size();
  std::vector<std::size_t> order(units);
  const std::size_t bs = cfg.effective_batch();

  double best = -std::numeric_limits<double>::infinity();
  ScorerParams best_params = p;
  int since_best = 0;
  auto rng = util::derive_rng(cfg.rng_seed, "train-order");
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < units; ++i) order[i] = i;
    util::shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t epoch_n = 0;
    for (std::size_t start = 0; start < units; start += bs) {
      const std::size_t end = std::min(units, start + bs);
      grad.set_zero();
      double batch_loss = 0.0;
      std::size_t batch_n = 0;
      if (cfg.objective == Objective::CeRandom) {
        const double scale = 1.0 / static_cast<double>(end - start);
        for (std::size_t k = start; k < end; ++k) {
          const auto& s = singles[order[k]];
          batch_loss += ce_example_loss(p, s.pair, s.equivalent, &grad, scale);
        }
        batch_n = end - start;
      } else if (cfg.objective == Objective::CeContrastive) {
        const double scale = 1.0 / static_cast<double>(2 * (end - start));
        for (std::size_t k = start; k < end; ++k) {
          const auto& it = items[order[k]];
          const auto* src = src_items[order[k]];
          batch_loss += ce_example_loss(p, it.x, src->x.is_equivalent(), &grad, scale);
          batch_loss += ce_example_loss(p, it.y, src->y.is_equivalent(), &grad, scale);
        }
        batch_n = 2 * (end - start);
      } else {
        const double scale = 1.0 / static_cast<double>(end - start);
        for (std::size_t k = start; k < end; ++k) {
          const auto& it = items[order[k]];
          batch_loss += cfg.objective == Objective::Margin
                            ? margin_item_loss(p, it, cfg.margin, &grad, scale)
                            : multitask_loss(p, it, cfg.margin, cfg.token_weight, &grad, scale).total;
        }
        batch_n = end - start;
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch starting at " << start;
        throw NonFiniteLoss(msg.str());
      }
      opt.step(p.w, grad);
      epoch_loss += batch_loss;
      epoch_n += batch_n;
    }
    if (!p.w.all_finite()) {
      throw NonFiniteLoss("parameters became non-finite at epoch " + std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_n));
    rec.dev_metric = dev_items.empty() ? -rec.train_loss : dev_metric(p);
    rec.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.push_back(rec);
    if (cfg.log) *cfg.log << to_json(rec).dump() << '\n' << std::flush;
    if (rec.dev_metric > best) {
      best = rec.dev_metric;
      best_params = p;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  res.params = std::move(best_params);
  if (contrastive && cfg.calibrate && !dev_samples.empty()) {
    res.calibration_bias = calibrate(res.params, dev_samples);
  }
  return res;
}

struct MarginSearchResult {
  double best_margin = 0.0;
  double best_f1 = -1.0;
  std::map<double, double> f1_by_margin;
  TrainResult best;
};

// Trains one calibrated model per margin and keeps the best dev weighted F1.
inline MarginSearchResult grid_search_margin(const std::vector<ContrastiveItem>& train_items,
                                             const std::vector<ContrastiveItem>& dev_items,
                                             TrainConfig cfg,
                                             const std::vector<double>& margins = {3, 4, 5, 6, 7, 8}) {
  if (!is_contrastive(cfg.objective)) {
    throw std::invalid_argument("margin search needs a margin objective");
  }
  const auto dev_samples = unique_samples(dev_items);
  MarginSearchResult out;
  for (double m : margins) {
    cfg.margin = m;
    auto r = train(train_items, dev_items, cfg);
    const double f1 = weighted_f1(r.params, dev_samples);
    out.f1_by_margin[m] = f1;
    if (f1 > out.best_f1) {
      out.best_f1 = f1;
      out.best_margin = m;
      out.best = std::move(r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_block;
  Eigen::Index worst_index = 0;
  std::size_t coordinates = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
// whose true gradient is ~0 (the output bias cancels in the margin term, for
// one) from turning finite-difference roundoff into a large relative error.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckOptions {
  double margin = 5.0;
  double token_weight = 1.0;
  std::size_t coords = 100;
  double floor = 1e-5;
  std::uint64_t rng_seed = 0;
  std::function<void(Tensors&)> corrupt;  // applied to the analytic gradient
};

// Compares the analytic gradient of the multitask loss on one item with
// central differences over `coords` coordinates, spread round-robin across
// parameter blocks (embedding rows restricted to units in the item).
inline GradCheckResult grad_check(const ScorerParams& params, const EncodedItem& item, double eps,
                                  const GradCheckOptions& opt = {}) {
  if (!(eps >= 1e-6 && eps <= 1e-4)) throw std::invalid_argument("eps must be in [1e-6, 1e-4]");
  ScorerParams p = params;
  Tensors g = Tensors::zeros_like(p.w);
  multitask_loss(p, item, opt.margin, opt.token_weight, &g);
  if (opt.corrupt) opt.corrupt(g);
  auto loss = [&] { return multitask_loss(p, item, opt.margin, opt.token_weight).total; };

  std::vector<std::vector<Eigen::Index>> pool(Tensors::kBlocks);
  std::set<int> rows;
  for (const EncodedPair* e : {&item.x, &item.y}) {
    for (int s = 0; s < 2; ++s) rows.insert(e->ids[s].begin(), e->ids[s].end());
  }
  const Eigen::Index vocab_rows = p.w.embedding.rows();
  for (int r : rows) {
    for (Eigen::Index c = 0; c < p.w.embedding.cols(); ++c) {
      pool[0].push_back(c * vocab_rows + r);  // column-major
    }
  }
  for (std::size_t b = 1; b < Tensors::kBlocks; ++b) {
    for (Eigen::Index i = 0; i < p.w.block(b).size(); ++i) pool[b].push_back(i);
  }
  auto rng = util::derive_rng(opt.rng_seed, "grad-check");
  for (auto& v : pool) util::shuffle(v, rng);

  GradCheckResult out;
  std::vector<std::size_t> cursor(Tensors::kBlocks, 0);
  bool progress = true;
  while (out.coordinates < opt.coords && progress) {
    progress = false;
    for (std::size_t b = 0; b < Tensors::kBlocks && out.coordinates < opt.coords; ++b) {
      if (cursor[b] >= pool[b].size()) continue;
      progress = true;
      const Eigen::Index i = pool[b][cursor[b]++];
      auto wb = p.w.block(b);
      const double orig = wb(i);
      wb(i) = orig + eps;
      const double lp = loss();
      wb(i) = orig - eps;
      const double lm = loss();
      wb(i) = orig;
      const double err = relative_error(g.block(b)(i), (lp - lm) / (2 * eps), opt.floor);
      ++out.coordinates;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst_block = Tensors::kNames[b];
        out.worst_index = i;
      }
    }
  }
  return out;
}

}  // namespace semdiv

#endif  // SEMDIV_TRAINER_HPP
