// Desk-scale divergence scorer.
//
// A sentence pair is encoded by mean-pooling trainable unit embeddings on each
// side. The sentence head maps [mean_src; mean_tgt] through one hidden layer
// to a scalar score F(x); p(equivalent) = logistic(F(x)). The token head maps
// [unit embedding; mean of the other side; side flag] through one hidden
// layer to two logits (EQ, DIV) per unit.
//
// Units are words, or WordPiece-style subwords when a subword vocabulary is
// configured; in that case a word is DIV if any of its pieces is DIV.

#ifndef SEMDIV_SCORER_HPP
#define SEMDIV_SCORER_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "semdiv/common.hpp"
#include "semdiv/corpus_io.hpp"
#include "semdiv/synthgen.hpp"

namespace semdiv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation : std::uint8_t { Tanh, Identity };

class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr const char* kUnkToken = "<unk>";

  Vocab() { tokens_.push_back(kUnkToken); index_.emplace(kUnkToken, kUnk); }

  int add(const std::string& tok) {
    auto [it, inserted] = index_.emplace(tok, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(tok);
    return it->second;
  }
  int lookup(const std::string& tok) const {
    auto it = index_.find(tok);
    return it == index_.end() ? kUnk : it->second;
  }
  bool contains(const std::string& tok) const { return index_.count(tok) != 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Greedy longest-match segmentation; non-initial pieces carry "##".
class SubwordSegmenter {
 public:
  SubwordSegmenter() = default;
  explicit SubwordSegmenter(std::vector<std::string> pieces)
      : pieces_(std::move(pieces)), set_(pieces_.begin(), pieces_.end()) {}

  bool empty() const { return pieces_.empty(); }
  const std::vector<std::string>& pieces() const { return pieces_; }

  // A word with no segmentation becomes a single unknown unit.
  std::vector<std::string> segment(const std::string& word) const {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = word.size();
      std::string found;
      while (end > start) {
        std::string piece = word.substr(start, end - start);
        if (start > 0) piece = "##" + piece;
        if (set_.count(piece)) {
          found = std::move(piece);
          break;
        }
        --end;
      }
      if (found.empty()) return {Vocab::kUnkToken};
      out.push_back(std::move(found));
      start = end;
    }
    return out;
  }

  friend bool operator==(const SubwordSegmenter& a, const SubwordSegmenter& b) {
    return a.pieces_ == b.pieces_;
  }

 private:
  std::vector<std::string> pieces_;
  std::unordered_set<std::string> set_;
};

// A word is DIV if at least one of its pieces is DIV.
inline std::vector<Label> merge_subword_labels(std::span<const Label> piece_labels,
                                               std::span<const std::size_t> word_of_piece,
                                               std::size_t word_count) {
  std::vector<Label> out(word_count, Label::Eq);
  for (std::size_t i = 0; i < piece_labels.size(); ++i) {
    if (piece_labels[i] == Label::Div) out[word_of_piece[i]] = Label::Div;
  }
  return out;
}

// All trainable tensors. Also used for gradients and optimizer moments.
struct Tensors {
  MatrixXd embedding;  // V x d
  MatrixXd sent_w1;    // h x 2d
  VectorXd sent_b1;    // h
  VectorXd sent_w2;    // h
  VectorXd sent_b2;    // 1
  MatrixXd tok_w1;     // h x (2d + 1)
  VectorXd tok_b1;     // h
  MatrixXd tok_w2;     // 2 x h
  VectorXd tok_b2;     // 2

  static constexpr std::size_t kBlocks = 9;
  static constexpr const char* kNames[kBlocks] = {"embedding", "sent_w1", "sent_b1",
                                                  "sent_w2",   "sent_b2", "tok_w1",
                                                  "tok_b1",    "tok_w2",  "tok_b2"};

  static Tensors zeros(std::size_t vocab, int d, int h) {
    Tensors t;
    t.embedding = MatrixXd::Zero(static_cast<Eigen::Index>(vocab), d);
    t.sent_w1 = MatrixXd::Zero(h, 2 * d);
    t.sent_b1 = VectorXd::Zero(h);
    t.sent_w2 = VectorXd::Zero(h);
    t.sent_b2 = VectorXd::Zero(1);
    t.tok_w1 = MatrixXd::Zero(h, 2 * d + 1);
    t.tok_b1 = VectorXd::Zero(h);
    t.tok_w2 = MatrixXd::Zero(2, h);
    t.tok_b2 = VectorXd::Zero(2);
    return t;
  }

  static Tensors zeros_like(const Tensors& o) {
    return zeros(static_cast<std::size_t>(o.embedding.rows()),
                 static_cast<int>(o.embedding.cols()), static_cast<int>(o.sent_b1.size()));
  }

  // Column-major storage of block i as a flat view.
  Eigen::Map<VectorXd> block(std::size_t i) {
    switch (i) {
      case 0: return {embedding.data(), embedding.size()};
      case 1: return {sent_w1.data(), sent_w1.size()};
      case 2: return {sent_b1.data(), sent_b1.size()};
      case 3: return {sent_w2.data(), sent_w2.size()};
      case 4: return {sent_b2.data(), sent_b2.size()};
      case 5: return {tok_w1.data(), tok_w1.size()};
      case 6: return {tok_b1.data(), tok_b1.size()};
      case 7: return {tok_w2.data(), tok_w2.size()};
      default: return {tok_b2.data(), tok_b2.size()};
    }
  }
  Eigen::Map<const VectorXd> block(std::size_t i) const {
    auto* self = const_cast<Tensors*>(this);
    auto m = self->block(i);
    return {m.data(), m.size()};
  }

  void set_zero() {
    for (std::size_t i = 0; i < kBlocks; ++i) block(i).setZero();
  }
  bool all_finite() const {
    for (std::size_t i = 0; i < kBlocks; ++i) {
      if (!block(i).allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const Tensors& a, const Tensors& b) {
    for (std::size_t i = 0; i < kBlocks; ++i) {
      if (a.block(i).size() != b.block(i).size() || a.block(i) != b.block(i)) return false;
    }
    return true;
  }
};

struct ScorerParams {
  Vocab vocab;
  SubwordSegmenter subwords;  // empty: units are words
  int dim = 64;
  int hidden = 128;
  Activation activation = Activation::Tanh;
  Tensors w;

  friend bool operator==(const ScorerParams& a, const ScorerParams& b) {
    return a.vocab == b.vocab && a.subwords == b.subwords && a.dim == b.dim &&
           a.hidden == b.hidden && a.activation == b.activation && a.w == b.w;
  }
};

// Scaled-uniform (Glorot) weights, unit-variance uniform embeddings,
// zero biases.
inline ScorerParams init_params(Vocab vocab, int dim, int hidden, std::uint64_t rng_seed,
                                Activation act = Activation::Tanh,
                                SubwordSegmenter subwords = {}) {
  ScorerParams p;
  p.vocab = std::move(vocab);
  p.subwords = std::move(subwords);
  p.dim = dim;
  p.hidden = hidden;
  p.activation = act;
  p.w = Tensors::zeros(p.vocab.size(), dim, hidden);
  auto rng = util::derive_rng(rng_seed, "init");
  auto fill = [&](auto& m, double scale) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = scale * (2.0 * util::uniform_real(rng) - 1.0);
    }
  };
  fill(p.w.embedding, std::sqrt(3.0));
  fill(p.w.sent_w1, std::sqrt(6.0 / (2.0 * dim + hidden)));
  fill(p.w.sent_w2, std::sqrt(6.0 / (hidden + 1.0)));
  fill(p.w.tok_w1, std::sqrt(6.0 / (2.0 * dim + 1.0 + hidden)));
  fill(p.w.tok_w2, std::sqrt(6.0 / (hidden + 2.0)));
  return p;
}

// Collects every unit seen in the given token lists.
inline Vocab build_vocab(const std::vector<const std::vector<std::string>*>& sentences,
                         const SubwordSegmenter& subwords = {}) {
  Vocab v;
  if (!subwords.empty()) {
    for (const auto& piece : subwords.pieces()) v.add(piece);
    return v;
  }
  for (const auto* s : sentences) {
    for (const auto& t : *s) v.add(t);
  }
  return v;
}

// A pair mapped to unit ids, with per-unit word indices for label merging.
struct EncodedPair {
  std::vector<int> ids[2];
  std::vector<std::size_t> word_of_unit[2];
  std::size_t word_count[2] = {0, 0};

  std::size_t units() const { return ids[0].size() + ids[1].size(); }
};

inline EncodedPair encode(const ScorerParams& p, const SentencePair& pair) {
  EncodedPair e;
  for (int s = 0; s < 2; ++s) {
    const auto& toks = pair.tokens(static_cast<Side>(s));
    e.word_count[s] = toks.size();
    for (std::size_t w = 0; w < toks.size(); ++w) {
      if (p.subwords.empty()) {
        e.ids[s].push_back(p.vocab.lookup(toks[w]));
        e.word_of_unit[s].push_back(w);
      } else {
        for (const auto& piece : p.subwords.segment(toks[w])) {
          e.ids[s].push_back(p.vocab.lookup(piece));
          e.word_of_unit[s].push_back(w);
        }
      }
    }
  }
  return e;
}

// Word labels expanded to unit labels (every piece inherits its word's label).
inline std::vector<Label> unit_labels(const EncodedPair& e, const std::vector<Label>& src,
                                      const std::vector<Label>& tgt) {
  std::vector<Label> out;
  out.reserve(e.units());
  for (std::size_t w : e.word_of_unit[0]) out.push_back(src.at(w));
  for (std::size_t w : e.word_of_unit[1]) out.push_back(tgt.at(w));
  return out;
}

// Intermediate values kept for the backward pass.
struct ForwardCache {
  const EncodedPair* enc = nullptr;
  VectorXd mean[2];
  VectorXd pooled;       // [mean_src; mean_tgt]
  VectorXd sent_pre;     // h
  VectorXd sent_hidden;  // h
  double score = 0.0;
  bool with_tokens = false;
  MatrixXd tok_in;       // (2d + 1) x units
  MatrixXd tok_pre;      // h x units
  MatrixXd tok_hidden;   // h x units
  MatrixXd logits;       // 2 x units; row 0 = EQ, row 1 = DIV
};

namespace detail {

inline void activate(Activation a, const MatrixXd& pre, MatrixXd& out) {
  out = a == Activation::Tanh ? MatrixXd(pre.array().tanh()) : pre;
}
inline void activate(Activation a, const VectorXd& pre, VectorXd& out) {
  out = a == Activation::Tanh ? VectorXd(pre.array().tanh()) : pre;
}

// d act / d pre expressed through the activation output.
template <class M>
M activation_grad(Activation a, const M& out) {
  if (a == Activation::Identity) return M::Ones(out.rows(), out.cols());
  return (1.0 - out.array().square()).matrix();
}

}  // namespace detail

inline void forward(const ScorerParams& p, const EncodedPair& e, ForwardCache& c,
                    bool with_tokens = true) {
  if (e.ids[0].empty() || e.ids[1].empty()) {
    throw std::invalid_argument("cannot score a pair with an empty side");
  }
  const auto& W = p.w;
  const int d = p.dim;
  c.enc = &e;
  for (int s = 0; s < 2; ++s) {
    c.mean[s] = VectorXd::Zero(d);
    for (int id : e.ids[s]) c.mean[s] += W.embedding.row(id).transpose();
    c.mean[s] /= static_cast<double>(e.ids[s].size());
  }
  c.pooled.resize(2 * d);
  c.pooled << c.mean[0], c.mean[1];
  c.sent_pre = W.sent_w1 * c.pooled + W.sent_b1;
  detail::activate(p.activation, c.sent_pre, c.sent_hidden);
  c.score = W.sent_w2.dot(c.sent_hidden) + W.sent_b2(0);

  c.with_tokens = with_tokens;
  if (!with_tokens) return;
  const auto n = static_cast<Eigen::Index>(e.units());
  c.tok_in.resize(2 * d + 1, n);
  Eigen::Index col = 0;
  for (int s = 0; s < 2; ++s) {
    for (int id : e.ids[s]) {
      c.tok_in.block(0, col, d, 1) = W.embedding.row(id).transpose();
      c.tok_in.block(d, col, d, 1) = c.mean[1 - s];
      c.tok_in(2 * d, col) = static_cast<double>(s);
      ++col;
    }
  }
  c.tok_pre = (W.tok_w1 * c.tok_in).colwise() + W.tok_b1;
  detail::activate(p.activation, c.tok_pre, c.tok_hidden);
  c.logits = (W.tok_w2 * c.tok_hidden).colwise() + W.tok_b2;
}

// Accumulates into `g` the gradient of a loss whose partials are d_score
// (w.r.t. F) and d_logits (2 x units, may be empty when tokens were skipped).
inline void backward(const ScorerParams& p, const ForwardCache& c, double d_score,
                     const MatrixXd* d_logits, Tensors& g) {
  const auto& W = p.w;
  const int d = p.dim;
  const EncodedPair& e = *c.enc;
  VectorXd d_mean[2] = {VectorXd::Zero(d), VectorXd::Zero(d)};

  if (d_score != 0.0) {
    g.sent_w2 += d_score * c.sent_hidden;
    g.sent_b2(0) += d_score;
    const VectorXd d_pre =
        (d_score * W.sent_w2).cwiseProduct(detail::activation_grad(p.activation, c.sent_hidden));
    g.sent_w1.noalias() += d_pre * c.pooled.transpose();
    g.sent_b1 += d_pre;
    const VectorXd d_pooled = W.sent_w1.transpose() * d_pre;
    d_mean[0] += d_pooled.head(d);
    d_mean[1] += d_pooled.tail(d);
  }

  if (d_logits && d_logits->size() > 0) {
    if (!c.with_tokens) throw std::logic_error("token gradient without token forward pass");
    const MatrixXd& dz = *d_logits;
    g.tok_w2.noalias() += dz * c.tok_hidden.transpose();
    g.tok_b2 += dz.rowwise().sum();
    const MatrixXd d_pre = (W.tok_w2.transpose() * dz)
                               .cwiseProduct(detail::activation_grad(p.activation, c.tok_hidden));
    g.tok_w1.noalias() += d_pre * c.tok_in.transpose();
    g.tok_b1 += d_pre.rowwise().sum();
    const MatrixXd d_in = W.tok_w1.transpose() * d_pre;
    Eigen::Index col = 0;
    for (int s = 0; s < 2; ++s) {
      for (int id : e.ids[s]) {
        g.embedding.row(id) += d_in.block(0, col, d, 1).transpose();
        d_mean[1 - s] += d_in.block(d, col, d, 1);
        ++col;
      }
    }
  }

  for (int s = 0; s < 2; ++s) {
    const double inv = 1.0 / static_cast<double>(e.ids[s].size());
    for (int id : e.ids[s]) g.embedding.row(id) += inv * d_mean[s].transpose();
  }
}

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------
// Losses

// Hinge on the score difference: max(0, margin - F(x) + F(y)).
inline double margin_loss(double score_x, double score_y, double margin) {
  return std::max(0.0, margin - score_x + score_y);
}

// Mean over a batch.
inline double margin_loss(std::span<const double> scores_x, std::span<const double> scores_y,
                          double margin) {
  if (scores_x.size() != scores_y.size()) throw std::invalid_argument("batch size mismatch");
  if (scores_x.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < scores_x.size(); ++i) {
    total += margin_loss(scores_x[i], scores_y[i], margin);
  }
  return total / static_cast<double>(scores_x.size());
}

// Binary cross-entropy of logistic(score) against `equivalent`.
inline double ce_loss(double score, bool equivalent) {
  return equivalent ? softplus(-score) : softplus(score);
}

// Mean token cross-entropy of softmax(logits) against labels, and its
// gradient w.r.t. the logits (scaled by `scale`) when d_logits is non-null.
inline double token_ce(const MatrixXd& logits, std::span<const Label> labels, double scale,
                       MatrixXd* d_logits) {
  const auto n = logits.cols();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("token label count differs from token count");
  }
  if (d_logits) d_logits->setZero(2, n);
  double total = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double a = logits(0, t), b = logits(1, t);
    const double mx = std::max(a, b);
    const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
    const int y = labels[static_cast<std::size_t>(t)] == Label::Div ? 1 : 0;
    total += lse - logits(y, t);
    if (d_logits) {
      const double pa = std::exp(a - lse), pb = std::exp(b - lse);
      (*d_logits)(0, t) = scale * (pa - (y == 0 ? 1.0 : 0.0)) / static_cast<double>(n);
      (*d_logits)(1, t) = scale * (pb - (y == 1 ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  return total / static_cast<double>(n);
}

enum class Objective : std::uint8_t { CeRandom, CeContrastive, Margin, MultiTask };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::CeRandom: return "ce-random";
    case Objective::CeContrastive: return "ce-contrastive";
    case Objective::Margin: return "margin";
    case Objective::MultiTask: return "multitask";
  }
  return "?";
}

inline Objective objective_from_string(std::string_view s) {
  for (auto o : {Objective::CeRandom, Objective::CeContrastive, Objective::Margin,
                 Objective::MultiTask}) {
    if (s == to_string(o)) return o;
  }
  throw std::invalid_argument("unknown objective: " + std::string(s));
}

inline bool is_contrastive(Objective o) {
  return o == Objective::Margin || o == Objective::MultiTask;
}

// A contrastive item, pre-encoded.
struct EncodedItem {
  EncodedPair x, y;
  std::vector<Label> z;  // unit labels of y
};

inline EncodedItem encode(const ScorerParams& p, const ContrastiveItem& it) {
  EncodedItem e{encode(p, it.x.pair), encode(p, it.y.pair), {}};
  e.z = unit_labels(e.y, it.y.src_labels, it.y.tgt_labels);
  return e;
}

struct LossParts {
  double margin = 0.0;
  double token = 0.0;
  double total = 0.0;
};

// Margin term plus `token_weight` times the mean token cross-entropy on y.
// When `g` is non-null the gradient (times `grad_scale`) is accumulated.
inline LossParts multitask_loss(const ScorerParams& p, const EncodedItem& it, double margin,
                                double token_weight = 1.0, Tensors* g = nullptr,
                                double grad_scale = 1.0) {
  if (it.z.size() != it.y.units()) {
    throw std::invalid_argument("token labels do not match y");
  }
  ForwardCache cx, cy;
  forward(p, it.x, cx, false);
  forward(p, it.y, cy, true);
  LossParts out;
  const double slack = margin - cx.score + cy.score;
  out.margin = std::max(0.0, slack);
  MatrixXd dz;
  out.token = token_ce(cy.logits, it.z, grad_scale * token_weight, g ? &dz : nullptr);
  out.total = out.margin + token_weight * out.token;
  if (g) {
    const double dm = slack > 0 ? grad_scale : 0.0;
    backward(p, cx, -dm, nullptr, *g);
    backward(p, cy, dm, &dz, *g);
  }
  return out;
}

inline double margin_item_loss(const ScorerParams& p, const EncodedItem& it, double margin,
                               Tensors* g = nullptr, double grad_scale = 1.0) {
  ForwardCache cx, cy;
  forward(p, it.x, cx, false);
  forward(p, it.y, cy, false);
  const double slack = margin - cx.score + cy.score;
  if (g && slack > 0) {
    backward(p, cx, -grad_scale, nullptr, *g);
    backward(p, cy, grad_scale, nullptr, *g);
  }
  return std::max(0.0, slack);
}

inline double ce_example_loss(const ScorerParams& p, const EncodedPair& e, bool equivalent,
                              Tensors* g = nullptr, double grad_scale = 1.0) {
  ForwardCache c;
  forward(p, e, c, false);
  if (g) {
    // d/dF of softplus(-F) is -(1 - s); of softplus(F) is s.
    const double s = logistic(c.score);
    backward(p, c, grad_scale * (equivalent ? s - 1.0 : s), nullptr, *g);
  }
  return ce_loss(c.score, equivalent);
}

// ---------------------------------------------------------------------------
// Inference

struct Prediction {
  double score = 0.0;
  double p_equivalent = 0.5;
  SentenceLabel sentence_label = SentenceLabel::Divergent;
  std::vector<Label> src_token_labels;
  std::vector<Label> tgt_token_labels;
};

inline double score(const ScorerParams& p, const SentencePair& pair) {
  const auto e = encode(p, pair);
  ForwardCache c;
  forward(p, e, c, false);
  return c.score;
}

// Equivalent iff p_equivalent > threshold. Units whose DIV logit is strictly
// larger are DIV; words take DIV if any of their units is DIV.
inline Prediction predict(const ScorerParams& p, const SentencePair& pair,
                          double threshold = 0.5) {
  const auto e = encode(p, pair);
  ForwardCache c;
  forward(p, e, c, true);
  Prediction out;
  out.score = c.score;
  out.p_equivalent = logistic(c.score);
  out.sentence_label =
      out.p_equivalent > threshold ? SentenceLabel::Equivalent : SentenceLabel::Divergent;
  Eigen::Index col = 0;
  for (int s = 0; s < 2; ++s) {
    std::vector<Label> units;
    for (std::size_t i = 0; i < e.ids[s].size(); ++i, ++col) {
      units.push_back(c.logits(1, col) > c.logits(0, col) ? Label::Div : Label::Eq);
    }
    auto words = merge_subword_labels(units, e.word_of_unit[s], e.word_count[s]);
    (s == 0 ? out.src_token_labels : out.tgt_token_labels) = std::move(words);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json to_json(const ScorerParams& p) {
  nlohmann::json tensors = nlohmann::json::object();
  for (std::size_t i = 0; i < Tensors::kBlocks; ++i) {
    auto b = p.w.block(i);
    tensors[Tensors::kNames[i]] = std::vector<double>(b.data(), b.data() + b.size());
  }
  return {{"format", "semdiv-scorer"},
          {"version", kCheckpointVersion},
          {"dim", p.dim},
          {"hidden", p.hidden},
          {"activation", p.activation == Activation::Tanh ? "tanh" : "identity"},
          {"vocab", p.vocab.tokens()},
          {"subwords", p.subwords.pieces()},
          {"tensors", tensors}};
}

inline ScorerParams scorer_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "semdiv-scorer") throw ParseError("not a semdiv-scorer checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + j.at("version").dump());
  }
  ScorerParams p;
  p.dim = j.at("dim").get<int>();
  p.hidden = j.at("hidden").get<int>();
  const auto act = j.at("activation").get<std::string>();
  if (act != "tanh" && act != "identity") throw ParseError("unknown activation " + act);
  p.activation = act == "tanh" ? Activation::Tanh : Activation::Identity;
  const auto toks = j.at("vocab").get<std::vector<std::string>>();
  if (toks.empty() || toks[0] != Vocab::kUnkToken) throw ParseError("vocab must start with <unk>");
  for (const auto& t : toks) p.vocab.add(t);
  if (p.vocab.size() != toks.size()) throw ParseError("duplicate vocab entries");
  p.subwords = SubwordSegmenter(j.at("subwords").get<std::vector<std::string>>());
  p.w = Tensors::zeros(p.vocab.size(), p.dim, p.hidden);
  const auto& tj = j.at("tensors");
  for (std::size_t i = 0; i < Tensors::kBlocks; ++i) {
    const auto v = tj.at(Tensors::kNames[i]).get<std::vector<double>>();
    auto b = p.w.block(i);
    if (static_cast<Eigen::Index>(v.size()) != b.size()) {
      throw ParseError(std::string("tensor ") + Tensors::kNames[i] + " has wrong size");
    }
    std::copy(v.begin(), v.end(), b.data());
  }
  if (!p.w.all_finite()) throw ParseError("checkpoint contains non-finite parameters");
  return p;
}

inline void save_scorer(std::ostream& out, const ScorerParams& p) { out << to_json(p).dump() << '\n'; }

inline ScorerParams load_scorer(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint: ") + e.what());
  }
  return scorer_from_json(j);
}

}  // namespace semdiv

#endif  // SEMDIV_SCORER_HPP
