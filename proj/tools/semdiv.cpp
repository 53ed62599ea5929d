// semdiv: command-line driver for the divergence pipeline.
//
//   toy       write a synthetic bitext with parses, alignments and lexicon
//   filter    clean a bitext; optionally select seed equivalents by score
//   generate  build contrastive items (JSONL) from seeds
//   train     fit a scorer on contrastive items
//   evaluate  score a model on an annotated dataset or synthetic items
//   iaa       inter-annotator agreement of an annotated dataset
//   stats     class counts of an annotated dataset
//   import-brat  convert brat annotation folders to the dataset JSONL
//   serve     host annotation sessions over HTTP
//
// Every subcommand reads `--config FILE` (INI/TOML, one [section] per
// subcommand) and prints a JSON summary on stdout.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semdiv/annotation_service.hpp"
#include "semdiv/corpus_io.hpp"
#include "semdiv/evaluation.hpp"
#include "semdiv/plot.hpp"
#include "semdiv/refresd.hpp"
#include "semdiv/scorer.hpp"
#include "semdiv/synthgen.hpp"
#include "semdiv/toy_bitext.hpp"
#include "semdiv/trainer.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semdiv;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

// Adds the file path to ParseErrors so messages point at the input.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<SentencePair> load_bitext(const std::string& path) {
  auto in = open_in(path);
  return with_path(path, [&] { return read_bitext_tsv(in); });
}

RefresdDataset load_dataset(const std::string& path) {
  return with_path(path, [&] { return load_refresd(fs::path(path)); });
}

std::vector<ContrastiveItem> load_items(const std::string& path) {
  auto in = open_in(path);
  return with_path(path, [&] { return read_contrastive_jsonl(in); });
}

// ---------------------------------------------------------------------------

struct ToyOpts {
  std::size_t pairs = 5500;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_toy(const ToyOpts& o) {
  const auto c = toy::make_toy_corpus(o.pairs, o.seed);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::vector<SentencePair> pairs;
  for (const auto& s : c.seeds) pairs.push_back(s.pair);
  {
    auto f = open_out((dir / "bitext.tsv").string());
    write_bitext_tsv(f, pairs);
  }
  open_out((dir / "src.conllu").string()) << serialize_conllu(c.src_conllu);
  open_out((dir / "tgt.conllu").string()) << serialize_conllu(c.tgt_conllu);
  {
    auto f = open_out((dir / "align.txt").string());
    for (const auto& s : c.seeds) f << to_pharaoh(s.alignment) << '\n';
  }
  {
    auto f = open_out((dir / "scores.tsv").string());
    for (const auto& s : c.scores) f << s.pair_id << '\t' << s.score << '\n';
  }
  {
    auto f = open_out((dir / "lexicon.tsv").string());
    c.lexicon.write_tsv(f);
  }
  print({{"pairs", pairs.size()},
         {"out_dir", dir.string()},
         {"files", {"bitext.tsv", "src.conllu", "tgt.conllu", "align.txt", "scores.tsv", "lexicon.tsv"}}});
  return 0;
}

// ---------------------------------------------------------------------------

struct FilterOpts {
  std::string bitext, src, tgt;
  bool normalize = false;
  FilterConfig cfg;
  std::string out, rejected;
  std::string scores;
  std::size_t top_k = 0, dev_size = 0;
  std::uint64_t split_seed = 0;
  std::string train_out, dev_out;
};

int run_filter(const FilterOpts& o) {
  std::vector<SentencePair> pairs;
  if (!o.bitext.empty()) {
    pairs = load_bitext(o.bitext);
  } else {
    if (o.src.empty() || o.tgt.empty()) throw std::invalid_argument("need --bitext or both --src and --tgt");
    auto a = open_in(o.src);
    auto b = open_in(o.tgt);
    pairs = with_path(o.src, [&] { return read_bitext_files(a, b); });
  }
  if (o.normalize) {
    for (auto& p : pairs) p = make_pair_from_raw(p.id, normalize_text(p.src_raw), normalize_text(p.tgt_raw));
  }
  const auto r = filter_corpus(pairs, o.cfg);
  json reasons = json::object();
  for (const auto& rej : r.rejected) {
    for (const auto& why : rej.reasons) reasons[why] = reasons.value(why, 0) + 1;
  }
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_bitext_tsv(f, r.kept);
  }
  if (!o.rejected.empty()) {
    auto f = open_out(o.rejected);
    for (const auto& rej : r.rejected) {
      f << json{{"id", rej.pair.id}, {"src", rej.pair.src_raw}, {"tgt", rej.pair.tgt_raw}, {"reasons", rej.reasons}}
               .dump()
        << '\n';
    }
  }
  json out = {{"input", pairs.size()}, {"kept", r.kept.size()}, {"rejected", r.rejected.size()}, {"reasons", reasons}};
  if (!o.scores.empty()) {
    auto in = open_in(o.scores);
    const auto scores = with_path(o.scores, [&] { return read_scores(in); });
    const std::size_t k = o.top_k ? o.top_k : r.kept.size();
    const auto split = select_seed(r.kept, scores, k, o.dev_size, o.split_seed);
    if (!o.train_out.empty()) {
      auto f = open_out(o.train_out);
      write_bitext_tsv(f, split.train);
    }
    if (!o.dev_out.empty()) {
      auto f = open_out(o.dev_out);
      write_bitext_tsv(f, split.dev);
    }
    out["seed_train"] = split.train.size();
    out["seed_dev"] = split.dev.size();
  }
  print(out);
  return 0;
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  std::string bitext, src_conllu, tgt_conllu, align, lexicon, only;
  std::size_t toy = 0;
  std::uint64_t toy_seed = 0;
  std::string strategy = "divergence-ranking";
  std::optional<std::size_t> seeds;
  std::uint64_t rng_seed = 0;
  std::size_t min_phrase = 2, phrase_tries = 50;
  std::string out, skipped;
};

int run_generate(const GenerateOpts& o) {
  const auto strategy = SamplingStrategy::parse(o.strategy);
  std::vector<Seed> seeds;
  LexicalResource lex;
  if (o.toy) {
    auto c = toy::make_toy_corpus(o.toy, o.toy_seed);
    seeds = std::move(c.seeds);
    lex = std::move(c.lexicon);
  } else {
    if (o.bitext.empty() || o.src_conllu.empty() || o.align.empty()) {
      throw std::invalid_argument("need --bitext, --src-conllu and --align (or --toy N)");
    }
    const auto pairs = load_bitext(o.bitext);
    auto sin = open_in(o.src_conllu);
    const auto src = with_path(o.src_conllu, [&] { return read_conllu(sin); });
    auto ain = open_in(o.align);
    const auto al = with_path(o.align, [&] { return read_pharaoh(ain); });
    std::optional<std::vector<ConlluSentence>> tgt;
    if (!o.tgt_conllu.empty()) {
      auto tin = open_in(o.tgt_conllu);
      tgt = with_path(o.tgt_conllu, [&] { return read_conllu(tin); });
    }
    seeds = assemble_seeds(pairs, src, al, tgt ? &*tgt : nullptr);
    if (!o.lexicon.empty()) {
      auto lin = open_in(o.lexicon);
      lex = with_path(o.lexicon, [&] { return LexicalResource::read_tsv(lin); });
    }
  }
  if (!o.only.empty()) {
    std::set<std::string> keep;
    for (const auto& p : load_bitext(o.only)) keep.insert(p.id);
    std::erase_if(seeds, [&](const Seed& s) { return !keep.count(s.pair.id); });
  }
  GeneratorResources res(seeds, std::move(lex));
  res.phrase.min_span = o.min_phrase;
  res.phrase.max_tries = o.phrase_tries;
  const auto gen = res.view();
  const auto set = o.seeds ? build_complete_set(seeds, strategy, gen, o.rng_seed, *o.seeds)
                           : build_contrastive_set(seeds, strategy, gen, o.rng_seed);
  if (o.seeds && set.items.size() < *o.seeds * items_per_seed(strategy, gen)) {
    throw std::runtime_error("only " + std::to_string(set.items.size() / items_per_seed(strategy, gen)) +
                             " of " + std::to_string(seeds.size()) + " seeds yield a complete set; " +
                             std::to_string(*o.seeds) + " requested");
  }
  if (o.out.empty() || o.out == "-") {
    write_contrastive_jsonl(std::cout, set.items);
  } else {
    auto f = open_out(o.out);
    write_contrastive_jsonl(f, set.items);
  }
  if (!o.skipped.empty()) {
    auto f = open_out(o.skipped);
    for (const auto& s : set.skipped) {
      f << json{{"seed_id", s.seed_id}, {"dtype", to_string(s.dtype)}, {"reason", s.reason}}.dump() << '\n';
    }
  }
  json by_type = json::object();
  for (const auto& it : set.items) {
    const auto k = kind_name(it.y.kind);
    by_type[k] = by_type.value(k, 0) + 1;
  }
  const json summary = {{"strategy", strategy.name()}, {"seeds_available", seeds.size()},
                        {"items", set.items.size()},   {"skipped_edits", set.skipped.size()},
                        {"by_lower_type", by_type}};
  // Keep stdout clean when it carries the items.
  if (o.out.empty() || o.out == "-") std::cerr << summary.dump() << '\n';
  else print(summary);
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string train, dev, out, log, init;
  std::string objective = "multitask";
  std::string activation = "tanh";
  TrainConfig cfg;
  std::vector<double> margin_grid;
};

int run_train(TrainOpts o) {
  auto& cfg = o.cfg;
  cfg.objective = objective_from_string(o.objective);
  if (o.activation == "tanh") cfg.activation = Activation::Tanh;
  else if (o.activation == "identity") cfg.activation = Activation::Identity;
  else throw std::invalid_argument("activation must be tanh or identity");
  if (!(cfg.adam.lr > 0)) throw std::invalid_argument("--lr must be positive");
  if (!(cfg.margin > 0)) throw std::invalid_argument("--margin must be positive");
  const auto train_items = load_items(o.train);
  const auto dev_items = o.dev.empty() ? std::vector<ContrastiveItem>{} : load_items(o.dev);
  std::optional<std::ofstream> log;
  if (!o.log.empty()) {
    log = open_out(o.log);
    cfg.log = &*log;
  }
  std::optional<ScorerParams> init;
  if (!o.init.empty()) {
    auto in = open_in(o.init);
    init = with_path(o.init, [&] { return load_scorer(in); });
  }
  json out = {{"objective", to_string(cfg.objective)}, {"train_items", train_items.size()},
              {"dev_items", dev_items.size()}};
  TrainResult r;
  if (!o.margin_grid.empty()) {
    if (dev_items.empty()) throw std::invalid_argument("--margin-grid needs --dev");
    auto g = grid_search_margin(train_items, dev_items, cfg, o.margin_grid);
    json by = json::object();
    for (auto [m, f1] : g.f1_by_margin) by[std::to_string(m)] = f1;
    out["margin_grid"] = by;
    out["margin"] = g.best_margin;
    r = std::move(g.best);
  } else {
    r = train(train_items, dev_items, cfg, std::move(init));
    out["margin"] = cfg.margin;
  }
  json hist = json::array();
  for (const auto& e : r.history) hist.push_back(to_json(e));
  out["history"] = hist;
  out["best_epoch"] = r.best_epoch;
  out["dev_metric"] = r.dev_metric_name;
  out["calibration_bias"] = r.calibration_bias;
  if (!dev_items.empty()) {
    out["dev_ranking_accuracy"] = ranking_accuracy(r.params, dev_items);
    out["dev_weighted_f1"] = weighted_f1(r.params, unique_samples(dev_items));
  }
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    save_scorer(f, r.params);
    out["model"] = o.out;
  }
  print(out);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string model, dataset, items, laser, out, plots;
  std::vector<double> thresholds = {10, 20, 30, 40};
  std::string divpct_mode = "pooled";
  std::string token_class = "some_meaning_difference";
  double laser_cutoff = kLaserCutoff;
  double threshold = 0.5;
  std::size_t bins = 30;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_plot(const std::string& dir, const std::string& name, const std::string& title,
                const std::string& x_label, const std::map<std::string, std::vector<double>>& series,
                std::size_t bins) {
  const auto hs = make_histograms(series, bins);
  auto csv = open_out((fs::path(dir) / (name + ".csv")).string());
  write_histogram_csv(csv, name, hs);
  open_out((fs::path(dir) / (name + ".svg")).string()) << render_histogram_svg(title, hs, x_label);
}

int run_evaluate(const EvalOpts& o) {
  ScorerParams p = [&] {
    auto in = open_in(o.model);
    return with_path(o.model, [&] { return load_scorer(in); });
  }();
  if (o.dataset.empty() == o.items.empty()) throw std::invalid_argument("need exactly one of --dataset or --items");
  json report;
  if (!o.items.empty()) {
    const auto items = load_items(o.items);
    const auto samples = unique_samples(items);
    std::map<std::string, std::vector<double>> by_kind;
    std::set<std::string> seen;
    for (const auto& it : items) {
      for (const Sample* s : {&it.x, &it.y}) {
        if (seen.insert(s->pair.id).second) by_kind[kind_name(s->kind)].push_back(score(p, s->pair));
      }
    }
    json med = json::object();
    for (const auto& [k, v] : by_kind) med[k] = median(v);
    std::vector<SentenceLabel> gold, pred;
    for (const auto& s : samples) {
      gold.push_back(s.equivalent ? SentenceLabel::Equivalent : SentenceLabel::Divergent);
      pred.push_back(predict(p, s.pair, o.threshold).sentence_label);
    }
    report = {{"items", items.size()},
              {"ranking_accuracy", ranking_accuracy(p, items)},
              {"ranking_accuracy_equivalent", ranking_accuracy(p, items, true)},
              {"sentence", report_json(classification_report(gold, pred))},
              {"median_score", med}};
    if (!o.plots.empty()) write_plot(o.plots, "scores", "Scores by sample type", "score", by_kind, o.bins);
  } else {
    const auto d = load_dataset(o.dataset);
    EvaluationConfig cfg;
    cfg.divpct_thresholds = o.thresholds;
    if (o.divpct_mode == "pooled") cfg.divpct_mode = DivPctMode::Pooled;
    else if (o.divpct_mode == "per-side-mean") cfg.divpct_mode = DivPctMode::PerSideMean;
    else throw std::invalid_argument("--divpct-mode must be pooled or per-side-mean");
    cfg.token_eval_class = o.token_class == "all" ? std::nullopt
                                                  : std::optional(sentence_class_from_string(o.token_class));
    cfg.laser_cutoff = o.laser_cutoff;
    std::optional<std::map<std::string, double>> laser;
    if (!o.laser.empty()) {
      auto in = open_in(o.laser);
      laser.emplace();
      for (const auto& s : with_path(o.laser, [&] { return read_scores(in); })) (*laser)[s.pair_id] = s.score;
    }
    const auto preds = predict_dataset(p, d, o.threshold);
    report = evaluate_report(d, preds, cfg, laser ? &*laser : nullptr);
    if (!o.plots.empty()) {
      std::map<std::string, std::vector<double>> scores, pct;
      for (const auto* ap : d.included()) {
        const auto& pr = preds.at(ap->pair.id);
        const std::string cls = short_name(*ap->adjudicated);
        scores[cls].push_back(pr.score);
        pct[cls].push_back(div_percentage(pr.src_token_labels, pr.tgt_token_labels, cfg.divpct_mode));
      }
      write_plot(o.plots, "scores", "Scores by gold class", "score", scores, o.bins);
      write_plot(o.plots, "divpct", "DIV% by gold class", "DIV%", pct, o.bins);
    }
  }
  if (!o.out.empty()) open_out(o.out) << report.dump(2) << '\n';
  print(report);
  return 0;
}

// ---------------------------------------------------------------------------

struct DatasetOpts {
  std::string dataset, brat;
  double iou = 0.5;
};

RefresdDataset dataset_from(const DatasetOpts& o) {
  if (o.dataset.empty() == o.brat.empty()) throw std::invalid_argument("need exactly one of --dataset or --brat");
  if (!o.brat.empty()) return import_brat(o.brat);
  return load_dataset(o.dataset);
}

int run_iaa(const DatasetOpts& o) {
  const auto d = dataset_from(o);
  auto j = to_json(agreement(d, o.iou));
  j["pairs"] = d.pairs.size();
  j["excluded"] = d.pairs.size() - d.included().size();
  print(j);
  return 0;
}

int run_stats(const DatasetOpts& o) {
  print(to_json(dataset_stats(dataset_from(o))));
  return 0;
}

int run_import_brat(const std::string& root, const std::string& out) {
  const auto d = import_brat(root);
  save_refresd(fs::path(out), d);
  print({{"pairs", d.pairs.size()}, {"out", out}});
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeOpts {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string pool, dataset, references, journal, ui;
  ServiceConfig cfg;
};

httplib::Server* g_server = nullptr;

int run_serve(const ServeOpts& o) {
  std::vector<SentencePair> pool;
  std::optional<RefresdDataset> dataset;
  if (!o.dataset.empty()) dataset = load_dataset(o.dataset);
  if (!o.pool.empty()) {
    pool = load_bitext(o.pool);
  } else if (dataset) {
    for (const auto& ap : dataset->pairs) pool.push_back(ap.pair);
  } else {
    throw std::invalid_argument("need --pool or --dataset");
  }
  std::map<std::string, SentenceClass> refs;
  if (!o.references.empty()) {
    auto in = open_in(o.references);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      line = util::strip_cr(line);
      if (util::trim(line).empty()) continue;
      const auto cols = util::split(line, '\t');
      if (cols.size() != 2) throw std::runtime_error(o.references + ":" + std::to_string(n) + ": expected pair_id<TAB>class");
      refs[cols[0]] = sentence_class_from_string(cols[1]);
    }
  }
  AnnotationStore store(std::move(pool), o.cfg, std::move(refs),
                        o.journal.empty() ? std::nullopt : std::optional<fs::path>(o.journal),
                        std::move(dataset));
  httplib::Server server;
  register_routes(server, store);
  if (!o.ui.empty() && !server.set_mount_point("/", o.ui)) throw std::runtime_error("cannot mount " + o.ui);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  if (!server.bind_to_port(o.host, o.port)) {
    throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  std::cerr << json{{"listening", o.host + ":" + std::to_string(o.port)}}.dump() << '\n';
  server.listen_after_bind();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and label fine-grained semantic divergences in bitext"};
  app.set_config("--config", "", "INI/TOML file with one [section] per subcommand");
  app.require_subcommand(1);

  ToyOpts toy_o;
  auto* toy_cmd = app.add_subcommand("toy", "Write a synthetic English-French bitext with parses and alignments");
  toy_cmd->add_option("--pairs", toy_o.pairs, "Number of sentence pairs")->capture_default_str();
  toy_cmd->add_option("--seed", toy_o.seed, "RNG seed")->capture_default_str();
  toy_cmd->add_option("--out-dir", toy_o.out_dir, "Output directory")->required();

  FilterOpts fo;
  auto* filter_cmd = app.add_subcommand("filter", "Clean a bitext and optionally select seed equivalents");
  filter_cmd->add_option("--bitext", fo.bitext, "TSV: id, source, target");
  filter_cmd->add_option("--src", fo.src, "Line-aligned source file");
  filter_cmd->add_option("--tgt", fo.tgt, "Line-aligned target file");
  filter_cmd->add_flag("--normalize", fo.normalize, "Map Unicode punctuation to ASCII and squash whitespace");
  filter_cmd->add_option("--min-tokens", fo.cfg.min_tokens)->capture_default_str();
  filter_cmd->add_option("--max-tokens", fo.cfg.max_tokens)->capture_default_str();
  filter_cmd->add_option("--max-numeric-ratio", fo.cfg.max_numeric_ratio)->capture_default_str();
  filter_cmd->add_option("--min-edit-ratio", fo.cfg.min_edit_ratio)->capture_default_str();
  filter_cmd->add_option("--out", fo.out, "Kept pairs (TSV)");
  filter_cmd->add_option("--rejected", fo.rejected, "Rejected pairs with reasons (JSONL)");
  filter_cmd->add_option("--scores", fo.scores, "TSV: pair_id, similarity score; enables seed selection");
  filter_cmd->add_option("--top-k", fo.top_k, "Seeds to keep (0: all kept pairs)");
  filter_cmd->add_option("--dev-size", fo.dev_size, "Seeds held out for dev")->capture_default_str();
  filter_cmd->add_option("--split-seed", fo.split_seed)->capture_default_str();
  filter_cmd->add_option("--train-out", fo.train_out, "Train seeds (TSV)");
  filter_cmd->add_option("--dev-out", fo.dev_out, "Dev seeds (TSV)");

  GenerateOpts go;
  auto* gen_cmd = app.add_subcommand("generate", "Build contrastive items (JSONL) from seed equivalents");
  gen_cmd->add_option("--bitext", go.bitext, "Seed bitext (TSV)");
  gen_cmd->add_option("--src-conllu", go.src_conllu, "Source parses, same order as the bitext");
  gen_cmd->add_option("--tgt-conllu", go.tgt_conllu, "Target parses (enables target-side phrase replacement)");
  gen_cmd->add_option("--align", go.align, "Pharaoh alignments, same order as the bitext");
  gen_cmd->add_option("--lexicon", go.lexicon, "TSV: lemma, pos, hyper|hypo, candidate");
  gen_cmd->add_option("--only", go.only, "Restrict to pair ids listed in this bitext TSV");
  gen_cmd->add_option("--toy", go.toy, "Use N built-in synthetic seeds instead of input files");
  gen_cmd->add_option("--toy-seed", go.toy_seed)->capture_default_str();
  gen_cmd->add_option("--strategy", go.strategy,
                      "single:<type> | balanced | concatenation | divergence-ranking")
      ->capture_default_str();
  gen_cmd->add_option("--seeds", go.seeds, "Use the first N seeds that yield every item the strategy needs");
  gen_cmd->add_option("--rng-seed", go.rng_seed)->capture_default_str();
  gen_cmd->add_option("--min-phrase", go.min_phrase, "Shortest replaced phrase (tokens)")->capture_default_str();
  gen_cmd->add_option("--phrase-tries", go.phrase_tries, "Donor draws before giving up on a seed")
      ->capture_default_str();
  gen_cmd->add_option("--out", go.out, "Items JSONL (default: stdout)");
  gen_cmd->add_option("--skipped", go.skipped, "Skipped edits (JSONL)");

  TrainOpts to;
  auto* train_cmd = app.add_subcommand("train", "Fit a divergence scorer on contrastive items");
  train_cmd->add_option("--train", to.train, "Training items (JSONL)")->required();
  train_cmd->add_option("--dev", to.dev, "Dev items (JSONL) for model selection");
  train_cmd->add_option("--out", to.out, "Checkpoint path (JSON)");
  train_cmd->add_option("--log", to.log, "Per-epoch JSONL log");
  train_cmd->add_option("--init", to.init, "Start from this checkpoint");
  train_cmd->add_option("--objective", to.objective, "ce-random | ce-contrastive | margin | multitask")
      ->capture_default_str();
  train_cmd->add_option("--margin", to.cfg.margin)->capture_default_str();
  train_cmd->add_option("--margin-grid", to.margin_grid, "Train once per margin, keep the best dev F1")
      ->delimiter(',');
  train_cmd->add_option("--token-weight", to.cfg.token_weight)->capture_default_str();
  train_cmd->add_option("--lr", to.cfg.adam.lr)->capture_default_str();
  train_cmd->add_option("--epochs", to.cfg.max_epochs)->capture_default_str();
  train_cmd->add_option("--patience", to.cfg.patience)->capture_default_str();
  train_cmd->add_option("--batch-size", to.cfg.batch_size, "0: objective default")->capture_default_str();
  train_cmd->add_option("--dim", to.cfg.dim)->capture_default_str();
  train_cmd->add_option("--hidden", to.cfg.hidden)->capture_default_str();
  train_cmd->add_option("--activation", to.activation, "tanh | identity")->capture_default_str();
  train_cmd->add_option("--seed", to.cfg.rng_seed)->capture_default_str();
  train_cmd->add_flag("!--no-calibrate", to.cfg.calibrate, "Skip bias calibration on dev");

  EvalOpts eo;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on an annotated dataset or synthetic items");
  eval_cmd->add_option("--model", eo.model, "Checkpoint (JSON)")->required();
  eval_cmd->add_option("--dataset", eo.dataset, "Annotated dataset (JSONL)");
  eval_cmd->add_option("--items", eo.items, "Synthetic contrastive items (JSONL)");
  eval_cmd->add_option("--laser", eo.laser, "TSV: pair_id, similarity score for the threshold baseline");
  eval_cmd->add_option("--laser-cutoff", eo.laser_cutoff)->capture_default_str();
  eval_cmd->add_option("--thresholds", eo.thresholds, "DIV% thresholds")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--divpct-mode", eo.divpct_mode, "pooled | per-side-mean")->capture_default_str();
  eval_cmd->add_option("--token-class", eo.token_class, "Gold class whose pairs enter token F1, or 'all'")
      ->capture_default_str();
  eval_cmd->add_option("--threshold", eo.threshold, "Probability cutoff for 'equivalent'")->capture_default_str();
  eval_cmd->add_option("--plots", eo.plots, "Directory for histogram CSV and SVG files");
  eval_cmd->add_option("--bins", eo.bins)->capture_default_str();
  eval_cmd->add_option("--out", eo.out, "Also write the report here");

  DatasetOpts io;
  auto* iaa_cmd = app.add_subcommand("iaa", "Inter-annotator agreement");
  iaa_cmd->add_option("--dataset", io.dataset, "Annotated dataset (JSONL)");
  iaa_cmd->add_option("--brat", io.brat, "brat annotation root");
  iaa_cmd->add_option("--iou", io.iou, "Span match threshold")->capture_default_str();

  DatasetOpts so;
  auto* stats_cmd = app.add_subcommand("stats", "Class counts of an annotated dataset");
  stats_cmd->add_option("--dataset", so.dataset, "Annotated dataset (JSONL)");
  stats_cmd->add_option("--brat", so.brat, "brat annotation root");

  std::string brat_root, brat_out;
  auto* brat_cmd = app.add_subcommand("import-brat", "Convert brat annotation folders to dataset JSONL");
  brat_cmd->add_option("--root", brat_root, "One folder per annotator")->required();
  brat_cmd->add_option("--out", brat_out, "Dataset JSONL")->required();

  ServeOpts vo;
  auto* serve_cmd = app.add_subcommand("serve", "Host annotation sessions over HTTP");
  serve_cmd->add_option("--host", vo.host)->capture_default_str();
  serve_cmd->add_option("--port", vo.port)->capture_default_str();
  serve_cmd->add_option("--pool", vo.pool, "Pairs to annotate (TSV)");
  serve_cmd->add_option("--dataset", vo.dataset, "Annotated dataset for /api/iaa and /api/dataset/stats");
  serve_cmd->add_option("--references", vo.references, "TSV: pair_id, known class (quality control)");
  serve_cmd->add_option("--journal", vo.journal, "Append-only JSONL journal; replayed on start");
  serve_cmd->add_option("--ui", vo.ui, "Static files served at /");
  serve_cmd->add_option("--session-size", vo.cfg.session_size)->capture_default_str();
  serve_cmd->add_option("--fan-out", vo.cfg.fan_out, "Annotators per pair")->capture_default_str();
  serve_cmd->add_option("--duplicates", vo.cfg.duplicates_per_session)->capture_default_str();
  serve_cmd->add_option("--references-per-session", vo.cfg.references_per_session)->capture_default_str();
  serve_cmd->add_option("--seed", vo.cfg.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*toy_cmd) return run_toy(toy_o);
    if (*filter_cmd) return run_filter(fo);
    if (*gen_cmd) return run_generate(go);
    if (*train_cmd) return run_train(to);
    if (*eval_cmd) return run_evaluate(eo);
    if (*iaa_cmd) return run_iaa(io);
    if (*stats_cmd) return run_stats(so);
    if (*brat_cmd) return run_import_brat(brat_root, brat_out);
    if (*serve_cmd) return run_serve(vo);
  } catch (const std::exception& e) {
    std::cerr << "semdiv: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
