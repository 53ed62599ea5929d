#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "semdiv/corpus_io.hpp"

using namespace semdiv;

namespace {

const char* kTwelve =
    "# sent_id = r1\n"
    "# text = The committee rejected the proposal because it did not include any budget .\n"
    "1\tThe\tthe\tDET\tDT\tDefinite=Def\t2\tdet\t_\t_\n"
    "2\tcommittee\tcommittee\tNOUN\tNN\tNumber=Sing\t3\tnsubj\t_\t_\n"
    "3\trejected\treject\tVERB\tVBD\tTense=Past\t0\troot\t_\t_\n"
    "4\tthe\tthe\tDET\tDT\tDefinite=Def\t5\tdet\t_\t_\n"
    "5\tproposal\tproposal\tNOUN\tNN\tNumber=Sing\t3\tobj\t_\t_\n"
    "6\tbecause\tbecause\tSCONJ\tIN\t_\t9\tmark\t_\t_\n"
    "7\tit\tit\tPRON\tPRP\t_\t9\tnsubj\t_\t_\n"
    "8\tdid\tdo\tAUX\tVBD\t_\t9\taux\t_\t_\n"
    "9\tnot\tnot\tPART\tRB\t_\t10\tadvmod\t_\t_\n"
    "10\tinclude\tinclude\tVERB\tVB\t_\t3\tadvcl\t_\t_\n"
    "11\tany\tany\tDET\tDT\t_\t12\tdet\t_\t_\n"
    "12\tbudget\tbudget\tNOUN\tNN\t_\t10\tobj\t_\tSpaceAfter=No\n"
    "\n";

std::string block(const std::vector<std::string>& rows) {
  std::string s;
  for (const auto& r : rows) s += r + "\n";
  return s + "\n";
}

SentencePair sp(const std::string& id, const std::string& src, const std::string& tgt) {
  return make_pair_from_raw(id, src, tgt);
}

}  // namespace

// ---------------------------------------------------------------------------
// CoNLL-U

TEST(Conllu, MinimalTree) {
  const auto s = parse_conllu(block({"1\tDogs\tdog\tNOUN\t_\t_\t2\tnsubj\t_\t_", "2\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_"}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].tree.heads, (std::vector<int>{2, 0}));
  EXPECT_EQ(s[0].tree.upos, (std::vector<std::string>{"NOUN", "VERB"}));
  EXPECT_EQ(s[0].forms, (std::vector<std::string>{"Dogs", "bark"}));
}

TEST(Conllu, NonIntegerHeadNamesLine) {
  try {
    parse_conllu(block({"# c", "1\tDogs\tdog\tNOUN\t_\t_\tx\tnsubj\t_\t_", "2\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_"}));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Conllu, StructuralErrors) {
  // wrong column count
  EXPECT_THROW(parse_conllu("1\tDogs\tdog\tNOUN\n"), ParseError);
  // two roots
  EXPECT_THROW(parse_conllu(block({"1\ta\ta\tX\t_\t_\t0\tr\t_\t_", "2\tb\tb\tX\t_\t_\t0\tr\t_\t_"})), ParseError);
  // no root (cycle)
  EXPECT_THROW(parse_conllu(block({"1\ta\ta\tX\t_\t_\t2\tr\t_\t_", "2\tb\tb\tX\t_\t_\t1\tr\t_\t_"})), ParseError);
  // cycle away from the root
  EXPECT_THROW(parse_conllu(block({"1\ta\ta\tX\t_\t_\t0\tr\t_\t_", "2\tb\tb\tX\t_\t_\t3\tr\t_\t_",
                                   "3\tc\tc\tX\t_\t_\t2\tr\t_\t_"})),
               ParseError);
  // head out of range
  EXPECT_THROW(parse_conllu(block({"1\ta\ta\tX\t_\t_\t0\tr\t_\t_", "2\tb\tb\tX\t_\t_\t7\tr\t_\t_"})), ParseError);
}

TEST(Conllu, SkipsMultiwordAndEmptyNodes) {
  const auto s = parse_conllu(block({"1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_", "1\tde\tde\tADP\t_\t_\t2\tcase\t_\t_",
                                     "2\tle\tle\tDET\t_\t_\t0\troot\t_\t_", "2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_"}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].forms, (std::vector<std::string>{"de", "le"}));
}

TEST(Conllu, TwelveTokenRoundTripIsByteIdentical) {
  const auto s = parse_conllu(kTwelve);
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].size(), 12u);
  EXPECT_EQ(serialize_conllu(s), kTwelve);
  EXPECT_EQ(parse_conllu(serialize_conllu(s)), s);
}

TEST(Conllu, RandomTreesRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    // Random tree: a random permutation where each node attaches to an earlier one.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    ConlluSentence c;
    c.tree.heads.assign(n, 0);
    for (std::size_t k = 1; k < n; ++k) c.tree.heads[order[k]] = static_cast<int>(order[rng() % k]) + 1;
    for (std::size_t i = 0; i < n; ++i) {
      c.forms.push_back("t" + std::to_string(i));
      c.lemmas.push_back("_");
      c.tree.upos.push_back(i % 2 ? "NOUN" : "VERB");
      c.xpos.push_back("_");
      c.feats.push_back("_");
      c.deprels.push_back("dep");
      c.deps.push_back("_");
      c.misc.push_back("_");
    }
    const auto back = parse_conllu(serialize_conllu({c}));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].tree, c.tree);
    EXPECT_EQ(back[0].forms, c.forms);
  }
}

TEST(Conllu, CrlfAndMultipleBlocks) {
  std::string text = block({"1\ta\ta\tX\t_\t_\t0\tr\t_\t_"}) + block({"1\tb\tb\tY\t_\t_\t0\tr\t_\t_"});
  std::string crlf;
  for (char ch : text) crlf += ch == '\n' ? std::string("\r\n") : std::string(1, ch);
  const auto s = parse_conllu(crlf);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].forms[0], "b");
}

// ---------------------------------------------------------------------------
// Pharaoh

TEST(Pharaoh, Parses) {
  const auto a = parse_pharaoh("0-0 1-2 2-1");
  using L = std::vector<std::pair<std::size_t, std::size_t>>;
  EXPECT_EQ(a.links, (L{{0, 0}, {1, 2}, {2, 1}}));
  EXPECT_TRUE(parse_pharaoh("").links.empty());
  EXPECT_EQ(to_pharaoh(a), "0-0 1-2 2-1");
}

TEST(Pharaoh, RejectsMalformed) {
  EXPECT_THROW(parse_pharaoh("3-x"), ParseError);
  EXPECT_THROW(parse_pharaoh("-1-2"), ParseError);
  EXPECT_THROW(parse_pharaoh("12"), ParseError);
  EXPECT_THROW(parse_pharaoh("0-0 0-0"), ParseError);
}

TEST(Pharaoh, BoundsAreCheckedAgainstThePair) {
  const auto a = parse_pharaoh("0-0 2-1");
  EXPECT_NO_THROW(validate_alignment(a, 3, 2));
  EXPECT_THROW(validate_alignment(a, 2, 2), ParseError);
  EXPECT_THROW(validate_alignment(a, 3, 1), ParseError);
}

TEST(Pharaoh, FileErrorsCarryLineNumber) {
  std::istringstream in("0-0\n1-1\n2-y\n");
  try {
    read_pharaoh(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

// ---------------------------------------------------------------------------
// Bitext and scores

TEST(Bitext, TsvAndLineAlignedFiles) {
  std::istringstream tsv("a\tHello world\tBonjour monde\r\n\nb\tx y\tz\n");
  const auto p = read_bitext_tsv(tsv);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].tgt_tokens, (std::vector<std::string>{"Bonjour", "monde"}));
  std::ostringstream out;
  write_bitext_tsv(out, p);
  std::istringstream back(out.str());
  EXPECT_EQ(read_bitext_tsv(back), p);

  std::istringstream s("one\ntwo\n"), t("un\n");
  EXPECT_THROW(read_bitext_files(s, t), ParseError);
  std::istringstream s2("one\ntwo\n"), t2("un\ndeux\n");
  const auto f = read_bitext_files(s2, t2);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[1].id, "2");
}

TEST(Scores, ParseAndReject) {
  std::istringstream ok("a\t1.25\nb\t-0.5\n");
  const auto s = read_scores(ok);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].score, 1.25);
  std::istringstream bad("a\t1.2x\n");
  EXPECT_THROW(read_scores(bad), ParseError);
  std::istringstream inf("a\tinf\n");
  EXPECT_THROW(read_scores(inf), ParseError);
}

TEST(Normalize, SquashesSpacesAndMapsPunctuation) {
  EXPECT_EQ(normalize_text("  “Hi” —  there… "), "\"Hi\" - there...");
  EXPECT_EQ(normalize_text("a b"), "a b");
}

// ---------------------------------------------------------------------------
// Filtering

TEST(Filter, IdenticalSidesRejectedForEdit) {
  const auto r = filter_corpus({sp("1", "the same five token line", "the same five token line")});
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reasons, std::vector<std::string>{"edit"});
}

TEST(Filter, NumericPairRejected) {
  FilterConfig cfg;
  cfg.min_tokens = 1;
  const auto r = filter_corpus({sp("1", "3 14 15 92", "3 14 15 92 65")}, cfg);
  ASSERT_EQ(r.rejected.size(), 1u);
  const auto& why = r.rejected[0].reasons;
  EXPECT_NE(std::find(why.begin(), why.end(), "numeric"), why.end());
}

TEST(Filter, LengthBoundsAreInclusive) {
  FilterConfig cfg;
  cfg.min_tokens = 2;
  cfg.max_tokens = 3;
  const auto r = filter_corpus({sp("a", "x y", "p q"), sp("b", "x y z", "p q r"), sp("c", "x", "p q"),
                                sp("d", "w x y z", "p q")},
                               cfg);
  ASSERT_EQ(r.kept.size(), 2u);
  EXPECT_EQ(r.rejected[0].reasons, std::vector<std::string>{"length"});
}

TEST(Filter, EmptyInputAndBadConfig) {
  EXPECT_TRUE(filter_corpus({}).kept.empty());
  FilterConfig cfg;
  cfg.min_tokens = 0;
  EXPECT_THROW(filter_corpus({}, cfg), std::invalid_argument);
  cfg.min_tokens = 9;
  cfg.max_tokens = 3;
  EXPECT_THROW(filter_corpus({}, cfg), std::invalid_argument);
}

namespace {

// Direct reading of the three rules.
bool naive_keep(const SentencePair& p, const FilterConfig& c) {
  for (const auto* side : {&p.src_tokens, &p.tgt_tokens}) {
    if (side->size() < c.min_tokens || side->size() > c.max_tokens) return false;
    double num = 0;
    for (const auto& t : *side) {
      bool digit = false, other = false;
      for (char ch : t) {
        if (std::isdigit(static_cast<unsigned char>(ch))) digit = true;
        else if (std::string(".,-+/:%").find(ch) == std::string::npos) other = true;
      }
      num += digit && !other;
    }
    if (num / static_cast<double>(side->size()) > c.max_numeric_ratio) return false;
  }
  // Full DP table edit distance.
  const auto& a = p.src_tokens;
  const auto& b = p.tgt_tokens;
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  const double ratio = static_cast<double>(d[a.size()][b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
  return ratio >= c.min_edit_ratio;
}

std::vector<SentencePair> hundred_pairs() {
  std::mt19937_64 rng(17);
  const std::vector<std::string> words = {"le", "chat", "the", "cat", "sat", "1", "2,000", "3.5", "-", "x", "on", "mat"};
  std::vector<SentencePair> out;
  for (int i = 0; i < 100; ++i) {
    SentencePair p;
    p.id = "p" + std::to_string(i);
    const std::size_t ns = 1 + rng() % 12, nt = 1 + rng() % 12;
    for (std::size_t k = 0; k < ns; ++k) p.src_tokens.push_back(words[rng() % words.size()]);
    if (i % 7 == 0) {
      p.tgt_tokens = p.src_tokens;  // near-copies
      if (i % 2) p.tgt_tokens.push_back("x");
    } else {
      for (std::size_t k = 0; k < nt; ++k) p.tgt_tokens.push_back(words[rng() % words.size()]);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Filter, MatchesNaiveRuleOracle) {
  const auto pairs = hundred_pairs();
  for (FilterConfig cfg : {FilterConfig{}, FilterConfig{2, 8, 0.3, 0.4}}) {
    const auto r = filter_corpus(pairs, cfg);
    std::vector<std::string> want, got;
    for (const auto& p : pairs) {
      if (naive_keep(p, cfg)) want.push_back(p.id);
    }
    for (const auto& p : r.kept) got.push_back(p.id);
    EXPECT_EQ(got, want);
    EXPECT_EQ(r.kept.size() + r.rejected.size(), pairs.size());
    EXPECT_GT(r.kept.size(), 0u);
    EXPECT_GT(r.rejected.size(), 0u);
  }
}

TEST(Filter, Idempotent) {
  const auto pairs = hundred_pairs();
  const auto once = filter_corpus(pairs);
  const auto twice = filter_corpus(once.kept);
  EXPECT_TRUE(twice.rejected.empty());
  EXPECT_EQ(twice.kept, once.kept);
}

// ---------------------------------------------------------------------------
// Seed selection

namespace {

std::pair<std::vector<SentencePair>, std::vector<SimilarityScore>> scored(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SentencePair> p;
  std::vector<SimilarityScore> s;
  for (std::size_t i = 0; i < n; ++i) {
    p.push_back(sp("id" + std::to_string(i), "a b", "c d"));
    s.push_back({p.back().id, std::uniform_real_distribution<double>(0.5, 1.5)(rng)});
  }
  return {p, s};
}

}  // namespace

TEST(SelectSeed, TopKSplitSizes) {
  auto [p, s] = scored(6000, 1);
  const auto r = select_seed(p, s, 5500, 500, 7);
  EXPECT_EQ(r.train.size(), 5000u);
  EXPECT_EQ(r.dev.size(), 500u);
}

TEST(SelectSeed, KEqualsAllSelectsEverything) {
  auto [p, s] = scored(50, 2);
  const auto r = select_seed(p, s, 50, 5);
  std::set<std::string> ids;
  for (const auto& x : r.train) ids.insert(x.id);
  for (const auto& x : r.dev) ids.insert(x.id);
  EXPECT_EQ(ids.size(), 50u);
}

TEST(SelectSeed, TopThreeBySort) {
  auto [p, s] = scored(10, 3);
  auto sorted = s;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  const auto r = select_seed(p, s, 3, 0);
  std::vector<std::string> got, want;
  for (const auto& x : r.train) got.push_back(x.id);
  for (int i = 0; i < 3; ++i) want.push_back(sorted[static_cast<std::size_t>(i)].pair_id);
  EXPECT_EQ(got, want);
}

TEST(SelectSeed, TiesBrokenById) {
  std::vector<SentencePair> p = {sp("c", "a", "b"), sp("a", "a", "b"), sp("b", "a", "b")};
  std::vector<SimilarityScore> s = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}};
  const auto r = select_seed(p, s, 2, 0);
  ASSERT_EQ(r.train.size(), 2u);
  EXPECT_EQ(r.train[0].id, "a");
  EXPECT_EQ(r.train[1].id, "b");
}

TEST(SelectSeed, InvariantUnderInputPermutation) {
  auto [p, s] = scored(300, 4);
  const auto base = select_seed(p, s, 120, 20, 9);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(s.begin(), s.end(), rng);
    const auto r = select_seed(p, s, 120, 20, 9);
    EXPECT_EQ(r.train, base.train);
    EXPECT_EQ(r.dev, base.dev);
  }
  EXPECT_NE(select_seed(p, s, 120, 20, 10).dev, base.dev);
}

TEST(SelectSeed, Errors) {
  auto [p, s] = scored(5, 6);
  s.pop_back();
  try {
    select_seed(p, s, 2, 1);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("id4"), std::string::npos);
  }
  auto [q, t] = scored(5, 6);
  EXPECT_THROW(select_seed(q, t, 6, 1), std::invalid_argument);
  EXPECT_THROW(select_seed(q, t, 3, 3), std::invalid_argument);
}
