#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "refresd_fixture.hpp"
#include "semdiv/refresd.hpp"

using namespace semdiv;
using fixtures::ScratchDir;

namespace {

constexpr auto ND = SentenceClass::NoMeaningDifference;
constexpr auto SD = SentenceClass::SomeMeaningDifference;
constexpr auto UN = SentenceClass::Unrelated;

VoteOutcome vote(SentenceClass a, SentenceClass b, SentenceClass c) {
  const std::vector<SentenceClass> v{a, b, c};
  return majority_vote(std::span<const SentenceClass>(v));
}

// Independent statement of the rule: count, then decide.
std::optional<SentenceClass> vote_oracle(std::vector<SentenceClass> v) {
  std::sort(v.begin(), v.end());
  if (v[0] != v[1] && v[1] != v[2]) return std::nullopt;
  const SentenceClass maj = v[1];
  const SentenceClass minority = v[0] == v[1] ? v[2] : v[0];
  if (maj != SD && minority != SD && maj != minority) return std::nullopt;
  return maj;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

std::string dump(const RefresdDataset& d) {
  std::ostringstream out;
  save_refresd(out, d);
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Majority vote

TEST(MajorityVote, WorkedExamples) {
  EXPECT_EQ(vote(SD, SD, UN).cls, SD);
  EXPECT_EQ(vote(ND, ND, SD).cls, ND);
  EXPECT_EQ(vote(UN, UN, UN).cls, UN);
  const auto tri = vote(ND, SD, UN);
  EXPECT_TRUE(tri.excluded());
  EXPECT_EQ(tri.excluded_reason, kTridisagreement);
  const auto ext = vote(ND, ND, UN);
  EXPECT_TRUE(ext.excluded());
  EXPECT_EQ(ext.excluded_reason, kExtremeBidisagreement);
  EXPECT_EQ(vote(UN, ND, UN).excluded_reason, kExtremeBidisagreement);
}

TEST(MajorityVote, AllTriplesMatchOracleAndArePermutationInvariant) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        std::vector<SentenceClass> v{static_cast<SentenceClass>(a), static_cast<SentenceClass>(b),
                                     static_cast<SentenceClass>(c)};
        const auto want = vote_oracle(v);
        std::sort(v.begin(), v.end());
        do {
          const auto got = majority_vote(std::span<const SentenceClass>(v));
          EXPECT_EQ(got.cls, want) << a << b << c;
          EXPECT_EQ(got.excluded_reason.empty(), want.has_value());
        } while (std::next_permutation(v.begin(), v.end()));
      }
    }
  }
}

TEST(MajorityVote, RequiresThreeVotes) {
  const std::vector<SentenceClass> two{ND, ND};
  EXPECT_THROW(majority_vote(std::span<const SentenceClass>(two)), std::invalid_argument);
}

TEST(SentenceClass, ParsesLongShortAndDisplayForms) {
  EXPECT_EQ(sentence_class_from_string("some_meaning_difference"), SD);
  EXPECT_EQ(sentence_class_from_string("Some meaning difference"), SD);
  EXPECT_EQ(sentence_class_from_string("nd"), ND);
  EXPECT_EQ(sentence_class_from_string("UN"), UN);
  EXPECT_THROW(sentence_class_from_string("maybe"), std::invalid_argument);
  for (auto c : kAllSentenceClasses) EXPECT_EQ(sentence_class_from_string(to_string(c)), c);
}

// ---------------------------------------------------------------------------
// JSONL storage

TEST(RefresdJsonl, RoundTripIsByteStable) {
  const auto d = fixtures::random_dataset(20, 11);
  const auto first = dump(d);
  std::istringstream in(first);
  const auto back = load_refresd(in);
  ASSERT_EQ(back.pairs.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(back.pairs[i].records, d.pairs[i].records);
    EXPECT_EQ(back.pairs[i].adjudicated, d.pairs[i].adjudicated);
    EXPECT_EQ(back.pairs[i].excluded, d.pairs[i].excluded);
    EXPECT_EQ(back.pairs[i].pair.src_tokens, d.pairs[i].pair.src_tokens);
  }
  EXPECT_EQ(dump(back), first);
}

TEST(RefresdJsonl, FileRoundTrip) {
  ScratchDir dir("refresd");
  const auto d = fixtures::random_dataset(5, 2);
  save_refresd(dir / "d.jsonl", d);
  EXPECT_EQ(dump(load_refresd(dir / "d.jsonl")), dump(d));
  EXPECT_THROW(load_refresd(dir / "missing.jsonl"), std::runtime_error);
}

TEST(RefresdJsonl, EmptyFileIsEmptyDataset) {
  std::istringstream in("");
  EXPECT_TRUE(load_refresd(in).pairs.empty());
  std::istringstream blank("\n\n");
  EXPECT_TRUE(load_refresd(blank).pairs.empty());
}

TEST(RefresdJsonl, ExcludedPairsSerializeReason) {
  auto d = fixtures::random_dataset(30, 5);
  const auto it = std::find_if(d.pairs.begin(), d.pairs.end(), [](auto& p) { return p.excluded; });
  ASSERT_NE(it, d.pairs.end());
  const auto j = to_json(*it);
  EXPECT_TRUE(j["adjudicated"].is_null());
  EXPECT_TRUE(j["excluded"].is_string());
  EXPECT_EQ(j["schema"], kRefresdSchema);
}

TEST(RefresdJsonl, ErrorsCarryLineNumbers) {
  const auto good = fixtures::random_dataset(3, 1);
  const auto lines = util::split(dump(good), '\n');
  auto expect_line = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      load_refresd(in);
      FAIL() << "no error";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  // Wrong schema tag.
  auto j = nlohmann::json::parse(lines[1]);
  j["schema"] = "semdiv.refresd/0";
  expect_line(lines[0] + "\n" + j.dump() + "\n", 2);
  // Adjudication that disagrees with the votes.
  j = nlohmann::json::parse(lines[0]);
  for (auto& r : j["records"]) r["sentence_class"] = "unrelated";
  j["adjudicated"] = "no_meaning_difference";
  j["excluded"] = nullptr;
  expect_line(j.dump() + "\n", 1);
  // Only two records.
  j = nlohmann::json::parse(lines[2]);
  j["records"].erase(2);
  expect_line(lines[0] + "\n" + lines[1] + "\n" + j.dump() + "\n", 3);
  // Span past the end of the sentence.
  j = nlohmann::json::parse(lines[0]);
  j["records"][0]["spans"] = {{{"side", "src"}, {"start", 0}, {"end", 99}, {"label", "Added"}}};
  expect_line(j.dump() + "\n", 1);
  // Same annotator twice, duplicate ids, bad JSON.
  j = nlohmann::json::parse(lines[0]);
  j["records"][1]["annotator_id"] = j["records"][0]["annotator_id"];
  expect_line(j.dump() + "\n", 1);
  expect_line(lines[0] + "\n" + lines[0] + "\n", 2);
  expect_line(lines[0] + "\n{not json\n", 2);
}

// ---------------------------------------------------------------------------
// Statistics

TEST(DatasetStats, MatchesManualTally) {
  const auto d = fixtures::random_dataset(10, 21);
  std::size_t nd = 0, sd = 0, un = 0, ex = 0;
  for (const auto& p : d.pairs) {
    const auto c = vote_oracle({p.records[0].sentence_class, p.records[1].sentence_class,
                                p.records[2].sentence_class});
    if (!c) {
      ++ex;
      continue;
    }
    nd += *c == ND;
    sd += *c == SD;
    un += *c == UN;
  }
  const auto s = dataset_stats(d);
  EXPECT_EQ(s.nd, nd);
  EXPECT_EQ(s.sd, sd);
  EXPECT_EQ(s.un, un);
  EXPECT_EQ(s.excluded, ex);
  EXPECT_EQ(s.included() + s.excluded, 10u);
  const double n = static_cast<double>(nd + sd + un);
  EXPECT_DOUBLE_EQ(s.pct_divergent, 100.0 * static_cast<double>(sd + un) / n);
  EXPECT_DOUBLE_EQ(s.pct_fine_grained, 100.0 * static_cast<double>(sd) / n);
  const auto j = to_json(s);
  EXPECT_EQ(j["total"], nd + sd + un);
}

TEST(DatasetStats, SingleClassDegenerates) {
  auto d = fixtures::random_dataset(4, 3);
  for (auto& p : d.pairs) {
    for (auto& r : p.records) r.sentence_class = ND;
    adjudicate(p);
  }
  auto s = dataset_stats(d);
  EXPECT_EQ(s.nd, 4u);
  EXPECT_EQ(s.pct_divergent, 0.0);
  EXPECT_EQ(s.pct_fine_grained, 0.0);
  for (auto& p : d.pairs) {
    for (auto& r : p.records) r.sentence_class = UN;
    adjudicate(p);
  }
  s = dataset_stats(d);
  EXPECT_EQ(s.pct_divergent, 100.0);
  EXPECT_EQ(s.pct_fine_grained, 0.0);
  EXPECT_EQ(dataset_stats(RefresdDataset{}).pct_divergent, 0.0);
}

// ---------------------------------------------------------------------------
// Agreement

TEST(Agreement, ExcludedPairsNeverEnter) {
  const auto d = fixtures::random_dataset(40, 8);
  RefresdDataset kept;
  for (const auto& p : d.pairs) {
    if (!p.excluded) kept.pairs.push_back(p);
  }
  ASSERT_LT(kept.pairs.size(), d.pairs.size());
  const auto a = agreement(d), b = agreement(kept);
  EXPECT_EQ(a.items, kept.pairs.size());
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.span.mean, b.span.mean);
  EXPECT_EQ(a.token.mean, b.token.mean);
  // Perturbing an excluded pair changes nothing.
  auto d2 = d;
  for (auto& p : d2.pairs) {
    if (p.excluded) p.records[0].spans.clear();
  }
  EXPECT_EQ(agreement(d2).span.mean, a.span.mean);
}

TEST(Agreement, AlphaMatchesOracleOnClassColumns) {
  const auto d = fixtures::random_dataset(30, 9);
  const auto r = agreement(d);
  std::vector<std::vector<std::optional<int>>> rows;
  for (const auto* p : d.included()) {
    std::vector<std::optional<int>> row;
    for (const auto& rec : p->records) row.push_back(static_cast<int>(rec.sentence_class));
    rows.push_back(row);
  }
  ASSERT_TRUE(r.alpha.has_value());
  EXPECT_NEAR(*r.alpha, oracle::alpha(rows), 1e-12);
  const auto j = to_json(r);
  for (const char* k : {"items", "krippendorff_alpha", "span_macro_f1", "token_macro_f1"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["span_macro_f1"]["pairs"].size(), 6u);
}

TEST(Agreement, UnanimousAlphaIsOneAndEmptyAlphaIsNull) {
  auto d = fixtures::random_dataset(3, 4);
  for (auto& p : d.pairs) {
    for (auto& r : p.records) r.sentence_class = SD;
    adjudicate(p);
  }
  EXPECT_EQ(agreement(d).alpha, 1.0);
  for (auto& p : d.pairs) {
    p.records[0].sentence_class = ND;
    p.records[1].sentence_class = UN;
    adjudicate(p);
  }
  const auto r = agreement(d);
  EXPECT_EQ(r.items, 0u);
  EXPECT_FALSE(r.alpha.has_value());
  EXPECT_TRUE(to_json(r)["krippendorff_alpha"].is_null());
}

// ---------------------------------------------------------------------------
// brat import

TEST(Brat, ParsesCharacterSpansOntoTokens) {
  const std::string txt = "the cat sat down\nle chat est assis\n";
  // "cat sat" = [4, 11); "hat" = chars 21..24 inside "chat" on line 2.
  const std::string ann =
      "T1\tChanged 4 11\tcat sat\n"
      "T2\tAdded 21 24\that\n"
      "A1\tSentenceClass T1 some_meaning_difference\n"
      "#1\tAnnotatorNotes T1\tlooks off\n";
  const auto doc = parse_brat("p1", "ann", txt, ann);
  EXPECT_EQ(doc.pair.src_tokens, (std::vector<std::string>{"the", "cat", "sat", "down"}));
  EXPECT_EQ(doc.pair.tgt_tokens.size(), 4u);
  ASSERT_EQ(doc.record.spans.size(), 2u);
  EXPECT_EQ(doc.record.spans[0].side, Side::Src);
  EXPECT_EQ(doc.record.spans[0].start, 1u);
  EXPECT_EQ(doc.record.spans[0].end, 3u);
  EXPECT_EQ(doc.record.spans[0].label, SpanLabel::Changed);
  EXPECT_EQ(doc.record.spans[1].side, Side::Tgt);
  EXPECT_EQ(doc.record.spans[1].start, 1u);
  EXPECT_EQ(doc.record.spans[1].end, 2u);
  EXPECT_EQ(doc.record.sentence_class, SD);
  EXPECT_EQ(doc.record.notes, "looks off");
}

TEST(Brat, OverlappingSpansMerge) {
  const std::string txt = "a b c d\nw x y z\n";
  const auto doc = parse_brat("p", "a", txt,
                              "T1\tAdded 0 3\ta b\nT2\tOther 2 5\tb c\nA1\tSentenceClass T1 nd\n");
  ASSERT_EQ(doc.record.spans.size(), 1u);
  EXPECT_EQ(doc.record.spans[0].start, 0u);
  EXPECT_EQ(doc.record.spans[0].end, 3u);
}

TEST(Brat, RejectsMalformedAnnotations) {
  const std::string txt = "a b c\nx y z\n";
  auto line_of = [&](const std::string& ann) -> std::size_t {
    try {
      parse_brat("p", "a", txt, ann);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 999;
  };
  EXPECT_EQ(line_of("A1\tSentenceClass T1 nd\nT1\tAdded 0 9\tx\n"), 2u);  // crosses lines
  EXPECT_EQ(line_of("T1\tBogus 0 1\ta\nA1\tSentenceClass T1 nd\n"), 1u);
  EXPECT_EQ(line_of("T1\tAdded 3 1\ta\nA1\tSentenceClass T1 nd\n"), 1u);
  EXPECT_EQ(line_of("A1\tSentenceClass T1 perhaps\n"), 1u);
  EXPECT_THROW(parse_brat("p", "a", txt, "T1\tAdded 0 1\ta\n"), ParseError);  // no class
  EXPECT_THROW(parse_brat("p", "a", "a b\n", "A1\tSentenceClass T1 nd\n"), ParseError);
}

TEST(Brat, ImportsThreeAnnotatorTree) {
  ScratchDir dir("brat");
  const std::string txt = "the cat sat\nle chat est assis\n";
  const char* classes[] = {"sd", "sd", "un"};
  for (int a = 0; a < 3; ++a) {
    const auto who = "ann" + std::to_string(a);
    write(dir / who / "p7.txt", txt);
    write(dir / who / "p7.ann", "T1\tChanged 4 7\tcat\nA1\tSentenceClass T1 " + std::string(classes[a]) + "\n");
    write(dir / who / "p8.txt", txt);
    write(dir / who / "p8.ann", std::string("A1\tSentenceClass T1 ") + (a == 0 ? "nd" : a == 1 ? "sd" : "un") + "\n");
  }
  const auto d = import_brat(dir.path);
  ASSERT_EQ(d.pairs.size(), 2u);
  EXPECT_EQ(d.pairs[0].pair.id, "p7");
  EXPECT_EQ(d.pairs[0].adjudicated, SD);
  EXPECT_EQ(d.pairs[0].records.size(), 3u);
  EXPECT_TRUE(d.pairs[1].excluded);
  EXPECT_EQ(d.pairs[1].exclusion_reason, kTridisagreement);
  // Imported datasets survive the canonical format.
  std::istringstream in(dump(d));
  EXPECT_EQ(dump(load_refresd(in)), dump(d));
}

TEST(Brat, RejectsMissingAnnotatorOrTextMismatch) {
  ScratchDir dir("brat");
  for (int a = 0; a < 2; ++a) {
    write(dir / ("x" + std::to_string(a)) / "p.txt", "a b\nc d\n");
    write(dir / ("x" + std::to_string(a)) / "p.ann", "A1\tSentenceClass T1 nd\n");
  }
  EXPECT_THROW(import_brat(dir.path), ParseError);
  write(dir / "x2" / "p.txt", "a b\nc e\n");
  write(dir / "x2" / "p.ann", "A1\tSentenceClass T1 nd\n");
  EXPECT_THROW(import_brat(dir.path), ParseError);
}

// ---------------------------------------------------------------------------
// Annotator quality

TEST(Quality, FlagsInconsistentAndLowAgreementAnnotators) {
  std::vector<AnnotationRecord> recs;
  auto add = [&](const std::string& who, const std::string& pid, SentenceClass c) {
    recs.push_back({who, pid, {}, c, std::nullopt});
  };
  // good: consistent on the duplicate, 4/5 on references.
  // flaky: flips on the duplicate, 3/5 on references (not strictly above 60%).
  add("good", "orig", SD);
  add("good", "dup", SD);
  add("flaky", "orig", SD);
  add("flaky", "dup", UN);
  const SentenceClass ref[] = {ND, SD, UN, ND, SD};
  std::map<std::string, SentenceClass> reference;
  for (int i = 0; i < 5; ++i) {
    const auto id = "r" + std::to_string(i);
    reference[id] = ref[i];
    add("good", id, i == 0 ? UN : ref[i]);
    add("flaky", id, i < 2 ? UN : ref[i]);
  }
  add("silent", "other", ND);
  const auto q = quality_report(recs, {{"dup", "orig"}}, reference);
  ASSERT_EQ(q.size(), 3u);
  const auto& flaky = q[0];
  const auto& good = q[1];
  const auto& silent = q[2];
  EXPECT_EQ(flaky.annotator_id, "flaky");
  EXPECT_EQ(flaky.reference_agreement(), 0.6);
  EXPECT_EQ(flaky.flags, (std::vector<std::string>{"inconsistent_on_duplicates", "low_reference_agreement"}));
  EXPECT_EQ(good.reference_agreement(), 0.8);
  EXPECT_EQ(good.duplicate_consistency(), 1.0);
  EXPECT_TRUE(good.flags.empty());
  EXPECT_FALSE(silent.reference_agreement().has_value());
  EXPECT_TRUE(silent.flags.empty());
  EXPECT_TRUE(to_json(silent)["reference_agreement"].is_null());

  QualityConfig strict;
  strict.min_reference_agreement = 0.85;
  const auto q2 = quality_report(recs, {{"dup", "orig"}}, reference, strict);
  EXPECT_EQ(q2[1].flags, std::vector<std::string>{"low_reference_agreement"});
}
