#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "rapt/error.hpp"
#include "rapt/metrics.hpp"
#include "test_util.hpp"

using rapt::BleuPair;
using rapt::EvalRecord;
using rapt::TokenSeq;

namespace {

EvalRecord rec(TokenSeq src, TokenSeq pred, TokenSeq ref) {
  return {std::move(src), std::move(pred), {std::move(ref)}};
}

}  // namespace

// BLEU ---------------------------------------------------------------------------

TEST(Bleu, ExactMatchIs100) {
  std::vector<BleuPair> corpus = {{{"a", "b", "c", "d"}, {{"a", "b", "c", "d"}}},
                                  {{"x", "y", "z", "w", "v"}, {{"x", "y", "z", "w", "v"}}}};
  EXPECT_DOUBLE_EQ(rapt::bleu_corpus(corpus), 100.0);
}

TEST(Bleu, HandCountedPrecisions) {
  std::vector<BleuPair> corpus = {{{"a", "b", "c", "d", "e"}, {{"a", "b", "c", "d", "f"}}}};
  const auto stats = rapt::bleu_stats(corpus);
  EXPECT_EQ(stats.matches, (std::array<std::size_t, 4>{4, 3, 2, 1}));
  EXPECT_EQ(stats.totals, (std::array<std::size_t, 4>{5, 4, 3, 2}));
  EXPECT_DOUBLE_EQ(stats.brevity_penalty, 1.0);
  const double expected = 100.0 * std::pow(4.0 / 5 * 3.0 / 4 * 2.0 / 3 * 1.0 / 2, 0.25);
  EXPECT_NEAR(stats.score, expected, 1e-9);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  // hyp of 4 tokens, refs of 6 and 3 tokens: closest is 3 (distance 1), so BP = 1.
  std::vector<BleuPair> corpus = {
      {{"a", "b", "c", "d"}, {{"a", "b", "c", "d", "e", "f"}, {"a", "b", "c"}}}};
  EXPECT_DOUBLE_EQ(rapt::bleu_stats(corpus).brevity_penalty, 1.0);
  // refs 5 and 3 tokens are equally close to 4; the shorter wins.
  corpus = {{{"a", "b", "c", "d"}, {{"a", "b", "c", "d", "e"}, {"a", "b", "c"}}}};
  EXPECT_EQ(rapt::bleu_stats(corpus).reference_length, 3u);
  // short hypothesis is penalized
  corpus = {{{"a", "b", "c", "d"}, {{"a", "b", "c", "d", "e", "f", "g", "h"}}}};
  EXPECT_NEAR(rapt::bleu_stats(corpus).brevity_penalty, std::exp(1.0 - 8.0 / 4.0), 1e-12);
}

TEST(Bleu, ClipsAgainstReferenceCounts) {
  std::vector<BleuPair> corpus = {{{"the", "the", "the", "the"}, {{"the", "cat"}}}};
  const auto stats = rapt::bleu_stats(corpus);
  EXPECT_EQ(stats.matches[0], 1u);
  EXPECT_TRUE(stats.zero_match);
  EXPECT_EQ(stats.score, 0.0);
}

TEST(Bleu, MatchesHandOracleOnFuzz) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 500; ++c) {
    std::vector<BleuPair> corpus;
    std::vector<oracle::Seq> hyps, refs;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      auto h = testutil::random_words(rng, 10, 3, 1);
      auto r = testutil::random_words(rng, 10, 3, 1);
      corpus.push_back({TokenSeq(h), {TokenSeq(r)}});
      hyps.push_back(h);
      refs.push_back(r);
    }
    const double got = rapt::bleu_corpus(corpus);
    EXPECT_NEAR(got, oracle::bleu(hyps, refs), 1e-9);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 100.0 + 1e-9);
  }
}

TEST(Bleu, MissingReferencesRejected) {
  std::vector<BleuPair> corpus = {{{"a"}, {}}};
  EXPECT_THROW(rapt::bleu_corpus(corpus), rapt::ArgumentError);
  EXPECT_THROW(rapt::bleu_corpus({}), rapt::ArgumentError);
}

TEST(SelfBleu, CopyIs100AndDisjointIsZero) {
  std::vector<EvalRecord> copy = {rec({"a", "b", "c", "d"}, {"a", "b", "c", "d"}, {"q"}),
                                  rec({"e", "f", "g", "h", "i"}, {"e", "f", "g", "h", "i"}, {"q"})};
  EXPECT_DOUBLE_EQ(rapt::self_bleu(copy), 100.0);
  std::vector<EvalRecord> disjoint = {rec({"a", "b"}, {"c", "d"}, {"a"})};
  EXPECT_DOUBLE_EQ(rapt::self_bleu(disjoint), 0.0);
}

TEST(SelfBleu, EqualsBleuAgainstSources) {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 200; ++c) {
    std::vector<EvalRecord> records;
    std::vector<BleuPair> pairs;
    for (int i = 0; i < 4; ++i) {
      auto s = testutil::random_seq(rng, 8, 3, 1);
      auto p = testutil::random_seq(rng, 8, 3, 1);
      records.push_back(rec(s, p, {"z"}));
      pairs.push_back({p, {s}});
    }
    EXPECT_EQ(rapt::self_bleu(records), rapt::bleu_corpus(pairs));
  }
}

// TER ----------------------------------------------------------------------------

TEST(Ter, IdenticalIsZero) {
  const TokenSeq s{"a", "b", "c"};
  EXPECT_EQ(rapt::ter(s, s), 0.0);
}

TEST(Ter, SingleInsertion) { EXPECT_DOUBLE_EQ(rapt::ter({"a", "b", "d"}, {"a", "b", "c", "d"}), 0.25); }

TEST(Ter, BlockShiftBeatsEditDistance) {
  const TokenSeq hyp{"c", "d", "a", "b"}, ref{"a", "b", "c", "d"};
  const auto stats = rapt::ter_stats(hyp, ref);
  EXPECT_EQ(stats.shifts, 1u);
  EXPECT_DOUBLE_EQ(stats.rate(), 0.25);
  EXPECT_DOUBLE_EQ(static_cast<double>(rapt::edit_distance(hyp, ref)) / 4.0, 1.0);
}

TEST(Ter, EmptyReferenceRejected) { EXPECT_THROW(rapt::ter({"a"}, {}), rapt::ArgumentError); }

TEST(Ter, EditDistanceMatchesLevenshtein) {
  std::mt19937_64 rng(13);
  for (int c = 0; c < 1000; ++c) {
    const auto a = testutil::random_words(rng, 8, 3);
    const auto b = testutil::random_words(rng, 8, 3);
    EXPECT_EQ(rapt::edit_distance(TokenSeq(a), TokenSeq(b)), oracle::levenshtein(a, b));
  }
}

TEST(Ter, BoundsOnFuzz) {
  std::mt19937_64 rng(17);
  for (int c = 0; c < 2000; ++c) {
    const auto h = testutil::random_seq(rng, 10, 4);
    const auto r = testutil::random_seq(rng, 10, 4, 1);
    const double t = rapt::ter(h, r);
    const double len_diff = std::abs(static_cast<double>(h.size()) - static_cast<double>(r.size()));
    EXPECT_LE(t, static_cast<double>(rapt::edit_distance(h, r)) / r.size() + 1e-12);
    EXPECT_GE(t, len_diff / r.size() - 1e-12);
  }
}

TEST(Ter, NeverBelowExhaustiveMinimum) {
  std::mt19937_64 rng(19);
  int equal = 0;
  const int cases = 300;
  for (int c = 0; c < cases; ++c) {
    const auto h = testutil::random_words(rng, 6, 3, 1);
    const auto r = testutil::random_words(rng, 6, 3, 1);
    const auto got = rapt::ter_stats(TokenSeq(h), TokenSeq(r)).edits;
    const auto best = oracle::exhaustive_ter_edits(h, r);
    EXPECT_GE(got, best);
    equal += got == best;
  }
  EXPECT_GE(equal, cases * 95 / 100);
}

TEST(SelfTer, CopyIsZero) {
  std::vector<EvalRecord> copy = {rec({"a", "b"}, {"a", "b"}, {"z"}), rec({"c"}, {"c"}, {"z"})};
  EXPECT_EQ(rapt::self_ter(copy).percent, 0.0);
}

TEST(SelfTer, HandCases) {
  std::vector<EvalRecord> one = {rec({"a", "b"}, {"x"}, {"z"})};
  EXPECT_DOUBLE_EQ(rapt::self_ter(one).percent, 100.0);
  // per-record TER 0.2 (1 edit / 5) and 0.4 (2 edits / 5)
  std::vector<EvalRecord> two = {rec({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "x"}, {"z"}),
                                 rec({"a", "b", "c", "d", "e"}, {"a", "b", "c", "x", "y"}, {"z"})};
  EXPECT_NEAR(rapt::self_ter(two).percent, 30.0, 1e-9);
}

TEST(SelfTer, SkipsEmptySources) {
  std::vector<EvalRecord> records = {rec({}, {"a"}, {"z"}), rec({"a"}, {"a"}, {"z"})};
  const auto r = rapt::self_ter(records);
  EXPECT_EQ(r.scored, 1u);
  EXPECT_EQ(r.skipped, std::vector<std::size_t>{0});
}

// iBLEU --------------------------------------------------------------------------

TEST(Ibleu, TableRows) {
  EXPECT_NEAR(rapt::ibleu(32.78, 100.0), -7.05, 0.005);
  EXPECT_NEAR(rapt::ibleu(100.0, 30.98), 60.71, 0.005);
  EXPECT_NEAR(rapt::ibleu(30.36, 100.0), -8.75, 0.005);
  EXPECT_NEAR(rapt::ibleu(100.0, 30.34), 60.90, 0.005);
}

TEST(Ibleu, Linear) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  for (int c = 0; c < 1000; ++c) {
    const double b = pct(rng), s = pct(rng), d = pct(rng) / 10;
    EXPECT_NEAR(rapt::ibleu(b + d, s) - rapt::ibleu(b, s), 0.7 * d, 1e-9);
    EXPECT_NEAR(rapt::ibleu(b, s + d) - rapt::ibleu(b, s), -0.3 * d, 1e-9);
  }
  EXPECT_THROW(rapt::ibleu(1, 1, 1.5), rapt::ArgumentError);
}

// SARI ---------------------------------------------------------------------------

TEST(Sari, TwoTokenHandCase) {
  // n=1: keep 1, del 1, add 1; n=2: keep 0, del 1, add 1; n=3,4: all 0.
  const std::vector<TokenSeq> refs = {{"a", "c"}};
  const auto s = rapt::sari_sentence({"a", "b"}, {"a", "c"}, refs);
  EXPECT_DOUBLE_EQ(s.keep, 0.25);
  EXPECT_DOUBLE_EQ(s.del, 0.5);
  EXPECT_DOUBLE_EQ(s.add, 0.5);
  EXPECT_NEAR(s.score, 1.25 / 3.0, 1e-12);
}

TEST(Sari, PredictionEqualToReference) {
  std::mt19937_64 rng(29);
  for (int c = 0; c < 500; ++c) {
    const auto src = testutil::random_seq(rng, 8, 4, 1);
    const auto ref = testutil::random_seq(rng, 8, 4, 1);
    const std::vector<TokenSeq> refs = {ref};
    const auto s = rapt::sari_sentence(src, ref, refs);
    for (int n = 1; n <= 4; ++n) {
      const bool src_grams = src.size() >= static_cast<std::size_t>(n);
      const bool ref_grams = ref.size() >= static_cast<std::size_t>(n);
      const auto src_p = rapt::ngrams(src, n), ref_p = rapt::ngrams(ref, n);
      bool any_kept = false, any_added = false;
      for (const auto& [g, _] : ref_p.counts) (src_p.counts.contains(g) ? any_kept : any_added) = true;
      if (src_grams && ref_grams && any_kept) {
        EXPECT_DOUBLE_EQ(s.keep_by_order[n - 1], 1.0);
      }
      if (any_added) {
        EXPECT_DOUBLE_EQ(s.add_by_order[n - 1], 1.0);
      }
    }
  }
}

TEST(Sari, IdenticalSentenceKeepsEverything) {
  const TokenSeq s{"a", "b"};
  const std::vector<TokenSeq> refs = {s};
  const auto score = rapt::sari_sentence(s, s, refs);
  EXPECT_DOUBLE_EQ(score.keep, 1.0);
}

TEST(Sari, MatchesDefinitionOracle) {
  std::mt19937_64 rng(31);
  for (int c = 0; c < 2000; ++c) {
    const auto s = testutil::random_words(rng, 7, 3, 1);
    const auto p = testutil::random_words(rng, 7, 3);
    const auto r = testutil::random_words(rng, 7, 3, 1);
    const std::vector<TokenSeq> refs = {TokenSeq(r)};
    const double got = rapt::sari_sentence(TokenSeq(s), TokenSeq(p), refs).score;
    EXPECT_NEAR(got, oracle::sari(s, p, r), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(Sari, MultipleReferencesStayInRange) {
  std::mt19937_64 rng(37);
  for (int c = 0; c < 500; ++c) {
    const auto s = testutil::random_seq(rng, 7, 3, 1);
    const auto p = testutil::random_seq(rng, 7, 3);
    const std::vector<TokenSeq> refs = {testutil::random_seq(rng, 7, 3, 1), testutil::random_seq(rng, 7, 3, 1)};
    const auto score = rapt::sari_sentence(s, p, refs);
    for (double v : {score.keep, score.del, score.add, score.score}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
  }
}

// Similarity and reports ---------------------------------------------------------

TEST(Similarity, Cases) {
  std::vector<rapt::VectorPair> same = {{{1, 2, 3}, {1, 2, 3}}, {{0, 1}, {0, 5}}};
  EXPECT_NEAR(rapt::semantic_similarity(same).percent, 100.0, 1e-9);
  std::vector<rapt::VectorPair> ortho = {{{1, 0}, {0, 1}}};
  EXPECT_NEAR(rapt::semantic_similarity(ortho).percent, 0.0, 1e-12);
  std::vector<rapt::VectorPair> anti = {{{1, 0}, {-1, 0}}};
  EXPECT_NEAR(rapt::semantic_similarity(anti).percent, -100.0, 1e-12);
}

TEST(Similarity, ZeroVectorsExcluded) {
  std::vector<rapt::VectorPair> v = {{{0, 0}, {1, 0}}, {{1, 0}, {1, 0}}};
  const auto r = rapt::semantic_similarity(v);
  EXPECT_EQ(r.excluded, std::vector<std::size_t>{0});
  EXPECT_NEAR(r.percent, 100.0, 1e-12);
}

TEST(EvaluateAll, CopyRunPattern) {
  std::vector<EvalRecord> records = {rec({"how", "do", "i", "learn"}, {"how", "do", "i", "learn"},
                                         {"what", "is", "the", "way", "to", "learn"}),
                                     rec({"why", "is", "it", "blue"}, {"why", "is", "it", "blue"},
                                         {"what", "makes", "it", "blue"})};
  std::vector<rapt::VectorPair> vectors = {{{1, 2}, {1, 2}}, {{3, 1}, {3, 1}}};
  const auto r = rapt::evaluate_all(records, vectors);
  EXPECT_EQ(r.self_bleu, 100.0);
  EXPECT_EQ(r.self_ter, 0.0);
  ASSERT_TRUE(r.bert.has_value());
  EXPECT_NEAR(*r.bert, 100.0, 1e-9);
}

TEST(EvaluateAll, GroundTruthBleuIs100) {
  std::vector<EvalRecord> records = {rec({"a", "b", "c"}, {"d", "e", "f", "g"}, {"d", "e", "f", "g"})};
  EXPECT_EQ(rapt::evaluate_all(records, {}).bleu, 100.0);
  EXPECT_FALSE(rapt::evaluate_all(records, {}).bert.has_value());
}

TEST(EvaluateAll, FieldsEqualMemberMetrics) {
  std::vector<EvalRecord> records = {rec({"a", "b", "c", "d"}, {"a", "b", "x", "d"}, {"a", "y", "c", "d"}),
                                     rec({"e", "f", "g"}, {"g", "f", "e"}, {"e", "f", "h"})};
  const auto r = rapt::evaluate_all(records, {});
  std::vector<BleuPair> pairs;
  for (const auto& x : records) pairs.push_back({x.prediction, x.references});
  EXPECT_EQ(r.bleu, rapt::bleu_corpus(pairs));
  EXPECT_EQ(r.self_bleu, rapt::self_bleu(records));
  EXPECT_EQ(r.self_ter, rapt::self_ter(records).percent);
  EXPECT_EQ(r.sari, rapt::sari_corpus(records));
  EXPECT_DOUBLE_EQ(r.ibleu, rapt::ibleu(r.bleu, r.self_bleu));
  EXPECT_EQ(r.corpus_size, 2u);
}

TEST(EvaluateAll, AggregatesRecordErrors) {
  std::vector<EvalRecord> records = {{{"a"}, {"a"}, {}}, rec({"b"}, {"b"}, {"b"})};
  std::vector<rapt::VectorPair> vectors = {{{1}, {1}}};
  try {
    rapt::evaluate_all(records, vectors);
    FAIL() << "expected EvaluationError";
  } catch (const rapt::EvaluationError& e) {
    EXPECT_GE(e.errors().size(), 2u);
  }
}

TEST(EvaluateAll, PercentRangesOnFuzz) {
  std::mt19937_64 rng(41);
  for (int c = 0; c < 10000; ++c) {
    std::vector<EvalRecord> records;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      records.push_back(rec(testutil::random_seq(rng, 6, 4, 1), testutil::random_seq(rng, 6, 4),
                            testutil::random_seq(rng, 6, 4, 1)));
    }
    const auto r = rapt::evaluate_all(records, {});
    for (double v : {r.bleu, r.self_bleu, r.sari}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0 + 1e-9);
    }
    EXPECT_GE(r.self_ter, 0.0);
    EXPECT_GE(r.ibleu, -30.0 - 1e-9);
    EXPECT_LE(r.ibleu, 70.0 + 1e-9);
  }
}

TEST(FormatPercent, RoundsHalfToEven) {
  EXPECT_EQ(rapt::format_percent(32.785), "32.78");  // binary value sits below the tie
  EXPECT_EQ(rapt::format_percent(0.125), "0.12");
  EXPECT_EQ(rapt::format_percent(0.375), "0.38");
  EXPECT_EQ(rapt::format_percent(-0.001), "0.00");
  EXPECT_EQ(rapt::format_percent(100.0), "100.00");
  EXPECT_EQ(rapt::format_percent(-7.054), "-7.05");
}

TEST(Report, CsvColumnOrder) {
  rapt::MetricReport m;
  m.bert = 100.0;
  m.bleu = 32.78;
  m.self_bleu = 100.0;
  m.ibleu = rapt::ibleu(32.78, 100.0);
  m.corpus_size = 3;
  const auto csv = rapt::report_csv({{"Copy", m}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method,BERT,Self-TER,Self-BLEU,BLEU,iBLEU,SARI,normalization,corpus_size");
  EXPECT_NE(csv.find("Copy,100.00,0.00,100.00,32.78,-7.05,0.00,nfc+lower+punct+ws,3"), std::string::npos);
}
