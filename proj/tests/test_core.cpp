#include <gtest/gtest.h>

#include "dsm/core/digest.hpp"
#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"
#include "dsm/core/random.hpp"
#include "dsm/core/retry.hpp"
#include "dsm/core/serialize.hpp"
#include "fixtures.hpp"
#include "stub_server.hpp"

using namespace dsm;
using dsm::testkit::Gen;
using dsm::testkit::TempDir;

namespace {

Json report_title_input() {
  return Json::parse(testkit::read_file(testkit::fixtures_dir() / "reasoner_block.json"));
}

template <class T>
void expect_round_trip(const T& v) {
  const Json j = encode(v);
  Warnings w;
  const T back = decode<T>(Json::parse(j.dump()), &w);
  EXPECT_EQ(back, v) << j.dump();
  EXPECT_TRUE(w.empty()) << j.dump();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dsm::Error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(DocId, AcceptsFortyLowercaseHex) {
  const std::string hex(40, 'a');
  EXPECT_EQ(DocId::parse(hex).str(), hex);
  EXPECT_FALSE(DocId::is_valid(std::string(39, 'a')));
  EXPECT_FALSE(DocId::is_valid(std::string(40, 'A')));
  EXPECT_FALSE(DocId::is_valid(std::string(39, 'a') + "g"));
  EXPECT_EQ(code_of([] { DocId::parse("xyz"); }), ErrorCode::InvalidRecord);
}

TEST(Enums, ParsingIsTotalOverDocumentedValues) {
  for (auto v : {"primary", "supporting", "background"}) EXPECT_TRUE(parse_context(v)) << v;
  for (auto v : {"properly_named", "descriptive_but_unnamed", "vague_generic"})
    EXPECT_TRUE(parse_specificity(v)) << v;
  for (auto v : {"directly_relevant", "indirectly_relevant", "not_relevant"})
    EXPECT_TRUE(parse_relevance(v)) << v;
  for (auto v : {"one_earth", "prwp", "other"}) EXPECT_TRUE(parse_source_corpus(v)) << v;
  for (auto v : {"main", "Primary", "", "primary ", "properly named"}) {
    EXPECT_FALSE(parse_context(v)) << v;
    EXPECT_FALSE(parse_specificity(v)) << v;
  }
}

TEST(Enums, RandomStringsOutsideValueSetAreRejected) {
  Gen g(11);
  const std::set<std::string> legal = {"primary", "supporting", "background"};
  for (int i = 0; i < 1000; ++i) {
    const auto s = g.phrase(2);
    EXPECT_EQ(parse_context(s).has_value(), legal.contains(s)) << s;
  }
}

TEST(ValidateMention, SpecExamples) {
  const Json ok{{"raw_name", "Global Fishing Watch"},
                {"mentioned_in", "x"},
                {"context", "primary"},
                {"specificity", "properly_named"}};
  EXPECT_TRUE(validate_mention(ok).empty());

  Json empty = ok;
  empty["raw_name"] = "";
  auto v = validate_mention(empty);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "raw_name empty");

  Json bad = ok;
  bad["context"] = "main";
  v = validate_mention(bad);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "context");
  EXPECT_EQ(v[0].message, "unknown context value");
}

TEST(ParseMentionBlock, ReportTitleBlock) {
  const auto b = parse_mention_block(report_title_input());
  ASSERT_EQ(b.datasets.size(), 1u);
  EXPECT_EQ(b.page, 11);
  EXPECT_EQ(b.datasets[0].mentioned_in, b.mentioned_in);
  EXPECT_EQ(b.datasets[0].producer, "Intergovernmental Panel on Climate Change");
  EXPECT_EQ(b.datasets[0].year, "2018");
  EXPECT_FALSE(b.datasets[0].specificity);
}

TEST(ParseMentionBlock, EmptyDatasetsAndMissingSentence) {
  Json j = report_title_input();
  j["datasets"] = Json::array();
  EXPECT_TRUE(parse_mention_block(j).datasets.empty());

  j = report_title_input();
  j.erase("mentioned_in");
  EXPECT_EQ(code_of([&] { parse_mention_block(j); }), ErrorCode::MissingField);
}

TEST(Decode, NoneAndNullMeanAbsent) {
  Json j{{"raw_name", "LSMS"}, {"mentioned_in", "s"}, {"acronym", "None"}, {"producer", nullptr}};
  const auto m = decode<DatasetMention>(j);
  EXPECT_FALSE(m.acronym);
  EXPECT_FALSE(m.producer);
}

TEST(Decode, UnknownKeysWarnAndBadEnumsThrow) {
  Json j{{"raw_name", "LSMS"}, {"mentioned_in", "s"}, {"colour", "red"}};
  Warnings w;
  decode<DatasetMention>(j, &w);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("colour"), std::string::npos);

  j.erase("colour");
  j["context"] = "main";
  EXPECT_EQ(code_of([&] { decode<DatasetMention>(j); }), ErrorCode::BadEnum);
}

TEST(AgentAssessment, CouplingEnforcedAtConstruction) {
  DatasetMention m{"IPCC Special Report", {}, {}, "s", {}, {}, {}, {}, {}, {}};
  const auto bad = AgentAssessment::make_invalid(m, "not a dataset");
  EXPECT_FALSE(bad.valid());
  EXPECT_FALSE(bad.specificity());
  EXPECT_FALSE(bad.context());
  EXPECT_EQ(code_of([&] { AgentAssessment::make_invalid(m, ""); }),
            ErrorCode::ValidityCouplingViolation);

  const auto good = AgentAssessment::make_valid(m, Specificity::properly_named, Context::background);
  EXPECT_TRUE(good.valid());
  EXPECT_FALSE(good.invalid_reason());

  Json j = encode(bad);
  j["context"] = "primary";
  EXPECT_EQ(code_of([&] { decode<AgentAssessment>(j); }), ErrorCode::ValidityCouplingViolation);
}

TEST(Serialization, RoundTripProperty) {
  Gen g(20240801);
  for (int i = 0; i < 1000; ++i) {
    expect_round_trip(g.document());
    expect_round_trip(g.page());
    expect_round_trip(g.mention());
    expect_round_trip(g.block());
    expect_round_trip(g.assessment());
    expect_round_trip(g.ground_truth());
    expect_round_trip(PredictionRecord{testkit::doc_id_for(i), i + 1, {g.phrase(3), g.phrase(2)}});
    const auto block = g.block();
    JudgedBlock jb{block, {}};
    for (const auto& d : block.datasets) {
      jb.verdicts.push_back(JudgeVerdict{d.raw_name, g.coin(), "because " + g.phrase(3),
                                         g.coin() ? std::optional<std::string>("2010") : std::nullopt,
                                         std::nullopt, g.coin() ? std::optional<std::string>("survey")
                                                                : std::nullopt});
    }
    expect_round_trip(jb);
    AssessedBlock ab{block.source, block.page, block.mentioned_in, {}};
    for (int k = g.range(0, 3); k > 0; --k) ab.assessments.push_back(g.assessment());
    expect_round_trip(ab);
    if (HasFailure()) return;
  }
}

TEST(Jsonl, WriteReadAndErrorsCarryLineNumbers) {
  TempDir dir;
  const auto file = dir / "pages.jsonl";
  std::vector<PageRecord> pages{{testkit::doc_id_for(1), 1, "one"}, {testkit::doc_id_for(1), 2, "två"}};
  write_records(file, pages);
  EXPECT_EQ(read_records<PageRecord>(file), pages);

  testkit::write_file(dir / "bad.jsonl", "{\"a\":1}\n\n{oops\n");
  try {
    read_jsonl(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, AppenderTruncatesPartialTail) {
  TempDir dir;
  const auto file = dir / "out.jsonl";
  std::uint64_t committed = 0;
  {
    JsonlAppender a(file);
    a.append(Json{{"n", 1}});
    a.flush();
    committed = a.offset();
    a.append(Json{{"n", 2}});
    a.flush();
  }
  testkit::write_file(file, testkit::read_file(file) + "{\"n\":3,\"trunc");
  JsonlAppender b(file);
  b.truncate_to(committed);
  b.append(Json{{"n", 4}});
  b.flush();
  EXPECT_EQ(testkit::read_file(file), "{\"n\":1}\n{\"n\":4}\n");
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SeededRng, DeterministicAndUnbiasedRange) {
  SeededRng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const auto bound = static_cast<std::uint64_t>(i % 97 + 1);
    const auto x = a.below(bound);
    EXPECT_EQ(x, b.below(bound));
    EXPECT_LT(x, bound);
  }
  SeededRng c(3);
  auto p = c.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], i);
}

TEST(Retry, BackoffDoublesAndCaps) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff(1).count(), 1000);
  EXPECT_EQ(p.backoff(2).count(), 2000);
  EXPECT_EQ(p.backoff(4).count(), 8000);
  EXPECT_EQ(p.backoff(10).count(), 60000);
}

TEST(Retry, HonorsRetryAfter) {
  RetryPolicy p;
  std::vector<std::chrono::milliseconds> slept;
  int calls = 0;
  const int v = with_retry(
      p,
      [&] {
        if (++calls == 1) {
          throw Error(ErrorCode::RateLimited, "slow down")
              .with_retry_after(std::chrono::milliseconds(7000));
        }
        return 5;
      },
      nullptr, [&](std::chrono::milliseconds d) { slept.push_back(d); });
  EXPECT_EQ(v, 5);
  ASSERT_EQ(slept.size(), 1u);
  EXPECT_EQ(slept[0].count(), 7000);
}

TEST(Retry, NeverExceedsAttemptBudgetProperty) {
  Gen g(99);
  for (int i = 0; i < 1000; ++i) {
    RetryPolicy p;
    p.max_attempts = g.range(1, 8);
    // scripted outcome sequence: transient, permanent or success
    std::vector<int> script;
    for (int k = g.range(0, 12); k > 0; --k) script.push_back(g.range(0, 9));
    int calls = 0;
    RetryTelemetry t;
    bool succeeded = false;
    try {
      with_retry(
          p,
          [&] {
            const int step = calls < static_cast<int>(script.size()) ? script[calls] : 9;
            ++calls;
            if (step < 6) throw Error(ErrorCode::NetworkError, "transient");
            if (step < 7) throw Error(ErrorCode::BackendError, "bad request").with_http_status(400);
            return 0;
          },
          &t, [](std::chrono::milliseconds) {});
      succeeded = true;
    } catch (const Error&) {
    }
    ASSERT_LE(calls, p.max_attempts);
    ASSERT_EQ(t.attempts, calls);
    ASSERT_EQ(t.delays.size(), static_cast<std::size_t>(calls - 1));
    if (succeeded) ASSERT_GE(script.size() + 1, static_cast<std::size_t>(calls));
  }
}

TEST(Retry, TransientClassification) {
  EXPECT_TRUE(is_transient(Error(ErrorCode::Timeout, "")));
  EXPECT_TRUE(is_transient(Error(ErrorCode::BackendError, "").with_http_status(503)));
  EXPECT_FALSE(is_transient(Error(ErrorCode::BackendError, "").with_http_status(401)));
  EXPECT_FALSE(is_transient(Error(ErrorCode::ParseError, "")));
}
