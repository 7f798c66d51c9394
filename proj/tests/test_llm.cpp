#include <gtest/gtest.h>

#include "dsm/core/digest.hpp"
#include "dsm/core/error.hpp"
#include "dsm/llm/chat.hpp"
#include "dsm/llm/mock_backend.hpp"
#include "dsm/llm/openai_backend.hpp"
#include "dsm/llm/payload.hpp"
#include "dsm/llm/prompts.hpp"
#include "fixtures.hpp"
#include "stub_server.hpp"

using namespace dsm;
using namespace dsm::llm;
using testkit::Gen;
using testkit::StubReply;
using testkit::StubRequest;
using testkit::StubServer;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dsm::Error thrown";
  return ErrorCode::Io;
}

ChatRequest request(TemplateId id, std::string user) {
  ChatRequest r;
  r.system_prompt = "system";
  r.user_content = std::move(user);
  r.template_id = id;
  return r;
}

const Sleeper kNoSleep = [](std::chrono::milliseconds) {};

std::string chat_reply(const std::string& content) {
  return Json{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
              {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 3}}}}
      .dump();
}

OpenAIBackend stub_backend(const StubServer& s) {
  OpenAIBackendConfig c;
  c.base_url = s.url();
  c.api_key = "k";
  c.timeout = std::chrono::seconds(5);
  return OpenAIBackend(c);
}

}  // namespace

TEST(Prompts, ShippedFilesAreFrozen) {
  const auto lib = PromptLibrary::load(testkit::prompts_dir());
  EXPECT_EQ(sha256_hex(lib.get(TemplateId::extractor).body),
            "8cc74c0693473be3afac92b5018fcb56d6ea45f9e5f5c07758f18c1163fecf0f");
  EXPECT_EQ(sha256_hex(lib.get(TemplateId::judge).body),
            "9a9836676bd7628bc66be07dbb6255e932b1912a76b362ee5c2c058b68ad1321");
  EXPECT_EQ(sha256_hex(lib.get(TemplateId::reasoner).body),
            "1f96064bc035f0129885fb62061dd95ddaa6ec4a9ee98cf75745ba0fd4270a31");
}

TEST(Prompts, RenderKeepsSystemPromptAndCarriesUserContent) {
  const auto lib = PromptLibrary::load(testkit::prompts_dir());
  const auto r = lib.render(TemplateId::extractor, {{"page_text", "Page text."}});
  EXPECT_EQ(r.system, lib.get(TemplateId::extractor).body);
  EXPECT_EQ(r.user, "Page text.");
  EXPECT_EQ(code_of([&] { (void)lib.render("summarizer", {}); }), ErrorCode::UnknownTemplate);
  EXPECT_EQ(code_of([&] { (void)lib.render(TemplateId::judge, {{"page_text", "x"}}); }),
            ErrorCode::MissingField);
}

TEST(MockBackend, EchoesScriptedResponse) {
  MockBackend mock;
  mock.script_input(TemplateId::judge, "hello", "OK");
  const auto r = complete(request(TemplateId::judge, "hello"), mock, RetryPolicy{}, nullptr, kNoSleep);
  EXPECT_EQ(r.text, "OK");
  EXPECT_EQ(mock.call_count(), 1u);
  EXPECT_EQ(code_of([&] { complete(request(TemplateId::judge, "other"), mock, {}, nullptr, kNoSleep); }),
            ErrorCode::UnscriptedInput);
}

TEST(MockBackend, DeterministicForSameDigest) {
  MockBackend mock;
  Gen g(5);
  for (int i = 0; i < 200; ++i) mock.script_input(TemplateId::extractor, "in" + std::to_string(i), g.noise(20));
  for (int i = 0; i < 200; ++i) {
    const auto req = request(TemplateId::extractor, "in" + std::to_string(i));
    EXPECT_EQ(mock.send(req).text, mock.send(req).text);
  }
}

TEST(MockBackend, LoadsScriptFile) {
  testkit::TempDir dir;
  testkit::write_file(dir / "s.jsonl",
                      R"({"stage":"judge","input":"a","response":"x"})" "\n"
                      R"({"stage":"reasoner","input":"b","response":{"datasets":[]}})" "\n"
                      R"({"stage":"extractor","input":"c","error_status":500})" "\n");
  MockBackend mock;
  mock.load_script(dir / "s.jsonl");
  EXPECT_EQ(mock.send(request(TemplateId::judge, "a")).text, "x");
  EXPECT_EQ(mock.send(request(TemplateId::reasoner, "b")).text, R"({"datasets":[]})");
  EXPECT_EQ(code_of([&] { mock.send(request(TemplateId::extractor, "c")); }), ErrorCode::BackendError);
}

TEST(Complete, TwoThrottlesThenSuccess) {
  int n = 0;
  StubServer server([&](const StubRequest&) {
    if (++n <= 2) return StubReply{429, R"({"error":"rate"})"};
    return StubReply{200, chat_reply("fine")};
  });
  auto backend = stub_backend(server);
  RetryTelemetry t;
  const auto r = complete(request(TemplateId::judge, "x"), backend, RetryPolicy{}, &t, kNoSleep);
  EXPECT_EQ(r.text, "fine");
  EXPECT_EQ(t.retries, 2);
  EXPECT_EQ(t.attempts, 3);
  ASSERT_TRUE(r.token_usage);
  EXPECT_EQ(r.token_usage->prompt_tokens, 11);
}

TEST(Complete, FiveServerErrorsExhaustRetries) {
  StubServer server([](const StubRequest&) { return StubReply{500, "{}"}; });
  auto backend = stub_backend(server);
  RetryTelemetry t;
  EXPECT_EQ(code_of([&] { complete(request(TemplateId::judge, "x"), backend, RetryPolicy{}, &t, kNoSleep); }),
            ErrorCode::RetriesExhausted);
  EXPECT_EQ(server.hits(), 5u);
  EXPECT_EQ(t.attempts, 5);
}

TEST(Complete, ClientErrorsAreNotRetried) {
  StubServer server([](const StubRequest&) { return StubReply{401, R"({"error":"key"})"}; });
  auto backend = stub_backend(server);
  EXPECT_EQ(code_of([&] { complete(request(TemplateId::judge, "x"), backend, RetryPolicy{}, nullptr, kNoSleep); }),
            ErrorCode::BackendError);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(Complete, SendsChatCompletionsBody) {
  Json body;
  std::string auth;
  StubServer server([&](const StubRequest& r) {
    body = Json::parse(r.body);
    auth = r.headers.at("Authorization");
    return StubReply{200, chat_reply("ok")};
  });
  auto backend = stub_backend(server);
  auto req = request(TemplateId::extractor, "page");
  complete(req, backend, RetryPolicy{}, nullptr, kNoSleep);
  EXPECT_EQ(auth, "Bearer k");
  EXPECT_EQ(body["model"], std::string(kDefaultModel));
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["content"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_EQ(body["messages"][1]["content"], "page");
}

TEST(Complete, RejectsEmptyRequests) {
  MockBackend mock;
  EXPECT_EQ(code_of([&] { complete(request(TemplateId::judge, ""), mock, {}, nullptr, kNoSleep); }),
            ErrorCode::PreconditionViolated);
  EXPECT_EQ(mock.call_count(), 0u);
}

TEST(Payload, PublishedResponseInTaggedMode) {
  const auto text = testkit::read_file(testkit::fixtures_dir() / "reasoner_response.txt");
  const auto tagged = "<OUTPUTDATA>\n" + text.substr(text.find("```json")) + "\n</OUTPUTDATA>";
  const auto prose = text.substr(0, text.find("```json"));
  const Json j = extract_json_payload(prose + tagged, PayloadMode::tagged);
  EXPECT_EQ(j["datasets"][0]["invalid_reason"],
            "The raw_name is a report title and does not represent a dataset.");
  // As published the response has no tags; the tagged reader refuses it.
  EXPECT_EQ(code_of([&] { extract_json_payload(text, PayloadMode::tagged); }), ErrorCode::NoPayloadFound);
  EXPECT_EQ(extract_stage_payload(text), j);
}

TEST(Payload, DegenerateCases) {
  EXPECT_EQ(extract_json_payload("{}", PayloadMode::bare), Json::object());
  EXPECT_EQ(code_of([] { extract_json_payload("<OUTPUTDATA>```json\n```</OUTPUTDATA>", PayloadMode::tagged); }),
            ErrorCode::NoPayloadFound);
  EXPECT_EQ(code_of([] { extract_json_payload("<OUTPUTDATA>{}</OUTPUTDATA><OUTPUTDATA>{}</OUTPUTDATA>",
                                              PayloadMode::tagged); }),
            ErrorCode::MultiplePayloads);
  EXPECT_EQ(code_of([] { extract_json_payload("<OUTPUTDATA>{}", PayloadMode::tagged); }),
            ErrorCode::NoPayloadFound);
  EXPECT_EQ(code_of([] { extract_json_payload("no json here", PayloadMode::fenced); }),
            ErrorCode::NoPayloadFound);
}

TEST(Payload, TrailingCommasGetOneLenientPass) {
  EXPECT_EQ(extract_json_payload("```json\n{\"a\": [1, 2,],}\n```", PayloadMode::fenced),
            Json::parse(R"({"a":[1,2]})"));
  EXPECT_EQ(extract_json_payload(R"({"s": "x,}"})", PayloadMode::bare)["s"], "x,}");
}

TEST(Payload, ParseErrorsReportOffsetIntoReply) {
  const std::string text = "prefix text\n```json\n{\"a\": tru}\n```";
  try {
    extract_json_payload(text, PayloadMode::fenced);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    ASSERT_TRUE(e.byte_offset());
    EXPECT_GT(*e.byte_offset(), text.find('{'));
    EXPECT_LT(*e.byte_offset(), text.size());
  }
}

TEST(Payload, TaggedBeatsFenced) {
  const std::string text = "```json\n{\"from\":\"fence\"}\n```\n<OUTPUTDATA>{\"from\":\"tag\"}</OUTPUTDATA>";
  EXPECT_EQ(extract_stage_payload(text)["from"], "tag");
}

TEST(Payload, TaggedSurvivesArbitraryProseProperty) {
  Gen g(2718);
  for (int i = 0; i < 1000; ++i) {
    Json payload{{"datasets", Json::array()}, {"n", i}};
    for (int k = g.range(0, 3); k > 0; --k) {
      payload["datasets"].push_back(Json{{"raw_name", g.noise(6) + "x"}, {"valid", g.coin()}});
    }
    std::string inner = payload.dump(g.coin() ? 2 : -1);
    if (g.coin()) inner = "```json\n" + inner + "\n```";
    auto wrap = [&] {
      std::string s = g.noise(40);
      // prose may not itself contain a tag pair
      for (auto pos = s.find("OUTPUTDATA"); pos != std::string::npos; pos = s.find("OUTPUTDATA")) s.erase(pos, 10);
      return s;
    };
    const std::string text = wrap() + "<OUTPUTDATA>" + (g.coin() ? "\n" : "") + inner + "</OUTPUTDATA>" + wrap();
    Json got;
    ASSERT_NO_THROW(got = extract_json_payload(text, PayloadMode::tagged)) << text;
    ASSERT_EQ(got, payload) << text;
  }
}
