#include "fixtures.hpp"

#include <fstream>

#include "dsm/core/digest.hpp"
#include "dsm/core/jsonl.hpp"
#include "dsm/weaksup/stages.hpp"

namespace dsm::testkit {

DocId doc_id_for(int n) { return DocId::parse(sha256_hex("doc-" + std::to_string(n)).substr(0, 40)); }

bool Gen::coin(double p) { return unit() < p; }

double Gen::unit() { return static_cast<double>(rng_.below(1'000'000)) / 1'000'000.0; }

int Gen::range(int lo, int hi) { return lo + static_cast<int>(rng_.below(hi - lo + 1)); }

namespace {
const std::vector<std::string> kWords = {
    "data",   "survey",  "household", "census", "soil",    "fao",     "world", "bank",
    "index",  "ghana",   "2005",      "sam",    "climate", "water",   "rain",  "model",
    "report", "uganda",  "national",  "panel",  "living",  "measure", "dhs",   "lsms",
    "a",      "of",      "the",       "from",   "for",     "x1",      "m2",    "zz"};
const std::vector<std::string> kSeparators = {" ", "  ", "-", ", ", "/", " (", ") ", "\t", "_",
                                              "—", ".", "'s "};
const std::vector<std::string> kNoise = {"\"", "{", "}", "[", "]", "\\", "\n", "é", "日本",
                                         "<", ">", "```", "OUTPUT", ",", ":", " ", "a", "7"};
}  // namespace

std::string Gen::word() {
  std::string w = pick(kWords);
  if (coin(0.2)) {
    for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (coin(0.2)) {
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  }
  return w;
}

std::string Gen::phrase(std::size_t max_words) {
  const std::size_t n = below(max_words + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += pick(kSeparators);
    out += word();
  }
  return out;
}

std::string Gen::noise(std::size_t max_len) {
  const std::size_t n = below(max_len + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += coin(0.6) ? word() + " " : pick(kNoise);
  return out;
}

namespace {
template <class E>
std::optional<E> maybe_enum(Gen& g, std::initializer_list<E> values) {
  if (g.coin(0.3)) return std::nullopt;
  std::vector<E> v(values);
  return g.pick(v);
}

std::optional<std::string> maybe_text(Gen& g) {
  if (g.coin(0.4)) return std::nullopt;
  return g.phrase(3) + "x";
}
}  // namespace

DatasetMention Gen::mention() {
  DatasetMention m;
  m.raw_name = word() + (coin() ? " " + phrase(4) : "");
  m.mentioned_in = phrase(12) + " " + noise(4) + m.raw_name;
  m.harmonized_name = coin() ? std::optional<std::string>(m.raw_name) : std::nullopt;
  m.acronym = maybe_text(*this);
  m.context = maybe_enum(*this, {Context::primary, Context::supporting, Context::background});
  m.specificity = maybe_enum(*this, {Specificity::properly_named, Specificity::descriptive_but_unnamed,
                                     Specificity::vague_generic});
  m.relevance = maybe_enum(*this, {Relevance::directly_relevant, Relevance::indirectly_relevant,
                                   Relevance::not_relevant});
  m.producer = maybe_text(*this);
  m.data_type = maybe_text(*this);
  m.year = coin() ? std::optional<std::string>(std::to_string(range(1950, 2030))) : std::nullopt;
  return m;
}

MentionBlock Gen::block() {
  MentionBlock b;
  b.mentioned_in = "In " + phrase(10) + noise(3);
  b.source = doc_id_for(range(0, 50));
  b.page = range(1, 400);
  const std::size_t n = below(4);
  for (std::size_t i = 0; i < n; ++i) {
    auto m = mention();
    m.mentioned_in = b.mentioned_in;
    b.datasets.push_back(m);
  }
  return b;
}

PageRecord Gen::page() { return PageRecord{doc_id_for(range(0, 50)), range(1, 400), noise(30)}; }

DocumentRecord Gen::document() {
  DocumentRecord d;
  d.doc_id = doc_id_for(range(0, 1000));
  d.title = word() + " " + phrase(8) + noise(2);
  d.source_corpus = pick(std::vector<SourceCorpus>{SourceCorpus::one_earth, SourceCorpus::prwp,
                                                   SourceCorpus::other});
  if (coin()) d.year = range(1990, 2026);
  d.is_open_access = coin();
  if (coin()) d.pdf_url = "https://example.org/" + word() + ".pdf";
  if (coin()) d.citation_count = range(0, 100000);
  return d;
}

GroundTruthRecord Gen::ground_truth() {
  GroundTruthRecord r;
  r.doc_id = doc_id_for(range(0, 50));
  r.page_number = range(1, 400);
  const std::size_t n = below(4);
  for (std::size_t i = 0; i < n; ++i) {
    auto name = phrase(4) + "n" + std::to_string(i);
    r.gold_names.push_back(name);
    if (coin()) {
      GoldLabels l;
      l.context = maybe_enum(*this, {Context::primary, Context::supporting, Context::background});
      l.specificity = maybe_enum(*this, {Specificity::properly_named,
                                         Specificity::descriptive_but_unnamed,
                                         Specificity::vague_generic});
      r.labels[name] = l;
    }
  }
  return r;
}

AgentAssessment Gen::assessment() {
  auto m = mention();
  if (coin()) return AgentAssessment::make_invalid(m, "reason " + phrase(5) + ".");
  return AgentAssessment::make_valid(
      m, pick(std::vector<Specificity>{Specificity::properly_named,
                                       Specificity::descriptive_but_unnamed,
                                       Specificity::vague_generic}),
      pick(std::vector<Context>{Context::primary, Context::supporting, Context::background}));
}

// ---------------------------------------------------------------------------

void ScriptedCorpus::install(llm::MockBackend& backend) const {
  for (const auto& line : script) {
    backend.script_input(llm::parse_template_id(line["stage"].get<std::string>()),
                         line["input"].get<std::string>(), line["response"].get<std::string>());
  }
}

void ScriptedCorpus::write_script(const std::filesystem::path& file) const {
  write_jsonl(file, script);
}

ScriptedCorpus make_scripted_corpus(const std::vector<ScriptedPage>& spec) {
  ScriptedCorpus out;
  for (const auto& sp : spec) {
    PageRecord page{sp.doc_id, sp.page, ""};
    Json groups = Json::array();
    for (const auto& b : sp.blocks) {
      page.text += b.sentence + "\n";
      Json datasets = Json::array();
      for (const auto& m : b.mentions) {
        datasets.push_back(Json{{"raw_name", m.raw_name},
                                {"mentioned_in", b.sentence},
                                {"context", "primary"},
                                {"specificity", "properly_named"},
                                {"relevance", "directly_relevant"}});
      }
      groups.push_back(Json{{"mentioned_in", b.sentence}, {"datasets", datasets}});
    }
    if (page.text.empty()) page.text = "This page discusses governance reforms only.\n";
    out.pages.push_back(page);

    const std::string reply =
        "```json\n" + Json{{"data_mentions", groups}}.dump(2) + "\n```";
    out.script.push_back(Json{{"stage", "extractor"}, {"input", page.text}, {"response", reply}});

    // Judge and reasoner inputs are the blocks exactly as the pipeline forms them.
    const auto blocks = weaksup::parse_extraction_reply(reply, page);
    for (const auto& block : blocks) {
      const ScriptedBlock* sb = nullptr;
      for (const auto& b : sp.blocks) {
        if (b.sentence == block.mentioned_in) sb = &b;
      }
      Json verdicts = Json::array();
      MentionBlock passed = block;
      passed.datasets.clear();
      std::vector<const ScriptedMention*> passed_spec;
      for (std::size_t i = 0; i < block.datasets.size(); ++i) {
        const auto& m = sb->mentions[i];
        verdicts.push_back(Json{{"raw_name", m.raw_name},
                                {"valid", m.judge_valid},
                                {"reason", m.judge_valid ? "Names a concrete dataset."
                                                         : "Refers to an organization."}});
        if (m.judge_valid) {
          passed.datasets.push_back(block.datasets[i]);
          passed_spec.push_back(&m);
        }
      }
      out.script.push_back(Json{{"stage", "judge"},
                                {"input", weaksup::block_user_content(block)},
                                {"response", verdicts.dump()}});
      if (passed.datasets.empty()) continue;
      Json assessed = Json::array();
      for (const auto* m : passed_spec) {
        Json a{{"raw_name", m->raw_name}, {"valid", m->agent_valid}};
        if (m->agent_valid) {
          a["specificity"] = "properly_named";
          a["context"] = "supporting";
        } else {
          a["specificity"] = nullptr;
          a["context"] = nullptr;
          a["invalid_reason"] = "The raw_name is a report title and does not represent a dataset.";
        }
        assessed.push_back(a);
      }
      const std::string reason_reply = "Strategy: check each name.\n<OUTPUTDATA>\n```json\n" +
                                       Json{{"datasets", assessed}}.dump(2) +
                                       "\n```\n</OUTPUTDATA>";
      out.script.push_back(Json{{"stage", "reasoner"},
                                {"input", weaksup::block_user_content(passed)},
                                {"response", reason_reply}});
    }
  }
  return out;
}

ScriptedCorpus make_retention_corpus(std::size_t judge_valid, std::size_t invalidated,
                                     std::size_t judge_rejected) {
  std::vector<ScriptedMention> all;
  for (std::size_t i = 0; i < judge_valid; ++i) {
    all.push_back({"Dataset " + std::to_string(i) + " Survey", true, i >= invalidated});
  }
  for (std::size_t i = 0; i < judge_rejected; ++i) {
    all.push_back({"Agency " + std::to_string(i), false, false});
  }
  std::vector<ScriptedPage> pages;
  for (std::size_t start = 0; start < all.size(); start += 5) {
    const int n = static_cast<int>(pages.size());
    ScriptedPage p{doc_id_for(n / 3), n % 3 + 1, {}};
    for (std::size_t i = start; i < std::min(all.size(), start + 5); ++i) {
      const std::size_t b = (i - start) < 3 ? 0 : 1;
      if (p.blocks.size() <= b) {
        p.blocks.push_back({"Sentence " + std::to_string(b) + " of page " + std::to_string(n) +
                                " cites",
                            {}});
      }
      p.blocks[b].mentions.push_back(all[i]);
      p.blocks[b].sentence += " " + all[i].raw_name;
    }
    pages.push_back(std::move(p));
  }
  return make_scripted_corpus(pages);
}

}  // namespace dsm::testkit
