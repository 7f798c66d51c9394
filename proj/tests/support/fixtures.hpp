#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsm/core/random.hpp"
#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"
#include "dsm/llm/mock_backend.hpp"

namespace dsm::testkit {

/// Deterministic 40-hex document id derived from `n`.
DocId doc_id_for(int n);

/// Random values for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return rng_.below(n); }
  bool coin(double p = 0.5);
  double unit();
  int range(int lo, int hi);  // inclusive

  std::string word();
  /// Words joined by random separators (spaces, punctuation, mixed case).
  std::string phrase(std::size_t max_words);
  /// Arbitrary bytes-ish text including quotes, braces and non-ASCII.
  std::string noise(std::size_t max_len);

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[rng_.below(v.size())];
  }

  DatasetMention mention();
  MentionBlock block();
  PageRecord page();
  DocumentRecord document();
  GroundTruthRecord ground_truth();
  AgentAssessment assessment();

  SeededRng& rng() { return rng_; }

 private:
  SeededRng rng_;
};

struct ScriptedMention {
  std::string raw_name;
  bool judge_valid = true;
  bool agent_valid = true;
};

struct ScriptedBlock {
  std::string sentence;
  std::vector<ScriptedMention> mentions;
};

struct ScriptedPage {
  DocId doc_id;
  int page = 1;
  std::vector<ScriptedBlock> blocks;  // empty: a page without mentions
};

/// Pages plus a mock script answering every extractor, judge and reasoner
/// request the pipeline will make for them.
struct ScriptedCorpus {
  std::vector<PageRecord> pages;
  std::vector<Json> script;  // mock script lines {stage, input, response}

  void install(llm::MockBackend& backend) const;
  void write_script(const std::filesystem::path& file) const;
};

ScriptedCorpus make_scripted_corpus(const std::vector<ScriptedPage>& spec);

/// `judge_valid` mentions pass the judge, `invalidated` of them are then
/// rejected by the reasoner; `judge_rejected` extra mentions fail the judge.
/// Mentions are spread five per page over two sentences.
ScriptedCorpus make_retention_corpus(std::size_t judge_valid, std::size_t invalidated,
                                     std::size_t judge_rejected);

}  // namespace dsm::testkit
