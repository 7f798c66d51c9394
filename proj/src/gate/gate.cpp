#include "dsm/gate/gate.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <future>

#include "dsm/core/error.hpp"
#include "dsm/core/http.hpp"
#include "dsm/evalkit/metric.hpp"

namespace dsm::gate {

namespace {

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::vector<std::string> default_triggers() {
  return {"data",     "dataset",   "datasets",  "database", "databases", "survey",
          "surveys",  "census",    "censuses",  "records",  "register",  "registry",
          "statistics", "inventory", "imagery", "index",    "indicators", "panel data",
          "time series", "microdata"};
}

KeywordGate::KeywordGate(std::vector<std::string> triggers) : triggers_(std::move(triggers)) {
  for (const auto& t : triggers_) {
    auto w = words(t);
    if (!w.empty()) trigger_words_.push_back(std::move(w));
  }
}

KeywordGate KeywordGate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read trigger file " + path.string());
  std::vector<std::string> triggers;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    triggers.push_back(line.substr(first));
  }
  return KeywordGate(std::move(triggers));
}

double KeywordGate::score_page(std::string_view text) const {
  const auto page = words(text);
  for (const auto& trigger : trigger_words_) {
    if (trigger.size() > page.size()) continue;
    for (std::size_t i = 0; i + trigger.size() <= page.size(); ++i) {
      if (std::equal(trigger.begin(), trigger.end(), page.begin() + static_cast<long>(i))) {
        return 1.0;
      }
    }
  }
  return 0.0;
}

double RemoteGate::parse_score(std::string_view body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::MalformedScore, std::string("unreadable score: ") + e.what());
  }
  const Json* v = &j;
  if (j.is_object()) {
    if (j.contains("score")) {
      v = &j["score"];
    } else if (j.contains("scores") && j["scores"].is_array() && j["scores"].size() == 1) {
      v = &j["scores"][0];
    } else {
      throw Error(ErrorCode::MalformedScore, "object without score");
    }
  } else if (j.is_array()) {
    if (j.size() != 1) throw Error(ErrorCode::MalformedScore, "expected exactly one score");
    v = &j[0];
  }
  if (!v->is_number()) throw Error(ErrorCode::MalformedScore, "score is not a number");
  const double s = v->get<double>();
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::MalformedScore, "score outside [0,1]: " + v->dump());
  }
  return s;
}

double RemoteGate::score_page(std::string_view text) const {
  const auto r = http::post(url_, text, "text/plain; charset=utf-8", {}, {.timeout = timeout_});
  if (r.status != 200) {
    throw Error(ErrorCode::NetworkError, "gate endpoint returned " + std::to_string(r.status))
        .with_http_status(r.status);
  }
  return parse_score(r.body);
}

Json encode(const GateDecision& d) {
  Json j{{"doc_id", d.doc_id.str()},
         {"page_number", d.page_number},
         {"score", d.score},
         {"threshold", d.threshold},
         {"passed", d.passed}};
  if (d.error) j["error"] = *d.error;
  return j;
}

GateDecision decode_decision(const Json& j) {
  GateDecision d;
  d.doc_id = DocId::parse(j.at("doc_id").get<std::string>());
  d.page_number = j.at("page_number").get<int>();
  d.score = j.at("score").get<double>();
  d.threshold = j.at("threshold").get<double>();
  d.passed = j.at("passed").get<bool>();
  d.error = optional_text(j, "error");
  return d;
}

FilterResult filter_pages(std::span<const PageRecord> pages, const PageGate& gate,
                          double threshold, std::size_t width) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "threshold must lie in [0,1]");
  }
  width = std::max<std::size_t>(1, width);

  auto decide = [&](const PageRecord& p) {
    GateDecision d{p.doc_id, p.page_number, 0.0, threshold, false, std::nullopt};
    try {
      d.score = gate.score_page(p.text);
    } catch (const Error& e) {
      d.score = 1.0;
      d.error = e.what();
    }
    d.passed = d.score >= threshold;
    return d;
  };

  FilterResult out;
  out.decisions.reserve(pages.size());
  for (std::size_t start = 0; start < pages.size(); start += width) {
    const auto end = std::min(pages.size(), start + width);
    if (width == 1) {
      out.decisions.push_back(decide(pages[start]));
      continue;
    }
    std::vector<std::future<GateDecision>> inflight;
    for (auto i = start; i < end; ++i) {
      inflight.push_back(std::async(std::launch::async, decide, std::cref(pages[i])));
    }
    for (auto& f : inflight) out.decisions.push_back(f.get());
  }
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (out.decisions[i].passed) out.passed.push_back(pages[i]);
  }
  return out;
}

GateMetrics evaluate_gate(std::span<const GateDecision> decisions,
                          const std::map<PageKey, bool>& gold) {
  GateMetrics m;
  for (const auto& d : decisions) {
    auto it = gold.find(PageKey{d.doc_id, d.page_number});
    if (it == gold.end()) {
      throw Error(ErrorCode::MissingLabel,
                  d.doc_id.str() + " page " + std::to_string(d.page_number));
    }
    const bool truth = it->second;
    if (d.passed && truth) ++m.tp;
    if (d.passed && !truth) ++m.fp;
    if (!d.passed && truth) ++m.fn;
    if (!d.passed && !truth) ++m.tn;
  }
  m.precision = eval::precision_from(m.tp, m.fp, m.fn);
  m.recall = eval::recall_from(m.tp, m.fp, m.fn);
  m.f1 = eval::f_beta(m.precision, m.recall, 1.0);
  return m;
}

std::unique_ptr<PageGate> make_gate(std::string_view kind, const std::filesystem::path& triggers_file,
                                    const std::string& endpoint) {
  if (kind == "always_pass") return std::make_unique<AlwaysPassGate>();
  if (kind == "keyword_heuristic" || kind == "keyword") {
    if (triggers_file.empty()) return std::make_unique<KeywordGate>(default_triggers());
    return std::make_unique<KeywordGate>(KeywordGate::from_file(triggers_file));
  }
  if (kind == "remote_endpoint" || kind == "remote") {
    if (endpoint.empty()) throw Error(ErrorCode::ConfigError, "remote gate needs an endpoint");
    return std::make_unique<RemoteGate>(endpoint);
  }
  throw Error(ErrorCode::ConfigError, "unknown gate kind '" + std::string(kind) + "'");
}

}  // namespace dsm::gate
