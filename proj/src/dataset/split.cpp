#include "dsm/dataset/split.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "dsm/core/error.hpp"
#include "dsm/core/random.hpp"

namespace dsm::dataset {

SplitCounts resolve_counts(const SplitSpec& spec, std::size_t n) {
  if (const auto* counts = std::get_if<SplitCounts>(&spec.sizes)) {
    if (counts->train + counts->val + counts->test > n) {
      throw Error(ErrorCode::InvalidSpec,
                  "requested " + std::to_string(counts->train + counts->val + counts->test) +
                      " records from a population of " + std::to_string(n));
    }
    return *counts;
  }
  const auto& r = std::get<SplitRatios>(spec.sizes);
  const double parts[3] = {r.train, r.val, r.test};
  double sum = 0.0;
  for (double p : parts) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidSpec, "negative ratio");
    sum += p;
  }
  if (sum > 1.0 + 1e-9) throw Error(ErrorCode::InvalidSpec, "ratios sum above 1");

  const auto total = static_cast<std::size_t>(std::floor(sum * static_cast<double>(n) + 1e-9));
  std::size_t sizes[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = parts[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainders[i] = quota - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3, [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (int k = 0; assigned < total && k < 3; ++k, ++assigned) ++sizes[order[k]];
  return SplitCounts{sizes[0], sizes[1], sizes[2]};
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec,
                           std::span<const std::string> group_keys) {
  const SplitCounts target = resolve_counts(spec, n);
  SeededRng rng(spec.seed);
  SplitIndices out;

  if (!spec.group_by_document) {
    const auto perm = rng.permutation(n);
    std::size_t pos = 0;
    auto take = [&](std::vector<std::size_t>& dst, std::size_t count) {
      dst.assign(perm.begin() + static_cast<long>(pos), perm.begin() + static_cast<long>(pos + count));
      pos += count;
    };
    take(out.train, target.train);
    take(out.val, target.val);
    take(out.test, target.test);
    take(out.leftover, n - pos);
  } else {
    if (group_keys.size() != n) {
      throw Error(ErrorCode::InvalidSpec, "document grouping needs one key per record");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[group_keys[i]].push_back(i);
    std::vector<const std::vector<std::size_t>*> ordered;
    for (const auto& [_, members] : groups) ordered.push_back(&members);
    rng.shuffle(ordered);

    std::vector<std::size_t>* parts[3] = {&out.train, &out.val, &out.test};
    const std::size_t caps[3] = {target.train, target.val, target.test};
    for (const auto* members : ordered) {
      bool placed = false;
      for (int p = 0; p < 3 && !placed; ++p) {
        if (parts[p]->size() + members->size() <= caps[p]) {
          parts[p]->insert(parts[p]->end(), members->begin(), members->end());
          placed = true;
        }
      }
      if (!placed) out.leftover.insert(out.leftover.end(), members->begin(), members->end());
    }
  }
  for (auto* v : {&out.train, &out.val, &out.test, &out.leftover}) std::sort(v->begin(), v->end());
  return out;
}

std::vector<PageRecord> sample_pages(std::span<const PageRecord> pages, std::size_t n,
                                     std::uint64_t seed) {
  if (n > pages.size()) {
    throw Error(ErrorCode::PopulationTooSmall, "cannot sample " + std::to_string(n) +
                                                   " pages from " + std::to_string(pages.size()));
  }
  SeededRng rng(seed);
  std::vector<std::size_t> idx(pages.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first n slots become the sample.
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pages.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<PageRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pages[idx[i]]);
  std::sort(out.begin(), out.end(),
            [](const PageRecord& a, const PageRecord& b) { return a.key() < b.key(); });
  return out;
}

}  // namespace dsm::dataset
