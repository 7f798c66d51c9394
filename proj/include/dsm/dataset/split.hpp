#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dsm/core/types.hpp"

namespace dsm::dataset {

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  bool operator==(const SplitCounts&) const = default;
};

struct SplitRatios {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

/// Either explicit partition sizes or ratios (summing to at most 1), plus the
/// shuffle seed. Records beyond the requested sizes go to a leftover pool.
struct SplitSpec {
  std::variant<SplitCounts, SplitRatios> sizes;
  std::uint64_t seed = 0;
  /// Keep every record of a document in the same partition. Partitions are
  /// then filled up to, never beyond, their target sizes.
  bool group_by_document = false;
};

/// Target sizes for a population of `n`. Ratios use largest-remainder
/// rounding of the floor(sum·n) records they cover. Throws Error{InvalidSpec}.
SplitCounts resolve_counts(const SplitSpec& spec, std::size_t n);

struct SplitIndices {
  std::vector<std::size_t> train, val, test, leftover;
};

/// Index-level split of `n` records. `group_keys` (one per record) is required
/// when spec.group_by_document is set. Each partition lists indices in
/// ascending order.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec,
                           std::span<const std::string> group_keys = {});

template <class T>
struct SplitResult {
  std::vector<T> train, val, test, leftover;
};

template <class T>
SplitResult<T> split(const std::vector<T>& records, const SplitSpec& spec,
                     std::span<const std::string> group_keys = {}) {
  const SplitIndices idx = split_indices(records.size(), spec, group_keys);
  auto pick = [&](const std::vector<std::size_t>& ids) {
    std::vector<T> out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(records[i]);
    return out;
  };
  return SplitResult<T>{pick(idx.train), pick(idx.val), pick(idx.test), pick(idx.leftover)};
}

/// Uniform sample of `n` pages without replacement, returned in
/// (doc_id, page_number) order. Throws Error{PopulationTooSmall}.
std::vector<PageRecord> sample_pages(std::span<const PageRecord> pages, std::size_t n,
                                     std::uint64_t seed);

}  // namespace dsm::dataset
