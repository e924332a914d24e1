#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "avexpr/error.hpp"
#include "avexpr/rng.hpp"

namespace avexpr {

// Video-level k-fold partition. Frames of one video always share a fold.
struct FoldSplit {
  int k = 0;
  std::map<std::string, int> assignment;

  std::vector<std::string> videos_in(int fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : assignment) {
      if (f == fold) out.push_back(id);
    }
    return out;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (const auto& [id, f] : assignment) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
  }
};

// Sorts the ids, shuffles them with Rng(seed), then deals them round-robin
// into k folds. Sorting first makes the result independent of input order.
inline FoldSplit make_folds(std::span<const std::string> videos, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("make_folds: k must be >= 2");
  std::vector<std::string> ids(videos.begin(), videos.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("make_folds: duplicate video id");
  if (ids.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("make_folds: k=" + std::to_string(k) + " exceeds number of videos (" +
                          std::to_string(ids.size()) + ")");
  }
  Rng rng(seed);
  rng.shuffle(ids.begin(), ids.end());
  FoldSplit split;
  split.k = k;
  for (std::size_t i = 0; i < ids.size(); ++i) split.assignment[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return split;
}

}  // namespace avexpr
