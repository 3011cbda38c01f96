#include "annotator/rng.hpp"

#include <numeric>
#include <utility>

namespace annotator {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(indices[i - 1], indices[j]);
  }
  return indices;
}

}  // namespace annotator
