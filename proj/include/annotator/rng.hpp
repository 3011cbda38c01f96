#pragma once

#include <cstdint>
#include <vector>

namespace annotator {

// splitmix64 (Steele, Lea & Flood 2014). Chosen over std::mt19937 because
// the output sequence is pinned here bit-for-bit: identical seeds must
// reproduce identical shuffles on every platform and standard library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Fisher-Yates over indices 0..n-1: for i from n-1 down to 1,
// j = next() mod (i+1), swap a[i] and a[j]. The modulo draw is part of the
// pinned algorithm.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace annotator
