#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nsi/logic/errors.hpp"

namespace nsi {

// Seeded generator with hand-rolled bounded draws: the raw mt19937_64
// stream is standard-mandated, unlike std distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(eng_() % n); }
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  bool chance(int percent) { return range(1, 100) <= percent; }

  template <class T>
  const T& pick(const std::vector<T>& xs) {
    if (xs.empty()) throw Error("pick from empty list");
    return xs[below(xs.size())];
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace nsi
