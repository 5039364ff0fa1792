#include "ifmix/rng.hpp"

#include <algorithm>
#include <numeric>

namespace ifmix {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix_seed(seed);
  for (auto t : tags) {
    h = mix_seed(h ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  }
  return Rng(h);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  // Fisher-Yates with our own index draws so the order does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[index(i)]);
  }
  return p;
}

} // namespace ifmix
