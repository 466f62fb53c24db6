#ifndef RELSIFTER_RNG_HPP
#define RELSIFTER_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace relsifter {

// Derives independent stream seeds from a base seed and a stream index, so
// parallel workers (trees, folds) get schedule-independent randomness.
inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with explicit bounded draws. The std distributions are
// implementation-defined; these draws keep byte-identical artifacts stable
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling, unbiased for any n >= 1.
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t threshold = (-std::uint64_t{n}) % n;  // 2^64 mod n
    std::uint64_t v = engine_();
    while (v < threshold) v = engine_();
    return static_cast<std::uint32_t>(v % n);
  }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform triple score in 0..7. 8 divides 2^64, so modulo is exact.
  int score() { return static_cast<int>(engine_() & 7u); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace relsifter

#endif
