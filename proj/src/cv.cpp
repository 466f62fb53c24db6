#include "relsifter/cv.hpp"

#include <numeric>

#include "relsifter/rng.hpp"

namespace relsifter {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw config_error("cv: need at least 2 folds");
  if (n < folds) throw config_error("cv: fewer rows (" + std::to_string(n) + ") than folds (" +
                                    std::to_string(folds) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> assignment(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;  // first `extra` folds get one more row
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    assignment[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return assignment;
}

}  // namespace relsifter
