#include "coapids/random.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

#include "coapids/exec.hpp"

namespace coapids {

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling on the top of the range keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

void set_max_threads(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

}  // namespace coapids
