#ifndef BELLSIM_PARALLEL_HPP
#define BELLSIM_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace bellsim::detail {

// Splits [0, trials) into contiguous chunks, accumulates each chunk into its
// own Acc on a worker thread, then merges the partial results in chunk
// order. fn(trial_index, acc) must depend only on its arguments.
template <class Acc, class Fn>
Acc parallel_accumulate(std::uint64_t trials, unsigned workers, Fn fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || trials < workers) {
    Acc acc{};
    for (std::uint64_t i = 0; i < trials; ++i) fn(i, acc);
    return acc;
  }
  std::vector<Acc> partial(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::uint64_t chunk = trials / workers;
    const std::uint64_t extra = trials % workers;
    std::uint64_t begin = 0;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t end = begin + chunk + (w < extra ? 1 : 0);
      threads.emplace_back([&fn, &partial, w, begin, end] {
        for (std::uint64_t i = begin; i < end; ++i) fn(i, partial[w]);
      });
      begin = end;
    }
  }
  Acc total{};
  for (const Acc& p : partial) total += p;
  return total;
}

}  // namespace bellsim::detail

#endif  // BELLSIM_PARALLEL_HPP
