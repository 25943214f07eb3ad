#ifndef EPMC_PARALLEL_HPP
#define EPMC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace epmc {

// Library-wide worker count. Work items write to disjoint slots, so the
// thread count never changes any computed number.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [0, n). Static chunking over num_threads() workers;
// falls back to a plain loop for one thread or tiny n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace epmc

#endif  // EPMC_PARALLEL_HPP
