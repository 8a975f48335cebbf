#ifndef UDIB_DETAIL_PARALLEL_HPP
#define UDIB_DETAIL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace udib::detail {

std::size_t resolve_threads(std::size_t requested, std::size_t jobs) noexcept;

/// Calls body(i) for i in [0, count) on up to `threads` workers. Jobs are
/// handed out dynamically; callers write results by index, so the outcome
/// does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace udib::detail

#endif  // UDIB_DETAIL_PARALLEL_HPP
