#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>

namespace depthfilter {

using Rng = std::mt19937_64;

/// Mixes a base seed with context ids (stage, column, replicate, ...) via splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/**
 * Runs task(i) for i in [0, count) on up to `threads` workers.
 *
 * Tasks must write only to their own slot of a preallocated result; the
 * outcome is then independent of scheduling. If several tasks throw, the
 * exception of the lowest index is rethrown.
 */
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

} // namespace depthfilter
