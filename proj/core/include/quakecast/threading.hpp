#pragma once

#include <functional>

namespace quakecast {

/// Worker count for parallel_for. 0 resets to all hardware cores.
void set_num_threads(int n);
int num_threads();

/// Runs fn(i) for i in [0, n) with static chunking. Each index is computed
/// by exactly one worker, so results are identical for any thread count as
/// long as fn writes only to index-owned outputs.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace quakecast
