#pragma once

#include <functional>

namespace fcs {

// Worker count from FCS_THREADS; defaults to 1. Work items must write only
// to their own output slots so results are identical for any worker count.
int worker_count();

void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace fcs
