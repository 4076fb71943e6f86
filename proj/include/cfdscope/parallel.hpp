#pragma once

namespace cfdscope {

/// Worker count used by every parallel kernel. Set once by the driver.
void set_thread_count(int threads);
int thread_count();
int hardware_threads();

}  // namespace cfdscope
