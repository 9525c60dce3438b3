#pragma once

namespace corescale {

/// Caps the worker count used by OpenMP kernels. Values < 1 reset to the
/// runtime default. Results never depend on this setting.
void set_thread_count(int threads);
int thread_count();

}  // namespace corescale
