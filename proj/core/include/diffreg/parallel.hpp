#pragma once

namespace diffreg {

/// Caps the number of threads used by per-voxel loops. Values < 1 select
/// the runtime default. Reductions never depend on this setting.
void set_thread_count(int threads);
int thread_count();

}  // namespace diffreg
