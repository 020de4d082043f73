#pragma once

namespace spheresr {

/// Execution policy for the data-parallel kernels. Every parallel kernel has
/// a serial twin used as the reference implementation in tests and in the
/// benchmark tool.
enum class Exec { Serial, Parallel };

/// Number of worker threads a parallel kernel may use. Respects the
/// SPHERE_SUPERRES_THREADS environment variable as an upper cap.
int thread_count();

/// Installs the SPHERE_SUPERRES_THREADS cap into the OpenMP runtime.
/// Called once by the CLI; safe to call repeatedly.
void apply_thread_cap();

}  // namespace spheresr
