#pragma once

namespace careerscape {

/// Keeps freed tape buffers inside the heap instead of returning them to the OS. Training
/// allocates and frees many mid-sized matrices per sample; with glibc's default mmap threshold
/// each one costs a map/unmap pair and fresh page faults. No-op on other C libraries.
void tune_allocator();

}  // namespace careerscape
