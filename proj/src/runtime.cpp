#include "careerscape/runtime.hpp"

#include <cstdlib>  // defines __GLIBC__ where applicable

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace careerscape {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);  // glibc caps the threshold at 32 MiB
  mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif
}

}  // namespace careerscape
