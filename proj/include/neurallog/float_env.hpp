#pragma once

#if defined(__SSE2__) || defined(_M_X64)
#include <xmmintrin.h>
#define NEURALLOG_HAS_MXCSR 1
#endif

namespace neurallog {

// Flushes subnormal results and operands to zero on the calling thread for
// the guard's lifetime. Strongly regularized networks decay toward zero and
// subnormal arithmetic is far slower than normal arithmetic on x86.
class FlushDenormals {
 public:
  FlushDenormals() {
#ifdef NEURALLOG_HAS_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | kFlushToZero | kDenormalsAreZero);
#endif
  }
  ~FlushDenormals() {
#ifdef NEURALLOG_HAS_MXCSR
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
#ifdef NEURALLOG_HAS_MXCSR
  static constexpr unsigned kFlushToZero = 0x8000;
  static constexpr unsigned kDenormalsAreZero = 0x0040;
  unsigned saved_ = 0;
#endif
};

}  // namespace neurallog
