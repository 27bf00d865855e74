#pragma once

namespace synthaug {

// Keeps large short-lived temporaries (GEMM blocks, batch activations) on the
// heap instead of fresh mmap'd pages. Idempotent; a no-op outside glibc.
void tune_allocator() noexcept;

}  // namespace synthaug
