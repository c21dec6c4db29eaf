/*
 * hd_kernels.hpp - word-level popcount kernels behind fractional_hd.
 * Private to the matching implementation.
 */
#pragma once

#include <cstddef>
#include <cstdint>

namespace iris::detail {

struct HdAccum {
    std::int64_t diff = 0;
    std::int64_t overlap = 0;
};

// diff = popcount((a^b) & am & bm), overlap = popcount(am & bm)
using HdMaskedFn = HdAccum (*)(const std::uint64_t* a_code, const std::uint64_t* a_mask,
                               const std::uint64_t* b_code, const std::uint64_t* b_mask,
                               std::size_t words);
// diff only; callers use this when both masks are known to be full
using HdCodeFn = std::int64_t (*)(const std::uint64_t* a_code, const std::uint64_t* b_code,
                                  std::size_t words);

HdAccum hd_masked_scalar(const std::uint64_t* a_code, const std::uint64_t* a_mask,
                         const std::uint64_t* b_code, const std::uint64_t* b_mask,
                         std::size_t words);
std::int64_t hd_code_scalar(const std::uint64_t* a_code, const std::uint64_t* b_code,
                            std::size_t words);

// Resolved once at first use; prefers AVX-512 VPOPCNTDQ when the CPU has it.
HdMaskedFn select_hd_masked();
HdCodeFn select_hd_code();
const char* hd_kernel_name();

} // namespace iris::detail
