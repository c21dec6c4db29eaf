#include "hd_kernels.hpp"

#include <bit>

#if defined(__x86_64__) && defined(__GNUC__)
#define IRIS_X86_DISPATCH 1
#include <immintrin.h>
#else
#define IRIS_X86_DISPATCH 0
#endif

namespace iris::detail {

HdAccum hd_masked_scalar(const std::uint64_t* a_code, const std::uint64_t* a_mask,
                         const std::uint64_t* b_code, const std::uint64_t* b_mask,
                         std::size_t words) {
    std::int64_t diff = 0;
    std::int64_t overlap = 0;
    for (std::size_t i = 0; i < words; ++i) {
        const std::uint64_t m = a_mask[i] & b_mask[i];
        diff += std::popcount((a_code[i] ^ b_code[i]) & m);
        overlap += std::popcount(m);
    }
    return {diff, overlap};
}

std::int64_t hd_code_scalar(const std::uint64_t* a_code, const std::uint64_t* b_code,
                            std::size_t words) {
    std::int64_t diff = 0;
    for (std::size_t i = 0; i < words; ++i) diff += std::popcount(a_code[i] ^ b_code[i]);
    return diff;
}

#if IRIS_X86_DISPATCH

__attribute__((target("avx512f,avx512vpopcntdq"))) static HdAccum
hd_masked_avx512(const std::uint64_t* a_code, const std::uint64_t* a_mask,
                 const std::uint64_t* b_code, const std::uint64_t* b_mask, std::size_t words) {
    __m512i diff_acc = _mm512_setzero_si512();
    __m512i ov_acc = _mm512_setzero_si512();
    std::size_t i = 0;
    for (; i + 8 <= words; i += 8) {
        const __m512i ac = _mm512_loadu_si512(a_code + i);
        const __m512i bc = _mm512_loadu_si512(b_code + i);
        const __m512i m = _mm512_and_si512(_mm512_loadu_si512(a_mask + i),
                                           _mm512_loadu_si512(b_mask + i));
        const __m512i x = _mm512_and_si512(_mm512_xor_si512(ac, bc), m);
        diff_acc = _mm512_add_epi64(diff_acc, _mm512_popcnt_epi64(x));
        ov_acc = _mm512_add_epi64(ov_acc, _mm512_popcnt_epi64(m));
    }
    if (i < words) {
        const __mmask8 k = static_cast<__mmask8>((1u << (words - i)) - 1u);
        const __m512i ac = _mm512_maskz_loadu_epi64(k, a_code + i);
        const __m512i bc = _mm512_maskz_loadu_epi64(k, b_code + i);
        const __m512i m = _mm512_and_si512(_mm512_maskz_loadu_epi64(k, a_mask + i),
                                           _mm512_maskz_loadu_epi64(k, b_mask + i));
        const __m512i x = _mm512_and_si512(_mm512_xor_si512(ac, bc), m);
        diff_acc = _mm512_add_epi64(diff_acc, _mm512_popcnt_epi64(x));
        ov_acc = _mm512_add_epi64(ov_acc, _mm512_popcnt_epi64(m));
    }
    return {_mm512_reduce_add_epi64(diff_acc), _mm512_reduce_add_epi64(ov_acc)};
}

__attribute__((target("avx512f,avx512vpopcntdq"))) static std::int64_t
hd_code_avx512(const std::uint64_t* a_code, const std::uint64_t* b_code, std::size_t words) {
    __m512i diff_acc = _mm512_setzero_si512();
    std::size_t i = 0;
    for (; i + 8 <= words; i += 8) {
        const __m512i x = _mm512_xor_si512(_mm512_loadu_si512(a_code + i),
                                           _mm512_loadu_si512(b_code + i));
        diff_acc = _mm512_add_epi64(diff_acc, _mm512_popcnt_epi64(x));
    }
    if (i < words) {
        const __mmask8 k = static_cast<__mmask8>((1u << (words - i)) - 1u);
        const __m512i x = _mm512_xor_si512(_mm512_maskz_loadu_epi64(k, a_code + i),
                                           _mm512_maskz_loadu_epi64(k, b_code + i));
        diff_acc = _mm512_add_epi64(diff_acc, _mm512_popcnt_epi64(x));
    }
    return _mm512_reduce_add_epi64(diff_acc);
}

static bool cpu_has_vpopcntdq() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512vpopcntdq");
}

#endif // IRIS_X86_DISPATCH

HdMaskedFn select_hd_masked() {
#if IRIS_X86_DISPATCH
    static const HdMaskedFn fn = cpu_has_vpopcntdq() ? &hd_masked_avx512 : &hd_masked_scalar;
#else
    static const HdMaskedFn fn = &hd_masked_scalar;
#endif
    return fn;
}

HdCodeFn select_hd_code() {
#if IRIS_X86_DISPATCH
    static const HdCodeFn fn = cpu_has_vpopcntdq() ? &hd_code_avx512 : &hd_code_scalar;
#else
    static const HdCodeFn fn = &hd_code_scalar;
#endif
    return fn;
}

const char* hd_kernel_name() {
#if IRIS_X86_DISPATCH
    return cpu_has_vpopcntdq() ? "avx512-vpopcntdq" : "scalar";
#else
    return "scalar";
#endif
}

} // namespace iris::detail
