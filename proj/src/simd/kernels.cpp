#include "bbmlab/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#if defined(__x86_64__) || defined(__i386__)
#include <xmmintrin.h>
#define BBMLAB_X86 1
#endif

#include "bbmlab/error.hpp"

namespace bbm::simd {

std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::Scalar: return "scalar";
        case Variant::Avx2: return "avx2";
    }
    return "unknown";
}

bool supported(Variant v) noexcept {
    switch (v) {
        case Variant::Scalar: return true;
        case Variant::Avx2:
#if defined(BBMLAB_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

namespace {

Variant initial_variant() noexcept {
    if (const char* env = std::getenv("BBMLAB_KERNELS"); env && std::strcmp(env, "scalar") == 0) {
        return Variant::Scalar;
    }
    return supported(Variant::Avx2) ? Variant::Avx2 : Variant::Scalar;
}

std::atomic<Variant>& current() {
    static std::atomic<Variant> v{initial_variant()};
    return v;
}

}  // namespace

Variant active() noexcept { return current().load(std::memory_order_relaxed); }

void select(Variant v) {
    if (!supported(v)) {
        fail(ErrorKind::Unsupported, "kernel variant " + std::string(to_string(v)) + " is not available");
    }
    current().store(v, std::memory_order_relaxed);
}

void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out) {
    if (taps.empty() || in.size() + 1 < out.size() + taps.size()) {
        fail(ErrorKind::InvalidInput, "correlate: input shorter than output + taps - 1");
    }
#if defined(BBMLAB_HAVE_AVX2)
    if (active() == Variant::Avx2) {
        detail::correlate_avx2(in.data(), taps.data(), taps.size(), out.data(), out.size());
        return;
    }
#endif
    detail::correlate_scalar(in.data(), taps.data(), taps.size(), out.data(), out.size());
}

void three_point(std::span<const double> in, double side, double centre, std::span<double> out) {
    if (in.size() != out.size() + 2) {
        fail(ErrorKind::InvalidInput, "three_point: input must be two longer than output");
    }
#if defined(BBMLAB_HAVE_AVX2)
    if (active() == Variant::Avx2) {
        detail::three_point_avx2(in.data(), side, centre, out.data(), out.size());
        return;
    }
#endif
    detail::three_point_scalar(in.data(), side, centre, out.data(), out.size());
}

namespace detail {

void correlate_scalar(const double* in, const double* taps, std::size_t ntaps, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * in[i + k];
        out[i] = acc;
    }
}

void three_point_scalar(const double* in, double side, double centre, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (side * in[i] + centre * in[i + 1]) + side * in[i + 2];
    }
}

}  // namespace detail

#if defined(BBMLAB_X86)
FlushDenormals::FlushDenormals() noexcept : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
FlushDenormals::~FlushDenormals() { _mm_setcsr(saved_); }
#else
FlushDenormals::FlushDenormals() noexcept {}
FlushDenormals::~FlushDenormals() {}
#endif

}  // namespace bbm::simd
