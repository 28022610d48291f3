#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace bbm::simd {

enum class Variant { Scalar, Avx2 };

std::string_view to_string(Variant v) noexcept;

/// True when the running CPU can execute `v` and it was compiled in.
bool supported(Variant v) noexcept;

/// Variant chosen at startup: the widest supported one unless BBMLAB_KERNELS=scalar is set.
Variant active() noexcept;

/// Force a variant. Throws when unsupported.
void select(Variant v);

/// out[i] = sum_k taps[k] * in[i + k] for i in [0, out.size()); in.size() >= out.size() + taps.size() - 1.
/// Every variant accumulates in increasing k with separate multiply and add, so results are
/// bitwise identical across variants.
void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out);

/// out[i] = (side * in[i] + centre * in[i + 1]) + side * in[i + 2]; in.size() == out.size() + 2.
void three_point(std::span<const double> in, double side, double centre, std::span<double> out);

namespace detail {
void correlate_scalar(const double* in, const double* taps, std::size_t ntaps, double* out, std::size_t n);
void three_point_scalar(const double* in, double side, double centre, double* out, std::size_t n);
#if defined(BBMLAB_HAVE_AVX2)
void correlate_avx2(const double* in, const double* taps, std::size_t ntaps, double* out, std::size_t n);
void three_point_avx2(const double* in, double side, double centre, double* out, std::size_t n);
#endif
}  // namespace detail

/// Sets flush-to-zero / denormals-are-zero for the lifetime of the guard (x86 only, no-op elsewhere).
class FlushDenormals {
public:
    FlushDenormals() noexcept;
    ~FlushDenormals();
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
    unsigned saved_ = 0;
};

}  // namespace bbm::simd
