#ifndef UDIB_DETAIL_NUMERIC_HPP
#define UDIB_DETAIL_NUMERIC_HPP

#include <cstddef>
#include <span>

namespace udib::detail {

// Four independent partial sums let the compiler keep several FMA chains in
// flight without -ffast-math. The summation order is fixed, so results are
// reproducible.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t d = a.size();
    const double* x = a.data();
    const double* y = b.data();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        const double d0 = x[k] - y[k];
        const double d1 = x[k + 1] - y[k + 1];
        const double d2 = x[k + 2] - y[k + 2];
        const double d3 = x[k + 3] - y[k + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; k < d; ++k) {
        const double dk = x[k] - y[k];
        s0 += dk * dk;
    }
    return (s0 + s1) + (s2 + s3);
}

}  // namespace udib::detail

#endif  // UDIB_DETAIL_NUMERIC_HPP
