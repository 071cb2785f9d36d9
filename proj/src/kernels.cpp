#include "calcium/kernels.hpp"

#include "calcium/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace calcium::kernels {

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa)
{
    if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    static const bool avx2 = __builtin_cpu_supports("avx2");
    return avx2;
#else
    return false;
#endif
}

Isa runtime_isa()
{
    static const Isa chosen = [] {
        const char* env = std::getenv("CALCIUM_FORCE_SCALAR");
        if (env && std::strcmp(env, "0") != 0 && *env) return Isa::Scalar;
        return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    }();
    return chosen;
}

namespace detail {

void rhs_full_batch_scalar(const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                           double* dc, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        const Rate r = rhs_full({h[i], c[i]}, p, eps);
        dh[i] = r.dh;
        dc[i] = r.dc;
    }
}

long cubic_sign_changes_scalar(const double coef[4], double lo, double hi, long samples)
{
    const double step = (hi - lo) / static_cast<double>(samples);
    long changes = 0;
    int prev = 0;
    for (long i = 1; i <= samples; ++i) {
        const double m = lo + step * static_cast<double>(i);
        const double v = ((coef[3] * m + coef[2]) * m + coef[1]) * m + coef[0];
        const int s = (v > 0.0) - (v < 0.0);
        if (s != 0) {
            if (prev != 0 && s != prev) ++changes;
            prev = s;
        }
    }
    return changes;
}

}  // namespace detail

void rhs_full_batch(Isa isa, const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                    double* dc, std::size_t n)
{
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    if (isa == Isa::Avx2) {
        if (!isa_available(Isa::Avx2)) throw std::runtime_error("AVX2 requested but not supported by this CPU");
        detail::rhs_full_batch_avx2(p, eps, h, c, dh, dc, n);
        return;
    }
#else
    if (isa == Isa::Avx2) throw std::runtime_error("AVX2 kernels not built for this target");
#endif
    detail::rhs_full_batch_scalar(p, eps, h, c, dh, dc, n);
}

void rhs_full_batch(const ScaledParams& p, double eps, const double* h, const double* c, double* dh, double* dc,
                    std::size_t n)
{
    rhs_full_batch(runtime_isa(), p, eps, h, c, dh, dc, n);
}

void divergence_batch(const ScaledParams& p, double eps, const double* h, const double* c, double* div,
                      std::size_t n)
{
    std::vector<double> hp(n), hm(n), cp(n), cm(n), a(n), b(n), dummy(n);
    std::vector<double> sh(n), sc(n);
    const double s = std::cbrt(std::numeric_limits<double>::epsilon());
    for (std::size_t i = 0; i < n; ++i) {
        sh[i] = s * (1.0 + std::abs(h[i]));
        sc[i] = s * std::max(std::abs(c[i]), 1e-3);
        hp[i] = h[i] + sh[i];
        hm[i] = h[i] - sh[i];
        cp[i] = c[i] + sc[i];
        cm[i] = std::max(c[i] - sc[i], 0.0);
    }
    rhs_full_batch(p, eps, hp.data(), c, a.data(), dummy.data(), n);
    rhs_full_batch(p, eps, hm.data(), c, b.data(), dummy.data(), n);
    for (std::size_t i = 0; i < n; ++i) div[i] = (a[i] - b[i]) / (hp[i] - hm[i]);
    rhs_full_batch(p, eps, h, cp.data(), dummy.data(), a.data(), n);
    rhs_full_batch(p, eps, h, cm.data(), dummy.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) div[i] += (a[i] - b[i]) / (cp[i] - cm[i]);
}

long cubic_sign_changes(Isa isa, const double coef[4], double lo, double hi, long samples)
{
    if (samples <= 0) throw std::invalid_argument("cubic_sign_changes needs samples > 0");
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    if (isa == Isa::Avx2) {
        if (!isa_available(Isa::Avx2)) throw std::runtime_error("AVX2 requested but not supported by this CPU");
        return detail::cubic_sign_changes_avx2(coef, lo, hi, samples);
    }
#else
    if (isa == Isa::Avx2) throw std::runtime_error("AVX2 kernels not built for this target");
#endif
    return detail::cubic_sign_changes_scalar(coef, lo, hi, samples);
}

long cubic_sign_changes(const double coef[4], double lo, double hi, long samples)
{
    return cubic_sign_changes(runtime_isa(), coef, lo, hi, samples);
}

}  // namespace calcium::kernels
