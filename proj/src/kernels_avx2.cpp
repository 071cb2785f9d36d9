#include "calcium/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)

#include <immintrin.h>

namespace calcium::kernels::detail {

namespace {

inline double sq(double x) { return x * x; }

}  // namespace

// Operation order mirrors rhs_full so that results agree bit for bit.
void rhs_full_batch_avx2(const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                         double* dc, std::size_t n)
{
    const double e2 = sq(eps);
    const double e2Kh4 = e2 * sq(sq(p.K_h_hat));
    const double Kc4 = sq(sq(p.K_c));
    const double p2 = sq(p.p), Kp2 = sq(p.K_p);
    const double pdown = Kp2 / (Kp2 + p2);
    const double pup = p2 / (Kp2 + p2);
    const double Ks2 = sq(p.K_s);
    const double gct = p.gamma * p.c_t;
    const double opg = 1.0 + p.gamma;
    const double eVs = eps * p.V_s_hat;
    const double leak = e2 * p.K_hat * sq(p.gamma) * p.V_s_hat;

    const __m256d v_zero = _mm256_setzero_pd();
    const __m256d v_one = _mm256_set1_pd(1.0);
    const __m256d v_e2 = _mm256_set1_pd(e2);
    const __m256d v_e2Kh4 = _mm256_set1_pd(e2Kh4);
    const __m256d v_Kc4 = _mm256_set1_pd(Kc4);
    const __m256d v_pdown = _mm256_set1_pd(pdown);
    const __m256d v_pup = _mm256_set1_pd(pup);
    const __m256d v_kb = _mm256_set1_pd(p.k_beta);
    const __m256d v_Ks2 = _mm256_set1_pd(Ks2);
    const __m256d v_kI = _mm256_set1_pd(p.k_IPR);
    const __m256d v_gct = _mm256_set1_pd(gct);
    const __m256d v_opg = _mm256_set1_pd(opg);
    const __m256d v_eVs = _mm256_set1_pd(eVs);
    const __m256d v_leak = _mm256_set1_pd(leak);
    const __m256d v_ct = _mm256_set1_pd(p.c_t);
    const __m256d v_tau = _mm256_set1_pd(p.tau_hat);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vh = _mm256_loadu_pd(h + i);
        const __m256d vc = _mm256_max_pd(_mm256_loadu_pd(c + i), v_zero);
        const __m256d c2 = _mm256_mul_pd(vc, vc);
        const __m256d c4 = _mm256_mul_pd(c2, c2);
        const __m256d hinf = _mm256_div_pd(v_e2Kh4, _mm256_add_pd(v_e2Kh4, c4));
        const __m256d ma = _mm256_div_pd(c4, _mm256_add_pd(v_Kc4, c4));
        const __m256d alpha = _mm256_mul_pd(v_pdown, _mm256_sub_pd(v_one, _mm256_mul_pd(ma, hinf)));
        const __m256d beta = _mm256_mul_pd(_mm256_mul_pd(v_pup, ma), vh);
        const __m256d po_raw =
            _mm256_div_pd(beta, _mm256_add_pd(beta, _mm256_mul_pd(v_kb, _mm256_add_pd(beta, alpha))));
        const __m256d pos = _mm256_cmp_pd(beta, v_zero, _CMP_GT_OQ);
        const __m256d po = _mm256_and_pd(pos, po_raw);
        const __m256d den = _mm256_add_pd(v_Ks2, c2);
        const __m256d ipr = _mm256_mul_pd(_mm256_mul_pd(v_kI, po), _mm256_sub_pd(v_gct, _mm256_mul_pd(v_opg, vc)));
        const __m256d plus = _mm256_div_pd(_mm256_mul_pd(v_eVs, c2), den);
        const __m256d d = _mm256_sub_pd(v_ct, vc);
        const __m256d minus = _mm256_div_pd(_mm256_mul_pd(v_leak, _mm256_mul_pd(d, d)), den);
        const __m256d vdc = _mm256_add_pd(_mm256_sub_pd(ipr, plus), minus);
        const __m256d vdh = _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(hinf, vh), _mm256_add_pd(c4, v_e2)), v_tau);
        _mm256_storeu_pd(dh + i, vdh);
        _mm256_storeu_pd(dc + i, vdc);
    }
    if (i < n) rhs_full_batch_scalar(p, eps, h + i, c + i, dh + i, dc + i, n - i);
}

long cubic_sign_changes_avx2(const double coef[4], double lo, double hi, long samples)
{
    const double step = (hi - lo) / static_cast<double>(samples);
    const __m256d v_lo = _mm256_set1_pd(lo);
    const __m256d v_step = _mm256_set1_pd(step);
    const __m256d a3 = _mm256_set1_pd(coef[3]);
    const __m256d a2 = _mm256_set1_pd(coef[2]);
    const __m256d a1 = _mm256_set1_pd(coef[1]);
    const __m256d a0 = _mm256_set1_pd(coef[0]);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d four = _mm256_set1_pd(4.0);
    __m256d idx = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);

    long changes = 0;
    int prev = 0;
    long i = 1;
    for (; i + 3 <= samples; i += 4) {
        const __m256d m = _mm256_add_pd(v_lo, _mm256_mul_pd(v_step, idx));
        __m256d v = _mm256_add_pd(_mm256_mul_pd(a3, m), a2);
        v = _mm256_add_pd(_mm256_mul_pd(v, m), a1);
        v = _mm256_add_pd(_mm256_mul_pd(v, m), a0);
        const int posm = _mm256_movemask_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ));
        const int negm = _mm256_movemask_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ));
        if ((posm == 0xF && prev == 1) || (negm == 0xF && prev == -1)) {
            idx = _mm256_add_pd(idx, four);
            continue;
        }
        for (int k = 0; k < 4; ++k) {
            const int s = ((posm >> k) & 1) - ((negm >> k) & 1);
            if (s != 0) {
                if (prev != 0 && s != prev) ++changes;
                prev = s;
            }
        }
        idx = _mm256_add_pd(idx, four);
    }
    for (; i <= samples; ++i) {
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

}  // namespace calcium::kernels::detail

#endif
