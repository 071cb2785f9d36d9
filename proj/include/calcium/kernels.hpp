#pragma once

#include "calcium/params.hpp"

#include <cstddef>

namespace calcium::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);
bool isa_available(Isa isa);
// Best available on this CPU; CALCIUM_FORCE_SCALAR=1 in the environment pins the scalar path.
Isa runtime_isa();

// Scaled vector field over arrays of states; identical arithmetic to rhs_full.
void rhs_full_batch(Isa isa, const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                    double* dc, std::size_t n);
void rhs_full_batch(const ScaledParams& p, double eps, const double* h, const double* c, double* dh, double* dc,
                    std::size_t n);

// Divergence of the scaled field by central differences on the batched field.
void divergence_batch(const ScaledParams& p, double eps, const double* h, const double* c, double* div,
                      std::size_t n);

// coef = {a0, a1, a2, a3}. Sign changes of a3 m^3 + a2 m^2 + a1 m + a0 over the samples m_i = lo + (hi - lo) i / samples, i = 1..samples.
long cubic_sign_changes(Isa isa, const double coef[4], double lo, double hi, long samples);
long cubic_sign_changes(const double coef[4], double lo, double hi, long samples);

namespace detail {
void rhs_full_batch_scalar(const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                           double* dc, std::size_t n);
long cubic_sign_changes_scalar(const double coef[4], double lo, double hi, long samples);
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
void rhs_full_batch_avx2(const ScaledParams& p, double eps, const double* h, const double* c, double* dh,
                         double* dc, std::size_t n);
long cubic_sign_changes_avx2(const double coef[4], double lo, double hi, long samples);
#endif
}  // namespace detail

}  // namespace calcium::kernels
