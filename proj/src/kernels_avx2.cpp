#include "hgauge/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace hgauge::kernels {

#if defined(__AVX2__) && defined(__FMA__)
namespace {

// two complex numbers per register: [re0, im0, re1, im1]

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }
inline __m256d swap_re_im(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

// v * (cr + i ci) with cr, ci broadcast
inline __m256d cmul(__m256d v, __m256d cr, __m256d ci) {
    return _mm256_fmaddsub_pd(v, cr, _mm256_mul_pd(swap_re_im(v), ci));
}

void gemv(const cplx* a, const cplx* x, cplx* y, int n) {
    int r = 0;
    for (; r + 1 < n; r += 2) {
        __m256d acc = _mm256_setzero_pd();
        for (int c = 0; c < n; ++c) {
            const __m256d xr = _mm256_set1_pd(x[c].real());
            const __m256d xi = _mm256_set1_pd(x[c].imag());
            acc = _mm256_add_pd(acc, cmul(load2(a + static_cast<long>(c) * n + r), xr, xi));
        }
        store2(y + r, acc);
    }
    for (; r < n; ++r) {
        cplx s = 0.0;
        for (int c = 0; c < n; ++c) s += a[static_cast<long>(c) * n + r] * x[c];
        y[r] = s;
    }
}

void axpy(cplx c, const cplx* x, const cplx* y, cplx* out, int n) {
    const __m256d cr = _mm256_set1_pd(c.real());
    const __m256d ci = _mm256_set1_pd(c.imag());
    int k = 0;
    for (; k + 1 < n; k += 2) store2(out + k, _mm256_add_pd(load2(y + k), cmul(load2(x + k), cr, ci)));
    for (; k < n; ++k) out[k] = y[k] + c * x[k];
}

cplx dotc(const cplx* a, const cplx* b, int n) {
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    int k = 0;
    for (; k + 1 < n; k += 2) {
        const __m256d va = load2(a + k);
        const __m256d vb = load2(b + k);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);
        acc_im = _mm256_fmadd_pd(va, swap_re_im(vb), acc_im);
    }
    alignas(32) double lr[4], li[4];
    _mm256_store_pd(lr, acc_re);
    _mm256_store_pd(li, acc_im);
    double re = (lr[0] + lr[1]) + (lr[2] + lr[3]);
    double im = (li[0] - li[1]) + (li[2] - li[3]);
    for (; k < n; ++k) {
        re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
        im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
    }
    return {re, im};
}

double norm2(const cplx* a, int n) {
    __m256d acc = _mm256_setzero_pd();
    int k = 0;
    for (; k + 1 < n; k += 2) {
        const __m256d v = load2(a + k);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    double s = (l[0] + l[1]) + (l[2] + l[3]);
    for (; k < n; ++k) s += a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
    return s;
}

void adjoint_mul(const cplx* a, const cplx* b, cplx* c, int n, int m, int k) {
    for (int q = 0; q < k; ++q)
        for (int p = 0; p < m; ++p)
            c[p + static_cast<long>(q) * m] = dotc(a + static_cast<long>(p) * n, b + static_cast<long>(q) * n, n);
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{Isa::avx2, "avx2", gemv, axpy, dotc, norm2, adjoint_mul};
    return &table;
}
#else
const KernelTable* avx2_table() { return nullptr; }
#endif

}  // namespace hgauge::kernels
