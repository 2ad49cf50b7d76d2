#include "hgauge/kernels.hpp"

namespace hgauge::kernels {
namespace {

void gemv(const cplx* a, const cplx* x, cplx* y, int n) {
    for (int r = 0; r < n; ++r) y[r] = 0.0;
    for (int c = 0; c < n; ++c) {
        const cplx xc = x[c];
        const cplx* col = a + static_cast<long>(c) * n;
        for (int r = 0; r < n; ++r) y[r] += col[r] * xc;
    }
}

void axpy(cplx c, const cplx* x, const cplx* y, cplx* out, int n) {
    for (int k = 0; k < n; ++k) out[k] = y[k] + c * x[k];
}

cplx dotc(const cplx* a, const cplx* b, int n) {
    double re = 0.0, im = 0.0;
    for (int k = 0; k < n; ++k) {
        re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
        im += a[k].real() * b[k].imag() - a[k].imag() * b[k].real();
    }
    return {re, im};
}

double norm2(const cplx* a, int n) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
    return s;
}

void adjoint_mul(const cplx* a, const cplx* b, cplx* c, int n, int m, int k) {
    for (int q = 0; q < k; ++q)
        for (int p = 0; p < m; ++p)
            c[p + static_cast<long>(q) * m] = dotc(a + static_cast<long>(p) * n, b + static_cast<long>(q) * n, n);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::scalar, "scalar", gemv, axpy, dotc, norm2, adjoint_mul};
    return table;
}

}  // namespace hgauge::kernels
