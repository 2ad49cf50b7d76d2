#pragma once

#include <complex>

// Small dense complex kernels used in the inner loops (propagator steps,
// overlap matrices). A scalar reference and an AVX2/FMA variant share one
// signature; the variant is picked once at startup from the CPU flags.
// Matrices are column-major with interleaved (re, im) doubles, which is
// Eigen's default layout.
namespace hgauge::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;
    // y = A x for an n x n matrix
    void (*gemv)(const cplx* a, const cplx* x, cplx* y, int n);
    // out = y + c * x
    void (*axpy)(cplx c, const cplx* x, const cplx* y, cplx* out, int n);
    // sum conj(a_k) b_k
    cplx (*dotc)(const cplx* a, const cplx* b, int n);
    // sum |a_k|^2
    double (*norm2)(const cplx* a, int n);
    // C = A^H B, A is n x m, B is n x k, C is m x k (column-major)
    void (*adjoint_mul)(const cplx* a, const cplx* b, cplx* c, int n, int m, int k);
};

const KernelTable& scalar_table();

// nullptr when the binary was built without AVX2 support
const KernelTable* avx2_table();

bool cpu_has_avx2();

// Kernel set in use. HGAUGE_KERNELS=scalar forces the reference path.
const KernelTable& active();

}  // namespace hgauge::kernels
