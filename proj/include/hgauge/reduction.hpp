#pragma once

#include "hgauge/types.hpp"

namespace hgauge {

// Validated 3x3 density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    explicit DensityMatrix(const Mat3& m);
    const Mat3& data() const { return m_; }

private:
    Mat3 m_;
};

// (out)_{i i'} = sum_j M_{(i,j),(i',j)}
Mat3 partial_trace_env(const Mat9& m);

// tr_E |psi><psi|
Mat3 reduced_state(const Vec9& psi);

// tr_E |u><v|, i.e. the 3x3 block sum used by the connection one-forms
Mat3 partial_trace_dyad(const Vec9& u, const Vec9& v);

struct PseudoInverse {
    Mat3 inverse;
    int rank = 0;
};

PseudoInverse pseudo_inverse(const Mat3& rho, double tol = 1e-10);

double von_neumann_entropy(const Mat3& rho);

// tr(rho (ln rho - ln tau)) with the principal logarithm of tau (the sign
// that makes it a Kullback-Leibler divergence for commuting arguments). Terms on the
// kernel of rho are dropped; weight of rho on the kernel of tau gives +inf.
cplx relative_entropy_complex(const Mat3& rho, const Mat3& tau);
double relative_entropy(const Mat3& rho, const Mat3& tau);

}  // namespace hgauge
