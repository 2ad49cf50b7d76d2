#include <random>
#include <vector>

#include "doctest.h"
#include "hgauge/kernels.hpp"

using hgauge::kernels::cplx;

namespace {

std::vector<cplx> random_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& z : v) z = cplx(d(rng), d(rng));
    return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("scalar kernels match naive loops") {
        const auto& s = hgauge::kernels::scalar_table();
        std::mt19937_64 rng(1);
        const int n = 5;
        auto a = random_vec(rng, n * n), x = random_vec(rng, n), y = random_vec(rng, n);
        std::vector<cplx> out(n), ref(n);
        s.gemv(a.data(), x.data(), out.data(), n);
        for (int r = 0; r < n; ++r) {
            ref[r] = 0.0;
            for (int c = 0; c < n; ++c) ref[r] += a[c * n + r] * x[c];
        }
        CHECK(max_diff(out, ref) < 1e-13);
        const cplx c(0.3, -1.2);
        s.axpy(c, x.data(), y.data(), out.data(), n);
        for (int k = 0; k < n; ++k) ref[k] = y[k] + c * x[k];
        CHECK(max_diff(out, ref) < 1e-15);
        cplx dot = 0.0;
        double nrm = 0.0;
        for (int k = 0; k < n; ++k) {
            dot += std::conj(x[k]) * y[k];
            nrm += std::norm(x[k]);
        }
        CHECK(std::abs(s.dotc(x.data(), y.data(), n) - dot) < 1e-14);
        CHECK(std::abs(s.norm2(x.data(), n) - nrm) < 1e-14);
    }

    TEST_CASE("AVX2 kernels agree with the scalar reference") {
        const auto* v = hgauge::kernels::avx2_table();
        if (!v || !hgauge::kernels::cpu_has_avx2()) {
            MESSAGE("AVX2 path unavailable on this machine; equivalence not exercised");
            return;
        }
        const auto& s = hgauge::kernels::scalar_table();
        std::mt19937_64 rng(7);
        for (int n : {1, 2, 3, 4, 7, 9, 16, 17}) {
            CAPTURE(n);
            auto a = random_vec(rng, n * n), x = random_vec(rng, n), y = random_vec(rng, n);
            std::vector<cplx> o1(n), o2(n);
            s.gemv(a.data(), x.data(), o1.data(), n);
            v->gemv(a.data(), x.data(), o2.data(), n);
            CHECK(max_diff(o1, o2) < 1e-13 * n);
            const cplx c(-0.7, 0.4);
            s.axpy(c, x.data(), y.data(), o1.data(), n);
            v->axpy(c, x.data(), y.data(), o2.data(), n);
            CHECK(max_diff(o1, o2) < 1e-15 * n);
            CHECK(std::abs(s.dotc(x.data(), y.data(), n) - v->dotc(x.data(), y.data(), n)) < 1e-13 * n);
            CHECK(std::abs(s.norm2(x.data(), n) - v->norm2(x.data(), n)) < 1e-13 * n);
            for (int m : {1, 3, 9}) {
                for (int k : {1, 2, 9}) {
                    auto am = random_vec(rng, n * m), bm = random_vec(rng, n * k);
                    std::vector<cplx> c1(m * k), c2(m * k);
                    s.adjoint_mul(am.data(), bm.data(), c1.data(), n, m, k);
                    v->adjoint_mul(am.data(), bm.data(), c2.data(), n, m, k);
                    CHECK(max_diff(c1, c2) < 1e-13 * n);
                }
            }
        }
    }

    TEST_CASE("active table honours the scalar override") {
        const auto& t = hgauge::kernels::active();
        CHECK(t.name != nullptr);
        if (hgauge::kernels::cpu_has_avx2() && hgauge::kernels::avx2_table())
            CHECK((t.isa == hgauge::kernels::Isa::avx2 || std::getenv("HGAUGE_KERNELS")));
    }
}
