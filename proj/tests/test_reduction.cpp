#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "hgauge/reduction.hpp"
#include "hgauge/model.hpp"

using namespace hgauge;

namespace {

Mat3 diag3(double a, double b, double c) {
    Mat3 m = Mat3::Zero();
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

Mat3 random_state(std::mt19937_64& rng, int rank) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd g(3, rank);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < rank; ++c) g(r, c) = cplx(n(rng), n(rng));
    Mat3 w = g * g.adjoint();
    return w / w.trace().real();
}

Vec9 basis(int i, int j) {
    Vec9 v = Vec9::Zero();
    v(tensor_index(i, j)) = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("reduction") {
    TEST_CASE("partial trace examples") {
        const Vec9 v = basis(1, 1);
        const Mat3 r = partial_trace_env(v * v.adjoint());
        CHECK((r - diag3(1, 0, 0)).cwiseAbs().maxCoeff() == 0.0);
        const Vec9 bell = (basis(1, 1) + basis(2, 2)) / std::sqrt(2.0);
        CHECK((partial_trace_env(bell * bell.adjoint()) - diag3(0.5, 0.5, 0)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((reduced_state(bell) - diag3(0.5, 0.5, 0)).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("partial trace matches an index-summation oracle") {
        std::mt19937_64 rng(21);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            Mat9 m;
            for (int r = 0; r < 9; ++r)
                for (int c = 0; c < 9; ++c) m(r, c) = cplx(n(rng), n(rng));
            m = 0.5 * (m + m.adjoint()).eval();
            Mat3 oracle = Mat3::Zero();
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                    for (int j = 0; j < 3; ++j) oracle(i, k) += m(3 * i + j, 3 * k + j);
            CHECK((partial_trace_env(m) - oracle).cwiseAbs().maxCoeff() < 1e-14);

            Vec9 u, w;
            for (int k = 0; k < 9; ++k) u(k) = cplx(n(rng), n(rng)), w(k) = cplx(n(rng), n(rng));
            CHECK((partial_trace_dyad(u, w) - partial_trace_env(u * w.adjoint())).cwiseAbs().maxCoeff() < 1e-13);
        }
    }

    TEST_CASE("partial trace preserves trace and positivity") {
        std::mt19937_64 rng(22);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::Matrix<cplx, 9, 4> g;
            for (int r = 0; r < 9; ++r)
                for (int c = 0; c < 4; ++c) g(r, c) = cplx(n(rng), n(rng));
            const Mat9 w = g * g.adjoint();
            const Mat3 r = partial_trace_env(w);
            CHECK(std::abs(r.trace() - w.trace()) < 1e-12 * std::abs(w.trace()));
            CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(r).eigenvalues().minCoeff() > -1e-12);
        }
    }

    TEST_CASE("pseudo-inverse") {
        const PseudoInverse full = pseudo_inverse(diag3(0.5, 0.3, 0.2));
        CHECK(full.rank == 3);
        CHECK((full.inverse - diag3(2.0, 10.0 / 3.0, 5.0)).cwiseAbs().maxCoeff() < 1e-13);
        const PseudoInverse one = pseudo_inverse(diag3(1, 0, 0));
        CHECK(one.rank == 1);
        CHECK((one.inverse - diag3(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((one.inverse * diag3(1, 0, 0) - diag3(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK_THROWS_AS(pseudo_inverse(Mat3::Zero()), NumericalError);

        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 10; ++trial) {
            const Mat3 r = random_state(rng, 2);
            const PseudoInverse p = pseudo_inverse(r);
            CHECK(p.rank == 2);
            Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Eigen::Vector3d s = svd.singularValues();
            for (int k = 0; k < 3; ++k) s(k) = s(k) > 1e-10 * s(0) ? 1.0 / s(k) : 0.0;
            const Mat3 oracle = svd.matrixV() * s.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
            CHECK((p.inverse - oracle).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
        }
    }

    TEST_CASE("von Neumann entropy") {
        std::mt19937_64 rng(24);
        const Mat3 pure = random_state(rng, 1);
        CHECK(std::abs(von_neumann_entropy(pure)) < 1e-12);
        CHECK(von_neumann_entropy(diag3(1.0 / 3, 1.0 / 3, 1.0 / 3)) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
        CHECK(std::abs(von_neumann_entropy(diag3(0.25, 0.75, 0)) - 0.5623) < 1e-4);
        CHECK(von_neumann_entropy(diag3(0.5, 0.5 + 5e-9, -5e-9)) == doctest::Approx(std::log(2.0)).epsilon(1e-7));
        CHECK_THROWS(von_neumann_entropy(diag3(0.6, 0.5, -0.1)));
        for (int trial = 0; trial < 10; ++trial) {
            const double s = von_neumann_entropy(random_state(rng, 3));
            CHECK(s >= 0.0);
            CHECK(s <= std::log(3.0) + 1e-12);
        }
    }

    TEST_CASE("relative entropy") {
        std::mt19937_64 rng(25);
        const Mat3 r = random_state(rng, 3);
        CHECK(std::abs(relative_entropy(r, r)) < 1e-12);
        const double p[3] = {0.2, 0.5, 0.3}, q[3] = {0.4, 0.4, 0.2};
        double kl = 0.0;
        for (int k = 0; k < 3; ++k) kl += p[k] * std::log(p[k] / q[k]);
        CHECK(relative_entropy(diag3(p[0], p[1], p[2]), diag3(q[0], q[1], q[2])) == doctest::Approx(kl).epsilon(1e-12));
        const double eps = 1e-14;
        const double v = relative_entropy(diag3(0.5, 0.5, 0), diag3(0.25 + eps, 0.75 + eps, eps));
        CHECK(std::abs(v - (0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0))) < 1e-3);
        CHECK(std::isinf(relative_entropy(diag3(0.5, 0.5, 0), diag3(1, 0, 0))));
        for (int trial = 0; trial < 20; ++trial)
            CHECK(relative_entropy(random_state(rng, 3), random_state(rng, 1 + trial % 3)) >= -1e-12);
    }

    TEST_CASE("density matrix validation") {
        CHECK_NOTHROW(DensityMatrix(diag3(0.5, 0.3, 0.2)));
        CHECK_THROWS(DensityMatrix(diag3(0.5, 0.3, 0.3)));
        CHECK_THROWS(DensityMatrix(diag3(1.2, 0.0, -0.2)));
        Mat3 m = diag3(0.5, 0.5, 0);
        m(0, 1) = 0.1;
        CHECK_THROWS(DensityMatrix{m});
    }
}
