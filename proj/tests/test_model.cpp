#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "hgauge/model.hpp"

using namespace hgauge;

namespace {

double hermiticity(const MatX& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

ModelParams resonant() {
    ModelParams p;
    p.delta_p = p.delta_s = 0.0;
    return p;
}

}  // namespace

TEST_SUITE("model") {
    TEST_CASE("system Hamiltonian examples") {
        ModelParams p = resonant();
        CHECK(build_h_system({0, 0}, p).cwiseAbs().maxCoeff() == 0.0);
        p.delta_p = 1.0;
        p.delta_s = 0.5;
        const Mat3 h = build_h_system({0, 0}, p);
        Mat3 expected = Mat3::Zero();
        expected(1, 1) = 1.0;
        expected(2, 2) = 0.5;
        CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-15);
        const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Mat3>(build_h_system({2, 0}, resonant())).eigenvalues();
        CHECK(ev(0) == doctest::Approx(-1.0));
        CHECK(std::abs(ev(1)) < 1e-14);
        CHECK(ev(2) == doctest::Approx(1.0));
    }

    TEST_CASE("environment sees attenuated pulses") {
        ModelParams p;
        CHECK((build_h_env({2, 2}, p) - build_h_system({1, 1}, p)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((build_h_env({0, 0}, p).diagonal() - build_h_system({0, 0}, p).diagonal()).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("couplings") {
        ModelParams p;
        CHECK(build_coupling({1, 1}, p).cwiseAbs().maxCoeff() == 0.0);
        p.coupling = CouplingKind::static_;
        p.g = 0.1;
        const Mat9 v = build_coupling({1, 1}, p);
        CHECK(v(tensor_index(2, 3), tensor_index(3, 2)) == cplx(0.1));
        CHECK(v(tensor_index(3, 2), tensor_index(2, 3)) == cplx(0.1));
        CHECK(v.cwiseAbs().sum() == doctest::Approx(0.2));

        ModelParams d = p;
        d.coupling = CouplingKind::dynamical;
        const SpectralFrame zs = system_frame({0, 0}, d), xe = environment_frame({0, 0}, d);
        CHECK((build_coupling({0, 0}, d, &zs, &xe) - v).cwiseAbs().maxCoeff() < 1e-14);
        CHECK_THROWS_AS(build_coupling({0, 0}, d), std::invalid_argument);

        const ControlPoint x{1.7, 2.3};
        const SpectralFrame zx = system_frame(x, d), xx = environment_frame(x, d);
        const Mat9 vd = build_coupling(x, d, &zx, &xx);
        CHECK(hermiticity(vd) < 1e-14);
        Eigen::SelfAdjointEigenSolver<Mat9> es(vd);
        int nonzero = 0;
        for (int k = 0; k < 9; ++k) nonzero += std::abs(es.eigenvalues()(k)) > 1e-12;
        CHECK(nonzero == 2);
    }

    TEST_CASE("all operators are Hermitian") {
        for (CouplingKind k : {CouplingKind::none, CouplingKind::static_, CouplingKind::dynamical}) {
            ModelParams p;
            p.coupling = k;
            p.g = 0.1;
            for (const ControlPoint x : {ControlPoint{0, 0}, ControlPoint{3.1, 0.4}, ControlPoint{1.2, 2.8}}) {
                CHECK(hermiticity(build_h_system(x, p)) < 1e-14);
                CHECK(hermiticity(build_h_env(x, p)) < 1e-14);
                CHECK(hermiticity(build_h_universe(x, p)) < 1e-14);
            }
        }
    }

    TEST_CASE("uncoupled universe") {
        ModelParams p = resonant();
        CHECK(build_h_universe({0, 0}, p).cwiseAbs().maxCoeff() == 0.0);
        p = ModelParams{};
        const ControlPoint x{2.2, 1.1};
        const Mat9 h = build_h_universe(x, p);
        const Eigen::Vector3d es = Eigen::SelfAdjointEigenSolver<Mat3>(build_h_system(x, p)).eigenvalues();
        const Eigen::Vector3d ee = Eigen::SelfAdjointEigenSolver<Mat3>(build_h_env(x, p)).eigenvalues();
        std::vector<double> sums;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sums.push_back(es(i) + ee(j));
        std::sort(sums.begin(), sums.end());
        const Eigen::VectorXd eu = Eigen::SelfAdjointEigenSolver<Mat9>(h).eigenvalues();
        for (int k = 0; k < 9; ++k) CHECK(eu(k) == doctest::Approx(sums[k]).epsilon(1e-12));

        Mat9 hs1 = Mat9::Zero(), he1 = Mat9::Zero();
        const Mat3 hs = build_h_system(x, p), he = build_h_env(x, p);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                for (int j = 0; j < 3; ++j) {
                    hs1(tensor_index(i + 1, j + 1), tensor_index(k + 1, j + 1)) = hs(i, k);
                    he1(tensor_index(j + 1, i + 1), tensor_index(j + 1, k + 1)) = he(i, k);
                }
        CHECK((h * hs1 - hs1 * h).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((h * he1 - he1 * h).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((h - hs1 - he1).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("static coupling splits the |2,3>,|3,2> block at the origin") {
        // with detunings (1, 0) the pair sits at 2 +- 0.1; the 1.5 centre needs delta_s = 0.5
        ModelParams p;
        p.delta_p = 1.0;
        p.delta_s = 0.5;
        p.coupling = CouplingKind::static_;
        p.g = 0.1;
        const Mat9 h = build_h_universe({0, 0}, p);
        const int a = tensor_index(2, 3), b = tensor_index(3, 2);
        Eigen::Matrix2cd block;
        block << h(a, a), h(a, b), h(b, a), h(b, b);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
        CHECK(es.eigenvalues()(0) == doctest::Approx(1.4).epsilon(1e-14));
        CHECK(es.eigenvalues()(1) == doctest::Approx(1.6).epsilon(1e-14));
        const double s = std::sqrt(0.5);
        CHECK(std::abs(std::abs(es.eigenvectors()(0, 1)) - s) < 1e-14);
        CHECK(std::abs(es.eigenvectors()(0, 1) - es.eigenvectors()(1, 1)) < 1e-14);
        CHECK(std::abs(es.eigenvectors()(0, 0) + es.eigenvectors()(1, 0)) < 1e-14);
        for (int k = 0; k < 9; ++k)
            if (k != a && k != b) CHECK(std::abs(h(a, k)) + std::abs(h(b, k)) == 0.0);
    }

    TEST_CASE("pulse path") {
        const PulseParams pp;
        CHECK(pulse_path(70, pp).omega_p() == doctest::Approx(3.5));
        const ControlPoint x20 = pulse_path(20, pp);
        CHECK(x20.omega_s() == doctest::Approx(3.5));
        CHECK(x20.omega_p() == doctest::Approx(0.2177).epsilon(1e-3));
        const ControlPoint start = pulse_path(pp.t0, pp), stop = pulse_path(pp.t_end, pp);
        CHECK(start.omega_p() < 1e-7);
        CHECK(start.omega_s() == doctest::Approx(3.5 * std::exp(-64.0 / 9.0)).epsilon(1e-14));
        CHECK(stop.omega_p() == doctest::Approx(3.5 * std::exp(-49.0 / 9.0)).epsilon(1e-14));
        // counter-intuitive order: Stokes peaks first
        CHECK(pulse_path(20, pp).omega_s() > pulse_path(20, pp).omega_p());
        CHECK(pulse_path(70, pp).omega_p() > pulse_path(70, pp).omega_s());
    }

    TEST_CASE("label helpers") {
        CHECK(tensor_index(1, 1) == 0);
        CHECK(tensor_index(2, 3) == 5);
        CHECK(tensor_index(3, 2) == 7);
        for (int i = 1; i <= 3; ++i)
            for (int alpha = 1; alpha <= 3; ++alpha) {
                const int a = universe_label(i, alpha);
                CHECK(system_factor(a) == i);
                CHECK(env_factor(a) == alpha);
            }
        CHECK(universe_label(3, 2) == 6);
        CHECK(universe_label(2, 3) == 8);
    }

    TEST_CASE("labelled frames tend to the bare basis") {
        const ModelParams p;
        const SpectralFrame zs = system_frame({1e-9, 1e-9}, p);
        for (int i = 1; i <= 3; ++i) CHECK(std::abs(zs.vector(i)(i - 1) - cplx(1.0)) < 1e-8);
        const SpectralFrame u = universe_frame({1e-9, 1e-9}, p);
        for (int a = 1; a <= 9; ++a)
            CHECK(std::abs(u.vector(a)(tensor_index(system_factor(a), env_factor(a)))) > 1 - 1e-8);
    }

    TEST_CASE("resonant labels keep the dark state on label 1") {
        ModelParams p;
        p.delta_p = p.delta_s = 0.0;
        const PulseParams pp;
        const SpectralFrame start = system_frame(pulse_path(pp.t0, pp), p);
        CHECK(std::abs(start.vector(1)(0)) > 1 - 1e-6);
        CHECK(std::abs(start.value(1)) < 1e-12);
        const SpectralFrame mid = system_frame({1.0, 2.0}, p);
        CHECK(std::abs(mid.value(1)) < 1e-12);
        CHECK(mid.value(2) < 0.0);
        CHECK(mid.value(3) > 0.0);
    }

    TEST_CASE("parameter validation") {
        ModelParams p;
        p.g = -0.1;
        CHECK_THROWS(p.validate());
        p = ModelParams{};
        p.attenuation = 0.0;
        CHECK_THROWS(p.validate());
        PulseParams pp;
        pp.tau_p = 0.0;
        CHECK_THROWS(pp.validate());
        pp = PulseParams{};
        pp.t_end = pp.t0;
        CHECK_THROWS(pp.validate());
        CHECK_THROWS(build_h_system({-1.0, 0.0}, ModelParams{}));
        CHECK(parse_coupling("static") == CouplingKind::static_);
        CHECK_THROWS(parse_coupling("strong"));
    }
}
