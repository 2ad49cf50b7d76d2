#include "hgauge/reduction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hgauge {

DensityMatrix::DensityMatrix(const Mat3& m) : m_(m) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(m.trace() - 1.0) > 1e-10) throw std::invalid_argument("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("density matrix has a negative eigenvalue");
}

Mat3 partial_trace_env(const Mat9& m) {
    Mat3 out = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) out(i, k) += m(3 * i + j, 3 * k + j);
    return out;
}

namespace {

Mat3 reshape(const Vec9& v) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = v(3 * i + j);
    return m;
}

}  // namespace

Mat3 reduced_state(const Vec9& psi) {
    const Mat3 phi = reshape(psi);
    return phi * phi.adjoint();
}

Mat3 partial_trace_dyad(const Vec9& u, const Vec9& v) { return reshape(u) * reshape(v).adjoint(); }

PseudoInverse pseudo_inverse(const Mat3& rho, double tol) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (rho + rho.adjoint()));
    const Eigen::Vector3d lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    if (!(top >= 1e-300)) throw NumericalError("pseudo_inverse: matrix is numerically zero");
    PseudoInverse out;
    Eigen::Vector3d inv = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
        if (lam(k) > tol * top) {
            inv(k) = 1.0 / lam(k);
            ++out.rank;
        }
    }
    const Mat3& u = es.eigenvectors();
    out.inverse = u * inv.cast<cplx>().asDiagonal() * u.adjoint();
    return out;
}

namespace {

double xlogx_sum(const Eigen::Vector3d& lam) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        double p = lam(k);
        if (p < -1e-8) {
            std::ostringstream msg;
            msg << "entropy: eigenvalue " << p << " is negative beyond the clamp window";
            throw NumericalError(msg.str());
        }
        if (p > 0.0) s += p * std::log(p);
    }
    return s;
}

}  // namespace

double von_neumann_entropy(const Mat3& rho) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    const double s = -xlogx_sum(es.eigenvalues());
    return s > 0.0 ? s : 0.0;
}

cplx relative_entropy_complex(const Mat3& rho, const Mat3& tau) {
    Eigen::SelfAdjointEigenSolver<Mat3> er(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    const double rho_log_rho = xlogx_sum(er.eigenvalues());

    Eigen::ComplexEigenSolver<Mat3> et(tau);
    if (et.info() != Eigen::Success) throw NumericalError("relative_entropy: eigensolver failed on tau");
    const Eigen::Vector3cd mu = et.eigenvalues();
    const Mat3& s = et.eigenvectors();
    Eigen::FullPivLU<Mat3> lu(s);
    if (!lu.isInvertible() || 1.0 / lu.rcond() > 1e12)
        throw NumericalError("relative_entropy: tau is not diagonalizable to working precision");
    const Mat3 t = lu.solve(rho * s);

    const double scale = mu.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return std::numeric_limits<double>::infinity();
    cplx rho_log_tau = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(mu(k)) <= 1e-14 * scale) {
            if (std::abs(t(k, k)) > 1e-12) return std::numeric_limits<double>::infinity();
            continue;
        }
        if (mu(k).real() <= 0.0) throw NumericalError("relative_entropy: tau has spectrum off the right half-plane");
        rho_log_tau += t(k, k) * std::log(mu(k));
    }
    return rho_log_rho - rho_log_tau;
}

double relative_entropy(const Mat3& rho, const Mat3& tau) {
    const cplx v = relative_entropy_complex(rho, tau);
    return v.real();
}

}  // namespace hgauge
