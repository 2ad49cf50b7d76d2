#include "hgauge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hgauge/kernels.hpp"
#include "hgauge/reduction.hpp"

namespace hgauge {

double TrajectoryRecord::max_norm_drift() const {
    double m = peak_norm_drift;
    for (double d : norm_drift) m = std::max(m, d);
    return m;
}

namespace {

double spectral_radius(const MatX& h) {
    Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

VecX exact_step(const MatX& h, const VecX& psi, double dt, double hbar) {
    Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (h + h.adjoint()));
    const Eigen::VectorXd& lam = es.eigenvalues();
    VecX phases(lam.size());
    for (int k = 0; k < lam.size(); ++k) phases(k) = std::polar(1.0, -lam(k) * dt / hbar);
    const MatX& u = es.eigenvectors();
    return u * phases.asDiagonal() * (u.adjoint() * psi);
}

}  // namespace

TrajectoryRecord propagate(const VecX& psi0, const TimeHamiltonian& h, double t0, double t_end,
                           const PropagationOptions& opts) {
    if (!(opts.dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (opts.stride < 1) throw std::invalid_argument("storage stride must be >= 1");
    if (!(t_end > t0)) throw std::invalid_argument("propagation window needs t_end > t0");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state is not normalised");

    const long steps = std::max(1L, std::lround((t_end - t0) / opts.dt));
    const double dt = (t_end - t0) / steps;
    const int d = static_cast<int>(psi0.size());

    // stability: dt * |H| / hbar must stay below 1/2 along the whole window
    double radius = 0.0;
    for (int k = 0; k <= 200; ++k) radius = std::max(radius, spectral_radius(h(t0 + (t_end - t0) * k / 200.0)));
    if (dt * radius / opts.hbar >= 0.5) {
        std::ostringstream msg;
        msg << "time step " << dt << " violates the stability bound (|H| = " << radius << "); use dt <= "
            << 0.4 * opts.hbar / radius;
        throw NumericalError(msg.str());
    }

    const kernels::KernelTable& kt = kernels::active();
    TrajectoryRecord rec;
    rec.dt = dt;
    rec.steps = steps;
    auto store = [&](long n, const VecX& psi) {
        rec.times.push_back(t0 + n * dt);
        rec.states.push_back(psi);
        rec.norm_drift.push_back(std::abs(std::sqrt(kt.norm2(psi.data(), d)) - 1.0));
    };

    VecX prev = psi0;
    VecX cur = exact_step(h(t0), psi0, dt, opts.hbar);
    VecX next(d), hpsi(d);
    store(0, prev);
    if (opts.stride == 1 || steps == 1) store(1, cur);

    const cplx coef(0.0, -2.0 * dt / opts.hbar);
    for (long n = 1; n < steps; ++n) {
        const MatX hn = h(t0 + n * dt);
        kt.gemv(hn.data(), cur.data(), hpsi.data(), d);
        kt.axpy(coef, hpsi.data(), prev.data(), next.data(), d);
        std::swap(prev, cur);
        std::swap(cur, next);
        const long m = n + 1;
        rec.peak_norm_drift = std::max(rec.peak_norm_drift, std::abs(std::sqrt(kt.norm2(cur.data(), d)) - 1.0));
        if (m % opts.stride == 0 || m == steps) {
            if (!cur.allFinite()) {
                std::ostringstream msg;
                msg << "propagation produced a non-finite state at step " << m << " (t = " << t0 + m * dt << ")";
                throw NumericalError(msg.str());
            }
            store(m, cur);
        }
    }
    return rec;
}

TrajectoryRecord sod_propagate(const Vec9& psi0, const ModelParams& p, const PulseParams& pp,
                               const PropagationOptions& opts) {
    PropagationOptions o = opts;
    o.hbar = p.hbar;
    auto h = [&](double t) -> MatX { return build_h_universe(pulse_path(t, pp), p); };
    return propagate(psi0, h, pp.t0, pp.t_end, o);
}

Vec9 initial_state(const std::vector<std::pair<int, cplx>>& weights, const ModelParams& p, const PulseParams& pp) {
    if (weights.empty()) throw std::invalid_argument("initial state needs at least one label");
    const SpectralFrame f = universe_frame(pulse_path(pp.t0, pp), p);
    Vec9 psi = Vec9::Zero();
    for (const auto& [label, w] : weights) {
        if (label < 1 || label > 9) throw std::invalid_argument("initial state label outside 1..9");
        psi += w * Vec9(f.vector(label));
    }
    const double n = psi.norm();
    if (!(n > 0.0)) throw std::invalid_argument("initial state weights cancel");
    return psi / n;
}

OccupationSeries occupations(const TrajectoryRecord& traj, OccupationBasis basis, const ModelParams& p,
                             const PulseParams& pp) {
    OccupationSeries out;
    out.basis = basis;
    out.values.reserve(traj.times.size());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const Vec9 psi = traj.states[k];
        const ControlPoint x = pulse_path(traj.times[k], pp);
        std::vector<double> row;
        bool broken = false;
        switch (basis) {
            case OccupationBasis::bare: {
                const Mat3 rho = reduced_state(psi);
                for (int i = 0; i < 3; ++i) row.push_back(rho(i, i).real());
                break;
            }
            case OccupationBasis::system_instantaneous: {
                const Mat3 rho = reduced_state(psi);
                const SpectralFrame f = system_frame(x, p);
                broken = f.continuation_break;
                for (int i = 1; i <= 3; ++i) {
                    const Vec3 z = f.vector(i);
                    row.push_back(z.dot(rho * z).real());
                }
                break;
            }
            case OccupationBasis::universe_instantaneous: {
                const SpectralFrame f = universe_frame(x, p);
                broken = f.continuation_break;
                for (int a = 1; a <= 9; ++a) row.push_back(std::norm(Vec9(f.vector(a)).dot(psi)));
                break;
            }
        }
        if (broken && out.flagged_from < 0) out.flagged_from = static_cast<int>(k);
        out.values.push_back(std::move(row));
    }
    return out;
}

std::vector<double> entropy_series(const TrajectoryRecord& traj) {
    std::vector<double> s;
    s.reserve(traj.states.size());
    for (const VecX& psi : traj.states) s.push_back(von_neumann_entropy(reduced_state(Vec9(psi))));
    return s;
}

}  // namespace hgauge
