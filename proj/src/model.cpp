#include "hgauge/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace hgauge {

void ModelParams::validate() const {
    if (!(g >= 0.0)) throw ConfigError("coupling strength g must be >= 0");
    if (!(attenuation > 0.0)) throw ConfigError("attenuation must be > 0");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
    if (homotopy_steps < 1) throw ConfigError("homotopy_steps must be >= 1");
    if (!std::isfinite(delta_p) || !std::isfinite(delta_s)) throw ConfigError("detunings must be finite");
}

void PulseParams::validate() const {
    if (!(tau_p > 0.0) || !(tau_s > 0.0)) throw ConfigError("pulse widths must be > 0");
    if (!(t0 < t_end)) throw ConfigError("pulse window needs t0 < t_end");
    if (!(omega0 >= 0.0)) throw ConfigError("omega0 must be >= 0");
}

const char* to_string(CouplingKind k) {
    switch (k) {
        case CouplingKind::none: return "none";
        case CouplingKind::static_: return "static";
        case CouplingKind::dynamical: return "dynamical";
    }
    return "?";
}

CouplingKind parse_coupling(const std::string& s) {
    if (s == "none") return CouplingKind::none;
    if (s == "static") return CouplingKind::static_;
    if (s == "dynamical") return CouplingKind::dynamical;
    throw ConfigError("unknown coupling kind '" + s + "' (expected none, static or dynamical)");
}

namespace {

void check_point(const ControlPoint& x) {
    if (!(x.x1 >= 0.0) || !(x.x2 >= 0.0))
        throw std::invalid_argument("control point outside the quadrant (negative Rabi frequency)");
}

Mat3 three_level(double wp, double ws, const ModelParams& p) {
    Mat3 h = Mat3::Zero();
    h(0, 1) = h(1, 0) = wp;
    h(1, 2) = h(2, 1) = ws;
    h(1, 1) = 2.0 * p.delta_p;
    h(2, 2) = 2.0 * (p.delta_p - p.delta_s);
    return 0.5 * p.hbar * h;
}

Vec9 kron(const VecX& a, const VecX& b) {
    Vec9 v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v(3 * i + j) = a(i) * b(j);
    return v;
}

// label i -> ascending-eigenvalue column, from the order of the bare energies.
// Tied bare energies (resonant detunings) carry no order, so the columns are
// matched to the bare states at a nearly dark, Stokes-dominated point instead.
std::vector<int> rank_columns(const ModelParams& p) {
    const double e[3] = {0.0, p.delta_p, p.delta_p - p.delta_s};
    const double tol = 1e-12 * (1.0 + std::abs(p.delta_p) + std::abs(p.delta_s));
    bool tied = false;
    double gap = 1.0;
    for (int i = 0; i < 3; ++i)
        for (int k = i + 1; k < 3; ++k) {
            const double d = std::abs(e[i] - e[k]);
            if (d <= tol) tied = true;
            else gap = std::min(gap, d);
        }
    std::vector<int> rank(3);
    if (!tied) {
        for (int i = 0; i < 3; ++i) {
            int r = 0;
            for (int k = 0; k < 3; ++k)
                if (e[k] < e[i]) ++r;
            rank[i] = r;
        }
        return rank;
    }
    const double eps = 1e-3 * gap;
    const ControlPoint ref{eps * eps, eps};
    const SpectralFrame raw = eig_hermitian(three_level(ref.x1, ref.x2, p), ref);
    std::array<bool, 3> used{};
    for (int i = 0; i < 3; ++i) {
        int best = -1;
        for (int c = 0; c < 3; ++c) {
            if (used[c]) continue;
            if (best < 0 || std::abs(raw.vectors(i, c)) > std::abs(raw.vectors(i, best)) + 1e-9) best = c;
        }
        used[best] = true;
        rank[i] = best;
    }
    return rank;
}

SpectralFrame labelled_three_level(const Mat3& h, const ControlPoint& x, const ModelParams& p) {
    const SpectralFrame raw = eig_hermitian(h, x);
    const std::vector<int> rank = rank_columns(p);
    SpectralFrame f;
    f.point = x;
    f.values.resize(3);
    f.vectors.resize(3, 3);
    f.labels = {1, 2, 3};
    for (int i = 0; i < 3; ++i) {
        f.values(i) = raw.values(rank[i]);
        VecX v = raw.vectors.col(rank[i]);
        cplx anchor = v(i);
        if (std::abs(anchor) < 1e-12) {
            Eigen::Index k;
            v.cwiseAbs().maxCoeff(&k);
            anchor = v(k);
        }
        v *= std::conj(anchor) / std::abs(anchor);
        f.vectors.col(i) = v;
    }
    return f;
}

}  // namespace

Mat3 build_h_system(const ControlPoint& x, const ModelParams& p) {
    check_point(x);
    return three_level(x.x1, x.x2, p);
}

Mat3 build_h_env(const ControlPoint& x, const ModelParams& p) {
    check_point(x);
    return three_level(x.x1 / p.attenuation, x.x2 / p.attenuation, p);
}

Mat9 build_coupling(const ControlPoint& x, const ModelParams& p, const SpectralFrame* frames_s,
                    const SpectralFrame* frames_e) {
    Mat9 v = Mat9::Zero();
    switch (p.coupling) {
        case CouplingKind::none: break;
        case CouplingKind::static_:
            v(tensor_index(2, 3), tensor_index(3, 2)) = p.g;
            v(tensor_index(3, 2), tensor_index(2, 3)) = p.g;
            break;
        case CouplingKind::dynamical: {
            if (!frames_s || !frames_e) throw std::invalid_argument("dynamical coupling needs system and environment frames");
            (void)x;
            const Vec9 u = kron(frames_s->vector(2), frames_e->vector(3));
            const Vec9 w = kron(frames_s->vector(3), frames_e->vector(2));
            const Mat9 d = u * w.adjoint();
            v = p.g * (d + d.adjoint());
            break;
        }
    }
    return v;
}

Mat9 build_h_universe(const ControlPoint& x, const ModelParams& p) {
    const Mat3 hs = build_h_system(x, p);
    const Mat3 he = build_h_env(x, p);
    Mat9 h = Mat9::Zero();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                h(3 * i + j, 3 * k + j) += hs(i, k);
                h(3 * j + i, 3 * j + k) += he(i, k);
            }
    if (p.coupling == CouplingKind::dynamical && p.g != 0.0) {
        const SpectralFrame zs = system_frame(x, p);
        const SpectralFrame xe = environment_frame(x, p);
        h += build_coupling(x, p, &zs, &xe);
    } else {
        h += build_coupling(x, p);
    }
    return h;
}

ControlPoint pulse_path(double t, const PulseParams& pp) {
    const double a = (t - pp.t_p) / pp.tau_p;
    const double b = (t - pp.t_s) / pp.tau_s;
    return {pp.omega0 * std::exp(-a * a), pp.omega0 * std::exp(-b * b)};
}

SpectralFrame system_frame(const ControlPoint& x, const ModelParams& p) {
    return labelled_three_level(build_h_system(x, p), x, p);
}

SpectralFrame environment_frame(const ControlPoint& x, const ModelParams& p) {
    return labelled_three_level(build_h_env(x, p), x, p);
}

SpectralFrame product_frame(const SpectralFrame& zs, const SpectralFrame& xe) {
    SpectralFrame f;
    f.point = zs.point;
    f.values.resize(9);
    f.vectors.resize(9, 9);
    f.labels.resize(9);
    for (int a = 1; a <= 9; ++a) {
        const int i = system_factor(a), alpha = env_factor(a);
        f.values(a - 1) = zs.value(i) + xe.value(alpha);
        f.vectors.col(a - 1) = kron(zs.vector(i), xe.vector(alpha));
        f.labels[a - 1] = a;
    }
    return f;
}

SpectralFrame universe_frame(const ControlPoint& x, const ModelParams& p) {
    const SpectralFrame zs = system_frame(x, p);
    const SpectralFrame xe = environment_frame(x, p);
    SpectralFrame f = product_frame(zs, xe);
    if (p.coupling == CouplingKind::none || p.g == 0.0) return f;

    Mat9 h0 = Mat9::Zero();
    const Mat3 hs = build_h_system(x, p);
    const Mat3 he = build_h_env(x, p);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                h0(3 * i + j, 3 * k + j) += hs(i, k);
                h0(3 * j + i, 3 * j + k) += he(i, k);
            }
    ModelParams unit = p;
    unit.g = 1.0;
    const Mat9 v1 = build_coupling(x, unit, &zs, &xe);

    bool broken = false;
    double worst = 1.0;
    for (int k = 1; k <= p.homotopy_steps; ++k) {
        const double gk = p.g * k / p.homotopy_steps;
        const Mat9 h = h0 + gk * v1;
        SpectralFrame next = align_frame(eig_hermitian(h, x), f);
        broken = broken || next.continuation_break;
        worst = std::min(worst, next.min_overlap);
        f = std::move(next);
    }
    f.continuation_break = broken;
    f.min_overlap = worst;
    return f;
}

}  // namespace hgauge
