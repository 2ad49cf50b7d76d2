#include "hgauge/gauge.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "hgauge/kernels.hpp"
#include "hgauge/reduction.hpp"

namespace hgauge {

Stencil derivative_stencil(const Grid2D& grid, int i, int j, int mu) {
    Stencil s;
    if (mu == 0) {
        if (grid.n1 < 2) throw std::invalid_argument("derivative along direction 1 needs n1 >= 2");
        const double h = grid.h1;
        if (i > 0 && i < grid.n1 - 1) {
            s = {grid.index(i - 1, j), grid.index(i + 1, j), 0.5 / h, false};
        } else if (i == 0) {
            s = {grid.index(0, j), grid.index(1, j), 1.0 / h, true};
        } else {
            s = {grid.index(i - 1, j), grid.index(i, j), 1.0 / h, true};
        }
    } else {
        if (grid.n2 < 2) throw std::invalid_argument("derivative along direction 2 needs n2 >= 2");
        const double h = grid.h2;
        if (grid.periodic2) {
            s = {grid.index(i, (j - 1 + grid.n2) % grid.n2), grid.index(i, (j + 1) % grid.n2), 0.5 / h, false};
        } else if (j > 0 && j < grid.n2 - 1) {
            s = {grid.index(i, j - 1), grid.index(i, j + 1), 0.5 / h, false};
        } else if (j == 0) {
            s = {grid.index(i, 0), grid.index(i, 1), 1.0 / h, true};
        } else {
            s = {grid.index(i, j - 1), grid.index(i, j), 1.0 / h, true};
        }
    }
    return s;
}

namespace {

const SpectralFrame& node(const SpectralField& f, int k) { return f.frames[k]; }

Vec9 vec9(const SpectralFrame& f, int label) {
    const VecX v = f.vector(label);
    if (v.size() != 9) throw std::invalid_argument("reduced geometry needs a 9-dimensional universe field");
    return v;
}

}  // namespace

VecX frame_derivative(const SpectralField& field, int label, int i, int j, int mu, bool* one_sided) {
    const Stencil s = derivative_stencil(field.grid, i, j, mu);
    if (one_sided) *one_sided = s.one_sided;
    return (node(field, s.hi).vector(label) - node(field, s.lo).vector(label)) * s.scale;
}

namespace {

struct NodeState {
    Vec9 phi;
    Mat3 rho;
    PseudoInverse pinv;
};

NodeState node_state(const SpectralField& field, int label, int k, const ReductionOptions& opts) {
    NodeState n;
    n.phi = vec9(node(field, k), label);
    n.rho = reduced_state(n.phi);
    n.pinv = pseudo_inverse(n.rho, opts.rank_tol);
    return n;
}

cplx schmidt_determinant(const Vec9& phi) {
    return Eigen::Map<const Eigen::Matrix<cplx, 3, 3, Eigen::RowMajor>>(phi.data()).determinant();
}

// A full-rank coefficient matrix whose determinant turns by a quarter turn or
// more across one lattice edge passes through a singular point between the
// nodes: the rank drops there even though both ends have rank 3.
bool rank_dips_between(const NodeState& a, const NodeState& b) {
    if (a.pinv.rank != 3 || b.pinv.rank != 3) return false;
    const cplx da = schmidt_determinant(a.phi);
    const cplx db = schmidt_determinant(b.phi);
    return (da * std::conj(db)).real() <= 0.0;
}

bool node_suspect(const SpectralField& field, int label, int k, const ReductionOptions& opts) {
    const SpectralFrame& f = node(field, k);
    return f.label_broken(label) || f.gap(label) < opts.gap_floor;
}

// shared part of both connection forms
GaugeSample connection_sample(const SpectralField& field, int label, int i, int j, const ReductionOptions& opts,
                              bool project) {
    const Grid2D& g = field.grid;
    const int k = g.index(i, j);
    const NodeState c = node_state(field, label, k, opts);

    GaugeSample out;
    out.point = g.point(i, j);
    out.flagged = node_suspect(field, label, k, opts);
    for (int mu = 0; mu < 2; ++mu) {
        const Stencil s = derivative_stencil(g, i, j, mu);
        out.one_sided = out.one_sided || s.one_sided;
        for (int nb : {s.lo, s.hi}) {
            if (nb == k) continue;
            if (node_suspect(field, label, nb, opts)) out.flagged = true;
            const NodeState n = node_state(field, label, nb, opts);
            if (n.pinv.rank != c.pinv.rank || rank_dips_between(c, n)) out.flagged = true;
        }
        const Vec9 dphi = (vec9(node(field, s.hi), label) - vec9(node(field, s.lo), label)) * s.scale;
        const Mat3 full = partial_trace_dyad(dphi, c.phi) * c.pinv.inverse;
        out.scalar[mu] = (c.rho * full).trace();
        if (project) {
            const cplx a = kernels::active().dotc(c.phi.data(), dphi.data(), 9);
            out.comp[mu] = partial_trace_dyad(c.phi * a, c.phi) * c.pinv.inverse;
        } else {
            out.comp[mu] = full;
        }
    }
    return out;
}

}  // namespace

GaugeSample cstar_connection(const SpectralField& field, int label, int i, int j, const ReductionOptions& opts) {
    return connection_sample(field, label, i, j, opts, false);
}

GaugeSample reduced_potential(const SpectralField& field, int label, int i, int j, const ReductionOptions& opts) {
    return connection_sample(field, label, i, j, opts, true);
}

namespace {

// d1 c2 - d2 c1 - (c1 c2 - c2 c1) with the stencil flags of the samples used
TwoFormSample exterior(const GaugeField& conn, int i, int j) {
    const Grid2D& g = conn.grid;
    const GaugeSample& c = conn.at(i, j);
    const Stencil s1 = derivative_stencil(g, i, j, 0);
    const Stencil s2 = derivative_stencil(g, i, j, 1);
    TwoFormSample out;
    out.one_sided = c.one_sided || s1.one_sided || s2.one_sided;
    out.flagged = c.flagged;
    for (int nb : {s1.lo, s1.hi, s2.lo, s2.hi}) {
        out.one_sided = out.one_sided || conn.samples[nb].one_sided;
        out.flagged = out.flagged || conn.samples[nb].flagged;
    }
    const MatX d1c2 = (conn.samples[s1.hi].comp[1] - conn.samples[s1.lo].comp[1]) * s1.scale;
    const MatX d2c1 = (conn.samples[s2.hi].comp[0] - conn.samples[s2.lo].comp[0]) * s2.scale;
    out.f12 = d1c2 - d2c1 - (c.comp[0] * c.comp[1] - c.comp[1] * c.comp[0]);
    return out;
}

}  // namespace

TwoFormSample curving(const GaugeField& conn, int i, int j) { return exterior(conn, i, j); }

TwoFormSample fake_curvature(const GaugeField& red, const TwoFormField& curv, int i, int j) {
    TwoFormSample out = exterior(red, i, j);
    const TwoFormSample& b = curv.at(i, j);
    out.f12 -= b.f12;
    out.one_sided = out.one_sided || b.one_sided;
    out.flagged = out.flagged || b.flagged;
    return out;
}

cplx field_average(const MatX& rho, const MatX& m) {
    if (rho.rows() != m.cols() || rho.cols() != m.rows()) throw std::invalid_argument("field_average: shape mismatch");
    cplx s = 0.0;
    for (int p = 0; p < rho.rows(); ++p)
        for (int q = 0; q < rho.cols(); ++q) s += rho(p, q) * m(q, p);
    return s;
}

bool plaquette_phase(const SpectralField& field, int label, int i, int j, double* phase) {
    const Grid2D& g = field.grid;
    const int ip = i + 1;
    const int jp = g.periodic2 ? (j + 1) % g.n2 : j + 1;
    if (ip >= g.n1 || jp >= g.n2) throw std::out_of_range("plaquette outside the grid");
    const int corners[4] = {g.index(i, j), g.index(ip, j), g.index(ip, jp), g.index(i, jp)};
    const auto& dot = kernels::active().dotc;
    cplx u = 1.0;
    for (int c = 0; c < 4; ++c) {
        const VecX a = node(field, corners[c]).vector(label);
        const VecX b = node(field, corners[(c + 1) % 4]).vector(label);
        const cplx link = dot(a.data(), b.data(), static_cast<int>(a.size()));
        const double mag = std::abs(link);
        if (mag < 1e-12) return false;
        u *= link / mag;
    }
    *phase = std::arg(u);
    return true;
}

BerryValue berry_curvature(const SpectralField& field, int label, int i, int j, BerryMethod method,
                           double gap_floor) {
    const Grid2D& g = field.grid;
    BerryValue out;
    if (method == BerryMethod::overlap_diff) {
        double sum = 0.0;
        int cells = 0;
        for (int ci = i - 1; ci <= i; ++ci) {
            for (int cj = j - 1; cj <= j; ++cj) {
                int cjw = cj;
                if (g.periodic2) cjw = (cj + g.n2) % g.n2;
                if (ci < 0 || ci >= g.n1 - 1 || cjw < 0 || (!g.periodic2 && cjw >= g.n2 - 1)) continue;
                double ph = 0.0;
                if (!plaquette_phase(field, label, ci, cjw, &ph)) {
                    out.masked = true;
                    continue;
                }
                sum += ph;
                ++cells;
            }
        }
        out.one_sided = cells < 4;
        if (cells == 0) {
            out.masked = true;
            return out;
        }
        out.f12 = cplx(0.0, sum / cells / (g.h1 * g.h2));
        return out;
    }

    const SpectralFrame& f = field.at(i, j);
    std::array<MatX, 2> dh;
    for (int mu = 0; mu < 2; ++mu) {
        const Stencil s = derivative_stencil(g, i, j, mu);
        out.one_sided = out.one_sided || s.one_sided;
        dh[mu] = (field.hamiltonians[s.hi] - field.hamiltonians[s.lo]) * s.scale;
    }
    const int a = f.column_of(label);
    const VecX va = f.vectors.col(a);
    const VecX h1a = dh[0] * va;
    const VecX h2a = dh[1] * va;
    cplx sum = 0.0;
    for (int b = 0; b < f.dim(); ++b) {
        if (b == a) continue;
        const double gap = f.values(a) - f.values(b);
        if (std::abs(gap) < gap_floor) {
            out.masked = true;
            continue;
        }
        const VecX vb = f.vectors.col(b);
        const cplx b1a = vb.dot(h1a);  // <b|dH1|a>
        const cplx b2a = vb.dot(h2a);
        sum += (std::conj(b1a) * b2a - std::conj(b2a) * b1a) / (gap * gap);
    }
    if (f.label_broken(label)) out.masked = true;
    out.f12 = sum;
    return out;
}

namespace {

std::array<MatX, 2> nonabelian_potential(const SpectralField& field, const std::vector<int>& labels, int k,
                                         bool* one_sided, bool* broken) {
    const Grid2D& g = field.grid;
    const int i = k / g.n2, j = k % g.n2;
    const int n = static_cast<int>(labels.size());
    const SpectralFrame& f = node(field, k);
    std::array<MatX, 2> a;
    for (int mu = 0; mu < 2; ++mu) {
        const Stencil s = derivative_stencil(g, i, j, mu);
        *one_sided = *one_sided || s.one_sided;
        for (int nb : {s.lo, s.hi})
            for (int l : labels) *broken = *broken || node(field, nb).label_broken(l);
        a[mu].resize(n, n);
        for (int q = 0; q < n; ++q) {
            const VecX d = (node(field, s.hi).vector(labels[q]) - node(field, s.lo).vector(labels[q])) * s.scale;
            for (int p = 0; p < n; ++p) a[mu](p, q) = f.vector(labels[p]).dot(d);
        }
    }
    return a;
}

}  // namespace

NonAbelianValue nonabelian_curvature(const SpectralField& field, const std::vector<int>& labels, int i, int j) {
    const Grid2D& g = field.grid;
    NonAbelianValue out;
    bool broken = false;
    for (int l : labels) broken = broken || field.at(i, j).label_broken(l);
    const std::array<MatX, 2> c = nonabelian_potential(field, labels, g.index(i, j), &out.one_sided, &broken);
    const Stencil s1 = derivative_stencil(g, i, j, 0);
    const Stencil s2 = derivative_stencil(g, i, j, 1);
    out.one_sided = out.one_sided || s1.one_sided || s2.one_sided;
    const MatX a2_hi = nonabelian_potential(field, labels, s1.hi, &out.one_sided, &broken)[1];
    const MatX a2_lo = nonabelian_potential(field, labels, s1.lo, &out.one_sided, &broken)[1];
    const MatX a1_hi = nonabelian_potential(field, labels, s2.hi, &out.one_sided, &broken)[0];
    const MatX a1_lo = nonabelian_potential(field, labels, s2.lo, &out.one_sided, &broken)[0];
    out.f12 = (a2_hi - a2_lo) * s1.scale - (a1_hi - a1_lo) * s2.scale + (c[0] * c[1] - c[1] * c[0]);
    out.masked = broken;
    return out;
}

MatX holonomy(const std::vector<GaugeSample>& samples, PathOrdering ordering) {
    if (samples.empty()) return MatX::Identity(3, 3);
    const int n = static_cast<int>(samples.front().comp[0].rows());
    MatX u = MatX::Identity(n, n);
    for (size_t k = 0; k + 1 < samples.size(); ++k) {
        const GaugeSample& a = samples[k];
        const GaugeSample& b = samples[k + 1];
        const double dx1 = b.point.x1 - a.point.x1;
        const double dx2 = b.point.x2 - a.point.x2;
        const MatX gen = -0.5 * ((a.comp[0] + b.comp[0]) * dx1 + (a.comp[1] + b.comp[1]) * dx2);
        const MatX step = gen.exp();
        u = (ordering == PathOrdering::ordered) ? MatX(step * u) : MatX(u * step);
    }
    return u;
}

LoopAreaResult loop_area_check(const Mat3& rho, const Mat3& b12, double delta) {
    LoopAreaResult r;
    r.lhs = (rho * b12).trace().real() * delta;
    const Mat3 x = b12 * delta;
    const Mat3 tau = x.exp() * rho;
    r.rhs = -relative_entropy(rho, tau);
    return r;
}

ReducedGeometry::ReducedGeometry(const SpectralField& field, int label, const ReductionOptions& opts, int threads)
    : grid_(field.grid), label_(label) {
    const int n = grid_.size();
    rho_.resize(n);
    rank_.resize(n);
    entropy_.resize(n);
    degenerate_.resize(n);
    cstar_.grid = reduced_.grid = curving_.grid = fake_.grid = grid_;
    cstar_.samples.resize(n);
    reduced_.samples.resize(n);
    curving_.samples.resize(n);
    fake_.samples.resize(n);

    parallel_for(n, threads, [&](int k) {
        const int i = k / grid_.n2, j = k % grid_.n2;
        const NodeState s = node_state(field, label, k, opts);
        rho_[k] = s.rho;
        rank_[k] = s.pinv.rank;
        entropy_[k] = von_neumann_entropy(s.rho);
        degenerate_[k] = field.frames[k].gap(label) < opts.gap_floor;
        cstar_.samples[k] = cstar_connection(field, label, i, j, opts);
        reduced_.samples[k] = reduced_potential(field, label, i, j, opts);
    });
    parallel_for(n, threads, [&](int k) { curving_.samples[k] = curving(cstar_, k / grid_.n2, k % grid_.n2); });
    parallel_for(n, threads, [&](int k) { fake_.samples[k] = fake_curvature(reduced_, curving_, k / grid_.n2, k % grid_.n2); });
}

cplx ReducedGeometry::curving_average(int i, int j) const {
    return field_average(rho(i, j), curving_.at(i, j).f12);
}

cplx ReducedGeometry::fake_average(int i, int j) const { return field_average(rho(i, j), fake_.at(i, j).f12); }

bool ReducedGeometry::two_form_masked(int i, int j) const {
    return curving_.at(i, j).masked() || fake_.at(i, j).masked();
}

LoopAreaResult ReducedGeometry::loop_check(int i, int j, double delta) const {
    if (!(delta > 0.0)) throw std::invalid_argument("loop check: loop area must be positive");
    const double half = 0.5 * std::sqrt(delta);
    const double room1 = std::min(i, grid_.n1 - 1 - i) * grid_.h1;
    const double room2 = std::min(j, grid_.n2 - 1 - j) * grid_.h2;
    if (half > room1 || half > room2) throw std::invalid_argument("loop check: loop does not fit inside the grid");
    return loop_area_check(rho(i, j), curving_.at(i, j).f12, delta);
}

}  // namespace hgauge
