#include "hgauge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "hgauge/kernels.hpp"

namespace hgauge {

Grid2D square_grid(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("grid needs at least 2 nodes per side");
    Grid2D g;
    g.origin = {lo, lo};
    g.h1 = g.h2 = (hi - lo) / (n - 1);
    g.n1 = g.n2 = n;
    return g;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n < 2) {
        for (int k = 0; k < n; ++k) fn(k);
        return;
    }
    const int t = std::min(threads, n);
    std::vector<std::exception_ptr> errors(t);
    std::vector<int> error_index(t, n);
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            const int lo = static_cast<int>(static_cast<long>(n) * w / t);
            const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / t);
            for (int k = lo; k < hi; ++k) {
                try {
                    fn(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                    error_index[w] = k;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    // report the failure with the lowest index so the message is deterministic
    int first = -1;
    for (int w = 0; w < t; ++w)
        if (errors[w] && (first < 0 || error_index[w] < error_index[first])) first = w;
    if (first >= 0) std::rethrow_exception(errors[first]);
}

int SpectralFrame::column_of(int label) const {
    for (int k = 0; k < static_cast<int>(labels.size()); ++k)
        if (labels[k] == label) return k;
    throw std::out_of_range("label " + std::to_string(label) + " not present in frame");
}

double SpectralFrame::gap(int label) const {
    const int c = column_of(label);
    double g = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim(); ++k)
        if (k != c) g = std::min(g, std::abs(values(k) - values(c)));
    return g;
}

bool SpectralFrame::label_broken(int label) const {
    if (continuation_break) return true;
    if (broken.empty()) return false;
    return broken[column_of(label)] != 0;
}

double hermiticity_defect(const MatX& h) {
    const double scale = h.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

namespace {

void fix_phase_largest_entry(MatX& v) {
    for (int c = 0; c < v.cols(); ++c) {
        const double top = v.col(c).cwiseAbs().maxCoeff();
        int k = 0;
        while (std::abs(v(k, c)) < top - 1e-12) ++k;
        const cplx z = v(k, c);
        if (std::abs(z) > 0.0) v.col(c) *= std::conj(z) / std::abs(z);
    }
}

MatX overlaps(const MatX& ref, const MatX& cur) {
    MatX o(ref.cols(), cur.cols());
    kernels::active().adjoint_mul(ref.data(), cur.data(), o.data(), static_cast<int>(ref.rows()),
                                  static_cast<int>(ref.cols()), static_cast<int>(cur.cols()));
    return o;
}

// Rotate near-degenerate clusters of `cur` so each cluster spans the reference
// directions it overlaps most, with the polar (Procrustes) choice of basis.
void align_clusters(MatX& vecs, const Eigen::VectorXd& vals, const MatX& ref, double gap_floor) {
    const int d = static_cast<int>(vals.size());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals(a) < vals(b); });

    int start = 0;
    while (start < d) {
        int end = start + 1;
        while (end < d && vals(order[end]) - vals(order[end - 1]) < gap_floor) ++end;
        const int m = end - start;
        if (m > 1) {
            std::vector<int> cols(order.begin() + start, order.begin() + end);
            std::sort(cols.begin(), cols.end());
            MatX o = overlaps(ref, vecs(Eigen::all, cols));
            std::vector<int> refs(ref.cols());
            std::iota(refs.begin(), refs.end(), 0);
            std::stable_sort(refs.begin(), refs.end(),
                             [&](int a, int b) { return o.row(a).squaredNorm() > o.row(b).squaredNorm(); });
            refs.resize(m);
            std::sort(refs.begin(), refs.end());
            MatX mm = o(refs, Eigen::all);
            if ((mm - mm.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
                Eigen::JacobiSVD<MatX> svd(mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
                const MatX q = svd.matrixV() * svd.matrixU().adjoint();
                const MatX rotated = vecs(Eigen::all, cols) * q;
                for (int k = 0; k < m; ++k) vecs.col(cols[k]) = rotated.col(k);
            }
        }
        start = end;
    }
}

void strip_phase(Eigen::Ref<VecX> v, const cplx& o) {
    const double mag = std::abs(o);
    if (mag < 1e-14) return;
    if (o.real() > 0.0 && std::abs(o.imag()) <= 1e-15 * mag) return;
    v *= std::conj(o) / mag;
}

}  // namespace

SpectralFrame eig_hermitian(const MatX& h, ControlPoint point) {
    if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("eig_hermitian: matrix must be square");
    if (!h.allFinite()) throw NumericalError("eig_hermitian: non-finite matrix entries");
    const double defect = hermiticity_defect(h);
    if (defect > 1e-10) {
        std::ostringstream msg;
        msg << "eig_hermitian: matrix is not Hermitian (relative defect " << defect << ")";
        throw std::invalid_argument(msg.str());
    }
    const MatX sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<MatX> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("eig_hermitian: eigensolver did not converge");

    SpectralFrame f;
    f.point = point;
    f.values = solver.eigenvalues();
    f.vectors = solver.eigenvectors();
    fix_phase_largest_entry(f.vectors);
    f.labels.resize(f.values.size());
    std::iota(f.labels.begin(), f.labels.end(), 1);
    return f;
}

SpectralFrame align_frame(const SpectralFrame& frame, const SpectralFrame& reference, const SpectralOptions& opts,
                          AlignMode mode) {
    const int d = frame.dim();
    if (reference.dim() != d) throw std::invalid_argument("align_frame: dimension mismatch");

    SpectralFrame out;
    out.point = frame.point;
    out.values.resize(d);
    out.vectors.resize(d, d);
    out.labels = reference.labels;

    if (mode == AlignMode::phase_only) {
        double worst = 1.0;
        for (int r = 0; r < d; ++r) {
            const int c = frame.column_of(reference.labels[r]);
            out.values(r) = frame.values(c);
            out.vectors.col(r) = frame.vectors.col(c);
            const cplx o = kernels::active().dotc(reference.vectors.col(r).data(), frame.vectors.col(c).data(), d);
            worst = std::min(worst, std::abs(o));
            strip_phase(out.vectors.col(r), o);
        }
        out.min_overlap = worst;
        out.continuation_break = frame.continuation_break || worst < opts.overlap_floor;
        return out;
    }

    MatX vecs = frame.vectors;
    align_clusters(vecs, frame.values, reference.vectors, opts.gap_floor);
    const MatX o = overlaps(reference.vectors, vecs);

    struct Pair {
        double mag;
        int r, c;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<size_t>(d) * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) pairs.push_back({std::abs(o(r, c)), r, c});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.mag > b.mag; });

    std::vector<int> assign(d, -1);
    std::vector<char> used(d, 0);
    double worst = 1.0;
    int placed = 0;
    for (const Pair& p : pairs) {
        if (placed == d) break;
        if (assign[p.r] >= 0 || used[p.c]) continue;
        assign[p.r] = p.c;
        used[p.c] = 1;
        worst = std::min(worst, p.mag);
        ++placed;
    }

    out.min_overlap = worst;
    if (worst < opts.overlap_floor) {
        // ascending-eigenvalue fallback: k-th lowest new level takes the label
        // of the k-th lowest reference level
        out.continuation_break = true;
        std::vector<int> rs(d), cs(d);
        std::iota(rs.begin(), rs.end(), 0);
        std::iota(cs.begin(), cs.end(), 0);
        std::stable_sort(rs.begin(), rs.end(),
                         [&](int a, int b) { return reference.values(a) < reference.values(b); });
        std::stable_sort(cs.begin(), cs.end(), [&](int a, int b) { return frame.values(a) < frame.values(b); });
        for (int k = 0; k < d; ++k) assign[rs[k]] = cs[k];
    }

    for (int r = 0; r < d; ++r) {
        const int c = assign[r];
        out.values(r) = frame.values(c);
        out.vectors.col(r) = vecs.col(c);
        strip_phase(out.vectors.col(r), o(r, c));
    }
    return out;
}

namespace {

double min_gap(const SpectralFrame& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int label : f.labels) m = std::min(m, f.gap(label));
    return m;
}

template <class Build>
SpectralField sweep(const Grid2D& grid, const HamiltonianFn& hamiltonian, Build build, const SpectralFrame& seed,
                    const SpectralOptions& opts, int threads, AlignMode mode) {
    if (grid.n1 < 1 || grid.n2 < 1) throw std::invalid_argument("spectral_field: empty grid");
    SpectralField field;
    field.grid = grid;
    field.frames.resize(grid.size());
    field.hamiltonians.resize(grid.size());

    parallel_for(grid.size(), threads, [&](int k) {
        const int i = k / grid.n2, j = k % grid.n2;
        const ControlPoint x = grid.point(i, j);
        try {
            field.hamiltonians[k] = hamiltonian(x);
            field.frames[k] = build(field.hamiltonians[k], x);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "spectral field evaluation failed at node (" << i << ", " << j << ") x = (" << x.x1 << ", "
                << x.x2 << "): " << e.what();
            throw NumericalError(msg.str());
        }
    });

    // Labels at a degenerate seed are only a convention. Continuing them from a
    // point just inside the grid keeps the two axes from inheriting unrelated
    // choices through the degenerate corner.
    SpectralFrame origin_ref = seed;
    if (mode == AlignMode::permute && grid.size() > 1 && min_gap(seed) < opts.gap_floor) {
        const double step = 1e-4;
        const ControlPoint inner{grid.origin.x1 + (grid.n1 > 1 ? std::copysign(step, grid.h1) : 0.0),
                                 grid.origin.x2 + (grid.n2 > 1 ? std::copysign(step, grid.h2) : 0.0)};
        origin_ref = align_frame(build(hamiltonian(inner), inner), seed, opts, mode);
    }

    for (int i = 0; i < grid.n1; ++i) {
        for (int j = 0; j < grid.n2; ++j) {
            const SpectralFrame& ref = (i == 0 && j == 0) ? origin_ref
                                       : (i > 0)          ? field.at(i - 1, j)
                                                          : field.at(i, j - 1);
            SpectralFrame& f = field.frames[grid.index(i, j)];
            f = align_frame(f, ref, opts, mode);
            f.broken.assign(f.dim(), 0);
        }
    }

    const auto& dot = kernels::active().dotc;
    auto check_edge = [&](SpectralFrame& a, SpectralFrame& b) {
        for (int c = 0; c < a.dim(); ++c) {
            const int cb = b.column_of(a.labels[c]);
            const double o = std::abs(dot(a.vectors.col(c).data(), b.vectors.col(cb).data(), a.dim()));
            a.min_overlap = std::min(a.min_overlap, o);
            b.min_overlap = std::min(b.min_overlap, o);
            if (o < opts.overlap_floor) a.broken[c] = b.broken[cb] = 1;
        }
    };
    for (int i = 0; i < grid.n1; ++i) {
        for (int j = 0; j < grid.n2; ++j) {
            SpectralFrame& f = field.frames[grid.index(i, j)];
            if (i + 1 < grid.n1) check_edge(f, field.frames[grid.index(i + 1, j)]);
            if (j + 1 < grid.n2) check_edge(f, field.frames[grid.index(i, j + 1)]);
            else if (grid.periodic2 && grid.n2 > 2) check_edge(f, field.frames[grid.index(i, 0)]);
        }
    }
    for (const SpectralFrame& f : field.frames) {
        bool any = f.continuation_break;
        for (char b : f.broken) any = any || b;
        if (any) ++field.breaks;
    }
    return field;
}

}  // namespace

SpectralField spectral_field(const Grid2D& grid, const HamiltonianFn& hamiltonian, const SpectralFrame& seed,
                             const SpectralOptions& opts, int threads) {
    auto build = [](const MatX& h, const ControlPoint& x) { return eig_hermitian(h, x); };
    return sweep(grid, hamiltonian, build, seed, opts, threads, AlignMode::permute);
}

SpectralField labeled_field(const Grid2D& grid, const HamiltonianFn& hamiltonian, const FrameFn& frames,
                            const SpectralFrame& seed, const SpectralOptions& opts, int threads) {
    auto build = [&](const MatX&, const ControlPoint& x) { return frames(x); };
    return sweep(grid, hamiltonian, build, seed, opts, threads, AlignMode::phase_only);
}

}  // namespace hgauge
