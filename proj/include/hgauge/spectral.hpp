#pragma once

#include <functional>
#include <vector>

#include "hgauge/types.hpp"

namespace hgauge {

struct SpectralOptions {
    double overlap_floor = 0.5;
    double gap_floor = 1e-8;
};

// Eigenpairs at one point. Column k of `vectors` carries label labels[k];
// values[k] is its eigenvalue. After alignment the column order follows the
// reference, so a frame continued from a seed labelled 1..d has labels[k] = k+1.
struct SpectralFrame {
    ControlPoint point;
    Eigen::VectorXd values;
    MatX vectors;
    std::vector<int> labels;
    // whole-frame break (relabel fallback or failed frame construction)
    bool continuation_break = false;
    // per-column break: weak same-label overlap with a lattice neighbour
    std::vector<char> broken;
    double min_overlap = 1.0;

    int dim() const { return static_cast<int>(values.size()); }
    int column_of(int label) const;
    double value(int label) const { return values(column_of(label)); }
    VecX vector(int label) const { return vectors.col(column_of(label)); }
    // smallest distance from the eigenvalue of `label` to any other eigenvalue
    double gap(int label) const;
    bool label_broken(int label) const;
};

// Max-abs Hermiticity defect relative to max-abs entry.
double hermiticity_defect(const MatX& h);

// Ascending eigenvalues, labels 1..d in that order, each column's
// largest-magnitude entry made real positive.
SpectralFrame eig_hermitian(const MatX& h, ControlPoint point = {});

enum class AlignMode {
    permute,     // relabel by greedy overlap matching, then strip phases
    phase_only,  // keep labels, strip phases, flag weak same-label overlaps
};

SpectralFrame align_frame(const SpectralFrame& frame, const SpectralFrame& reference,
                          const SpectralOptions& opts = {}, AlignMode mode = AlignMode::permute);

struct SpectralField {
    Grid2D grid;
    std::vector<SpectralFrame> frames;
    std::vector<MatX> hamiltonians;
    int breaks = 0;

    const SpectralFrame& at(int i, int j) const { return frames[grid.index(i, j)]; }
    const MatX& hamiltonian(int i, int j) const { return hamiltonians[grid.index(i, j)]; }
    int dim() const { return frames.empty() ? 0 : frames.front().dim(); }
};

using HamiltonianFn = std::function<MatX(const ControlPoint&)>;
using FrameFn = std::function<SpectralFrame(const ControlPoint&)>;

// Eigendecompose every node (in parallel when threads > 1), then gauge-fix by
// the deterministic row-major sweep: origin to seed, (0,j) to (0,j-1),
// (i,j) to (i-1,j). Afterwards every lattice edge is checked, so a label whose
// overlap with any neighbour falls below overlap_floor is marked broken on
// both ends; `breaks` counts nodes with any break.
SpectralField spectral_field(const Grid2D& grid, const HamiltonianFn& hamiltonian, const SpectralFrame& seed,
                             const SpectralOptions& opts = {}, int threads = 1);

// Same sweep for frames that already carry model labels: only phases are
// aligned and weak same-label overlaps are counted as breaks.
SpectralField labeled_field(const Grid2D& grid, const HamiltonianFn& hamiltonian, const FrameFn& frames,
                            const SpectralFrame& seed, const SpectralOptions& opts = {}, int threads = 1);

// Static-chunk parallel loop over [0, n); fn must be safe to call concurrently.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace hgauge
