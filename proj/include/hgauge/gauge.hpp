#pragma once

#include <array>
#include <vector>

#include "hgauge/spectral.hpp"
#include "hgauge/types.hpp"

namespace hgauge {

// Neighbour pair for a first derivative along direction mu (0 or 1):
// (q[hi] - q[lo]) * scale. Central inside, one-sided (first order) on edges.
struct Stencil {
    int lo = 0;
    int hi = 0;
    double scale = 0.0;
    bool one_sided = false;
};

Stencil derivative_stencil(const Grid2D& grid, int i, int j, int mu);

// Matrix-valued one-form at a node; comp[0], comp[1] are the x1, x2 components.
struct GaugeSample {
    ControlPoint point;
    std::array<MatX, 2> comp;
    // tr(rho comp_mu), kept for the reduced-potential cross-check
    std::array<cplx, 2> scalar{};
    bool one_sided = false;
    bool flagged = false;
};

struct GaugeField {
    Grid2D grid;
    std::vector<GaugeSample> samples;
    const GaugeSample& at(int i, int j) const { return samples[grid.index(i, j)]; }
};

// 12-component of a matrix-valued two-form at a node.
struct TwoFormSample {
    MatX f12;
    bool one_sided = false;
    bool flagged = false;
    bool masked() const { return one_sided || flagged; }
};

struct TwoFormField {
    Grid2D grid;
    std::vector<TwoFormSample> samples;
    const TwoFormSample& at(int i, int j) const { return samples[grid.index(i, j)]; }
};

struct ReductionOptions {
    double rank_tol = 1e-10;
    double gap_floor = 1e-8;
};

// d phi_a / d x_mu on the lattice
VecX frame_derivative(const SpectralField& field, int label, int i, int j, int mu, bool* one_sided = nullptr);

// C*-connection tr_E(|d phi_a><phi_a|) rho_a^+ for a 9-dimensional universe field.
// Flagged when the node or a stencil neighbour is broken or degenerate, when the
// rank of rho_a differs across a stencil edge, or when the 3x3 coefficient
// matrix of phi_a turns singular between full-rank neighbours (its determinant
// rotates by 90 degrees or more across the edge).
GaugeSample cstar_connection(const SpectralField& field, int label, int i, int j, const ReductionOptions& opts = {});

// Reduced potential tr_E(P_a |d phi_a><phi_a|) rho_a^+ with P_a = |phi_a><phi_a|;
// `scalar` holds tr_S(rho_a A_{a,mu}) of the C*-connection for the cross-check.
GaugeSample reduced_potential(const SpectralField& field, int label, int i, int j, const ReductionOptions& opts = {});

// B_12 = d1 A_2 - d2 A_1 - (A_1 A_2 - A_2 A_1)
TwoFormSample curving(const GaugeField& conn, int i, int j);

// F_12 = d1 A_2 - d2 A_1 - (A_1 A_2 - A_2 A_1) - B_12 on the reduced potential
TwoFormSample fake_curvature(const GaugeField& red, const TwoFormField& curv, int i, int j);

cplx field_average(const MatX& rho, const MatX& m);

enum class BerryMethod { overlap_diff, sum_over_states };

struct BerryValue {
    cplx f12 = 0.0;  // purely imaginary
    bool masked = false;
    bool one_sided = false;
};

// arg of the normalised link product around cell (i,j)-(i+1,j)-(i+1,j+1)-(i,j+1);
// returns false when a link overlap vanishes
bool plaquette_phase(const SpectralField& field, int label, int i, int j, double* phase);

// overlap_diff averages the fluxes of the cells touching the node, so the
// value sits on the node like the sum-over-states one.
BerryValue berry_curvature(const SpectralField& field, int label, int i, int j, BerryMethod method,
                           double gap_floor = 1e-8);

struct NonAbelianValue {
    MatX f12;
    bool masked = false;
    bool one_sided = false;
};

// F_I = dA_I + A_I ^ A_I with (A_I)_ab = <phi_a|d phi_b>
NonAbelianValue nonabelian_curvature(const SpectralField& field, const std::vector<int>& labels, int i, int j);

enum class PathOrdering { ordered, anti_ordered };

// Product of exp(-A_mu dx^mu) over consecutive samples (midpoint rule).
MatX holonomy(const std::vector<GaugeSample>& samples, PathOrdering ordering);

struct LoopAreaResult {
    double lhs = 0.0;
    double rhs = 0.0;
};

// lhs = Re tr(rho B12) Delta, rhs = -S_KL(rho || exp(B12 Delta) rho)
LoopAreaResult loop_area_check(const Mat3& rho, const Mat3& b12, double delta);

// Per-label reduced geometry over a whole universe field: eigenmatrices,
// connections, curving, fake curvature and their rho-averages at every node.
class ReducedGeometry {
public:
    ReducedGeometry(const SpectralField& field, int label, const ReductionOptions& opts = {}, int threads = 1);

    const Grid2D& grid() const { return grid_; }
    int label() const { return label_; }
    const Mat3& rho(int i, int j) const { return rho_[grid_.index(i, j)]; }
    int rank(int i, int j) const { return rank_[grid_.index(i, j)]; }
    double entropy(int i, int j) const { return entropy_[grid_.index(i, j)]; }
    bool degenerate(int i, int j) const { return degenerate_[grid_.index(i, j)] != 0; }
    const GaugeField& cstar() const { return cstar_; }
    const GaugeField& reduced() const { return reduced_; }
    const TwoFormField& curving_field() const { return curving_; }
    const TwoFormField& fake_field() const { return fake_; }
    cplx curving_average(int i, int j) const;
    cplx fake_average(int i, int j) const;
    bool two_form_masked(int i, int j) const;

    LoopAreaResult loop_check(int i, int j, double delta) const;

private:
    Grid2D grid_;
    int label_;
    std::vector<Mat3> rho_;
    std::vector<int> rank_;
    std::vector<double> entropy_;
    std::vector<char> degenerate_;
    GaugeField cstar_;
    GaugeField reduced_;
    TwoFormField curving_;
    TwoFormField fake_;
};

}  // namespace hgauge
