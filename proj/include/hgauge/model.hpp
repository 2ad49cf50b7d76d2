#pragma once

#include "hgauge/spectral.hpp"
#include "hgauge/types.hpp"

namespace hgauge {

enum class CouplingKind { none, static_, dynamical };

struct ModelParams {
    // bare level energies 0, delta_p, delta_p - delta_s (hbar = 1)
    double delta_p = 0.5;
    double delta_s = -0.5;
    double g = 0.0;
    CouplingKind coupling = CouplingKind::none;
    double attenuation = 2.0;
    double hbar = 1.0;
    // g-continuation steps used to label the coupled universe frame
    int homotopy_steps = 16;

    void validate() const;
};

struct PulseParams {
    double omega0 = 3.5;
    double t_p = 70.0;
    double t_s = 20.0;
    double tau_p = 30.0;
    double tau_s = 30.0;
    double t0 = -60.0;
    double t_end = 140.0;

    void validate() const;
};

const char* to_string(CouplingKind k);
CouplingKind parse_coupling(const std::string& s);

Mat3 build_h_system(const ControlPoint& x, const ModelParams& p);
Mat3 build_h_env(const ControlPoint& x, const ModelParams& p);

// Frames are required for the dynamical kind and ignored otherwise.
Mat9 build_coupling(const ControlPoint& x, const ModelParams& p, const SpectralFrame* frames_s = nullptr,
                    const SpectralFrame* frames_e = nullptr);
Mat9 build_h_universe(const ControlPoint& x, const ModelParams& p);

ControlPoint pulse_path(double t, const PulseParams& pp);

// Tensor basis |i, j> (1-based) sits at flat index 3(i-1) + (j-1).
inline int tensor_index(int i, int j) { return 3 * (i - 1) + (j - 1); }

// Universe labels follow lim_{g->0} phi_a = zeta_i (x) xi_alpha with
// a = i + 3(alpha - 1): the system factor runs fastest through the labels.
inline int universe_label(int i, int alpha) { return i + 3 * (alpha - 1); }
inline int system_factor(int a) { return (a - 1) % 3 + 1; }
inline int env_factor(int a) { return (a - 1) / 3 + 1; }

// Labelled frames of H_S and H_E: label i belongs to the branch that tends to
// |i> as the lasers switch off, and <i|zeta_i> is real positive.
SpectralFrame system_frame(const ControlPoint& x, const ModelParams& p);
SpectralFrame environment_frame(const ControlPoint& x, const ModelParams& p);

// Product frame zeta_i (x) xi_alpha with eigenvalues eps_i + nu_alpha.
SpectralFrame product_frame(const SpectralFrame& zs, const SpectralFrame& xe);

// Labelled universe frame: at g = 0 the product frame; otherwise the
// coupling is switched on in homotopy_steps increments, each aligned to the
// previous one, so labels are defined by the g -> 0 limit.
SpectralFrame universe_frame(const ControlPoint& x, const ModelParams& p);

}  // namespace hgauge
