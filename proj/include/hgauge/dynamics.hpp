#pragma once

#include <functional>
#include <vector>

#include "hgauge/model.hpp"
#include "hgauge/types.hpp"

namespace hgauge {

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<VecX> states;
    std::vector<double> norm_drift;
    // largest | |psi| - 1 | over every step, stored or not
    double peak_norm_drift = 0.0;
    long steps = 0;
    double dt = 0.0;

    double max_norm_drift() const;
};

struct PropagationOptions {
    double dt = 1e-3;
    int stride = 100;
    double hbar = 1.0;
};

using TimeHamiltonian = std::function<MatX(double)>;

// Second-order differencing: psi_{n+1} = psi_{n-1} - (2 i dt / hbar) H(t_n) psi_n,
// first step by an exact exponential of H(t0). States are stored every
// `stride` steps and at the final time.
TrajectoryRecord propagate(const VecX& psi0, const TimeHamiltonian& h, double t0, double t_end,
                           const PropagationOptions& opts);

// Universe wave function along the pulse path.
TrajectoryRecord sod_propagate(const Vec9& psi0, const ModelParams& p, const PulseParams& pp,
                               const PropagationOptions& opts);

// phi_a(x(t0)) superposed with the given weights and normalised.
Vec9 initial_state(const std::vector<std::pair<int, cplx>>& weights, const ModelParams& p, const PulseParams& pp);

enum class OccupationBasis { bare, system_instantaneous, universe_instantaneous };

struct OccupationSeries {
    OccupationBasis basis;
    // values[t][k], k = 0..2 (bare, system) or 0..8 (universe labels)
    std::vector<std::vector<double>> values;
    // first stored index whose labelled frame reported a continuation break, or -1
    int flagged_from = -1;
};

// Instantaneous frames carry the model labels pointwise (see model.hpp), so
// only breaks reported by the frame construction itself flag the series.
OccupationSeries occupations(const TrajectoryRecord& traj, OccupationBasis basis, const ModelParams& p,
                             const PulseParams& pp);

std::vector<double> entropy_series(const TrajectoryRecord& traj);

}  // namespace hgauge
