#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hgauge/model.hpp"
#include "hgauge/types.hpp"

namespace hgauge {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int threads = 1;
    int grid_n = 50;
    double dt = 1e-3;
    // detunings of every STIRAP run; the defaults follow ModelParams
    double delta_p = ModelParams{}.delta_p;
    double delta_s = ModelParams{}.delta_s;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

// Criteria 1..10 in order; the callback sees each result as soon as it is known.
// Fields and trajectories shared between criteria are computed once.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, const CriterionCallback& report = {});

// A single criterion with its own caches.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

// Synthetic universe whose label-1 eigenvector is the constant-weight Schmidt
// state sum_k sqrt(p_k) zeta_k (x) xi_k with zeta = U_S(x) e_k, xi = U_E(x) e_k,
// U = exp(i G(x)) for random Hermitian G(x) = G0 (1 + 0.3 x1 x2) + x1 G1 + x2 G2.
// The other eigenvectors complete a fixed unitary; eigenvalues are 1..9.
struct SchmidtForms {
    cplx closed_fake = 0.0;     // tr(w^2 (F_S + [A_S, hat A_E^t]))
    cplx closed_curving = 0.0;  // tr(w^2 (F_E - A_S ^ A_S))
    cplx derived_fake = 0.0;   // tr(w^2 (F_S - A_S ^ A_S - A_E ^ A_E))
    cplx derived_curving = 0.0;  // tr(w^2 F_E)
};

class SchmidtModel {
public:
    SchmidtModel(std::vector<double> weights, std::uint64_t seed);

    MatX hamiltonian(const ControlPoint& x) const;
    Vec9 schmidt_state(const ControlPoint& x) const;
    SchmidtForms forms(const ControlPoint& x) const;
    double entropy() const;
    const std::vector<double>& weights() const { return p_; }

private:
    struct Frame {
        Mat3 u;
        std::array<Mat3, 2> du;
    };
    Frame frame(const std::array<Mat3, 3>& g, const ControlPoint& x) const;
    Mat9 product(const ControlPoint& x) const;

    std::array<Mat3, 3> gs_, ge_;
    std::vector<double> p_;
    Mat9 w0_;
};

}  // namespace hgauge
