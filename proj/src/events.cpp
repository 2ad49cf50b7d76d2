#include <algorithm>
#include <cmath>

#include "hgauge/driver.hpp"

namespace hgauge {

namespace {

MatX path_hamiltonian(double t, const PulseParams& pp, const ModelParams& p, EventScope which) {
    const ControlPoint x = pulse_path(t, pp);
    if (which == EventScope::system) return build_h_system(x, p);
    return build_h_universe(x, p);
}

SpectralFrame path_frame(double t, const PulseParams& pp, const ModelParams& p, EventScope which) {
    const ControlPoint x = pulse_path(t, pp);
    if (which == EventScope::system) return system_frame(x, p);
    return universe_frame(x, p);
}

bool adjacent(const SpectralFrame& f, int a, int b) {
    const double lo = std::min(f.value(a), f.value(b));
    const double hi = std::max(f.value(a), f.value(b));
    for (int k = 0; k < f.dim(); ++k) {
        if (f.labels[k] == a || f.labels[k] == b) continue;
        if (f.values(k) > lo && f.values(k) < hi) return false;
    }
    return true;
}

}  // namespace

std::vector<PathEvent> detect_events(const PulseParams& pp, const ModelParams& p, EventScope which,
                                     double gap_threshold, double step) {
    std::vector<PathEvent> events;
    if (!(gap_threshold > 0.0)) return events;
    if (!(step > 0.0)) throw std::invalid_argument("event scan step must be positive");

    const int n = static_cast<int>(std::floor((pp.t_end - pp.t0) / step + 1e-9)) + 1;
    std::vector<SpectralFrame> frames(n);
    for (int k = 0; k < n; ++k) frames[k] = path_frame(pp.t0 + k * step, pp, p, which);
    const int d = frames.front().dim();

    for (int a = 1; a <= d; ++a) {
        for (int b = a + 1; b <= d; ++b) {
            auto gap = [&](int k) { return std::abs(frames[k].value(a) - frames[k].value(b)); };
            for (int k = 1; k + 1 < n; ++k) {
                const double gm = gap(k - 1), g0 = gap(k), gp = gap(k + 1);
                if (!(g0 < gm && g0 <= gp && g0 < gap_threshold)) continue;
                if (!adjacent(frames[k], a, b)) continue;

                // levels that merely cross without coupling are not transitions
                const double t = pp.t0 + k * step;
                const MatX dh = (path_hamiltonian(t + step, pp, p, which) - path_hamiltonian(t - step, pp, p, which)) /
                                (2.0 * step);
                const double coupling = std::abs(frames[k].vector(a).dot(dh * frames[k].vector(b)));
                if (coupling <= 1e-9 * (dh.cwiseAbs().maxCoeff() + 1e-300)) continue;

                double offset = 0.0, gmin = g0;
                const double curv = gm - 2.0 * g0 + gp;
                if (curv > 0.0) {
                    offset = std::clamp(0.5 * (gm - gp) / curv, -1.0, 1.0);
                    gmin = std::clamp(g0 - 0.25 * (gm - gp) * offset, 0.0, g0);
                }
                PathEvent e;
                e.t = t + offset * step;
                e.x = pulse_path(e.t, pp);
                e.label_a = a;
                e.label_b = b;
                e.min_gap = gmin;
                events.push_back(e);
            }
        }
    }
    // times of simultaneous events differ only by roundoff, so order on a microsecond key
    auto key = [](const PathEvent& e) { return std::llround(e.t * 1e6); };
    std::stable_sort(events.begin(), events.end(), [&](const PathEvent& x, const PathEvent& y) {
        if (key(x) != key(y)) return key(x) < key(y);
        if (x.label_a != y.label_a) return x.label_a < y.label_a;
        return x.label_b < y.label_b;
    });
    return events;
}

}  // namespace hgauge
