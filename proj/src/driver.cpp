#include "hgauge/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include "hgauge/reduction.hpp"

namespace hgauge {

namespace fs = std::filesystem;

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

SpectralFrame phased_seed(SpectralFrame seed, double phase) {
    seed.vectors *= std::polar(1.0, phase);
    return seed;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

void path_polyline(const PulseParams& pp, double step, FieldChart& chart) {
    const int n = static_cast<int>(std::floor((pp.t_end - pp.t0) / step + 1e-9)) + 1;
    for (int k = 0; k < n; ++k) {
        chart.path_times.push_back(pp.t0 + k * step);
        chart.path.push_back(pulse_path(pp.t0 + k * step, pp));
    }
}

std::string model_summary(const RunConfig& cfg) {
    std::string s;
    s += "units = atomic (hbar = " + format_real(cfg.model.hbar) + ")\n";
    s += "delta_p = " + format_real(cfg.model.delta_p) + "\n";
    s += "delta_s = " + format_real(cfg.model.delta_s) + "\n";
    s += "coupling = " + std::string(to_string(cfg.model.coupling)) + "\n";
    s += "g = " + format_real(cfg.model.g) + "\n";
    s += "attenuation = " + format_real(cfg.model.attenuation) + "\n";
    return s;
}

void write_manifest(const std::string& dir, const std::string& name, const std::string& header,
                    const std::vector<std::string>& files) {
    std::ofstream out = open_out((fs::path(dir) / name).string());
    out << header;
    out << "[files]\n";
    for (const std::string& f : files) out << fs::path(f).filename().string() << "\n";
}

}  // namespace

SpectralField universe_field(const RunConfig& cfg) {
    const Grid2D grid = cfg.grid();
    const ModelParams p = cfg.model;
    auto h = [p](const ControlPoint& x) -> MatX { return build_h_universe(x, p); };
    auto f = [p](const ControlPoint& x) { return universe_frame(x, p); };
    const SpectralFrame seed = phased_seed(universe_frame(grid.origin, p), cfg.seed_phase);
    return labeled_field(grid, h, f, seed, {}, cfg.threads);
}

SpectralField system_field(const RunConfig& cfg) {
    const Grid2D grid = cfg.grid();
    const ModelParams p = cfg.model;
    auto h = [p](const ControlPoint& x) -> MatX { return build_h_system(x, p); };
    auto f = [p](const ControlPoint& x) { return system_frame(x, p); };
    const SpectralFrame seed = phased_seed(system_frame(grid.origin, p), cfg.seed_phase);
    return labeled_field(grid, h, f, seed, {}, cfg.threads);
}

FieldChart chart_from_universe(const SpectralField& universe, const ReducedGeometry* geometry, ChartKind kind,
                               int label) {
    if (kind == ChartKind::berry) throw std::invalid_argument("berry charts come from the system field");
    if (!geometry || geometry->label() != label) throw std::invalid_argument("chart needs the geometry of its label");
    FieldChart c;
    c.grid = universe.grid;
    c.kind = kind;
    c.label = label;
    const int n = c.grid.size();
    c.values.resize(n);
    c.raw.resize(n);
    c.masked.resize(n);
    for (int i = 0; i < c.grid.n1; ++i) {
        for (int j = 0; j < c.grid.n2; ++j) {
            const int k = c.grid.index(i, j);
            switch (kind) {
                case ChartKind::eigenentropy:
                    c.raw[k] = geometry->entropy(i, j);
                    c.masked[k] = geometry->degenerate(i, j);
                    break;
                case ChartKind::curving_avg:
                    c.raw[k] = geometry->curving_average(i, j);
                    c.masked[k] = geometry->curving_field().at(i, j).masked();
                    break;
                case ChartKind::fake_curvature_avg:
                    c.raw[k] = geometry->fake_average(i, j);
                    c.masked[k] = geometry->fake_field().at(i, j).masked();
                    break;
                default: break;
            }
            c.values[k] = std::abs(c.raw[k]);
        }
    }
    return c;
}

FieldChart berry_chart(const SpectralField& system, int label) {
    FieldChart c;
    c.grid = system.grid;
    c.kind = ChartKind::berry;
    c.label = label;
    const int n = c.grid.size();
    c.values.resize(n);
    c.raw.resize(n);
    c.masked.resize(n);
    for (int i = 0; i < c.grid.n1; ++i) {
        for (int j = 0; j < c.grid.n2; ++j) {
            const int k = c.grid.index(i, j);
            const BerryValue b = berry_curvature(system, label, i, j, BerryMethod::overlap_diff);
            c.raw[k] = b.f12;
            c.values[k] = std::abs(b.f12);
            c.masked[k] = b.masked || b.one_sided;
        }
    }
    return c;
}

void write_chart_csv(const FieldChart& chart, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "omega_p,omega_s,value,re,im,masked\n";
    for (int i = 0; i < chart.grid.n1; ++i) {
        for (int j = 0; j < chart.grid.n2; ++j) {
            const int k = chart.grid.index(i, j);
            const ControlPoint x = chart.grid.point(i, j);
            out << format_real(x.x1) << ',' << format_real(x.x2) << ',' << format_real(chart.values[k]) << ','
                << format_real(chart.raw[k].real()) << ',' << format_real(chart.raw[k].imag()) << ','
                << (chart.masked[k] ? 1 : 0) << '\n';
        }
    }
}

void write_chart_pgm(const FieldChart& chart, const std::string& path) {
    const Grid2D& g = chart.grid;
    std::vector<double> logs;
    for (int k = 0; k < g.size(); ++k)
        if (!chart.masked[k] && chart.values[k] > 0.0 && std::isfinite(chart.values[k]))
            logs.push_back(std::log10(chart.values[k]));
    double lo = 0.0, hi = 0.0;
    if (!logs.empty()) {
        std::sort(logs.begin(), logs.end());
        lo = logs.front();
        const size_t idx = static_cast<size_t>(std::ceil(0.995 * logs.size())) - 1;
        hi = logs[std::min(idx, logs.size() - 1)];
    }

    // image x = omega_p to the right, image y = omega_s upwards; masked cells are 0
    std::vector<unsigned char> pix(static_cast<size_t>(g.size()), 0);
    for (int i = 0; i < g.n1; ++i) {
        for (int j = 0; j < g.n2; ++j) {
            const int k = g.index(i, j);
            unsigned char v = 0;
            if (!chart.masked[k]) {
                const double val = chart.values[k];
                if (!(val > 0.0) || !std::isfinite(val) || hi <= lo) {
                    v = (val > 0.0 && hi <= lo) ? 255 : 1;
                } else {
                    const double s = (std::clamp(std::log10(val), lo, hi) - lo) / (hi - lo);
                    v = static_cast<unsigned char>(1 + std::lround(254.0 * s));
                }
            }
            pix[static_cast<size_t>(g.n2 - 1 - j) * g.n1 + i] = v;
        }
    }
    std::ofstream out = open_out(path);
    out << "P5\n" << g.n1 << ' ' << g.n2 << "\n255\n";
    out.write(reinterpret_cast<const char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
}

void write_overlay(const FieldChart& chart, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "kind,t,omega_p,omega_s,label_a,label_b,min_gap\n";
    for (size_t k = 0; k < chart.path.size(); ++k) {
        out << "path," << format_real(chart.path_times[k]) << ',' << format_real(chart.path[k].x1) << ',' << format_real(chart.path[k].x2)
            << ",,,\n";
    }
    for (const PathEvent& e : chart.events) {
        out << "event," << format_real(e.t) << ',' << format_real(e.x.x1) << ',' << format_real(e.x.x2) << ','
            << e.label_a << ',' << e.label_b << ',' << format_real(e.min_gap) << '\n';
    }
}

std::vector<std::string> run_charts(const RunConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.output_dir);
    std::vector<std::string> files;

    bool need_universe = false, need_system = false;
    for (const ChartRequest& r : cfg.charts) (r.kind == ChartKind::berry ? need_system : need_universe) = true;

    std::vector<PathEvent> ev_system, ev_universe;
    SpectralField uni, sys;
    if (need_universe) {
        uni = universe_field(cfg);
        ev_universe = detect_events(cfg.pulse, cfg.model, EventScope::universe, cfg.event_threshold, cfg.event_step);
    }
    if (need_system) {
        sys = system_field(cfg);
        ev_system = detect_events(cfg.pulse, cfg.model, EventScope::system, cfg.event_threshold, cfg.event_step);
    }

    std::map<int, std::unique_ptr<ReducedGeometry>> geometry;
    for (const ChartRequest& r : cfg.charts) {
        FieldChart chart;
        if (r.kind == ChartKind::berry) {
            chart = berry_chart(sys, r.label);
            chart.events = ev_system;
        } else {
            auto& geo = geometry[r.label];
            if (!geo) geo = std::make_unique<ReducedGeometry>(uni, r.label, ReductionOptions{}, cfg.threads);
            chart = chart_from_universe(uni, geo.get(), r.kind, r.label);
            chart.events = ev_universe;
        }
        path_polyline(cfg.pulse, 1.0, chart);
        const std::string stem = (fs::path(cfg.output_dir) / (std::string(to_string(r.kind)) + "_" +
                                                               std::to_string(r.label))).string();
        write_chart_csv(chart, stem + ".csv");
        write_chart_pgm(chart, stem + ".pgm");
        write_overlay(chart, stem + ".overlay.csv");
        files.insert(files.end(), {stem + ".csv", stem + ".pgm", stem + ".overlay.csv"});
    }

    std::string header = model_summary(cfg);
    header += "grid = " + format_real(cfg.omega_min) + " .. " + format_real(cfg.omega_max) + " x " +
              std::to_string(cfg.grid_n) + "^2\n";
    header += "chart value = |tr_S(rho_a X_12)| for averaged two-forms, |F_12| for berry, S for eigenentropy\n";
    header += "overlay path sampled every 1 au from t0\n";
    write_manifest(cfg.output_dir, "charts_manifest.txt", header, files);
    files.push_back((fs::path(cfg.output_dir) / "charts_manifest.txt").string());
    return files;
}

TrajectoryResult run_trajectory(const RunConfig& cfg, const TrajectoryRequest& req) {
    TrajectoryResult r;
    const Vec9 psi0 = initial_state(req.weights, cfg.model, cfg.pulse);
    PropagationOptions opts;
    opts.dt = cfg.dt;
    opts.stride = cfg.stride;
    try {
        r.record = sod_propagate(psi0, cfg.model, cfg.pulse, opts);
    } catch (const NumericalError& e) {
        throw NumericalError("trajectory " + req.name + ": " + e.what());
    }
    r.bare = occupations(r.record, OccupationBasis::bare, cfg.model, cfg.pulse);
    r.system = occupations(r.record, OccupationBasis::system_instantaneous, cfg.model, cfg.pulse);
    r.universe = occupations(r.record, OccupationBasis::universe_instantaneous, cfg.model, cfg.pulse);
    r.entropy = entropy_series(r.record);
    r.summary.name = req.name;
    for (int i = 0; i < 3; ++i) r.summary.final_bare[i] = r.bare.values.back()[i];
    r.summary.final_entropy = r.entropy.back();
    r.summary.max_norm_drift = r.record.max_norm_drift();
    return r;
}

std::vector<std::string> run_propagation(const RunConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.output_dir);
    std::vector<TrajectoryResult> results(cfg.trajectories.size());
    parallel_for(static_cast<int>(results.size()), cfg.threads,
                 [&](int k) { results[k] = run_trajectory(cfg, cfg.trajectories[k]); });

    std::vector<std::string> files;
    for (const TrajectoryResult& r : results) {
        const std::string path = (fs::path(cfg.output_dir) / ("traj_" + r.summary.name + ".csv")).string();
        std::ofstream out = open_out(path);
        out << "t,bare_1,bare_2,bare_3,sys_1,sys_2,sys_3";
        for (int a = 1; a <= 9; ++a) out << ",phi_" << a;
        out << ",entropy,norm_drift,flagged\n";
        for (size_t k = 0; k < r.record.times.size(); ++k) {
            out << format_real(r.record.times[k]);
            for (double v : r.bare.values[k]) out << ',' << format_real(v);
            for (double v : r.system.values[k]) out << ',' << format_real(v);
            for (double v : r.universe.values[k]) out << ',' << format_real(v);
            const bool flagged = r.universe.flagged_from >= 0 && static_cast<int>(k) >= r.universe.flagged_from;
            out << ',' << format_real(r.entropy[k]) << ',' << format_real(r.record.norm_drift[k]) << ','
                << (flagged ? 1 : 0) << '\n';
        }
        files.push_back(path);
    }

    const std::string summary = (fs::path(cfg.output_dir) / "summary.csv").string();
    {
        std::ofstream out = open_out(summary);
        out << "trajectory,final_bare_1,final_bare_2,final_bare_3,final_entropy,max_norm_drift\n";
        for (const TrajectoryResult& r : results) {
            const TrajectorySummary& s = r.summary;
            out << s.name << ',' << format_real(s.final_bare[0]) << ',' << format_real(s.final_bare[1]) << ','
                << format_real(s.final_bare[2]) << ',' << format_real(s.final_entropy) << ','
                << format_real(s.max_norm_drift) << '\n';
        }
    }
    files.push_back(summary);

    std::string header = model_summary(cfg);
    header += "dt = " + format_real(cfg.dt) + "\nstride = " + std::to_string(cfg.stride) + "\n";
    write_manifest(cfg.output_dir, "propagate_manifest.txt", header, files);
    files.push_back((fs::path(cfg.output_dir) / "propagate_manifest.txt").string());
    return files;
}

std::vector<std::string> run_events(const RunConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.output_dir);
    std::vector<std::string> files;
    for (EventScope scope : {EventScope::system, EventScope::universe}) {
        const std::string name = scope == EventScope::system ? "events_system.csv" : "events_universe.csv";
        const std::string path = (fs::path(cfg.output_dir) / name).string();
        std::ofstream out = open_out(path);
        out << "t,omega_p,omega_s,label_a,label_b,min_gap\n";
        for (const PathEvent& e : detect_events(cfg.pulse, cfg.model, scope, cfg.event_threshold, cfg.event_step)) {
            out << format_real(e.t) << ',' << format_real(e.x.x1) << ',' << format_real(e.x.x2) << ',' << e.label_a
                << ',' << e.label_b << ',' << format_real(e.min_gap) << '\n';
        }
        files.push_back(path);
    }
    std::string header = model_summary(cfg);
    header += "threshold = " + format_real(cfg.event_threshold) + "\nscan step = " + format_real(cfg.event_step) + "\n";
    write_manifest(cfg.output_dir, "events_manifest.txt", header, files);
    files.push_back((fs::path(cfg.output_dir) / "events_manifest.txt").string());
    return files;
}

}  // namespace hgauge
