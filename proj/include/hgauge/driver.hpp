#pragma once

#include <string>
#include <vector>

#include "hgauge/dynamics.hpp"
#include "hgauge/gauge.hpp"
#include "hgauge/model.hpp"

namespace hgauge {

enum class ChartKind { berry, fake_curvature_avg, curving_avg, eigenentropy };

const char* to_string(ChartKind k);
ChartKind parse_chart_kind(const std::string& s);

struct ChartRequest {
    ChartKind kind = ChartKind::eigenentropy;
    int label = 1;
};

struct TrajectoryRequest {
    std::string name;
    std::vector<std::pair<int, cplx>> weights;
};

struct RunConfig {
    ModelParams model;
    PulseParams pulse;
    double omega_min = 0.2;
    double omega_max = 4.0;
    int grid_n = 50;
    std::vector<ChartRequest> charts;
    std::vector<TrajectoryRequest> trajectories;
    double dt = 1e-3;
    int stride = 100;
    double event_threshold = 0.05;
    double event_step = 0.1;
    std::string output_dir = "out";
    int threads = 1;
    // global phase applied to the gauge seed; charted |.| values do not depend on it
    double seed_phase = 0.0;

    void validate() const;
    Grid2D grid() const;
};

// key = value lines grouped under [section] headers, '#' or ';' comments
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// "1", "1+7" (equal weights) or "1:0.6+7:0.8"
TrajectoryRequest parse_trajectory(const std::string& spec);

struct PathEvent {
    double t = 0.0;
    ControlPoint x;
    int label_a = 0;
    int label_b = 0;
    double min_gap = 0.0;
};

enum class EventScope { system, universe };

// Local minima of |lambda_a - lambda_b| below the threshold along the pulse
// path, for pairs adjacent in eigenvalue order with a nonzero
// non-adiabatic coupling; event times refined by a parabola.
std::vector<PathEvent> detect_events(const PulseParams& pp, const ModelParams& p, EventScope which,
                                     double gap_threshold, double step = 0.1);

struct FieldChart {
    Grid2D grid;
    ChartKind kind = ChartKind::eigenentropy;
    int label = 1;
    std::vector<double> values;
    std::vector<cplx> raw;
    std::vector<char> masked;
    std::vector<double> path_times;
    std::vector<ControlPoint> path;
    std::vector<PathEvent> events;
};

// Labelled fields of the configured model over the chart grid.
SpectralField universe_field(const RunConfig& cfg);
SpectralField system_field(const RunConfig& cfg);

FieldChart chart_from_universe(const SpectralField& universe, const ReducedGeometry* geometry, ChartKind kind,
                               int label);
FieldChart berry_chart(const SpectralField& system, int label);

// Writers; all numbers use 17 significant digits.
std::string format_real(double v);
void write_chart_csv(const FieldChart& chart, const std::string& path);
void write_chart_pgm(const FieldChart& chart, const std::string& path);
void write_overlay(const FieldChart& chart, const std::string& path);

struct TrajectorySummary {
    std::string name;
    double final_bare[3] = {0, 0, 0};
    double final_entropy = 0.0;
    double max_norm_drift = 0.0;
};

struct TrajectoryResult {
    TrajectoryRecord record;
    OccupationSeries bare, system, universe;
    std::vector<double> entropy;
    TrajectorySummary summary;
};

TrajectoryResult run_trajectory(const RunConfig& cfg, const TrajectoryRequest& req);

// Each returns the files written (manifest last).
std::vector<std::string> run_charts(const RunConfig& cfg);
std::vector<std::string> run_propagation(const RunConfig& cfg);
std::vector<std::string> run_events(const RunConfig& cfg);

}  // namespace hgauge
