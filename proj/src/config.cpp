#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hgauge/driver.hpp"

namespace hgauge {

namespace pt = boost::property_tree;

const char* to_string(ChartKind k) {
    switch (k) {
        case ChartKind::berry: return "berry";
        case ChartKind::fake_curvature_avg: return "fake_curvature_avg";
        case ChartKind::curving_avg: return "curving_avg";
        case ChartKind::eigenentropy: return "eigenentropy";
    }
    return "?";
}

ChartKind parse_chart_kind(const std::string& s) {
    for (ChartKind k : {ChartKind::berry, ChartKind::fake_curvature_avg, ChartKind::curving_avg, ChartKind::eigenentropy})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown chart kind '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty())
        throw ConfigError("key '" + key + "': '" + text + "' is not a decimal number");
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    int v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty())
        throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
    return v;
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

std::vector<ChartRequest> parse_jobs(const std::string& text) {
    std::vector<ChartRequest> jobs;
    for (const std::string& item : split(text, ", \t")) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("chart job '" + item + "' must look like kind:label");
        const ChartKind kind = parse_chart_kind(item.substr(0, colon));
        const std::string lab = item.substr(colon + 1);
        if (lab == "all") {
            const int top = kind == ChartKind::berry ? 3 : 9;
            for (int a = 1; a <= top; ++a) jobs.push_back({kind, a});
        } else {
            jobs.push_back({kind, to_int("charts.jobs", lab)});
        }
    }
    return jobs;
}

}  // namespace

TrajectoryRequest parse_trajectory(const std::string& spec) {
    TrajectoryRequest req;
    const std::vector<std::string> terms = split(spec, "+");
    if (terms.empty()) throw ConfigError("empty trajectory specification");
    for (const std::string& term : terms) {
        const auto colon = term.find(':');
        const int label = to_int("trajectories.initial", term.substr(0, colon));
        const double w = colon == std::string::npos ? 1.0 : to_real("trajectories.initial", term.substr(colon + 1));
        req.weights.emplace_back(label, cplx(w, 0.0));
        if (!req.name.empty()) req.name += "+";
        req.name += "phi" + std::to_string(label);
    }
    return req;
}

void RunConfig::validate() const {
    model.validate();
    pulse.validate();
    if (grid_n < 16) throw ConfigError("grid.n must be >= 16");
    if (!(omega_min >= 0.0) || !(omega_max > omega_min)) throw ConfigError("grid needs 0 <= omega_min < omega_max");
    if (omega_max < pulse.omega0) throw ConfigError("grid.omega_max must be >= pulse.omega0");
    for (const ChartRequest& c : charts) {
        const int top = c.kind == ChartKind::berry ? 3 : 9;
        if (c.label < 1 || c.label > top)
            throw ConfigError(std::string("invalid state label ") + std::to_string(c.label) + " for chart kind " +
                              to_string(c.kind));
    }
    for (const TrajectoryRequest& t : trajectories)
        for (const auto& [label, w] : t.weights)
            if (label < 1 || label > 9) throw ConfigError("trajectory label " + std::to_string(label) + " outside 1..9");
    if (!(dt > 0.0)) throw ConfigError("run.dt must be > 0");
    if (stride < 1) throw ConfigError("run.stride must be >= 1");
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
    if (!(event_threshold >= 0.0)) throw ConfigError("events.threshold must be >= 0");
    if (!(event_step > 0.0)) throw ConfigError("events.step must be > 0");
    if (output_dir.empty()) throw ConfigError("run.output_dir is empty");
}

Grid2D RunConfig::grid() const { return square_grid(omega_min, omega_max, grid_n); }

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            if (!body.data().empty()) throw ConfigError("key '" + section + "' must live inside a [section]");
            continue;
        }
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            const std::string v = node.get_value<std::string>();
            if (full == "model.delta_p") cfg.model.delta_p = to_real(full, v);
            else if (full == "model.delta_s") cfg.model.delta_s = to_real(full, v);
            else if (full == "model.g") cfg.model.g = to_real(full, v);
            else if (full == "model.coupling") cfg.model.coupling = parse_coupling(trim(v));
            else if (full == "model.attenuation") cfg.model.attenuation = to_real(full, v);
            else if (full == "model.hbar") cfg.model.hbar = to_real(full, v);
            else if (full == "model.homotopy_steps") cfg.model.homotopy_steps = to_int(full, v);
            else if (full == "pulse.omega0") cfg.pulse.omega0 = to_real(full, v);
            else if (full == "pulse.t_p") cfg.pulse.t_p = to_real(full, v);
            else if (full == "pulse.t_s") cfg.pulse.t_s = to_real(full, v);
            else if (full == "pulse.tau_p") cfg.pulse.tau_p = to_real(full, v);
            else if (full == "pulse.tau_s") cfg.pulse.tau_s = to_real(full, v);
            else if (full == "pulse.t0") cfg.pulse.t0 = to_real(full, v);
            else if (full == "pulse.t_end") cfg.pulse.t_end = to_real(full, v);
            else if (full == "grid.omega_min") cfg.omega_min = to_real(full, v);
            else if (full == "grid.omega_max") cfg.omega_max = to_real(full, v);
            else if (full == "grid.n") cfg.grid_n = to_int(full, v);
            else if (full == "charts.jobs") cfg.charts = parse_jobs(v);
            else if (full == "trajectories.initial") {
                cfg.trajectories.clear();
                for (const std::string& item : split(v, ";,")) cfg.trajectories.push_back(parse_trajectory(item));
            }
            else if (full == "run.dt") cfg.dt = to_real(full, v);
            else if (full == "run.stride") cfg.stride = to_int(full, v);
            else if (full == "run.output_dir") cfg.output_dir = trim(v);
            else if (full == "run.threads") cfg.threads = to_int(full, v);
            else if (full == "run.seed_phase") cfg.seed_phase = to_real(full, v);
            else if (full == "events.threshold") cfg.event_threshold = to_real(full, v);
            else if (full == "events.step") cfg.event_step = to_real(full, v);
            else throw ConfigError("unknown config key '" + full + "'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace hgauge
