#include "mgsim/artifacts.hpp"

#include <cstdio>
#include <fstream>

#include "mgsim/error.hpp"

namespace mgsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fmt9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

void write_timeseries_csv(const ScenarioSpec& spec, const RunResult& r, const fs::path& path) {
    auto out = open_out(path);
    const auto& tr = r.trace;
    const auto n = tr.lambda.size();
    out << "t";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& id = spec.fleet[i].id;
        out << ",lambda_" << id << ",soc_" << id << ",omega_dev_" << id << ",p_inj_" << id << ",p_ref_" << id;
    }
    out << ",lambda_r,soc_r,p_load,omega_syn,active";
    const auto& res = spec.plant.res_nodes();
    for (auto k : res) out << ",omega_dev_" << spec.plant.node(k).id << ",p_inj_" << spec.plant.node(k).id;
    out << '\n';
    for (std::size_t s = 0; s < tr.t.size(); ++s) {
        out << fmt9(tr.t[s]);
        for (std::size_t i = 0; i < n; ++i)
            out << ',' << fmt9(tr.lambda[i][s]) << ',' << fmt9(tr.soc[i][s]) << ',' << fmt9(tr.omega[i][s]) << ','
                << fmt9(tr.p_inj[i][s]) << ',' << fmt9(tr.p_ref[i][s]);
        out << ',' << fmt9(tr.lambda_r[s]) << ',' << fmt9(tr.soc_r[s]) << ',' << fmt9(tr.p_load[s]) << ','
            << fmt9(tr.omega_syn[s]) << ',' << tr.active[s];
        for (std::size_t k = 0; k < res.size(); ++k) out << ',' << fmt9(tr.res_omega[k][s]) << ',' << fmt9(tr.res_p_inj[k][s]);
        out << '\n';
    }
}

void write_events_csv(const RunResult& r, const fs::path& path) {
    auto out = open_out(path);
    out << "agent,t,interval,f_value\n";
    for (const auto& e : r.events)
        out << e.agent << ',' << fmt9(e.t) << ',' << (e.interval ? fmt9(*e.interval) : "") << ',' << fmt9(e.f_value)
            << '\n';
}

ordered_json metrics_json(const RunResult& r) {
    const auto& m = r.metrics;
    ordered_json j;
    j["settling_time"] = opt(m.settling_time);
    j["settled"] = m.settling_time.has_value();
    j["window_start"] = m.window_start;
    j["window_end"] = m.window_end;
    j["overshoot"] = m.overshoot;
    j["event_count"] = m.events.count;
    j["mean_event_interval"] = opt(m.events.mean_interval);
    j["min_event_interval"] = opt(m.events.min_interval);
    ordered_json per = ordered_json::array();
    for (std::size_t i = 0; i < m.events.per_agent_count.size(); ++i)
        per.push_back({{"agent", i}, {"count", m.events.per_agent_count[i]}, {"mean_interval", opt(m.events.per_agent_mean[i])}});
    j["per_agent_events"] = per;
    j["final_consensus_error"] = m.final_consensus_error;
    j["final_soc_spread"] = m.final_soc_spread;
    j["final_frequency_error"] = m.final_frequency_error;
    j["max_power_residual"] = m.max_power_residual;
    j["soc_clamps"] = m.soc_clamps;
    j["activations"] = r.activations;
    j["releases"] = r.releases;
    j["warnings"] = r.warnings;
    return j;
}

ordered_json feasibility_json(const FeasibilityReport& f, const GainSet& g) {
    ordered_json j;
    j["lambda_min_q"] = f.lambda_min_q;
    j["lambda_max_qinv"] = f.lambda_max_qinv;
    j["cond1_value"] = f.cond1_value;
    j["cond2_value"] = f.cond2_value;
    j["rho"] = g.rho;
    j["rho_upper"] = f.rho_upper;
    j["feasible"] = f.feasible;
    return j;
}

void write_plot_script(const ScenarioSpec& spec, const fs::path& path) {
    auto out = open_out(path);
    const auto n = spec.fleet.size();
    const auto n_res = spec.plant.res_nodes().size();
    // Column numbers in timeseries.csv.
    auto agent_col = [](std::size_t i, int field) { return 2 + static_cast<int>(i) * 5 + field; };
    const int extra = 2 + static_cast<int>(n) * 5;
    auto res_col = [&](std::size_t k, int field) { return extra + 5 + static_cast<int>(k) * 2 + field; };

    out << "# gnuplot script; run from the output directory: gnuplot plot.gp\n"
        << "set datafile separator ','\n"
        << "set terminal pngcairo size 1000,1400\n"
        << "set output 'overview.png'\n"
        << "set key outside right\n"
        << "set multiplot layout 5,1 title '" << spec.name << "'\n";
    out << "set ylabel 'load (kW)'\nplot 'timeseries.csv' every ::1 using 1:($" << extra + 2
        << "/1000) with lines title 'total load'\n";
    out << "set ylabel 'lambda'\nplot ";
    for (std::size_t i = 0; i < n; ++i)
        out << "'timeseries.csv' every ::1 using 1:" << agent_col(i, 0) << " with lines title '" << spec.fleet[i].id << "', ";
    out << "'' every ::1 using 1:" << extra << " with lines dt 2 title 'leader'\n";
    out << "set ylabel 'SoC'\nplot ";
    for (std::size_t i = 0; i < n; ++i)
        out << (i ? ", " : "") << "'timeseries.csv' every ::1 using 1:" << agent_col(i, 1) << " with lines title '"
            << spec.fleet[i].id << "'";
    out << "\nset ylabel 'P (kW)'\nplot ";
    for (std::size_t i = 0; i < n; ++i)
        out << (i ? ", " : "") << "'timeseries.csv' every ::1 using 1:($" << agent_col(i, 3) << "/1000) with lines title '"
            << spec.fleet[i].id << "'";
    for (std::size_t k = 0; k < n_res; ++k)
        out << ", 'timeseries.csv' every ::1 using 1:($" << res_col(k, 1) << "/1000) with lines dt 3 title '"
            << spec.plant.node(spec.plant.res_nodes()[k]).id << "'";
    out << "\nset ylabel 'f - f_n (Hz)'\nset xlabel 't (s)'\nplot ";
    for (std::size_t i = 0; i < n; ++i)
        out << (i ? ", " : "") << "'timeseries.csv' every ::1 using 1:($" << agent_col(i, 2) << "/(2*pi)) with lines title '"
            << spec.fleet[i].id << "'";
    out << "\nunset multiplot\n\n";

    out << "set output 'events.png'\n"
        << "set multiplot layout " << n << ",1 title 'event instants and intervals'\n"
        << "set xlabel ''\nset ylabel 'interval (s)'\nset logscale y\n";
    for (std::size_t i = 0; i < n; ++i)
        out << "plot 'events.csv' every ::1 using ($1==" << i << " ? $2 : 1/0):3 with impulses title '"
            << spec.fleet[i].id << "'\n";
    out << "unset multiplot\n";
}

void write_run_artifacts(const ScenarioSpec& spec, const RunResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    write_timeseries_csv(spec, r, dir / "timeseries.csv");
    write_events_csv(r, dir / "events.csv");
    open_out(dir / "metrics.json") << metrics_json(r).dump(2) << '\n';
    open_out(dir / "feasibility.json") << feasibility_json(r.feasibility, spec.gains).dump(2) << '\n';
    write_plot_script(spec, dir / "plot.gp");
}

}  // namespace mgsim
