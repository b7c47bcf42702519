#include "mgsim/sweep.hpp"

#include <fstream>

#include "mgsim/artifacts.hpp"
#include "mgsim/error.hpp"

namespace mgsim {

GainSet gain_preset(const std::string& name, const GainSet& base) {
    GainSet g = base;
    auto set = [&](double k1, double k2, double k3, double a, double b) {
        g.k1 = k1;
        g.k2 = k2;
        g.k3 = k3;
        g.alpha = a;
        g.beta = b;
    };
    if (name == "S1") set(30, 35, 16, 72, 12);
    else if (name == "S2") set(6, 7, 3.5, 72, 12);
    else if (name == "S3") set(6, 7, 3.5, 150, 20);
    else if (name == "case3") set(2, 3, 3.5, 18, 6);
    else if (name != "scenario") throw ValidationError("unknown gain set '" + name + "'");
    return g;
}

std::vector<SweepCell> build_cells(const std::vector<std::pair<std::string, ScenarioSpec>>& scenarios,
                                   const std::vector<std::string>& gains,
                                   const std::vector<ControllerVariant>& variants, const std::vector<double>& scales) {
    std::vector<SweepCell> cells;
    for (const auto& [name, spec] : scenarios) {
        const auto g_list = gains.empty() ? std::vector<std::string>{"scenario"} : gains;
        const auto v_list = variants.empty() ? std::vector<ControllerVariant>{spec.variant} : variants;
        const auto s_list = scales.empty() ? std::vector<double>{spec.ic_scale} : scales;
        for (const auto& g : g_list)
            for (auto v : v_list)
                for (double s : s_list) {
                    SweepCell c{name, g, v, s, spec};
                    c.spec.gains = gain_preset(g, spec.gains);
                    c.spec.variant = v;
                    c.spec.ic_scale = s;
                    cells.push_back(std::move(c));
                }
    }
    return cells;
}

namespace {
SweepRow run_cell(const SweepCell& c) {
    SweepRow row{c.scenario, c.gains, c.variant, c.scale, std::nullopt, {}};
    try {
        row.metrics = run_scenario(c.spec).metrics;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}
}  // namespace

std::vector<SweepRow> run_sweep_serial(const std::vector<SweepCell>& cells) {
    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    for (const auto& c : cells) rows.push_back(run_cell(c));
    return rows;
}

std::vector<SweepRow> run_sweep_parallel(const std::vector<SweepCell>& cells) {
    std::vector<SweepRow> rows(cells.size());
    const auto n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) rows[static_cast<std::size_t>(k)] = run_cell(cells[static_cast<std::size_t>(k)]);
    return rows;
}

void write_comparison_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "scenario,gains,variant,ic_scale,settling_time,overshoot,mean_event_interval,event_count,error\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.gains << ',' << to_string(r.variant) << ',' << fmt9(r.scale) << ',';
        if (r.metrics) {
            const auto& m = *r.metrics;
            out << (m.settling_time ? fmt9(*m.settling_time) : "not_settled") << ',' << fmt9(m.overshoot) << ','
                << (m.events.mean_interval ? fmt9(*m.events.mean_interval) : "") << ',' << m.events.count << ',';
        } else {
            out << ",,,,";
        }
        std::string err = r.error;
        for (auto& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        out << err << '\n';
    }
}

}  // namespace mgsim
