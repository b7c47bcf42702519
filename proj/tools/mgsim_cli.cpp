#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mgsim/artifacts.hpp"
#include "mgsim/scenario_io.hpp"
#include "mgsim/sweep.hpp"

namespace fs = std::filesystem;
using namespace mgsim;

namespace {

fs::path default_out(const std::string& leaf) {
    const char* env = std::getenv("MGSIM_OUT_DIR");
    return fs::path(env && *env ? env : "out") / leaf;
}

template <class T, class F>
std::vector<T> split_list(const std::string& s, F&& conv) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(conv(item));
    return out;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void print_metrics(const RunResult& r) {
    const auto& m = r.metrics;
    std::cout << "settling_time: " << (m.settling_time ? fmt9(*m.settling_time) + " s" : "not settled") << '\n'
              << "overshoot: " << fmt9(m.overshoot) << '\n'
              << "events: " << m.events.count << ", mean interval "
              << (m.events.mean_interval ? fmt9(*m.events.mean_interval) + " s" : "n/a") << '\n'
              << "final consensus error: " << fmt9(m.final_consensus_error) << '\n';
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Islanded microgrid simulator with event-triggered BESS secondary control"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "simulate one scenario and write artifacts");
    std::string run_path, run_out, run_variant;
    double scale_ic = -1.0, dt = -1.0;
    run->add_option("scenario", run_path, "scenario JSON file")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--variant", run_variant, "proposed | finite_baseline | asymptotic_baseline");
    run->add_option("--scale-ic", scale_ic, "initial deviation scale factor");
    run->add_option("--dt", dt, "integration step (s)");

    auto* sweep = app.add_subcommand("sweep", "run a scenario x gains x variants x scales grid");
    std::vector<std::string> sweep_paths;
    std::string gains, variants, scales, sweep_out;
    bool serial = false;
    sweep->add_option("scenarios", sweep_paths, "scenario JSON files");
    sweep->add_option("--gains", gains, "comma list of S1,S2,S3,case3,scenario");
    sweep->add_option("--variants", variants, "comma list of controller variants");
    sweep->add_option("--scales", scales, "comma list of initial-condition scales");
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_flag("--serial", serial, "run cells one after another");

    auto* check = app.add_subcommand("check", "validate a scenario and report gain feasibility");
    std::string check_path;
    check->add_option("scenario", check_path, "scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            auto spec = load_scenario(run_path);
            if (!run_variant.empty()) spec.variant = parse_variant(run_variant);
            if (scale_ic >= 0.0) spec.ic_scale = scale_ic;
            if (dt > 0.0) spec.dt = dt;
            const auto result = run_scenario(spec);
            const fs::path out = run_out.empty() ? default_out(spec.name.empty() ? stem_of(run_path) : spec.name) : fs::path(run_out);
            write_run_artifacts(spec, result, out);
            print_metrics(result);
            std::cout << "artifacts: " << out.string() << '\n';
            return 0;
        }
        if (*sweep) {
            if (sweep_paths.empty()) {
                std::cerr << "usage error: sweep needs at least one scenario file\n" << sweep->help();
                return 2;
            }
            std::vector<std::pair<std::string, ScenarioSpec>> scen;
            for (const auto& p : sweep_paths) {
                auto s = load_scenario(p);
                scen.emplace_back(s.name.empty() ? stem_of(p) : s.name, std::move(s));
            }
            const auto cells = build_cells(scen, split_list<std::string>(gains, [](const std::string& s) { return s; }),
                                           split_list<ControllerVariant>(variants, parse_variant),
                                           split_list<double>(scales, [](const std::string& s) { return std::stod(s); }));
            if (cells.empty()) {
                std::cerr << "usage error: empty sweep matrix\n";
                return 2;
            }
            const auto rows = serial ? run_sweep_serial(cells) : run_sweep_parallel(cells);
            const fs::path out = sweep_out.empty() ? default_out("sweep") : fs::path(sweep_out);
            fs::create_directories(out);
            write_comparison_csv(rows, out / "comparison.csv");
            int failed = 0;
            for (const auto& r : rows)
                if (!r.error.empty()) {
                    ++failed;
                    std::cerr << "cell " << r.scenario << '/' << r.gains << '/' << to_string(r.variant) << '/'
                              << r.scale << " failed: " << r.error << '\n';
                }
            std::cout << rows.size() - static_cast<std::size_t>(failed) << " of " << rows.size()
                      << " cells completed; " << (out / "comparison.csv").string() << '\n';
            return failed ? 1 : 0;
        }
        if (*check) {
            const auto spec = load_scenario(check_path);
            const auto rep = check_feasibility(spec.gains, spec.grounded());
            std::cout << feasibility_json(rep, spec.gains).dump(2) << '\n';
            return rep.feasible ? 0 : 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
