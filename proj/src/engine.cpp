#include "mgsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mgsim/error.hpp"

namespace mgsim {

namespace {
constexpr double kTimeEps = 1e-9;
constexpr double kQuiet = 1e-12;
}  // namespace

double StepSchedule::value_at(double t) const {
    if (steps.empty()) throw ValidationError("empty schedule");
    double v = steps.front().second;
    for (const auto& [ts, val] : steps) {
        if (ts > t + kTimeEps) break;
        v = val;
    }
    return v;
}

std::vector<double> StepSchedule::values() const {
    std::vector<double> v;
    for (const auto& s : steps) v.push_back(s.second);
    return v;
}

std::string to_string(Monitoring m) { return m == Monitoring::Continuous ? "continuous" : "reconstructed"; }

Monitoring parse_monitoring(const std::string& s) {
    if (s == "continuous") return Monitoring::Continuous;
    if (s == "reconstructed") return Monitoring::Reconstructed;
    throw ValidationError("unknown monitoring mode '" + s + "'");
}

namespace {

void check_schedule(const StepSchedule& s, const char* name) {
    if (s.steps.empty()) throw ValidationError(std::string(name) + ": schedule is empty");
    if (s.steps.front().first != 0.0) throw ValidationError(std::string(name) + ": first step must be at t = 0");
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        if (!(s.steps[i].second >= 0.0)) throw ValidationError(std::string(name) + ": values must be non-negative");
        if (i > 0 && !(s.steps[i].first > s.steps[i - 1].first))
            throw ValidationError(std::string(name) + ": step times must be strictly increasing");
    }
}

// Plant with loads and RES set points for time t.
void apply_schedule(PlantModel& model, const std::vector<double>& base_p_nom, const ScenarioSpec& spec,
                    double t) {
    const auto& loads = model.load_nodes();
    const double total = spec.load.value_at(t);
    for (auto i : loads) model.node(i).p_load = total / static_cast<double>(loads.size());
    const double scale = spec.res_scale.value_at(t);
    const auto& res = model.res_nodes();
    for (std::size_t k = 0; k < res.size(); ++k) model.node(res[k]).p_nom = base_p_nom[k] * scale;
}

std::vector<double> breakpoints(const ScenarioSpec& spec) {
    std::vector<double> t;
    for (const auto& s : spec.load.steps) t.push_back(s.first);
    for (const auto& s : spec.res_scale.steps) t.push_back(s.first);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::vector<double> res_base(const PlantModel& model) {
    std::vector<double> b;
    for (auto i : model.res_nodes()) b.push_back(model.node(i).p_nom);
    return b;
}

}  // namespace

void ScenarioSpec::validate() const {
    if (plant.size() == 0) throw ValidationError("plant: no nodes");
    const auto n = fleet.size();
    if (n == 0) throw ValidationError("bess: fleet is empty");
    if (n != plant.bess_nodes().size()) throw ValidationError("bess: one unit per BESS plant node required");
    fleet_k_soc(fleet);
    if (comm.size() != n) throw ValidationError("comm: agent count must match the BESS fleet");
    comm.validate();
    gains.validate();
    check_schedule(load, "schedule.load");
    check_schedule(res_scale, "schedule.res_scale");
    if (plant.load_nodes().empty() && load.value_at(horizon) > 0.0)
        throw ValidationError("schedule.load: plant has no load node");
    if (soc0.size() != n) throw ValidationError("initial.soc: one value per agent required");
    if (lambda0.size() != n) throw ValidationError("initial.lambda: one value per agent required");
    for (double s : soc0)
        if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("initial.soc: values must be in [0,1]");
    for (double l : lambda0)
        if (!(l >= -1.0 && l <= 1.0)) throw ValidationError("initial.lambda: values must be in [-1,1]");
    if (!(horizon > 0.0)) throw ValidationError("timing.horizon must be positive");
    if (!(dt > 0.0) || dt > horizon) throw ValidationError("timing.dt must be in (0, horizon]");
    if (!(activation_time >= 0.0)) throw ValidationError("timing.activation_time must be non-negative");
    if (measurement_steps < 1) throw ValidationError("timing.measurement_steps must be >= 1");
    if (plant_substeps < 1) throw ValidationError("timing.plant_substeps must be >= 1");
    if (!(record_interval >= 0.0)) throw ValidationError("timing.record_interval must be non-negative");
    if (!(ic_scale >= 0.0)) throw ValidationError("timing.ic_scale must be non-negative");
    if (!(settle_tol > 0.0)) throw ValidationError("metrics.settle_tol must be positive");
    if (!(settle_hold >= 0.0)) throw ValidationError("metrics.settle_hold must be non-negative");
    if (!(deadband_hz >= 0.0)) throw ValidationError("constraints.deadband_hz must be non-negative");
    if (!(release_hold >= 0.0)) throw ValidationError("constraints.release_hold must be non-negative");

    // RES set points must stay within rating under the scale schedule.
    for (auto i : plant.res_nodes())
        for (double s : res_scale.values())
            if (plant.node(i).p_nom * s > plant.node(i).p_rat)
                throw ValidationError("schedule.res_scale: node " + plant.node(i).id + " exceeds its rating");

    if (constraints_enabled) {
        PlantModel m = plant;
        const auto base = res_base(plant);
        for (double t : breakpoints(*this)) {
            apply_schedule(m, base, *this, t);
            if (!check_capacity(m, {m.total_load()}, total_discharge(fleet), total_charge(fleet)))
                throw ValidationError("capacity violation: BESS fleet cannot cover the mismatch at t = " +
                                      std::to_string(t));
        }
    }
}

Eigen::MatrixXd ScenarioSpec::grounded() const { return grounded_matrix(laplacian(comm), comm); }

std::optional<double> settling_time(const std::vector<double>& t, const std::vector<std::vector<double>>& series,
                                    const std::vector<double>& reference, double tol, double hold) {
    const auto m = t.size();
    if (m == 0 || reference.size() != m) throw ValidationError("settling_time: series length mismatch");
    for (const auto& s : series)
        if (s.size() != m) throw ValidationError("settling_time: series length mismatch");

    auto in_band = [&](std::size_t k) {
        const double band = tol > 0.0 ? tol : 1e-3 * std::max(1.0, std::abs(reference[k]));
        for (const auto& s : series)
            if (!(std::abs(s[k] - reference[k]) <= band)) return false;
        return true;
    };
    std::size_t k = m;
    while (k > 0 && in_band(k - 1)) --k;
    if (k == m) return std::nullopt;
    if (t.back() - t[k] + kTimeEps < hold) return std::nullopt;
    return t[k];
}

EventStats event_statistics(const std::vector<EventRecord>& records, std::size_t n_agents) {
    EventStats st;
    for (const auto& r : records) n_agents = std::max(n_agents, r.agent + 1);
    st.per_agent_count.assign(n_agents, 0);
    std::vector<double> sum(n_agents, 0.0);
    std::vector<std::size_t> with_interval(n_agents, 0);
    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& r : records) {
        ++st.count;
        ++st.per_agent_count[r.agent];
        if (!r.interval) continue;
        total += *r.interval;
        ++counted;
        sum[r.agent] += *r.interval;
        ++with_interval[r.agent];
        st.min_interval = st.min_interval ? std::min(*st.min_interval, *r.interval) : *r.interval;
    }
    if (counted > 0) st.mean_interval = total / static_cast<double>(counted);
    st.per_agent_mean.resize(n_agents);
    for (std::size_t i = 0; i < n_agents; ++i)
        if (with_interval[i] > 0) st.per_agent_mean[i] = sum[i] / static_cast<double>(with_interval[i]);
    return st;
}

double overshoot(const std::vector<std::vector<double>>& q, const std::vector<double>& q_final, std::size_t begin,
                 std::size_t end) {
    if (q.size() != q_final.size()) throw ValidationError("overshoot: agent count mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (end > q[i].size() || begin >= end) throw ValidationError("overshoot: bad window");
        const double span = q_final[i] - q[i][begin];
        if (std::abs(span) <= 1e-12) continue;
        const double dir = span > 0.0 ? 1.0 : -1.0;
        double excess = 0.0;
        for (std::size_t k = begin; k < end; ++k) excess = std::max(excess, dir * (q[i][k] - q_final[i]));
        worst = std::max(worst, excess / std::abs(span));
    }
    return worst;
}

namespace {

// All mutable state of one run.
class Simulation {
public:
    explicit Simulation(const ScenarioSpec& spec)
        : spec_(spec),
          model_(spec.plant),
          base_p_nom_(res_base(spec.plant)),
          n_(spec.fleet.size()),
          k_soc_(fleet_k_soc(spec.fleet)),
          neighbors_(n_),
          held_(n_),
          last_event_(n_),
          trackers_(n_) {
        for (std::size_t i = 0; i < n_; ++i) neighbors_[i] = spec.comm.neighbors(i);
        apply_schedule(model_, base_p_nom_, spec_, 0.0);

        leader_.lambda_r = leader_reference(total_mismatch(model_), spec_.fleet);
        leader_.q_r = k_soc_ * leader_.lambda_r;
        const double mean_soc = std::accumulate(spec.soc0.begin(), spec.soc0.end(), 0.0) / static_cast<double>(n_);
        leader_.soc_r = mean_soc;

        for (std::size_t i = 0; i < n_; ++i) {
            const double s = mean_soc + spec.ic_scale * (spec.soc0[i] - mean_soc);
            const double l = leader_.lambda_r + spec.ic_scale * (spec.lambda0[i] - leader_.lambda_r);
            if (s < 0.0 || s > 1.0 || l < -1.0 || l > 1.0)
                throw ValidationError("timing.ic_scale pushes initial state of agent " + std::to_string(i) +
                                      " out of range");
            agents_.push_back(make_state(spec.fleet[i], s, l));
        }
        plant_ = initialize_state(model_, refs());

        steps_ = static_cast<long>(std::llround(spec.horizon / spec.dt));
        record_every_ = spec.record_interval > 0.0
                            ? std::max(1L, static_cast<long>(std::llround(spec.record_interval / spec.dt)))
                            : 1L;
        omega_meas_ = sync_frequency(model_, refs());
        result_.trace.lambda.resize(n_);
        result_.trace.soc.resize(n_);
        result_.trace.omega.resize(n_);
        result_.trace.p_inj.resize(n_);
        result_.trace.p_ref.resize(n_);
        result_.trace.res_omega.resize(model_.res_nodes().size());
        result_.trace.res_p_inj.resize(model_.res_nodes().size());
    }

    RunResult run() {
        try {
            result_.feasibility = check_feasibility(spec_.gains, spec_.grounded());
            if (!result_.feasibility.feasible && spec_.variant == ControllerVariant::Proposed)
                result_.warnings.push_back("gain set does not satisfy the feasibility conditions");
        } catch (const ValidationError& e) {
            result_.warnings.push_back(std::string("feasibility check failed: ") + e.what());
        }

        record(0.0);
        for (long n = 0; n < steps_; ++n) {
            const double t = static_cast<double>(n) * spec_.dt;
            apply_schedule(model_, base_p_nom_, spec_, t);
            if (n % spec_.measurement_steps == 0) measure(t);
            const bool fresh = maybe_activate(t, n);
            if (active_ && !fresh) evaluate_triggers(t);
            integrate();
            advance_plant();
            if (active_ && spec_.constraints_enabled) maybe_release(t + spec_.dt);
            if ((n + 1) % record_every_ == 0 || n + 1 == steps_) record(static_cast<double>(n + 1) * spec_.dt);
        }
        finish_metrics();
        return std::move(result_);
    }

private:
    std::vector<double> refs() const {
        std::vector<double> r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = agents_[i].p_ref;
        return r;
    }

    double pin(std::size_t i) const { return spec_.comm.pinning(static_cast<Eigen::Index>(i)); }

    void measure(double t) {
        const double lam = leader_reference(total_mismatch(model_), spec_.fleet);
        if (lam != leader_.lambda_r) {
            const double dq = k_soc_ * lam - leader_.q_r;
            leader_.lambda_r = lam;
            leader_.q_r = k_soc_ * lam;
            // The leader broadcasts the jump to the agents pinned to it.
            for (std::size_t i = 0; i < n_; ++i)
                if (pin(i) > 0.0) trackers_[i].shift_zeta(t, -pin(i) * dq);
        }
        omega_meas_ = sync_frequency(model_, refs());
    }

    ConsensusError true_errors(std::size_t i) const {
        std::vector<double> s(n_), q(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            s[j] = agents_[j].soc;
            q[j] = agents_[j].q;
        }
        return consensus_errors(i, spec_.comm, s, q, leader_.soc_r, leader_.q_r, spec_.gains.alpha,
                                spec_.gains.beta);
    }

    double zeta_rate(std::size_t i) const {
        double r = 0.0;
        for (auto j : neighbors_[i]) r += held_[i].u - held_[j].u;
        return r + pin(i) * held_[i].u;
    }

    void fire(std::size_t i, double t, const ConsensusError& ce, double f) {
        held_[i] = {t, control_input(spec_.variant, ce.phi, spec_.gains), ce.phi, true};
        EventRecord r{i, t, std::nullopt, f};
        if (last_event_[i]) r.interval = t - *last_event_[i];
        last_event_[i] = t;
        result_.events.push_back(r);
    }

    bool maybe_activate(double t, long n) {
        if (active_ || t + kTimeEps < spec_.activation_time) return false;
        if (spec_.constraints_enabled) {
            if (n % spec_.measurement_steps != 0) return false;
            if (!deadband_activates(omega_meas_, false, spec_.deadband_hz)) return false;
        }
        active_ = true;
        settle_timer_ = 0.0;
        result_.activations.push_back(t);
        double mean = 0.0;
        for (const auto& a : agents_) mean += a.soc;
        leader_.soc_r = mean / static_cast<double>(n_);

        std::vector<ConsensusError> ce(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            ce[i] = true_errors(i);
            fire(i, t, ce[i], 0.0);
        }
        for (std::size_t i = 0; i < n_; ++i) trackers_[i].rebase(t, ce[i].xi, ce[i].zeta, zeta_rate(i));
        return true;
    }

    void evaluate_triggers(double t) {
        const auto& g = spec_.gains;
        std::vector<std::size_t> firing;
        std::vector<double> fvals;
        for (std::size_t i = 0; i < n_; ++i) {
            double phi;
            if (spec_.monitoring == Monitoring::Continuous) {
                phi = true_errors(i).phi;
            } else {
                phi = g.alpha * trackers_[i].xi(t) + g.beta * trackers_[i].zeta(t);
            }
            const double e = measurement_error(held_[i].u, phi, spec_.variant, g);
            const auto trig = trigger_check(e, phi, g.rho);
            if (!trig.fired) continue;
            if (std::abs(e) < kQuiet && std::abs(phi) < kQuiet) continue;
            firing.push_back(i);
            fvals.push_back(trig.f_value);
        }
        if (firing.empty()) return;

        std::vector<ConsensusError> ce(firing.size());
        for (std::size_t k = 0; k < firing.size(); ++k) {
            ce[k] = true_errors(firing[k]);
            fire(firing[k], t, ce[k], fvals[k]);
        }
        std::vector<char> fired(n_, 0);
        for (std::size_t k = 0; k < firing.size(); ++k) {
            fired[firing[k]] = 1;
            trackers_[firing[k]].rebase(t, ce[k].xi, ce[k].zeta, zeta_rate(firing[k]));
        }
        for (std::size_t i = 0; i < n_; ++i)
            if (!fired[i]) trackers_[i].set_rate(t, zeta_rate(i));
    }

    void integrate() {
        const double dt = spec_.dt;
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& unit = spec_.fleet[i];
            const BessState prev = agents_[i];
            BessState next = active_ ? integrate_lambda(prev, unit, held_[i].u, dt) : prev;
            // A unit already at a bound must not draw on the new q for the SoC update.
            if (spec_.constraints_enabled)
                next = apply_local_constraints(next, prev, unit, omega_meas_, active_, spec_.deadband_hz).state;
            next.soc = prev.soc + 0.5 * (prev.q + next.q) * dt;
            if (spec_.constraints_enabled) {
                next = apply_local_constraints(next, prev, unit, omega_meas_, active_, spec_.deadband_hz).state;
            }
            if (next.soc < 0.0 || next.soc > 1.0) {
                next.soc = std::clamp(next.soc, 0.0, 1.0);
                if (result_.metrics.soc_clamps++ == 0)
                    result_.warnings.push_back("SoC left [0,1] for agent " + std::to_string(i) + "; clamped");
            }
            agents_[i] = next;
        }
        if (active_) leader_.soc_r += leader_.q_r * dt;
    }

    void advance_plant() {
        const auto r = refs();
        const double h = spec_.dt / spec_.plant_substeps;
        for (int k = 0; k < spec_.plant_substeps; ++k) {
            plant_ = step_plant(model_, plant_, r, h);
            result_.metrics.max_power_residual =
                std::max(result_.metrics.max_power_residual, power_balance_residual(model_, plant_));
        }
    }

    void maybe_release(double t) {
        double err = 0.0;
        for (const auto& a : agents_)
            err = std::max({err, std::abs(a.lambda - leader_.lambda_r), std::abs(a.soc - leader_.soc_r)});
        settle_timer_ = err <= spec_.settle_tol ? settle_timer_ + spec_.dt : 0.0;
        if (settle_timer_ + kTimeEps < spec_.release_hold) return;
        active_ = false;
        result_.releases.push_back(t);
        for (auto& h : held_) h = HeldSample{};
    }

    void record(double t) {
        auto& tr = result_.trace;
        tr.t.push_back(t);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto node = static_cast<Eigen::Index>(model_.bess_nodes()[i]);
            tr.lambda[i].push_back(agents_[i].lambda);
            tr.soc[i].push_back(agents_[i].soc);
            tr.omega[i].push_back(plant_.omega_dev(node));
            tr.p_inj[i].push_back(plant_.p_inj(node));
            tr.p_ref[i].push_back(agents_[i].p_ref);
        }
        const auto& res = model_.res_nodes();
        for (std::size_t k = 0; k < res.size(); ++k) {
            tr.res_omega[k].push_back(plant_.omega_dev(static_cast<Eigen::Index>(res[k])));
            tr.res_p_inj[k].push_back(plant_.p_inj(static_cast<Eigen::Index>(res[k])));
        }
        tr.lambda_r.push_back(leader_.lambda_r);
        tr.soc_r.push_back(leader_.soc_r);
        tr.p_load.push_back(model_.total_load());
        tr.omega_syn.push_back(sync_frequency(model_, refs()));
        tr.active.push_back(active_ ? 1 : 0);
    }

    void finish_metrics() {
        auto& m = result_.metrics;
        const auto& tr = result_.trace;
        m.events = event_statistics(result_.events, n_);

        m.window_start = result_.activations.empty() ? 0.0 : result_.activations.front();
        m.window_end = spec_.horizon;
        for (double b : breakpoints(spec_))
            if (b > m.window_start + kTimeEps) {
                m.window_end = std::min(m.window_end, b);
                break;
            }
        std::size_t begin = 0;
        while (begin < tr.t.size() && tr.t[begin] + kTimeEps < m.window_start) ++begin;
        std::size_t end = begin;
        while (end < tr.t.size() && tr.t[end] <= m.window_end + kTimeEps) ++end;

        if (end > begin + 1) {
            auto slice = [&](const std::vector<double>& v) {
                return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                           v.begin() + static_cast<std::ptrdiff_t>(end));
            };
            std::vector<std::vector<double>> lam, q;
            for (std::size_t i = 0; i < n_; ++i) {
                lam.push_back(slice(tr.lambda[i]));
                q.push_back(lam.back());
                for (auto& x : q.back()) x *= k_soc_;
            }
            const auto t = slice(tr.t);
            const auto ref = slice(tr.lambda_r);
            if (auto st = settling_time(t, lam, ref, spec_.settle_tol, spec_.settle_hold))
                m.settling_time = *st - m.window_start;
            std::vector<double> qf(n_, k_soc_ * ref.back());
            m.overshoot = overshoot(q, qf, 0, q.front().size());
        }

        double cons = 0.0, lo = 1.0, hi = 0.0, freq = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            cons = std::max(cons, std::abs(agents_[i].lambda - leader_.lambda_r));
            lo = std::min(lo, agents_[i].soc);
            hi = std::max(hi, agents_[i].soc);
        }
        for (auto i : model_.droop_nodes())
            freq = std::max(freq, std::abs(plant_.omega_dev(static_cast<Eigen::Index>(i))));
        m.final_consensus_error = cons;
        m.final_soc_spread = hi - lo;
        m.final_frequency_error = freq;
    }

    const ScenarioSpec& spec_;
    PlantModel model_;
    std::vector<double> base_p_nom_;
    std::size_t n_;
    double k_soc_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::vector<BessState> agents_;
    std::vector<HeldSample> held_;
    std::vector<std::optional<double>> last_event_;
    std::vector<ReconstructionTracker> trackers_;
    LeaderState leader_;
    PlantState plant_;
    bool active_ = false;
    double settle_timer_ = 0.0;
    double omega_meas_ = 0.0;
    long steps_ = 0;
    long record_every_ = 1;
    RunResult result_;
};

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec) {
    spec.validate();
    return Simulation(spec).run();
}

std::vector<ScalingCell> compare_initial_scaling(const ScenarioSpec& spec,
                                                 const std::vector<ControllerVariant>& variants,
                                                 const std::vector<double>& scales) {
    if (scales.size() < 2) throw ValidationError("compare_initial_scaling needs at least two scale factors");
    std::vector<ScalingCell> out;
    for (auto v : variants)
        for (double s : scales) {
            ScenarioSpec cell = spec;
            cell.variant = v;
            cell.ic_scale = s;
            out.push_back({v, s, run_scenario(cell).metrics.settling_time});
        }
    return out;
}

}  // namespace mgsim
