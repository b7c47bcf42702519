#include "mgsim/scenario_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mgsim/error.hpp"

namespace mgsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Object view that remembers which keys were consumed.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
    }
    ~Obj() = default;
    Obj(const Obj&) = delete;
    Obj& operator=(const Obj&) = delete;

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) throw ValidationError(at(key) + ": missing required field");
        seen_.insert(key);
        return j_.at(key);
    }

    double num(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) throw ValidationError(at(key) + ": expected a number");
        return v.get<double>();
    }
    double num(const std::string& key, double def) { return has(key) ? num(key) : def; }

    int integer(const std::string& key, int def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number_integer()) throw ValidationError(at(key) + ": expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ValidationError(at(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string str(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ValidationError(at(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& def) { return has(key) ? str(key) : def; }

    const json& array(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw ValidationError(at(key) + ": expected an array");
        return v;
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        const auto& a = array(key);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!a[i].is_number()) throw ValidationError(at(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(a[i].get<double>());
        }
        return out;
    }

    // Call after reading: every key present must have been consumed.
    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(at(it.key()) + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Prefix validation messages from lower modules with the section they came from.
template <class F>
auto within(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(where, 0) == 0) throw;
        throw ValidationError(where + ": " + msg);
    }
}

StepSchedule read_schedule(Obj& o, const std::string& key, double def_value) {
    StepSchedule s;
    if (!o.has(key)) {
        s.steps.emplace_back(0.0, def_value);
        return s;
    }
    const auto& a = o.array(key);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& p = a[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ValidationError(o.at(key) + "[" + std::to_string(i) + "]: expected [time, value]");
        s.steps.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return s;
}

PlantModel read_plant(const json& j, std::map<std::string, std::size_t>& index) {
    Obj o(j, "plant");
    const double v_nom = o.num("v_nom", 311.0);
    const double f_nom = o.num("f_nom", 50.0);
    const double kp_default = o.num("kp", 2e-5);

    std::vector<PhysNode> nodes;
    const auto& arr = o.array("nodes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Obj n(arr[i], "plant.nodes[" + std::to_string(i) + "]");
        PhysNode p;
        p.id = n.str("id");
        p.kind = within(n.at("kind"), [&] { return parse_node_kind(n.str("kind")); });
        p.v_mag = n.num("v_mag", v_nom);
        if (p.kind != NodeKind::Load) p.kp = n.num("kp", kp_default);
        if (p.kind == NodeKind::Res) {
            p.p_nom = n.num("p_nom");
            p.p_rat = n.num("p_rat", p.p_nom);
        }
        n.done();
        if (index.count(p.id)) throw ValidationError(n.at("id") + ": duplicate node id '" + p.id + "'");
        index[p.id] = nodes.size();
        nodes.push_back(std::move(p));
    }

    std::vector<Line> lines;
    const auto& la = o.array("lines");
    for (std::size_t i = 0; i < la.size(); ++i) {
        Obj l(la[i], "plant.lines[" + std::to_string(i) + "]");
        Line line;
        for (const char* end : {"from", "to"}) {
            const auto id = l.str(end);
            auto it = index.find(id);
            if (it == index.end()) throw ValidationError(l.at(end) + ": unknown node '" + id + "'");
            (std::string(end) == "from" ? line.from : line.to) = it->second;
        }
        if (l.has("reactance") == l.has("inductance_mh"))
            throw ValidationError(l.at("reactance") + ": give exactly one of reactance or inductance_mh");
        line.reactance = l.has("reactance") ? l.num("reactance")
                                            : 2.0 * 3.14159265358979323846 * f_nom * l.num("inductance_mh") * 1e-3;
        l.done();
        lines.push_back(line);
    }
    o.done();
    return within("plant", [&] { return PlantModel(std::move(nodes), std::move(lines)); });
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ValidationError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                              ": " + e.what());
    }

    Obj top(root, "");
    ScenarioSpec spec;
    spec.name = top.str("name", "");
    spec.description = top.str("description", "");

    std::map<std::string, std::size_t> index;
    spec.plant = read_plant(top.raw("plant"), index);

    double soc_lo = 0.2, soc_hi = 0.8;
    if (top.has("constraints")) {
        Obj c(top.raw("constraints"), "constraints");
        spec.constraints_enabled = c.boolean("enabled", false);
        soc_lo = c.num("soc_lo", soc_lo);
        soc_hi = c.num("soc_hi", soc_hi);
        spec.deadband_hz = c.num("deadband_hz", spec.deadband_hz);
        spec.release_hold = c.num("release_hold", spec.release_hold);
        c.done();
    }

    {
        const auto& arr = top.array("bess");
        std::vector<BessUnit> by_node(spec.plant.size());
        std::vector<char> filled(spec.plant.size(), 0);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj b(arr[i], "bess[" + std::to_string(i) + "]");
            BessUnit u;
            u.id = b.str("node");
            auto it = index.find(u.id);
            if (it == index.end() || spec.plant.node(it->second).kind != NodeKind::Bess)
                throw ValidationError(b.at("node") + ": '" + u.id + "' is not a BESS node");
            u.capacity = b.num("capacity");
            u.v_dc = b.num("v_dc", 800.0);
            u.p_dis = b.num("p_dis");
            u.p_cha = b.num("p_cha", -u.p_dis);
            u.soc_lo = soc_lo;
            u.soc_hi = soc_hi;
            b.done();
            within("bess[" + std::to_string(i) + "]", [&] { u.validate(); return 0; });
            if (filled[it->second]) throw ValidationError(b.at("node") + ": duplicate unit for '" + u.id + "'");
            filled[it->second] = 1;
            by_node[it->second] = u;
        }
        for (auto k : spec.plant.bess_nodes()) {
            if (!filled[k]) throw ValidationError("bess: no unit for node '" + spec.plant.node(k).id + "'");
            spec.fleet.push_back(by_node[k]);
        }
        within("bess", [&] { return fleet_k_soc(spec.fleet); });
    }

    {
        Obj c(top.raw("comm"), "comm");
        const auto n = spec.fleet.size();
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        const auto& ea = c.array("edges");
        for (std::size_t i = 0; i < ea.size(); ++i) {
            const auto& e = ea[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
                throw ValidationError("comm.edges[" + std::to_string(i) + "]: expected [agent, agent]");
            edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        }
        const auto pin = c.numbers("pinning");
        c.done();
        spec.comm = within("comm", [&] { return CommTopology::from_edges(n, edges, pin); });
        within("comm", [&] { spec.comm.validate(); return 0; });
    }

    {
        Obj c(top.raw("controller"), "controller");
        spec.variant = within(c.at("variant"), [&] { return parse_variant(c.str("variant", "proposed")); });
        spec.monitoring = within(c.at("monitoring"), [&] { return parse_monitoring(c.str("monitoring", "continuous")); });
        Obj g(c.raw("gains"), "controller.gains");
        auto& gs = spec.gains;
        gs.k1 = g.num("k1");
        gs.k2 = g.num("k2");
        gs.k3 = g.num("k3");
        gs.alpha = g.num("alpha");
        gs.beta = g.num("beta");
        gs.gamma1 = g.num("gamma1", gs.gamma1);
        gs.gamma2 = g.num("gamma2", gs.gamma2);
        gs.rho = g.num("rho", gs.rho);
        gs.d = g.num("d", gs.d);
        g.done();
        c.done();
        within("controller.gains", [&] { gs.validate(); return 0; });
    }

    {
        Obj s(top.raw("schedule"), "schedule");
        spec.load = read_schedule(s, "load", 0.0);
        spec.res_scale = read_schedule(s, "res_scale", 1.0);
        s.done();
    }

    {
        Obj s(top.raw("initial"), "initial");
        spec.soc0 = s.numbers("soc");
        spec.lambda0 = s.has("lambda") ? s.numbers("lambda") : std::vector<double>(spec.fleet.size(), 0.0);
        s.done();
    }

    {
        Obj s(top.raw("timing"), "timing");
        spec.horizon = s.num("horizon");
        spec.dt = s.num("dt", 1e-3);
        spec.activation_time = s.num("activation_time", 0.0);
        spec.measurement_steps = s.integer("measurement_steps", 10);
        spec.plant_substeps = s.integer("plant_substeps", 1);
        spec.record_interval = s.num("record_interval", 0.0);
        spec.ic_scale = s.num("ic_scale", 1.0);
        s.done();
    }

    if (top.has("metrics")) {
        Obj s(top.raw("metrics"), "metrics");
        spec.settle_tol = s.num("settle_tol", spec.settle_tol);
        spec.settle_hold = s.num("settle_hold", spec.settle_hold);
        s.done();
    }
    top.done();

    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

ordered_json scenario_to_json(const ScenarioSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["description"] = spec.description;

    ordered_json nodes = ordered_json::array();
    for (const auto& n : spec.plant.nodes()) {
        ordered_json o;
        o["id"] = n.id;
        o["kind"] = to_string(n.kind);
        o["v_mag"] = n.v_mag;
        if (n.droop()) o["kp"] = n.kp;
        if (n.kind == NodeKind::Res) {
            o["p_nom"] = n.p_nom;
            o["p_rat"] = n.p_rat;
        }
        nodes.push_back(o);
    }
    ordered_json lines = ordered_json::array();
    for (const auto& l : spec.plant.lines())
        lines.push_back({{"from", spec.plant.node(l.from).id}, {"to", spec.plant.node(l.to).id}, {"reactance", l.reactance}});
    j["plant"] = {{"nodes", nodes}, {"lines", lines}};

    ordered_json bess = ordered_json::array();
    for (const auto& u : spec.fleet)
        bess.push_back({{"node", u.id}, {"capacity", u.capacity}, {"v_dc", u.v_dc}, {"p_dis", u.p_dis}, {"p_cha", u.p_cha}});
    j["bess"] = bess;

    ordered_json edges = ordered_json::array();
    for (auto [a, b] : spec.comm.edges()) edges.push_back({a, b});
    std::vector<double> pin(spec.comm.pinning.data(), spec.comm.pinning.data() + spec.comm.pinning.size());
    j["comm"] = {{"edges", edges}, {"pinning", pin}};

    const auto& g = spec.gains;
    j["controller"] = {{"variant", to_string(spec.variant)},
                       {"monitoring", to_string(spec.monitoring)},
                       {"gains",
                        {{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"alpha", g.alpha}, {"beta", g.beta},
                         {"gamma1", g.gamma1}, {"gamma2", g.gamma2}, {"rho", g.rho}, {"d", g.d}}}};

    auto sched = [](const StepSchedule& s) {
        ordered_json a = ordered_json::array();
        for (auto [t, v] : s.steps) a.push_back({t, v});
        return a;
    };
    j["schedule"] = {{"load", sched(spec.load)}, {"res_scale", sched(spec.res_scale)}};
    j["initial"] = {{"soc", spec.soc0}, {"lambda", spec.lambda0}};

    const double lo = spec.fleet.empty() ? 0.2 : spec.fleet.front().soc_lo;
    const double hi = spec.fleet.empty() ? 0.8 : spec.fleet.front().soc_hi;
    j["constraints"] = {{"enabled", spec.constraints_enabled}, {"soc_lo", lo}, {"soc_hi", hi},
                        {"deadband_hz", spec.deadband_hz}, {"release_hold", spec.release_hold}};
    j["timing"] = {{"horizon", spec.horizon},
                   {"dt", spec.dt},
                   {"activation_time", spec.activation_time},
                   {"measurement_steps", spec.measurement_steps},
                   {"plant_substeps", spec.plant_substeps},
                   {"record_interval", spec.record_interval},
                   {"ic_scale", spec.ic_scale}};
    j["metrics"] = {{"settle_tol", spec.settle_tol}, {"settle_hold", spec.settle_hold}};
    return j;
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << scenario_to_json(spec).dump(2) << '\n';
}

}  // namespace mgsim
