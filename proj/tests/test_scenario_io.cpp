#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mgsim/error.hpp"
#include "support.hpp"

using namespace mgsim;

namespace {
std::string read(const std::string& name) {
    std::ifstream in(std::string(MGSIM_SCENARIO_DIR) + "/" + name + ".json");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}
}  // namespace

TEST_CASE("bundled case1") {
    const auto s = bundled("case1");
    CHECK(s.plant.res_nodes().size() == 5);
    CHECK(s.plant.bess_nodes().size() == 5);
    CHECK(s.comm.edges().size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(s.comm.neighbors(i).size() == 2);
    CHECK(s.plant.total_res_nominal() == 50000.0);
    CHECK(total_discharge(s.fleet) == 145000.0);
    CHECK(total_charge(s.fleet) == -145000.0);
}

TEST_CASE("every bundled scenario loads") {
    for (const auto* n : {"case1", "case2", "case3", "recon3"}) CHECK_NOTHROW(bundled(n));
}

TEST_CASE("validation errors name the field") {
    auto j = nlohmann::json::parse(read("case1"));
    j["controller"]["gains"]["gamma1"] = 1.2;
    CHECK(error_of(j.dump()).find("gamma1 must be in (0,1)") != std::string::npos);

    j = nlohmann::json::parse(read("case1"));
    j["comm"]["edges"] = {{0, 1}, {2, 3}, {3, 4}, {4, 2}};
    CHECK(error_of(j.dump()).find("disconnected") != std::string::npos);

    j = nlohmann::json::parse(read("case1"));
    j["timing"]["horizn"] = 3;
    CHECK(error_of(j.dump()).find("timing.horizn: unknown key") != std::string::npos);

    j = nlohmann::json::parse(read("case1"));
    j["bess"][2]["p_dis"] = "lots";
    CHECK(error_of(j.dump()).find("bess[2].p_dis") != std::string::npos);

    const auto msg = error_of("{\n  \"name\": \"x\",\n  \"plant\": [1, 2,\n}");
    CHECK(msg.find("line 4") != std::string::npos);
}

TEST_CASE("scenario files round-trip") {
    for (const auto* n : {"case1", "case2", "case3", "recon3"}) {
        const auto a = bundled(n);
        const auto ja = scenario_to_json(a);
        const auto b = parse_scenario(ja.dump());
        CHECK(scenario_to_json(b) == ja);
        CHECK(b.plant == a.plant);
        CHECK(b.fleet == a.fleet);
        CHECK(b.gains == a.gains);
        CHECK(b.load == a.load);
        CHECK(b.comm.adjacency == a.comm.adjacency);
        CHECK(b.comm.pinning == a.comm.pinning);
    }
    const auto dir = std::filesystem::temp_directory_path() / "mgsim_io_test";
    std::filesystem::create_directories(dir);
    const auto s = bundled("case2");
    save_scenario(s, dir / "c2.json");
    CHECK(scenario_to_json(load_scenario(dir / "c2.json")) == scenario_to_json(s));
}
