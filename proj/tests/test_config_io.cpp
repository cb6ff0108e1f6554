#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dpe/config.hpp"
#include "dpe/error.hpp"
#include "dpe/io.hpp"
#include "dpe/rng.hpp"

using namespace dpe;

namespace {

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "dpe_test_config_io";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string error_of(const std::string& json) {
    try {
        parse_config(json);
    } catch (const InvalidConfig& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("fnv1a64") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
    CHECK(hex64(0) == "0000000000000000");
}

TEST_CASE("config defaults and overrides") {
    const auto c = parse_config("{}");
    CHECK(c.seed == 1);
    CHECK(c.v_dd == 0.65);
    CHECK(c.config_a.v_max == 0.22);
    CHECK(c.lineres_map.rows == 64);
    const auto d = parse_config(R"({"seed": 7, "montecarlo": {"trials": 10}})");
    CHECK(d.seed == 7);
    CHECK(d.montecarlo.trials == 10);
}

TEST_CASE("config errors name the offending path") {
    CHECK(error_of(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(error_of(R"({"montecarlo": {"trails": 10}})").find("montecarlo.trails") != std::string::npos);
    CHECK(error_of(R"({"seed": "one"})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"montecarlo": {"trials": -3}})") != "");
    CHECK(error_of(R"({"schema_version": 2})").find("schema_version") != std::string::npos);
    CHECK(error_of("not json") != "");
    CHECK(error_of("[1, 2]") != "");
    CHECK(error_of(R"({"device": {"profile": "no-such-node"}})") != "");
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), InvalidConfig);
}

TEST_CASE("resolved config round-trips") {
    auto c = parse_config(R"({"seed": 9, "v_dd": 0.7, "nn": {"hidden": 20}, "device": {"vt0": 0.35}})");
    const auto text = resolved_config_json(c);
    const auto again = parse_config(text);
    CHECK(resolved_config_json(again) == text);
    CHECK(again.seed == 9);
    CHECK(again.nn.hidden == 20);
    CHECK(again.device.vt0 == 0.35);
}

TEST_CASE("shipped default config loads") {
    const auto c = load_config(std::string(DPE_SOURCE_DIR) + "/config/default.json");
    CHECK(energy_params_json(c.energy.params) == energy_params_json(EnergyParams{}));
    CHECK(std::filesystem::path(c.nn.dataset).is_absolute());
    CHECK(std::filesystem::exists(c.nn.dataset));
    // The resolved dump is self-contained: reparsing it from elsewhere changes nothing.
    CHECK(resolved_config_json(parse_config(resolved_config_json(c), "/")) == resolved_config_json(c));
    CHECK(resolve_path("/a/b", "c.json") == "/a/b/c.json");
    CHECK(resolve_path("/a/b", "/x.json") == "/x.json");
}

TEST_CASE("energy parameter files") {
    const auto p = parse_energy_params(R"({"schema_version": 1, "e_adc": 2e-12})");
    CHECK(p.e_adc == 2e-12);
    CHECK(p.e_dac == EnergyParams{}.e_dac);
    CHECK_THROWS_AS(parse_energy_params(R"({"e_adcc": 1})"), InvalidConfig);
    CHECK_THROWS_AS(parse_energy_params(R"({"n_adcs": 0})"), InvalidConfig);
    CHECK(parse_energy_params(energy_params_json(p)).e_adc == p.e_adc);
}

TEST_CASE("matrix and weight files round-trip") {
    CounterRng rng(1, 0);
    RealMatrix m(3, 5);
    for (auto& v : m.data) v = rng.normal() * 1e-3;
    std::stringstream s;
    write_matrix(s, m);
    const auto back = read_matrix(s);
    CHECK(back.rows == 3);
    CHECK(back.data == m.data);

    WeightMatrix w(4, 3);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c) w.set(r, c, int((r * 3 + c) % 16));
    std::stringstream ws;
    write_weight_levels(ws, w);
    CHECK(read_weight_levels(ws) == w);

    std::stringstream bad("2 2 4\n1 2\n3 16\n");
    CHECK_THROWS(read_weight_levels(bad));
    std::stringstream truncated("2 2 0\n1 2\n");
    CHECK_THROWS(read_matrix(truncated));

    RealNetwork net;
    net.layers.push_back(m);
    net.layers.push_back(RealMatrix(2, 4, 0.25));
    const auto path = temp_path("net.txt");
    save_network(path, net);
    const auto loaded = load_network(path);
    REQUIRE(loaded.layers.size() == 2);
    CHECK(loaded.layers[0].data == net.layers[0].data);
    CHECK(loaded.layers[1].data == net.layers[1].data);
}

TEST_CASE("csv output is deterministic") {
    auto make = [] {
        CsvTable t("test", 3, "abc", {"x", "y", "name"});
        t.row().add(0.1).add(1e-300).add("a");
        t.row().add(1.0 / 3.0).add(-2).add("b");
        return t.str();
    };
    const auto s = make();
    CHECK(s == make());
    CHECK(s.rfind("# dpe-sim test seed=3 config=abc\nx,y,name\n", 0) == 0);
    CHECK(s.find("0.1,1e-300,a\n") != std::string::npos);
    CHECK(s.find("0.3333333333333333,-2,b\n") != std::string::npos);

    const auto path = temp_path("t.csv");
    CsvTable t("test", 3, "abc", {"x"});
    t.row().add(2.5);
    t.write(path);
    CHECK(read_text(path) == t.str());
}
