#include "dpe/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>

#include "json.hpp"
#include "dpe/error.hpp"
#include "dpe/sweeps.hpp"

namespace dpe {

using nlohmann::json;

std::vector<double> RangeSpec::values() const { return linspace_step(start, stop, step); }

namespace {

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
void read_value(const json& j, T& out, const std::string& path) {
    auto bad = [&](const char* what) { throw InvalidConfig(fmt::format("{}: expected {}", path, what)); };
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) bad("a boolean");
        out = j.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!j.is_number()) bad("a number");
        out = j.get<double>();
        if (!std::isfinite(out)) bad("a finite number");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) bad("a non-negative integer");
        out = j.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) bad("an integer");
        out = j.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) bad("a string");
        out = j.get<std::string>();
    } else if constexpr (is_vector<T>::value) {
        if (!j.is_array()) bad("an array");
        out.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            typename T::value_type v{};
            read_value(j[i], v, fmt::format("{}[{}]", path, i));
            out.push_back(v);
        }
    } else {
        static_assert(sizeof(T) == 0, "unsupported config field type");
    }
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InvalidConfig(fmt::format("{}: expected an object", path_.empty() ? "<root>" : path_));
    }

    template <class T>
    void field(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        read_value(j_.at(key), out, child(key));
    }

    template <class F>
    void section(const char* key, F&& f) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        Reader sub(j_.at(key), child(key));
        f(sub);
        sub.finish();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw InvalidConfig(fmt::format("{}: unknown key", child(k.c_str())));
    }

private:
    std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

class Writer {
public:
    explicit Writer(json& j) : j_(j) { j_ = json::object(); }

    template <class T>
    void field(const char* key, T& v) { j_[key] = v; }

    template <class F>
    void section(const char* key, F&& f) {
        Writer sub(j_[key]);
        f(sub);
    }

private:
    json& j_;
};

template <class V>
void visit(V& v, RangeSpec& r) {
    v.field("start", r.start);
    v.field("stop", r.stop);
    v.field("step", r.step);
}

template <class V>
void visit(V& v, DeviceParams& d) {
    v.field("vt0", d.vt0);
    v.field("k_prime", d.k_prime);
    v.field("w_over_l", d.w_over_l);
    v.field("lambda", d.lambda);
    v.field("subthreshold_i0", d.subthreshold_i0);
    v.field("subthreshold_n", d.subthreshold_n);
    v.field("phi_t", d.phi_t);
    v.field("w_over_l_min", d.w_over_l_min);
}

template <class V>
void visit(V& v, ModeSettings& m) {
    v.field("v_bias", m.v_bias);
    v.field("v_max", m.v_max);
    v.field("opamp_v_pos", m.opamp.v_pos);
    v.field("sense_r", m.sense.r);
    v.field("sense_v_ref", m.sense.v_ref);
}

template <class V>
void visit(V& v, EnergyParams& p) {
    v.field("e_adc", p.e_adc);
    v.field("e_dac", p.e_dac);
    v.field("e_array_access", p.e_array_access);
    v.field("e_mac_digital", p.e_mac_digital);
    v.field("e_mem_read", p.e_mem_read);
    v.field("t_adc", p.t_adc);
    v.field("t_mac", p.t_mac);
    v.field("n_adcs", p.n_adcs);
    v.field("em_ceiling", p.em_ceiling);
    v.field("v_dd", p.v_dd);
}

template <class V>
void visit(V& v, ExperimentConfig& c) {
    v.field("schema_version", c.schema_version);
    v.field("seed", c.seed);
    v.field("v_dd", c.v_dd);
    v.section("device", [&](auto& s) {
        s.field("profile", c.device_profile);
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Reader>) {
            try {
                c.device = device_profile(c.device_profile);
            } catch (const InvalidInput& e) {
                throw InvalidConfig(std::string("device.profile: ") + e.what());
            }
        }
        visit(s, c.device);
    });
    v.section("parasitics", [&](auto& s) {
        s.field("r_bl_per_cell", c.parasitics.r_bl_per_cell);
        s.field("r_sl_per_cell", c.parasitics.r_sl_per_cell);
        s.field("sheet_basis", c.parasitics.sheet_basis);
        s.field("lumped_inactive", c.parasitics.lumped_inactive);
    });
    v.section("config_a", [&](auto& s) { visit(s, c.config_a); });
    v.section("config_b", [&](auto& s) { visit(s, c.config_b); });
    v.section("iv_sweep", [&](auto& s) {
        s.field("weights", c.iv_sweep.weights);
        s.section("config_a", [&](auto& r) { visit(r, c.iv_sweep.config_a); });
        s.section("config_b", [&](auto& r) { visit(r, c.iv_sweep.config_b); });
    });
    v.section("weight_sweep", [&](auto& s) {
        s.field("config_a_voltages", c.weight_sweep.config_a);
        s.field("config_b_voltages", c.weight_sweep.config_b);
    });
    v.section("row_scaling", [&](auto& s) { s.field("n", c.row_scaling.n); });
    v.section("lineres_map", [&](auto& s) {
        auto& l = c.lineres_map;
        s.field("rows", l.rows);
        s.field("word_columns", l.word_columns);
        s.field("active_rows", l.active_rows);
        s.field("tap_every", l.tap_every);
        s.section("config_a_voltages", [&](auto& r) { visit(r, l.config_a_voltages); });
        s.section("config_b_voltages", [&](auto& r) { visit(r, l.config_b_voltages); });
        s.field("weights", l.weights);
        s.field("map_variants", l.map_variants);
    });
    v.section("montecarlo", [&](auto& s) {
        auto& m = c.montecarlo;
        s.field("sigma_min", m.sigma_min);
        s.field("trials", m.trials);
        s.field("rows", m.rows);
        s.section("voltages", [&](auto& r) { visit(r, m.voltages); });
        s.field("weights", m.weights);
    });
    v.section("nn", [&](auto& s) {
        auto& n = c.nn;
        s.field("dataset", n.dataset);
        s.field("weights_file", n.weights_file);
        s.field("hidden", n.hidden);
        s.field("epochs", n.epochs);
        s.field("learning_rate", n.learning_rate);
        s.field("tile_rows", n.tile_rows);
        s.field("adc_bits", n.adc_bits);
        s.field("v_low", n.v_low);
        s.field("v_high", n.v_high);
        s.field("sigma_min", n.sigma_min);
        s.field("variation_trials", n.variation_trials);
        s.field("variation_voltage_step", n.variation_voltage_step);
    });
    v.section("energy", [&](auto& s) {
        auto& e = c.energy;
        s.field("params_file", e.params_file);
        s.section("params", [&](auto& p) { visit(p, e.params); });
        s.field("rows", e.rows);
        s.field("words", e.words);
        s.field("samples", e.samples);
    });
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(fmt::format("malformed JSON: {}", e.what()));
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfig("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_range(const RangeSpec& r, const char* what) {
    if (!(r.step > 0.0) || r.stop < r.start) throw InvalidConfig(fmt::format("{}: need step > 0 and stop >= start", what));
}

void check_weights(const std::vector<int>& ws, const char* what) {
    if (ws.empty()) throw InvalidConfig(fmt::format("{}: empty weight list", what));
    for (int w : ws)
        if (w < 0 || w > kMaxWeightLevel) throw InvalidConfig(fmt::format("{}: weight {} outside 0..15", what, w));
}

}  // namespace

void ExperimentConfig::validate() const {
    if (schema_version != kSchemaVersion)
        throw InvalidConfig(fmt::format("schema_version {} is not supported (expected {})", schema_version, kSchemaVersion));
    try {
        device.validate();
        parasitics.validate();
    } catch (const InvalidInput& e) {
        throw InvalidConfig(e.what());
    }
    if (!(v_dd > 0.0)) throw InvalidConfig("v_dd must be positive");
    for (const auto* m : {&config_a, &config_b}) {
        if (!(m->sense.r > 0.0)) throw InvalidConfig("sense_r must be positive");
        if (m->opamp.v_pos < 0.0 || m->opamp.v_pos >= v_dd) throw InvalidConfig("opamp_v_pos must lie in [0, v_dd)");
        if (!(m->v_max > 0.0) || m->v_max > v_dd + 0.1) throw InvalidConfig("v_max must lie in (0, v_dd + 0.1]");
    }
    check_range(iv_sweep.config_a, "iv_sweep.config_a");
    check_range(iv_sweep.config_b, "iv_sweep.config_b");
    check_weights(iv_sweep.weights, "iv_sweep.weights");
    if (row_scaling.n.empty()) throw InvalidConfig("row_scaling.n is empty");
    for (auto n : row_scaling.n)
        if (n == 0) throw InvalidConfig("row_scaling.n entries must be positive");
    const auto& l = lineres_map;
    check_range(l.config_a_voltages, "lineres_map.config_a_voltages");
    check_range(l.config_b_voltages, "lineres_map.config_b_voltages");
    check_weights(l.weights, "lineres_map.weights");
    if (l.rows == 0 || l.word_columns == 0 || l.tap_every == 0) throw InvalidConfig("lineres_map sizes must be positive");
    for (auto n : l.active_rows)
        if (n == 0 || n > l.rows) throw InvalidConfig("lineres_map.active_rows must lie in 1..rows");
    for (const auto& v : l.map_variants)
        if (v != "config_a_single_end" && v != "config_b_single_end" && v != "config_b_both_ends" &&
            v != "config_b_tapped")
            throw InvalidConfig(fmt::format("lineres_map.map_variants: unknown variant '{}'", v));
    const auto& m = montecarlo;
    if (m.sigma_min < 0.0 || m.trials == 0 || m.rows == 0) throw InvalidConfig("montecarlo: bad sigma_min/trials/rows");
    check_range(m.voltages, "montecarlo.voltages");
    check_weights(m.weights, "montecarlo.weights");
    if (nn.hidden == 0 || nn.tile_rows == 0 || nn.adc_bits < 1 || nn.adc_bits > 24 || !(nn.v_high > nn.v_low) ||
        nn.sigma_min < 0.0 || nn.variation_trials == 0 || !(nn.variation_voltage_step > 0.0) || nn.learning_rate < 0.0)
        throw InvalidConfig("nn: invalid settings");
    energy.params.validate();
    if (energy.samples == 0) throw InvalidConfig("energy.samples must be positive");
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    const json j = parse_json(json_text);
    ExperimentConfig c;
    Reader r(j, "");
    visit(r, c);
    r.finish();
    c.base_dir = base_dir;
    // Stored absolute so a resolved config works from any directory.
    for (std::string* p : {&c.nn.dataset, &c.nn.weights_file, &c.energy.params_file})
        if (!p->empty()) *p = std::filesystem::absolute(resolve_path(base_dir, *p)).lexically_normal().string();
    if (!c.energy.params_file.empty()) c.energy.params = load_energy_params(c.energy.params_file);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_config(read_file(path), dir.empty() ? "." : dir);
}

std::string resolved_config_json(const ExperimentConfig& c) {
    ExperimentConfig copy = c;
    json j;
    Writer w(j);
    visit(w, copy);
    return j.dump(2) + "\n";
}

EnergyParams parse_energy_params(const std::string& json_text) {
    const json j = parse_json(json_text);
    EnergyParams p;
    int version = kSchemaVersion;
    Reader r(j, "");
    r.field("schema_version", version);
    visit(r, p);
    r.finish();
    if (version != kSchemaVersion) throw InvalidConfig("energy parameter file: unsupported schema_version");
    p.validate();
    return p;
}

EnergyParams load_energy_params(const std::string& path) { return parse_energy_params(read_file(path)); }

std::string energy_params_json(const EnergyParams& p) {
    EnergyParams copy = p;
    json j;
    Writer w(j);
    int version = kSchemaVersion;
    w.field("schema_version", version);
    visit(w, copy);
    return j.dump(2) + "\n";
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace dpe
