#include "dpe/nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "dpe/error.hpp"

namespace dpe {

void Dataset::push(std::span<const double> f, int label) {
    if (features == 0 && labels.empty()) features = f.size();
    if (f.size() != features) throw InvalidInput("sample has the wrong number of features");
    x.insert(x.end(), f.begin(), f.end());
    labels.push_back(label);
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open dataset " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty dataset " + path);
    Dataset d;
    std::vector<double> row;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        row.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InvalidInput(fmt::format("{}:{}: bad number '{}'", path, lineno, cell));
            }
        }
        if (row.size() < 2) throw InvalidInput(fmt::format("{}:{}: too few fields", path, lineno));
        const double label = row.back();
        if (label != std::floor(label) || label < 0) throw InvalidInput(fmt::format("{}:{}: bad label", path, lineno));
        row.pop_back();
        d.push(row, static_cast<int>(label));
    }
    return d;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& all) {
    Dataset train, test;
    train.features = test.features = all.features;
    for (std::size_t i = 0; i < all.size(); ++i) (i % 3 == 0 ? test : train).push(all.sample(i), all.labels[i]);
    return {train, test};
}

std::vector<std::size_t> RealNetwork::topology() const {
    std::vector<std::size_t> t;
    if (layers.empty()) return t;
    t.push_back(layers.front().cols - 1);
    for (const auto& l : layers) t.push_back(l.rows);
    return t;
}

RealMatrix QuantizedLayer::dequantized() const {
    RealMatrix w(outputs(), pos.rows());
    for (std::size_t o = 0; o < outputs(); ++o)
        for (std::size_t i = 0; i < pos.rows(); ++i)
            w.at(o, i) = (static_cast<int>(pos.at(i, o)) - static_cast<int>(neg.at(i, o))) * scale;
    return w;
}

QuantizedLayer quantize_weights(const RealMatrix& w) {
    double max_abs = 0.0;
    for (double v : w.data) {
        if (!std::isfinite(v)) throw InvalidInput("non-finite weight");
        max_abs = std::max(max_abs, std::abs(v));
    }
    QuantizedLayer q;
    q.pos = WeightMatrix(w.cols, w.rows);
    q.neg = WeightMatrix(w.cols, w.rows);
    if (max_abs == 0.0) return q;
    q.scale = max_abs / kMaxWeightLevel;
    for (std::size_t o = 0; o < w.rows; ++o)
        for (std::size_t i = 0; i < w.cols; ++i) {
            const double v = w.at(o, i);
            const int level = std::min(kMaxWeightLevel, static_cast<int>(std::lround(std::abs(v) / q.scale)));
            if (v > 0) q.pos.set(i, o, level);
            if (v < 0) q.neg.set(i, o, level);
        }
    return q;
}

double ActivationSpec::satlin(double pre) const { return std::clamp(pre * gain, 0.0, 1.0); }

void InputEncoding::validate() const {
    if (!(v_high > v_low) || v_low < 0.0) throw InvalidConfig("input encoding needs 0 <= v_low < v_high");
}

Voltage InputEncoding::encode(double x) const { return v_low + std::clamp(x, 0.0, 1.0) * (v_high - v_low); }

QuantizedNetwork QuantizedNetwork::from(const RealNetwork& net, ActivationSpec act) {
    QuantizedNetwork q;
    q.activation = act;
    for (const auto& l : net.layers) q.layers.push_back(quantize_weights(l));
    return q;
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Ideal: return "ideal";
        case Mode::Crossbar: return "crossbar";
        case Mode::CrossbarVariation: return "crossbar_variation";
    }
    return "?";
}

namespace {

Current cell_current(const EngineSpec& s, int width, Voltage dvt, bool bit, Voltage v_in) {
    const Cell cell{bit, width, dvt, dvt};
    return stack_current(cell_stack(cell, s.device, s.v_dd), {v_in, s.v_pos, s.v_dd, bit});
}

// The eight currents a row can contribute, indexed [bit-column in word][bit].
using RowCache = std::array<std::array<Current, 2>, kBitsPerWord>;

RowCache row_cache(const EngineSpec& s, Voltage v_in) {
    const ArrayGeometry g;
    RowCache c{};
    for (int k = 0; k < kBitsPerWord; ++k)
        for (int bit = 0; bit < 2; ++bit) c[k][bit] = cell_current(s, g.sizing_ratios[k], g.bit_vt_shift[k], bit, v_in);
    return c;
}

}  // namespace

CrossbarEngine::CrossbarEngine(EngineSpec spec) : spec_(std::move(spec)) {
    spec_.encoding.validate();
    if (spec_.tile_rows == 0) throw InvalidConfig("tile_rows must be positive");
    if (spec_.adc_bits < 1 || spec_.adc_bits > 24) throw InvalidConfig("adc_bits must be in 1..24");
    if (!(spec_.v_pos >= 0.0) || spec_.v_pos >= spec_.encoding.v_high)
        throw InvalidConfig("v_pos must lie below the top of the input range");
    const RowCache top = row_cache(spec_, spec_.encoding.v_high);
    Current word = 0.0;
    for (int k = 0; k < kBitsPerWord; ++k) word += top[k][1];
    norm_.v_max = spec_.encoding.v_high;
    norm_.i_max = word;
    norm_.g_max = word / norm_.v_max;
    if (!(norm_.i_max > 0.0)) throw InvalidConfig("full-scale current is not positive");
}

double CrossbarEngine::adc_lsb() const {
    const double full = static_cast<double>(kMaxWeightLevel * spec_.tile_rows);
    return full / static_cast<double>((1 << spec_.adc_bits) - 1);
}

double CrossbarEngine::adc(double y) const {
    const double full = static_cast<double>(kMaxWeightLevel * spec_.tile_rows);
    const double lsb = adc_lsb();
    return std::round(std::clamp(y, 0.0, full) / lsb) * lsb;
}

std::vector<std::vector<Current>> CrossbarEngine::tile_currents(std::span<const double> inputs,
                                                                const WeightMatrix& m) const {
    if (inputs.size() + 1 != m.rows()) throw InvalidInput("input length does not match layer");
    const std::size_t rows = m.rows();
    const std::size_t tiles = (rows + spec_.tile_rows - 1) / spec_.tile_rows;
    std::vector<std::vector<Current>> out(tiles, std::vector<Current>(m.words(), 0.0));
    for (std::size_t r = 0; r < rows; ++r) {
        const double x = r < inputs.size() ? inputs[r] : 1.0;  // bias row always on
        const RowCache c = row_cache(spec_, spec_.encoding.encode(x));
        auto& tile = out[r / spec_.tile_rows];
        for (std::size_t w = 0; w < m.words(); ++w) {
            const int value = m.at(r, w);
            for (int k = 0; k < kBitsPerWord; ++k) tile[w] += c[k][weight_bit(value, kBitsPerWord - 1 - k)];
        }
    }
    return out;
}

std::vector<double> CrossbarEngine::evaluate_layer(std::span<const double> inputs, const QuantizedLayer& layer, Mode mode,
                                                   CounterRng* rng) const {
    const std::size_t outs = layer.outputs();
    if (inputs.size() != layer.inputs()) throw InvalidInput("input length does not match layer");
    std::vector<double> pre(outs, 0.0);
    if (mode == Mode::Ideal) {
        std::vector<double> aug(inputs.begin(), inputs.end());
        aug.push_back(1.0);
        for (auto& v : aug) v = std::clamp(v, 0.0, 1.0);
        const auto p = ideal_dot_product(aug, layer.pos);
        const auto n = ideal_dot_product(aug, layer.neg);
        for (std::size_t o = 0; o < outs; ++o) pre[o] = layer.scale * (p[o] - n[o]);
        return pre;
    }
    if (mode == Mode::CrossbarVariation && rng == nullptr) throw InvalidInput("variation mode needs an rng");
    const double unit = norm_.unit();
    auto accumulate = [&](const WeightMatrix& m, double sign) {
        const auto tiles = tile_currents(inputs, m);
        for (const auto& tile : tiles)
            for (std::size_t o = 0; o < outs; ++o) {
                Current i = tile[o];
                if (mode == Mode::CrossbarVariation) i = surrogate_noise(i, spec_.fit, *rng);
                pre[o] += sign * adc(i / unit);
            }
    };
    accumulate(layer.pos, 1.0);
    accumulate(layer.neg, -1.0);
    for (auto& v : pre) v *= layer.scale;
    return pre;
}

std::vector<double> CrossbarEngine::forward(std::span<const double> x, const QuantizedNetwork& net, Mode mode,
                                            std::uint64_t sample_index) const {
    CounterRng rng(spec_.seed, sample_index);
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto pre = evaluate_layer(a, net.layers[l], mode, &rng);
        if (l + 1 == net.layers.size()) return pre;
        for (auto& v : pre) v = net.activation.satlin(v);
        a = std::move(pre);
    }
    return a;
}

int argmax(std::span<const double> v) {
    if (v.empty()) throw InvalidInput("argmax of empty vector");
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int CrossbarEngine::classify(std::span<const double> x, const QuantizedNetwork& net, Mode mode,
                             std::uint64_t sample_index) const {
    return argmax(forward(x, net, mode, sample_index));
}

double infer(const Dataset& data, const QuantizedNetwork& net, const CrossbarEngine& engine, Mode mode, Exec exec) {
    if (net.layers.empty()) throw InvalidInput("empty network");
    if (data.features != net.layers.front().inputs()) throw InvalidInput("dataset does not match network inputs");
    if (data.size() == 0) return 0.0;
    std::vector<char> correct(data.size(), 0);
    parallel_for(exec, data.size(), [&](std::size_t i) {
        correct[i] = engine.classify(data.sample(i), net, mode, i) == data.labels[i];
    });
    const auto hits = std::count(correct.begin(), correct.end(), 1);
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

StdVsCurrentFit crossbar_variation_fit(const EngineSpec& spec, const VariationSpec& var, double voltage_step) {
    MonteCarloScenario sc;
    sc.setup.device = spec.device;
    sc.setup.v_dd = spec.v_dd;
    sc.setup.mode = DriveMode::ConfigA;
    sc.setup.termination = IdealOpamp{spec.v_pos};
    sc.rows = spec.tile_rows;
    sc.voltages = linspace_step(spec.encoding.v_low, spec.encoding.v_high, voltage_step);
    for (int w = 1; w <= kMaxWeightLevel; ++w) sc.weights.push_back(w);
    return fit_std_vs_current(monte_carlo_stats(sc, var));
}

// ---------------------------------------------------------------- training

RealNetwork init_network(const std::vector<std::size_t>& topology, std::uint64_t seed) {
    if (topology.size() < 2) throw InvalidInput("topology needs at least two layers");
    RealNetwork net;
    CounterRng rng(seed, 0);
    for (std::size_t l = 0; l + 1 < topology.size(); ++l) {
        const std::size_t in = topology[l], out = topology[l + 1];
        if (in == 0 || out == 0) throw InvalidInput("empty layer in topology");
        RealMatrix w(out, in + 1);
        const double r = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t o = 0; o < out; ++o) {
            for (std::size_t i = 0; i < in; ++i) w.at(o, i) = r * (2.0 * rng.uniform() - 1.0);
            // Hidden units start inside satlin's linear region.
            w.at(o, in) = l + 2 < topology.size() ? 0.5 : 0.0;
        }
        net.layers.push_back(std::move(w));
    }
    return net;
}

namespace {

struct Trace {
    std::vector<std::vector<double>> acts;  // inputs of each layer, then output
    std::vector<std::vector<double>> pres;
};

Trace trace_forward(const RealNetwork& net, std::span<const double> x) {
    Trace t;
    t.acts.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& w = net.layers[l];
        const auto& a = t.acts.back();
        if (a.size() + 1 != w.cols) throw InvalidInput("input length does not match layer");
        std::vector<double> z(w.rows);
        for (std::size_t o = 0; o < w.rows; ++o) {
            double s = w.at(o, w.cols - 1);
            for (std::size_t i = 0; i < a.size(); ++i) s += w.at(o, i) * a[i];
            z[o] = s;
        }
        t.pres.push_back(z);
        if (l + 1 < net.layers.size())
            for (auto& v : z) v = std::clamp(v, 0.0, 1.0);
        t.acts.push_back(std::move(z));
    }
    return t;
}

}  // namespace

std::vector<double> real_forward(const RealNetwork& net, std::span<const double> x) {
    return trace_forward(net, x).acts.back();
}

double sample_loss(const RealNetwork& net, std::span<const double> x, int label, std::vector<RealMatrix>* grads) {
    const Trace t = trace_forward(net, x);
    const auto& out = t.acts.back();
    if (label < 0 || static_cast<std::size_t>(label) >= out.size()) throw InvalidInput("label out of range");
    std::vector<double> delta(out.size());
    double loss = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        delta[k] = out[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
        loss += 0.5 * delta[k] * delta[k];
    }
    if (!grads) return loss;
    grads->resize(net.layers.size());
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const auto& w = net.layers[l];
        const auto& a = t.acts[l];
        RealMatrix& g = (*grads)[l];
        g = RealMatrix(w.rows, w.cols);
        for (std::size_t o = 0; o < w.rows; ++o) {
            for (std::size_t i = 0; i < a.size(); ++i) g.at(o, i) = delta[o] * a[i];
            g.at(o, w.cols - 1) = delta[o];
        }
        if (l == 0) break;
        std::vector<double> prev(a.size(), 0.0);
        const auto& z = t.pres[l - 1];
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (z[i] <= 0.0 || z[i] >= 1.0) continue;  // satlin' = 0 outside (0, 1)
            double s = 0.0;
            for (std::size_t o = 0; o < w.rows; ++o) s += w.at(o, i) * delta[o];
            prev[i] = s;
        }
        delta = std::move(prev);
    }
    return loss;
}

double real_accuracy(const RealNetwork& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) hits += argmax(real_forward(net, data.sample(i))) == data.labels[i];
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

RealNetwork train_reference(const Dataset& train, const std::vector<std::size_t>& topology, const TrainOptions& opt) {
    if (topology.empty() || topology.front() != train.features) throw InvalidInput("topology does not match dataset");
    RealNetwork net = init_network(topology, opt.seed);
    std::vector<std::size_t> order(train.size());
    std::vector<RealMatrix> grads;
    for (std::size_t e = 0; e < opt.epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        CounterRng shuffle(opt.seed, e + 1);
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(shuffle.uniform() * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        for (std::size_t idx : order) {
            sample_loss(net, train.sample(idx), train.labels[idx], &grads);
            for (std::size_t l = 0; l < net.layers.size(); ++l)
                for (std::size_t k = 0; k < grads[l].data.size(); ++k)
                    net.layers[l].data[k] -= opt.learning_rate * grads[l].data[k];
        }
    }
    return net;
}

}  // namespace dpe
