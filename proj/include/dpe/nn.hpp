#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpe/crossbar.hpp"
#include "dpe/parallel.hpp"
#include "dpe/rng.hpp"
#include "dpe/variation.hpp"

namespace dpe {

/// Row-major real matrix.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Dataset {
    std::size_t features = 0;
    std::vector<double> x;  // samples x features, row-major
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> sample(std::size_t i) const { return {x.data() + i * features, features}; }
    void push(std::span<const double> features_in, int label);
};

/// CSV with one header line, then features..., label per row.
Dataset load_dataset_csv(const std::string& path);
/// Sample i goes to the test set when i % 3 == 0.
std::pair<Dataset, Dataset> split_train_test(const Dataset& all);

/// Layer l is out x (in + 1); the last column is the bias.
struct RealNetwork {
    std::vector<RealMatrix> layers;

    std::vector<std::size_t> topology() const;
};

struct QuantizedLayer {
    WeightMatrix pos;  // (in + 1) rows x out words, the crossbar orientation
    WeightMatrix neg;
    double scale = 0.0;  // real value per level; 0 marks an all-zero layer

    std::size_t inputs() const { return pos.rows() - 1; }
    std::size_t outputs() const { return pos.words(); }
    /// (pos - neg) * scale in the original out x (in + 1) orientation.
    RealMatrix dequantized() const;
};

QuantizedLayer quantize_weights(const RealMatrix& w);

struct ActivationSpec {
    double gain = 1.0;  // applied to the pre-activation before clamping

    double satlin(double pre) const;
};

struct InputEncoding {
    Voltage v_low = 0.10;
    Voltage v_high = 0.22;

    void validate() const;
    Voltage encode(double x) const;  // x clamped to [0, 1]
};

struct QuantizedNetwork {
    std::vector<QuantizedLayer> layers;
    ActivationSpec activation;

    static QuantizedNetwork from(const RealNetwork& net, ActivationSpec act = {});
};

/// Full-scale current of one word: weight 15, every one of `rows` rows at
/// v_max. i_max = v_max * g_max.
struct NormalizationSpec {
    Current i_max = 0.0;
    Conductance g_max = 0.0;
    Voltage v_max = 0.0;

    Current unit() const { return i_max / kMaxWeightLevel; }  // one level at full scale input
};

enum class Mode { Ideal, Crossbar, CrossbarVariation };
const char* mode_name(Mode m);

struct EngineSpec {
    DeviceParams device = default_45();
    Voltage v_dd = 0.65;
    Voltage v_pos = 0.1;  // opamp clamp on every RBL
    InputEncoding encoding;
    std::size_t tile_rows = 16;
    int adc_bits = 8;
    StdVsCurrentFit fit;  // surrogate for CrossbarVariation
    std::uint64_t seed = 1;
};

/// Layer evaluation through a ConfigA array with ideal-opamp termination and
/// no line resistance. Every cell then sees fixed terminals, so each row's
/// eight possible cell currents (four widths, bit on or off) are solved once
/// and reused across the row's words.
class CrossbarEngine {
public:
    explicit CrossbarEngine(EngineSpec spec);

    const EngineSpec& spec() const { return spec_; }
    const NormalizationSpec& normalization() const { return norm_; }

    /// Pre-activations of one layer; inputs exclude the bias entry.
    /// rng is required only for CrossbarVariation.
    std::vector<double> evaluate_layer(std::span<const double> inputs, const QuantizedLayer& layer, Mode mode,
                                       CounterRng* rng = nullptr) const;

    /// Raw group currents per tile: result[tile][word], for pos or neg.
    std::vector<std::vector<Current>> tile_currents(std::span<const double> inputs, const WeightMatrix& m) const;

    /// Output-layer pre-activations; hidden layers go through satlin.
    std::vector<double> forward(std::span<const double> x, const QuantizedNetwork& net, Mode mode,
                                std::uint64_t sample_index) const;
    int classify(std::span<const double> x, const QuantizedNetwork& net, Mode mode, std::uint64_t sample_index) const;

    /// Uniform ADC over [0, kMaxWeightLevel * tile_rows] normalized units.
    double adc(double normalized) const;
    double adc_lsb() const;

private:
    EngineSpec spec_;
    NormalizationSpec norm_;
};

double infer(const Dataset& data, const QuantizedNetwork& net, const CrossbarEngine& engine, Mode mode,
             Exec exec = Exec::Parallel);

/// Std-vs-current surrogate from a ConfigA Monte Carlo on one tile.
StdVsCurrentFit crossbar_variation_fit(const EngineSpec& spec, const VariationSpec& var, double voltage_step = 0.01);

struct TrainOptions {
    std::size_t epochs = 60;
    double learning_rate = 0.05;
    std::uint64_t seed = 1;
};

/// Plain SGD, satlin hidden layers, linear output, squared error against
/// one-hot targets.
RealNetwork train_reference(const Dataset& train, const std::vector<std::size_t>& topology, const TrainOptions& opt);
RealNetwork init_network(const std::vector<std::size_t>& topology, std::uint64_t seed);

/// 0.5 * ||out - onehot(label)||^2; fills grads (same shapes as layers) when non-null.
double sample_loss(const RealNetwork& net, std::span<const double> x, int label, std::vector<RealMatrix>* grads);
std::vector<double> real_forward(const RealNetwork& net, std::span<const double> x);
double real_accuracy(const RealNetwork& net, const Dataset& data);

int argmax(std::span<const double> v);

}  // namespace dpe
