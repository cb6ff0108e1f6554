#include "dpe/crossbar.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dpe/error.hpp"

namespace dpe {

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t words, std::uint8_t fill)
    : rows_(rows), words_(words), values_(rows * words, fill) {
    if (fill > kMaxWeightLevel) throw InvalidInput("weight level out of range");
}

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t words, std::vector<std::uint8_t> values)
    : rows_(rows), words_(words), values_(std::move(values)) {
    if (values_.size() != rows * words) throw InvalidInput("weight matrix size mismatch");
    for (auto v : values_)
        if (v > kMaxWeightLevel) throw InvalidInput("weight level out of range");
}

void WeightMatrix::set(std::size_t row, std::size_t word, int value) {
    if (value < 0 || value > kMaxWeightLevel) throw InvalidInput(fmt::format("weight level {} out of range", value));
    values_.at(row * words_ + word) = static_cast<std::uint8_t>(value);
}

std::vector<std::size_t> ArrayGeometry::resolved_active_rows() const {
    if (!active_rows.empty()) return active_rows;
    std::vector<std::size_t> all(rows);
    for (std::size_t i = 0; i < rows; ++i) all[i] = i;
    return all;
}

std::vector<bool> ArrayGeometry::active_mask() const {
    std::vector<bool> mask(rows, active_rows.empty());
    for (auto r : active_rows) mask[r] = true;
    return mask;
}

void ArrayGeometry::validate() const {
    if (rows == 0 || word_columns == 0) throw InvalidInput("array geometry must be nonempty");
    if (bits_per_word != kBitsPerWord) throw InvalidInput("only 4-bit words are supported");
    std::vector<bool> seen(rows, false);
    for (auto r : active_rows) {
        if (r >= rows) throw InvalidInput(fmt::format("active row {} outside array of {} rows", r, rows));
        if (seen[r]) throw InvalidInput(fmt::format("active row {} listed twice", r));
        seen[r] = true;
    }
    for (int w : sizing_ratios)
        if (w < 1) throw InvalidInput("sizing ratios must be positive");
}

std::vector<std::size_t> ArrayGeometry::farthest_rows(std::size_t rows, std::size_t n) {
    if (n == 0 || n > rows) throw InvalidInput("active row count outside the array");
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rows - n + i;
    return out;
}

void Excitation::validate(std::size_t active_rows) const {
    if (inputs.size() != active_rows)
        throw InvalidInput(fmt::format("{} inputs for {} active rows", inputs.size(), active_rows));
    auto in_range = [&](Voltage v) { return std::isfinite(v) && v >= 0.0 && v <= v_dd + 0.1; };
    for (auto v : inputs)
        if (!in_range(v)) throw InvalidInput(fmt::format("input voltage {} outside [0, v_dd + 0.1]", v));
    if (mode == DriveMode::ConfigB && !in_range(v_bias)) throw InvalidInput("v_bias outside [0, v_dd + 0.1]");
}

std::vector<RowDrive> row_drives(const Excitation& e, const ArrayGeometry& g, Voltage termination_voltage) {
    const auto active = g.resolved_active_rows();
    e.validate(active.size());
    std::vector<RowDrive> drives(g.rows);
    for (auto& d : drives) {
        if (e.mode == DriveMode::ConfigA)
            d = {termination_voltage, 0.0};
        else
            d = {e.v_bias, 0.0};
    }
    for (std::size_t k = 0; k < active.size(); ++k) {
        if (e.mode == DriveMode::ConfigA)
            drives[active[k]] = {e.inputs[k], e.v_dd};
        else
            drives[active[k]] = {e.v_bias, e.inputs[k]};
    }
    return drives;
}

CellGrid pack_weights(const WeightMatrix& m, const ArrayGeometry& g) {
    if (m.rows() != g.rows || m.words() != g.word_columns)
        throw InvalidInput(fmt::format("weights {}x{} do not fit a {}x{} array", m.rows(), m.words(), g.rows,
                                       g.word_columns));
    CellGrid cells(g.rows, g.bit_columns());
    for (std::size_t r = 0; r < g.rows; ++r) {
        for (std::size_t w = 0; w < g.word_columns; ++w) {
            const int value = m.at(r, w);
            for (int k = 0; k < kBitsPerWord; ++k) {
                Cell& cell = cells.at(r, w * kBitsPerWord + k);
                cell.bit = weight_bit(value, kBitsPerWord - 1 - k) != 0;
                cell.width = g.sizing_ratios[k];
                cell.dvt_m1 = g.bit_vt_shift[k];
                cell.dvt_m2 = g.bit_vt_shift[k];
            }
        }
    }
    return cells;
}

WeightMatrix unpack_weights(const CellGrid& cells, const ArrayGeometry& g) {
    if (cells.rows() != g.rows || cells.bit_columns() != g.bit_columns())
        throw InvalidInput("cell grid does not match geometry");
    WeightMatrix m(g.rows, g.word_columns);
    for (std::size_t r = 0; r < g.rows; ++r) {
        for (std::size_t w = 0; w < g.word_columns; ++w) {
            int value = 0;
            for (int k = 0; k < kBitsPerWord; ++k)
                value = value << 1 | (cells.at(r, w * kBitsPerWord + k).bit ? 1 : 0);
            m.set(r, w, value);
        }
    }
    return m;
}

ReadStack cell_stack(const Cell& cell, const DeviceParams& device, Voltage v_dd) {
    return ReadStack::sized(device, cell.width, v_dd, cell.dvt_m1, cell.dvt_m2);
}

std::vector<double> ideal_dot_product(std::span<const double> inputs, const WeightMatrix& m) {
    if (inputs.size() != m.rows()) throw InvalidInput("input length does not match weight rows");
    std::vector<double> out(m.words(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!std::isfinite(inputs[i])) throw InvalidInput("non-finite input");
        for (std::size_t j = 0; j < m.words(); ++j) out[j] += inputs[i] * m.at(i, j);
    }
    return out;
}

ColumnCurrents ColumnCurrents::from_bit_columns(std::vector<Current> bit_columns, int bits_per_word) {
    ColumnCurrents c;
    c.bit_columns = std::move(bit_columns);
    const std::size_t bpw = static_cast<std::size_t>(bits_per_word);
    c.groups.assign(c.bit_columns.size() / bpw, 0.0);
    for (std::size_t j = 0; j < c.groups.size(); ++j)
        for (std::size_t k = 0; k < bpw; ++k) c.groups[j] += c.bit_columns[j * bpw + k];
    return c;
}

ColumnCurrents ideal_column_currents(const Excitation& e, const ArrayGeometry& g, const CellGrid& cells,
                                     const DeviceParams& device, Voltage termination_voltage) {
    g.validate();
    if (cells.rows() != g.rows || cells.bit_columns() != g.bit_columns())
        throw InvalidInput("cell grid does not match geometry");
    const auto drives = row_drives(e, g, termination_voltage);
    std::vector<Current> bit_columns(g.bit_columns(), 0.0);
    for (std::size_t r = 0; r < g.rows; ++r) {
        const StackBias on{drives[r].v_sl, termination_voltage, drives[r].v_rwl, true};
        StackBias off = on;
        off.data_bit = false;
        for (std::size_t c = 0; c < g.bit_columns(); ++c) {
            const Cell& cell = cells.at(r, c);
            bit_columns[c] += stack_current(cell_stack(cell, device, e.v_dd), cell.bit ? on : off);
        }
    }
    return ColumnCurrents::from_bit_columns(std::move(bit_columns), g.bits_per_word);
}

}  // namespace dpe
