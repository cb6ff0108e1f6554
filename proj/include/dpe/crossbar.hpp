#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpe/device.hpp"
#include "dpe/units.hpp"

namespace dpe {

inline constexpr int kBitsPerWord = 4;
inline constexpr int kMaxWeightLevel = (1 << kBitsPerWord) - 1;

/// rows x words of unsigned 4-bit weights, row-major.
class WeightMatrix {
public:
    WeightMatrix() = default;
    WeightMatrix(std::size_t rows, std::size_t words, std::uint8_t fill = 0);
    WeightMatrix(std::size_t rows, std::size_t words, std::vector<std::uint8_t> values);

    std::size_t rows() const { return rows_; }
    std::size_t words() const { return words_; }
    std::uint8_t at(std::size_t row, std::size_t word) const { return values_[row * words_ + word]; }
    void set(std::size_t row, std::size_t word, int value);
    std::span<const std::uint8_t> values() const { return values_; }

    bool operator==(const WeightMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint8_t> values_;
};

/// Bit b of a word (b = 3 is the MSB).
constexpr int weight_bit(int value, int b) { return (value >> b) & 1; }

struct ArrayGeometry {
    std::size_t rows = 64;
    std::size_t word_columns = 32;
    int bits_per_word = kBitsPerWord;
    std::array<int, kBitsPerWord> sizing_ratios{8, 4, 2, 1};  // MSB first
    /// Optional per-bit threshold shift (MSB first) for a multi-Vt array.
    std::array<Voltage, kBitsPerWord> bit_vt_shift{0.0, 0.0, 0.0, 0.0};
    std::vector<std::size_t> active_rows;  // empty means all rows

    std::size_t bit_columns() const { return word_columns * static_cast<std::size_t>(bits_per_word); }
    std::vector<std::size_t> resolved_active_rows() const;
    std::vector<bool> active_mask() const;
    void validate() const;

    /// The n contiguous rows farthest from the column termination (which sits at row 0).
    static std::vector<std::size_t> farthest_rows(std::size_t rows, std::size_t n);
};

enum class DriveMode { ConfigA, ConfigB };

/// Config-A drives inputs on the SL with RWL at v_dd; Config-B holds the SL at
/// v_bias and drives inputs on the RWL.
struct Excitation {
    DriveMode mode = DriveMode::ConfigA;
    std::vector<Voltage> inputs;  // one per active row, in active-row order
    Voltage v_dd = 0.65;
    Voltage v_bias = 0.0;

    void validate(std::size_t active_rows) const;
};

/// SL and RWL voltages seen by one row. Idle rows sit at the zero-current
/// condition: the RWL is deselected, and under Config-A the SL also sits at
/// the termination voltage.
struct RowDrive {
    Voltage v_sl;
    Voltage v_rwl;
};
std::vector<RowDrive> row_drives(const Excitation& e, const ArrayGeometry& g, Voltage termination_voltage);

struct Cell {
    bool bit = false;
    int width = 1;
    Voltage dvt_m1 = 0.0;
    Voltage dvt_m2 = 0.0;
};

/// rows x bit-columns of read-port cells, row-major. Word j owns bit-columns
/// 4j..4j+3, MSB first.
class CellGrid {
public:
    CellGrid() = default;
    CellGrid(std::size_t rows, std::size_t bit_columns) : rows_(rows), cols_(bit_columns), cells_(rows * bit_columns) {}

    std::size_t rows() const { return rows_; }
    std::size_t bit_columns() const { return cols_; }
    Cell& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
    const Cell& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Cell> cells_;
};

CellGrid pack_weights(const WeightMatrix& m, const ArrayGeometry& g);
WeightMatrix unpack_weights(const CellGrid& cells, const ArrayGeometry& g);

/// The stack for one cell including its sizing and any threshold shifts.
ReadStack cell_stack(const Cell& cell, const DeviceParams& device, Voltage v_dd);

/// Exact sum_i inputs_i * value_ij.
std::vector<double> ideal_dot_product(std::span<const double> inputs, const WeightMatrix& m);

struct ColumnCurrents {
    std::vector<Current> bit_columns;
    std::vector<Current> groups;  // sum of each word's four bit-columns

    static ColumnCurrents from_bit_columns(std::vector<Current> bit_columns, int bits_per_word);
};

/// Parasitic-free evaluation with every RBL clamped at termination_voltage.
ColumnCurrents ideal_column_currents(const Excitation& e, const ArrayGeometry& g, const CellGrid& cells,
                                     const DeviceParams& device, Voltage termination_voltage);

}  // namespace dpe
