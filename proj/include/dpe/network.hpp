#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "dpe/crossbar.hpp"
#include "dpe/device.hpp"
#include "dpe/units.hpp"

namespace dpe {

/// Per-cell line resistance along the BL (column) and SL (row) directions.
struct ParasiticSpec {
    Resistance r_bl_per_cell = 1.25;
    Resistance r_sl_per_cell = 2.5;
    double sheet_basis = 1.3;  // ohm/um, documentation only
    bool lumped_inactive = false;

    static ParasiticSpec none() { return {0.0, 0.0, 1.3, false}; }
    void validate() const;
};

struct SingleEnd {};
struct BothEnds {};
/// SL re-driven every k bit-cells; each k-cell segment is fed from both ends.
struct TappedEvery {
    std::size_t k = 16;
};
using SlDriveVariant = std::variant<SingleEnd, BothEnds, TappedEvery>;

struct SenseResistor {
    Resistance r = 50.0;
    Voltage v_ref = 0.0;  // rail at the far side of the resistor
};
struct IdealOpamp {
    Voltage v_pos = 0.1;  // RBL held here
};
using Termination = std::variant<SenseResistor, IdealOpamp>;

/// Voltage an RBL sits at with no current: v_pos for the opamp, v_ref for the resistor.
Voltage termination_voltage(const Termination& t);
std::string describe(const SlDriveVariant& v);
std::string describe(const Termination& t);

struct NetNode {
    bool fixed = false;
    Voltage voltage = 0.0;  // source value if fixed, initial guess otherwise
};

struct NetResistor {
    std::size_t a;
    std::size_t b;
    Resistance r;  // zero merges the two nodes
};

struct NetCell {
    std::size_t sl;
    std::size_t rbl;
    std::size_t row;
    std::size_t bit_column;
    Voltage v_rwl;
    bool bit;
    ReadStack stack;
};

/// Linearized stand-in for a run of idle rows on one bit-column: current
/// injected into `node` is i0 + g_rbl * (V_node - v_nominal).
struct NetLeak {
    std::size_t node;
    std::size_t bit_column;
    Current i0;
    Conductance g_rbl;
    Voltage v_nominal;
};

struct Network {
    std::vector<NetNode> nodes;
    std::vector<NetResistor> resistors;
    std::vector<NetCell> cells;
    std::vector<NetLeak> leaks;
    std::size_t bit_columns = 0;
    int bits_per_word = kBitsPerWord;
    Voltage v_dd = 0.65;

    std::size_t add_node(bool fixed, Voltage v);
    std::size_t node_count() const { return nodes.size(); }
    std::size_t source_count() const;
};

/// Resistive network for one excitation: an SL node per (row, bit-column)
/// chained by r_sl, an RBL node per (bit-column, row) chained by r_bl, SL
/// sources placed per drive variant and the column termination at row 0.
/// Throws InvalidConfig for SL tapping under Config-A.
Network build_network(const ArrayGeometry& g, const ParasiticSpec& p, const SlDriveVariant& d,
                      const Termination& t, const Excitation& e, const CellGrid& cells,
                      const DeviceParams& device);

struct SolverOptions {
    Current residual_tolerance = 1e-9;
    Voltage step_tolerance = 1e-12;
    int max_iterations = 100;
    Voltage max_step = 0.1;
};

struct OperatingPointSolution {
    std::vector<Voltage> node_voltages;  // indexed like Network::nodes
    std::vector<Current> cell_currents;  // indexed like Network::cells
    ColumnCurrents columns;
    int iterations = 0;
    Current max_residual = 0.0;
    std::vector<Current> residual_history;
};

/// Damped Newton with a sparse LU per iteration.
OperatingPointSolution solve_operating_point(const Network& n, const SolverOptions& opt = {});

/// Same Newton loop with dense Gaussian elimination; refuses networks over 1000 nodes.
OperatingPointSolution dense_oracle_solve(const Network& n, const SolverOptions& opt = {});

/// Largest KCL mismatch over non-source nodes for the given node voltages.
Current kcl_residual(const Network& n, const std::vector<Voltage>& node_voltages);

}  // namespace dpe
