#include "dpe/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "dpe/error.hpp"

namespace dpe {

void ParasiticSpec::validate() const {
    if (!(r_bl_per_cell >= 0.0) || !(r_sl_per_cell >= 0.0)) throw InvalidInput("line resistances must be >= 0");
}

Voltage termination_voltage(const Termination& t) {
    return std::visit(
        [](const auto& term) -> Voltage {
            if constexpr (std::is_same_v<std::decay_t<decltype(term)>, IdealOpamp>)
                return term.v_pos;
            else
                return term.v_ref;
        },
        t);
}

std::string describe(const SlDriveVariant& v) {
    if (std::holds_alternative<SingleEnd>(v)) return "single_end";
    if (std::holds_alternative<BothEnds>(v)) return "both_ends";
    return fmt::format("tapped_{}", std::get<TappedEvery>(v).k);
}

std::string describe(const Termination& t) {
    if (const auto* s = std::get_if<SenseResistor>(&t)) return fmt::format("sense_{}ohm", s->r);
    return fmt::format("opamp_{}V", std::get<IdealOpamp>(t).v_pos);
}

std::size_t Network::add_node(bool fixed, Voltage v) {
    nodes.push_back({fixed, v});
    return nodes.size() - 1;
}

std::size_t Network::source_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const NetNode& n) { return n.fixed; }));
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {

void wire_sl_row(Network& net, const std::vector<std::size_t>& sl, Voltage v_drive, Resistance r,
                 const SlDriveVariant& variant) {
    const std::size_t n = sl.size();
    auto chain = [&](std::size_t from, std::size_t to) {
        for (std::size_t c = from; c + 1 < to; ++c) net.resistors.push_back({sl[c], sl[c + 1], r});
    };
    if (const auto* tap = std::get_if<TappedEvery>(&variant)) {
        for (std::size_t start = 0; start < n; start += tap->k) {
            const std::size_t end = std::min(start + tap->k, n);
            if (start == 0) net.resistors.push_back({net.add_node(true, v_drive), sl[0], r});
            // The tap at `end` also feeds the first cell of the next segment.
            const std::size_t right = net.add_node(true, v_drive);
            net.resistors.push_back({sl[end - 1], right, r});
            if (end < n) net.resistors.push_back({right, sl[end], r});
            chain(start, end);
        }
        return;
    }
    net.resistors.push_back({net.add_node(true, v_drive), sl[0], r});
    if (std::holds_alternative<BothEnds>(variant)) net.resistors.push_back({sl[n - 1], net.add_node(true, v_drive), r});
    chain(0, n);
}

}  // namespace

Network build_network(const ArrayGeometry& g, const ParasiticSpec& p, const SlDriveVariant& d,
                      const Termination& t, const Excitation& e, const CellGrid& cells,
                      const DeviceParams& device) {
    g.validate();
    p.validate();
    device.validate();
    if (const auto* tap = std::get_if<TappedEvery>(&d)) {
        if (e.mode == DriveMode::ConfigA)
            throw InvalidConfig("SL tapping is infeasible under Config-A: the SL carries the inputs");
        if (tap->k == 0) throw InvalidConfig("tap spacing must be positive");
    }
    if (const auto* s = std::get_if<SenseResistor>(&t); s && !(s->r > 0.0))
        throw InvalidConfig("sense resistance must be positive");
    if (const auto* o = std::get_if<IdealOpamp>(&t); o && !(o->v_pos >= 0.0 && o->v_pos < e.v_dd))
        throw InvalidConfig("opamp v_pos must lie in [0, v_dd)");
    if (cells.rows() != g.rows || cells.bit_columns() != g.bit_columns())
        throw InvalidInput("cell grid does not match geometry");

    const Voltage v_term = termination_voltage(t);
    const auto drives = row_drives(e, g, v_term);
    const auto active = g.active_mask();
    const std::size_t cols = g.bit_columns();

    Network net;
    net.bit_columns = cols;
    net.bits_per_word = g.bits_per_word;
    net.v_dd = e.v_dd;

    std::vector<std::size_t> term(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        if (const auto* s = std::get_if<SenseResistor>(&t)) {
            term[c] = net.add_node(false, s->v_ref);
            net.resistors.push_back({term[c], net.add_node(true, s->v_ref), s->r});
        } else {
            term[c] = net.add_node(true, v_term);
        }
    }

    auto modeled = [&](std::size_t r) { return active[r] || !p.lumped_inactive; };

    // SL and RBL nodes of every modeled row; rbl[r] is empty for lumped rows.
    std::vector<std::vector<std::size_t>> rbl(g.rows);
    for (std::size_t r = 0; r < g.rows; ++r) {
        if (!modeled(r)) continue;
        std::vector<std::size_t> sl(cols);
        rbl[r].resize(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            sl[c] = net.add_node(false, drives[r].v_sl);
            rbl[r][c] = net.add_node(false, v_term);
        }
        wire_sl_row(net, sl, drives[r].v_sl, p.r_sl_per_cell, d);
        for (std::size_t c = 0; c < cols; ++c) {
            const Cell& cell = cells.at(r, c);
            net.cells.push_back({sl[c], rbl[r][c], r, c, drives[r].v_rwl, cell.bit, cell_stack(cell, device, e.v_dd)});
        }
    }

    // Bit-lines run from the termination at row 0 upward. A run of lumped
    // idle rows becomes one node behind their series segments, carrying the
    // rows' linearized leakage.
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t prev = term[c];
        std::vector<std::size_t> run;
        auto flush = [&] {
            if (run.empty()) return;
            const std::size_t lump = net.add_node(false, v_term);
            net.resistors.push_back({prev, lump, p.r_bl_per_cell * static_cast<double>(run.size())});
            NetLeak leak{lump, c, 0.0, 0.0, v_term};
            for (auto r : run) {
                const Cell& cell = cells.at(r, c);
                const StackBias bias{drives[r].v_sl, v_term, drives[r].v_rwl, cell.bit};
                const auto lin = linearize_stack(cell_stack(cell, device, e.v_dd), bias);
                leak.i0 += lin.current;
                leak.g_rbl += lin.g.d_rbl;
            }
            net.leaks.push_back(leak);
            prev = lump;
            run.clear();
        };
        for (std::size_t r = 0; r < g.rows; ++r) {
            if (!modeled(r)) {
                run.push_back(r);
                continue;
            }
            flush();
            net.resistors.push_back({prev, rbl[r][c], p.r_bl_per_cell});
            prev = rbl[r][c];
        }
        flush();
    }
    return net;
}

// ---------------------------------------------------------------------------
// Solving
// ---------------------------------------------------------------------------

namespace {

struct Triplet {
    long row;
    long col;
    double value;
};

/// Node classes after collapsing zero-ohm resistors; unknown index or -1.
struct Reduction {
    std::vector<std::size_t> node_class;
    std::vector<long> unknown;       // per class
    std::vector<Voltage> class_v;    // fixed value or initial guess, per class
    std::size_t unknowns = 0;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

Reduction reduce(const Network& n) {
    const std::size_t count = n.nodes.size();
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (const auto& r : n.resistors) {
        if (r.r != 0.0) continue;
        const auto a = find_root(parent, r.a);
        const auto b = find_root(parent, r.b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    Reduction red;
    red.node_class.resize(count);
    std::vector<long> class_of_root(count, -1);
    std::vector<bool> class_fixed;
    for (std::size_t i = 0; i < count; ++i) {
        const auto root = find_root(parent, i);
        if (class_of_root[root] < 0) {
            class_of_root[root] = static_cast<long>(red.class_v.size());
            red.class_v.push_back(n.nodes[root].voltage);
            class_fixed.push_back(false);
        }
        const auto k = static_cast<std::size_t>(class_of_root[root]);
        red.node_class[i] = k;
        if (n.nodes[i].fixed) {
            if (class_fixed[k] && red.class_v[k] != n.nodes[i].voltage)
                throw TopologyError("two sources at different voltages are shorted together");
            class_fixed[k] = true;
            red.class_v[k] = n.nodes[i].voltage;
        }
    }
    red.unknown.assign(red.class_v.size(), -1);
    for (std::size_t k = 0; k < red.class_v.size(); ++k)
        if (!class_fixed[k]) red.unknown[k] = static_cast<long>(red.unknowns++);
    return red;
}

class Evaluator {
public:
    Evaluator(const Network& n, const Reduction& red) : net_(n), red_(red) {}

    Voltage node_v(std::size_t node, const std::vector<double>& x) const {
        const auto k = red_.node_class[node];
        const long u = red_.unknown[k];
        return u < 0 ? red_.class_v[k] : x[static_cast<std::size_t>(u)];
    }

    /// Current leaving each unknown, plus every cell current.
    void residual(const std::vector<double>& x, std::vector<double>& f, std::vector<Current>& cell_currents) const {
        f.assign(red_.unknowns, 0.0);
        auto add_f = [&](long u, double v) {
            if (u >= 0) f[static_cast<std::size_t>(u)] += v;
        };
        for (const auto& res : net_.resistors) {
            if (res.r == 0.0 || red_.node_class[res.a] == red_.node_class[res.b]) continue;
            const double i = (node_v(res.a, x) - node_v(res.b, x)) / res.r;
            add_f(unk(res.a), i);
            add_f(unk(res.b), -i);
        }
        cell_currents.resize(net_.cells.size());
        for (std::size_t idx = 0; idx < net_.cells.size(); ++idx) {
            const auto& cell = net_.cells[idx];
            const Current i = stack_current(cell.stack, bias_of(cell, x));
            cell_currents[idx] = i;
            add_f(unk(cell.sl), i);
            add_f(unk(cell.rbl), -i);
        }
        for (const auto& leak : net_.leaks)
            add_f(unk(leak.node), -(leak.i0 + leak.g_rbl * (node_v(leak.node, x) - leak.v_nominal)));
    }

    /// d(residual)/dx, with each stack linearized by central differences.
    void jacobian(const std::vector<double>& x, std::vector<Triplet>& jac) const {
        jac.clear();
        auto add_j = [&](long r, long c, double v) {
            if (r >= 0 && c >= 0) jac.push_back({r, c, v});
        };
        for (const auto& res : net_.resistors) {
            if (res.r == 0.0 || red_.node_class[res.a] == red_.node_class[res.b]) continue;
            const long a = unk(res.a), b = unk(res.b);
            const double g = 1.0 / res.r;
            add_j(a, a, g);
            add_j(a, b, -g);
            add_j(b, a, -g);
            add_j(b, b, g);
        }
        for (const auto& cell : net_.cells) {
            const long s = unk(cell.sl), r = unk(cell.rbl);
            if (s < 0 && r < 0) continue;
            const auto g = stack_small_signal(cell.stack, bias_of(cell, x));
            add_j(s, s, g.d_sl);
            add_j(s, r, g.d_rbl);
            add_j(r, s, -g.d_sl);
            add_j(r, r, -g.d_rbl);
        }
        for (const auto& leak : net_.leaks) {
            const long u = unk(leak.node);
            add_j(u, u, -leak.g_rbl);
        }
    }

private:
    long unk(std::size_t node) const { return red_.unknown[red_.node_class[node]]; }
    StackBias bias_of(const NetCell& cell, const std::vector<double>& x) const {
        return {node_v(cell.sl, x), node_v(cell.rbl, x), cell.v_rwl, cell.bit};
    }

    const Network& net_;
    const Reduction& red_;
};

using LinearSolve = std::vector<double> (*)(std::size_t, const std::vector<Triplet>&, const std::vector<double>&);

std::vector<double> sparse_solve(std::size_t n, const std::vector<Triplet>& jac, const std::vector<double>& rhs) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(jac.size());
    for (const auto& t : jac) trips.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw TopologyError("singular nodal system (floating node?)");
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw TopologyError("singular nodal system (floating node?)");
    return {x.data(), x.data() + x.size()};
}

// Partial-pivot Gaussian elimination on the assembled dense matrix.
std::vector<double> dense_solve(std::size_t n, const std::vector<Triplet>& jac, const std::vector<double>& rhs) {
    std::vector<double> a(n * n, 0.0);
    for (const auto& t : jac) a[static_cast<std::size_t>(t.row) * n + static_cast<std::size_t>(t.col)] += t.value;
    std::vector<double> b = rhs;
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (!(std::abs(a[piv * n + k]) > 1e-14 * scale)) throw TopologyError("singular nodal system (floating node?)");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a[i * n + k] / a[k * n + k];
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * x[j];
        x[k] = s / a[k * n + k];
    }
    return x;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

OperatingPointSolution newton(const Network& n, const SolverOptions& opt, LinearSolve linear) {
    const Reduction red = reduce(n);
    const Evaluator ev(n, red);

    std::vector<double> x(red.unknowns);
    for (std::size_t k = 0; k < red.class_v.size(); ++k)
        if (red.unknown[k] >= 0) x[static_cast<std::size_t>(red.unknown[k])] = red.class_v[k];

    std::vector<double> f;
    std::vector<Triplet> jac;
    std::vector<Current> cell_i;
    ev.residual(x, f, cell_i);

    OperatingPointSolution sol;
    double res = max_abs(f);
    sol.residual_history.push_back(res);

    bool converged = red.unknowns == 0;
    if (!converged) ev.jacobian(x, jac);
    std::vector<double> xt, ft;
    std::vector<Current> cell_t;
    for (int it = 1; !converged && it <= opt.max_iterations; ++it) {
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        const auto delta = linear(red.unknowns, jac, rhs);
        const double limit = std::min(1.0, opt.max_step / std::max(max_abs(delta), 1e-300));

        double lambda = 1.0;  // halved while the residual grows
        double rt = 0.0;
        for (;;) {
            xt = x;
            for (std::size_t i = 0; i < x.size(); ++i) xt[i] += lambda * limit * delta[i];
            ev.residual(xt, ft, cell_t);
            rt = max_abs(ft);
            if (rt <= res || lambda < 1e-6) break;
            lambda *= 0.5;
        }
        const double step = lambda * limit * max_abs(delta);
        std::swap(x, xt);
        std::swap(f, ft);
        std::swap(cell_i, cell_t);
        res = rt;
        sol.residual_history.push_back(res);
        sol.iterations = it;
        converged = res <= opt.residual_tolerance && step <= opt.step_tolerance;
        if (!converged) ev.jacobian(x, jac);
    }
    if (!converged)
        throw SolverError(fmt::format("Newton did not converge in {} iterations (residual {:.3e} A)",
                                      opt.max_iterations, res),
                          sol.residual_history);

    sol.max_residual = res;
    sol.node_voltages.resize(n.nodes.size());
    for (std::size_t i = 0; i < n.nodes.size(); ++i) sol.node_voltages[i] = ev.node_v(i, x);
    sol.cell_currents = cell_i;

    std::vector<Current> bit_columns(n.bit_columns, 0.0);
    for (std::size_t i = 0; i < n.cells.size(); ++i) bit_columns[n.cells[i].bit_column] += cell_i[i];
    for (const auto& leak : n.leaks)
        bit_columns[leak.bit_column] += leak.i0 + leak.g_rbl * (sol.node_voltages[leak.node] - leak.v_nominal);
    sol.columns = ColumnCurrents::from_bit_columns(std::move(bit_columns), n.bits_per_word);
    return sol;
}

}  // namespace

OperatingPointSolution solve_operating_point(const Network& n, const SolverOptions& opt) {
    return newton(n, opt, &sparse_solve);
}

OperatingPointSolution dense_oracle_solve(const Network& n, const SolverOptions& opt) {
    if (n.node_count() > 1000)
        throw InvalidInput(fmt::format("dense oracle limited to 1000 nodes, network has {}", n.node_count()));
    return newton(n, opt, &dense_solve);
}

Current kcl_residual(const Network& n, const std::vector<Voltage>& node_voltages) {
    if (node_voltages.size() != n.nodes.size()) throw InvalidInput("voltage vector does not match network");
    Reduction red = reduce(n);
    std::vector<double> x(red.unknowns);
    for (std::size_t i = 0; i < n.nodes.size(); ++i) {
        const long u = red.unknown[red.node_class[i]];
        if (u >= 0) x[static_cast<std::size_t>(u)] = node_voltages[i];
    }
    std::vector<double> f;
    std::vector<Current> cells;
    Evaluator(n, red).residual(x, f, cells);
    return max_abs(f);
}

}  // namespace dpe
