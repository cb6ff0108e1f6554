#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpe/nn.hpp"

namespace dpe {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Text matrix: a "rows cols bits" header (bits = 0 for reals, 4 for weight
/// levels), then one whitespace-separated row per line.
void write_matrix(std::ostream& out, const RealMatrix& m);
RealMatrix read_matrix(std::istream& in);
void write_weight_levels(std::ostream& out, const WeightMatrix& m);
WeightMatrix read_weight_levels(std::istream& in);

/// "layers L" followed by L real matrices, each out x (in + 1).
void save_network(const std::string& path, const RealNetwork& net);
RealNetwork load_network(const std::string& path);

/// CSV with a leading "# dpe-sim <command> seed=<seed> config=<hash>" line
/// and a fixed column header. Doubles are printed in shortest round-trip
/// form so reruns are byte-identical.
class CsvTable {
public:
    CsvTable(std::string command, std::uint64_t seed, std::string config_hash, std::vector<std::string> columns);

    CsvTable& row();
    CsvTable& add(double v);
    CsvTable& add(long long v);
    CsvTable& add(int v) { return add(static_cast<long long>(v)); }
    CsvTable& add(std::size_t v) { return add(static_cast<long long>(v)); }
    CsvTable& add(const std::string& v);
    CsvTable& add(const char* v) { return add(std::string(v)); }

    std::string str() const;
    void write(const std::string& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::string header_;
    std::size_t columns_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace dpe
