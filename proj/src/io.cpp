#include "dpe/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dpe/error.hpp"

namespace dpe {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

namespace {

struct Header {
    std::size_t rows, cols;
    int bits;
};

Header read_header(std::istream& in) {
    Header h{};
    if (!(in >> h.rows >> h.cols >> h.bits)) throw InvalidInput("matrix file: bad header");
    return h;
}

}  // namespace

void write_matrix(std::ostream& out, const RealMatrix& m) {
    out << fmt::format("{} {} 0\n", m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out << fmt::format("{}{}", m.at(r, c), c + 1 == m.cols ? "\n" : " ");
}

RealMatrix read_matrix(std::istream& in) {
    const Header h = read_header(in);
    if (h.bits != 0) throw InvalidInput("matrix file: expected reals (bits = 0)");
    RealMatrix m(h.rows, h.cols);
    for (auto& v : m.data)
        if (!(in >> v)) throw InvalidInput("matrix file: truncated or non-numeric data");
    return m;
}

void write_weight_levels(std::ostream& out, const WeightMatrix& m) {
    out << fmt::format("{} {} {}\n", m.rows(), m.words(), kBitsPerWord);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.words(); ++c)
            out << fmt::format("{}{}", static_cast<int>(m.at(r, c)), c + 1 == m.words() ? "\n" : " ");
}

WeightMatrix read_weight_levels(std::istream& in) {
    const Header h = read_header(in);
    if (h.bits != kBitsPerWord) throw InvalidInput("matrix file: expected 4-bit levels");
    WeightMatrix m(h.rows, h.cols);
    for (std::size_t r = 0; r < h.rows; ++r)
        for (std::size_t c = 0; c < h.cols; ++c) {
            int v = 0;
            if (!(in >> v)) throw InvalidInput("matrix file: truncated level data");
            m.set(r, c, v);
        }
    return m;
}

void save_network(const std::string& path, const RealNetwork& net) {
    std::ostringstream out;
    out << "layers " << net.layers.size() << "\n";
    for (const auto& l : net.layers) write_matrix(out, l);
    write_text(path, out.str());
}

RealNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open weight file " + path);
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "layers" || n == 0) throw InvalidInput("weight file: expected 'layers N'");
    RealNetwork net;
    for (std::size_t l = 0; l < n; ++l) {
        net.layers.push_back(read_matrix(in));
        const auto& m = net.layers.back();
        if (m.cols < 2 || m.rows == 0) throw InvalidInput("weight file: empty layer");
        if (l > 0 && m.cols != net.layers[l - 1].rows + 1)
            throw InvalidInput(fmt::format("weight file: layer {} does not chain onto layer {}", l, l - 1));
    }
    return net;
}

CsvTable::CsvTable(std::string command, std::uint64_t seed, std::string config_hash, std::vector<std::string> columns)
    : columns_(columns.size()) {
    header_ = fmt::format("# dpe-sim {} seed={} config={}\n", command, seed, config_hash);
    for (std::size_t i = 0; i < columns.size(); ++i) header_ += columns[i] + (i + 1 == columns.size() ? "\n" : ",");
}

CsvTable& CsvTable::row() {
    if (!rows_.empty() && rows_.back().size() != columns_) throw Error("csv: previous row is incomplete");
    rows_.emplace_back();
    return *this;
}

CsvTable& CsvTable::add(double v) {
    rows_.back().push_back(fmt::format("{}", v));
    return *this;
}

CsvTable& CsvTable::add(long long v) {
    rows_.back().push_back(fmt::format("{}", v));
    return *this;
}

CsvTable& CsvTable::add(const std::string& v) {
    if (v.find_first_of(",\"\n") != std::string::npos) throw Error("csv: field needs quoting: " + v);
    rows_.back().push_back(v);
    return *this;
}

std::string CsvTable::str() const {
    std::string s = header_;
    for (const auto& r : rows_) {
        if (r.size() != columns_) throw Error("csv: row has the wrong number of fields");
        for (std::size_t i = 0; i < r.size(); ++i) s += r[i] + (i + 1 == r.size() ? "\n" : ",");
    }
    return s;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dpe
