#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace netclass {

// Text matrix format shared by embedding and points dumps:
// header line `rows cols`, then one row of %.17g values per line.
inline void write_matrix(std::ostream& out, std::size_t rows, std::size_t cols, const double* data) {
    out << rows << ' ' << cols << '\n';
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", data[r * cols + c]);
            if (c) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

struct MatrixData {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // row-major
};

inline MatrixData read_matrix(std::istream& in, const std::string& origin = "<stream>") {
    MatrixData m;
    if (!(in >> m.rows >> m.cols)) throw std::runtime_error(origin + ": bad matrix header");
    m.data.resize(m.rows * m.cols);
    for (double& v : m.data)
        if (!(in >> v)) throw std::runtime_error(origin + ": truncated matrix body");
    return m;
}

inline void write_matrix(const std::string& path, std::size_t rows, std::size_t cols, const double* data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix: " + path);
    write_matrix(out, rows, cols, data);
}

inline MatrixData read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix: " + path);
    return read_matrix(in, path);
}

}  // namespace netclass
