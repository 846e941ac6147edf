#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netclass/pca.hpp"

namespace netclass {

// Fixed-size grayscale raster of a 2D point cloud. raw_counts holds the
// node count per cell; pixels are counts normalized by the maximum count
// into [0,1]. Row r is the y bin (row 0 at y_min), column c the x bin.
// The G x G shape is independent of the input size, which is what lets
// one trained classifier consume networks of any size.
struct GrayImage {
    std::size_t grid = 0;
    std::vector<double> pixels;            // grid x grid in [0,1]
    std::vector<std::uint32_t> raw_counts; // grid x grid
    struct Bounds {
        double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    } bounds;

    double pixel(std::size_t r, std::size_t c) const { return pixels[r * grid + c]; }
    std::uint32_t count(std::size_t r, std::size_t c) const { return raw_counts[r * grid + c]; }
};

namespace detail {

// Half-open bins [lo, hi); the max side is padded by 1e-9 relative to the
// extent so the extreme point lands in the last bin. A zero-extent axis
// collapses every point to bin 0.
inline std::size_t bin_index(double v, double lo, double extent, std::size_t grid) {
    if (!(extent > 0.0)) return 0;
    double padded = extent * (1.0 + 1e-9);
    auto idx = static_cast<long long>(std::floor((v - lo) / padded * static_cast<double>(grid)));
    return static_cast<std::size_t>(std::clamp<long long>(idx, 0, static_cast<long long>(grid) - 1));
}

}  // namespace detail

// (row, col) cell of a point under the image's bounds; the exact mapping
// rasterize used, re-exposed so activation maps can locate nodes.
inline std::pair<std::size_t, std::size_t> point_cell(const GrayImage::Bounds& b, std::size_t grid,
                                                      double x, double y) {
    return {detail::bin_index(y, b.y_min, b.y_max - b.y_min, grid),
            detail::bin_index(x, b.x_min, b.x_max - b.x_min, grid)};
}

inline GrayImage rasterize(const Points2D& points, std::size_t grid = 48) {
    if (grid < 2) throw std::invalid_argument("rasterize: grid must be >= 2");
    if (points.count < 1) throw std::invalid_argument("rasterize: empty point set");
    if (points.dims < 2) throw std::invalid_argument("rasterize: points must be 2-dimensional");

    GrayImage img;
    img.grid = grid;
    img.bounds.x_min = img.bounds.x_max = points.x(0);
    img.bounds.y_min = img.bounds.y_max = points.y(0);
    for (std::size_t i = 0; i < points.count; ++i) {
        double px = points.x(i), py = points.y(i);
        if (!std::isfinite(px) || !std::isfinite(py))
            throw std::invalid_argument("rasterize: non-finite coordinate at point " + std::to_string(i));
        img.bounds.x_min = std::min(img.bounds.x_min, px);
        img.bounds.x_max = std::max(img.bounds.x_max, px);
        img.bounds.y_min = std::min(img.bounds.y_min, py);
        img.bounds.y_max = std::max(img.bounds.y_max, py);
    }

    img.raw_counts.assign(grid * grid, 0);
    for (std::size_t i = 0; i < points.count; ++i) {
        auto [r, c] = point_cell(img.bounds, grid, points.x(i), points.y(i));
        ++img.raw_counts[r * grid + c];
    }

    std::uint32_t max_count = *std::max_element(img.raw_counts.begin(), img.raw_counts.end());
    img.pixels.assign(grid * grid, 0.0);
    if (max_count > 0)
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = static_cast<double>(img.raw_counts[i]) / static_cast<double>(max_count);
    return img;
}

// PGM export with 8-bit quantization round(255*pixel). P5 (binary) by
// default, P2 (ascii) for eyeballing. The training pipeline consumes the
// real-valued pixels, never this file.
inline void write_pgm(const GrayImage& img, std::ostream& out, bool binary = true) {
    out << (binary ? "P5" : "P2") << '\n' << img.grid << ' ' << img.grid << "\n255\n";
    for (std::size_t r = 0; r < img.grid; ++r) {
        for (std::size_t c = 0; c < img.grid; ++c) {
            auto q = static_cast<int>(std::lround(255.0 * img.pixel(r, c)));
            if (binary) {
                out.put(static_cast<char>(q));
            } else {
                out << q << (c + 1 < img.grid ? ' ' : '\n');
            }
        }
    }
}

inline void write_pgm(const GrayImage& img, const std::string& path, bool binary = true) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write pgm: " + path);
    write_pgm(img, out, binary);
}

}  // namespace netclass
