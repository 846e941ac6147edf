#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace netclass {

// Dense row-major value container; shape bookkeeping only, the layers own
// all indexing arithmetic.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(element_count(shape), 0.0);
    }

    static std::size_t element_count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return data.size(); }

    void check_same_shape(const Tensor& other) const {
        if (shape != other.shape) throw std::invalid_argument("tensor: shape mismatch");
    }

    void add_scaled(const Tensor& other, double s) {
        check_same_shape(other);
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += s * other.data[i];
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

}  // namespace netclass
