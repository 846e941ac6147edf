#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "netclass/sgns.hpp"

namespace netclass {

// Centered low-dimensional node coordinates. Column means are zero by
// construction; eigenvalues of the sample covariance (all of them,
// descending) ride along for variance accounting.
struct Points2D {
    std::size_t count = 0;
    std::size_t dims = 0;
    std::vector<double> coords;  // count x dims, row-major
    std::vector<double> eigenvalues;

    double at(std::size_t i, std::size_t d) const { return coords[i * dims + d]; }
    double x(std::size_t i) const { return at(i, 0); }
    double y(std::size_t i) const { return at(i, 1); }
};

namespace detail {

// Sign convention making eigenvectors reproducible: the entry of largest
// magnitude (lowest index on ties) is made positive.
inline void fix_sign(Eigen::VectorXd& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < static_cast<std::size_t>(v.size()); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0.0) v = -v;
}

}  // namespace detail

// Projects the center vectors onto the out_dim leading eigenvectors of
// their sample covariance (double precision throughout). Rows are centered
// first, so output column means are zero. Directions whose eigenvalue is
// not positive (relative to the leading one) are zero-filled with a
// warning rather than projected onto noise.
inline Points2D pca_project(const EmbeddingMatrix& emb, std::size_t out_dim = 2) {
    const std::size_t n = emb.node_count, d = emb.dim;
    if (out_dim < 1 || out_dim > d) throw std::invalid_argument("pca_project: out_dim must be in [1, dim]");
    if (n < out_dim) throw std::invalid_argument("pca_project: need at least out_dim rows");

    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(emb.vectors[i * d + j]);

    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    Eigen::MatrixXd cov = (x.transpose() * x) / denom;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca_project: eigendecomposition failed");

    // Eigen reports ascending eigenvalues; flip to descending.
    Points2D out;
    out.count = n;
    out.dims = out_dim;
    out.coords.assign(n * out_dim, 0.0);
    out.eigenvalues.resize(d);
    for (std::size_t j = 0; j < d; ++j) out.eigenvalues[j] = solver.eigenvalues()(d - 1 - j);

    const double leading = out.eigenvalues[0];
    const double positive_floor = leading > 0.0 ? leading * 1e-12 : 0.0;
    std::size_t usable = 0;
    while (usable < out_dim && out.eigenvalues[usable] > positive_floor) ++usable;
    if (usable < out_dim)
        std::cerr << "pca_project: covariance has only " << usable << " positive direction(s); zero-filling "
                  << (out_dim - usable) << " column(s)\n";

    for (std::size_t j = 0; j < usable; ++j) {
        Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - j);
        detail::fix_sign(v);
        Eigen::VectorXd proj = x * v;
        for (std::size_t i = 0; i < n; ++i) out.coords[i * out_dim + j] = proj(i);
    }
    return out;
}

}  // namespace netclass
