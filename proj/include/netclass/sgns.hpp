#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netclass/matrix_io.hpp"
#include "netclass/rng.hpp"
#include "netclass/walk.hpp"

namespace netclass {

struct SgnsConfig {
    std::size_t dim = 20;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr_start = 0.025;
    double lr_end = 1e-4;
    double noise_exponent = 0.75;  // unigram^0.75 noise distribution

    void validate() const {
        if (dim < 2) throw std::invalid_argument("sgns: dim must be >= 2");
        if (window < 1) throw std::invalid_argument("sgns: window must be >= 1");
        if (negatives < 1) throw std::invalid_argument("sgns: negatives must be >= 1");
        if (epochs < 1) throw std::invalid_argument("sgns: epochs must be >= 1");
        if (!(lr_start > lr_end && lr_end > 0.0))
            throw std::invalid_argument("sgns: need lr_start > lr_end > 0");
    }
};

// Center ("input") and context ("output") vectors, one row per node.
// The pipeline consumes the center vectors; contexts are kept for
// inspection and tests.
struct EmbeddingMatrix {
    std::size_t node_count = 0;
    std::size_t dim = 0;
    std::vector<float> vectors;          // node_count x dim, row-major
    std::vector<float> context_vectors;  // node_count x dim, row-major

    std::span<const float> vector_of(NodeId v) const {
        return {vectors.data() + static_cast<std::size_t>(v) * dim, dim};
    }
    std::span<const float> context_of(NodeId v) const {
        return {context_vectors.data() + static_cast<std::size_t>(v) * dim, dim};
    }
};

struct SgnsResult {
    EmbeddingMatrix embedding;
    std::vector<NodeId> zero_visit_nodes;  // never seen in the corpus; rows zeroed
};

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// One SGNS pair step: g = label - sigmoid(u.v), grad_v = g*u, grad_u = g*v.
// These are ascent gradients of the pair objective
//   label*log sigmoid(u.v) + (1-label)*log sigmoid(-u.v).
template <typename T>
void sgns_pair_gradient(std::span<const T> v_w, std::span<const T> u_c, int label,
                        std::span<T> grad_v, std::span<T> grad_u) {
    T dot = T(0);
    for (std::size_t i = 0; i < v_w.size(); ++i) dot += v_w[i] * u_c[i];
    T g = static_cast<T>(label) - sigmoid(dot);
    for (std::size_t i = 0; i < v_w.size(); ++i) {
        grad_v[i] = g * u_c[i];
        grad_u[i] = g * v_w[i];
    }
}

namespace detail {

// Unigram^exponent noise sampler over corpus tokens, cumulative-sum +
// binary search. Nodes absent from the corpus have probability zero.
struct NoiseDistribution {
    NoiseDistribution(const std::vector<std::uint64_t>& counts, double exponent) : cum(counts.size()) {
        double run = 0.0;
        for (std::size_t v = 0; v < counts.size(); ++v) {
            if (counts[v] > 0) run += std::pow(static_cast<double>(counts[v]), exponent);
            cum[v] = run;
        }
        if (!(run > 0.0)) throw std::invalid_argument("sgns: empty corpus, no noise distribution");
    }

    NodeId sample(RngStream& rng) const {
        double r = rng.next_double() * cum.back();
        std::size_t i = std::upper_bound(cum.begin(), cum.end(), r) - cum.begin();
        return static_cast<NodeId>(std::min(i, cum.size() - 1));
    }

    std::vector<double> cum;
};

}  // namespace detail

// Skip-gram with negative sampling over the walk corpus. For every token
// and every offset in [-window, window]\{0} one update is performed:
// the positive (center, context) pair plus `negatives` noise draws, with
// a draw equal to the positive context skipped. Center vectors start
// uniform in [-0.5/dim, 0.5/dim], context vectors at zero; the learning
// rate decays linearly from lr_start to lr_end over all scheduled updates.
// Single-threaded and bit-reproducible for equal (corpus, cfg, rng).
inline SgnsResult train_sgns(const WalkCorpus& corpus, const SgnsConfig& cfg, const RngStream& rng) {
    cfg.validate();
    if (corpus.walks.empty() || corpus.token_count() == 0)
        throw std::invalid_argument("train_sgns: empty corpus");
    const std::size_t n = corpus.source_node_count;
    const std::size_t dim = cfg.dim;

    std::vector<std::uint64_t> counts(n, 0);
    std::size_t total_pairs_per_epoch = 0;
    for (const auto& walk : corpus.walks) {
        const std::size_t len = walk.size();
        for (std::size_t t = 0; t < len; ++t) {
            if (walk[t] >= n) throw std::invalid_argument("train_sgns: token out of range");
            ++counts[walk[t]];
            total_pairs_per_epoch += std::min(t, cfg.window) + std::min(len - 1 - t, cfg.window);
        }
    }
    detail::NoiseDistribution noise(counts, cfg.noise_exponent);

    EmbeddingMatrix emb;
    emb.node_count = n;
    emb.dim = dim;
    emb.vectors.resize(n * dim);
    emb.context_vectors.assign(n * dim, 0.0f);

    RngStream init_rng = rng.substream(0);
    const float half = 0.5f / static_cast<float>(dim);
    for (float& x : emb.vectors) x = static_cast<float>(init_rng.next_uniform(-half, half));

    RngStream train_rng = rng.substream(1);
    const std::uint64_t total_updates =
        static_cast<std::uint64_t>(total_pairs_per_epoch) * cfg.epochs;
    std::uint64_t update_idx = 0;
    std::vector<float> v_acc(dim);

    float* v_data = emb.vectors.data();
    float* u_data = emb.context_vectors.data();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& walk : corpus.walks) {
            const std::size_t len = walk.size();
            for (std::size_t t = 0; t < len; ++t) {
                float* v_w = v_data + static_cast<std::size_t>(walk[t]) * dim;
                const std::size_t lo = t >= cfg.window ? t - cfg.window : 0;
                const std::size_t hi = std::min(len - 1, t + cfg.window);
                for (std::size_t c_pos = lo; c_pos <= hi; ++c_pos) {
                    if (c_pos == t) continue;
                    const NodeId context = walk[c_pos];
                    const double frac =
                        static_cast<double>(update_idx) / static_cast<double>(total_updates);
                    const float lr =
                        static_cast<float>(std::max(cfg.lr_end, cfg.lr_start - (cfg.lr_start - cfg.lr_end) * frac));
                    ++update_idx;

                    std::fill(v_acc.begin(), v_acc.end(), 0.0f);
                    for (std::size_t k = 0; k <= cfg.negatives; ++k) {
                        NodeId target;
                        float label;
                        if (k == 0) {
                            target = context;
                            label = 1.0f;
                        } else {
                            target = noise.sample(train_rng);
                            if (target == context) continue;
                            label = 0.0f;
                        }
                        float* u = u_data + static_cast<std::size_t>(target) * dim;
                        float f = 0.0f;
                        for (std::size_t i = 0; i < dim; ++i) f += v_w[i] * u[i];
                        if (!std::isfinite(f))
                            throw std::runtime_error(
                                "train_sgns: diverged (non-finite score) at update " + std::to_string(update_idx) +
                                ", node " + std::to_string(walk[t]));
                        const float g = (label - sigmoid(f)) * lr;
                        for (std::size_t i = 0; i < dim; ++i) v_acc[i] += g * u[i];
                        for (std::size_t i = 0; i < dim; ++i) u[i] += g * v_w[i];
                    }
                    for (std::size_t i = 0; i < dim; ++i) v_w[i] += v_acc[i];
                }
            }
        }
    }

    SgnsResult result;
    for (NodeId v = 0; v < n; ++v)
        if (counts[v] == 0) {
            result.zero_visit_nodes.push_back(v);
            std::fill_n(emb.vectors.begin() + static_cast<std::size_t>(v) * dim, dim, 0.0f);
            std::fill_n(emb.context_vectors.begin() + static_cast<std::size_t>(v) * dim, dim, 0.0f);
        }
    result.embedding = std::move(emb);
    return result;
}

inline void write_embedding(const EmbeddingMatrix& emb, std::ostream& out) {
    std::vector<double> tmp(emb.vectors.begin(), emb.vectors.end());
    write_matrix(out, emb.node_count, emb.dim, tmp.data());
}

inline void write_embedding(const EmbeddingMatrix& emb, const std::string& path) {
    std::vector<double> tmp(emb.vectors.begin(), emb.vectors.end());
    write_matrix(path, emb.node_count, emb.dim, tmp.data());
}

}  // namespace netclass
