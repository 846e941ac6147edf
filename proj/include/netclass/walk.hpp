#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netclass/graph.hpp"
#include "netclass/rng.hpp"

namespace netclass {

struct WalkConfig {
    std::size_t num_walks = 10000;  // walks per network (total, not per node)
    std::size_t walk_length = 10;   // tokens per walk, counting the start node

    void validate() const {
        if (num_walks < 1) throw std::invalid_argument("walk: num_walks must be >= 1");
        if (walk_length < 2) throw std::invalid_argument("walk: walk_length must be >= 2");
    }
};

struct WalkCorpus {
    std::vector<std::vector<NodeId>> walks;
    std::size_t source_node_count = 0;

    std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto& w : walks) n += w.size();
        return n;
    }
};

// Probabilities over the out-neighbors of `node`, aligned with
// g.neighbors(node) order: proportional to out-edge weights, hence uniform
// on unweighted graphs. Empty for sinks.
inline std::vector<double> transition_distribution(const Graph& g, NodeId node) {
    auto nbrs = g.neighbors(node);  // validates the id
    std::vector<double> probs(nbrs.size());
    double total = 0.0;
    for (const Neighbor& nb : nbrs) total += nb.weight;
    for (std::size_t i = 0; i < nbrs.size(); ++i) probs[i] = nbrs[i].weight / total;
    return probs;
}

namespace detail {

// Per-node cumulative out-weights for O(log deg) sampling per step.
struct CumulativeWeights {
    explicit CumulativeWeights(const Graph& g) : cum(g.node_count()) {
        for (NodeId v = 0; v < g.node_count(); ++v) {
            auto nbrs = g.neighbors(v);
            cum[v].resize(nbrs.size());
            double run = 0.0;
            for (std::size_t i = 0; i < nbrs.size(); ++i) {
                run += nbrs[i].weight;
                cum[v][i] = run;
            }
        }
    }

    // Index into g.neighbors(v), or npos for a sink.
    std::size_t sample(NodeId v, RngStream& rng) const {
        const std::vector<double>& c = cum[v];
        if (c.empty()) return npos;
        double r = rng.next_double() * c.back();
        std::size_t i = std::upper_bound(c.begin(), c.end(), r) - c.begin();
        return std::min(i, c.size() - 1);
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::vector<double>> cum;
};

}  // namespace detail

// Random-walk corpus: cfg.num_walks walks, start nodes uniform with
// replacement, each step drawn from transition_distribution, truncated
// early at sinks. Walk i consumes the substream keyed by i, so the corpus
// is identical no matter how walk generation is scheduled.
inline WalkCorpus generate_corpus(const Graph& g, const WalkConfig& cfg, const RngStream& rng) {
    cfg.validate();
    if (g.node_count() < 2) throw std::invalid_argument("generate_corpus: graph has fewer than 2 nodes");
    if (g.edge_count() == 0) throw std::invalid_argument("generate_corpus: graph has no edges");

    detail::CumulativeWeights cum(g);
    WalkCorpus corpus;
    corpus.source_node_count = g.node_count();
    corpus.walks.resize(cfg.num_walks);

    for (std::size_t w = 0; w < cfg.num_walks; ++w) {
        RngStream stream = rng.substream(w);
        std::vector<NodeId>& walk = corpus.walks[w];
        walk.reserve(cfg.walk_length);
        NodeId cur = static_cast<NodeId>(stream.next_below(g.node_count()));
        walk.push_back(cur);
        while (walk.size() < cfg.walk_length) {
            std::size_t pick = cum.sample(cur, stream);
            if (pick == detail::CumulativeWeights::npos) break;  // sink: truncate
            cur = g.neighbors(cur)[pick].node;
            walk.push_back(cur);
        }
    }
    return corpus;
}

// Debugging artifact: one walk per line, space-separated node ids.
inline void write_corpus(const WalkCorpus& corpus, std::ostream& out) {
    for (const auto& walk : corpus.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i) out << ' ';
            out << walk[i];
        }
        out << '\n';
    }
}

inline void write_corpus(const WalkCorpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus: " + path);
    write_corpus(corpus, out);
}

}  // namespace netclass
