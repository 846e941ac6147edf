#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "netclass/rng.hpp"

namespace netclass {

using NodeId = std::uint32_t;

struct EdgeRecord {
    NodeId src = 0;
    NodeId dst = 0;
    double weight = 1.0;
};

struct Neighbor {
    NodeId node;
    double weight;
};

// Immutable node/edge structure. Node ids are dense integers in
// [0, node_count). Undirected graphs store each edge once but answer
// adjacency from both endpoints; directed graphs expose out-neighbors.
// No self-loops, no duplicate (src,dst) pairs, weights strictly positive.
// Safe to share across threads once constructed.
class Graph {
public:
    // Validated construction from pre-deduplicated edges. Used by the
    // generators, which guarantee uniqueness themselves.
    static Graph build(std::size_t node_count, bool directed, std::vector<EdgeRecord> edges) {
        if (node_count < 1) throw std::invalid_argument("graph: node_count must be >= 1");
        Graph g;
        g.node_count_ = node_count;
        g.directed_ = directed;
        g.edges_ = std::move(edges);
        for (std::size_t i = 0; i < g.edges_.size(); ++i) {
            const EdgeRecord& e = g.edges_[i];
            if (e.src >= node_count || e.dst >= node_count)
                throw std::invalid_argument("graph: edge " + std::to_string(i) + " references a node id >= node_count");
            if (e.src == e.dst)
                throw std::invalid_argument("graph: edge " + std::to_string(i) + " is a self-loop");
            if (!(e.weight > 0.0))
                throw std::invalid_argument("graph: edge " + std::to_string(i) + " has non-positive weight");
        }
        g.rebuild_adjacency();
        return g;
    }

    // Ingestion path: merges duplicate (src,dst) records by summing their
    // weights, drops self-loops (counted), node_count = 1 + max id.
    static Graph from_edge_list(const std::vector<EdgeRecord>& records, bool directed) {
        if (records.empty()) throw std::invalid_argument("from_edge_list: empty record list");
        std::size_t max_id = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (!(records[i].weight > 0.0))
                throw std::invalid_argument("from_edge_list: record " + std::to_string(i) + " has non-positive weight " +
                                            std::to_string(records[i].weight));
            max_id = std::max<std::size_t>(max_id, std::max(records[i].src, records[i].dst));
        }
        Graph g;
        g.node_count_ = max_id + 1;
        g.directed_ = directed;
        std::unordered_map<std::uint64_t, std::size_t> slot;
        slot.reserve(records.size());
        for (const EdgeRecord& r : records) {
            if (r.src == r.dst) {
                ++g.dropped_self_loops_;
                continue;
            }
            NodeId a = r.src, b = r.dst;
            if (!directed && a > b) std::swap(a, b);  // canonical key for undirected pairs
            std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
            auto [it, inserted] = slot.try_emplace(key, g.edges_.size());
            if (inserted) {
                g.edges_.push_back({a, b, r.weight});
            } else {
                g.edges_[it->second].weight += r.weight;
            }
        }
        g.rebuild_adjacency();
        return g;
    }

    std::size_t node_count() const { return node_count_; }
    bool directed() const { return directed_; }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t dropped_self_loops() const { return dropped_self_loops_; }

    // Out-neighbors when directed, all neighbors when undirected.
    std::span<const Neighbor> neighbors(NodeId v) const {
        if (v >= node_count_) throw std::out_of_range("graph: node id " + std::to_string(v) + " out of range");
        return adjacency_[v];
    }

    std::size_t degree(NodeId v) const { return neighbors(v).size(); }

    const std::vector<EdgeRecord>& edges() const { return edges_; }
    std::vector<EdgeRecord> to_edge_list() const { return edges_; }

private:
    Graph() = default;

    void rebuild_adjacency() {
        adjacency_.assign(node_count_, {});
        for (const EdgeRecord& e : edges_) {
            adjacency_[e.src].push_back({e.dst, e.weight});
            if (!directed_) adjacency_[e.dst].push_back({e.src, e.weight});
        }
    }

    std::size_t node_count_ = 0;
    bool directed_ = false;
    std::vector<EdgeRecord> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::size_t dropped_self_loops_ = 0;
};

struct DegreeStats {
    double mean_degree = 0.0;
    std::size_t max_degree = 0;
    std::map<std::size_t, std::size_t> degree_histogram;
};

// Out-degree statistics for directed graphs, plain degrees otherwise.
// Undirected mean is 2|E|/n by construction.
inline DegreeStats degree_stats(const Graph& g) {
    DegreeStats s;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        std::size_t d = g.degree(v);
        s.max_degree = std::max(s.max_degree, d);
        ++s.degree_histogram[d];
        s.mean_degree += static_cast<double>(d);
    }
    s.mean_degree /= static_cast<double>(g.node_count());
    return s;
}

// Re-weights every edge by log1p, keeping weights strictly positive.
// Sensitivity knob for volume-weighted trade walks.
inline Graph with_log1p_weights(const Graph& g) {
    std::vector<EdgeRecord> edges = g.to_edge_list();
    for (EdgeRecord& e : edges) e.weight = std::log1p(e.weight);
    return Graph::build(g.node_count(), g.directed(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format: one record per line, `src,dst,weight`, weight
// optional (default 1.0), `#` starts a comment, blank lines ignored.
// Endpoints are either all non-negative integers (used as node ids
// directly) or arbitrary labels, which are mapped to dense ids in order
// of first appearance; the mapping is returned alongside the graph.
// ---------------------------------------------------------------------------

struct LoadedGraph {
    Graph graph;
    // Empty when the file used integer ids directly.
    std::vector<std::string> labels;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool is_unsigned_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

struct RawEdgeLine {
    std::string src, dst;
    double weight;
    std::size_t line_no;
};

inline std::vector<RawEdgeLine> scan_edge_lines(std::istream& in, const std::string& origin) {
    std::vector<RawEdgeLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        line = trim(line);
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (fields.size() < 2 || fields.size() > 3)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected `src,dst[,weight]`");
        if (fields[0].empty() || fields[1].empty())
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty endpoint");
        if (fields[0][0] == '-' || fields[1][0] == '-')
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": negative node id");

        double w = 1.0;
        if (fields.size() == 3) {
            try {
                std::size_t used = 0;
                w = std::stod(fields[2], &used);
                if (used != fields[2].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": bad weight `" + fields[2] + "`");
            }
            if (!(w > 0.0))
                throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": weight must be > 0");
        }
        out.push_back({fields[0], fields[1], w, line_no});
    }
    return out;
}

}  // namespace detail

inline LoadedGraph parse_edge_list(std::istream& in, bool directed, const std::string& origin = "<stream>") {
    std::vector<detail::RawEdgeLine> lines = detail::scan_edge_lines(in, origin);
    if (lines.empty()) throw std::runtime_error(origin + ": no edge records");

    bool integer_ids = true;
    for (const auto& l : lines)
        if (!detail::is_unsigned_integer(l.src) || !detail::is_unsigned_integer(l.dst)) {
            integer_ids = false;
            break;
        }

    std::vector<EdgeRecord> records;
    records.reserve(lines.size());
    std::vector<std::string> labels;
    if (integer_ids) {
        for (const auto& l : lines) {
            unsigned long long a = std::stoull(l.src), b = std::stoull(l.dst);
            if (a > 0xFFFFFFFFull || b > 0xFFFFFFFFull)
                throw std::runtime_error(origin + ":" + std::to_string(l.line_no) + ": node id exceeds 32 bits");
            records.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), l.weight});
        }
    } else {
        std::unordered_map<std::string, NodeId> dict;
        auto intern = [&](const std::string& s) {
            auto [it, inserted] = dict.try_emplace(s, static_cast<NodeId>(labels.size()));
            if (inserted) labels.push_back(s);
            return it->second;
        };
        for (const auto& l : lines) records.push_back({intern(l.src), intern(l.dst), l.weight});
    }
    return {Graph::from_edge_list(records, directed), std::move(labels)};
}

inline LoadedGraph read_edge_list(const std::string& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    return parse_edge_list(in, directed, path);
}

inline void write_edge_list(const Graph& g, std::ostream& out) {
    char buf[64];
    for (const EdgeRecord& e : g.edges()) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
        out << e.src << ',' << e.dst << ',' << buf << '\n';
    }
}

inline void write_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    write_edge_list(g, out);
}

}  // namespace netclass
