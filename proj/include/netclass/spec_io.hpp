#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "netclass/dataset.hpp"

namespace netclass {

// Versioned key=value experiment spec, the on-disk mirror of
// ExperimentSpec. `class.<label>=ba,count=C,n=N,m=M` or
// `class.<label>=ws,count=C,n=N,k=K,p=P` define the classes; labels must
// be 0..classes-1. Unknown keys are rejected.
inline constexpr int kSpecVersion = 1;

namespace detail {

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("spec: bad value for " + what + ": `" + s + "`");
    }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("spec: bad value for " + what + ": `" + s + "`");
    }
}

inline bool parse_bool01(const std::string& s, const std::string& what) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw std::runtime_error("spec: " + what + " must be 0 or 1");
}

inline ClassSpec parse_class_spec(const std::string& value, const std::string& what) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(trim(part));
    if (parts.empty()) throw std::runtime_error("spec: empty class definition for " + what);

    ClassSpec cls;
    std::string model = parts[0];
    BaParams ba;
    WsParams ws;
    bool have_count = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw std::runtime_error("spec: bad class field `" + parts[i] + "` in " + what);
        std::string k = parts[i].substr(0, eq), v = parts[i].substr(eq + 1);
        if (k == "count") {
            cls.count = parse_u64(v, what + ".count");
            have_count = true;
        } else if (k == "n") {
            ba.n = ws.n = parse_u64(v, what + ".n");
        } else if (k == "m") {
            ba.m = parse_u64(v, what + ".m");
        } else if (k == "k") {
            ws.k = parse_u64(v, what + ".k");
        } else if (k == "p") {
            ws.p = parse_double(v, what + ".p");
        } else {
            throw std::runtime_error("spec: unknown class field `" + k + "` in " + what);
        }
    }
    if (!have_count) throw std::runtime_error("spec: " + what + " missing count");
    if (model == "ba") cls.params = ba;
    else if (model == "ws") cls.params = ws;
    else throw std::runtime_error("spec: unknown model `" + model + "` in " + what);
    return cls;
}

}  // namespace detail

inline ExperimentSpec read_spec(std::istream& in, const std::string& origin = "<stream>") {
    ExperimentSpec spec;
    std::vector<std::pair<std::size_t, ClassSpec>> classes;
    bool saw_version = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));

        if (key == "version") {
            if (detail::parse_u64(value, key) != static_cast<std::uint64_t>(kSpecVersion))
                throw std::runtime_error(origin + ": unsupported spec version " + value);
            saw_version = true;
        } else if (key == "seed") spec.master_seed = detail::parse_u64(value, key);
        else if (key == "threads") spec.threads = detail::parse_u64(value, key);
        else if (key == "retain_graphs") spec.retain_graphs = detail::parse_bool01(value, key);
        else if (key == "split") {
            std::stringstream ss(value);
            std::string part;
            std::vector<double> parts;
            while (std::getline(ss, part, ',')) parts.push_back(detail::parse_double(detail::trim(part), key));
            if (parts.size() != 3) throw std::runtime_error(origin + ": split needs 3 comma-separated fractions");
            spec.split = {parts[0], parts[1], parts[2]};
        } else if (key == "walks") spec.pipeline.walk.num_walks = detail::parse_u64(value, key);
        else if (key == "walk_length") spec.pipeline.walk.walk_length = detail::parse_u64(value, key);
        else if (key == "dim") spec.pipeline.sgns.dim = detail::parse_u64(value, key);
        else if (key == "window") spec.pipeline.sgns.window = detail::parse_u64(value, key);
        else if (key == "negatives") spec.pipeline.sgns.negatives = detail::parse_u64(value, key);
        else if (key == "sgns_epochs") spec.pipeline.sgns.epochs = detail::parse_u64(value, key);
        else if (key == "lr_start") spec.pipeline.sgns.lr_start = detail::parse_double(value, key);
        else if (key == "lr_end") spec.pipeline.sgns.lr_end = detail::parse_double(value, key);
        else if (key == "noise_exponent") spec.pipeline.sgns.noise_exponent = detail::parse_double(value, key);
        else if (key == "grid") spec.pipeline.grid = detail::parse_u64(value, key);
        else if (key == "log_weights") spec.pipeline.log1p_weights = detail::parse_bool01(value, key);
        else if (key == "conv1_filters") spec.cnn.conv1_filters = detail::parse_u64(value, key);
        else if (key == "conv2_filters") spec.cnn.conv2_filters = detail::parse_u64(value, key);
        else if (key == "kernel") spec.cnn.kernel = detail::parse_u64(value, key);
        else if (key == "pool") spec.cnn.pool = detail::parse_u64(value, key);
        else if (key == "fc_units") spec.cnn.fc_units = detail::parse_u64(value, key);
        else if (key == "lr") spec.cnn.lr = detail::parse_double(value, key);
        else if (key == "batch") spec.cnn.batch = detail::parse_u64(value, key);
        else if (key == "epochs") spec.cnn.epochs = detail::parse_u64(value, key);
        else if (key == "patience") spec.cnn.patience = detail::parse_u64(value, key);
        else if (key == "activation") spec.cnn.activation = activation_from_string(value);
        else if (key == "cnn_seed") spec.cnn.seed = detail::parse_u64(value, key);
        else if (key.rfind("class.", 0) == 0) {
            std::size_t label = detail::parse_u64(key.substr(6), key);
            classes.emplace_back(label, detail::parse_class_spec(value, key));
        } else {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown key `" + key + "`");
        }
    }
    if (!saw_version) throw std::runtime_error(origin + ": missing version key");
    if (classes.empty()) throw std::runtime_error(origin + ": no class definitions");

    spec.classes.resize(classes.size());
    std::vector<bool> seen(classes.size(), false);
    for (auto& [label, cls] : classes) {
        if (label >= classes.size() || seen[label])
            throw std::runtime_error(origin + ": class labels must be 0.." + std::to_string(classes.size() - 1) +
                                     " without repeats");
        seen[label] = true;
        spec.classes[label] = std::move(cls);
    }
    spec.cnn.classes = spec.classes.size();
    // Derive the classifier seed from the master seed unless pinned.
    if (spec.cnn.seed == 0) spec.cnn.seed = mix64(spec.master_seed, 0xC44);
    return spec;
}

inline ExperimentSpec read_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    return read_spec(in, path);
}

inline void write_spec(const ExperimentSpec& spec, std::ostream& out) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "version=" << kSpecVersion << '\n';
    out << "seed=" << spec.master_seed << '\n';
    out << "threads=" << spec.threads << '\n';
    out << "retain_graphs=" << (spec.retain_graphs ? 1 : 0) << '\n';
    out << "split=" << fmt(spec.split.train) << ',' << fmt(spec.split.val) << ',' << fmt(spec.split.test) << '\n';
    out << "walks=" << spec.pipeline.walk.num_walks << '\n';
    out << "walk_length=" << spec.pipeline.walk.walk_length << '\n';
    out << "dim=" << spec.pipeline.sgns.dim << '\n';
    out << "window=" << spec.pipeline.sgns.window << '\n';
    out << "negatives=" << spec.pipeline.sgns.negatives << '\n';
    out << "sgns_epochs=" << spec.pipeline.sgns.epochs << '\n';
    out << "lr_start=" << fmt(spec.pipeline.sgns.lr_start) << '\n';
    out << "lr_end=" << fmt(spec.pipeline.sgns.lr_end) << '\n';
    out << "noise_exponent=" << fmt(spec.pipeline.sgns.noise_exponent) << '\n';
    out << "grid=" << spec.pipeline.grid << '\n';
    out << "log_weights=" << (spec.pipeline.log1p_weights ? 1 : 0) << '\n';
    out << "conv1_filters=" << spec.cnn.conv1_filters << '\n';
    out << "conv2_filters=" << spec.cnn.conv2_filters << '\n';
    out << "kernel=" << spec.cnn.kernel << '\n';
    out << "pool=" << spec.cnn.pool << '\n';
    out << "fc_units=" << spec.cnn.fc_units << '\n';
    out << "lr=" << fmt(spec.cnn.lr) << '\n';
    out << "batch=" << spec.cnn.batch << '\n';
    out << "epochs=" << spec.cnn.epochs << '\n';
    out << "patience=" << spec.cnn.patience << '\n';
    out << "activation=" << to_string(spec.cnn.activation) << '\n';
    out << "cnn_seed=" << spec.cnn.seed << '\n';
    for (std::size_t c = 0; c < spec.classes.size(); ++c)
        out << "class." << c << '=' << spec.classes[c].model_name() << ",count=" << spec.classes[c].count << ','
            << spec.classes[c].params_string() << '\n';
}

inline void write_spec_file(const ExperimentSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write spec file: " + path);
    write_spec(spec, out);
}

}  // namespace netclass
