#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace tsc {

/// One affine layer: y = w x + b, with w of shape (outputs x inputs).
struct DenseLayer {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;

    friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
        return a.w.rows() == b.w.rows() && a.w.cols() == b.w.cols() && a.b.size() == b.b.size() &&
               a.w == b.w && a.b == b.b;
    }
};

/// Fully connected network, rectified-linear on hidden layers and identity
/// on the output layer.
struct NetworkParams {
    std::vector<DenseLayer> layers;

    std::vector<int> architecture() const {
        std::vector<int> out;
        if (layers.empty()) return out;
        out.push_back(static_cast<int>(layers.front().w.cols()));
        for (const auto& l : layers) out.push_back(static_cast<int>(l.w.rows()));
        return out;
    }

    int input_size() const { return static_cast<int>(layers.front().w.cols()); }
    int output_size() const { return static_cast<int>(layers.back().w.rows()); }

    bool all_finite() const {
        for (const auto& l : layers)
            if (!l.w.allFinite() || !l.b.allFinite()) return false;
        return true;
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Weights and biases uniform on +-1/sqrt(fan_in).
inline NetworkParams init_network(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("network needs at least input and output sizes");
    Rng rng(seed);
    NetworkParams net;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const int in = sizes[i];
        const int out = sizes[i + 1];
        if (in <= 0 || out <= 0) throw std::invalid_argument("layer sizes must be positive");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (int c = 0; c < in; ++c)
            for (int r = 0; r < out; ++r) l.w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
        for (int r = 0; r < out; ++r) l.b(r) = (2.0 * rng.uniform() - 1.0) * bound;
        net.layers.push_back(std::move(l));
    }
    return net;
}

/// Batched forward pass; `inputs` holds one sample per column.
inline Eigen::MatrixXd forward_batch(const NetworkParams& net, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != net.input_size()) throw std::invalid_argument("input dimension mismatch");
    if (!inputs.allFinite()) throw std::invalid_argument("non-finite network input");
    Eigen::MatrixXd a = inputs;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        Eigen::MatrixXd z = l.w * a;
        z.colwise() += l.b;
        a = i + 1 < net.layers.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
    }
    return a;
}

inline Eigen::VectorXd forward(const NetworkParams& net, std::span<const double> state) {
    const Eigen::Map<const Eigen::VectorXd> x(state.data(), static_cast<Eigen::Index>(state.size()));
    return forward_batch(net, Eigen::MatrixXd(x)).col(0);
}

/// Huber loss on the error y - x with unit threshold.
inline double huber(double x, double y) {
    const double d = y - x;
    return std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
}

/// d huber / d x.
inline double huber_grad(double x, double y) {
    const double d = x - y;
    if (std::abs(d) < 1.0) return d;
    return d > 0.0 ? 1.0 : -1.0;
}

/// B transitions, one sample per column. `elapsed`, when non-empty, holds
/// the number of time steps each transition spans; the discount is then
/// applied once per step (gamma^elapsed) instead of once per transition.
struct Minibatch {
    Eigen::MatrixXd states;
    std::vector<int> actions;
    Eigen::VectorXd rewards;
    Eigen::MatrixXd next_states;
    Eigen::VectorXd elapsed;

    Eigen::Index size() const { return states.cols(); }
};

/// y = R + gamma * Q_target(s', argmax_a Q_online(s', a)). No terminal
/// masking: episodes end by truncation.
inline Eigen::VectorXd td_targets(const NetworkParams& online, const NetworkParams& target, const Minibatch& batch,
                                  double gamma) {
    const Eigen::MatrixXd q_online = forward_batch(online, batch.next_states);
    const Eigen::MatrixXd q_target = forward_batch(target, batch.next_states);
    Eigen::VectorXd y(batch.size());
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        Eigen::Index best = 0;
        q_online.col(j).maxCoeff(&best); // first maximum on ties
        const double discount = batch.elapsed.size() == 0 ? gamma : std::pow(gamma, batch.elapsed(j));
        y(j) = batch.rewards(j) + discount * q_target(best, j);
    }
    return y;
}

struct Gradients {
    std::vector<DenseLayer> layers;
    double loss = 0.0;
};

/// Mean Huber loss of Q(s)[a] against fixed targets, and its gradient.
inline Gradients batch_gradients(const NetworkParams& net, const Minibatch& batch, const Eigen::VectorXd& targets) {
    const Eigen::Index n = batch.size();
    const std::size_t depth = net.layers.size();
    if (targets.size() != n || static_cast<Eigen::Index>(batch.actions.size()) != n)
        throw std::invalid_argument("targets/actions do not match batch size");
    if (!targets.allFinite()) throw std::invalid_argument("non-finite TD target");

    // Forward, keeping each layer's input activation.
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(depth + 1);
    acts.push_back(batch.states);
    for (std::size_t i = 0; i < depth; ++i) {
        Eigen::MatrixXd z = net.layers[i].w * acts.back();
        z.colwise() += net.layers[i].b;
        if (i + 1 < depth) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }

    const Eigen::MatrixXd& q = acts.back();
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), n);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int a = batch.actions[static_cast<std::size_t>(j)];
        loss += huber(q(a, j), targets(j));
        delta(a, j) = huber_grad(q(a, j), targets(j)) * inv_n;
    }

    Gradients g;
    g.loss = loss * inv_n;
    g.layers.resize(depth);
    for (std::size_t k = depth; k-- > 0;) {
        g.layers[k].w = delta * acts[k].transpose();
        g.layers[k].b = delta.rowwise().sum();
        if (k > 0) {
            Eigen::MatrixXd back = net.layers[k].w.transpose() * delta;
            delta = back.cwiseProduct((acts[k].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

struct OptimizerState {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::vector<DenseLayer> velocity;
};

/// Classic momentum: v <- mu v + g; theta <- theta - lr v.
inline void sgd_momentum_step(NetworkParams& net, const Gradients& g, OptimizerState& opt) {
    if (g.layers.size() != net.layers.size()) throw std::invalid_argument("gradient depth mismatch");
    if (opt.velocity.empty()) {
        for (const auto& l : net.layers)
            opt.velocity.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
    }
    if (opt.velocity.size() != net.layers.size()) throw std::invalid_argument("velocity depth mismatch");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& l = net.layers[i];
        auto& v = opt.velocity[i];
        const auto& gi = g.layers[i];
        if (gi.w.rows() != l.w.rows() || gi.w.cols() != l.w.cols() || gi.b.size() != l.b.size() ||
            v.w.rows() != l.w.rows() || v.w.cols() != l.w.cols() || v.b.size() != l.b.size())
            throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(i));
        v.w = opt.momentum * v.w + gi.w;
        v.b = opt.momentum * v.b + gi.b;
        l.w -= opt.learning_rate * v.w;
        l.b -= opt.learning_rate * v.b;
    }
}

/// Deep copy for the target network.
inline NetworkParams copy_into_target(const NetworkParams& online) { return online; }

// -- persistence -------------------------------------------------------------

struct ModelFile {
    NetworkParams params;
    std::uint64_t seed = 0;
    std::string trained_on_pattern;
};

inline nlohmann::json to_json(const ModelFile& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.params.layers) {
        nlohmann::json w = nlohmann::json::array();
        for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < l.w.cols(); ++c) row.push_back(l.w(r, c));
            w.push_back(std::move(row));
        }
        nlohmann::json b = nlohmann::json::array();
        for (Eigen::Index r = 0; r < l.b.size(); ++r) b.push_back(l.b(r));
        layers.push_back({{"w", std::move(w)}, {"b", std::move(b)}});
    }
    return {{"architecture", m.params.architecture()},
            {"activation", "relu"},
            {"layers", std::move(layers)},
            {"seed", m.seed},
            {"trained_on_pattern", m.trained_on_pattern}};
}

/// nlohmann/json emits the shortest representation that parses back to the
/// same double, so a save/load round trip is exact.
inline void save_params(const std::string& path, const ModelFile& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write model file " + path);
    os << to_json(m).dump(1) << '\n';
    if (!os) throw std::runtime_error("failed writing model file " + path);
}

inline ModelFile model_from_json(const nlohmann::json& doc, const std::vector<int>& expected_architecture) {
    ModelFile m;
    try {
        const auto arch = doc.at("architecture").get<std::vector<int>>();
        if (doc.at("activation").get<std::string>() != "relu") throw MalformedModel("unsupported activation");
        const auto& layers = doc.at("layers");
        if (!layers.is_array() || layers.size() + 1 != arch.size())
            throw MalformedModel("layer count does not match architecture");
        if (!expected_architecture.empty() && arch != expected_architecture)
            throw ArchitectureMismatch("model architecture does not match the expected layer sizes");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& w = layers[i].at("w");
            const auto& b = layers[i].at("b");
            const int out = arch[i + 1];
            const int in = arch[i];
            if (!w.is_array() || static_cast<int>(w.size()) != out || !b.is_array() || static_cast<int>(b.size()) != out)
                throw ArchitectureMismatch("layer " + std::to_string(i) + " shape disagrees with architecture");
            DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
            for (int r = 0; r < out; ++r) {
                if (!w[r].is_array() || static_cast<int>(w[r].size()) != in)
                    throw ArchitectureMismatch("layer " + std::to_string(i) + " row width disagrees with architecture");
                for (int c = 0; c < in; ++c) l.w(r, c) = w[r][c].get<double>();
                l.b(r) = b[r].get<double>();
            }
            m.params.layers.push_back(std::move(l));
        }
        m.seed = doc.value("seed", std::uint64_t{0});
        m.trained_on_pattern = doc.value("trained_on_pattern", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw MalformedModel(std::string("malformed model document: ") + e.what());
    }
    if (!m.params.all_finite()) throw MalformedModel("model contains non-finite parameters");
    return m;
}

/// Throws MissingArtifact, MalformedModel or ArchitectureMismatch.
inline ModelFile load_params(const std::string& path, const std::vector<int>& expected_architecture = {}) {
    std::ifstream is(path);
    if (!is) throw MissingArtifact("model file not found: " + path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedModel("malformed model document " + path + ": " + e.what());
    }
    return model_from_json(doc, expected_architecture);
}

} // namespace tsc
