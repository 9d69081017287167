#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <vector>

#include "falsify/rl/rng.hpp"

namespace falsify {

// Fully connected network with tanh hidden layers and a linear output layer.
// Backward pass accumulates parameter gradients into a matching Grads struct.
class Mlp {
  public:
    struct Layer {
        std::vector<double> w;  // rows x cols, row-major
        std::vector<double> b;  // rows
        int rows = 0, cols = 0;
    };

    struct Grads {
        std::vector<Layer> layers;
        void zero() {
            for (auto& l : layers) {
                std::fill(l.w.begin(), l.w.end(), 0.0);
                std::fill(l.b.begin(), l.b.end(), 0.0);
            }
        }
    };

    // Caches one forward pass for the matching backward call.
    struct Workspace {
        std::vector<std::vector<double>> act;  // act[0] = input, act[i] = layer i output
        std::vector<std::vector<double>> dx;   // scratch for backward
    };

    Mlp() = default;
    explicit Mlp(const std::vector<int>& sizes) : sizes_(sizes) {
        layers_.resize(sizes.size() - 1);
        for (size_t i = 0; i + 1 < sizes.size(); ++i) {
            layers_[i].rows = sizes[i + 1];
            layers_[i].cols = sizes[i];
            layers_[i].w.assign(static_cast<size_t>(sizes[i + 1]) * sizes[i], 0.0);
            layers_[i].b.assign(sizes[i + 1], 0.0);
        }
    }

    const std::vector<int>& sizes() const { return sizes_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    void init_random(Rng& rng, double final_scale = 0.01) {
        for (size_t i = 0; i < layers_.size(); ++i) {
            auto& l = layers_[i];
            double scale = std::sqrt(1.0 / l.cols);
            if (i + 1 == layers_.size()) scale *= final_scale;
            for (auto& v : l.w) v = rng.uniform(-scale, scale);
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
    }

    Grads make_grads() const {
        Grads g;
        g.layers = layers_;
        g.zero();
        return g;
    }

    const std::vector<double>& forward(const std::vector<double>& input, Workspace& ws) const {
        assert(static_cast<int>(input.size()) == sizes_.front());
        ws.act.resize(layers_.size() + 1);
        ws.act[0] = input;
        for (size_t i = 0; i < layers_.size(); ++i) {
            const Layer& l = layers_[i];
            auto& out = ws.act[i + 1];
            out.assign(l.rows, 0.0);
            const auto& in = ws.act[i];
            for (int r = 0; r < l.rows; ++r) {
                double s = l.b[r];
                const double* wr = &l.w[static_cast<size_t>(r) * l.cols];
                for (int c = 0; c < l.cols; ++c) s += wr[c] * in[c];
                out[r] = (i + 1 < layers_.size()) ? std::tanh(s) : s;
            }
        }
        return ws.act.back();
    }

    // dLdy is the loss gradient w.r.t. the network output of the forward pass
    // cached in ws. Parameter gradients accumulate into g.
    void backward(Workspace& ws, const std::vector<double>& dLdy, Grads& g) const {
        ws.dx.resize(layers_.size() + 1);
        ws.dx[layers_.size()] = dLdy;
        for (size_t i = layers_.size(); i-- > 0;) {
            const Layer& l = layers_[i];
            auto& dout = ws.dx[i + 1];
            // Hidden layers stored post-tanh; fold the activation derivative in.
            if (i + 1 < layers_.size()) {
                for (int r = 0; r < l.rows; ++r) {
                    double t = ws.act[i + 1][r];
                    dout[r] *= 1.0 - t * t;
                }
            }
            auto& din = ws.dx[i];
            din.assign(l.cols, 0.0);
            auto& gl = g.layers[i];
            const auto& in = ws.act[i];
            for (int r = 0; r < l.rows; ++r) {
                double d = dout[r];
                gl.b[r] += d;
                double* gw = &gl.w[static_cast<size_t>(r) * l.cols];
                const double* wr = &l.w[static_cast<size_t>(r) * l.cols];
                for (int c = 0; c < l.cols; ++c) {
                    gw[c] += d * in[c];
                    din[c] += d * wr[c];
                }
            }
        }
    }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& l : layers_) n += l.w.size() + l.b.size();
        return n;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(param_count());
        for (const auto& l : layers_) {
            out.insert(out.end(), l.w.begin(), l.w.end());
            out.insert(out.end(), l.b.begin(), l.b.end());
        }
        return out;
    }

    void unflatten(const std::vector<double>& flat) {
        size_t k = 0;
        for (auto& l : layers_) {
            std::copy_n(flat.begin() + k, l.w.size(), l.w.begin());
            k += l.w.size();
            std::copy_n(flat.begin() + k, l.b.size(), l.b.begin());
            k += l.b.size();
        }
    }

  private:
    std::vector<int> sizes_;
    std::vector<Layer> layers_;
};

inline std::vector<double> flatten_grads(const Mlp::Grads& g) {
    std::vector<double> out;
    for (const auto& l : g.layers) {
        out.insert(out.end(), l.w.begin(), l.w.end());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
    return out;
}

// Adam with decoupled state per parameter vector.
class AdamOptimizer {
  public:
    AdamOptimizer(size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grads) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
            params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
        }
    }

    void save(std::ostream& os) const {
        os << t_ << "\n";
        os.precision(17);
        for (double x : m_) os << x << " ";
        os << "\n";
        for (double x : v_) os << x << " ";
        os << "\n";
    }
    void load(std::istream& is) {
        is >> t_;
        for (double& x : m_) is >> x;
        for (double& x : v_) is >> x;
    }

  private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace falsify
