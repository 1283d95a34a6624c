// Central finite-difference check of loss_and_gradients on the small
// n=30, d=8, K=2, z=4 instance.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lsgnn/model.hpp"
#include "oracle.hpp"

namespace gradcheck {

struct Result {
    double worst_rel = 0.0;
    std::string worst_name;
    std::size_t coords = 0;
};

// Relative error with a small floor in the denominator so that coordinates
// whose true gradient is ~0 are judged on absolute error instead.
inline double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

inline Result run(std::uint64_t seed, lsgnn::WeightMode wm = lsgnn::WeightMode::node_level,
                  lsgnn::LocalSimMode lm = lsgnn::LocalSimMode::refined, double h = 1e-5) {
    using namespace lsgnn;
    std::mt19937_64 rng(seed);
    const std::size_t n = 30;
    auto g = build_graph(oracle::random_edges(n, 60, rng), n);
    auto x = oracle::random_matrix(n, 8, rng);
    PropagationConfig pc;
    pc.K = 2;
    auto stack = precompute_bundle(g, x, pc);

    ModelConfig mc;
    mc.K = 2;
    mc.d = 8;
    mc.z = 4;
    mc.C = 3;
    mc.h_ls = 4;
    mc.h_alpha = 4;
    mc.dropout = 0.0;
    mc.weight_mode = wm;
    mc.localsim_mode = lm;
    auto in = prepare_inputs(g, x, stack, mc);

    Labels y(n);
    Mask mask(n, 0);
    std::uniform_int_distribution<int> cls(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = cls(rng);
        mask[i] = i % 3 != 0;
    }
    auto params = ModelParameters::init_uniform(mc, rng);
    const double wd = 1e-3;
    const auto lg = loss_and_gradients(params, mc, in, y, mask, wd);

    Result r;
    auto pt = params.tensors();
    auto gt = lg.grads.tensors();
    const auto names = ModelParameters::tensor_names(mc);
    for (std::size_t t = 0; t < pt.size(); ++t) {
        for (std::size_t i = 0; i < pt[t]->size(); ++i) {
            double& v = pt[t]->data()[i];
            const double orig = v;
            v = orig + h;
            const double lp = loss_and_gradients(params, mc, in, y, mask, wd).loss;
            v = orig - h;
            const double lm2 = loss_and_gradients(params, mc, in, y, mask, wd).loss;
            v = orig;
            const double e = rel_error(gt[t]->data()[i], (lp - lm2) / (2 * h));
            ++r.coords;
            if (e > r.worst_rel) {
                r.worst_rel = e;
                r.worst_name = names[t] + "[" + std::to_string(i) + "]";
            }
        }
    }
    return r;
}

} // namespace gradcheck
