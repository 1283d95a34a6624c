#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "lsgnn/error.hpp"
#include "lsgnn/model.hpp"
#include "oracle.hpp"

using namespace lsgnn;
using oracle::Dense;

namespace {

struct Instance {
    SparseGraph g;
    Matrix x;
    PropagationStack stack;
    ModelConfig cfg;
    Labels y;
};

Instance make_instance(std::uint64_t seed, WeightMode wm, LocalSimMode lm, std::size_t n = 24) {
    std::mt19937_64 rng(seed);
    Instance in;
    in.g = build_graph(oracle::random_edges(n, 2 * n, rng), n);
    in.x = oracle::random_matrix(n, 5, rng);
    PropagationConfig pc;
    pc.K = 3;
    in.stack = precompute_bundle(in.g, in.x, pc);
    in.cfg.K = 3;
    in.cfg.d = 5;
    in.cfg.z = 6;
    in.cfg.C = 3;
    in.cfg.h_ls = 5;
    in.cfg.h_alpha = 7;
    in.cfg.weight_mode = wm;
    in.cfg.localsim_mode = lm;
    in.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) in.y[i] = static_cast<std::int32_t>(i % 3);
    return in;
}

Dense relu(Dense m) {
    for (auto& r : m)
        for (double& v : r) v = std::max(v, 0.0);
    return m;
}

Dense perceptron(const Perceptron& p, const Dense& in) {
    auto add_bias = [](Dense m, const Matrix& b) {
        for (auto& r : m)
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += b(0, j);
        return m;
    };
    Dense h = relu(add_bias(oracle::mul(in, oracle::from(p.w1)), p.b1));
    return add_bias(oracle::mul(h, oracle::from(p.w2)), p.b2);
}

// Logits recomputed from scratch with dense loops.
Dense reference_logits(const ModelParameters& p, const Instance& in) {
    const std::size_t n = in.x.rows(), z = in.cfg.z, K = in.cfg.K;
    Dense hi = relu(oracle::mul(oracle::from(in.x), oracle::from(p.w_identity)));
    std::vector<Dense> hl, hh;
    for (std::size_t k = 0; k < K; ++k) {
        hl.push_back(relu(oracle::mul(oracle::from(in.stack.low_layers[k]), oracle::from(p.w_low[k]))));
        hh.push_back(relu(oracle::mul(oracle::from(in.stack.high_layers[k]), oracle::from(p.w_high[k]))));
    }
    Dense alpha = oracle::zeros(n, 3 * K);
    if (in.cfg.weight_mode == WeightMode::graph_level) {
        for (auto& r : alpha)
            for (std::size_t j = 0; j < 3 * K; ++j) r[j] = p.graph_alpha(0, j);
    } else {
        std::vector<double> phi(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto nb = in.g.neighbors(i);
            if (nb.empty()) continue;
            double sum = 0.0;
            for (NodeId j : nb) {
                const double d = similarity(in.x.row(i), in.x.row(j), in.cfg.sim_kind);
                sum += in.cfg.localsim_mode == LocalSimMode::naive ? d : perceptron(p.mlp_ls, {{d, d * d}})[0][0];
            }
            phi[i] = sum / static_cast<double>(nb.size());
        }
        for (std::size_t i = 0; i < n; ++i) alpha[i] = perceptron(p.mlp_alpha, {{phi[i], phi[i] * phi[i]}})[0];
    }
    Dense fused = oracle::zeros(n, (K + 1) * z);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < z; ++j) {
            fused[i][j] = hi[i][j];
            for (std::size_t k = 0; k < K; ++k)
                fused[i][(k + 1) * z + j] =
                    alpha[i][k] * hi[i][j] + alpha[i][K + k] * hl[k][i][j] + alpha[i][2 * K + k] * hh[k][i][j];
        }
    return oracle::mul(fused, oracle::from(p.w_out));
}

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "lsgnn_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("forward matches a dense re-derivation in every mode") {
    for (auto wm : {WeightMode::node_level, WeightMode::graph_level})
        for (auto lm : {LocalSimMode::refined, LocalSimMode::naive}) {
            CAPTURE(to_string(wm));
            CAPTURE(to_string(lm));
            auto in = make_instance(41, wm, lm);
            std::mt19937_64 rng(1);
            auto p = ModelParameters::init_uniform(in.cfg, rng);
            auto inputs = prepare_inputs(in.g, in.x, in.stack, in.cfg);
            auto fr = forward(p, in.cfg, inputs);
            CHECK(oracle::max_abs(oracle::from(fr.logits), reference_logits(p, in)) <= 1e-12);
            for (std::size_t i = 0; i < fr.probs.rows(); ++i) {
                double s = 0.0;
                for (double v : fr.probs.row(i)) {
                    CHECK(v >= 0.0);
                    s += v;
                }
                CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            }
            if (wm == WeightMode::graph_level) {
                for (std::size_t i = 1; i < fr.alpha.alpha_low.rows(); ++i)
                    CHECK(std::equal(fr.alpha.alpha_low.row(i).begin(), fr.alpha.alpha_low.row(i).end(),
                                     fr.alpha.alpha_low.row(0).begin()));
            }
        }
}

TEST_CASE("fusion weights from a hand-set perceptron") {
    // Identity-like perceptron: hidden = ReLU([phi, phi^2]), outputs copy phi.
    Perceptron p{Matrix::from_rows({{1, 0}, {0, 1}}), Matrix(1, 2), Matrix::from_rows({{1, 1, 1}, {0, 0, 0}}),
                 Matrix::from_rows({{0, 1, -1}})};
    std::vector<double> phi{0.5, -2.0};
    auto w = fusion_weights(p, phi, 1);
    CHECK(w.alpha_identity(0, 0) == 0.5);
    CHECK(w.alpha_low(0, 0) == 1.5);
    CHECK(w.alpha_high(0, 0) == -0.5);
    CHECK(w.alpha_identity(1, 0) == 0.0);  // ReLU clips the negative phi
    CHECK(w.alpha_low(1, 0) == 1.0);
    CHECK_THROWS_AS(fusion_weights(p, phi, 2), InputError);
}

TEST_CASE("analytic gradients match finite differences") {
    for (auto wm : {WeightMode::node_level, WeightMode::graph_level})
        for (auto lm : {LocalSimMode::refined, LocalSimMode::naive})
            for (std::uint64_t seed : {0u, 1u, 2u}) {
                auto r = gradcheck::run(seed, wm, lm);
                CAPTURE(r.worst_name);
                CHECK(r.worst_rel <= 1e-4);
            }
}

TEST_CASE("weight decay term") {
    auto in = make_instance(42, WeightMode::node_level, LocalSimMode::refined);
    std::mt19937_64 rng(2);
    auto p = ModelParameters::init_uniform(in.cfg, rng);
    auto inputs = prepare_inputs(in.g, in.x, in.stack, in.cfg);
    Mask m(in.y.size(), 1);
    auto a = loss_and_gradients(p, in.cfg, inputs, in.y, m, 0.0);
    auto b = loss_and_gradients(p, in.cfg, inputs, in.y, m, 0.1);
    CHECK(b.data_loss == a.data_loss);
    CHECK(b.loss == doctest::Approx(a.loss + 0.05 * p.squared_norm()).epsilon(1e-12));
    CHECK(b.grads.w_out(0, 0) == doctest::Approx(a.grads.w_out(0, 0) + 0.1 * p.w_out(0, 0)).epsilon(1e-12));
}

TEST_CASE("accuracy") {
    Matrix probs = Matrix::from_rows({{0.5, 0.5}, {0.2, 0.8}, {0.9, 0.1}});
    CHECK(accuracy(probs, {0, 1, 1}, {1, 1, 1}) == doctest::Approx(2.0 / 3.0));
    CHECK(accuracy(probs, {1, 1, 1}, {1, 0, 0}) == 0.0);  // tie resolves to class 0
    CHECK_THROWS_AS(accuracy(probs, {0, 1, 1}, {0, 0, 0}), InputError);
}

TEST_CASE("softmax is shift invariant and stable") {
    auto p = softmax_rows(Matrix::from_rows({{1000, 1001}, {1, 2}}));
    CHECK(p(0, 0) == doctest::Approx(p(1, 0)).epsilon(1e-14));
    CHECK(p.all_finite());
}

TEST_CASE("dropout only acts in training passes") {
    auto in = make_instance(43, WeightMode::node_level, LocalSimMode::refined);
    in.cfg.dropout = 0.5;
    std::mt19937_64 rng(3);
    auto p = ModelParameters::init_uniform(in.cfg, rng);
    auto inputs = prepare_inputs(in.g, in.x, in.stack, in.cfg);
    auto eval1 = forward(p, in.cfg, inputs);
    auto eval2 = forward(p, in.cfg, inputs, true, nullptr);
    CHECK(eval1.logits == eval2.logits);
    std::mt19937_64 r1(9), r2(9);
    auto t1 = forward(p, in.cfg, inputs, true, &r1);
    auto t2 = forward(p, in.cfg, inputs, true, &r2);
    CHECK(t1.logits == t2.logits);
    CHECK_FALSE(t1.logits == eval1.logits);
}

TEST_CASE("training is deterministic and improves the training loss") {
    auto in = make_instance(44, WeightMode::node_level, LocalSimMode::refined, 60);
    auto inputs = prepare_inputs(in.g, in.x, in.stack, in.cfg);
    const std::size_t n = in.y.size();
    Mask tr(n, 0), va(n, 0);
    for (std::size_t i = 0; i < n; ++i) (i % 2 ? tr : va)[i] = 1;
    TrainConfig tc;
    tc.epochs = 60;
    tc.patience = 1000;
    tc.seed = 5;
    auto a = train(in.cfg, tc, inputs, in.y, tr, va);
    auto b = train(in.cfg, tc, inputs, in.y, tr, va);
    CHECK(a.params == b.params);
    CHECK(a.best_epoch == b.best_epoch);
    REQUIRE(a.history.size() == 60);
    CHECK(a.history.back().train_loss < a.history.front().train_loss);
    CHECK(a.best_val_acc >= 0.0);

    tc.patience = 3;
    auto c = train(in.cfg, tc, inputs, in.y, tr, va);
    CHECK(c.history.size() <= c.best_epoch + 3);

    Mask overlap = tr;
    overlap[1] = 1;
    overlap[0] = 1;
    CHECK_THROWS_AS(train(in.cfg, tc, inputs, in.y, tr, overlap), InputError);

    tc.lr = 1e120;  // parameters overflow within a few steps
    tc.patience = 1000;
    tc.epochs = 50;
    CHECK_THROWS_AS(train(in.cfg, tc, inputs, in.y, tr, va), TrainingError);
}

TEST_CASE("checkpoint round trip") {
    auto in = make_instance(45, WeightMode::graph_level, LocalSimMode::naive);
    in.cfg.sim_kind = SimilarityKind::euclidean;
    std::mt19937_64 rng(4);
    auto p = ModelParameters::init_uniform(in.cfg, rng);
    auto path = temp_file("model.lspm");
    save_checkpoint(in.cfg, p, path);
    auto [cfg, q] = load_checkpoint(path);
    CHECK(cfg == in.cfg);
    CHECK(q == p);

    std::string bytes;
    {
        std::ifstream f(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(f), {});
    }
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
    }
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
}

TEST_CASE("configuration checks") {
    ModelConfig c;
    c.sim_kind = SimilarityKind::neg_sq_scalar;
    c.d = 3;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = ModelConfig{};
    c.dropout = 1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    CHECK(parse_weight_mode("graph_level") == WeightMode::graph_level);
    CHECK(parse_localsim_mode("naive") == LocalSimMode::naive);
    CHECK_THROWS_AS(parse_weight_mode("edge_level"), InputError);
}
