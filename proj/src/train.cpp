#include <cmath>
#include <string>

#include "lsgnn/error.hpp"
#include "lsgnn/model.hpp"

namespace lsgnn {
namespace {

// Adam with bias correction; weight decay enters through the loss gradient.
class Adam {
public:
    Adam(const ModelParameters& like, double lr) : lr_(lr) {
        for (const Matrix* t : like.tensors()) {
            m_.emplace_back(t->rows(), t->cols());
            v_.emplace_back(t->rows(), t->cols());
        }
    }

    void step(ModelParameters& params, const ModelParameters& grads) {
        ++t_;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        auto pt = params.tensors();
        const auto gt = grads.tensors();
        for (std::size_t k = 0; k < pt.size(); ++k) {
            double* p = pt[k]->data();
            const double* g = gt[k]->data();
            double* m = m_[k].data();
            double* v = v_[k].data();
            for (std::size_t i = 0; i < pt[k]->size(); ++i) {
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kEps);
            }
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<Matrix> m_, v_;
};

} // namespace

TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const ModelInputs& inputs,
                  const Labels& labels, const Mask& train_mask, const Mask& val_mask) {
    cfg.validate();
    if (!(tcfg.lr > 0.0) || !(tcfg.weight_decay >= 0.0)) throw InputError("lr must be > 0 and weight decay >= 0");
    const std::size_t n = inputs.num_nodes();
    if (train_mask.size() != n || val_mask.size() != n) throw InputError("mask length must equal node count");
    for (std::size_t i = 0; i < n; ++i) {
        if (train_mask[i] && val_mask[i]) throw InputError("train and validation masks overlap");
    }

    std::mt19937_64 rng(tcfg.seed);
    TrainResult result;
    ModelParameters params = ModelParameters::init_uniform(cfg, rng);
    Adam opt(params, tcfg.lr);
    result.params = params;
    result.best_val_acc = -1.0;

    bool has_val = false;
    for (auto v : val_mask) has_val = has_val || v;

    for (std::uint32_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        auto lg = loss_and_gradients(params, cfg, inputs, labels, train_mask, tcfg.weight_decay, &rng);
        if (!std::isfinite(lg.loss)) {
            throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                                " (learning rate " + std::to_string(tcfg.lr) + " too high?)");
        }
        opt.step(params, lg.grads);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = lg.loss;
        rec.val_acc = has_val ? evaluate(params, cfg, inputs, labels, val_mask) : 0.0;
        result.history.push_back(rec);

        if (rec.val_acc > result.best_val_acc) {
            result.best_val_acc = rec.val_acc;
            result.best_epoch = epoch;
            result.params = params;
        } else if (epoch - result.best_epoch >= tcfg.patience) {
            break;
        }
    }
    return result;
}

} // namespace lsgnn
