#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedrisk/data.hpp"

namespace fedrisk {

enum class ArchKind { linear, mlp };

// Flat weight layout. Linear: W (p x C), b (C). MLP adds one tanh hidden
// layer: W1 (p x h), b1 (h), W2 (h x C), b2 (C).
struct ModelLayout {
    ArchKind kind = ArchKind::linear;
    int inputs = 0;
    int hidden = 0;
    int classes = 0;

    static ModelLayout make_linear(int p, int classes) { return {ArchKind::linear, p, 0, classes}; }
    static ModelLayout make_mlp(int p, int hidden, int classes) { return {ArchKind::mlp, p, hidden, classes}; }

    int dim() const {
        if (kind == ArchKind::linear) {
            return inputs * classes + classes;
        }
        return inputs * hidden + hidden + hidden * classes + classes;
    }

    bool operator==(const ModelLayout&) const = default;
};

struct ModelParams {
    ModelLayout layout;
    std::vector<double> w; // layout.dim() entries
};

// Index list into one dataset; the unit handed to loss/gradient evaluation.
struct Batch {
    const Dataset* ds = nullptr;
    std::vector<int> indices;

    int size() const { return static_cast<int>(indices.size()); }
};

// Zeros for linear models; Glorot-uniform hidden/output weights (zero biases)
// for the MLP, drawn from `seed`.
ModelParams init_params(const ModelLayout& layout, std::uint64_t seed);

// Softmax class probabilities, computed with max-subtraction.
std::vector<double> predict_proba(const ModelParams& params, std::span<const double> x);

// Mean cross-entropy over the batch.
double loss(const ModelParams& params, const Batch& batch);

// Exact analytic gradient of loss(), same layout as params.w.
std::vector<double> grad(const ModelParams& params, const Batch& batch);

ModelParams sgd_step(const ModelParams& params, std::span<const double> gradient, double eta);

struct LocalTrainResult {
    ModelParams weights;
    std::vector<double> grad_equivalent; // (w_in - w_out) / eta
};

// Mini-batch SGD over the shuffled local split; epoch shuffles and batch
// boundaries are a pure function of `seed`.
LocalTrainResult local_train(const ModelParams& params, std::span<const int> train_indices, const Dataset& ds,
                             int epochs, int batch_size, double eta, std::uint64_t seed);

// Fraction of argmax-correct predictions; ties resolve to the lowest class.
double accuracy(const ModelParams& params, std::span<const int> indices, const Dataset& ds);

} // namespace fedrisk
