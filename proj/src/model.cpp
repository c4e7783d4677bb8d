#include "fedrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedrisk/errors.hpp"
#include "fedrisk/rng.hpp"

namespace fedrisk {

namespace {

// Offsets into the flat weight vector.
struct Offsets {
    int w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

Offsets offsets_of(const ModelLayout& l) {
    Offsets o;
    if (l.kind == ArchKind::linear) {
        o.w1 = 0;
        o.b1 = l.inputs * l.classes;
    } else {
        o.w1 = 0;
        o.b1 = l.inputs * l.hidden;
        o.w2 = o.b1 + l.hidden;
        o.b2 = o.w2 + l.hidden * l.classes;
    }
    return o;
}

void check_batch(const Batch& batch, const ModelLayout& layout) {
    if (batch.ds == nullptr || batch.indices.empty()) {
        throw ContractError("batch must reference a dataset and hold at least one sample");
    }
    if (batch.ds->p != layout.inputs || batch.ds->classes > layout.classes) {
        throw ContractError("batch dataset does not match model layout");
    }
}

// Logits for one sample; `hidden` receives the tanh activations for MLPs.
void forward_logits(const ModelParams& m, std::span<const double> x, std::vector<double>& hidden,
                    std::vector<double>& logits) {
    const ModelLayout& l = m.layout;
    const Offsets o = offsets_of(l);
    logits.assign(static_cast<std::size_t>(l.classes), 0.0);
    if (l.kind == ArchKind::linear) {
        for (int c = 0; c < l.classes; ++c) {
            logits[static_cast<std::size_t>(c)] = m.w[static_cast<std::size_t>(o.b1 + c)];
        }
        for (int j = 0; j < l.inputs; ++j) {
            const double xj = x[static_cast<std::size_t>(j)];
            if (xj == 0.0) {
                continue;
            }
            const double* wrow = &m.w[static_cast<std::size_t>(j) * static_cast<std::size_t>(l.classes)];
            for (int c = 0; c < l.classes; ++c) {
                logits[static_cast<std::size_t>(c)] += xj * wrow[c];
            }
        }
        return;
    }
    hidden.assign(static_cast<std::size_t>(l.hidden), 0.0);
    for (int a = 0; a < l.hidden; ++a) {
        hidden[static_cast<std::size_t>(a)] = m.w[static_cast<std::size_t>(o.b1 + a)];
    }
    for (int j = 0; j < l.inputs; ++j) {
        const double xj = x[static_cast<std::size_t>(j)];
        if (xj == 0.0) {
            continue;
        }
        const double* wrow = &m.w[static_cast<std::size_t>(o.w1 + j * l.hidden)];
        for (int a = 0; a < l.hidden; ++a) {
            hidden[static_cast<std::size_t>(a)] += xj * wrow[a];
        }
    }
    for (int a = 0; a < l.hidden; ++a) {
        hidden[static_cast<std::size_t>(a)] = std::tanh(hidden[static_cast<std::size_t>(a)]);
    }
    for (int c = 0; c < l.classes; ++c) {
        logits[static_cast<std::size_t>(c)] = m.w[static_cast<std::size_t>(o.b2 + c)];
    }
    for (int a = 0; a < l.hidden; ++a) {
        const double ha = hidden[static_cast<std::size_t>(a)];
        const double* wrow = &m.w[static_cast<std::size_t>(o.w2 + a * l.classes)];
        for (int c = 0; c < l.classes; ++c) {
            logits[static_cast<std::size_t>(c)] += ha * wrow[c];
        }
    }
}

void softmax_inplace(std::vector<double>& logits) {
    double top = -std::numeric_limits<double>::infinity();
    for (const double v : logits) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite logit in softmax");
        }
        top = std::max(top, v);
    }
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - top);
        sum += v;
    }
    for (double& v : logits) {
        v /= sum;
    }
}

} // namespace

ModelParams init_params(const ModelLayout& layout, std::uint64_t seed) {
    ModelParams m;
    m.layout = layout;
    m.w.assign(static_cast<std::size_t>(layout.dim()), 0.0);
    if (layout.kind == ArchKind::mlp) {
        const Offsets o = offsets_of(layout);
        SplitRng rng(seed);
        const double a1 = std::sqrt(6.0 / (layout.inputs + layout.hidden));
        for (int i = 0; i < layout.inputs * layout.hidden; ++i) {
            m.w[static_cast<std::size_t>(o.w1 + i)] = (2.0 * rng.next_double() - 1.0) * a1;
        }
        const double a2 = std::sqrt(6.0 / (layout.hidden + layout.classes));
        for (int i = 0; i < layout.hidden * layout.classes; ++i) {
            m.w[static_cast<std::size_t>(o.w2 + i)] = (2.0 * rng.next_double() - 1.0) * a2;
        }
    }
    return m;
}

std::vector<double> predict_proba(const ModelParams& params, std::span<const double> x) {
    std::vector<double> hidden;
    std::vector<double> logits;
    forward_logits(params, x, hidden, logits);
    softmax_inplace(logits);
    return logits;
}

double loss(const ModelParams& params, const Batch& batch) {
    check_batch(batch, params.layout);
    std::vector<double> hidden;
    std::vector<double> logits;
    double total = 0.0;
    for (const int idx : batch.indices) {
        forward_logits(params, batch.ds->row(idx), hidden, logits);
        softmax_inplace(logits);
        const int y = batch.ds->labels[static_cast<std::size_t>(idx)];
        total += -std::log(std::max(logits[static_cast<std::size_t>(y)], 1e-300));
    }
    return total / batch.size();
}

std::vector<double> grad(const ModelParams& params, const Batch& batch) {
    check_batch(batch, params.layout);
    const ModelLayout& l = params.layout;
    const Offsets o = offsets_of(l);
    std::vector<double> g(static_cast<std::size_t>(l.dim()), 0.0);
    std::vector<double> hidden;
    std::vector<double> probs;
    std::vector<double> dz1;
    for (const int idx : batch.indices) {
        const auto x = batch.ds->row(idx);
        forward_logits(params, x, hidden, probs);
        softmax_inplace(probs);
        const int y = batch.ds->labels[static_cast<std::size_t>(idx)];
        probs[static_cast<std::size_t>(y)] -= 1.0; // now the logit error e

        if (l.kind == ArchKind::linear) {
            for (int j = 0; j < l.inputs; ++j) {
                const double xj = x[static_cast<std::size_t>(j)];
                if (xj == 0.0) {
                    continue;
                }
                double* grow = &g[static_cast<std::size_t>(j) * static_cast<std::size_t>(l.classes)];
                for (int c = 0; c < l.classes; ++c) {
                    grow[c] += xj * probs[static_cast<std::size_t>(c)];
                }
            }
            for (int c = 0; c < l.classes; ++c) {
                g[static_cast<std::size_t>(o.b1 + c)] += probs[static_cast<std::size_t>(c)];
            }
            continue;
        }

        for (int a = 0; a < l.hidden; ++a) {
            const double ha = hidden[static_cast<std::size_t>(a)];
            double* grow = &g[static_cast<std::size_t>(o.w2 + a * l.classes)];
            for (int c = 0; c < l.classes; ++c) {
                grow[c] += ha * probs[static_cast<std::size_t>(c)];
            }
        }
        for (int c = 0; c < l.classes; ++c) {
            g[static_cast<std::size_t>(o.b2 + c)] += probs[static_cast<std::size_t>(c)];
        }
        dz1.assign(static_cast<std::size_t>(l.hidden), 0.0);
        for (int a = 0; a < l.hidden; ++a) {
            double da = 0.0;
            const double* wrow = &params.w[static_cast<std::size_t>(o.w2 + a * l.classes)];
            for (int c = 0; c < l.classes; ++c) {
                da += wrow[c] * probs[static_cast<std::size_t>(c)];
            }
            const double ha = hidden[static_cast<std::size_t>(a)];
            dz1[static_cast<std::size_t>(a)] = da * (1.0 - ha * ha);
        }
        for (int j = 0; j < l.inputs; ++j) {
            const double xj = x[static_cast<std::size_t>(j)];
            if (xj == 0.0) {
                continue;
            }
            double* grow = &g[static_cast<std::size_t>(o.w1 + j * l.hidden)];
            for (int a = 0; a < l.hidden; ++a) {
                grow[a] += xj * dz1[static_cast<std::size_t>(a)];
            }
        }
        for (int a = 0; a < l.hidden; ++a) {
            g[static_cast<std::size_t>(o.b1 + a)] += dz1[static_cast<std::size_t>(a)];
        }
    }
    const double inv = 1.0 / batch.size();
    for (double& v : g) {
        v *= inv;
    }
    return g;
}

ModelParams sgd_step(const ModelParams& params, std::span<const double> gradient, double eta) {
    if (gradient.size() != params.w.size()) {
        throw ContractError("sgd_step: gradient layout mismatch");
    }
    if (!(eta > 0.0)) {
        throw ContractError("sgd_step: eta must be positive");
    }
    ModelParams out = params;
    for (std::size_t i = 0; i < out.w.size(); ++i) {
        out.w[i] -= eta * gradient[i];
    }
    return out;
}

LocalTrainResult local_train(const ModelParams& params, std::span<const int> train_indices, const Dataset& ds,
                             int epochs, int batch_size, double eta, std::uint64_t seed) {
    if (train_indices.empty()) {
        throw ConfigError("local_train: empty training split");
    }
    if (epochs < 1 || batch_size < 1) {
        throw ContractError("local_train: epochs and batch_size must be >= 1");
    }
    LocalTrainResult result;
    result.grad_equivalent.assign(params.w.size(), 0.0);
    if (eta == 0.0) {
        result.weights = params;
        return result;
    }

    std::vector<int> order(train_indices.begin(), train_indices.end());
    SplitRng rng(seed);
    ModelParams w = params;
    Batch batch;
    batch.ds = &ds;
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(order);
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(batch_size)) {
            const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(batch_size));
            batch.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto g = grad(w, batch);
            w = sgd_step(w, g, eta);
        }
    }
    for (std::size_t i = 0; i < w.w.size(); ++i) {
        result.grad_equivalent[i] = (params.w[i] - w.w[i]) / eta;
    }
    result.weights = std::move(w);
    return result;
}

double accuracy(const ModelParams& params, std::span<const int> indices, const Dataset& ds) {
    if (indices.empty()) {
        throw ContractError("accuracy: empty index set");
    }
    std::vector<double> hidden;
    std::vector<double> logits;
    long correct = 0;
    for (const int idx : indices) {
        forward_logits(params, ds.row(idx), hidden, logits);
        int best = 0;
        for (int c = 1; c < params.layout.classes; ++c) {
            if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) {
                best = c;
            }
        }
        if (best == ds.labels[static_cast<std::size_t>(idx)]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

} // namespace fedrisk
