#include "aerialfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace aerialfl {
namespace {

// Softmax in place; returns log-sum-exp of the input.
double softmax(std::vector<double>& z)
{
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - top);
        sum += v;
    }
    for (double& v : z) {
        v /= sum;
    }
    return top + std::log(sum);
}

int argmax(const std::vector<double>& z)
{
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

void check_rows(std::span<const std::size_t> rows)
{
    if (rows.empty()) {
        throw std::invalid_argument("loss over an empty set of rows");
    }
}

} // namespace

SoftmaxRegression::SoftmaxRegression(int dim, int classes) : dim_(dim), classes_(classes)
{
    if (dim < 1 || classes < 2) {
        throw std::invalid_argument("softmax regression needs dim >= 1 and classes >= 2");
    }
}

std::size_t SoftmaxRegression::parameter_count() const
{
    return static_cast<std::size_t>(classes_) * (dim_ + 1);
}

std::vector<double> SoftmaxRegression::initial_weights(Rng&) const
{
    return std::vector<double>(parameter_count(), 0.0);
}

double SoftmaxRegression::loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                               std::span<double> grad) const
{
    check_rows(rows);
    const std::size_t d = static_cast<std::size_t>(dim_);
    const double* bias = w.data() + static_cast<std::size_t>(classes_) * d;
    if (!grad.empty()) {
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    std::vector<double> z(static_cast<std::size_t>(classes_));
    double total = 0.0;
    for (std::size_t row : rows) {
        const auto x = data.sample(row);
        const int y = data.labels[row];
        for (int c = 0; c < classes_; ++c) {
            const double* wc = w.data() + static_cast<std::size_t>(c) * d;
            double acc = bias[c];
            for (std::size_t j = 0; j < d; ++j) {
                acc += wc[j] * x[j];
            }
            z[static_cast<std::size_t>(c)] = acc;
        }
        const double zy = z[static_cast<std::size_t>(y)];
        total += softmax(z) - zy;
        if (grad.empty()) {
            continue;
        }
        for (int c = 0; c < classes_; ++c) {
            const double delta = z[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
            double* gc = grad.data() + static_cast<std::size_t>(c) * d;
            for (std::size_t j = 0; j < d; ++j) {
                gc[j] += delta * x[j];
            }
            grad[static_cast<std::size_t>(classes_) * d + c] += delta;
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad) {
        g *= inv;
    }
    return total * inv;
}

int SoftmaxRegression::predict(std::span<const double> w, std::span<const float> x) const
{
    const std::size_t d = static_cast<std::size_t>(dim_);
    std::vector<double> z(static_cast<std::size_t>(classes_));
    for (int c = 0; c < classes_; ++c) {
        const double* wc = w.data() + static_cast<std::size_t>(c) * d;
        double acc = w[static_cast<std::size_t>(classes_) * d + c];
        for (std::size_t j = 0; j < d; ++j) {
            acc += wc[j] * x[j];
        }
        z[static_cast<std::size_t>(c)] = acc;
    }
    return argmax(z);
}

// Layout: W1 (hidden x dim), b1, W2 (classes x hidden), b2.
Mlp::Mlp(int dim, int hidden, int classes) : dim_(dim), hidden_(hidden), classes_(classes)
{
    if (dim < 1 || hidden < 1 || classes < 2) {
        throw std::invalid_argument("mlp needs dim >= 1, hidden >= 1 and classes >= 2");
    }
}

std::size_t Mlp::parameter_count() const
{
    return static_cast<std::size_t>(hidden_) * (dim_ + 1) + static_cast<std::size_t>(classes_) * (hidden_ + 1);
}

std::vector<double> Mlp::initial_weights(Rng& rng) const
{
    std::vector<double> w(parameter_count(), 0.0);
    std::normal_distribution<double> normal;
    const std::size_t n1 = static_cast<std::size_t>(hidden_) * dim_;
    const std::size_t o2 = n1 + static_cast<std::size_t>(hidden_);
    const std::size_t n2 = static_cast<std::size_t>(classes_) * hidden_;
    const double s1 = std::sqrt(2.0 / dim_);
    const double s2 = std::sqrt(1.0 / hidden_);
    for (std::size_t i = 0; i < n1; ++i) {
        w[i] = s1 * normal(rng);
    }
    for (std::size_t i = 0; i < n2; ++i) {
        w[o2 + i] = s2 * normal(rng);
    }
    return w;
}

void Mlp::forward(std::span<const double> w, std::span<const float> x, std::vector<double>& hidden,
                  std::vector<double>& logits) const
{
    const std::size_t d = static_cast<std::size_t>(dim_);
    const std::size_t h = static_cast<std::size_t>(hidden_);
    const double* b1 = w.data() + h * d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(classes_) * h;
    for (std::size_t u = 0; u < h; ++u) {
        const double* wu = w.data() + u * d;
        double acc = b1[u];
        for (std::size_t j = 0; j < d; ++j) {
            acc += wu[j] * x[j];
        }
        hidden[u] = std::max(acc, 0.0);
    }
    for (int c = 0; c < classes_; ++c) {
        const double* wc = w2 + static_cast<std::size_t>(c) * h;
        double acc = b2[c];
        for (std::size_t u = 0; u < h; ++u) {
            acc += wc[u] * hidden[u];
        }
        logits[static_cast<std::size_t>(c)] = acc;
    }
}

double Mlp::loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                 std::span<double> grad) const
{
    check_rows(rows);
    const std::size_t d = static_cast<std::size_t>(dim_);
    const std::size_t h = static_cast<std::size_t>(hidden_);
    const std::size_t o_b1 = h * d;
    const std::size_t o_w2 = o_b1 + h;
    const std::size_t o_b2 = o_w2 + static_cast<std::size_t>(classes_) * h;
    if (!grad.empty()) {
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    std::vector<double> a(h);
    std::vector<double> z(static_cast<std::size_t>(classes_));
    std::vector<double> back(h);
    double total = 0.0;
    for (std::size_t row : rows) {
        const auto x = data.sample(row);
        const int y = data.labels[row];
        forward(w, x, a, z);
        const double zy = z[static_cast<std::size_t>(y)];
        total += softmax(z) - zy;
        if (grad.empty()) {
            continue;
        }
        std::fill(back.begin(), back.end(), 0.0);
        for (int c = 0; c < classes_; ++c) {
            const double delta = z[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
            const double* wc = w.data() + o_w2 + static_cast<std::size_t>(c) * h;
            double* gc = grad.data() + o_w2 + static_cast<std::size_t>(c) * h;
            for (std::size_t u = 0; u < h; ++u) {
                gc[u] += delta * a[u];
                back[u] += delta * wc[u];
            }
            grad[o_b2 + static_cast<std::size_t>(c)] += delta;
        }
        for (std::size_t u = 0; u < h; ++u) {
            if (a[u] <= 0.0) {
                continue;
            }
            double* gu = grad.data() + u * d;
            for (std::size_t j = 0; j < d; ++j) {
                gu[j] += back[u] * x[j];
            }
            grad[o_b1 + u] += back[u];
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad) {
        g *= inv;
    }
    return total * inv;
}

int Mlp::predict(std::span<const double> w, std::span<const float> x) const
{
    std::vector<double> a(static_cast<std::size_t>(hidden_));
    std::vector<double> z(static_cast<std::size_t>(classes_));
    forward(w, x, a, z);
    return argmax(z);
}

ModelKind parse_model_kind(std::string_view name)
{
    if (name == "logistic" || name == "multinomial-logistic") {
        return ModelKind::Logistic;
    }
    if (name == "mlp" || name == "mlp-1hidden") {
        return ModelKind::Mlp;
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected logistic or mlp)");
}

std::string_view to_string(ModelKind kind)
{
    return kind == ModelKind::Logistic ? "logistic" : "mlp";
}

std::unique_ptr<Model> make_model(ModelKind kind, int dim, int classes)
{
    if (kind == ModelKind::Logistic) {
        return std::make_unique<SoftmaxRegression>(dim, classes);
    }
    return std::make_unique<Mlp>(dim, 64, classes);
}

double mean_loss(const Model& model, std::span<const double> w, const Dataset& data)
{
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return model.loss(w, data, rows, {});
}

double accuracy(const Model& model, std::span<const double> w, const Dataset& data)
{
    if (data.size() == 0) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        hits += model.predict(w, data.sample(i)) == data.labels[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

} // namespace aerialfl
