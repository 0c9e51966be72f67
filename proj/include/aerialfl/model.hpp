#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "aerialfl/dataset.hpp"
#include "aerialfl/rng.hpp"

namespace aerialfl {

/// A differentiable classifier over a flat parameter vector. Implementations
/// are stateless, so one instance can serve concurrent local updates.
class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t parameter_count() const = 0;
    virtual std::vector<double> initial_weights(Rng& rng) const = 0;

    /// Mean loss over the given rows of data. When grad is non-empty it is
    /// overwritten with the gradient of that mean.
    virtual double loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                        std::span<double> grad) const = 0;

    virtual int predict(std::span<const double> w, std::span<const float> x) const = 0;
};

/// Multinomial logistic regression, weights laid out class-major followed by
/// the biases. Starts from zero, so the initial loss is ln(classes).
class SoftmaxRegression final : public Model {
public:
    SoftmaxRegression(int dim, int classes);

    std::size_t parameter_count() const override;
    std::vector<double> initial_weights(Rng& rng) const override;
    double loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                std::span<double> grad) const override;
    int predict(std::span<const double> w, std::span<const float> x) const override;

private:
    int dim_;
    int classes_;
};

/// dim -> hidden (ReLU) -> classes with softmax cross-entropy.
class Mlp final : public Model {
public:
    Mlp(int dim, int hidden, int classes);

    std::size_t parameter_count() const override;
    std::vector<double> initial_weights(Rng& rng) const override;
    double loss(std::span<const double> w, const Dataset& data, std::span<const std::size_t> rows,
                std::span<double> grad) const override;
    int predict(std::span<const double> w, std::span<const float> x) const override;

private:
    void forward(std::span<const double> w, std::span<const float> x, std::vector<double>& hidden,
                 std::vector<double>& logits) const;

    int dim_;
    int hidden_;
    int classes_;
};

enum class ModelKind { Logistic, Mlp };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

std::unique_ptr<Model> make_model(ModelKind kind, int dim, int classes);

/// Loss over every row of data.
double mean_loss(const Model& model, std::span<const double> w, const Dataset& data);

double accuracy(const Model& model, std::span<const double> w, const Dataset& data);

} // namespace aerialfl
