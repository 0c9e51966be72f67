#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace aerialfl {

/// Accuracy contract for every 1-D integral of the analytic model.
struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-15;
    // Upper limit of the semi-infinite distance integrals; zero selects the
    // simulation window radius of the network parameters.
    double truncation_radius = 0.0;
    int max_subdivisions = 400;
};

/// Raised when an integral misses its tolerance within max_subdivisions.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error)
        : std::runtime_error(what + ": no convergence (estimate " + std::to_string(estimate) + ", error " +
                             std::to_string(error) + ")"),
          estimate_(estimate), error_(error)
    {
    }

    double estimate() const { return estimate_; }
    double error() const { return error_; }

private:
    double estimate_;
    double error_;
};

namespace detail {

template <std::size_t K>
using Vec = std::array<double, K>;

template <std::size_t K>
double max_abs(const Vec<K>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

template <std::size_t K>
struct Segment {
    double a;
    double b;
    Vec<K> value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

/// 21-point Gauss-Kronrod on [a, b] with the embedded 10-point Gauss rule as
/// error estimate. Nodes and weights come from Boost.Math.
template <std::size_t K, class F>
Segment<K> gk21(F& f, double a, double b)
{
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    Vec<K> kron{};
    Vec<K> gauss{};
    const Vec<K> f0 = f(c);
    for (std::size_t j = 0; j < K; ++j) {
        kron[j] = f0[j] * wk[0];
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
        const Vec<K> fp = f(c + h * x[i]);
        const Vec<K> fm = f(c - h * x[i]);
        for (std::size_t j = 0; j < K; ++j) {
            const double s = fp[j] + fm[j];
            kron[j] += s * wk[i];
            if (i % 2 == 1) {
                gauss[j] += s * wg[i / 2];
            }
        }
    }
    double err = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        kron[j] *= h;
        gauss[j] *= h;
        err = std::max(err, std::max(std::abs(kron[j] - gauss[j]), 4.0e-16 * std::abs(kron[j])));
    }
    return {a, b, kron, err};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over consecutive pieces [breaks[i], breaks[i+1]]. The interval with the
/// largest error is bisected until the summed error drops below
/// max(abs_tol, rel_tol * |result|) in every component.
template <std::size_t K, class F>
std::array<double, K> integrate_vec(F&& f, std::span<const double> breaks, const QuadratureSpec& spec,
                                    const char* what)
{
    using Seg = detail::Segment<K>;
    std::priority_queue<Seg> heap;
    std::array<double, K> total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) {
            continue;
        }
        Seg s = detail::gk21<K>(f, breaks[i], breaks[i + 1]);
        for (std::size_t j = 0; j < K; ++j) {
            total[j] += s.value[j];
        }
        total_err += s.error;
        heap.push(s);
    }
    int subdivisions = 0;
    auto converged = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * detail::max_abs<K>(total)); };
    while (!heap.empty() && !converged()) {
        if (subdivisions >= spec.max_subdivisions) {
            throw QuadratureError(what, total[0], total_err);
        }
        Seg worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Seg left = detail::gk21<K>(f, worst.a, mid);
        Seg right = detail::gk21<K>(f, mid, worst.b);
        for (std::size_t j = 0; j < K; ++j) {
            total[j] += left.value[j] + right.value[j] - worst.value[j];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }
    // Re-sum to shed the drift of the incremental updates.
    std::array<double, K> sum{};
    while (!heap.empty()) {
        for (std::size_t j = 0; j < K; ++j) {
            sum[j] += heap.top().value[j];
        }
        heap.pop();
    }
    return sum;
}

template <class F>
double integrate(F&& f, std::span<const double> breaks, const QuadratureSpec& spec, const char* what)
{
    auto wrapped = [&f](double x) { return std::array<double, 1>{f(x)}; };
    return integrate_vec<1>(wrapped, breaks, spec, what)[0];
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec, const char* what)
{
    const std::array<double, 2> breaks{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(breaks), spec, what);
}

} // namespace aerialfl
