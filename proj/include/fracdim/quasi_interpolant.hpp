#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bspline.hpp"
#include "rational.hpp"

namespace fracdim {

/// Midpoint quasi-interpolant of degree n: Q_k f = sum_v w_v f(xi_{k+v} + h/2).
struct QuasiInterpolant {
    int degree = 0;
    std::vector<Rational> exact_weights;
    std::vector<double> weights;
    Rational exact_q_norm;
    double q_norm = 0.0;
    double positive_weight_sum = 0.0;
};

namespace detail {

inline std::vector<Rational> midpoint_weight_table(int n) {
    switch (n) {
        case 0: return {Rational(1)};
        case 1: return {Rational(1, 2), Rational(1, 2)};
        case 2: return {Rational(-1, 8), Rational(5, 4), Rational(-1, 8)};
        case 3: return {Rational(-7, 48), Rational(31, 48), Rational(31, 48), Rational(-7, 48)};
        case 4:
            return {Rational(47, 1152), Rational(-107, 288), Rational(319, 192), Rational(-107, 288),
                    Rational(47, 1152)};
        default: throw std::invalid_argument("quasi-interpolant: degree must be in 0..4");
    }
}

}  // namespace detail

[[nodiscard]] inline QuasiInterpolant make_quasi_interpolant(int n) {
    QuasiInterpolant q;
    q.degree = n;
    q.exact_weights = detail::midpoint_weight_table(n);
    Rational norm(0), pos(0);
    for (const auto& w : q.exact_weights) {
        q.weights.push_back(w.to_double());
        norm += abs(w);
        if (w.num() > 0) pos += w;
    }
    q.exact_q_norm = norm;
    q.q_norm = norm.to_double();
    q.positive_weight_sum = pos.to_double();
    return q;
}

/// Tensor weights W_v = prod_a w_{v_a}, v flattened with axis 0 fastest.
[[nodiscard]] inline std::vector<Rational> tensor_weights_exact(const QuasiInterpolant& q, int d) {
    std::vector<Rational> out{Rational(1)};
    for (int a = 0; a < d; ++a) {
        std::vector<Rational> next;
        next.reserve(out.size() * q.exact_weights.size());
        for (const auto& w : q.exact_weights)
            for (const auto& o : out) next.push_back(o * w);
        out = std::move(next);
    }
    return out;
}

[[nodiscard]] inline double tensor_q_norm(const QuasiInterpolant& q, int d) {
    Rational s(0);
    for (const auto& w : tensor_weights_exact(q, d)) s += abs(w);
    return s.to_double();
}

[[nodiscard]] inline Rational tensor_positive_weight_sum(const QuasiInterpolant& q, int d) {
    Rational s(0);
    for (const auto& w : tensor_weights_exact(q, d))
        if (w.num() > 0) s += w;
    return s;
}

[[nodiscard]] inline double coefficient_1d(const QuasiInterpolant& q, std::span<const double> samples) {
    if (samples.size() != q.weights.size()) throw std::invalid_argument("quasi-interpolant: need n+1 samples");
    double c = 0.0;
    for (std::size_t v = 0; v < samples.size(); ++v) c += q.weights[v] * samples[v];
    return c;
}

/// Block of (n+1)^d samples with axis 0 fastest.
[[nodiscard]] inline double coefficient_tensor(const QuasiInterpolant& q, int d, std::span<const double> block) {
    const auto m = q.weights.size();
    std::size_t expected = 1;
    for (int a = 0; a < d; ++a) expected *= m;
    if (block.size() != expected) throw std::invalid_argument("quasi-interpolant: incomplete sample block");
    double c = 0.0;
    for (std::size_t idx = 0; idx < block.size(); ++idx) {
        double w = 1.0;
        std::size_t r = idx;
        for (int a = 0; a < d; ++a) {
            w *= q.weights[r % m];
            r /= m;
        }
        c += w * block[idx];
    }
    return c;
}

/// Qf(x) from samples at all J+2n midpoints of ks.
[[nodiscard]] inline double eval_quasi_interpolant(const QuasiInterpolant& q, const KnotSequence& ks,
                                                   std::span<const double> samples, double x) {
    if (static_cast<int>(samples.size()) != ks.num_intervals())
        throw std::invalid_argument("quasi-interpolant: need samples at every midpoint");
    auto [lo, hi] = parameter_interval(ks);
    if (x < lo || x > hi) throw std::domain_error("quasi-interpolant: point outside parameter interval");
    const int n = ks.degree;
    double acc = 0.0;
    for (int k : relevant_indices(ks, x))
        acc += coefficient_1d(q, samples.subspan(static_cast<std::size_t>(k), static_cast<std::size_t>(n + 1))) *
               eval_bspline(ks, k, x);
    return acc;
}

/// 2D version; samples indexed px + P*py with P = J+2n.
[[nodiscard]] inline double eval_quasi_interpolant_2d(const QuasiInterpolant& q, const TensorGrid& g,
                                                      std::span<const double> samples, double x, double y) {
    if (g.d != 2) throw std::invalid_argument("quasi-interpolant: grid must be 2D");
    const auto& ax = g.axes[0];
    const auto& ay = g.axes[1];
    const int P = ax.num_intervals();
    if (static_cast<int>(samples.size()) != P * P)
        throw std::invalid_argument("quasi-interpolant: need samples at every midpoint");
    auto [xlo, xhi] = parameter_interval(ax);
    auto [ylo, yhi] = parameter_interval(ay);
    if (x < xlo || x > xhi || y < ylo || y > yhi)
        throw std::domain_error("quasi-interpolant: point outside parameter rectangle");
    const int n = g.degree();
    std::vector<double> block(static_cast<std::size_t>((n + 1) * (n + 1)));
    double acc = 0.0;
    for (int ky : relevant_indices(ay, y)) {
        for (int kx : relevant_indices(ax, x)) {
            for (int vy = 0; vy <= n; ++vy)
                for (int vx = 0; vx <= n; ++vx) block[vx + (n + 1) * vy] = samples[(kx + vx) + P * (ky + vy)];
            acc += coefficient_tensor(q, 2, block) * eval_bspline(ax, kx, x) * eval_bspline(ay, ky, y);
        }
    }
    return acc;
}

/// Largest h with exp(M h sqrt(d) m)(1 - 1/S+) < 1, m = n (even) or n+1 (odd).
[[nodiscard]] inline double positivity_threshold(const QuasiInterpolant& q, int d, double M) {
    if (!(M > 0)) throw std::invalid_argument("positivity threshold: M must be positive");
    const Rational spos = tensor_positive_weight_sum(q, d);
    if (spos == Rational(1)) return std::numeric_limits<double>::infinity();
    const int m = (q.degree % 2 == 0) ? q.degree : q.degree + 1;
    const double frac = (Rational(1) - Rational(1) / spos).to_double();
    return -std::log(frac) / (M * m * std::sqrt(static_cast<double>(d)));
}

/// E(h,n) from the hidden positivity condition.
[[nodiscard]] inline double positivity_factor(const QuasiInterpolant& q, int d, double M, double h) {
    const Rational spos = tensor_positive_weight_sum(q, d);
    const int m = (q.degree % 2 == 0) ? q.degree : q.degree + 1;
    return std::exp(M * h * std::sqrt(static_cast<double>(d)) * m) * (Rational(1) - Rational(1) / spos).to_double();
}

}  // namespace fracdim
