#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracdim {

inline constexpr double kBracketSlack = 1e-12;

/// Anything with size() and apply(in, out) computing out = M in.
template <typename Op>
concept LinearOperator = requires(Op& op, std::span<const double> x, std::span<double> y) {
    { op.size() } -> std::convertible_to<std::size_t>;
    op.apply(x, y);
};

/// Dense row-major operator, mostly for tests and tiny problems.
struct DenseOperator {
    std::size_t n = 0;
    std::vector<double> a;
    [[nodiscard]] std::size_t size() const { return n; }
    void apply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += a[i * n + j] * x[j];
            y[i] = acc;
        }
    }
};

struct PowerOptions {
    double tol = 1e-14;
    long max_iter = 100000;
    long stall_window = 200;  // stop when the spread has not improved for this many steps
};

enum class PowerStatus { converged, max_iter, stalled, nonpositive };

[[nodiscard]] inline const char* to_string(PowerStatus s) {
    switch (s) {
        case PowerStatus::converged: return "converged";
        case PowerStatus::max_iter: return "max_iter";
        case PowerStatus::stalled: return "stalled";
        case PowerStatus::nonpositive: return "nonpositive";
    }
    return "?";
}

struct PowerResult {
    double lambda = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double spread = std::numeric_limits<double>::infinity();  // (max - min) / max
    long iterations = 0;
    PowerStatus status = PowerStatus::max_iter;
    std::vector<double> w;  // sup norm 1; min/max ratios refer to this vector
};

using PowerObserver = std::function<void(long iteration, std::span<const double> w, double min_ratio, double max_ratio)>;

/// Power iteration from the all-ones vector (or a supplied positive start).
template <LinearOperator Op>
[[nodiscard]] PowerResult power_iteration(Op& op, const PowerOptions& opt = {}, std::span<const double> start = {},
                                          const PowerObserver& observer = {}) {
    const std::size_t N = op.size();
    std::vector<double> w(N, 1.0), y(N);
    if (!start.empty()) {
        if (start.size() != N) throw std::invalid_argument("power iteration: start vector size");
        const double mx = *std::max_element(start.begin(), start.end());
        for (std::size_t i = 0; i < N; ++i) w[i] = start[i] / mx;
    }
    PowerResult best;
    long since_improved = 0;
    for (long it = 1; it <= opt.max_iter; ++it) {
        op.apply(w, y);
        double mn = std::numeric_limits<double>::infinity(), mx = -mn, ymax = 0.0;
        bool positive = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (!(y[i] > 0.0)) {
                positive = false;
                break;
            }
            const double r = y[i] / w[i];
            mn = std::min(mn, r);
            mx = std::max(mx, r);
            ymax = std::max(ymax, y[i]);
        }
        if (observer) observer(it, w, positive ? mn : 0.0, positive ? mx : 0.0);
        if (!positive) {
            best.status = PowerStatus::nonpositive;
            best.iterations = it;
            if (best.w.empty()) best.w = w;
            return best;
        }
        const double spread = (mx - mn) / mx;
        const bool significant = spread < best.spread * (1.0 - 1e-3);
        if (spread < best.spread) {
            best.spread = spread;
            best.min_ratio = mn;
            best.max_ratio = mx;
            best.lambda = std::sqrt(mn * mx);
            best.w = w;
        }
        since_improved = significant ? 0 : since_improved + 1;
        best.iterations = it;
        if (spread <= opt.tol) {
            best.status = PowerStatus::converged;
            return best;
        }
        if (since_improved > opt.stall_window) {
            best.status = PowerStatus::stalled;
            return best;
        }
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] / ymax;
    }
    best.status = PowerStatus::max_iter;
    return best;
}

/// Midpoint grid of a sample vector with P points per axis and spacing h.
/// Membership is checked on the block [first, first + count) of each axis.
struct ConeGeometry {
    int d = 1;
    std::size_t P = 0;
    double h = 1.0;
    std::size_t first = 0;
    std::size_t count = 0;  // 0 means all P points

    [[nodiscard]] std::size_t end() const { return first + (count ? count : P); }
};

struct ConeCertificate {
    double M = 0.0;
    ConeGeometry geometry;
    double adjacent_ratio_max = 0.0;
    bool member = false;
};

/// Checks |log w_i - log w_j| <= M dist(x_i, x_j) over index-adjacent midpoints
/// (4-neighbourhood in 2D); chaining along grid paths gives every pair.
[[nodiscard]] inline ConeCertificate cone_membership(std::span<const double> w, const ConeGeometry& g, double M) {
    const std::size_t N = g.d == 1 ? g.P : g.P * g.P;
    if (w.size() != N) throw std::invalid_argument("cone membership: vector does not match the grid");
    for (double v : w)
        if (!(v > 0.0)) throw std::domain_error("cone membership: nonpositive entry");
    ConeCertificate c;
    c.M = M;
    c.geometry = g;
    double worst = 0.0;
    auto check = [&](std::size_t i, std::size_t j) { worst = std::max(worst, std::abs(std::log(w[i]) - std::log(w[j]))); };
    const std::size_t lo = g.first, hi = g.end();
    if (hi > g.P) throw std::invalid_argument("cone membership: block exceeds the grid");
    if (g.d == 1) {
        for (std::size_t i = lo; i + 1 < hi; ++i) check(i, i + 1);
    } else {
        for (std::size_t iy = lo; iy < hi; ++iy)
            for (std::size_t ix = lo; ix < hi; ++ix) {
                const std::size_t p = ix + g.P * iy;
                if (ix + 1 < hi) check(p, p + 1);
                if (iy + 1 < hi) check(p, p + g.P);
            }
    }
    c.adjacent_ratio_max = worst / g.h;
    c.member = c.adjacent_ratio_max <= M;
    return c;
}

struct SpectralBracket {
    double alpha = 0.0;
    double beta = 0.0;
    long iterations = 0;
    double residual = 0.0;  // (beta - alpha) / beta before widening
};

/// alpha = min (Lw)_i / w_i, beta = max, widened by a relative slack for rounding.
template <LinearOperator Op>
[[nodiscard]] SpectralBracket spectral_bracket(Op& op, std::span<const double> w, double slack = kBracketSlack) {
    const std::size_t N = op.size();
    if (w.size() != N) throw std::invalid_argument("spectral bracket: vector size");
    std::vector<double> y(N);
    op.apply(w, y);
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (std::size_t i = 0; i < N; ++i) {
        if (!(w[i] > 0.0)) throw std::domain_error("spectral bracket: vector not strictly positive");
        if (!(y[i] > 0.0)) throw std::domain_error("spectral bracket: image not strictly positive");
        const double r = y[i] / w[i];
        mn = std::min(mn, r);
        mx = std::max(mx, r);
    }
    SpectralBracket b;
    b.residual = (mx - mn) / mx;
    b.alpha = mn * (1.0 - slack);
    b.beta = mx * (1.0 + slack);
    return b;
}

}  // namespace fracdim
