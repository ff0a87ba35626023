#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fracdim {

inline constexpr int kMaxDegree = 4;

/// Uniform knot vector xi_j = lo + (j - n) h, j = 0..J+2n.
/// The first and last n knot intervals extend past [lo, hi].
struct KnotSequence {
    int degree = 0;
    int J = 0;
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    double h = 1.0;
    std::vector<double> knots;

    [[nodiscard]] int num_splines() const { return J + degree; }
    [[nodiscard]] int num_intervals() const { return J + 2 * degree; }
    /// Midpoint of knot interval p, p = 0..J+2n-1.
    [[nodiscard]] double midpoint(int p) const {
        return domain_lo + (static_cast<double>(p - degree) + 0.5) * h;
    }
};

[[nodiscard]] inline KnotSequence make_uniform_knots(double domain_lo, double domain_hi, int J, int n) {
    if (!(domain_hi > domain_lo)) throw std::invalid_argument("knots: domain_hi must exceed domain_lo");
    if (J < 1) throw std::invalid_argument("knots: J must be positive");
    if (n < 0 || n > kMaxDegree) throw std::invalid_argument("knots: degree must be in 0..4");
    KnotSequence ks;
    ks.degree = n;
    ks.J = J;
    ks.domain_lo = domain_lo;
    ks.domain_hi = domain_hi;
    ks.h = (domain_hi - domain_lo) / J;
    ks.knots.resize(static_cast<std::size_t>(J + 2 * n + 1));
    for (int j = 0; j <= J + 2 * n; ++j) ks.knots[j] = domain_lo + static_cast<double>(j - n) * ks.h;
    // pin the parameter interval to the exact endpoints
    ks.knots[n] = domain_lo;
    ks.knots[J + n] = domain_hi;
    return ks;
}

[[nodiscard]] inline std::pair<double, double> parameter_interval(const KnotSequence& ks) {
    return {ks.knots[ks.degree], ks.knots[ks.J + ks.degree]};
}

/// Index l of the knot interval [xi_l, xi_{l+1}) containing x. The last
/// interval is treated as closed. Throws if x lies outside the knot span.
[[nodiscard]] inline int locate_interval(const KnotSequence& ks, double x) {
    const int last = static_cast<int>(ks.knots.size()) - 2;
    if (!(x >= ks.knots.front() && x <= ks.knots.back()))
        throw std::domain_error("bspline: point outside knot span");
    auto it = std::upper_bound(ks.knots.begin(), ks.knots.end(), x);
    int l = static_cast<int>(it - ks.knots.begin()) - 1;
    return std::clamp(l, 0, last);
}

namespace detail {

// Cox-de Boor recurrence on an arbitrary knot vector, degree m, spline k.
inline double bspline_rec(const std::vector<double>& t, int m, int k, double x, int last_interval) {
    if (m == 0) {
        if (k == last_interval) return (x >= t[k] && x <= t[k + 1]) ? 1.0 : 0.0;
        return (x >= t[k] && x < t[k + 1]) ? 1.0 : 0.0;
    }
    const double g0 = (x - t[k]) / (t[k + m] - t[k]);
    const double g1 = (x - t[k + 1]) / (t[k + m + 1] - t[k + 1]);
    return g0 * bspline_rec(t, m - 1, k, x, last_interval) +
           (1.0 - g1) * bspline_rec(t, m - 1, k + 1, x, last_interval);
}

}  // namespace detail

/// b^n_k(x) through the recurrence.
[[nodiscard]] inline double eval_bspline(const KnotSequence& ks, int k, double x) {
    if (k < 0 || k >= ks.num_splines()) throw std::out_of_range("bspline: spline index");
    if (!(x >= ks.knots.front() && x <= ks.knots.back()))
        throw std::domain_error("bspline: point outside knot span");
    const int last = static_cast<int>(ks.knots.size()) - 2;
    return detail::bspline_rec(ks.knots, ks.degree, k, x, last);
}

/// (b^n_k)'(x) = a_k b^{n-1}_k(x) - a_{k+1} b^{n-1}_{k+1}(x), a_k = n / (xi_{k+n} - xi_k).
[[nodiscard]] inline double eval_bspline_derivative(const KnotSequence& ks, int k, double x) {
    const int n = ks.degree;
    if (n == 0) throw std::invalid_argument("bspline: derivative of degree 0 spline");
    if (k < 0 || k >= ks.num_splines()) throw std::out_of_range("bspline: spline index");
    if (!(x >= ks.knots.front() && x <= ks.knots.back()))
        throw std::domain_error("bspline: point outside knot span");
    const auto& t = ks.knots;
    const int last = static_cast<int>(t.size()) - 2;
    const double a0 = n / (t[k + n] - t[k]);
    const double a1 = n / (t[k + n + 1] - t[k + 1]);
    return a0 * detail::bspline_rec(t, n - 1, k, x, last) - a1 * detail::bspline_rec(t, n - 1, k + 1, x, last);
}

/// Splines with b_k(x) > 0, ascending.
[[nodiscard]] inline std::vector<int> relevant_indices(const KnotSequence& ks, double x) {
    const int l = locate_interval(ks, x);
    std::vector<int> out;
    for (int k = l - ks.degree; k <= l; ++k) {
        if (k < 0 || k >= ks.num_splines()) continue;
        if (eval_bspline(ks, k, x) > 0.0) out.push_back(k);
    }
    return out;
}

/// Values of the n+1 splines l-n..l touching x on a uniform mesh, computed
/// from the local coordinate u in [0,1). Entries for indices outside
/// 0..num_splines()-1 are still filled; callers drop them.
struct LocalBasis {
    int first = 0;  // index of the spline stored in values[0]
    std::array<double, kMaxDegree + 1> values{};
};

[[nodiscard]] inline LocalBasis uniform_local_basis(const KnotSequence& ks, double x) {
    const int n = ks.degree;
    const int last = ks.num_intervals() - 1;
    const double t = (x - ks.knots.front()) / ks.h;
    if (!(t >= -1e-12 * (1.0 + std::abs(t)) && t <= (last + 1) * (1.0 + 1e-12)))
        throw std::domain_error("bspline: point outside knot span");
    int l = static_cast<int>(std::floor(t));
    l = std::clamp(l, 0, last);
    const double u = t - l;
    LocalBasis out;
    out.first = l - n;
    auto& b = out.values;
    b[0] = 1.0;
    // de Boor triangle on uniform knots with u measured from xi_l
    for (int m = 1; m <= n; ++m) {
        double saved = 0.0;
        for (int r = 0; r < m; ++r) {
            // spline l-m+1+r of degree m-1 has value b[r]
            const double left = (u + (m - 1 - r)) / m;  // (x - xi_{l-m+1+r}) / (m h)
            const double tmp = b[r];
            b[r] = saved + (1.0 - left) * tmp;
            saved = left * tmp;
        }
        b[m] = saved;
    }
    return out;
}

/// Tensor-product grid: all axes share degree, J and h.
struct TensorGrid {
    int d = 1;
    std::vector<KnotSequence> axes;

    [[nodiscard]] int J() const { return axes.front().J; }
    [[nodiscard]] int degree() const { return axes.front().degree; }
    [[nodiscard]] double h() const { return axes.front().h; }
};

[[nodiscard]] inline TensorGrid make_tensor_grid(const std::vector<std::pair<double, double>>& domain, int J, int n) {
    if (domain.empty()) throw std::invalid_argument("grid: empty domain");
    TensorGrid g;
    g.d = static_cast<int>(domain.size());
    for (auto [lo, hi] : domain) g.axes.push_back(make_uniform_knots(lo, hi, J, n));
    for (const auto& a : g.axes)
        if (std::abs(a.h - g.axes.front().h) > 1e-15 * g.axes.front().h)
            throw std::invalid_argument("grid: axes must share the mesh size");
    return g;
}

/// j = j_x + J (j_y - 1) with 1-based indices.
[[nodiscard]] inline int flatten_index(int jx, int jy, int J) { return jx + J * (jy - 1); }
[[nodiscard]] inline std::pair<int, int> unflatten_index(int j, int J) { return {(j - 1) % J + 1, (j - 1) / J + 1}; }

[[nodiscard]] inline double eval_tensor_bspline(const TensorGrid& g, const std::vector<int>& k, const std::vector<double>& x) {
    if (static_cast<int>(k.size()) != g.d || static_cast<int>(x.size()) != g.d)
        throw std::invalid_argument("tensor bspline: dimension mismatch");
    double v = 1.0;
    for (int a = 0; a < g.d; ++a) v *= eval_bspline(g.axes[a], k[a], x[a]);
    return v;
}

}  // namespace fracdim
