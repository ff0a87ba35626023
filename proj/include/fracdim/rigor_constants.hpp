#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs_maps.hpp"
#include "quasi_interpolant.hpp"
#include "rational.hpp"

namespace fracdim {

inline constexpr double kS0 = 1.8572;  // upper bound on s for any planar alphabet

/// Nearest double not below v.
[[nodiscard]] inline double round_up(long double v) {
    double d = static_cast<double>(v);
    if (static_cast<long double>(d) < v) d = std::nextafter(d, std::numeric_limits<double>::infinity());
    return d;
}

[[nodiscard]] inline long double factorial(int k) {
    long double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// ---- eigenfunction bounds ----

[[nodiscard]] inline double distortion_K(const Alphabet& a) {
    if (a.letters.empty()) throw std::invalid_argument("distortion: empty alphabet");
    if (a.d == 2) return 4.0;
    const long k = a.letters.front().e1;
    if (k == 1) return 4.0;
    return round_up(std::exp(2.0L / (static_cast<long double>(k) * k - 1.0L)));
}

/// (2s)(2s+1)...(2s+j-1): bound on |f_s^(j)| / f_s in 1D.
template <typename T>
[[nodiscard]] T deriv_bound_1d_t(T s, int j) {
    T p(1);
    for (int i = 0; i < j; ++i) p = p * (T(2) * s + T(i));
    return p;
}

[[nodiscard]] inline double deriv_bound_1d(double s, int j) {
    if (j < 1) throw std::invalid_argument("deriv bound: j must be >= 1");
    return round_up(deriv_bound_1d_t<long double>(s, j));
}

struct DerivBounds2D {
    double Cx = 0, Cy = 0;
    double Cxxy_lo = 0, Cxxy_hi = 0;
    double Cyyx_lo = 0, Cyyx_hi = 0;
    double grad_ratio = 0;

    /// Sum over |alpha| = 3 of the derivative-to-value ratio bounds.
    [[nodiscard]] double w3_seminorm() const {
        return Cx + Cy + std::max(std::abs(Cxxy_lo), std::abs(Cxxy_hi)) +
               std::max(std::abs(Cyyx_lo), std::abs(Cyyx_hi));
    }
};

[[nodiscard]] inline DerivBounds2D deriv_bounds_2d(double s_in) {
    const long double s = s_in;
    DerivBounds2D b;
    b.Cx = round_up(2 * s * (2 * s + 1) * (2 * s + 2));
    b.Cy = round_up(2 * s * (2 * s + 2) * std::max(25.0L * std::sqrt(5.0L) / 72.0L, (2 * s + 1) / 8.0L));
    b.Cxxy_lo = -round_up(4.0L / 3.0L * s * (1 + (s + 2) * (2 * s + 1)));
    b.Cxxy_hi = round_up(s * s / 2 + s);
    b.Cyyx_lo = -round_up(4 * s * (1 + 4.0L / 27.0L * (s + 2) * (2 * s + 1)));
    b.Cyyx_hi = round_up(4 * s * s + 8 * s);
    b.grad_ratio = round_up(s * std::sqrt(5.0L));
    return b;
}

// ---- polynomial projection constants ----

namespace detail {

// Legendre P_k on [-1,1] as ascending coefficients in t.
inline std::vector<long double> legendre_coeffs(int k) {
    std::vector<long double> p0{1}, p1{0, 1};
    if (k == 0) return p0;
    for (int m = 1; m < k; ++m) {
        // (m+1) P_{m+1} = (2m+1) t P_m - m P_{m-1}
        std::vector<long double> next(m + 2, 0.0L);
        for (int i = 0; i <= m; ++i) next[i + 1] += (2 * m + 1) * p1[i];
        for (int i = 0; i < static_cast<int>(p0.size()); ++i) next[i] -= m * p0[i];
        for (auto& c : next) c /= (m + 1);
        p0 = p1;
        p1 = next;
    }
    return p1;
}

inline long double poly_eval(const std::vector<long double>& c, long double t) {
    long double v = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

inline long double poly_antideriv(const std::vector<long double>& c, long double t) {
    long double v = 0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) v = v * t + c[i] / (i + 1);
    return v * t;
}

inline std::vector<long double> legendre_roots(int k) {
    std::vector<long double> r;
    if (k == 1) r = {0.0L};
    else if (k == 2) r = {-1.0L / std::sqrt(3.0L), 1.0L / std::sqrt(3.0L)};
    else if (k >= 3) {
        const auto c = legendre_coeffs(k);
        std::vector<long double> dc;
        for (int i = 1; i < static_cast<int>(c.size()); ++i) dc.push_back(i * c[i]);
        const long double pi = std::acos(-1.0L);
        for (int i = 0; i < k; ++i) {
            long double t = -std::cos(pi * (i + 0.75L) / (k + 0.5L));
            for (int it = 0; it < 100; ++it) {
                const long double step = poly_eval(c, t) / poly_eval(dc, t);
                t -= step;
                if (std::abs(step) < 1e-18L) break;
            }
            if (std::abs(poly_eval(c, t)) > 1e-14L) throw std::runtime_error("legendre: root refinement failed");
            r.push_back(t);
        }
        std::sort(r.begin(), r.end());
    }
    return r;
}

}  // namespace detail

struct ProjectionConstants {
    double c1 = 0;
    double c2 = 0;
};

/// c1(n) = sum_k (int_0^1 |p_k|) ||p_k||_inf for the orthonormal shifted Legendre basis,
/// c2(n) = (1 + c1) / (2^{n+1} (n+1)!).
[[nodiscard]] inline ProjectionConstants legendre_projection_constants(int n) {
    if (n < 0 || n > kMaxDegree) throw std::invalid_argument("legendre constants: degree must be in 0..4");
    long double c1 = 0;
    for (int k = 0; k <= n; ++k) {
        const auto c = detail::legendre_coeffs(k);
        auto pts = detail::legendre_roots(k);
        pts.insert(pts.begin(), -1.0L);
        pts.push_back(1.0L);
        long double integral = 0;  // over t in [-1,1]
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            integral += std::abs(detail::poly_antideriv(c, pts[i + 1]) - detail::poly_antideriv(c, pts[i]));
        const long double scale = std::sqrt(2.0L * k + 1.0L);
        // int_0^1 |p_k(x)| dx = scale * (1/2) int_{-1}^{1} |P_k|, ||p_k||_inf = scale
        c1 += scale * integral / 2 * scale;
    }
    ProjectionConstants out;
    out.c1 = round_up(c1);
    out.c2 = round_up((1 + c1) / (std::pow(2.0L, n + 1) * factorial(n + 1)));
    return out;
}

/// c(n,d) = c2 (1 + c1 + ... + c1^{d-1}).
[[nodiscard]] inline double multivariate_error_constant(int n, int d) {
    if (d < 1) throw std::invalid_argument("error constant: d must be >= 1");
    const auto pc = legendre_projection_constants(n);
    long double sum = 0, pw = 1;
    for (int v = 0; v < d; ++v) {
        sum += pw;
        pw *= pc.c1;
    }
    return round_up(pc.c2 * sum);
}

/// Polynomial approximation constant in the p = q = infinity limit.
[[nodiscard]] inline double bramble_hilbert_constant(int n_total, int d, int j) {
    if (j < 0 || j >= n_total) throw std::invalid_argument("bramble-hilbert: need 0 <= j < n_total");
    if (d < 1) throw std::invalid_argument("bramble-hilbert: d must be >= 1");
    // enumerate multi-indices of length d and order m
    auto count_and_sum = [d](int m, bool inverse_sq) {
        long double acc = 0;
        std::vector<int> beta(d, 0);
        std::function<void(int, int)> rec = [&](int axis, int left) {
            if (axis == d - 1) {
                beta[axis] = left;
                if (inverse_sq) {
                    long double f = 1;
                    for (int b : beta) f *= factorial(b);
                    acc += 1.0L / (f * f);
                } else {
                    acc += 1;
                }
                return;
            }
            for (int b = 0; b <= left; ++b) {
                beta[axis] = b;
                rec(axis + 1, left - b);
            }
        };
        rec(0, m);
        return acc;
    };
    const long double num_alpha = count_and_sum(j, false);
    const long double s = count_and_sum(n_total - j, true);
    return static_cast<double>(num_alpha * (n_total - j) * std::sqrt(s));
}

// ---- err multipliers ----

/// (n+1)^n ||Q|| / n! * (2s)(2s+1)...(2s+n); err = value * h^{n+1}.
[[nodiscard]] inline Rational err_coefficient_1d_exact(Rational s, int n) {
    const auto q = make_quasi_interpolant(n);
    Rational pw(1);
    for (int i = 0; i < n; ++i) pw *= Rational(n + 1);
    Rational fact(1);
    for (int i = 2; i <= n; ++i) fact *= Rational(i);
    return pw * q.exact_q_norm / fact * deriv_bound_1d_t<Rational>(s, n + 1);
}

[[nodiscard]] inline double err_coefficient_1d(double s, int n) {
    const auto q = make_quasi_interpolant(n);
    const long double lead = std::pow(static_cast<long double>(n + 1), n) * q.exact_q_norm.to_double() / factorial(n);
    return round_up(lead * deriv_bound_1d_t<long double>(s, n + 1));
}

/// c(n,2) ||Q||_tensor (2n+1)^{n+1} (Cx + Cy); only n = 2 has third-derivative bounds.
[[nodiscard]] inline double err_coefficient_2d(double s, int n) {
    if (n != 2) throw std::invalid_argument("2D err coefficient: only degree 2 is supported");
    const auto q = make_quasi_interpolant(n);
    const auto b = deriv_bounds_2d(s);
    const long double qn = tensor_q_norm(q, 2);
    return round_up(static_cast<long double>(multivariate_error_constant(n, 2)) * qn *
                    std::pow(2.0L * n + 1.0L, n + 1) * (static_cast<long double>(b.Cx) + b.Cy));
}

// ---- certification profile ----

struct ProfileOptions {
    int n = 2;
    std::optional<double> s_cap;       // s used in every constant
    std::optional<double> s_gradient;  // s used for D; defaults to s_cap (1D) or 2 (2D default)
    std::optional<double> M;
    std::optional<double> alpha;
    std::optional<double> beta;
};

struct RigorProfile {
    int d = 1;
    int n = 2;
    double s_cap = 1.0;
    double s_gradient = 1.0;
    double err_s = 1.0;  // s in the err multiplier (second pass of the planar procedure lowers it)
    double K = 4.0;
    double A = 0.25, B = 4.0, D = 2.0;
    double M = 36.0;
    double alpha = 0.05, beta = 0.05;
    double q_norm = 1.5;           // 1D norm or tensor norm
    double derivative_bound = 96;  // bound on the (n+1)-th derivatives entering C1
    double C1 = 0, C2 = 0;
    double err_coefficient = 162;  // at err_s

    [[nodiscard]] double err_at(double h) const { return err_coefficient * std::pow(h, n + 1); }
};

[[nodiscard]] inline double err_coefficient_for(int d, double s, int n) {
    return d == 1 ? err_coefficient_1d(s, n) : err_coefficient_2d(s, n);
}

[[nodiscard]] inline RigorProfile make_profile(const Alphabet& a, const ProfileOptions& opt = {}) {
    RigorProfile p;
    p.d = a.d;
    p.n = opt.n;
    if (p.n < 1 || p.n > kMaxDegree) throw std::invalid_argument("profile: degree must be in 1..4");
    const auto q = make_quasi_interpolant(p.n);
    p.K = distortion_K(a);
    if (a.d == 1) {
        p.s_cap = opt.s_cap.value_or(1.0);
        p.s_gradient = opt.s_gradient.value_or(p.s_cap);
        p.M = opt.M.value_or(36.0);
        p.alpha = opt.alpha.value_or(0.05);
        p.beta = opt.beta.value_or(0.05);
        p.q_norm = q.q_norm;
        p.A = 1.0 / round_up(std::pow(static_cast<long double>(p.K), p.s_cap));
        p.B = round_up(std::pow(static_cast<long double>(p.K), p.s_cap));
        p.D = deriv_bound_1d(p.s_gradient, 1);
        p.derivative_bound = round_up(static_cast<long double>(deriv_bound_1d(p.s_cap, p.n + 1)) * p.B);
        const int n = p.n;
        p.C1 = round_up(2.0L * std::pow(n + 1.0L, n - 1) * p.q_norm / factorial(n - 1) * p.derivative_bound);
        p.C2 = round_up(std::pow(n + 1.0L, n) * p.q_norm / factorial(n) * p.derivative_bound);
    } else {
        if (p.n != 2) throw std::invalid_argument("profile: planar certification needs degree 2");
        p.s_cap = opt.s_cap.value_or(kS0);
        p.s_gradient = opt.s_gradient.value_or(opt.s_cap ? *opt.s_cap : 2.0);
        p.M = opt.M.value_or(787.0);
        p.alpha = opt.alpha.value_or(0.01);
        p.beta = opt.beta.value_or(0.01);
        p.q_norm = tensor_q_norm(q, 2);
        p.A = 1.0 / round_up(std::pow(static_cast<long double>(p.K), p.s_cap));
        p.B = round_up(std::pow(static_cast<long double>(p.K), p.s_cap));
        p.D = deriv_bounds_2d(p.s_gradient).grad_ratio;
        const auto b = deriv_bounds_2d(p.s_cap);
        p.derivative_bound = b.w3_seminorm();
        const long double d = 2, n = p.n;
        const long double bh1 = bramble_hilbert_constant(p.n + 1, 2, 1);
        const long double bh0 = bramble_hilbert_constant(p.n + 1, 2, 0);
        p.C1 = round_up(std::sqrt(d) *
                        (bh1 * std::pow(2 * n + 1, n) * std::pow(d, n / 2) +
                         2 * p.q_norm * bh0 * std::pow(2 * n + 1, n + 1) * std::pow(d, (n + 1) / 2)) *
                        p.derivative_bound);
        p.C2 = err_coefficient_2d(p.s_cap, p.n);
    }
    if (!(p.alpha > 0 && p.alpha < 1 && p.beta > 0 && p.beta < 1))
        throw std::invalid_argument("profile: alpha and beta must lie in (0,1)");
    if (!(p.M > 0)) throw std::invalid_argument("profile: M must be positive");
    p.err_s = p.s_cap;
    p.err_coefficient = err_coefficient_for(p.d, p.err_s, p.n);
    return p;
}

/// Same profile with the err multiplier evaluated at a different s.
[[nodiscard]] inline RigorProfile with_err_s(RigorProfile p, double s) {
    p.err_s = s;
    p.err_coefficient = err_coefficient_for(p.d, s, p.n);
    return p;
}

/// M'(n,h) = (DB + C1 h^n) / (A - C2 h^{n+1}).
[[nodiscard]] inline double cone_image_parameter(const RigorProfile& p, double h) {
    const double den = p.A - p.C2 * std::pow(h, p.n + 1);
    if (!(den > 0)) throw std::domain_error("cone image parameter: mesh too coarse (A - C2 h^{n+1} <= 0)");
    return round_up((static_cast<long double>(p.D) * p.B + p.C1 * std::pow(static_cast<long double>(h), p.n)) / den);
}

struct AdmissibilityReport {
    double positivity = 0;  // hidden positivity condition at M
    double alpha = 0;       // C1 h^n < alpha D B
    double beta = 0;        // C2 h^{n+1} < beta A
    double resolution = 0;  // h < 1 / max E
    double hmax = 0;        // minimum of the above

    struct Entry {
        std::string name;
        double bound;
    };
    [[nodiscard]] std::vector<Entry> entries() const {
        return {{"positivity", positivity}, {"alpha", alpha}, {"beta", beta}, {"resolution", resolution}};
    }
};

[[nodiscard]] inline AdmissibilityReport admissible_h(const RigorProfile& p, const Alphabet& a) {
    AdmissibilityReport r;
    const auto q = make_quasi_interpolant(p.n);
    r.positivity = positivity_threshold(q, p.d, p.M);
    r.alpha = std::pow(p.alpha * p.D * p.B / p.C1, 1.0 / p.n);
    r.beta = std::pow(p.beta * p.A / p.C2, 1.0 / (p.n + 1));
    r.resolution = 1.0 / a.resolution_scale();
    r.hmax = std::min({r.positivity, r.alpha, r.beta, r.resolution});
    return r;
}

}  // namespace fracdim
