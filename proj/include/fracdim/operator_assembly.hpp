#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bspline.hpp"
#include "cifs_maps.hpp"
#include "parallel.hpp"
#include "quasi_interpolant.hpp"

namespace fracdim {

/// Mesh and sample layout shared by the assembled matrix and the matrix-free operator.
///
/// Samples live at all P = J+2n midpoints per axis (the outer n on each side
/// lie in the expanded mesh), flattened as px + P*py. Spline coefficients are
/// indexed kx + C*ky with C = J+n.
struct Discretization {
    int d = 1;
    int J = 0;
    int n = 2;
    TensorGrid grid;
    QuasiInterpolant q;
    int P = 0;
    int C = 0;
    std::size_t N = 0;
    std::size_t num_coeffs = 0;

    [[nodiscard]] double h() const { return grid.h(); }
    [[nodiscard]] const KnotSequence& axis(int a) const { return grid.axes[a]; }
    [[nodiscard]] Point2 sample_point(std::size_t p) const {
        if (d == 1) return {axis(0).midpoint(static_cast<int>(p)), 0.0};
        return {axis(0).midpoint(static_cast<int>(p % P)), axis(1).midpoint(static_cast<int>(p / P))};
    }
};

[[nodiscard]] inline Discretization make_discretization(int d, int J, int n) {
    if (d != 1 && d != 2) throw std::invalid_argument("discretization: d must be 1 or 2");
    Discretization D;
    D.d = d;
    D.J = J;
    D.n = n;
    if (d == 1)
        D.grid = make_tensor_grid({{0.0, 1.0}}, J, n);
    else
        D.grid = make_tensor_grid({{0.0, 1.0}, {-0.5, 0.5}}, J, n);
    D.q = make_quasi_interpolant(n);
    D.P = J + 2 * n;
    D.C = J + n;
    D.N = d == 1 ? static_cast<std::size_t>(D.P) : static_cast<std::size_t>(D.P) * D.P;
    D.num_coeffs = d == 1 ? static_cast<std::size_t>(D.C) : static_cast<std::size_t>(D.C) * D.C;
    return D;
}

/// Image of sample p under letter e: local bases on each axis and log |D phi|^{-1}.
struct ImageTerm {
    LocalBasis bx;
    LocalBasis by;
    double log_base = 0.0;  // |D phi_e|^s = exp(-s * log_base)
};

// Every spline vanishes beyond the knot span; an empty basis keeps the indices out of range.
[[nodiscard]] inline LocalBasis basis_or_empty(const KnotSequence& ks, double x) {
    if (x < ks.knots.front() || x > ks.knots.back()) {
        LocalBasis empty;
        empty.first = ks.num_splines();
        return empty;
    }
    return uniform_local_basis(ks, x);
}

[[nodiscard]] inline ImageTerm image_term(const Discretization& D, const Letter& e, std::size_t p) {
    ImageTerm t;
    const Point2 x = D.sample_point(p);
    if (D.d == 1) {
        const double a = x.x + static_cast<double>(e.e1);
        if (!(a > 0)) throw std::domain_error("assembly: sample point outside the map domain");
        t.bx = basis_or_empty(D.axis(0), 1.0 / a);
        t.log_base = 2.0 * std::log(a);
    } else {
        const double a = x.x + static_cast<double>(e.e1);
        const double b = x.y + static_cast<double>(e.e2);
        const double r2 = a * a + b * b;
        t.bx = basis_or_empty(D.axis(0), a / r2);
        t.by = basis_or_empty(D.axis(1), b / r2);
        t.log_base = std::log(r2);
    }
    return t;
}

/// Compressed sparse rows with sorted columns.
struct TransferMatrix {
    std::size_t N = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::int32_t> cols;
    std::vector<double> vals;
    double s = 0.0;
    double h = 0.0;
    int n = 0;
    int d = 1;
    int J = 0;
    std::uint64_t alphabet_hash = 0;

    [[nodiscard]] std::size_t size() const { return N; }
    [[nodiscard]] std::size_t nnz() const { return vals.size(); }

    void apply(std::span<const double> x, std::span<double> y, int threads = 1) const {
        parallel_for(N, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t r = b; r < e; ++r) {
                double acc = 0.0;
                for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += vals[k] * x[cols[k]];
                y[r] = acc;
            }
        });
    }

    [[nodiscard]] double entry(std::size_t r, std::size_t c) const {
        auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
        auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
        auto it = std::lower_bound(first, last, static_cast<std::int32_t>(c));
        if (it == last || *it != static_cast<std::int32_t>(c)) return 0.0;
        return vals[static_cast<std::size_t>(it - cols.begin())];
    }

    [[nodiscard]] TransferMatrix scaled(double factor) const {
        TransferMatrix m = *this;
        for (auto& v : m.vals) v *= factor;
        return m;
    }

    /// Header line then one "row<TAB>col<TAB>value" triplet per entry, 1-based.
    void dump(std::ostream& os) const {
        char buf[128];
        std::snprintf(buf, sizeof buf, "# N=%zu s=%.17g h=%.17g n=%d d=%d\n", N, s, h, n, d);
        os << buf;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                std::snprintf(buf, sizeof buf, "%zu\t%d\t%.17g\n", r + 1, cols[k] + 1, vals[k]);
                os << buf;
            }
    }
};

namespace detail {

// Row r of L = G W: sum over letters, splines, weights in that fixed order.
inline void assemble_row(const Discretization& D, const Alphabet& a, double s, std::size_t r,
                         std::vector<std::pair<std::int32_t, double>>& row) {
    row.clear();
    const int n = D.n;
    const auto& w = D.q.weights;
    for (const auto& e : a.letters) {
        const ImageTerm t = image_term(D, e, r);
        const double fac = std::exp(-s * t.log_base);
        if (D.d == 1) {
            for (int i = 0; i <= n; ++i) {
                const int k = t.bx.first + i;
                if (k < 0 || k >= D.C) continue;
                for (int v = 0; v <= n; ++v) row.emplace_back(k + v, fac * t.bx.values[i] * w[v]);
            }
        } else {
            for (int iy = 0; iy <= n; ++iy) {
                const int ky = t.by.first + iy;
                if (ky < 0 || ky >= D.C) continue;
                for (int ix = 0; ix <= n; ++ix) {
                    const int kx = t.bx.first + ix;
                    if (kx < 0 || kx >= D.C) continue;
                    const double b = fac * t.bx.values[ix] * t.by.values[iy];
                    for (int vy = 0; vy <= n; ++vy)
                        for (int vx = 0; vx <= n; ++vx)
                            row.emplace_back((kx + vx) + D.P * (ky + vy), b * w[vx] * w[vy]);
                }
            }
        }
    }
    // merge duplicates in insertion order per column
    std::stable_sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (out > 0 && row[out - 1].first == row[i].first)
            row[out - 1].second += row[i].second;
        else
            row[out++] = row[i];
    }
    row.resize(out);
}

}  // namespace detail

/// Explicit matrix with (L f)_p = L_s(Qf)(x_p) for samples f at every midpoint.
[[nodiscard]] inline TransferMatrix assemble(const Alphabet& a, double s, const Discretization& D, int threads = 1) {
    if (a.d != D.d) throw std::invalid_argument("assembly: alphabet and mesh dimensions differ");
    if (D.N > static_cast<std::size_t>(INT32_MAX)) throw std::length_error("assembly: mesh too large");
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows(D.N);
    parallel_for(D.N, threads, [&](std::size_t b, std::size_t e) {
        std::vector<std::pair<std::int32_t, double>> scratch;
        for (std::size_t r = b; r < e; ++r) {
            detail::assemble_row(D, a, s, r, scratch);
            rows[r] = scratch;
        }
    });
    TransferMatrix m;
    m.N = D.N;
    m.s = s;
    m.h = D.h();
    m.n = D.n;
    m.d = D.d;
    m.J = D.J;
    m.alphabet_hash = a.hash();
    m.row_ptr.assign(D.N + 1, 0);
    for (std::size_t r = 0; r < D.N; ++r) m.row_ptr[r + 1] = m.row_ptr[r] + rows[r].size();
    m.cols.reserve(m.row_ptr.back());
    m.vals.reserve(m.row_ptr.back());
    for (auto& row : rows) {
        for (auto [c, v] : row) {
            m.cols.push_back(c);
            m.vals.push_back(v);
        }
        std::vector<std::pair<std::int32_t, double>>().swap(row);
    }
    return m;
}

[[nodiscard]] inline TransferMatrix assemble_1d(const Alphabet& a, double s, const KnotSequence& ks,
                                                const QuasiInterpolant& q, int threads = 1) {
    if (a.d != 1) throw std::invalid_argument("assemble_1d: alphabet must be 1D");
    if (ks.domain_lo != 0.0 || ks.domain_hi != 1.0) throw std::invalid_argument("assemble_1d: domain must be [0,1]");
    if (q.degree != ks.degree) throw std::invalid_argument("assemble_1d: degree mismatch");
    return assemble(a, s, make_discretization(1, ks.J, ks.degree), threads);
}

[[nodiscard]] inline TransferMatrix assemble_2d(const Alphabet& a, double s, const TensorGrid& g,
                                                const QuasiInterpolant& q, int threads = 1) {
    if (a.d != 2 || g.d != 2) throw std::invalid_argument("assemble_2d: alphabet and grid must be 2D");
    if (q.degree != g.degree()) throw std::invalid_argument("assemble_2d: degree mismatch");
    return assemble(a, s, make_discretization(2, g.J(), g.degree()), threads);
}

struct ScaledPair {
    TransferMatrix A;
    TransferMatrix B;
    double err = 0.0;
};

[[nodiscard]] inline ScaledPair scale_pair(const TransferMatrix& L, double err) {
    if (!(err >= 0.0 && err < 1.0)) throw std::domain_error("scale_pair: err must lie in [0,1)");
    return {L.scaled(1.0 - err), L.scaled(1.0 + err), err};
}

/// Matrix-free L_s = G W. Image geometry is computed once per mesh and reused
/// across s; set_s only recomputes the derivative factors.
class TransferOperator {
public:
    TransferOperator(Alphabet a, Discretization D, int threads = 1, std::size_t memory_budget = std::size_t{2} << 30)
        : a_(std::move(a)), D_(std::move(D)), threads_(std::max(threads, 1)) {
        if (a_.d != D_.d) throw std::invalid_argument("operator: alphabet and mesh dimensions differ");
        const std::size_t terms = D_.N * a_.size();
        const std::size_t m = static_cast<std::size_t>(D_.n + 1);
        const std::size_t bytes = terms * (2 * sizeof(std::int32_t) + (2 * m + 2) * sizeof(double));
        cached_ = bytes <= memory_budget;
        if (cached_) precompute();
        coeffs_.resize(D_.num_coeffs);
    }

    [[nodiscard]] std::size_t size() const { return D_.N; }
    [[nodiscard]] const Discretization& discretization() const { return D_; }
    [[nodiscard]] const Alphabet& alphabet() const { return a_; }
    [[nodiscard]] double s() const { return s_; }
    [[nodiscard]] bool cached() const { return cached_; }
    [[nodiscard]] int threads() const { return threads_; }
    void set_threads(int t) { threads_ = std::max(t, 1); }

    void set_s(double s) {
        s_ = s;
        if (!cached_) return;
        factor_.resize(log_base_.size());
        parallel_for(log_base_.size(), threads_, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) factor_[i] = std::exp(-s * log_base_[i]);
        });
    }

    /// y = L x. Not reentrant: uses an internal coefficient buffer.
    void apply(std::span<const double> x, std::span<double> y) {
        if (x.size() != D_.N || y.size() != D_.N) throw std::invalid_argument("operator: vector size mismatch");
        compute_coefficients(x);
        const std::size_t L = a_.size();
        parallel_for(D_.N, threads_, [&](std::size_t b, std::size_t e) {
            for (std::size_t r = b; r < e; ++r) {
                double acc = 0.0;
                for (std::size_t li = 0; li < L; ++li) {
                    if (cached_) {
                        acc += factor_[r * L + li] * cached_term(r * L + li);
                    } else {
                        const ImageTerm t = image_term(D_, a_.letters[li], r);
                        acc += std::exp(-s_ * t.log_base) * term_sum(t.bx, t.by);
                    }
                }
                y[r] = acc;
            }
        });
    }

private:
    void precompute() {
        const std::size_t L = a_.size();
        const std::size_t T = D_.N * L;
        const std::size_t m = static_cast<std::size_t>(D_.n + 1);
        first_x_.resize(T);
        bx_.resize(T * m);
        log_base_.resize(T);
        if (D_.d == 2) {
            first_y_.resize(T);
            by_.resize(T * m);
        }
        parallel_for(D_.N, threads_, [&](std::size_t b, std::size_t e) {
            for (std::size_t r = b; r < e; ++r)
                for (std::size_t li = 0; li < L; ++li) {
                    const std::size_t idx = r * L + li;
                    const ImageTerm t = image_term(D_, a_.letters[li], r);
                    first_x_[idx] = t.bx.first;
                    for (std::size_t i = 0; i < m; ++i) bx_[idx * m + i] = t.bx.values[i];
                    if (D_.d == 2) {
                        first_y_[idx] = t.by.first;
                        for (std::size_t i = 0; i < m; ++i) by_[idx * m + i] = t.by.values[i];
                    }
                    log_base_[idx] = t.log_base;
                }
        });
    }

    void compute_coefficients(std::span<const double> f) {
        const int n = D_.n;
        const auto& w = D_.q.weights;
        const int C = D_.C;
        const int P = D_.P;
        if (D_.d == 1) {
            for (int k = 0; k < C; ++k) {
                double c = 0.0;
                for (int v = 0; v <= n; ++v) c += w[v] * f[k + v];
                coeffs_[k] = c;
            }
            return;
        }
        parallel_for(static_cast<std::size_t>(C), threads_, [&](std::size_t b, std::size_t e) {
            for (std::size_t ky = b; ky < e; ++ky)
                for (int kx = 0; kx < C; ++kx) {
                    double c = 0.0;
                    for (int vy = 0; vy <= n; ++vy) {
                        double inner = 0.0;
                        const std::size_t base = static_cast<std::size_t>(kx) + static_cast<std::size_t>(P) * (ky + vy);
                        for (int vx = 0; vx <= n; ++vx) inner += w[vx] * f[base + vx];
                        c += w[vy] * inner;
                    }
                    coeffs_[static_cast<std::size_t>(kx) + static_cast<std::size_t>(C) * ky] = c;
                }
        });
    }

    [[nodiscard]] double cached_term(std::size_t idx) const {
        const int m = D_.n + 1;
        const int C = D_.C;
        const double* bx = &bx_[idx * m];
        const int fx = first_x_[idx];
        if (D_.d == 1) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) {
                const int k = fx + i;
                if (k >= 0 && k < C) acc += bx[i] * coeffs_[k];
            }
            return acc;
        }
        const double* by = &by_[idx * m];
        const int fy = first_y_[idx];
        double acc = 0.0;
        for (int iy = 0; iy < m; ++iy) {
            const int ky = fy + iy;
            if (ky < 0 || ky >= C) continue;
            double inner = 0.0;
            const double* row = &coeffs_[static_cast<std::size_t>(C) * ky];
            for (int ix = 0; ix < m; ++ix) {
                const int kx = fx + ix;
                if (kx >= 0 && kx < C) inner += bx[ix] * row[kx];
            }
            acc += by[iy] * inner;
        }
        return acc;
    }

    [[nodiscard]] double term_sum(const LocalBasis& bx, const LocalBasis& by) const {
        const int m = D_.n + 1;
        const int C = D_.C;
        if (D_.d == 1) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) {
                const int k = bx.first + i;
                if (k >= 0 && k < C) acc += bx.values[i] * coeffs_[k];
            }
            return acc;
        }
        double acc = 0.0;
        for (int iy = 0; iy < m; ++iy) {
            const int ky = by.first + iy;
            if (ky < 0 || ky >= C) continue;
            double inner = 0.0;
            for (int ix = 0; ix < m; ++ix) {
                const int kx = bx.first + ix;
                if (kx >= 0 && kx < C) inner += bx.values[ix] * coeffs_[static_cast<std::size_t>(kx) + static_cast<std::size_t>(C) * ky];
            }
            acc += by.values[iy] * inner;
        }
        return acc;
    }

    Alphabet a_;
    Discretization D_;
    int threads_ = 1;
    bool cached_ = false;
    double s_ = 0.0;
    std::vector<std::int32_t> first_x_, first_y_;
    std::vector<double> bx_, by_, log_base_, factor_;
    std::vector<double> coeffs_;
};

}  // namespace fracdim
