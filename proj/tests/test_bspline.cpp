#include <gtest/gtest.h>

#include <random>

#include <fracdim/bspline.hpp>

#include "oracles.hpp"

using namespace fracdim;

TEST(Knots, UniformLayout) {
    const auto ks = make_uniform_knots(0.0, 1.0, 10, 2);
    ASSERT_EQ(ks.knots.size(), 15u);
    EXPECT_DOUBLE_EQ(ks.knots[0], -0.2);
    EXPECT_EQ(ks.knots[2], 0.0);
    EXPECT_EQ(ks.knots[12], 1.0);
    EXPECT_EQ(ks.num_splines(), 12);
    EXPECT_EQ(ks.num_intervals(), 14);
    auto [lo, hi] = parameter_interval(ks);
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
    EXPECT_DOUBLE_EQ(ks.midpoint(0), -0.15);
    EXPECT_DOUBLE_EQ(ks.midpoint(2), 0.05);
}

TEST(Knots, ShiftedDomain) {
    const auto ks = make_uniform_knots(-0.5, 0.5, 4, 3);
    EXPECT_DOUBLE_EQ(ks.h, 0.25);
    EXPECT_DOUBLE_EQ(ks.knots.front(), -1.25);
    EXPECT_EQ(ks.knots[3], -0.5);
    EXPECT_EQ(ks.knots[7], 0.5);
}

TEST(Knots, RejectsBadInput) {
    EXPECT_THROW((void)make_uniform_knots(1.0, 0.0, 4, 2), std::invalid_argument);
    EXPECT_THROW((void)make_uniform_knots(0.0, 1.0, 0, 2), std::invalid_argument);
    EXPECT_THROW((void)make_uniform_knots(0.0, 1.0, 4, 5), std::invalid_argument);
}

TEST(Knots, LocateInterval) {
    const auto ks = make_uniform_knots(0.0, 1.0, 4, 2);
    EXPECT_EQ(locate_interval(ks, -0.5), 0);
    EXPECT_EQ(locate_interval(ks, 0.0), 2);
    EXPECT_EQ(locate_interval(ks, 0.3), 3);
    EXPECT_EQ(locate_interval(ks, 1.5), 7);  // closed last interval
    EXPECT_THROW((void)locate_interval(ks, 1.6), std::domain_error);
    EXPECT_THROW((void)locate_interval(ks, -0.51), std::domain_error);
}

class PartitionOfUnity : public ::testing::TestWithParam<int> {};

TEST_P(PartitionOfUnity, SumsToOneOnParameterInterval) {
    const int n = GetParam();
    std::mt19937_64 rng(7 + n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int J : {1, 3, 10, 37}) {
        const auto ks = make_uniform_knots(0.0, 1.0, J, n);
        for (int t = 0; t < 200; ++t) {
            const double x = t == 0 ? 0.0 : (t == 1 ? 1.0 : u(rng));
            double sum = 0.0;
            for (int k = 0; k < ks.num_splines(); ++k) {
                const double b = eval_bspline(ks, k, x);
                EXPECT_GE(b, 0.0);
                sum += b;
            }
            EXPECT_NEAR(sum, 1.0, 1e-13) << "n=" << n << " J=" << J << " x=" << x;
        }
    }
}

TEST_P(PartitionOfUnity, LocalBasisMatchesRecurrence) {
    const int n = GetParam();
    const auto ks = make_uniform_knots(0.0, 1.0, 9, n);
    std::mt19937_64 rng(11 + n);
    std::uniform_real_distribution<double> u(ks.knots.front(), ks.knots.back());
    for (int t = 0; t < 300; ++t) {
        const double x = u(rng);
        const auto lb = uniform_local_basis(ks, x);
        for (int i = 0; i <= n; ++i) {
            const int k = lb.first + i;
            if (k < 0 || k >= ks.num_splines()) continue;
            EXPECT_NEAR(lb.values[i], eval_bspline(ks, k, x), 1e-14);
        }
    }
}

TEST_P(PartitionOfUnity, LocalSupport) {
    const int n = GetParam();
    const auto ks = make_uniform_knots(0.0, 1.0, 8, n);
    for (int k = 0; k < ks.num_splines(); ++k) {
        const double a = ks.knots[k], b = ks.knots[k + n + 1];
        const double outside_left = a - 0.25 * ks.h;
        const double outside_right = b + 0.25 * ks.h;
        if (outside_left >= ks.knots.front()) {
            EXPECT_EQ(eval_bspline(ks, k, outside_left), 0.0);
        }
        if (outside_right <= ks.knots.back()) {
            EXPECT_EQ(eval_bspline(ks, k, outside_right), 0.0);
        }
        EXPECT_GT(eval_bspline(ks, k, 0.5 * (a + b)), 0.0);
    }
}

TEST_P(PartitionOfUnity, DerivativeMatchesFiniteDifference) {
    const int n = GetParam();
    if (n == 0) GTEST_SKIP();
    const auto ks = make_uniform_knots(0.0, 1.0, 6, n);
    std::mt19937_64 rng(3 + n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        double x = u(rng);
        // stay away from knots, where lower-degree pieces are not smooth
        const double frac = (x - ks.knots.front()) / ks.h - std::floor((x - ks.knots.front()) / ks.h);
        if (frac < 0.01 || frac > 0.99) continue;
        for (int k = 0; k < ks.num_splines(); ++k) {
            const auto f = [&](double y) { return eval_bspline(ks, k, y); };
            EXPECT_NEAR(eval_bspline_derivative(ks, k, x), oracle::finite_difference(f, x, 1, 1e-6), 1e-6);
        }
    }
}

TEST_P(PartitionOfUnity, DerivativesSumToZero) {
    const int n = GetParam();
    if (n == 0) GTEST_SKIP();
    const auto ks = make_uniform_knots(0.0, 1.0, 5, n);
    for (double x : {0.05, 0.31, 0.77, 0.99}) {
        double sum = 0.0;
        for (int k = 0; k < ks.num_splines(); ++k) sum += eval_bspline_derivative(ks, k, x);
        EXPECT_NEAR(sum, 0.0, 1e-10);
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, PartitionOfUnity, ::testing::Values(0, 1, 2, 3, 4));

TEST(Bspline, QuadraticClosedForm) {
    // b_0 on knots -2h..h (n=2, J=4, h=1/4) is the standard quadratic hat.
    const auto ks = make_uniform_knots(0.0, 1.0, 4, 2);
    const double h = 0.25;
    for (double x : {-0.4, -0.3, -0.1, 0.0, 0.1, 0.2}) {
        const double t = (x + 2 * h) / h;  // 0..3
        double expected = 0.0;
        if (t < 1) expected = 0.5 * t * t;
        else if (t < 2) expected = 0.5 * (-2 * t * t + 6 * t - 3);
        else if (t < 3) expected = 0.5 * (3 - t) * (3 - t);
        EXPECT_NEAR(eval_bspline(ks, 0, x), expected, 1e-14) << x;
    }
}

TEST(Bspline, ErrorsOutsideSpanOrIndex) {
    const auto ks = make_uniform_knots(0.0, 1.0, 4, 2);
    EXPECT_THROW((void)eval_bspline(ks, -1, 0.5), std::out_of_range);
    EXPECT_THROW((void)eval_bspline(ks, 6, 0.5), std::out_of_range);
    EXPECT_THROW((void)eval_bspline(ks, 0, 2.0), std::domain_error);
    const auto k0 = make_uniform_knots(0.0, 1.0, 4, 0);
    EXPECT_THROW((void)eval_bspline_derivative(k0, 0, 0.5), std::invalid_argument);
    EXPECT_THROW((void)uniform_local_basis(ks, 3.0), std::domain_error);
}

TEST(Bspline, RelevantIndices) {
    const auto ks = make_uniform_knots(0.0, 1.0, 4, 2);
    const auto idx = relevant_indices(ks, 0.3);
    ASSERT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx.front(), 1);
    EXPECT_EQ(idx.back(), 3);
    for (int k : idx) EXPECT_GT(eval_bspline(ks, k, 0.3), 0.0);
    // at a knot the spline starting there vanishes
    const auto at_knot = relevant_indices(ks, 0.25);
    EXPECT_EQ(at_knot.size(), 2u);
}

TEST(Tensor, FlattenRoundTrip) {
    const int J = 7;
    for (int jy = 1; jy <= J; ++jy)
        for (int jx = 1; jx <= J; ++jx) {
            const int j = flatten_index(jx, jy, J);
            EXPECT_GE(j, 1);
            EXPECT_LE(j, J * J);
            EXPECT_EQ(unflatten_index(j, J), std::make_pair(jx, jy));
        }
}

TEST(Tensor, ProductPartitionOfUnity) {
    const auto g = make_tensor_grid({{0.0, 1.0}, {-0.5, 0.5}}, 6, 2);
    EXPECT_EQ(g.d, 2);
    EXPECT_DOUBLE_EQ(g.h(), 1.0 / 6);
    for (double x : {0.0, 0.4, 1.0})
        for (double y : {-0.5, 0.1, 0.5}) {
            double sum = 0.0;
            for (int ky = 0; ky < 8; ++ky)
                for (int kx = 0; kx < 8; ++kx) sum += eval_tensor_bspline(g, {kx, ky}, {x, y});
            EXPECT_NEAR(sum, 1.0, 1e-13);
        }
    EXPECT_THROW((void)eval_tensor_bspline(g, {0}, {0.1, 0.1}), std::invalid_argument);
    EXPECT_THROW((void)make_tensor_grid({{0.0, 1.0}, {0.0, 2.0}}, 4, 2), std::invalid_argument);
}
