// Acceptance harness: one PASS/FAIL line per criterion.
// Set FRACDIM_SKIP_SLOW=1 to skip the long planar runs (reported as SKIP, counted as failures).
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include <fracdim/dimension_solver.hpp>
#include <fracdim/quasi_interpolant.hpp>
#include <fracdim/rigor_constants.hpp>

#include "oracles.hpp"

using namespace fracdim;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void note(const char* id, const std::string& detail) {
    std::printf("NOTE %s: %s\n", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool slow_skipped() {
    const char* v = std::getenv("FRACDIM_SKIP_SLOW");
    return v && std::string(v) == "1";
}

const Alphabet kE12 = parse_alphabet("1,2");
const Alphabet kPlanar4 = parse_alphabet("(1,0),(1,1),(1,-1),(2,0)");
const Alphabet kLine9 = parse_alphabet("(1,0),(1,1),(1,-1),(1,2),(1,-2),(1,3),(1,-3),(1,4),(1,-4)");

double estimate(const Alphabet& a, int J) {
    return solve_dimension(make_solve_config(a, J, Mode::estimate)).estimate();
}

// labels 1/N with N-1 intervals for the 1D sweeps
std::vector<MeshSpec> nodes_sweep(long first, long last) {
    std::vector<MeshSpec> m;
    for (long N = first; N <= last; N *= 2) m.push_back({"1/" + std::to_string(N), 1.0 / N, static_cast<int>(N - 1)});
    return m;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = convergence_study(make_solve_config(kE12, 24, Mode::estimate), nodes_sweep(25, 3200), 0.531280506277205);
    const double secs = seconds_since(t0);
    const double s = rows.back().s;
    const double expected_rates[] = {3.040, 3.521, 3.601, 3.655};
    bool rates_ok = true;
    std::string rates;
    for (int i = 0; i < 4; ++i) {
        const auto& r = rows[rows.size() - 4 + i].rate;
        rates_ok = rates_ok && r && std::abs(*r - expected_rates[i]) <= 0.5;
        rates += fmt(" %.3f(%.3f)", r ? *r : NAN, expected_rates[i]);
    }
    const bool ok = std::abs(s - 0.531280506277204) <= 2e-12 && secs < 120 && rates_ok;
    report("C1", ok,
           fmt("E={1,2} s(1/3200)=%.15f |diff|=%.2e, sweep %.1fs, last rates%s", s, std::abs(s - 0.531280506277204), secs,
               rates.c_str()));
}

void criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    const double s = estimate(parse_alphabet("1..34"), 3199);
    const double secs = seconds_since(t0);
    const double d = std::abs(s - 0.980419625226979);
    report("C2", d <= 5e-12 && secs < 600, fmt("E={1..34} s(1/3200)=%.15f |diff|=%.2e, %.1fs", s, d, secs));
}

void criterion3() {
    const double known = 0.531280506277205;
    auto t0 = std::chrono::steady_clock::now();
    const auto b = solve_dimension(make_solve_config(kE12, 10000, Mode::certified));
    const double secs = seconds_since(t0);
    const bool ok = b.s_lo <= known && known <= b.s_hi && b.width() <= 1e-8;
    report("C3", ok, fmt("h=1e-4 [%.15f, %.15f] width %.3e, %.2fs", b.s_lo, b.s_hi, b.width(), secs));

    // the 1e-5 run scales linearly in J
    const double predicted = 10.0 * secs;
    if (predicted > 1800) {
        note("C3", fmt("h=1e-5 run skipped, predicted %.0fs exceeds 30 minutes", predicted));
        return;
    }
    t0 = std::chrono::steady_clock::now();
    const auto f = solve_dimension(make_solve_config(kE12, 100000, Mode::certified));
    const double secs5 = seconds_since(t0);
    const bool ok5 = f.s_lo <= known && known <= f.s_hi && f.width() <= 2.7e-12;
    report("C3/1e-5", ok5,
           fmt("h=1e-5 [%.15f, %.15f] width %.3e (reference width 2.7e-12), %.1fs", f.s_lo, f.s_hi, f.width(), secs5));
}

void criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    const double s = estimate(kPlanar4, 400);
    const double secs = seconds_since(t0);
    const double d = std::abs(s - 1.149577146906169);
    report("C4", d <= 1e-9 && secs < 900, fmt("planar 4 letters s(1/400)=%.15f |diff|=%.2e, %.1fs", s, d, secs));

    if (slow_skipped()) {
        report("C4/certified", false, "SKIP (FRACDIM_SKIP_SLOW=1)");
        return;
    }
    ProfileOptions o;
    o.s_cap = 1.15;
    o.alpha = 0.2;
    o.beta = 0.2;
    o.M = 100;
    auto cfg = make_solve_config(kPlanar4, 1250, Mode::certified, o);
    cfg.threads = default_thread_count();
    t0 = std::chrono::steady_clock::now();
    const auto b = two_step_refinement(cfg);
    const double secs2 = seconds_since(t0);
    const bool ok = b.s_lo <= 1.1495767 && 1.1495775 <= b.s_hi;
    report("C4/certified", ok,
           fmt("h=1/1250 relaxed profile (M=100, s_cap=1.15, alpha=beta=0.2, hmax=%.5f, M'=%.2f) [%.15f, %.15f] "
               "contains [1.1495767, 1.1495775], %.1fs",
               b.admissibility->hmax, b.M_prime, b.s_lo, b.s_hi, secs2));
}

void criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const double s50 = estimate(kLine9, 50), s100 = estimate(kLine9, 100), s200 = estimate(kLine9, 200);
    const double d100 = std::abs(s50 - s100), d200 = std::abs(s100 - s200);
    const double r100 = d100 / 2.5239119490e-5, r200 = d200 / 1.424850e-9;
    const bool ok = r100 >= 0.2 && r100 <= 5 && r200 >= 0.2 && r200 <= 5;
    report("C5", ok,
           fmt("line alphabet s(1/50)=%.15f s(1/100)=%.15f s(1/200)=%.15f; delta(1/100)=%.4e (ratio %.3g to 2.5239e-5), "
               "delta(1/200)=%.4e (ratio %.3g to 1.42485e-9), %.1fs",
               s50, s100, s200, d100, r100, d200, r200, seconds_since(t0)));
}

void criterion6() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double pu = 0, rep = 0;
    for (int n = 1; n <= 4; ++n) {
        const auto ks = make_uniform_knots(0.0, 1.0, 13, n);
        const auto [lo, hi] = parameter_interval(ks);
        const auto q = make_quasi_interpolant(n);
        for (int t = 0; t < 200; ++t) {
            const double x = lo + (hi - lo) * u(rng);
            double sum = 0;
            for (int k : relevant_indices(ks, x)) sum += eval_bspline(ks, k, x);
            pu = std::max(pu, std::abs(sum - 1));
            for (int p = 0; p <= n; ++p) {
                std::vector<double> samples(static_cast<std::size_t>(ks.num_intervals()));
                for (int i = 0; i < ks.num_intervals(); ++i) samples[i] = std::pow(ks.midpoint(i) - 0.3, p);
                rep = std::max(rep, std::abs(eval_quasi_interpolant(q, ks, samples, x) - std::pow(x - 0.3, p)));
            }
        }
    }
    const std::vector<std::vector<Rational>> table = {
        {Rational(1, 2), Rational(1, 2)},
        {Rational(-1, 8), Rational(5, 4), Rational(-1, 8)},
        {Rational(-7, 48), Rational(31, 48), Rational(31, 48), Rational(-7, 48)},
        {Rational(47, 1152), Rational(-107, 288), Rational(319, 192), Rational(-107, 288), Rational(47, 1152)}};
    const Rational norms[] = {Rational(1), Rational(3, 2), Rational(19, 12), Rational(179, 72)};
    bool weights = true;
    for (int n = 1; n <= 4; ++n) {
        const auto q = make_quasi_interpolant(n);
        weights = weights && q.exact_weights == table[n - 1] && oracle::solve_midpoint_weights(n) == table[n - 1] &&
                  q.exact_q_norm == norms[n - 1];
    }
    const bool err162 = err_coefficient_1d_exact(Rational(1), 2) == Rational(162) && err_coefficient_1d(1.0, 2) == 162.0;
    const double bh1 = bramble_hilbert_constant(3, 2, 1), bh0 = bramble_hilbert_constant(3, 2, 0);
    const bool bh = std::abs(bh1 - 2 * std::sqrt(6.0)) <= 1e-12 && std::abs(bh0 - std::sqrt(5.0)) <= 1e-12;
    const auto pc = legendre_projection_constants(2);
    const double c22 = multivariate_error_constant(2, 2);
    const bool cs = pc.c1 < 4.427 && pc.c2 < 0.114 && c22 < 0.62;
    const bool ok = pu <= 1e-13 && rep <= 1e-12 && weights && err162 && bh && cs;
    report("C6", ok,
           fmt("partition of unity %.1e, reproduction %.1e, weights exact %s, err(1,2)=162 %s, C_BH %s, "
               "c1=%.4f c2=%.4f c(2,2)=%.4f",
               pu, rep, weights ? "yes" : "no", err162 ? "yes" : "no", bh ? "yes" : "no", pc.c1, pc.c2, c22));
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void criterion7() {
    std::mt19937_64 rng(7);
    double worst = 0;
    for (const char* spec : {"1,2", "1..5", "2,3,5,7"})
        for (int J : {4, 9, 16}) {
            const auto a = parse_alphabet(spec);
            const auto D = make_discretization(1, J, 2);
            const auto L = assemble(a, 0.53, D);
            for (int t = 0; t < 100; ++t) {
                const auto f = oracle::random_vector(D.N, rng);
                std::vector<double> y(D.N);
                L.apply(f, y);
                worst = std::max(worst, max_diff(y, oracle::direct_apply_1d(a, 0.53, D, f)));
            }
        }
    for (const char* spec : {"(1,0),(1,1),(1,-1),(2,0)", "(1,-2..2)"})
        for (int J : {5, 10}) {
            const auto a = parse_alphabet(spec);
            const auto D = make_discretization(2, J, 2);
            const auto L = assemble(a, 1.1, D);
            for (int t = 0; t < 100; ++t) {
                const auto f = oracle::random_vector(D.N, rng);
                std::vector<double> y(D.N);
                L.apply(f, y);
                worst = std::max(worst, max_diff(y, oracle::direct_apply_2d(a, 1.1, D, f)));
            }
        }
    int instances = 0, contained = 0;
    for (const auto& [spec, J] : std::vector<std::pair<const char*, int>>{
             {"1,2", 8}, {"1,2", 16}, {"1..5", 12}, {"2,3", 10}, {"(1,0),(1,1),(1,-1),(2,0)", 6}, {"(1,0),(2,0)", 8}})
        for (double s : {0.4, 0.8, 1.2}) {
            const auto a = parse_alphabet(spec);
            const auto D = make_discretization(a.d, J, 2);
            const double rho = oracle::spectral_radius(oracle::to_dense(assemble(a, s, D)));
            TransferOperator op(a, D);
            op.set_s(s);
            const auto r = power_iteration(op);
            const auto br = spectral_bracket(op, r.w);
            ++instances;
            contained += br.alpha <= rho && rho <= br.beta;
        }
    report("C7", worst <= 1e-12 && contained == instances,
           fmt("max |L_h f - Q L_s f| = %.2e over 1D J<=16 and 2D J<=10 (100 vectors each); brackets contain the dense "
               "spectral radius on %d/%d instances",
               worst, contained, instances));
}

struct PositivityRun {
    long iterations = 0;
    bool all_positive = true;
    bool cone = false;
    double slope = 0;
    double lambda = 0;
};

PositivityRun positivity_run(const Alphabet& a, int J, double s, double M) {
    const auto D = make_discretization(a.d, J, 2);
    TransferOperator op(a, D, default_thread_count());
    op.set_s(s);
    PositivityRun out;
    PowerObserver obs = [&](long, std::span<const double> w, double mn, double) {
        ++out.iterations;
        if (!(mn > 0)) out.all_positive = false;
        for (double v : w)
            if (!(v > 0)) {
                out.all_positive = false;
                break;
            }
    };
    const auto r = power_iteration(op, {}, {}, obs);
    out.all_positive = out.all_positive && r.status != PowerStatus::nonpositive;
    if (out.all_positive) {
        const auto c = cone_membership(r.w, cone_geometry(D), M);
        out.cone = c.member;
        out.slope = c.adjacent_ratio_max;
    }
    out.lambda = r.lambda;
    return out;
}

void criterion8() {
    {
        const auto cfg = make_solve_config(kE12, 10000, Mode::certified);
        AdmissibilityReport rep;
        double mp = 0;
        DimensionSolver(cfg).check_admissible(&rep, &mp);
        const auto r = positivity_run(kE12, 10000, 0.531280506277205, 36.0);
        report("C8/1D", r.all_positive && r.cone && rep.hmax > 1e-4,
               fmt("E={1,2} h=1e-4 (hmax %.5f), %ld iterates all positive: %s, final vector in K_36: %s (max log-slope %.3f)",
                   rep.hmax, r.iterations, r.all_positive ? "yes" : "no", r.cone ? "yes" : "no", r.slope));
    }
    if (slow_skipped()) {
        report("C8/2D", false, "SKIP (FRACDIM_SKIP_SLOW=1)");
        return;
    }
    const auto cfg = make_solve_config(kPlanar4, 2500, Mode::certified);
    AdmissibilityReport rep;
    double mp = 0;
    DimensionSolver(cfg).check_admissible(&rep, &mp);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = positivity_run(kPlanar4, 2500, 1.1495771469, 787.0);
    report("C8/2D", r.all_positive && r.cone && rep.hmax > 1.0 / 2500,
           fmt("planar 4 letters h=1/2500 (hmax %.6f, M'=%.1f), %ld iterates all positive: %s, final vector in K_787: %s "
               "(max log-slope %.3f), %.1fs",
               rep.hmax, mp, r.iterations, r.all_positive ? "yes" : "no", r.cone ? "yes" : "no", r.slope,
               seconds_since(t0)));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::pair<const char*, void (*)()> criteria[] = {{"C6", criterion6}, {"C7", criterion7}, {"C1", criterion1},
                                                           {"C2", criterion2}, {"C3", criterion3}, {"C5", criterion5},
                                                           {"C4", criterion4}, {"C8", criterion8}};
    for (const auto& [id, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d failing criteria, %.1fs total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
