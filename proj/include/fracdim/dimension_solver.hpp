#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cifs_maps.hpp"
#include "operator_assembly.hpp"
#include "rigor_constants.hpp"
#include "spectral_bounds.hpp"

namespace fracdim {

enum class Mode { certified, estimate };

/// Cone grid: the J interior midpoints per axis inside the expanded sample layout.
[[nodiscard]] inline ConeGeometry cone_geometry(const Discretization& D) {
    return ConeGeometry{D.d, static_cast<std::size_t>(D.P), D.h(), static_cast<std::size_t>(D.n),
                        static_cast<std::size_t>(D.J)};
}

[[nodiscard]] inline const char* to_string(Mode m) { return m == Mode::certified ? "certified" : "estimate"; }

/// Mesh size h (or 1/N label) rejected by the admissibility conditions.
class InadmissibleMesh : public std::runtime_error {
public:
    InadmissibleMesh(const std::string& what, AdmissibilityReport r) : std::runtime_error(what), report(r) {}
    AdmissibilityReport report;
};

/// A probe could not be certified (positivity, cone, err >= 1, bracket not straddling...).
class CertificationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveConfig {
    Alphabet alphabet;
    int n = 2;
    int J = 100;
    Mode mode = Mode::estimate;
    RigorProfile profile;  // used in certified mode
    double tol_s = 1e-15;
    double s_min = 1e-6;
    double s_max = 0.0;  // 0 means d
    int threads = 1;
    PowerOptions power;
    bool warm_start = true;
    std::size_t memory_budget = std::size_t{2} << 30;

    [[nodiscard]] double h() const { return 1.0 / J; }
    [[nodiscard]] double upper() const { return s_max > 0 ? s_max : static_cast<double>(alphabet.d); }
};

/// Defaults per mode: tol 1e-14 (1D) / 1e-10 (2D) certified, 1e-15 estimates.
[[nodiscard]] inline SolveConfig make_solve_config(const Alphabet& a, int J, Mode mode, const ProfileOptions& popt = {}) {
    SolveConfig c;
    c.alphabet = a;
    c.J = J;
    c.mode = mode;
    c.n = popt.n;
    c.tol_s = mode == Mode::estimate ? 1e-15 : (a.d == 1 ? 1e-14 : 1e-10);
    if (mode == Mode::certified) c.profile = make_profile(a, popt);
    return c;
}

struct ProbeRecord {
    double s = 0;
    double err = 0;
    double lam_lo = 0;
    double lam_hi = 0;
    double lambda = 0;
    long iterations = 0;
    PowerStatus status = PowerStatus::converged;
    double spread = 0;
    double cone_ratio = 0;  // adjacent log-slope of the eigenvector (certified mode)
};

struct DimensionBracket {
    double s_lo = 0;
    double s_hi = 0;
    Mode mode = Mode::estimate;
    int J = 0;
    double h = 0;
    int n = 2;
    bool floor_hit = false;  // lower bound pinned at s_min
    std::vector<ProbeRecord> probes;
    std::optional<RigorProfile> profile;
    std::optional<AdmissibilityReport> admissibility;
    double M_prime = 0;
    double wall_ms = 0;
    std::vector<DimensionBracket> earlier_passes;

    [[nodiscard]] double estimate() const { return 0.5 * (s_lo + s_hi); }
    [[nodiscard]] double width() const { return s_hi - s_lo; }
};

/// Owns the matrix-free operator for one mesh and answers probes in s.
class DimensionSolver {
public:
    explicit DimensionSolver(SolveConfig cfg)
        : cfg_(std::move(cfg)),
          op_(cfg_.alphabet, make_discretization(cfg_.alphabet.d, cfg_.J, cfg_.n), cfg_.threads, cfg_.memory_budget) {
        if (!(cfg_.tol_s > 0)) throw std::invalid_argument("solver: tol_s must be positive");
        if (!(cfg_.s_min < cfg_.upper())) throw std::invalid_argument("solver: empty s interval");
        if (cfg_.mode == Mode::certified && cfg_.profile.d != cfg_.alphabet.d)
            throw std::invalid_argument("solver: profile dimension differs from alphabet");
    }

    [[nodiscard]] const SolveConfig& config() const { return cfg_; }
    [[nodiscard]] TransferOperator& op() { return op_; }
    [[nodiscard]] const std::vector<double>& last_vector() const { return last_w_; }

    /// Certified admissibility of the configured mesh; throws InadmissibleMesh.
    void check_admissible(AdmissibilityReport* out_report = nullptr, double* out_mprime = nullptr) const {
        const auto rep = admissible_h(cfg_.profile, cfg_.alphabet);
        if (out_report) *out_report = rep;
        const double h = cfg_.h();
        if (!(h < rep.hmax)) throw InadmissibleMesh("mesh size exceeds the admissible bound", rep);
        double mp = 0;
        try {
            mp = cone_image_parameter(cfg_.profile, h);
        } catch (const std::domain_error&) {
            throw InadmissibleMesh("cone image parameter undefined at this mesh size", rep);
        }
        if (out_mprime) *out_mprime = mp;
        if (!(mp < cfg_.profile.M)) throw InadmissibleMesh("cone image parameter M' is not below M", rep);
    }

    [[nodiscard]] double err_at(double s) const {
        if (cfg_.mode != Mode::certified) return 0.0;
        const auto& p = cfg_.profile;
        const double coeff = s > p.err_s ? err_coefficient_for(p.d, s, p.n) : p.err_coefficient;
        return coeff * std::pow(cfg_.h(), p.n + 1);
    }

    /// lam_lo <= r(L_h(s)) scaled by (1-err), lam_hi >= r scaled by (1+err).
    ProbeRecord probe(double s) {
        op_.set_s(s);
        std::span<const double> start;
        if (cfg_.warm_start && last_w_.size() == op_.size()) start = last_w_;
        PowerResult pr = power_iteration(op_, cfg_.power, start);
        if (pr.status == PowerStatus::nonpositive)
            throw CertificationError("iterate lost strict positivity at s = " + fmt(s));
        ProbeRecord rec;
        rec.s = s;
        rec.iterations = pr.iterations;
        rec.status = pr.status;
        rec.spread = pr.spread;
        rec.lambda = pr.lambda;
        if (cfg_.mode == Mode::certified) {
            const auto& D = op_.discretization();
            const auto cert = cone_membership(pr.w, cone_geometry(D), cfg_.profile.M);
            rec.cone_ratio = cert.adjacent_ratio_max;
            if (!cert.member) throw CertificationError("eigenvector left the cone K_M at s = " + fmt(s));
            SpectralBracket br;
            try {
                br = spectral_bracket(op_, pr.w);
            } catch (const std::domain_error& e) {
                throw CertificationError(std::string(e.what()) + " at s = " + fmt(s));
            }
            rec.err = err_at(s);
            if (!(rec.err < 1.0)) throw CertificationError("err >= 1: mesh too coarse");
            rec.lam_lo = (1.0 - rec.err) * br.alpha;
            rec.lam_hi = (1.0 + rec.err) * br.beta;
        } else {
            rec.lam_lo = rec.lam_hi = pr.lambda;
        }
        last_w_ = std::move(pr.w);
        check_monotone(rec);
        probes_.push_back(rec);
        return rec;
    }

    /// Bisection for s_lo = sup{lam_lo >= 1} and s_hi = inf{lam_hi <= 1}; probes are shared
    /// between the two searches whenever a midpoint lies in both intervals.
    DimensionBracket solve() { return solve_on(cfg_.s_min, cfg_.upper(), true); }

    DimensionBracket solve_on(double s_min, double s_max, bool check_ends) {
        const auto t0 = std::chrono::steady_clock::now();
        probes_.clear();
        DimensionBracket out;
        out.mode = cfg_.mode;
        out.J = cfg_.J;
        out.h = cfg_.h();
        out.n = cfg_.n;
        if (cfg_.mode == Mode::certified) {
            AdmissibilityReport rep;
            double mp = 0;
            check_admissible(&rep, &mp);
            out.admissibility = rep;
            out.M_prime = mp;
            out.profile = cfg_.profile;
        }
        double a_lo = s_min, b_lo = s_max, a_hi = s_min, b_hi = s_max;
        bool lo_active = true, hi_active = true;
        if (check_ends) {
            const auto top = probe(s_max);
            if (top.lam_hi > 1.0 || top.lam_lo >= 1.0)
                throw CertificationError("eigenvalue still >= 1 at the top of the s interval");
            const auto bottom = probe(s_min);
            if (bottom.lam_lo < 1.0) {
                lo_active = false;
                b_lo = s_min;
                out.floor_hit = true;
            }
            if (bottom.lam_hi <= 1.0) {
                hi_active = false;
                b_hi = s_min;
            }
        }
        while (true) {
            const bool lo_open = lo_active && (b_lo - a_lo) > cfg_.tol_s;
            const bool hi_open = hi_active && (b_hi - a_hi) > cfg_.tol_s;
            if (!lo_open && !hi_open) break;
            const bool pick_lo = lo_open && (!hi_open || (b_lo - a_lo) >= (b_hi - a_hi));
            const double a = pick_lo ? a_lo : a_hi, b = pick_lo ? b_lo : b_hi;
            const double m = a + 0.5 * (b - a);
            if (!(m > a && m < b)) {  // machine resolution reached
                (pick_lo ? lo_active : hi_active) = false;
                continue;
            }
            const auto r = probe(m);
            if (lo_active && m > a_lo && m < b_lo) (r.lam_lo >= 1.0 ? a_lo : b_lo) = m;
            if (hi_active && m > a_hi && m < b_hi) (r.lam_hi > 1.0 ? a_hi : b_hi) = m;
        }
        out.s_lo = out.floor_hit ? s_min : a_lo;
        out.s_hi = b_hi;
        out.probes = probes_;
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

private:
    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    // lambda must decrease in s; tolerance covers the power-iteration spread
    void check_monotone(const ProbeRecord& r) const {
        for (const auto& p : probes_) {
            const double noise = 1e-12 + 4.0 * (p.spread + r.spread);
            if ((p.s < r.s && p.lambda < r.lambda * (1.0 - noise)) || (p.s > r.s && p.lambda > r.lambda * (1.0 + noise)))
                throw CertificationError("eigenvalue estimate is not decreasing in s near s = " + fmt(r.s));
        }
    }

    SolveConfig cfg_;
    TransferOperator op_;
    std::vector<double> last_w_;
    std::vector<ProbeRecord> probes_;
};

/// lam_lo/lam_hi at one s for the configured mesh.
[[nodiscard]] inline std::pair<double, double> lambda_bracket(const SolveConfig& cfg, double s) {
    DimensionSolver solver(cfg);
    if (cfg.mode == Mode::certified) solver.check_admissible();
    const auto r = solver.probe(s);
    return {r.lam_lo, r.lam_hi};
}

[[nodiscard]] inline DimensionBracket solve_dimension(const SolveConfig& cfg) {
    DimensionSolver solver(cfg);
    return solver.solve();
}

/// Planar procedure: first pass with err at s_cap, second pass with err at the
/// first upper estimate, searched inside the first bracket.
[[nodiscard]] inline DimensionBracket two_step_refinement(const SolveConfig& cfg) {
    if (cfg.alphabet.d != 2 || cfg.mode != Mode::certified)
        throw std::invalid_argument("two-step refinement needs a certified planar configuration");
    DimensionSolver first(cfg);
    DimensionBracket pass1 = first.solve();
    if (pass1.s_hi >= cfg.profile.err_s) return pass1;
    SolveConfig cfg2 = cfg;
    cfg2.profile = with_err_s(cfg.profile, pass1.s_hi);
    DimensionSolver second(cfg2);
    // err only shrinks, so the first bracket still straddles
    DimensionBracket pass2 = second.solve_on(pass1.s_lo, pass1.s_hi, false);
    if (pass1.floor_hit) {
        pass2.floor_hit = true;
        pass2.s_lo = pass1.s_lo;
    }
    pass2.wall_ms += pass1.wall_ms;
    pass2.earlier_passes.push_back(std::move(pass1));
    return pass2;
}

// ---- convergence studies ----

struct MeshSpec {
    std::string label;  // e.g. "1/400"
    double h_label = 0;  // numeric value of the label
    int J = 0;           // intervals actually used
};

struct StudyRow {
    MeshSpec mesh;
    double s = 0;
    std::optional<double> delta;
    std::optional<double> rate;
    long probes = 0;
    double wall_ms = 0;
};

/// Point estimates on each mesh. With a reference value delta = |s_h - s| and
/// rate = log2(delta_prev / delta); otherwise delta = |s_prev - s_h| and the
/// rate compares successive deltas.
[[nodiscard]] inline std::vector<StudyRow> convergence_study(const SolveConfig& base, const std::vector<MeshSpec>& meshes,
                                                             std::optional<double> reference = std::nullopt) {
    if (meshes.empty()) throw std::invalid_argument("convergence study: no meshes");
    if (!reference && meshes.size() == 2)
        throw std::invalid_argument("convergence study: successive differences need at least 3 meshes");
    std::vector<StudyRow> rows;
    for (const auto& m : meshes) {
        SolveConfig c = base;
        c.mode = Mode::estimate;
        c.J = m.J;
        const auto br = solve_dimension(c);
        StudyRow r;
        r.mesh = m;
        r.s = br.estimate();
        r.probes = static_cast<long>(br.probes.size());
        r.wall_ms = br.wall_ms;
        rows.push_back(r);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (reference)
            rows[i].delta = std::abs(rows[i].s - *reference);
        else if (i > 0)
            rows[i].delta = std::abs(rows[i - 1].s - rows[i].s);
        if (i > 0 && rows[i].delta && rows[i - 1].delta && *rows[i].delta > 0)
            rows[i].rate = std::log2(*rows[i - 1].delta / *rows[i].delta);
    }
    return rows;
}

}  // namespace fracdim
