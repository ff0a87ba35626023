#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimension_solver.hpp"

namespace fracdim {

/// %.17g, enough to round-trip a double.
[[nodiscard]] inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline std::string fmt_fixed15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15f", v);
    return buf;
}

[[nodiscard]] inline nlohmann::json profile_json(const RigorProfile& p) {
    return {{"err_coeff", p.err_coefficient},
            {"err_s", p.err_s},
            {"s_cap", p.s_cap},
            {"s_gradient", p.s_gradient},
            {"M", p.M},
            {"K", p.K},
            {"A", p.A},
            {"B", p.B},
            {"D", p.D},
            {"alpha", p.alpha},
            {"beta", p.beta},
            {"q_norm", p.q_norm},
            {"derivative_bound", p.derivative_bound},
            {"C1", p.C1},
            {"C2", p.C2}};
}

[[nodiscard]] inline nlohmann::json admissibility_json(const AdmissibilityReport& r) {
    nlohmann::json j;
    for (const auto& e : r.entries()) j[e.name] = e.bound;
    j["hmax"] = r.hmax;
    return j;
}

[[nodiscard]] inline nlohmann::json probe_json(const ProbeRecord& p) {
    return {{"s", p.s},
            {"err", p.err},
            {"lam_lo", p.lam_lo},
            {"lam_hi", p.lam_hi},
            {"lambda", p.lambda},
            {"iterations", p.iterations},
            {"status", to_string(p.status)},
            {"spread", p.spread},
            {"cone_ratio", p.cone_ratio}};
}

/// Result record for one bracket.
[[nodiscard]] inline nlohmann::json bracket_json(const DimensionBracket& b, const Alphabet& a, bool with_probes = true) {
    nlohmann::json j;
    j["alphabet"] = a.to_string();
    j["d"] = a.d;
    j["n"] = b.n;
    j["h"] = b.h;
    j["J"] = b.J;
    j["mode"] = to_string(b.mode);
    j["s_lo"] = b.s_lo;
    j["s_hi"] = b.s_hi;
    j["floor_hit"] = b.floor_hit;
    j["num_probes"] = b.probes.size();
    if (with_probes) {
        auto arr = nlohmann::json::array();
        for (const auto& p : b.probes) arr.push_back(probe_json(p));
        j["probes"] = arr;
    }
    nlohmann::json c = nlohmann::json::object();
    if (b.profile) {
        c = profile_json(*b.profile);
        c["M_prime"] = b.M_prime;
    }
    j["constants"] = c;
    if (b.admissibility) j["admissibility"] = admissibility_json(*b.admissibility);
    if (!b.earlier_passes.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& e : b.earlier_passes) arr.push_back(bracket_json(e, a, false));
        j["earlier_passes"] = arr;
    }
    j["wall_ms"] = b.wall_ms;
    return j;
}

inline void write_bracket_table(std::ostream& os, const DimensionBracket& b, const Alphabet& a) {
    os << "alphabet  " << a.to_string() << "\n";
    os << "mode      " << to_string(b.mode) << "  (d=" << a.d << ", n=" << b.n << ", J=" << b.J << ", h=" << fmt17(b.h)
       << ")\n";
    if (b.mode == Mode::certified) {
        os << "s_lo      " << fmt_fixed15(b.s_lo) << (b.floor_hit ? "  (floor)" : "") << "\n";
        os << "s_hi      " << fmt_fixed15(b.s_hi) << "\n";
        os << "width     " << fmt17(b.width()) << "\n";
        if (b.profile) {
            const auto& p = *b.profile;
            os << "err       " << fmt17(p.err_at(b.h)) << "  (coefficient " << fmt17(p.err_coefficient) << " at s="
               << fmt17(p.err_s) << ")\n";
            os << "cone      M=" << fmt17(p.M) << "  M'=" << fmt17(b.M_prime) << "\n";
        }
    } else {
        os << "s_h       " << fmt_fixed15(b.estimate()) << "\n";
    }
    os << "probes    " << b.probes.size() << "\n";
    os << "wall_ms   " << fmt17(std::round(b.wall_ms)) << "\n";
}

inline void write_bracket_tsv(std::ostream& os, const std::vector<std::pair<Alphabet, DimensionBracket>>& rows) {
    os << "# alphabet\tmode\th\tJ\ts_lo\ts_hi\twidth\tprobes\twall_ms\n";
    for (const auto& [a, b] : rows)
        os << a.to_string() << '\t' << to_string(b.mode) << '\t' << fmt17(b.h) << '\t' << b.J << '\t' << fmt17(b.s_lo)
           << '\t' << fmt17(b.s_hi) << '\t' << fmt17(b.width()) << '\t' << b.probes.size() << '\t' << fmt17(b.wall_ms)
           << '\n';
}

/// Plot data: h, s_h, |delta|, rate; absent values are empty fields.
inline void write_study_tsv(std::ostream& os, const std::vector<StudyRow>& rows) {
    os << "# h\ts_h\tdelta\trate\tJ\tlabel\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
    for (const auto& r : rows)
        os << fmt17(r.mesh.h_label) << '\t' << fmt17(r.s) << '\t' << opt(r.delta) << '\t' << opt(r.rate) << '\t'
           << r.mesh.J << '\t' << r.mesh.label << '\n';
}

inline void write_study_table(std::ostream& os, const std::vector<StudyRow>& rows, bool has_reference) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-10s %-20s %-24s %-8s %8s\n", "h", "s_h", has_reference ? "|s_h - s|" : "|s_2h - s_h|",
                  "rate", "ms");
    os << buf;
    for (const auto& r : rows) {
        const std::string d = r.delta ? fmt17(*r.delta) : "";
        char rate[32] = "";
        if (r.rate) std::snprintf(rate, sizeof rate, "%.3f", *r.rate);
        std::snprintf(buf, sizeof buf, "%-10s %-20s %-24s %-8s %8.0f\n", r.mesh.label.c_str(), fmt_fixed15(r.s).c_str(),
                      d.c_str(), rate, r.wall_ms);
        os << buf;
    }
}

[[nodiscard]] inline nlohmann::json study_json(const std::vector<StudyRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j{{"label", r.mesh.label}, {"h", r.mesh.h_label}, {"J", r.mesh.J}, {"s_h", r.s},
                         {"probes", r.probes}, {"wall_ms", r.wall_ms}};
        j["delta"] = r.delta ? nlohmann::json(*r.delta) : nlohmann::json(nullptr);
        j["rate"] = r.rate ? nlohmann::json(*r.rate) : nlohmann::json(nullptr);
        arr.push_back(j);
    }
    return arr;
}

}  // namespace fracdim
