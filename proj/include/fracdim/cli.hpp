#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dimension_solver.hpp"
#include "parallel.hpp"
#include "report.hpp"

namespace fracdim::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInadmissible = 2, kCertification = 3 };

class UsageError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Everything a run needs. JSON keys are the long flag names.
struct RunConfig {
    std::string command;  // certify | estimate | converge
    std::string alphabet;  // one DSL alphabet, or several separated by ';'
    std::optional<int> dim;
    int degree = 2;
    std::string h;
    std::string h_list;
    std::optional<double> reference;
    std::optional<double> M, alpha, beta, s_cap, s_gradient;
    std::optional<double> tol_s;
    std::optional<double> s_min;
    std::optional<double> s_max;
    std::optional<int> threads;
    std::string format;  // table | json | tsv; empty picks the command default
    std::string out;
    std::string reproduce;
    bool unsafe_h = false;
    std::string mesh_convention = "auto";  // auto | intervals | nodes
    std::string mode;                      // certified | estimate, overrides the command
    bool single_pass = false;
    std::string dump_matrix;
    std::optional<double> dump_s;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <typename T>
void put(nlohmann::json& j, const char* k, const std::optional<T>& v) {
    j[k] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
void get(const nlohmann::json& j, const char* k, std::optional<T>& v) {
    if (j.contains(k) && !j[k].is_null()) v = j[k].get<T>();
}

template <typename T>
void get(const nlohmann::json& j, const char* k, T& v) {
    if (j.contains(k) && !j[k].is_null()) v = j[k].get<T>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json::object();
    j["command"] = c.command;
    j["alphabet"] = c.alphabet;
    detail::put(j, "dim", c.dim);
    j["degree"] = c.degree;
    j["h"] = c.h;
    j["h-list"] = c.h_list;
    detail::put(j, "reference", c.reference);
    detail::put(j, "M", c.M);
    detail::put(j, "alpha", c.alpha);
    detail::put(j, "beta", c.beta);
    detail::put(j, "s-cap", c.s_cap);
    detail::put(j, "s-gradient", c.s_gradient);
    detail::put(j, "tol-s", c.tol_s);
    detail::put(j, "s-min", c.s_min);
    detail::put(j, "s-max", c.s_max);
    detail::put(j, "threads", c.threads);
    j["format"] = c.format;
    j["out"] = c.out;
    j["reproduce"] = c.reproduce;
    j["unsafe-h"] = c.unsafe_h;
    j["mesh-convention"] = c.mesh_convention;
    j["mode"] = c.mode;
    j["single-pass"] = c.single_pass;
    j["dump-matrix"] = c.dump_matrix;
    detail::put(j, "dump-s", c.dump_s);
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    static const std::vector<std::string> known = {
        "command", "alphabet",  "dim",   "degree", "h",      "h-list",    "reference", "M",
        "alpha",   "beta",      "s-cap", "s-gradient", "tol-s", "s-min",   "s-max",     "threads",
        "format",  "out",       "reproduce", "unsafe-h", "mesh-convention", "mode", "single-pass",
        "dump-matrix", "dump-s"};
    if (!j.is_object()) throw UsageError("config: expected a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw UsageError("config: unknown field '" + k + "'");
    try {
        detail::get(j, "command", c.command);
        detail::get(j, "alphabet", c.alphabet);
        detail::get(j, "dim", c.dim);
        detail::get(j, "degree", c.degree);
        if (j.contains("h") && j["h"].is_number()) c.h = fmt17(j["h"].get<double>());
        else detail::get(j, "h", c.h);
        detail::get(j, "h-list", c.h_list);
        detail::get(j, "reference", c.reference);
        detail::get(j, "M", c.M);
        detail::get(j, "alpha", c.alpha);
        detail::get(j, "beta", c.beta);
        detail::get(j, "s-cap", c.s_cap);
        detail::get(j, "s-gradient", c.s_gradient);
        detail::get(j, "tol-s", c.tol_s);
        detail::get(j, "s-min", c.s_min);
        detail::get(j, "s-max", c.s_max);
        detail::get(j, "threads", c.threads);
        detail::get(j, "format", c.format);
        detail::get(j, "out", c.out);
        detail::get(j, "reproduce", c.reproduce);
        detail::get(j, "unsafe-h", c.unsafe_h);
        detail::get(j, "mesh-convention", c.mesh_convention);
        detail::get(j, "mode", c.mode);
        detail::get(j, "single-pass", c.single_pass);
        detail::get(j, "dump-matrix", c.dump_matrix);
        detail::get(j, "dump-s", c.dump_s);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

// ---- mesh sizes ----

/// A mesh label: "1/3200" (exact) or a literal such as "1e-4".
struct MeshValue {
    std::string label;
    double h = 0;
    std::optional<long> denominator;  // N when the label is exactly 1/N
};

[[nodiscard]] inline MeshValue parse_mesh(const std::string& text) {
    MeshValue m;
    m.label = text;
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            std::size_t p1 = 0, p2 = 0;
            const long num = std::stol(text.substr(0, slash), &p1);
            const long den = std::stol(text.substr(slash + 1), &p2);
            if (p1 != slash || p2 != text.size() - slash - 1 || num <= 0 || den <= 0)
                throw UsageError("mesh size '" + text + "' is not a positive fraction");
            if (den % num != 0) throw UsageError("mesh size '" + text + "' is not of the form 1/N");
            m.denominator = den / num;
            m.h = 1.0 / static_cast<double>(*m.denominator);
        } else {
            std::size_t p = 0;
            m.h = std::stod(text, &p);
            if (p != text.size()) throw UsageError("mesh size '" + text + "' is not a number");
            if (!(m.h > 0 && m.h <= 1)) throw UsageError("mesh size must lie in (0, 1]");
            const double inv = 1.0 / m.h;
            const double r = std::round(inv);
            if (std::abs(inv - r) <= 1e-9 * inv) m.denominator = static_cast<long>(r);
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const UsageError*>(&e)) throw;
        throw UsageError("mesh size '" + text + "' could not be parsed");
    }
    if (m.denominator && *m.denominator > 100000000) throw UsageError("mesh size too small");
    return m;
}

enum class MeshConvention { intervals, nodes };

/// intervals: label 1/N means N intervals on each axis. nodes: N knots on [0,1], so N-1 intervals.
[[nodiscard]] inline int intervals_for(const MeshValue& m, MeshConvention c) {
    const long N = m.denominator ? *m.denominator : static_cast<long>(std::ceil(1.0 / m.h));
    const long J = c == MeshConvention::nodes ? N - 1 : N;
    if (J < 1) throw UsageError("mesh '" + m.label + "' leaves no intervals");
    return static_cast<int>(J);
}

/// "a..b" halves from a down to b; otherwise a comma separated list.
[[nodiscard]] inline std::vector<MeshValue> parse_mesh_list(const std::string& text) {
    std::vector<MeshValue> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const MeshValue a = parse_mesh(text.substr(0, dots));
        const MeshValue b = parse_mesh(text.substr(dots + 2));
        if (b.h > a.h) throw UsageError("mesh list must run from coarse to fine");
        const bool exact = a.label.find('/') != std::string::npos && a.denominator && b.denominator;
        long den = exact ? *a.denominator : 0;
        double h = a.h;
        while (h >= b.h * (1 - 1e-12)) {
            if (exact) {
                out.push_back(parse_mesh("1/" + std::to_string(den)));
                den *= 2;
                h = 1.0 / static_cast<double>(den);
            } else {
                out.push_back(parse_mesh(fmt17(h)));
                h *= 0.5;
            }
            if (out.size() > 40) throw UsageError("mesh list too long");
        }
        if (exact && *b.denominator != den / 2) throw UsageError("mesh list end is not reached by halving");
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(parse_mesh(item));
    }
    if (out.empty()) throw UsageError("empty mesh list");
    return out;
}

// ---- table presets ----

/// Field values for --reproduce tableN (as JSON so they merge like a config file).
[[nodiscard]] inline nlohmann::json reproduce_preset(const std::string& name) {
    static const std::map<std::string, nlohmann::json> presets = {
        {"table2",
         {{"command", "certify"}, {"alphabet", "1,2; 1..34; 1..100; 100,10000; primes<10000"}, {"h", "1e-5"}}},
        {"table3",
         {{"command", "converge"}, {"alphabet", "1,2"}, {"h-list", "1/25..1/3200"}, {"reference", 0.531280506277205}}},
        {"table4",
         {{"command", "converge"}, {"alphabet", "1..34"}, {"h-list", "1/25..1/3200"}, {"reference", 0.980419625226980}}},
        {"table5", {{"command", "converge"}, {"alphabet", "1..100"}, {"h-list", "1/25..1/6400"}}},
        {"table6",
         {{"command", "certify"},
          {"alphabet",
           "(1,0),(1,1),(1,-1),(2,0); (1,0),(1,1),(1,-1),(1,2),(1,-2),(2,0),(2,1),(2,-1),(3,0); "
           "(1,0),(1..4,1),(1..4,-1); (1,0),(2,1),(2,-1),(3,2),(3,-2),(4,3),(4,-3),(5,4),(5,-4); "
           "(100,0),(100,1),(100,-1),(101,0); (1,0),(2,0)"},
          {"h", "1/2500"}}},
        {"table7", {{"command", "converge"}, {"alphabet", "(1,0),(1,1),(1,-1),(2,0)"}, {"h-list", "1/25..1/1600"}}},
        {"table8",
         {{"command", "converge"},
          {"alphabet", "(1,0),(1,1),(1,-1),(1,2),(1,-2),(2,0),(2,1),(2,-1),(3,0)"},
          {"h-list", "1/25..1/1600"}}},
        {"table9",
         {{"command", "converge"},
          {"alphabet", "(1,0),(1,1),(1,-1),(1,2),(1,-2),(1,3),(1,-3),(1,4),(1,-4)"},
          {"h-list", "1/25..1/1600"}}},
    };
    auto it = presets.find(name);
    if (it == presets.end()) throw UsageError("--reproduce expects table2 .. table9");
    return it->second;
}

// ---- resolution helpers ----

[[nodiscard]] inline std::vector<Alphabet> parse_alphabets(const RunConfig& c) {
    if (c.alphabet.empty()) throw UsageError("--alphabet is required");
    std::vector<Alphabet> out;
    std::stringstream ss(c.alphabet);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(parse_alphabet(item));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (c.dim && *c.dim != out.back().d)
            throw UsageError("--dim " + std::to_string(*c.dim) + " does not match alphabet '" + item + "'");
    }
    if (out.empty()) throw UsageError("--alphabet is empty");
    return out;
}

[[nodiscard]] inline MeshConvention convention_for(const RunConfig& c, Mode mode, int d) {
    if (c.mesh_convention == "intervals") return MeshConvention::intervals;
    if (c.mesh_convention == "nodes") return MeshConvention::nodes;
    if (c.mesh_convention != "auto") throw UsageError("--mesh-convention expects auto, intervals or nodes");
    return (mode == Mode::estimate && d == 1) ? MeshConvention::nodes : MeshConvention::intervals;
}

[[nodiscard]] inline ProfileOptions profile_options(const RunConfig& c) {
    ProfileOptions p;
    p.n = c.degree;
    p.s_cap = c.s_cap;
    p.s_gradient = c.s_gradient;
    p.M = c.M;
    p.alpha = c.alpha;
    p.beta = c.beta;
    return p;
}

[[nodiscard]] inline SolveConfig solve_config(const RunConfig& c, const Alphabet& a, int J, Mode mode) {
    if (c.degree < 1 || c.degree > kMaxDegree) throw UsageError("--degree must lie in 1..4");
    SolveConfig s;
    try {
        s = make_solve_config(a, J, mode, profile_options(c));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    s.n = c.degree;
    if (c.tol_s) s.tol_s = *c.tol_s;
    if (c.s_min) s.s_min = *c.s_min;
    if (c.s_max) s.s_max = *c.s_max;
    s.threads = c.threads ? *c.threads : default_thread_count();
    if (!(s.tol_s > 0)) throw UsageError("--tol-s must be positive");
    if (!(s.s_min > 0 && s.s_min < s.upper())) throw UsageError("--s-min/--s-max give an empty interval");
    return s;
}

inline void print_inadmissible(std::ostream& err, const InadmissibleMesh& e, double h, const RigorProfile& p) {
    err << "error: " << e.what() << " (h = " << fmt17(h) << ")\n";
    err << "  condition     bound on h\n";
    for (const auto& en : e.report.entries()) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "  %-12s  %-22s %s\n", en.name.c_str(), fmt17(en.bound).c_str(),
                      h < en.bound ? "ok" : "violated");
        err << buf;
    }
    try {
        err << "  M' at this h  " << fmt17(cone_image_parameter(p, h)) << " (M = " << fmt17(p.M) << ")\n";
    } catch (const std::domain_error&) {
        err << "  M' at this h  undefined\n";
    }
    const double hmax = e.report.hmax;
    const long N = static_cast<long>(std::floor(1.0 / hmax)) + 1;
    err << "admissible h must be below " << fmt17(hmax) << "; for example --h 1/" << N << "\n";
}

// ---- commands ----

struct Output {
    std::ostream& out;
    std::ostream& err;
};

[[nodiscard]] inline std::string resolved_format(const RunConfig& c) {
    std::string f = c.format;
    if (f.empty()) f = c.command == "certify" ? "json" : (c.command == "converge" ? "tsv" : "table");
    if (f != "table" && f != "json" && f != "tsv") throw UsageError("--format expects table, json or tsv");
    return f;
}

inline void dump_matrix(const RunConfig& c, const Alphabet& a, int J, double s_default) {
    const double s = c.dump_s ? *c.dump_s : s_default;
    std::ofstream f(c.dump_matrix);
    if (!f) throw UsageError("cannot open '" + c.dump_matrix + "' for writing");
    const auto D = make_discretization(a.d, J, c.degree);
    const auto L = assemble(a, s, D, c.threads ? *c.threads : default_thread_count());
    L.dump(f);
}

inline int run_single(const RunConfig& c, Mode mode, Output io) {
    const auto alphabets = parse_alphabets(c);
    if (c.h.empty()) throw UsageError("--h is required");
    const MeshValue mv = parse_mesh(c.h);
    const std::string format = resolved_format(c);
    if (mode == Mode::certified && c.unsafe_h) io.err << "note: --unsafe-h is ignored in certified mode\n";
    if (!c.dump_matrix.empty() && alphabets.size() != 1) throw UsageError("--dump-matrix needs a single alphabet");

    std::vector<std::pair<Alphabet, DimensionBracket>> results;
    for (const auto& a : alphabets) {
        const int J = intervals_for(mv, convention_for(c, mode, a.d));
        SolveConfig cfg = solve_config(c, a, J, mode);
        if (mode == Mode::estimate && !c.unsafe_h) {
            SolveConfig probe_cfg = solve_config(c, a, J, Mode::certified);
            try {
                DimensionSolver(probe_cfg).check_admissible();
            } catch (const InadmissibleMesh& e) {
                print_inadmissible(io.err, e, probe_cfg.h(), probe_cfg.profile);
                io.err << "pass --unsafe-h to compute a point estimate anyway\n";
                return kInadmissible;
            }
        }
        DimensionBracket b;
        try {
            if (mode == Mode::certified && a.d == 2 && !c.single_pass)
                b = two_step_refinement(cfg);
            else
                b = solve_dimension(cfg);
        } catch (const InadmissibleMesh& e) {
            print_inadmissible(io.err, e, cfg.h(), cfg.profile);
            return kInadmissible;
        }
        if (!c.dump_matrix.empty()) dump_matrix(c, a, J, b.estimate());
        results.emplace_back(a, std::move(b));
    }

    if (format == "json") {
        nlohmann::json j;
        if (results.size() == 1) {
            j = bracket_json(results[0].second, results[0].first);
        } else {
            j["results"] = nlohmann::json::array();
            for (const auto& [a, b] : results) j["results"].push_back(bracket_json(b, a));
        }
        j["config"] = c;
        io.out << j.dump(2) << "\n";
    } else if (format == "tsv") {
        write_bracket_tsv(io.out, results);
    } else {
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (i) io.out << "\n";
            write_bracket_table(io.out, results[i].second, results[i].first);
        }
    }
    return kOk;
}

inline int run_converge(const RunConfig& c, Output io) {
    const auto alphabets = parse_alphabets(c);
    if (alphabets.size() != 1) throw UsageError("converge takes a single alphabet");
    const Alphabet& a = alphabets[0];
    if (c.h_list.empty()) throw UsageError("--h-list is required");
    const auto values = parse_mesh_list(c.h_list);
    const std::string format = resolved_format(c);
    const auto conv = convention_for(c, Mode::estimate, a.d);
    std::vector<MeshSpec> meshes;
    for (const auto& v : values) meshes.push_back({v.label, v.h, intervals_for(v, conv)});
    const SolveConfig base = solve_config(c, a, meshes.front().J, Mode::estimate);
    std::vector<StudyRow> rows;
    try {
        rows = convergence_study(base, meshes, c.reference);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (format == "json") {
        nlohmann::json j{{"alphabet", a.to_string()}, {"d", a.d}, {"n", c.degree}, {"rows", study_json(rows)}};
        j["reference"] = c.reference ? nlohmann::json(*c.reference) : nlohmann::json(nullptr);
        j["config"] = c;
        io.out << j.dump(2) << "\n";
    } else if (format == "tsv") {
        write_study_tsv(io.out, rows);
    } else {
        write_study_table(io.out, rows, c.reference.has_value());
    }
    return kOk;
}

/// Runs a fully resolved configuration.
inline int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::ofstream file;
    std::ostream* os = &out;
    if (!c.out.empty()) {
        file.open(c.out);
        if (!file) throw UsageError("cannot open '" + c.out + "' for writing");
        os = &file;
    }
    Output io{*os, err};
    if (!c.mode.empty() && c.mode != "certified" && c.mode != "estimate")
        throw UsageError("--mode expects certified or estimate");
    if (c.threads && *c.threads < 1) throw UsageError("--threads must be positive");
    if (c.command == "certify" || c.command == "estimate") {
        Mode m = c.command == "certify" ? Mode::certified : Mode::estimate;
        if (!c.mode.empty()) m = c.mode == "certified" ? Mode::certified : Mode::estimate;
        return run_single(c, m, io);
    }
    if (c.command == "converge") {
        if (c.mode == "certified") throw UsageError("converge computes point estimates only");
        return run_converge(c, io);
    }
    throw UsageError("expected a subcommand: certify, estimate or converge");
}

/// Parses flags, merges --reproduce presets and --config files (flags win), runs.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Certified Hausdorff dimension brackets for continued-fraction systems", "fracdim"};
    app.set_help_flag("--help", "print this help");  // -h would clash with --h
    app.fallthrough();
    app.require_subcommand(0, 1);
    RunConfig c;
    std::string config_path;

    auto* certify = app.add_subcommand("certify", "rigorous bracket [s_lo, s_hi]");
    auto* estimate = app.add_subcommand("estimate", "point estimate s_h");
    auto* converge = app.add_subcommand("converge", "convergence study over a mesh list");
    for (auto* sub : {certify, estimate, converge}) {
        sub->fallthrough();
        sub->set_help_flag();
    }

    app.add_option("--alphabet", c.alphabet, "alphabet DSL, e.g. \"1,2\", \"1..34\", \"primes<10000\", \"(1,0),(1,1)\"");
    app.add_option("--dim", c.dim, "expected dimension")->check(CLI::IsMember({1, 2}));
    app.add_option("--degree", c.degree, "B-spline degree")->check(CLI::Range(1, kMaxDegree));
    app.add_option("--h", c.h, "mesh size, \"1e-4\" or \"1/3200\"");
    app.add_option("--h-list", c.h_list, "meshes \"1/25..1/3200\" (halving) or a comma list");
    app.add_option("--reference", c.reference, "known dimension for convergence deltas");
    app.add_option("--M", c.M, "cone parameter");
    app.add_option("--alpha", c.alpha, "alpha in the cone image bound");
    app.add_option("--beta", c.beta, "beta in the cone image bound");
    app.add_option("--s-cap", c.s_cap, "upper bound on s used in the constants");
    app.add_option("--s-gradient", c.s_gradient, "s used in the gradient ratio D");
    app.add_option("--tol-s", c.tol_s, "bisection tolerance in s");
    app.add_option("--s-min", c.s_min, "bottom of the s search interval");
    app.add_option("--s-max", c.s_max, "top of the s search interval (default d)");
    app.add_option("--threads", c.threads, "worker threads (default FRACDIM_THREADS or all cores)");
    app.add_option("--format", c.format, "table | json | tsv")->check(CLI::IsMember({"table", "json", "tsv"}));
    app.add_option("--out", c.out, "write results to this file");
    app.add_option("--reproduce", c.reproduce, "table2 .. table9");
    app.add_flag("--unsafe-h", c.unsafe_h, "allow point estimates at inadmissible h");
    app.add_option("--mesh-convention", c.mesh_convention, "auto | intervals | nodes")
        ->check(CLI::IsMember({"auto", "intervals", "nodes"}));
    app.add_option("--mode", c.mode, "certified | estimate")->check(CLI::IsMember({"certified", "estimate"}));
    app.add_flag("--single-pass", c.single_pass, "skip the second planar pass");
    app.add_option("--dump-matrix", c.dump_matrix, "write the assembled matrix as triplets");
    app.add_option("--dump-s", c.dump_s, "s for --dump-matrix (default: the estimate)");
    app.add_option("--config", config_path, "JSON file with the same field names as the flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    for (auto* sub : {certify, estimate, converge})
        if (sub->parsed()) c.command = sub->get_name();

    try {
        // layers: defaults < preset < config file < explicit flags
        nlohmann::json merged = RunConfig{};
        auto overlay = [&](const nlohmann::json& src) {
            for (const auto& [k, v] : src.items()) merged[k] = v;
        };
        nlohmann::json file = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw UsageError("cannot read config '" + config_path + "'");
            try {
                file = nlohmann::json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(std::string("config: ") + e.what());
            }
            RunConfig check;
            from_json(file, check);  // rejects unknown fields
        }
        std::string preset = c.reproduce;
        if (preset.empty() && file.contains("reproduce") && file["reproduce"].is_string())
            preset = file["reproduce"].get<std::string>();
        if (!preset.empty()) overlay(reproduce_preset(preset));
        overlay(file);
        const nlohmann::json flags = c;
        for (const auto& [k, v] : flags.items()) {
            const auto* opt = app.get_option_no_throw("--" + k);
            if (opt && opt->count() > 0) merged[k] = v;
        }
        if (!c.command.empty()) merged["command"] = c.command;
        RunConfig resolved;
        from_json(merged, resolved);
        return execute(resolved, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InadmissibleMesh& e) {
        err << "error: " << e.what() << "\n";
        return kInadmissible;
    } catch (const CertificationError& e) {
        err << "certification failed: " << e.what() << "\n";
        return kCertification;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kCertification;
    }
}

}  // namespace fracdim::cli
