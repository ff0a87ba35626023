#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracdim {

struct Letter {
    long e1 = 1;
    long e2 = 0;
    friend bool operator==(const Letter&, const Letter&) = default;
    friend auto operator<=>(const Letter&, const Letter&) = default;
};

/// Finite alphabet of a continued-fraction system, d = 1 (naturals) or d = 2 (N x Z).
struct Alphabet {
    int d = 1;
    std::vector<Letter> letters;  // sorted, unique; e2 == 0 when d == 1

    [[nodiscard]] std::size_t size() const { return letters.size(); }
    [[nodiscard]] long max_component() const {
        long m = 0;
        for (const auto& l : letters) m = std::max({m, std::labs(l.e1), std::labs(l.e2)});
        return m;
    }
    /// Scale used by the resolution condition h < 1/max E.
    [[nodiscard]] double resolution_scale() const {
        double m = 0;
        for (const auto& l : letters) {
            if (d == 1)
                m = std::max(m, static_cast<double>(l.e1));
            else
                m = std::max({m, static_cast<double>(l.e1), static_cast<double>(std::labs(l.e2) + 1)});
        }
        return m;
    }
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::uint64_t hash() const {
        std::uint64_t hv = 1469598103934665603ULL;
        auto mix = [&](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                hv ^= (v >> (8 * i)) & 0xff;
                hv *= 1099511628211ULL;
            }
        };
        mix(static_cast<std::uint64_t>(d));
        for (const auto& l : letters) {
            mix(static_cast<std::uint64_t>(l.e1));
            mix(static_cast<std::uint64_t>(l.e2));
        }
        return hv;
    }
};

inline std::string Alphabet::to_string() const {
    std::string out;
    // compress consecutive 1D runs into a..b
    if (d == 1) {
        std::size_t i = 0;
        while (i < letters.size()) {
            std::size_t j = i;
            while (j + 1 < letters.size() && letters[j + 1].e1 == letters[j].e1 + 1) ++j;
            if (!out.empty()) out += ',';
            out += std::to_string(letters[i].e1);
            if (j > i + 1) {
                out += ".." + std::to_string(letters[j].e1);
                i = j + 1;
            } else {
                ++i;
            }
        }
        return out;
    }
    for (const auto& l : letters) {
        if (!out.empty()) out += ',';
        out += '(' + std::to_string(l.e1) + ',' + std::to_string(l.e2) + ')';
    }
    return out;
}

[[nodiscard]] inline Alphabet make_alphabet(int d, std::vector<Letter> letters) {
    if (d != 1 && d != 2) throw std::invalid_argument("alphabet: dimension must be 1 or 2");
    if (letters.empty()) throw std::invalid_argument("alphabet: empty");
    for (const auto& l : letters) {
        if (l.e1 < 1) throw std::invalid_argument("alphabet: first component must be >= 1");
        if (d == 1 && l.e2 != 0) throw std::invalid_argument("alphabet: 1D letters have no second component");
    }
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    return Alphabet{d, std::move(letters)};
}

[[nodiscard]] inline std::vector<long> primes_below(long n) {
    std::vector<long> out;
    if (n <= 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(n), false);
    for (long p = 2; p < n; ++p) {
        if (composite[p]) continue;
        out.push_back(p);
        for (long q = p * p; q < n; q += p) composite[q] = true;
    }
    return out;
}

namespace detail {

struct DslCursor {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("alphabet: " + msg + " at offset " + std::to_string(pos));
    }
    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }
    bool eat(std::string_view tok) {
        if (s.substr(pos, tok.size()) == tok) {
            pos += tok.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view tok) {
        if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
    }
    long integer() {
        std::size_t start = pos;
        if (peek() == '-' || peek() == '+') ++pos;
        while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(s[start]))))
            fail("expected integer");
        return std::stol(std::string(s.substr(start, pos - start)));
    }
    std::array<long, 2> range() {
        long a = integer();
        long b = a;
        if (eat("..")) b = integer();
        if (b < a) fail("empty range");
        return {a, b};
    }
};

}  // namespace detail

/// Items: n | a..b | primes<N | (a,b) | (a..b,c..d), comma separated.
[[nodiscard]] inline Alphabet parse_alphabet(std::string_view text) {
    std::string compact;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    detail::DslCursor cur{compact};
    std::vector<Letter> letters;
    int dim = 0;
    auto set_dim = [&](int dd) {
        if (dim != 0 && dim != dd) cur.fail("mixed 1D and 2D letters");
        dim = dd;
    };
    if (cur.done()) cur.fail("empty alphabet");
    while (true) {
        if (cur.eat("primes<")) {
            set_dim(1);
            long n = cur.integer();
            for (long p : primes_below(n)) letters.push_back({p, 0});
        } else if (cur.eat("(")) {
            set_dim(2);
            auto r1 = cur.range();
            cur.expect(",");
            auto r2 = cur.range();
            cur.expect(")");
            if (r1[1] - r1[0] > 100000 || r2[1] - r2[0] > 100000) cur.fail("range too large");
            for (long a = r1[0]; a <= r1[1]; ++a)
                for (long b = r2[0]; b <= r2[1]; ++b) letters.push_back({a, b});
        } else {
            set_dim(1);
            auto r = cur.range();
            if (r[1] - r[0] > 10000000) cur.fail("range too large");
            for (long a = r[0]; a <= r[1]; ++a) letters.push_back({a, 0});
        }
        if (cur.done()) break;
        cur.expect(",");
    }
    if (letters.empty()) throw std::invalid_argument("alphabet: expands to no letters");
    return make_alphabet(dim, std::move(letters));
}

// ---- maps ----

[[nodiscard]] inline double phi_1d(long e, double x) { return 1.0 / (x + static_cast<double>(e)); }

/// |phi_e'(x)|^s = (x+e)^{-2s}
[[nodiscard]] inline double dphi_norm_1d(long e, double x, double s) {
    return std::pow(x + static_cast<double>(e), -2.0 * s);
}

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

[[nodiscard]] inline Point2 phi_2d(const Letter& e, Point2 p) {
    const double a = p.x + static_cast<double>(e.e1);
    const double b = p.y + static_cast<double>(e.e2);
    const double r2 = a * a + b * b;
    return {a / r2, b / r2};
}

/// |p+e|^{-2s}
[[nodiscard]] inline double dphi_norm_2d(const Letter& e, Point2 p, double s) {
    const double a = p.x + static_cast<double>(e.e1);
    const double b = p.y + static_cast<double>(e.e2);
    return std::pow(a * a + b * b, -s);
}

}  // namespace fracdim
