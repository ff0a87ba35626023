#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fracdim {

/// Small exact rational on 64-bit integers, always reduced, denominator > 0.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den == 0) throw std::domain_error("rational: zero denominator");
        normalize();
    }

    [[nodiscard]] constexpr std::int64_t num() const { return num_; }
    [[nodiscard]] constexpr std::int64_t den() const { return den_; }
    [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(Rational a, Rational b) {
        const std::int64_t g = std::gcd(a.den_, b.den_);
        return {a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_};
    }
    friend Rational operator-(Rational a, Rational b) { return a + Rational(-b.num_, b.den_); }
    friend Rational operator*(Rational a, Rational b) {
        const std::int64_t g1 = std::gcd(a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_, a.den_);
        return {(a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1)),
                (a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1))};
    }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num_ == 0) throw std::domain_error("rational: division by zero");
        return a * Rational(b.den_, b.num_);
    }
    Rational& operator+=(Rational b) { return *this = *this + b; }
    Rational& operator*=(Rational b) { return *this = *this * b; }
    friend bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator<(Rational a, Rational b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend std::ostream& operator<<(std::ostream& os, Rational r) {
        os << r.num_;
        if (r.den_ != 1) os << '/' << r.den_;
        return os;
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

[[nodiscard]] inline Rational abs(Rational r) { return r.num() < 0 ? Rational(-r.num(), r.den()) : r; }

}  // namespace fracdim
