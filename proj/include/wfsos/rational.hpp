#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wfsos {

/// Exact nonnegative rational with canonical reduced form (den > 0, gcd = 1).
/// Arithmetic goes through 128-bit intermediates and throws on overflow;
/// desk-scale inputs never get near the limit.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {
        if (n < 0) throw std::domain_error("rational: negative value");
    }
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        if (num < 0) throw std::domain_error("rational: negative value");
        if (num == 0) { den = 1; return; }
        std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
    }

    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num * b.den < (__int128)b.num * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

    static Rational from_i128(__int128 n, __int128 d) {
        if (d < 0) { n = -n; d = -d; }
        if (n < 0) throw std::domain_error("rational: negative value");
        if (d == 0) throw std::domain_error("rational: zero denominator");
        __int128 g = gcd128(n, d);
        n /= g;
        d /= g;
        if (n > INT64_MAX || d > INT64_MAX) throw std::overflow_error("rational: overflow");
        Rational r;
        r.num = (std::int64_t)n;
        r.den = (std::int64_t)d;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_i128((__int128)a.num * b.den + (__int128)b.num * a.den,
                         (__int128)a.den * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_i128((__int128)a.num * b.num, (__int128)a.den * b.den);
    }
    /// Exact division; division by zero is a caller error here.
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("rational: division by zero");
        return from_i128((__int128)a.num * b.den, (__int128)a.den * b.num);
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

  private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
};

}  // namespace wfsos
