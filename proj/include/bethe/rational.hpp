#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace bethe {

// Exact rational on int64 with overflow checks.  Coefficients in the sign
// and pairing identities are dyadic (powers of i/2), so magnitudes stay tiny;
// the checks are here to fail loudly rather than silently wrap.
struct Rat {
    long long n = 0;
    long long d = 1;

    Rat() = default;
    Rat(long long num) : n(num), d(1) {}
    Rat(long long num, long long den) : n(num), d(den) { normalize(); }

    void normalize() {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        const long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
    }

    static long long checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rat overflow");
        return static_cast<long long>(v);
    }

    friend Rat operator+(const Rat& a, const Rat& b) {
        __int128 num = static_cast<__int128>(a.n) * b.d + static_cast<__int128>(b.n) * a.d;
        __int128 den = static_cast<__int128>(a.d) * b.d;
        return Rat(checked(num), checked(den));
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + Rat(-b.n, b.d); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        __int128 num = static_cast<__int128>(a.n) * b.n;
        __int128 den = static_cast<__int128>(a.d) * b.d;
        return Rat(checked(num), checked(den));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.n == 0) throw std::domain_error("Rat: division by zero");
        __int128 num = static_cast<__int128>(a.n) * b.d;
        __int128 den = static_cast<__int128>(a.d) * b.n;
        return Rat(checked(num), checked(den));
    }
    Rat operator-() const { return Rat(-n, d); }
    bool operator==(const Rat& o) const { return n == o.n && d == o.d; }
    bool is_zero() const { return n == 0; }
    double value() const { return static_cast<double>(n) / static_cast<double>(d); }
};

// a + b i with exact rational parts
struct GaussianRational {
    Rat re, im;

    GaussianRational() = default;
    GaussianRational(Rat r) : re(r) {}
    GaussianRational(Rat r, Rat i) : re(r), im(i) {}
    GaussianRational(long long r) : re(r) {}

    static GaussianRational i_over(long long den) { return {Rat(0), Rat(1, den)}; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    GaussianRational operator-() const { return {-re, -im}; }
    bool operator==(const GaussianRational& o) const { return re == o.re && im == o.im; }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

inline bool coeff_is_zero(const GaussianRational& c) { return c.is_zero(); }
inline bool coeff_is_zero(const std::complex<double>& c) { return c == std::complex<double>(0.0, 0.0); }
inline GaussianRational coeff_div_int(const GaussianRational& c, long long k) {
    return c * GaussianRational(Rat(1, k));
}
inline std::complex<double> coeff_div_int(const std::complex<double>& c, long long k) {
    return c / static_cast<double>(k);
}

}  // namespace bethe
