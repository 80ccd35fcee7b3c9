#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace apesim {

// Exact rational arithmetic for link encodings (8/10, 64/66, 128/130), the
// framing control-overhead parameter and efficiency results. Keeps the
// calibration targets free of float drift.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Ratio() = default;
    constexpr Ratio(std::int64_t n) : num(n), den(1) {}
    Ratio(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    // Floor of num*scale/den, remainder returned through `rem` (0 <= rem < den).
    std::int64_t floor_scaled(std::int64_t scale, std::int64_t& rem) const {
        const __int128 p = static_cast<__int128>(num) * scale;
        std::int64_t q = static_cast<std::int64_t>(p / den);
        std::int64_t r = static_cast<std::int64_t>(p % den);
        if (r < 0) { r += den; q -= 1; }
        rem = r;
        return q;
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

    static Ratio parse(const std::string& text) {
        const auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Ratio(std::stoll(text));
            return Ratio(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        } catch (const std::exception&) {
            throw std::invalid_argument("Ratio: cannot parse '" + text + "'");
        }
    }
};

inline Ratio make_ratio_128(__int128 n, __int128 d) {
    if (d == 0) throw std::invalid_argument("Ratio: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim) throw std::overflow_error("Ratio: overflow");
    Ratio r;
    r.num = static_cast<std::int64_t>(n);
    r.den = static_cast<std::int64_t>(d);
    return r;
}

inline Ratio operator*(const Ratio& a, const Ratio& b) {
    return make_ratio_128(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
inline Ratio operator/(const Ratio& a, const Ratio& b) {
    return make_ratio_128(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}
inline Ratio operator+(const Ratio& a, const Ratio& b) {
    return make_ratio_128(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                          static_cast<__int128>(a.den) * b.den);
}
inline Ratio operator-(const Ratio& a, const Ratio& b) {
    return make_ratio_128(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                          static_cast<__int128>(a.den) * b.den);
}
inline bool operator==(const Ratio& a, const Ratio& b) { return a.num == b.num && a.den == b.den; }
inline bool operator!=(const Ratio& a, const Ratio& b) { return !(a == b); }
inline bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
inline bool operator<=(const Ratio& a, const Ratio& b) { return a == b || a < b; }
inline bool operator>(const Ratio& a, const Ratio& b) { return b < a; }
inline bool operator>=(const Ratio& a, const Ratio& b) { return b <= a; }

} // namespace apesim
