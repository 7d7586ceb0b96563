#pragma once
// Shared scalar types, checked 128-bit integer helpers, tolerance predicates,
// and the small formatting utilities used by every module.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heckelab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;
using cplx = std::complex<double>;

inline constexpr std::string_view kVersion = "0.1.0";

// Thrown when a requested table exceeds a documented size cap, or when a
// checked fixed-width integer operation would overflow.
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r))
        throw capacity_error("128-bit overflow in checked_add");
    return r;
}

inline i128 checked_sub(i128 a, i128 b) {
    i128 r;
    if (__builtin_sub_overflow(a, b, &r))
        throw capacity_error("128-bit overflow in checked_sub");
    return r;
}

inline i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw capacity_error("128-bit overflow in checked_mul");
    return r;
}

inline std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 m = neg ? u128(0) - u128(v) : u128(v);
    char buf[48];
    int pos = 48;
    while (m > 0) {
        buf[--pos] = char('0' + int(m % 10));
        m /= 10;
    }
    if (neg) buf[--pos] = '-';
    return std::string(buf + pos, 48 - pos);
}

inline double to_double(i128 v) { return static_cast<double>(v); }

// Symmetric mixed tolerance: |a - b| <= tol * (1 + |a| + |b|).  Behaves like a
// relative test for large values and an absolute one near zero.
inline bool approx_eq(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

inline bool approx_eq(cplx a, cplx b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

// Shortest decimal digit string that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr - buf);
}

inline u64 fnv1a64(std::string_view s) {
    u64 h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace heckelab
