#pragma once
// Exact Fourier coefficients of the two level-1 eigenforms used as concrete
// test objects: the weight-12 discriminant form (Ramanujan tau) and the
// weight-16 form.  Both cusp spaces are one-dimensional, so the normalized
// generator is automatically a Hecke eigenform and no linear algebra is
// needed.
//
// tau comes from q * P^24 with P the Euler product expanded by the pentagonal
// number theorem (sparse, O(sqrt X) terms), applied 24 times to a dense
// coefficient array.  An independent oracle builds the same coefficients from
// Eisenstein series via (E4^3 - E6^2)/1728; the two routes share no code.
// The weight-16 form is the series product of the discriminant form with E4.
//
// Exact arithmetic strategy, sized by measurement:
//   - tau fits __int128 for n <= 10^6 with room to spare; every add/sub/mul
//     on the dense array goes through overflow-checked helpers.
//   - The Eisenstein oracle's intermediate E4^3 coefficients pass 2^127
//     before division by 1728, so that route uses 256-bit integers.
//   - Weight-16 coefficients at a single index n are convolution sums whose
//     individual terms overflow __int128 near n ~ 10^5 even though the total
//     does not.  The prime scan therefore accumulates in unsigned 128-bit
//     arithmetic (exact mod 2^128) next to a plain double sideband; the
//     sideband proves the total is far inside the signed range, making the
//     two's-complement reinterpretation of the wrapped total exact without
//     assuming anything about coefficient growth.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "heckelab/common.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

using int256 = boost::multiprecision::int256_t;

struct CuspFormSeries {
    int weight = 0;
    u64 limit = 0;
    std::vector<i128> coeffs;  // index 0 unused; coeffs[n] = a(n)

    i128 a(u64 n) const {
        assert(n >= 1 && n <= limit);
        return coeffs[n];
    }
};

// ---------------------------------------------------------------------------
// Weight 12 via the pentagonal number theorem.

// Nonzero exponents of prod (1 - q^n) up to `max_exp`: generalized pentagonal
// numbers k(3k -+ 1)/2 with sign (-1)^k.
inline std::vector<std::pair<u64, int>> pentagonal_exponents(u64 max_exp) {
    std::vector<std::pair<u64, int>> out;
    for (u64 k = 1;; ++k) {
        u64 g1 = k * (3 * k - 1) / 2;
        if (g1 > max_exp) break;
        int sign = (k % 2 == 1) ? -1 : +1;
        out.emplace_back(g1, sign);
        u64 g2 = k * (3 * k + 1) / 2;
        if (g2 <= max_exp) out.emplace_back(g2, sign);
    }
    return out;
}

inline CuspFormSeries delta_series(u64 x, u64 cap = 100'000) {
    if (x < 1) throw std::invalid_argument("series limit must be >= 1");
    if (x > cap) throw capacity_error("exact coefficient range above configured cap");
    // d holds the running coefficients of P^j on q^0..q^(x-1).
    std::vector<i128> d(x, 0);
    d[0] = 1;
    auto pent = pentagonal_exponents(x - 1);
    for (int pass = 0; pass < 24; ++pass) {
        // In place, descending: indices below n still hold the previous
        // pass's values when n is updated.
        for (i64 n = i64(x) - 1; n >= 0; --n) {
            i128 s = d[size_t(n)];  // exponent-0 term of the sparse factor
            for (auto [g, sign] : pent) {
                if (g > u64(n)) break;
                s = sign > 0 ? checked_add(s, d[size_t(n) - g])
                             : checked_sub(s, d[size_t(n) - g]);
            }
            d[size_t(n)] = s;
        }
    }
    CuspFormSeries out;
    out.weight = 12;
    out.limit = x;
    out.coeffs.assign(x + 1, 0);
    for (u64 n = 1; n <= x; ++n) out.coeffs[n] = d[n - 1];  // the q * P^24 shift
    return out;
}

// ---------------------------------------------------------------------------
// Eisenstein series and the independent oracle route.

// E4 = 1 + 240 sum sigma_3(n) q^n, E6 = 1 - 504 sum sigma_5(n) q^n.
// Returned with the constant term at index 0.
inline std::vector<i128> eisenstein_series(int k, u64 x) {
    if (k != 4 && k != 6) throw std::invalid_argument("only E4 and E6 are supported");
    std::vector<i128> sigma(x + 1, 0);
    for (u64 d = 1; d <= x; ++d) {
        i128 dk = i128(d) * d * d;
        if (k == 6) dk = dk * d * d;
        for (u64 m = d; m <= x; m += d) sigma[m] = checked_add(sigma[m], dk);
    }
    std::vector<i128> e(x + 1, 0);
    e[0] = 1;
    i128 scale = (k == 4) ? 240 : -504;
    for (u64 n = 1; n <= x; ++n) e[n] = checked_mul(scale, sigma[n]);
    return e;
}

namespace detail {

inline std::vector<int256> to_wide(const std::vector<i128>& v) {
    std::vector<int256> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = int256(v[i]);
    return out;
}

inline std::vector<int256> convolve_trunc(const std::vector<int256>& a,
                                          const std::vector<int256>& b, u64 x) {
    std::vector<int256> c(x + 1, 0);
    for (u64 i = 0; i < a.size() && i <= x; ++i) {
        if (a[i] == 0) continue;
        u64 jmax = std::min<u64>(x - i, b.size() - 1);
        for (u64 j = 0; j <= jmax; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

}  // namespace detail

// tau(1..X) by the alternative route (E4^3 - E6^2)/1728, sharing nothing with
// the pentagonal expansion except the sieve-free divisor sums.
inline std::vector<i128> delta_from_eisenstein(u64 x) {
    if (x < 1) throw std::invalid_argument("series limit must be >= 1");
    if (x > 5000) throw capacity_error("oracle route is quadratic; keep X <= 5000");
    auto e4 = detail::to_wide(eisenstein_series(4, x));
    auto e6 = detail::to_wide(eisenstein_series(6, x));
    auto e4sq = detail::convolve_trunc(e4, e4, x);
    auto e4cu = detail::convolve_trunc(e4sq, e4, x);
    auto e6sq = detail::convolve_trunc(e6, e6, x);
    std::vector<i128> tau(x + 1, 0);
    for (u64 n = 0; n <= x; ++n) {
        int256 num = e4cu[n] - e6sq[n];
        if (num % 1728 != 0)
            throw std::logic_error("Eisenstein combination not divisible by 1728 at n = " +
                                   std::to_string(n));
        int256 q = num / 1728;
        if (q >= (int256(1) << 126) || q <= -(int256(1) << 126))
            throw capacity_error("oracle coefficient outside the 128-bit range");
        tau[n] = q.convert_to<i128>();
    }
    if (tau[0] != 0) throw std::logic_error("oracle constant term must vanish");
    return tau;
}

// ---------------------------------------------------------------------------
// Weight 16: series product with E4.

inline CuspFormSeries weight16_series(u64 x, u64 cap = 10'000) {
    if (x < 1) throw std::invalid_argument("series limit must be >= 1");
    if (x > cap) throw capacity_error("dense weight-16 range above configured cap");
    CuspFormSeries delta = delta_series(x, std::max<u64>(x, 100'000));
    auto e4 = eisenstein_series(4, x);
    CuspFormSeries out;
    out.weight = 16;
    out.limit = x;
    out.coeffs.assign(x + 1, 0);
    for (u64 n = 1; n <= x; ++n) {
        i128 s = 0;
        for (u64 m = 1; m <= n; ++m)
            s = checked_add(s, checked_mul(delta.coeffs[m], e4[n - m]));
        out.coeffs[n] = s;
    }
    return out;
}

// Normalized weight-16 eigenvalues at primes p <= X without the dense cap.
// Convolution terms overflow __int128 here, so the accumulation runs in
// unsigned (wrap-around, exact mod 2^128) arithmetic with a double sideband;
// see the header comment for why the final cast back is exact.
struct PrimeLambda {
    u64 p = 0;
    double lambda = 0;
};

inline std::vector<PrimeLambda> weight16_prime_lambdas(const SieveTables& sv, u64 x,
                                                       u64 cap = 100'000) {
    if (x < 2 || x > sv.limit()) throw std::invalid_argument("prime scan outside sieve range");
    if (x > cap || x > 110'000)
        throw capacity_error("prime scan sized for p <= 110000 by the sideband error budget");
    CuspFormSeries delta = delta_series(x, std::max<u64>(x, 100'000));

    std::vector<u64> sigma3(x + 1, 0);
    for (u64 d = 1; d <= x; ++d)
        for (u64 m = d; m <= x; m += d) sigma3[m] += d * d * d;

    std::vector<u128> tau_u(x + 1);
    std::vector<double> tau_d(x + 1), c4_d(x + 1);
    std::vector<u128> c4_u(x + 1);
    for (u64 n = 1; n <= x; ++n) {
        tau_u[n] = u128(delta.coeffs[n]);
        tau_d[n] = to_double(delta.coeffs[n]);
    }
    c4_u[0] = 1;
    c4_d[0] = 1.0;
    for (u64 j = 1; j <= x; ++j) {
        c4_u[j] = u128(240) * sigma3[j];
        c4_d[j] = 240.0 * double(sigma3[j]);
    }

    const double guard = std::ldexp(1.0, 126);
    std::vector<PrimeLambda> out;
    for (u64 p : sv.primes()) {
        if (p > x) break;
        u128 wrapped = tau_u[p];  // m = p pairs with the constant term of E4
        double approx = tau_d[p];
        for (u64 m = 1; m < p; ++m) {
            wrapped += tau_u[m] * c4_u[p - m];
            approx = std::fma(tau_d[m], c4_d[p - m], approx);
        }
        if (std::abs(approx) > guard)
            throw capacity_error("weight-16 coefficient too close to the 128-bit boundary");
        i128 value = i128(wrapped);
        // The sideband's accumulated rounding stays below ~2^121 for p in
        // range, far under the 2^128 quantum a wrap bug would introduce.
        if (std::abs(to_double(value) - approx) > std::ldexp(1.0, 122))
            throw std::logic_error("sideband disagrees with wrapped accumulation at p = " +
                                   std::to_string(p));
        out.push_back({p, to_double(value) / std::pow(double(p), 7.5)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Normalization and the exact Hecke relation.

struct NormalizedForm {
    int weight = 0;
    HeckeFn fn;
};

inline NormalizedForm normalize(const CuspFormSeries& form, std::string label = "") {
    if (form.limit < 1 || form.coeffs.size() != form.limit + 1 || form.coeffs[1] != 1)
        throw std::invalid_argument("series must be normalized with a(1) = 1");
    NormalizedForm out;
    out.weight = form.weight;
    out.fn.label = label.empty()
                       ? (form.weight == 12 ? "delta" : "weight" + std::to_string(form.weight))
                       : std::move(label);
    out.fn.source = HeckeSource::Form;
    out.fn.values.assign(form.limit + 1, 0.0);
    double exponent = (form.weight - 1) / 2.0;
    for (u64 n = 1; n <= form.limit; ++n)
        out.fn.values[n] = to_double(form.coeffs[n]) / std::pow(double(n), exponent);
    return out;
}

struct HeckeIntegralReport {
    bool ok = true;
    u64 pairs_checked = 0;
    u64 first_m = 0, first_n = 0;  // first failing pair, if any
    std::string first_lhs, first_rhs;
};

// a(m) a(n) = sum_{d | gcd(m,n)} d^(k-1) a(mn/d^2), exactly, for all
// m, n <= M.  Products of coefficients can pass 2^127, so both sides are
// compared in 256-bit arithmetic.
inline HeckeIntegralReport verify_hecke_integral(const CuspFormSeries& form, u64 m_bound) {
    if (i128(m_bound) * m_bound > i128(form.limit))
        throw std::invalid_argument("verify_hecke_integral needs M^2 <= limit");
    HeckeIntegralReport rep;
    for (u64 m = 1; m <= m_bound; ++m) {
        for (u64 n = 1; n <= m_bound; ++n) {
            int256 lhs = int256(form.a(m)) * int256(form.a(n));
            int256 rhs = 0;
            u64 g = std::gcd(m, n);
            for (u64 d = 1; d <= g; ++d) {
                if (g % d != 0) continue;
                int256 dk = 1;
                for (int e = 0; e < form.weight - 1; ++e) dk *= int256(d);
                rhs += dk * int256(form.a(m * n / (d * d)));
            }
            ++rep.pairs_checked;
            if (lhs != rhs && rep.ok) {
                rep.ok = false;
                rep.first_m = m;
                rep.first_n = n;
                rep.first_lhs = lhs.str();
                rep.first_rhs = rhs.str();
            }
        }
    }
    return rep;
}

// Largest |lambda(p)| over primes p <= X; the eigenvalue bound says this
// never exceeds 2.
inline std::pair<u64, double> max_prime_lambda(const HeckeFn& fn, const SieveTables& sv, u64 x) {
    if (x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("prime scan outside tables");
    u64 worst_p = 2;
    double worst = 0;
    for (u64 p : sv.primes()) {
        if (p > x) break;
        double v = std::abs(fn(p));
        if (v > worst) {
            worst = v;
            worst_p = p;
        }
    }
    return {worst_p, worst};
}

// ---------------------------------------------------------------------------
// Coefficient cache: magic, weight, limit, then one signed length-prefixed
// little-endian integer per coefficient.

inline constexpr char kFormCacheMagic[9] = "HLCFORM1";

inline void save_form_cache(const CuspFormSeries& form, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open cache file for writing: " + path.string());
    std::fwrite(kFormCacheMagic, 1, 8, f);
    u64 w = u64(form.weight), lim = form.limit;
    std::fwrite(&w, sizeof w, 1, f);
    std::fwrite(&lim, sizeof lim, 1, f);
    for (u64 n = 1; n <= form.limit; ++n) {
        i128 v = form.coeffs[n];
        unsigned char sign = v < 0 ? 1 : 0;
        u128 mag = sign ? ~u128(v) + 1 : u128(v);  // negate without signed overflow
        unsigned char bytes[16];
        unsigned char len = 0;
        while (mag != 0) {
            bytes[len++] = (unsigned char)(mag & 0xff);
            mag >>= 8;
        }
        std::fputc(sign, f);
        std::fputc(len, f);
        std::fwrite(bytes, 1, len, f);
    }
    if (std::fclose(f) != 0) throw std::runtime_error("failed to finish cache write");
}

inline std::optional<CuspFormSeries> load_form_cache(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return std::nullopt;
    auto fail = [&]() -> std::optional<CuspFormSeries> {
        std::fclose(f);
        return std::nullopt;
    };
    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kFormCacheMagic, 8) != 0)
        return fail();
    u64 w = 0, lim = 0;
    if (std::fread(&w, sizeof w, 1, f) != 1 || std::fread(&lim, sizeof lim, 1, f) != 1)
        return fail();
    if (lim < 1 || lim > (u64(1) << 32)) return fail();
    CuspFormSeries form;
    form.weight = int(w);
    form.limit = lim;
    form.coeffs.assign(lim + 1, 0);
    for (u64 n = 1; n <= lim; ++n) {
        int sign = std::fgetc(f);
        int len = std::fgetc(f);
        if (sign == EOF || len == EOF || len > 16) return fail();
        unsigned char bytes[16];
        if (len > 0 && std::fread(bytes, 1, size_t(len), f) != size_t(len)) return fail();
        u128 mag = 0;
        for (int i = len - 1; i >= 0; --i) mag = (mag << 8) | bytes[i];
        form.coeffs[n] = sign ? -i128(mag) : i128(mag);
    }
    std::fclose(f);
    if (form.coeffs[1] != 1) return std::nullopt;
    return form;
}

}  // namespace heckelab
