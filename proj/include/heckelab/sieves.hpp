#pragma once
// Linear (smallest-prime-factor) sieve building immutable lookup tables for
// the elementary arithmetic functions used everywhere downstream: the Moebius
// function mu(n), the divisor counts d(n) and d3(n) (ordered factorizations
// into two and three parts), omega(n) = number of distinct prime factors,
// Euler's totient phi(n), and the prime list itself.
//
// The linear sieve visits every n exactly once as n = p * m with p = spf(n),
// so each multiplicative function extends in O(1) per entry by tracking the
// exponent of the smallest prime factor:
//   d(p^e)   = e + 1
//   d3(p^e)  = (e+1)(e+2)/2     (stars and bars for three ordered factors)
//   phi(p^e) = p^(e-1) (p-1)
// Tables are immutable after construction; all reads are thread-safe.

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heckelab/common.hpp"

namespace heckelab {

struct SieveOptions {
    // Desk-scale guardrail; construction refuses anything larger.
    u64 max_entries = 200'000'000;
};

class SieveTables {
    using u8 = std::uint8_t;
    using i8 = std::int8_t;
    using u32 = std::uint32_t;

public:
    explicit SieveTables(u64 limit, SieveOptions opt = {}) {
        if (limit < 1) throw std::invalid_argument("sieve limit must be >= 1");
        if (limit > opt.max_entries)
            throw capacity_error("sieve limit " + std::to_string(limit) +
                                 " exceeds memory cap " + std::to_string(opt.max_entries));
        limit_ = limit;
        build();
    }

    u64 limit() const { return limit_; }

    int mobius(u64 n) const {
        assert(n >= 1 && n <= limit_);
        return mobius_[n];
    }
    bool is_prime(u64 n) const {
        assert(n <= limit_);
        return n >= 2 && spf_[n] == n;
    }
    u32 num_divisors(u64 n) const {
        assert(n >= 1 && n <= limit_);
        return d_[n];
    }
    u32 num_divisors3(u64 n) const {
        assert(n >= 1 && n <= limit_);
        return d3_[n];
    }
    u32 omega(u64 n) const {
        assert(n >= 1 && n <= limit_);
        return omega_[n];
    }
    u64 totient(u64 n) const {
        assert(n >= 1 && n <= limit_);
        return phi_[n];
    }
    u32 smallest_prime_factor(u64 n) const {
        assert(n >= 2 && n <= limit_);
        return spf_[n];
    }
    const std::vector<u32>& primes() const { return primes_; }

    // Prime factorization (p, e) in ascending p; O(log n) via spf chasing.
    std::vector<std::pair<u64, u32>> factorize(u64 n) const {
        assert(n >= 1 && n <= limit_);
        std::vector<std::pair<u64, u32>> out;
        while (n > 1) {
            u64 p = spf_[n];
            u32 e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
        return out;
    }

    // All divisors of n, ascending.
    std::vector<u64> divisors(u64 n) const {
        std::vector<u64> out{1};
        for (auto [p, e] : factorize(n)) {
            size_t sz = out.size();
            u64 pe = 1;
            for (u32 i = 1; i <= e; ++i) {
                pe *= p;
                for (size_t j = 0; j < sz; ++j) out.push_back(out[j] * pe);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    // --- versioned binary cache -------------------------------------------

    bool save_cache(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f) return false;
        bool ok = std::fwrite(kCacheMagic, 1, 8, f) == 8 &&
                  std::fwrite(&limit_, sizeof limit_, 1, f) == 1 &&
                  write_vec(f, spf_) && write_vec(f, mobius_) && write_vec(f, d_) &&
                  write_vec(f, d3_) && write_vec(f, omega_) && write_vec(f, phi_) &&
                  write_vec(f, primes_);
        std::fclose(f);
        return ok;
    }

    static std::optional<SieveTables> load_cache(const std::string& path) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) return std::nullopt;
        char magic[8];
        SieveTables t(Unchecked{});
        bool ok = std::fread(magic, 1, 8, f) == 8 && std::memcmp(magic, kCacheMagic, 8) == 0 &&
                  std::fread(&t.limit_, sizeof t.limit_, 1, f) == 1 && read_vec(f, t.spf_) &&
                  read_vec(f, t.mobius_) && read_vec(f, t.d_) && read_vec(f, t.d3_) &&
                  read_vec(f, t.omega_) && read_vec(f, t.phi_) && read_vec(f, t.primes_);
        std::fclose(f);
        if (!ok || t.spf_.size() != t.limit_ + 1) return std::nullopt;
        return t;
    }

private:
    struct Unchecked {};
    explicit SieveTables(Unchecked) {}

    static constexpr char kCacheMagic[9] = "HLSIEVE1";

    void build() {
        u64 n = limit_;
        spf_.assign(n + 1, 0);
        mobius_.assign(n + 1, 0);
        d_.assign(n + 1, 0);
        d3_.assign(n + 1, 0);
        omega_.assign(n + 1, 0);
        phi_.assign(n + 1, 0);
        // cnt[m] = exponent of spf(m) in m, the one piece of state the linear
        // recurrences need.
        std::vector<u8> cnt(n + 1, 0);
        mobius_[1] = 1;
        d_[1] = 1;
        d3_[1] = 1;
        phi_[1] = 1;
        for (u64 i = 2; i <= n; ++i) {
            if (spf_[i] == 0) {
                spf_[i] = u32(i);
                primes_.push_back(u32(i));
                mobius_[i] = -1;
                d_[i] = 2;
                d3_[i] = 3;
                omega_[i] = 1;
                phi_[i] = i - 1;
                cnt[i] = 1;
            }
            for (u32 p : primes_) {
                if (p > spf_[i] || u64(p) * i > n) break;
                u64 m = u64(p) * i;
                spf_[m] = p;
                if (i % p == 0) {
                    u32 e = cnt[i];
                    cnt[m] = u8(e + 1);
                    mobius_[m] = 0;
                    d_[m] = d_[i] / (e + 1) * (e + 2);
                    d3_[m] = d3_[i] / ((e + 1) * (e + 2) / 2) * ((e + 2) * (e + 3) / 2);
                    omega_[m] = omega_[i];
                    phi_[m] = phi_[i] * p;
                } else {
                    cnt[m] = 1;
                    mobius_[m] = i8(-mobius_[i]);
                    d_[m] = d_[i] * 2;
                    d3_[m] = d3_[i] * 3;
                    omega_[m] = u8(omega_[i] + 1);
                    phi_[m] = phi_[i] * (p - 1);
                }
            }
        }
    }

    template <class T>
    static bool write_vec(std::FILE* f, const std::vector<T>& v) {
        u64 n = v.size();
        return std::fwrite(&n, sizeof n, 1, f) == 1 &&
               std::fwrite(v.data(), sizeof(T), n, f) == n;
    }
    template <class T>
    static bool read_vec(std::FILE* f, std::vector<T>& v) {
        u64 n = 0;
        if (std::fread(&n, sizeof n, 1, f) != 1 || n > (u64(1) << 36)) return false;
        v.resize(n);
        return std::fread(v.data(), sizeof(T), n, f) == n;
    }

    u64 limit_ = 0;
    std::vector<u32> spf_;
    std::vector<i8> mobius_;
    std::vector<u32> d_;
    std::vector<u32> d3_;
    std::vector<u8> omega_;
    std::vector<u64> phi_;
    std::vector<u32> primes_;
};

struct GcdLcm {
    u64 gcd;
    u64 lcm;
};

inline GcdLcm gcd_lcm(u64 m, u64 n) {
    if (m < 1 || n < 1) throw std::invalid_argument("gcd_lcm needs positive arguments");
    u64 g = std::gcd(m, n);
    return {g, m / g * n};
}

// Fitted constant for the classical divisor-moment bound
//   sum_{n<=X} d(n)^A  <=  C_A * X * (log X)^(2^A - 1),
// returned as the observed ratio at X (finite and modest for A = 1,2,3).
inline double divisor_moment_constant(const SieveTables& t, int A, u64 X) {
    if (A < 1 || A > 6) throw std::invalid_argument("divisor moment power out of range");
    if (X < 3 || X > t.limit()) throw std::invalid_argument("X out of sieve range");
    double s = 0;
    for (u64 n = 1; n <= X; ++n) {
        double d = t.num_divisors(n);
        double term = d;
        for (int i = 1; i < A; ++i) term *= d;
        s += term;
    }
    double logx = std::log(double(X));
    return s / (double(X) * std::pow(logx, double((1 << A) - 1)));
}

}  // namespace heckelab
