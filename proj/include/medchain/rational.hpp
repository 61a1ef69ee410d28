#pragma once

#include <gmpxx.h>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace medchain {

using rat = mpq_class;
using bigint = mpz_class;

inline rat rat_pow(const rat& base, long e) {
    rat out;
    if (e >= 0) {
        mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(e));
        mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(e));
    } else {
        if (base == 0) throw std::domain_error("rat_pow: negative power of zero");
        mpz_pow_ui(out.get_num_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(-e));
        mpz_pow_ui(out.get_den_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(-e));
    }
    out.canonicalize();
    return out;
}

inline bigint factorial(unsigned long n) {
    bigint out;
    mpz_fac_ui(out.get_mpz_t(), n);
    return out;
}

inline bigint binom(unsigned long n, unsigned long k) {
    if (k > n) return 0;
    bigint out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

// serialized form is "p" or "p/q" with q > 0 and gcd(p,q) = 1
inline std::string rat_str(const rat& q) {
    return q.get_str();
}

inline rat parse_rat(const std::string& s) {
    rat q;
    if (s.empty() || q.set_str(s, 10) != 0 || q.get_den() == 0)
        throw std::invalid_argument("bad rational: " + s);
    q.canonicalize();
    return q;
}

inline double to_double(const rat& q) { return q.get_d(); }

} // namespace medchain
