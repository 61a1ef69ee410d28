#pragma once

#include <medchain/spectral.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace medchain {

// --- d-statistics in the small-part-count basis -----------------------------

struct small_counts {
    long m1 = 0;
    long m2 = 0;
};

inline small_counts count_small_parts(const partition& rho) {
    small_counts c;
    for (int p : rho) {
        if (p == 1) ++c.m1;
        else if (p == 2) ++c.m2;
    }
    return c;
}

// a statistic written over the basis {1, m1, m1^2, m2}
struct d_poly {
    rat c0, c1, c11, c2;
    rat at(long m1, long m2) const {
        return c0 + c1 * m1 + c11 * (rat(m1) * m1) + c2 * m2;
    }
    rat at(const partition& rho) const {
        small_counts c = count_small_parts(rho);
        return at(c.m1, c.m2);
    }
};

// Closed forms of d for the shapes with first part >= n - 2. They agree with
// d_coeff on the Jack table but stay cheap when n is large.
inline d_poly d_poly_row(int n, const rat& theta) { // (n-1, 1)
    rat b = (1 + rat(n - 1) * theta) / (theta * n);
    return {rat(-1) / theta, b, rat(0), rat(0)};
}

inline d_poly d_poly_hook(int n, const rat& theta) { // (n-2, 1, 1)
    rat t2 = theta * theta;
    rat half = (2 + rat(n - 2) * theta) / (2 * theta * n);
    return {1 / t2,
            -((1 + rat(n - 1) * theta) / (rat(n) * t2) + half),
            half,
            -(2 + rat(n - 2) * theta) / (t2 * n)};
}

inline d_poly d_poly_two_row(int n, const rat& theta) { // (n-2, 2)
    rat A = rat(n - 2) + 1 / theta;
    rat B = rat(n - 3) + 1 / theta;
    rat den = rat(n - 1) * (n - 2);
    // the constant vanishes at theta = 1
    rat c0 = rat(n) * (n - 3) * (1 - theta) / (2 * theta * theta * den);
    rat c1 = A / den * (rat(n - 3) * (1 - 1 / theta) - rat(3, 2) * B);
    return {c0, c1, A * B / (2 * den), A * B / den};
}

// --- second-moment decomposition --------------------------------------------

// d_{(n-1,1)}^2 = u + v d_{(n-1,1)} + w d_{(n-2,1,1)} + x d_{(n-2,2)} pointwise
struct moment_coeffs {
    rat u, v, w, x;
};

namespace detail {

// exact elimination on a 4x5 augmented system
inline std::array<rat, 4> solve4(std::array<std::array<rat, 5>, 4>& M) {
    for (int c = 0; c < 4; ++c) {
        int p = -1;
        for (int r = c; r < 4; ++r)
            if (M[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) throw std::logic_error("second moment system is singular");
        std::swap(M[c], M[p]);
        for (int r = 0; r < 4; ++r) {
            if (r == c || M[r][c] == 0) continue;
            rat f = M[r][c] / M[c][c];
            for (int col = c; col < 5; ++col) M[r][col] -= f * M[c][col];
        }
    }
    std::array<rat, 4> out;
    for (int r = 0; r < 4; ++r) out[r] = M[r][4] / M[r][r];
    return out;
}

} // namespace detail

inline moment_coeffs second_moment_coeffs(int n, const rat& theta) {
    if (n < 5) throw std::invalid_argument("second_moment_coeffs: need n >= 5");
    if (theta <= 0) throw std::invalid_argument("second_moment_coeffs: theta must be positive");
    d_poly d1 = d_poly_row(n, theta);
    d_poly d2 = d_poly_hook(n, theta);
    d_poly d3 = d_poly_two_row(n, theta);
    // match coefficients of d1^2 on {1, m1, m1^2, m2}; d1 is linear in m1
    std::array<std::array<rat, 5>, 4> M = {{
        {rat(1), d1.c0, d2.c0, d3.c0, d1.c0 * d1.c0},
        {rat(0), d1.c1, d2.c1, d3.c1, 2 * d1.c0 * d1.c1},
        {rat(0), rat(0), d2.c11, d3.c11, d1.c1 * d1.c1},
        {rat(0), rat(0), d2.c2, d3.c2, rat(0)},
    }};
    std::array<rat, 4> s = detail::solve4(M);
    return {s[0], s[1], s[2], s[3]};
}

// reference closed forms quoted for the solved coefficients
inline moment_coeffs second_moment_closed(int n, const rat& theta) {
    if (n < 5) throw std::invalid_argument("second_moment_closed: need n >= 5");
    if (theta <= 0) throw std::invalid_argument("second_moment_closed: theta must be positive");
    const rat& t = theta;
    moment_coeffs out;
    out.u = ((rat(n) * n - 4 * n + 3) * t * t * t + rat(n - 1) * t * t
             + rat(n - 1) * (n - 1) * t + (n - 3))
            / (t * t * (t + 1) * (rat(n - 3) * t + 1) * n);
    out.v = ((rat(n) * n * n - 6 * rat(n) * n + 11 * n - 6) * t * t * t
             + 2 * (2 * rat(n) * n - 7 * n + 4) * t * t + (3 * n + 2) * t - 4)
            / (t * n * ((rat(n) * n - 5 * n + 6) * t * t + (3 * n - 8) * t + 2));
    rat s = 1 + t * (n - 1);
    out.w = 2 * s * s / ((1 + t) * (2 + t * (n - 2)) * n);
    out.x = 2 * s * s * rat(n - 1) * (n - 2)
            / ((1 + t) * rat(n) * n * (1 + t * (2 * n - 5) + t * t * rat(n - 2) * (n - 3)));
    return out;
}

// stationary second moment of d_{(n-1,1)}; the linear solve returns this as u
inline rat stationary_d_second_moment(int n, const rat& theta) {
    return rat(n - 1) * (rat(n - 2) * theta + 2) / (rat(n) * theta * (rat(n - 2) * theta + 1));
}

// --- moments of d_{(n-1,1)} along the chain ---------------------------------

struct d_moment_pair {
    rat mean;
    rat variance;
};

// Mean and variance of d_{(n-1,1)} after k steps from a fixed start, computed
// through eigenfunction decay and the second-moment decomposition.
inline d_moment_pair d_moments(const partition& start, long k, int n, const rat& theta,
                               const rat& delta = rat(0)) {
    if (n < 5) throw std::invalid_argument("d_moments: need n >= 5");
    if (weight(start) != n) throw std::invalid_argument("d_moments: start must have weight n");
    if (k < 0) throw std::invalid_argument("d_moments: negative step count");
    if (theta <= 0) throw std::invalid_argument("d_moments: theta must be positive");
    if (delta < 0 || delta >= 1) throw std::invalid_argument("d_moments: delta must lie in [0, 1)");
    rat d1s = d_poly_row(n, theta).at(start);
    rat d2s = d_poly_hook(n, theta).at(start);
    rat d3s = d_poly_two_row(n, theta).at(start);
    rat b1 = rat_pow(eigenvalue(partition{n - 1, 1}, theta, delta), k);
    rat b2 = rat_pow(eigenvalue(partition{n - 2, 1, 1}, theta, delta), k);
    rat b3 = rat_pow(eigenvalue(partition{n - 2, 2}, theta, delta), k);
    moment_coeffs mc = second_moment_coeffs(n, theta);
    rat mean = b1 * d1s;
    rat second = mc.u + mc.v * b1 * d1s + mc.w * b2 * d2s + mc.x * b3 * d3s;
    rat var = second - mean * mean;
    if (var < 0) throw std::logic_error("d_moments: negative variance");
    return {mean, var};
}

// --- closed-form profile bounds ---------------------------------------------

// log of the stationary normalizer, log prod_{i=1}^{n-1} (1 + theta i); the
// all-singleton state has stationary mass exp(-value)
inline double log_stationary_product(int n, double theta) {
    double acc = 0;
    for (int i = 1; i < n; ++i) acc += std::log1p(theta * i);
    return acc;
}

// Chebyshev witness for the distance from the all-singleton start at time t:
// d_{(n-1,1)} concentrates near (n-1) beta^t under the chain but has mean 0 and
// second moment u under pi, so thresholding halfway gives a TV lower bound.
inline double witness_tv(int n, const rat& theta, long t) {
    if (t < 0) throw std::invalid_argument("witness_tv: negative step count");
    moment_coeffs mc = second_moment_coeffs(n, theta);
    double b1 = to_double(eigenvalue(partition{n - 1, 1}, theta));
    double b2 = to_double(eigenvalue(partition{n - 2, 1, 1}, theta));
    double b3 = to_double(eigenvalue(partition{n - 2, 2}, theta));
    double td = static_cast<double>(t);
    double ek = (n - 1) * std::pow(b1, td);
    if (ek <= 0) return 0.0;
    double e2 = to_double(mc.u) + to_double(mc.v) * std::pow(b1, td) * (n - 1)
                + to_double(mc.w) * std::pow(b2, td) * (0.5 * (n - 1) * (n - 2))
                + to_double(mc.x) * std::pow(b3, td) * (0.5 * n * (n - 3));
    double var = e2 - ek * ek;
    if (var < -1e-9 * std::max(1.0, ek * ek))
        throw numeric_instability_error("witness_tv: negative variance");
    if (var < 0) var = 0;
    return std::max(0.0, 1.0 - 4.0 * (var + to_double(mc.u)) / (ek * ek));
}

struct mixing_row {
    double c = 0;
    long t = 0;
    double tv_lower = 0;
    double tv_upper = 0;
};

// Certified sandwich on the distance profile from the all-singleton start:
// moment witness below, spectral bound above, both closed-form sums so n can
// be far beyond exact-powering range.
inline std::vector<mixing_row> mixing_profile(int n, const rat& theta, const std::vector<double>& cs,
                                              int heavy_cut = 45, int threads = 1) {
    if (n < 5) throw std::invalid_argument("mixing_profile: need n >= 5");
    std::vector<long> ts(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) ts[i] = profile_steps(n, theta, cs[i]);
    certified_l2 cert = certified_l2_bounds(n, theta, ts, heavy_cut, threads);
    double log_pi = log_stationary_product(n, to_double(theta));
    std::vector<mixing_row> rows(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) {
        rows[i].c = cs[i];
        rows[i].t = ts[i];
        rows[i].tv_upper = tv_upper_from_l2(cert.upper(i));
        rows[i].tv_lower = ts[i] == 0 ? 1.0 - std::exp(-log_pi) : witness_tv(n, theta, ts[i]);
    }
    return rows;
}

// --- Monte Carlo experiments ------------------------------------------------

struct estimate {
    double value = 0;
    double se = 0;
};

inline estimate binomial_estimate(long hits, long reps) {
    double p = static_cast<double>(hits) / static_cast<double>(reps);
    return {p, std::sqrt(p * (1 - p) / static_cast<double>(reps))};
}

namespace detail {

// Replica i draws only from replica_seed(seed, i), so any thread split yields
// the same integer totals; hit returns a bitmask of event indicators.
template <std::size_t K, class Fn>
inline std::array<long, K> count_events(long reps, int threads, Fn&& hit) {
    auto run = [&](long lo, long hi) {
        std::array<long, K> acc{};
        for (long i = lo; i < hi; ++i) {
            unsigned bits = hit(i);
            for (std::size_t b = 0; b < K; ++b)
                if (bits & (1u << b)) ++acc[b];
        }
        return acc;
    };
    if (threads <= 1) return run(0, reps);
    int used = static_cast<int>(std::min<long>(threads, std::max<long>(1, reps)));
    std::vector<std::array<long, K>> part(used);
    std::vector<std::thread> pool;
    long block = (reps + used - 1) / used;
    for (int w = 0; w < used; ++w)
        pool.emplace_back(
            [&, w] { part[w] = run(w * block, std::min(reps, (w + 1) * block)); });
    for (auto& th : pool) th.join();
    std::array<long, K> acc{};
    for (const auto& p : part)
        for (std::size_t b = 0; b < K; ++b) acc[b] += p[b];
    return acc;
}

} // namespace detail

struct lower_bound_report {
    int n = 0;
    rat theta;
    double c = 0;
    long steps = 0;
    long reps = 0;
    double eta = 0;
    estimate chain_below;     // P[d < eta] after `steps` from the all-singleton start
    estimate stat_below;      // same event under pi
    double witness = 0;       // stat_below - chain_below
    double witness_se = 0;
    rat mean_k;               // exact chain moments at `steps`
    rat var_k;
    rat stat_second;          // stationary second moment of d
    double chebyshev_lower = 0; // TV bound from the moments alone
};

// horizon for the witness experiment; positive c pulls below the mixing window
inline long witness_steps(int n, const rat& theta, double c) {
    double scale = 0.5 * std::max(1.0, 1.0 / to_double(theta));
    return std::lround(scale * n * (std::log(static_cast<double>(n)) - c));
}

inline lower_bound_report lower_bound_witness(int n, const rat& theta, double c, long reps,
                                              std::uint64_t seed, int threads = 1) {
    if (n < 5) throw std::invalid_argument("lower_bound_witness: need n >= 5");
    if (theta <= 0) throw std::invalid_argument("lower_bound_witness: theta must be positive");
    if (reps < 1) throw std::invalid_argument("lower_bound_witness: need at least one replica");
    long k = witness_steps(n, theta, c);
    if (k < 1)
        throw std::invalid_argument("lower_bound_witness: horizon must be at least one step");
    lower_bound_report rep;
    rep.n = n;
    rep.theta = theta;
    rep.c = c;
    rep.steps = k;
    rep.reps = reps;
    rep.eta = 0.5 * std::exp(c);
    d_poly d1 = d_poly_row(n, theta);
    double dc0 = to_double(d1.c0), dc1 = to_double(d1.c1);
    partition ones(n, 1);
    rat zero(0);
    auto chain_hit = [&](long i) -> unsigned {
        rng64 r(replica_seed(seed, static_cast<std::uint64_t>(i)));
        partition st = ones;
        for (long s = 0; s < k; ++s) st = sample_step(st, theta, zero, r);
        long m1 = count_small_parts(st).m1;
        return (dc0 + dc1 * m1 < rep.eta) ? 1u : 0u;
    };
    auto stat_hit = [&](long i) -> unsigned {
        rng64 r(replica_seed(seed, static_cast<std::uint64_t>(reps + i)));
        partition st = sample_ewens(n, theta, r);
        long m1 = count_small_parts(st).m1;
        return (dc0 + dc1 * m1 < rep.eta) ? 1u : 0u;
    };
    long chain_hits = detail::count_events<1>(reps, threads, chain_hit)[0];
    long stat_hits = detail::count_events<1>(reps, threads, stat_hit)[0];
    rep.chain_below = binomial_estimate(chain_hits, reps);
    rep.stat_below = binomial_estimate(stat_hits, reps);
    rep.witness = rep.stat_below.value - rep.chain_below.value;
    rep.witness_se = std::hypot(rep.chain_below.se, rep.stat_below.se);
    d_moment_pair mom = d_moments(ones, k, n, theta);
    rep.mean_k = mom.mean;
    rep.var_k = mom.variance;
    rep.stat_second = stationary_d_second_moment(n, theta);
    double mk = to_double(mom.mean);
    if (mk > rep.eta) {
        double bound = 1.0 - to_double(mom.variance) / ((mk - rep.eta) * (mk - rep.eta))
                       - to_double(rep.stat_second) / (rep.eta * rep.eta);
        rep.chebyshev_lower = std::max(0.0, bound);
    }
    return rep;
}

// exact sum_{i=1}^{k} 1/i
inline rat harmonic_sum(int k) {
    rat acc = 0;
    for (int i = 1; i <= k; ++i) acc += rat(1, i);
    return acc;
}

struct fk_report {
    int n = 0;
    int k = 0;
    long t = 0;
    long reps = 0;
    rat theta;
    rat delta;
    rat harmonic;             // exact sum_{i<=k} 1/i, the stationary mean of f_k
    estimate literal_chain;   // P[f_k <= -harmonic/2] after t steps from the one-part start
    estimate literal_stat;    // same event under pi
    estimate centered_chain;  // P[f_k <= harmonic/2]
    estimate centered_stat;
    double gap = 0;           // centered_chain - centered_stat
    double gap_se = 0;
};

// Short-cycle statistic f_k = m_1 + ... + m_k from the one-part start. The
// literal threshold -harmonic/2 is reported as written even though f_k >= 0;
// the centered threshold harmonic/2 separates the two measures.
inline fk_report ncycle_fk_experiment(int n, int k, long t, long reps, std::uint64_t seed,
                                      const rat& theta = rat(1), const rat& delta = rat(0),
                                      int threads = 1) {
    if (n < 2) throw std::invalid_argument("ncycle_fk_experiment: need n >= 2");
    if (k < 1 || 2 * k > n)
        throw std::invalid_argument("ncycle_fk_experiment: need 1 <= k <= n/2");
    if (t < 0) throw std::invalid_argument("ncycle_fk_experiment: negative step count");
    if (reps < 1) throw std::invalid_argument("ncycle_fk_experiment: need at least one replica");
    if (theta <= 0) throw std::invalid_argument("ncycle_fk_experiment: theta must be positive");
    if (delta < 0 || delta >= 1)
        throw std::invalid_argument("ncycle_fk_experiment: delta must lie in [0, 1)");
    fk_report rep;
    rep.n = n;
    rep.k = k;
    rep.t = t;
    rep.reps = reps;
    rep.theta = theta;
    rep.delta = delta;
    rep.harmonic = harmonic_sum(k);
    double half = 0.5 * to_double(rep.harmonic);
    partition cyc{n};
    auto short_parts = [k](const partition& lam) {
        long f = 0;
        for (int p : lam)
            if (p <= k) ++f;
        return f;
    };
    auto bits_for = [&](long f) {
        unsigned bits = 0;
        if (static_cast<double>(f) <= -half) bits |= 1u;
        if (static_cast<double>(f) <= half) bits |= 2u;
        return bits;
    };
    auto chain_hit = [&](long i) -> unsigned {
        rng64 r(replica_seed(seed, static_cast<std::uint64_t>(i)));
        partition st = cyc;
        for (long s = 0; s < t; ++s) st = sample_step(st, theta, delta, r);
        return bits_for(short_parts(st));
    };
    auto stat_hit = [&](long i) -> unsigned {
        rng64 r(replica_seed(seed, static_cast<std::uint64_t>(reps + i)));
        return bits_for(short_parts(sample_ewens(n, theta, r)));
    };
    std::array<long, 2> chain_hits = detail::count_events<2>(reps, threads, chain_hit);
    std::array<long, 2> stat_hits = detail::count_events<2>(reps, threads, stat_hit);
    rep.literal_chain = binomial_estimate(chain_hits[0], reps);
    rep.literal_stat = binomial_estimate(stat_hits[0], reps);
    rep.centered_chain = binomial_estimate(chain_hits[1], reps);
    rep.centered_stat = binomial_estimate(stat_hits[1], reps);
    rep.gap = rep.centered_chain.value - rep.centered_stat.value;
    rep.gap_se = std::hypot(rep.centered_chain.se, rep.centered_stat.se);
    return rep;
}

} // namespace medchain
