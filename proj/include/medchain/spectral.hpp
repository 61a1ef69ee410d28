#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "jack.hpp"

namespace medchain {

struct numeric_instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class run_mode { exact, floating, automatic };

// exact powering stays affordable up to this many states
inline constexpr std::size_t exact_state_cap = 5000;
inline constexpr double float_drift_tol = 1e-12;

inline bool wants_exact(run_mode mode, std::size_t states) {
    if (mode == run_mode::exact) return true;
    if (mode == run_mode::floating) return false;
    return states <= exact_state_cap;
}

// deterministic pairwise reduction; error grows only with the log of the length
inline double pairwise_sum(const double* xs, std::size_t len) {
    if (len <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += xs[i];
        return s;
    }
    std::size_t half = len / 2;
    return pairwise_sum(xs, half) + pairwise_sum(xs + half, len - half);
}

inline double pairwise_sum(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : pairwise_sum(xs.data(), xs.size());
}

// --- eigenfunction system -------------------------------------------------

// squared eigenfunction weights g_lam(rho)^2 = c_{lam,rho}^2 gfac / j_lam with
// gfac = theta^n n! / Pi_n; summing over shapes recovers the stationary law
struct eigen_system {
    int n;
    rat theta;
    rat delta;
    jack_table_t table;
    ewens_dist pi;
    std::vector<rat> beta;   // canonical order
    rat gfac;

    eigen_system(int n_, const rat& th, const rat& de = rat(0))
        : n(n_), theta(th), delta(de), table(jack_table(n_, th)), pi(ewens(n_, th)), gfac(0) {
        if (de < 0 || de >= 1) throw std::invalid_argument("eigen_system: laziness in [0,1)");
        beta.reserve(pi.idx.size());
        for (const auto& lam : pi.idx.list) beta.push_back(eigenvalue(lam, th, de));
        gfac = rat_pow(th, n) * rat(factorial(n)) / pi.Pi;
    }

    rat g2(const partition& lam, const partition& rho) const {
        rat c = table.coeff(lam, rho);
        return c * c * gfac / table.norm(lam);
    }
};

// the m-coefficient row of J_lam is a left eigenvector: c_lam P = beta_lam c_lam
inline std::vector<partition> left_eigen_failures(const eigen_system& sys, const sparse_kernel& K) {
    if (K.n != sys.n || K.theta != sys.theta || K.delta != sys.delta)
        throw std::invalid_argument("left_eigen_failures: kernel and system disagree");
    std::vector<partition> bad;
    const auto& states = K.idx.list;
    for (std::size_t li = 0; li < states.size(); ++li) {
        const partition& lam = states[li];
        std::vector<rat> acc(states.size(), rat(0));
        for (const auto& [rho, cr] : sys.table.row(lam)) {
            int ri = K.idx.at(rho);
            for (const auto& [j, p] : K.rows[ri]) acc[j] += cr * p;
        }
        bool ok = true;
        for (std::size_t j = 0; j < states.size() && ok; ++j)
            ok = acc[j] == sys.beta[li] * sys.table.coeff(lam, states[j]);
        if (!ok) bad.push_back(lam);
    }
    return bad;
}

inline bool left_eigen_check(const eigen_system& sys, const sparse_kernel& K) {
    return left_eigen_failures(sys, K).empty();
}

// pointwise completeness: sum_lam g2(lam, x) = pi(x) and, with f = g / pi,
// sum_lam f2(lam, x) = 1 / pi(x), both exact at every state
inline std::vector<partition> completeness_failures(const eigen_system& sys) {
    std::vector<partition> bad;
    const auto& states = sys.pi.idx.list;
    for (std::size_t xi = 0; xi < states.size(); ++xi) {
        const partition& x = states[xi];
        rat inv_pi = rat(z_stat(x)) * sys.pi.Pi * rat_pow(sys.theta, length(x) - sys.n)
                     / rat(factorial(sys.n));
        rat sum_g = 0, sum_f = 0;
        for (const auto& lam : states) {
            rat g = sys.g2(lam, x);
            sum_g += g;
            sum_f += g * inv_pi * inv_pi;
        }
        if (sum_g != sys.pi.probs[xi] || sum_f != inv_pi) bad.push_back(x);
    }
    return bad;
}

inline bool completeness_check(const eigen_system& sys) {
    return completeness_failures(sys).empty();
}

// --- kernel representations for powering ----------------------------------

struct float_kernel {
    int n = 0;
    double theta = 0;
    double delta = 0;
    partition_index idx;
    std::vector<std::vector<std::pair<int, double>>> rows;

    explicit float_kernel(int n_) : n(n_), idx(n_) {}
};

inline float_kernel to_float(const sparse_kernel& K) {
    float_kernel F(K.n);
    F.theta = to_double(K.theta);
    F.delta = to_double(K.delta);
    F.rows.reserve(K.rows.size());
    for (const auto& row : K.rows) {
        std::vector<std::pair<int, double>> r;
        r.reserve(row.size());
        for (const auto& [j, p] : row) r.emplace_back(j, to_double(p));
        F.rows.push_back(std::move(r));
    }
    return F;
}

// same transition law as build_kernel, assembled directly in doubles so large
// state spaces never pay for exact arithmetic
inline float_kernel build_kernel_float(int n, const rat& theta, const rat& delta = rat(0)) {
    if (n < 2) throw std::invalid_argument("build_kernel_float: n must be at least 2");
    if (theta <= 0) throw std::invalid_argument("build_kernel_float: theta must be positive");
    if (delta < 0 || delta >= 1) throw std::invalid_argument("build_kernel_float: laziness in [0,1)");
    if (theta == 1 && delta == 0)
        throw periodicity_error("chain has period 2 at theta = 1; laziness required");

    float_kernel K(n);
    K.theta = to_double(theta);
    K.delta = to_double(delta);
    double pairs = static_cast<double>(n) * (n - 1) / 2;
    double acc_merge = std::min(1.0, K.theta);
    double acc_split = std::min(1.0, 1.0 / K.theta);
    double de = K.delta;

    for (std::size_t si = 0; si < K.idx.size(); ++si) {
        const partition& lam = K.idx.list[si];
        std::map<int, double> row;
        double off = 0;
        int L = length(lam);
        for (int i = 0; i < L; ++i) {
            for (int j = i + 1; j < L; ++j) {
                partition mu;
                mu.reserve(L - 1);
                for (int t = 0; t < L; ++t)
                    if (t != i && t != j) mu.push_back(lam[t]);
                mu.push_back(lam[i] + lam[j]);
                std::sort(mu.begin(), mu.end(), std::greater<int>());
                double p = static_cast<double>(lam[i]) * lam[j] / pairs * acc_merge;
                row[K.idx.at(mu)] += p;
                off += p;
            }
            int v = lam[i];
            for (int r = 1; 2 * r <= v; ++r) {
                partition mu;
                mu.reserve(L + 1);
                for (int t = 0; t < L; ++t)
                    if (t != i) mu.push_back(lam[t]);
                mu.push_back(r);
                mu.push_back(v - r);
                std::sort(mu.begin(), mu.end(), std::greater<int>());
                double p = static_cast<double>(v) / pairs * acc_split;
                if (2 * r == v) p /= 2;
                row[K.idx.at(mu)] += p;
                off += p;
            }
        }
        double nb2 = 0;
        for (int p : lam) nb2 += static_cast<double>(p) * (p - 1) / 2;
        double hold = 1 - acc_merge + nb2 / pairs * (acc_merge - acc_split);
        if (std::fabs(hold - (1 - off)) > 1e-9)
            throw std::logic_error("holding probability mismatch");
        if (hold > 0) row[static_cast<int>(si)] += hold;
        std::vector<std::pair<int, double>> flat;
        flat.reserve(row.size() + 1);
        if (de != 0) {
            for (auto& [j, p] : row) p *= 1 - de;
            row[static_cast<int>(si)] += de;
        }
        for (const auto& [j, p] : row) flat.emplace_back(j, p);
        K.rows.push_back(std::move(flat));
    }
    return K;
}

// kernel scaled to integers over one common denominator; exact powering then
// runs on integer vectors with a single denominator power, no gcd churn
struct scaled_kernel {
    int n = 0;
    bigint denom;
    std::vector<std::vector<std::pair<int, bigint>>> rows;
};

inline scaled_kernel to_scaled(const sparse_kernel& K) {
    scaled_kernel S;
    S.n = K.n;
    bigint L = 1;
    for (const auto& row : K.rows)
        for (const auto& [j, p] : row) {
            bigint d = p.get_den();
            mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), d.get_mpz_t());
        }
    S.denom = L;
    S.rows.reserve(K.rows.size());
    for (const auto& row : K.rows) {
        std::vector<std::pair<int, bigint>> r;
        r.reserve(row.size());
        bigint sum = 0;
        for (const auto& [j, p] : row) {
            bigint e = bigint(p.get_num()) * (L / p.get_den());
            sum += e;
            r.emplace_back(j, std::move(e));
        }
        if (sum != L) throw std::logic_error("scaled row drift");
        S.rows.push_back(std::move(r));
    }
    return S;
}

struct scaled_vector {
    bigint denom = 1;
    std::vector<bigint> num;
};

inline scaled_vector scaled_point_mass(std::size_t states, int start_index) {
    scaled_vector v;
    v.num.assign(states, bigint(0));
    v.num[start_index] = 1;
    return v;
}

inline void scaled_step(const scaled_kernel& S, scaled_vector& v) {
    std::vector<bigint> w(v.num.size(), bigint(0));
    for (std::size_t i = 0; i < v.num.size(); ++i) {
        if (v.num[i] == 0) continue;
        for (const auto& [j, e] : S.rows[i]) w[j] += v.num[i] * e;
    }
    v.num = std::move(w);
    v.denom *= S.denom;
}

inline std::vector<rat> to_rats(const scaled_vector& v) {
    std::vector<rat> out;
    out.reserve(v.num.size());
    rat d(v.denom);
    for (const auto& x : v.num) out.push_back(rat(x) / d);
    return out;
}

inline void float_step(const float_kernel& K, std::vector<double>& v) {
    std::vector<double> w(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double vi = v[i];
        if (vi == 0.0) continue;
        for (const auto& [j, p] : K.rows[i]) w[j] += vi * p;
    }
    double total = pairwise_sum(w);
    if (!(std::fabs(total - 1.0) <= float_drift_tol))
        throw numeric_instability_error("probability mass drifted to " + std::to_string(total));
    for (double& x : w) x /= total;
    v = std::move(w);
}

// --- distribution powering and distances ----------------------------------

struct prob_vector {
    int n = 0;
    bool exact = true;
    std::vector<rat> pr;
    std::vector<double> pf;

    std::size_t size() const { return exact ? pr.size() : pf.size(); }
};

inline prob_vector distribution_at(const sparse_kernel& K, const partition& start, long k,
                                   run_mode mode = run_mode::automatic) {
    if (k < 0) throw std::invalid_argument("distribution_at: negative step count");
    prob_vector out;
    out.n = K.n;
    out.exact = wants_exact(mode, K.idx.size());
    int si = K.idx.at(start);
    if (out.exact) {
        scaled_kernel S = to_scaled(K);
        scaled_vector v = scaled_point_mass(K.idx.size(), si);
        for (long step = 0; step < k; ++step) scaled_step(S, v);
        out.pr = to_rats(v);
    } else {
        float_kernel F = to_float(K);
        out.pf.assign(K.idx.size(), 0.0);
        out.pf[si] = 1.0;
        for (long step = 0; step < k; ++step) float_step(F, out.pf);
    }
    return out;
}

inline std::vector<double> to_float(const ewens_dist& pi) {
    std::vector<double> out;
    out.reserve(pi.probs.size());
    for (const auto& p : pi.probs) out.push_back(to_double(p));
    return out;
}

inline rat tv_distance(const std::vector<rat>& v, const ewens_dist& pi) {
    if (v.size() != pi.probs.size()) throw std::invalid_argument("tv_distance: size mismatch");
    rat acc = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        rat d = v[i] - pi.probs[i];
        if (d < 0) d = -d;
        acc += d;
    }
    return acc / 2;
}

inline double tv_distance(const std::vector<double>& v, const std::vector<double>& pi) {
    if (v.size() != pi.size()) throw std::invalid_argument("tv_distance: size mismatch");
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = std::fabs(v[i] - pi[i]);
    return 0.5 * pairwise_sum(d);
}

inline double tv_distance(const prob_vector& v, const ewens_dist& pi) {
    if (v.exact) return to_double(tv_distance(v.pr, pi));
    return tv_distance(v.pf, to_float(pi));
}

inline rat chi2_direct(const std::vector<rat>& v, const ewens_dist& pi) {
    if (v.size() != pi.probs.size()) throw std::invalid_argument("chi2_direct: size mismatch");
    rat acc = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        rat d = v[i] - pi.probs[i];
        acc += d * d / pi.probs[i];
    }
    return acc;
}

inline double chi2_direct(const std::vector<double>& v, const std::vector<double>& pi) {
    if (v.size() != pi.size()) throw std::invalid_argument("chi2_direct: size mismatch");
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double e = v[i] - pi[i];
        d[i] = e * e / pi[i];
    }
    return pairwise_sum(d);
}

// chi^2(start, k) = (1/pi(start)^2) sum_{lam != (n)} beta_lam^{2k} c_{lam,start}^2 gfac / j_lam
inline rat l2_distance(const eigen_system& sys, const partition& start, long k) {
    if (k < 0) throw std::invalid_argument("l2_distance: negative step count");
    const auto& states = sys.pi.idx.list;
    rat acc = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const partition& lam = states[i];
        if (length(lam) == 1) continue;   // the constant eigenfunction
        rat c = sys.table.coeff(lam, start);
        if (c == 0) continue;
        acc += rat_pow(sys.beta[i], 2 * k) * c * c * sys.gfac / sys.table.norm(lam);
    }
    rat px = sys.pi.prob(start);
    return acc / (px * px);
}

// spectral sum split into first-part groups for nonnegative eigenvalues and
// length groups for negative ones; groups add back to the full distance
struct l2_groups {
    std::map<int, rat> by_largest_part;
    std::map<int, rat> by_length;
    rat total = 0;
};

inline l2_groups l2_bound_by_lambda1(const eigen_system& sys, const partition& start, long k) {
    if (k < 0) throw std::invalid_argument("l2_bound_by_lambda1: negative step count");
    l2_groups out;
    const auto& states = sys.pi.idx.list;
    rat px = sys.pi.prob(start);
    rat scale = 1 / (px * px);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const partition& lam = states[i];
        if (length(lam) == 1) continue;
        rat c = sys.table.coeff(lam, start);
        if (c == 0) continue;
        rat term = rat_pow(sys.beta[i], 2 * k) * c * c * sys.gfac / sys.table.norm(lam) * scale;
        if (sys.beta[i] >= 0)
            out.by_largest_part[lam[0]] += term;
        else
            out.by_length[length(lam)] += term;
        out.total += term;
    }
    return out;
}

inline bool sandwich_check(const sparse_kernel& K, const eigen_system& sys,
                           const partition& start, long k) {
    if (K.n != sys.n || K.theta != sys.theta || K.delta != sys.delta)
        throw std::invalid_argument("sandwich_check: kernel and system disagree");
    prob_vector v = distribution_at(K, start, k, run_mode::exact);
    rat tv = tv_distance(v.pr, sys.pi);
    return 4 * tv * tv <= l2_distance(sys, start, k);
}

// --- mixing profiles ------------------------------------------------------

// t(c) = round((1/2)(1 v 1/theta) n (log n + c)), clamped at zero
inline long profile_steps(int n, const rat& theta, double c) {
    double coef = 0.5 * std::max(1.0, to_double(rat(1) / theta)) * static_cast<double>(n);
    long t = std::lround(coef * (std::log(static_cast<double>(n)) + c));
    return t < 0 ? 0 : t;
}

struct tv_profile_row {
    double c = 0;
    long t = 0;
    double tv = 0;
    double l2 = 0;   // direct chi-square of the powered distribution
};

// one powering pass shared by the whole c-grid
inline std::vector<tv_profile_row> tv_profile(const sparse_kernel& K, const ewens_dist& pi,
                                              const partition& start, const std::vector<double>& cs,
                                              run_mode mode = run_mode::automatic) {
    if (K.n != pi.n || K.theta != pi.theta)
        throw std::invalid_argument("tv_profile: kernel and stationary law disagree");
    std::vector<tv_profile_row> rows(cs.size());
    std::map<long, std::vector<std::size_t>> at;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        rows[i].c = cs[i];
        rows[i].t = profile_steps(K.n, K.theta, cs[i]);
        at[rows[i].t].push_back(i);
    }
    long tmax = at.empty() ? 0 : at.rbegin()->first;
    int si = K.idx.at(start);
    auto record = [&](long t, double tv, double l2) {
        auto it = at.find(t);
        if (it == at.end()) return;
        for (std::size_t i : it->second) {
            rows[i].tv = tv;
            rows[i].l2 = l2;
        }
    };
    if (wants_exact(mode, K.idx.size())) {
        scaled_kernel S = to_scaled(K);
        scaled_vector v = scaled_point_mass(K.idx.size(), si);
        for (long t = 0; t <= tmax; ++t) {
            if (at.count(t)) {
                std::vector<rat> vr = to_rats(v);
                record(t, to_double(tv_distance(vr, pi)), to_double(chi2_direct(vr, pi)));
            }
            if (t < tmax) scaled_step(S, v);
        }
    } else {
        float_kernel F = to_float(K);
        std::vector<double> pif = to_float(pi);
        std::vector<double> v(K.idx.size(), 0.0);
        v[si] = 1.0;
        for (long t = 0; t <= tmax; ++t) {
            if (at.count(t)) record(t, tv_distance(v, pif), chi2_direct(v, pif));
            if (t < tmax) float_step(F, v);
        }
    }
    return rows;
}

// profile variant that never builds the kernel: float transition rows on the fly
inline std::vector<tv_profile_row> tv_profile(const float_kernel& K, const std::vector<double>& pi,
                                              const partition& start, const std::vector<double>& cs,
                                              const rat& theta) {
    std::vector<tv_profile_row> rows(cs.size());
    std::map<long, std::vector<std::size_t>> at;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        rows[i].c = cs[i];
        rows[i].t = profile_steps(K.n, theta, cs[i]);
        at[rows[i].t].push_back(i);
    }
    long tmax = at.empty() ? 0 : at.rbegin()->first;
    std::vector<double> v(K.idx.size(), 0.0);
    v[K.idx.at(start)] = 1.0;
    for (long t = 0; t <= tmax; ++t) {
        auto it = at.find(t);
        if (it != at.end()) {
            double tv = tv_distance(v, pi);
            double l2 = chi2_direct(v, pi);
            for (std::size_t i : it->second) {
                rows[i].tv = tv;
                rows[i].l2 = l2;
            }
        }
        if (t < tmax) float_step(K, v);
    }
    return rows;
}

// --- certified bounds at sizes beyond any powering ------------------------

inline constexpr double pi_d = 3.141592653589793238462643383279502884;

inline double safe_exp(double a) {
    return a > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(a);
}

inline rat beta_from_stats(int n, long nt, long nl, const rat& theta) {
    return 1 - std::min(rat(1), rat(theta))
           + (theta * rat(nt) - rat(nl)) / (std::max(rat(1), rat(theta)) * rat(binom(n, 2)));
}

// log of the pairwise hook product at parameter p
inline double log_hook_pair(const partition& mu, double p) {
    if (mu.empty()) return 0.0;
    partition mt = conjugate(mu);
    double lj = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (int j = 1; j <= mu[i]; ++j) {
            double a = mu[i] - j;
            double l = mt[j - 1] - static_cast<double>(i + 1);
            lj += std::log((a + 1) * p + l) + std::log(a * p + l + 1);
        }
    return lj;
}

// log j_{(s, mu)} from log j_mu: new first-row cells up to mu_1, then the bare
// tail through prefix sums A[i] = sum_{j<=i} log(j p), B[i] = sum_{j<=i} log(1 + j p)
inline double log_hook_pair_extend(int s, double logj_mu, const partition& conj_mu, double p,
                                   const std::vector<double>& A, const std::vector<double>& B) {
    double lj = logj_mu;
    int k = static_cast<int>(conj_mu.size());
    for (int j = 1; j <= k; ++j) {
        double c = conj_mu[j - 1];
        lj += std::log((s - j + 1) * p + c) + std::log((s - j) * p + c + 1);
    }
    return lj + A[s - k] + B[s - k - 1];
}

// largest eigenvalue over shapes with largest part s: the two-row shape when
// it dominates, otherwise the linear envelope
inline double cap_largest_part(int n, int s, const rat& theta) {
    if (2 * s >= n) {
        long nt = static_cast<long>(s) * (s - 1) / 2
                  + static_cast<long>(n - s) * (n - s - 1) / 2;
        return to_double(beta_from_stats(n, nt, n - s, theta));
    }
    return 1.0 - to_double(std::min(rat(1), rat(theta))) * (1.0 - double(s - 1) / double(n - 1));
}

// certified overcount of sum over shapes with largest part s of the stationary
// spectral weights F_lam = Pi_n n! theta^n / j_lam
inline double log_tail_mass(int n, int s, double p, double log_pi_prod) {
    return std::lgamma(n + 1.0) + pi_d * pi_d / (12.0 * p * p) + (1.0 - s) * std::log(p)
           + log_pi_prod - std::lgamma(s + 1.0) - std::lgamma(static_cast<double>(s))
           - std::log(static_cast<double>(s)) / p - std::lgamma(n - s + 1.0);
}

struct certified_l2 {
    std::vector<long> ts;
    std::vector<double> enumerated;   // spectral mass over the enumerated shapes
    std::vector<double> tails;        // certified remainder over uncovered groups
    double heavy_mass = 0;            // enumerated relative stationary mass
    double transpose_mass = 0;

    double upper(std::size_t i) const { return enumerated[i] + tails[i]; }
};

// upper bound on chi^2 from the all-singleton start: shapes with largest part
// >= n - heavy_cut and their transposes are enumerated exactly (log scale);
// every remaining first-part or length group is covered by a certified tail
inline certified_l2 certified_l2_bounds(int n, const rat& theta, const std::vector<long>& ts,
                                        int heavy_cut = 45, int threads = 1) {
    if (n < 4) throw std::invalid_argument("certified_l2_bounds: n too small");
    if (theta <= 0) throw std::invalid_argument("certified_l2_bounds: theta must be positive");
    if (heavy_cut < 1 || 2 * heavy_cut >= n - 1)
        throw std::invalid_argument("certified_l2_bounds: enumerated regions must stay disjoint");
    certified_l2 out;
    out.ts = ts;
    out.enumerated.assign(ts.size(), 0.0);
    out.tails.assign(ts.size(), 0.0);

    double thf = to_double(theta);
    double rf = to_double(rat(1) / theta);
    auto prefixes = [&](double p, std::vector<double>& A, std::vector<double>& B) {
        A.assign(n + 1, 0.0);
        B.assign(n + 1, 0.0);
        for (int i = 1; i <= n; ++i) {
            A[i] = A[i - 1] + std::log(i * p);
            B[i] = B[i - 1] + std::log(1.0 + i * p);
        }
    };
    std::vector<double> At, Bt, Ar, Br;
    prefixes(thf, At, Bt);
    prefixes(rf, Ar, Br);

    double log_pi_t = 0, log_pi_r = 0;
    for (int i = 1; i < n; ++i) {
        log_pi_t += std::log(1 + thf * i);
        log_pi_r += std::log(1 + rf * i);
    }
    double log_c_t = log_pi_t + std::lgamma(n + 1.0) + n * std::log(thf);
    double log_c_r = log_pi_r + std::lgamma(n + 1.0) + n * std::log(rf);
    double log_ratio = log_pi_t - log_pi_r;

    struct slice {
        std::vector<double> ub;
        double heavy = 0, transpose = 0;
    };
    std::vector<slice> per_m(heavy_cut + 1);

    auto run_m = [&](int m) {
        slice& sl = per_m[m];
        sl.ub.assign(ts.size(), 0.0);
        int s = n - m;
        std::vector<partition> mus;
        if (m == 0)
            mus.push_back({});
        else
            mus = partitions_of(m);
        for (const auto& mu : mus) {
            partition cmu = conjugate(mu);
            long nt = static_cast<long>(s) * (s - 1) / 2 + nt_stat(mu);
            long nl = n_stat(mu) + m;
            auto add = [&](double logF, const rat& beta) {
                double b = std::fabs(to_double(beta));
                if (b > 0) {
                    double lb = std::log(b);
                    for (std::size_t i = 0; i < ts.size(); ++i)
                        sl.ub[i] += safe_exp(logF + 2.0 * ts[i] * lb);
                } else {
                    for (std::size_t i = 0; i < ts.size(); ++i)
                        if (ts[i] == 0) sl.ub[i] += safe_exp(logF);
                }
            };
            if (m > 0) {   // the shape (s, mu) itself; m = 0 would be (n)
                double lj = log_hook_pair_extend(s, log_hook_pair(mu, thf), cmu, thf, At, Bt);
                double logF = log_c_t - lj;
                sl.heavy += std::exp(logF - log_pi_t);
                add(logF, beta_from_stats(n, nt, nl, theta));
            }
            // the transpose of (s, mu): weight transported from parameter 1/theta,
            // eigenvalue from the swapped statistics
            double ljr = log_hook_pair_extend(s, log_hook_pair(mu, rf), cmu, rf, Ar, Br);
            double logFT = log_ratio + (log_c_r - ljr);
            sl.transpose += std::exp(logFT - log_pi_t);
            add(logFT, beta_from_stats(n, nl, nt, theta));
        }
    };

    int tn = std::max(1, threads);
    if (tn == 1) {
        for (int m = 0; m <= heavy_cut; ++m) run_m(m);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(tn);
        for (int w = 0; w < tn; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    int m = next.fetch_add(1);
                    if (m > heavy_cut) return;
                    run_m(m);
                }
            });
        for (auto& th : pool) th.join();
    }
    for (int m = 0; m <= heavy_cut; ++m) {
        for (std::size_t i = 0; i < ts.size(); ++i) out.enumerated[i] += per_m[m].ub[i];
        out.heavy_mass += per_m[m].heavy;
        out.transpose_mass += per_m[m].transpose;
    }

    for (int s = 2; s <= n - heavy_cut - 1; ++s) {
        double cap = cap_largest_part(n, s, theta);
        double ls_pos = log_tail_mass(n, s, thf, log_pi_t);
        double ls_neg = log_ratio + log_tail_mass(n, s, rf, log_pi_r);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (cap > 0) {
                double lc = std::log(cap);
                out.tails[i] += safe_exp(2.0 * ts[i] * lc + ls_pos)
                                + safe_exp(2.0 * ts[i] * lc + ls_neg);
            } else if (ts[i] == 0) {
                out.tails[i] += safe_exp(ls_pos) + safe_exp(ls_neg);
            }
        }
    }
    return out;
}

inline double tv_upper_from_l2(double l2) {
    return std::min(1.0, 0.5 * std::sqrt(l2));
}

// --- one-row start at theta = 1: hook spectral sums -----------------------

// beta_{(s, 1^{n-s})} at theta = 1 with laziness
inline rat hook_eigenvalue(int n, int s, const rat& delta) {
    rat base = (rat(binom(s, 2)) - rat(binom(n - s + 1, 2))) / rat(binom(n, 2));
    return delta + (1 - delta) * base;
}

// chi^2 of the t-step law from the one-row start at theta = 1; only hook
// shapes carry weight and each contributes beta^{2t} exactly
inline rat ncycle_chi2_theta1(int n, long t, const rat& delta) {
    if (n < 2) throw std::invalid_argument("ncycle_chi2_theta1: n must be at least 2");
    rat acc = 0;
    for (int s = 1; s < n; ++s) acc += rat_pow(hook_eigenvalue(n, s, delta), 2 * t);
    return acc;
}

// smallest t with chi^2 <= 4 eps^2, i.e. the L2 certificate for TV <= eps
inline long ncycle_l2_mixing_time(int n, const rat& delta, const rat& chi2_bound = rat(1, 4)) {
    long t = 1;
    while (ncycle_chi2_theta1(n, t, delta) > chi2_bound) ++t;
    return t;
}

} // namespace medchain
