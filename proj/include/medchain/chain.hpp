#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "partition.hpp"

namespace medchain {

struct periodicity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// row-sparse stochastic matrix over the canonical partition order
struct sparse_kernel {
    int n = 0;
    rat theta;
    rat delta;
    partition_index idx;
    std::vector<std::map<int, rat>> rows;

    explicit sparse_kernel(int n_) : n(n_), idx(n_) {}
    const std::map<int, rat>& row(const partition& lam) const { return rows[idx.at(lam)]; }
};

// merge two parts w.p. lam_i lam_j / C(n,2) (1 ^ theta); split a part v at an
// offset r w.p. v / C(n,2) (1 ^ 1/theta), halved when r = v/2; remainder holds
inline sparse_kernel build_kernel(int n, const rat& theta, const rat& delta = rat(0)) {
    if (n < 2) throw std::invalid_argument("build_kernel: n must be at least 2");
    if (theta <= 0) throw std::invalid_argument("build_kernel: theta must be positive");
    if (delta < 0 || delta >= 1) throw std::invalid_argument("build_kernel: laziness in [0,1)");
    if (theta == 1 && delta == 0)
        throw periodicity_error("chain has period 2 at theta = 1; laziness required");

    sparse_kernel K(n);
    K.theta = theta;
    K.delta = delta;
    rat pairs = rat(binom(n, 2));
    rat acc_merge = std::min(rat(1), rat(theta));
    rat acc_split = std::min(rat(1), rat(1 / theta));

    for (size_t si = 0; si < K.idx.size(); ++si) {
        const partition& lam = K.idx.list[si];
        std::map<int, rat> row;
        rat off = 0;
        int L = length(lam);
        for (int i = 0; i < L; ++i) {
            for (int j = i + 1; j < L; ++j) {
                partition mu;
                mu.reserve(L - 1);
                for (int t = 0; t < L; ++t)
                    if (t != i && t != j) mu.push_back(lam[t]);
                mu.push_back(lam[i] + lam[j]);
                std::sort(mu.begin(), mu.end(), std::greater<int>());
                rat p = rat(lam[i]) * lam[j] / pairs * acc_merge;
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
                rat p = rat(v) / pairs * acc_split;
                if (2 * r == v) p /= 2;
                row[K.idx.at(mu)] += p;
                off += p;
            }
        }
        rat hold = 1 - off;
        // closed form for the holding mass; stochasticity is non-negotiable
        rat nb2 = 0;
        for (int p : lam) nb2 += rat(binom(p, 2));
        rat hold_closed = 1 - acc_merge + nb2 / pairs * (acc_merge - acc_split);
        if (hold != hold_closed) throw std::logic_error("holding probability mismatch");
        if (hold < 0) throw std::logic_error("negative holding probability");
        if (hold != 0) row[static_cast<int>(si)] += hold;
        if (delta != 0) {
            for (auto& [j, p] : row) p *= 1 - delta;
            row[static_cast<int>(si)] += delta;
        }
        rat sum = 0;
        for (const auto& [j, p] : row) {
            if (p < 0) throw std::logic_error("negative transition probability");
            sum += p;
        }
        if (sum != 1) throw std::logic_error("row sum drift");
        K.rows.push_back(std::move(row));
    }
    return K;
}

// beta_lam = 1 - (theta ^ 1) + (theta n(lam^t) - n(lam)) / ((theta v 1) C(n,2)),
// then delta + (1 - delta) beta
inline rat eigenvalue(const partition& lam, const rat& theta, const rat& delta = rat(0)) {
    int n = weight(lam);
    if (n < 2) throw std::invalid_argument("eigenvalue: n must be at least 2");
    rat base = 1 - std::min(rat(1), rat(theta))
               + (theta * nt_stat(lam) - n_stat(lam)) / (std::max(rat(1), rat(theta)) * rat(binom(n, 2)));
    return delta + (1 - delta) * base;
}

// stationary law pi(rho) = n! theta^{n - len(rho)} / (z_rho Pi_n)
struct ewens_dist {
    int n = 0;
    rat theta;
    rat Pi;          // prod_{i=0}^{n-1} (1 + theta i)
    rat z;           // z_n(1/theta) = Pi theta^{-n}
    partition_index idx;
    std::vector<rat> probs;

    explicit ewens_dist(int n_) : n(n_), idx(n_) {}
    const rat& prob(const partition& rho) const { return probs[idx.at(rho)]; }
};

inline ewens_dist ewens(int n, const rat& theta) {
    if (n < 1) throw std::invalid_argument("ewens: n must be positive");
    if (theta <= 0) throw std::invalid_argument("ewens: theta must be positive");
    ewens_dist d(n);
    d.theta = theta;
    d.Pi = 1;
    for (int i = 1; i < n; ++i) d.Pi *= 1 + theta * i;
    d.z = d.Pi * rat_pow(theta, -n);
    rat nf = rat(factorial(n));
    rat total = 0;
    for (const auto& rho : d.idx.list) {
        rat p = nf * rat_pow(theta, n - length(rho)) / (rat(z_stat(rho)) * d.Pi);
        d.probs.push_back(p);
        total += p;
    }
    if (total != 1) throw std::logic_error("stationary law does not sum to 1");
    return d;
}

// --- sampling -------------------------------------------------------------

// splitmix64 finalizer; replica streams use seed + odd-constant * (replica + 1)
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
    return mix64(master + 0x9e3779b97f4a7c15ull * (replica + 1));
}

// xorshift-free deterministic generator: splitmix64 stream, platform independent
struct rng64 {
    std::uint64_t state;
    explicit rng64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() { return mix64(state++); }
    // uniform in [0, bound) by rejection from the top 2^64 multiple
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t lim = ~0ull - (~0ull % bound + 1) % bound;
        for (;;) {
            std::uint64_t x = next();
            if (x <= lim) return x % bound;
        }
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// one Metropolis transition at the partition level: laziness first, then a
// uniform unordered pair of labels weighted by part sizes
inline partition sample_step(const partition& lam, const rat& theta, const rat& delta,
                             rng64& rng) {
    int n = weight(lam);
    if (delta != 0 && rng.unit() < to_double(delta)) return lam;
    std::uint64_t a = rng.below(n);
    std::uint64_t b = rng.below(n - 1);
    if (b >= a) ++b;
    // map labels to part indices through cumulative sizes
    auto part_of = [&](std::uint64_t label) {
        std::uint64_t acc = 0;
        for (size_t i = 0; i < lam.size(); ++i) {
            acc += lam[i];
            if (label < acc) return static_cast<int>(i);
        }
        throw std::logic_error("label out of range");
    };
    int pi_ = part_of(a), pj = part_of(b);
    if (pi_ != pj) {
        rat acc = std::min(rat(1), rat(theta));
        if (acc != 1 && rng.unit() >= to_double(acc)) return lam;
        partition mu;
        for (int t = 0; t < length(lam); ++t)
            if (t != pi_ && t != pj) mu.push_back(lam[t]);
        mu.push_back(lam[pi_] + lam[pj]);
        std::sort(mu.begin(), mu.end(), std::greater<int>());
        return mu;
    }
    int v = lam[pi_];
    // uniform offset in 1..v-1 reproduces the lumped split law exactly
    int r = static_cast<int>(rng.below(v - 1)) + 1;
    rat acc = std::min(rat(1), rat(1 / theta));
    if (acc != 1 && rng.unit() >= to_double(acc)) return lam;
    partition mu;
    for (int t = 0; t < length(lam); ++t)
        if (t != pi_) mu.push_back(lam[t]);
    mu.push_back(r);
    mu.push_back(v - r);
    std::sort(mu.begin(), mu.end(), std::greater<int>());
    return mu;
}

// Chinese restaurant process with alpha = 1/theta: new table w.p. alpha/(alpha+i-1)
inline partition sample_ewens(int n, const rat& theta, rng64& rng) {
    double alpha = to_double(1 / theta);
    std::vector<int> tables;
    int seated = 0;
    for (int i = 1; i <= n; ++i) {
        double pnew = alpha / (alpha + i - 1);
        if (i == 1 || rng.unit() < pnew) {
            tables.push_back(1);
        } else {
            // join a table with probability proportional to its size
            std::uint64_t pick = rng.below(seated);
            std::uint64_t acc = 0;
            for (auto& t : tables) {
                acc += t;
                if (pick < acc) {
                    ++t;
                    break;
                }
            }
        }
        ++seated;
    }
    std::sort(tables.begin(), tables.end(), std::greater<int>());
    return tables;
}

} // namespace medchain
