#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <medchain/chain.hpp>

using namespace medchain;

namespace {

std::vector<std::vector<rat>> dense(const sparse_kernel& K) {
    size_t m = K.idx.size();
    std::vector<std::vector<rat>> M(m, std::vector<rat>(m, rat(0)));
    for (size_t i = 0; i < m; ++i)
        for (const auto& [j, p] : K.rows[i]) M[i][j] = p;
    return M;
}

std::vector<std::vector<rat>> matmul(const std::vector<std::vector<rat>>& A,
                                     const std::vector<std::vector<rat>>& B) {
    size_t m = A.size();
    std::vector<std::vector<rat>> C(m, std::vector<rat>(m, rat(0)));
    for (size_t i = 0; i < m; ++i)
        for (size_t k = 0; k < m; ++k) {
            if (A[i][k] == 0) continue;
            for (size_t j = 0; j < m; ++j) C[i][j] += A[i][k] * B[k][j];
        }
    return C;
}

} // namespace

TEST_CASE("frozen kernel rows") {
    auto K = build_kernel(3, rat(2));
    auto M = dense(K);
    // states in order (3),(2,1),(1,1,1)
    REQUIRE(M[0] == std::vector<rat>{rat(1, 2), rat(1, 2), rat(0)});
    REQUIRE(M[1] == std::vector<rat>{rat(2, 3), rat(1, 6), rat(1, 6)});
    REQUIRE(M[2] == std::vector<rat>{rat(0), rat(1), rat(0)});

    auto K2 = build_kernel(2, rat(1, 3));
    auto M2 = dense(K2);
    REQUIRE(M2[0] == std::vector<rat>{rat(0), rat(1)});
    REQUIRE(M2[1] == std::vector<rat>{rat(1, 3), rat(2, 3)});
}

TEST_CASE("laziness shifts the diagonal") {
    for (const rat& th : {rat(1, 2), rat(2)}) {
        auto plain = dense(build_kernel(5, th));
        auto lazy = dense(build_kernel(5, th, rat(1, 5)));
        for (size_t i = 0; i < plain.size(); ++i)
            for (size_t j = 0; j < plain.size(); ++j) {
                rat expect = plain[i][j] * rat(4, 5);
                if (i == j) expect += rat(1, 5);
                REQUIRE(lazy[i][j] == expect);
            }
    }
}

TEST_CASE("kernel argument validation") {
    REQUIRE_THROWS_AS(build_kernel(3, rat(1)), periodicity_error);
    REQUIRE_NOTHROW(build_kernel(3, rat(1), rat(1, 3)));
    REQUIRE_THROWS_AS(build_kernel(1, rat(2)), std::invalid_argument);
    REQUIRE_THROWS_AS(build_kernel(3, rat(0)), std::invalid_argument);
    REQUIRE_THROWS_AS(build_kernel(3, rat(2), rat(1)), std::invalid_argument);
    REQUIRE_THROWS_AS(build_kernel(3, rat(2), rat(-1, 2)), std::invalid_argument);
}

TEST_CASE("row sums detailed balance stationarity") {
    for (int n = 2; n <= 10; ++n)
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(2), rat(3)})
            for (const rat& dl : {rat(0), rat(1, n)}) {
                auto K = build_kernel(n, th, dl);
                auto pi = ewens(n, th);
                size_t m = K.idx.size();
                for (size_t i = 0; i < m; ++i) {
                    rat sum = 0;
                    for (const auto& [j, p] : K.rows[i]) {
                        REQUIRE(p >= 0);
                        sum += p;
                    }
                    REQUIRE(sum == 1);
                }
                // pi(a) P(a,b) = pi(b) P(b,a) over the sparsity pattern
                auto entry = [&](size_t a, size_t b) {
                    auto it = K.rows[a].find(static_cast<int>(b));
                    return it == K.rows[a].end() ? rat(0) : it->second;
                };
                for (size_t a = 0; a < m; ++a)
                    for (const auto& [b, p] : K.rows[a])
                        REQUIRE(pi.probs[a] * p == pi.probs[b] * entry(b, a));
                for (size_t b = 0; b < m; ++b) {
                    rat acc = 0;
                    for (size_t a = 0; a < m; ++a) acc += pi.probs[a] * entry(a, b);
                    REQUIRE(acc == pi.probs[b]);
                }
            }
}

TEST_CASE("holding probability closed form") {
    for (int n = 2; n <= 12; ++n)
        for (const rat& th : {rat(1, 3), rat(2)}) {
            auto K = build_kernel(n, th);
            rat am = std::min(rat(1), rat(th)), as = std::min(rat(1), rat(1 / th));
            for (size_t i = 0; i < K.idx.size(); ++i) {
                const auto& lam = K.idx.list[i];
                rat frac = rat(nt_stat(lam)) / rat(binom(n, 2));
                rat hold = 1 - am + frac * (am - as);
                auto it = K.rows[i].find(static_cast<int>(i));
                REQUIRE((it == K.rows[i].end() ? rat(0) : it->second) == hold);
            }
        }
}

TEST_CASE("eigenvalue formula") {
    for (const rat& th : {rat(1, 3), rat(1), rat(2)})
        for (int n = 2; n <= 8; ++n) {
            REQUIRE(eigenvalue(partition{n}, th) == 1);
            REQUIRE(eigenvalue(partition{n}, th, rat(1, n)) == 1);
            REQUIRE(eigenvalue(partition(n, 1), th)
                    == 1 - std::min(rat(1), rat(th)) - std::min(rat(1), rat(1 / th)));
            for (const auto& lam : partitions_of(n))
                REQUIRE(eigenvalue(lam, th, rat(1, n))
                        == rat(1, n) + rat(n - 1, n) * eigenvalue(lam, th));
        }
    REQUIRE(eigenvalue({2, 1}, rat(2)) == rat(1, 6));
    REQUIRE(eigenvalue({1, 1, 1}, rat(2)) == rat(-1, 2));
}

TEST_CASE("spectrum matches power traces") {
    for (int n : {4, 6, 8})
        for (const rat& th : {rat(1, 2), rat(2)})
            for (const rat& dl : {rat(0), rat(1, n)}) {
                auto K = build_kernel(n, th, dl);
                auto M = dense(K);
                auto Pk = M;
                size_t m = M.size();
                for (size_t k = 1; k <= m; ++k) {
                    rat trace = 0;
                    for (size_t i = 0; i < m; ++i) trace += Pk[i][i];
                    rat spec = 0;
                    for (const auto& lam : K.idx.list) {
                        rat b = eigenvalue(lam, th, dl);
                        spec += rat_pow(b, static_cast<long>(k));
                    }
                    REQUIRE(trace == spec);
                    if (k < m) Pk = matmul(Pk, M);
                }
            }
}

TEST_CASE("affine relation to the unaccepted walk") {
    // T has merge mass lam_i lam_j / C(n,2) and split mass v / (theta C(n,2))
    for (int n = 2; n <= 8; ++n)
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(2), rat(3)}) {
            auto P = dense(build_kernel(n, th));
            partition_index idx(n);
            size_t m = P.size();
            std::vector<std::vector<rat>> T(m, std::vector<rat>(m, rat(0)));
            rat pairs = rat(binom(n, 2));
            for (size_t si = 0; si < m; ++si) {
                const auto& lam = idx.list[si];
                rat off = 0;
                int L = length(lam);
                for (int i = 0; i < L; ++i) {
                    for (int j = i + 1; j < L; ++j) {
                        partition mu;
                        for (int t = 0; t < L; ++t)
                            if (t != i && t != j) mu.push_back(lam[t]);
                        mu.push_back(lam[i] + lam[j]);
                        std::sort(mu.begin(), mu.end(), std::greater<int>());
                        rat p = rat(lam[i]) * lam[j] / pairs;
                        T[si][idx.at(mu)] += p;
                        off += p;
                    }
                    for (int r = 1; 2 * r <= lam[i]; ++r) {
                        partition mu;
                        for (int t = 0; t < L; ++t)
                            if (t != i) mu.push_back(lam[t]);
                        mu.push_back(r);
                        mu.push_back(lam[i] - r);
                        std::sort(mu.begin(), mu.end(), std::greater<int>());
                        rat p = rat(lam[i]) / (pairs * th);
                        if (2 * r == lam[i]) p /= 2;
                        T[si][idx.at(mu)] += p;
                        off += p;
                    }
                }
                T[si][si] = 1 - off;
            }
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < m; ++j) {
                    rat expect = th < 1 ? th * T[i][j] + (i == j ? 1 - th : rat(0)) : T[i][j];
                    REQUIRE(P[i][j] == expect);
                }
        }
}

namespace {

std::vector<std::pair<partition, partition>> dominance_covers(int n) {
    auto ps = medchain::partitions_of(n);
    std::vector<std::pair<partition, partition>> covers;
    for (const auto& lam : ps)
        for (const auto& mu : ps) {
            if (lam == mu || !dominance_leq(mu, lam)) continue;
            bool cover = true;
            for (const auto& nu : ps) {
                if (nu == lam || nu == mu) continue;
                if (dominance_leq(mu, nu) && dominance_leq(nu, lam)) {
                    cover = false;
                    break;
                }
            }
            if (cover) covers.emplace_back(lam, mu);
        }
    return covers;
}

} // namespace

TEST_CASE("eigenvalue monotonicity and bounds") {
    const rat grid[] = {rat(1, 3), rat(1, 2), rat(1), rat(2), rat(3)};
    for (int n = 2; n <= 12; ++n) {
        auto covers = dominance_covers(n);
        for (const rat& th : grid) {
            for (const auto& [lam, mu] : covers)
                REQUIRE(eigenvalue(lam, th) >= eigenvalue(mu, th));
            rat top = eigenvalue(partition{n}, th);
            for (const auto& lam : partitions_of(n)) {
                rat b = eigenvalue(lam, th);
                REQUIRE(b <= top);
                int l1 = lam[0];
                partition two_row{l1};
                if (n - l1 > 0) {
                    two_row = l1 >= n - l1 ? partition{l1, n - l1} : partition{n - l1, l1};
                }
                REQUIRE(b <= eigenvalue(two_row, th));
                partition hook{l1};
                for (int i = l1; i < n; ++i) hook.push_back(1);
                REQUIRE(b >= eigenvalue(hook, th));
                rat unit = std::min(rat(1), rat(th));
                if (2 * l1 >= n)
                    REQUIRE(b <= 1 - unit * rat(2L * l1 * (n - l1)) / rat(static_cast<long>(n) * (n - 1)));
                REQUIRE(b <= 1 - unit * (1 - rat(l1 - 1, n - 1)));
                if (b < 0) {
                    rat bt = eigenvalue(conjugate(lam), th);
                    REQUIRE(bt > 0);
                    REQUIRE(-b <= bt);
                }
            }
        }
    }
}

TEST_CASE("stationary distribution") {
    auto d2 = ewens(2, rat(2));
    REQUIRE(d2.prob({2}) == rat(2, 3));
    REQUIRE(d2.prob({1, 1}) == rat(1, 3));
    auto d3 = ewens(3, rat(2));
    REQUIRE(d3.probs == std::vector<rat>{rat(8, 15), rat(2, 5), rat(1, 15)});
    REQUIRE(d3.Pi == 15);
    REQUIRE(d3.z == rat(15, 8));
    for (int n = 2; n <= 8; ++n) {
        auto u = ewens(n, rat(1));
        for (const auto& rho : partitions_of(n))
            REQUIRE(u.prob(rho) == rat(1) / rat(z_stat(rho)));
    }
}

TEST_CASE("single step sampler matches the kernel row") {
    const int steps = 1000000;
    auto K = build_kernel(3, rat(2));
    partition start{2, 1};
    rng64 rng(replica_seed(2026, 0));
    std::map<partition, long> counts;
    for (int i = 0; i < steps; ++i) ++counts[sample_step(start, rat(2), rat(0), rng)];
    for (const auto& [j, p] : K.row(start)) {
        double expect = to_double(p);
        double sd = std::sqrt(expect * (1 - expect) * steps);
        double got = static_cast<double>(counts[K.idx.list[j]]);
        REQUIRE(std::abs(got - expect * steps) <= 4 * sd);
    }
}

TEST_CASE("stationary sampler") {
    rng64 rng(replica_seed(7, 3));
    REQUIRE(sample_ewens(1, rat(2), rng) == partition{1});
    const int reps = 1000000;
    auto pi = ewens(5, rat(1));
    std::map<partition, long> counts;
    for (int i = 0; i < reps; ++i) ++counts[sample_ewens(5, rat(1), rng)];
    for (size_t j = 0; j < pi.idx.size(); ++j) {
        double expect = to_double(pi.probs[j]);
        double sd = std::sqrt(expect * (1 - expect) * reps);
        REQUIRE(std::abs(counts[pi.idx.list[j]] - expect * reps) <= 4 * sd);
    }
    // mean part count is a sum of independent table-opening indicators
    double mean = 0, var = 0;
    for (int i = 1; i <= 20; ++i) {
        double p = 0.5 / (0.5 + i - 1);
        mean += p;
        var += p * (1 - p);
    }
    long total = 0;
    for (int i = 0; i < reps; ++i) total += length(sample_ewens(20, rat(2), rng));
    double got = static_cast<double>(total) / reps;
    REQUIRE(std::abs(got - mean) <= 4 * std::sqrt(var / reps));
}

TEST_CASE("seed splitting is deterministic") {
    REQUIRE(replica_seed(42, 0) != replica_seed(42, 1));
    REQUIRE(replica_seed(42, 1) == replica_seed(42, 1));
    rng64 a(replica_seed(42, 5)), b(replica_seed(42, 5));
    for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
}
