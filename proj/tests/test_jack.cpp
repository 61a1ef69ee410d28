#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <medchain/jack.hpp>

using namespace medchain;

TEST_CASE("degree two table") {
    for (const rat& th : {rat(1, 2), rat(1), rat(2), rat(7, 3)}) {
        auto t = jack_table(2, th);
        REQUIRE(t.coeff({2}, {2}) == th);
        REQUIRE(t.coeff({2}, {1, 1}) == 1);
        REQUIRE(t.coeff({1, 1}, {2}) == -1);
        REQUIRE(t.coeff({1, 1}, {1, 1}) == 1);
        REQUIRE(t.norm({2}) == 2 * th * th * (1 + th));
        REQUIRE(t.norm({1, 1}) == 2 * th * (1 + th));
    }
    REQUIRE_THROWS_AS(jack_table(2, rat(0)), std::invalid_argument);
    REQUIRE_THROWS_AS(jack_table(2, rat(-1)), std::invalid_argument);
}

TEST_CASE("table invariants") {
    for (int n = 1; n <= 8; ++n)
        for (const rat& th : {rat(1, 2), rat(1), rat(2), rat(3)}) {
            auto t = jack_table(n, th);
            partition ones(n, 1);
            for (const auto& lam : partitions_of(n)) {
                REQUIRE(t.coeff(lam, ones) == 1);
                rat orth = 0;
                for (const auto& [rho, c] : t.row(lam))
                    orth += c * c * rat(z_stat(rho)) * rat_pow(th, length(rho));
                REQUIRE(orth == t.norm(lam));
                REQUIRE(t.norm(lam) > 0);
                REQUIRE(t.norm(lam) == hook_pair_product(lam, th));
            }
        }
}

TEST_CASE("hook pair product") {
    for (const rat& th : {rat(1, 2), rat(1), rat(2)}) {
        REQUIRE(hook_pair_product({1}, th) == th);
        REQUIRE(hook_pair_product({2}, th) == 2 * th * th * (1 + th));
    }
    for (int n = 1; n <= 10; ++n)
        for (const auto& lam : partitions_of(n)) {
            bigint h = hook_product(lam);
            REQUIRE(hook_pair_product(lam, rat(1)) == rat(h * h));
        }
}

TEST_CASE("transposition coefficient closed form") {
    for (const rat& th : {rat(1, 2), rat(2)}) {
        REQUIRE(c_two_cycle({2}, th) == th);
        REQUIRE(c_two_cycle({1, 1}, th) == -1);
        REQUIRE(c_two_cycle({2, 1}, th) == th - 1);
    }
    for (int n = 2; n <= 8; ++n)
        for (const rat& th : {rat(1, 2), rat(2)}) {
            auto t = jack_table(n, th);
            partition two_cycle{2};
            for (int i = 2; i < n; ++i) two_cycle.push_back(1);
            for (const auto& lam : partitions_of(n))
                REQUIRE(t.coeff(lam, two_cycle) == c_two_cycle(lam, th));
        }
}

TEST_CASE("full cycle coefficient closed form") {
    for (int n = 2; n <= 8; ++n) {
        REQUIRE(c_n_cycle(partition{n}, rat(3)) == rat_pow(rat(3), n - 1) * rat(factorial(n - 1)));
        for (int s = 1; s <= n; ++s) {
            partition hook{s};
            for (int i = s; i < n; ++i) hook.push_back(1);
            rat v = c_n_cycle(hook, rat(1));
            rat expect = rat(factorial(s - 1) * factorial(n - s));
            REQUIRE((v == expect || v == -expect));
        }
        for (const rat& th : {rat(1, 2), rat(2)}) {
            auto t = jack_table(n, th);
            for (const auto& lam : partitions_of(n))
                REQUIRE(t.coeff(lam, {n}) == c_n_cycle(lam, th));
        }
    }
    REQUIRE(c_n_cycle({2, 2}, rat(1)) == 0);
}

TEST_CASE("normalized coefficients") {
    for (int n = 2; n <= 8; ++n)
        for (const rat& th : {rat(1, 2), rat(2)}) {
            auto t = jack_table(n, th);
            partition ones(n, 1);
            for (const auto& rho : partitions_of(n)) REQUIRE(d_coeff(t, {n}, rho) == 1);
            REQUIRE(d_coeff(t, {n - 1, 1}, ones) == n - 1);
        }
}

TEST_CASE("symmetric group characters") {
    // full S4 character table, classes in canonical order (4),(3,1),(2,2),(2,1,1),(1^4)
    const partition cls4[] = {{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}};
    const partition irr4[] = {{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}};
    const long table4[5][5] = {{1, 1, 1, 1, 1},
                               {-1, 0, -1, 1, 3},
                               {0, -1, 2, 0, 2},
                               {1, 0, -1, -1, 3},
                               {-1, 1, 1, -1, 1}};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) REQUIRE(character(irr4[i], cls4[j]) == table4[i][j]);
    // first-column values are dimensions
    for (int n = 1; n <= 8; ++n) {
        partition ones(n, 1);
        bigint nf = factorial(n);
        for (const auto& lam : partitions_of(n))
            REQUIRE(character(lam, ones) == nf / hook_product(lam));
    }
    // orthogonality of rows under the class measure
    for (int n = 2; n <= 8; ++n) {
        auto ps = partitions_of(n);
        for (const auto& lam : ps)
            for (const auto& mu : ps) {
                rat acc = 0;
                for (const auto& rho : ps)
                    acc += rat(character(lam, rho) * character(mu, rho)) / rat(z_stat(rho));
                REQUIRE(acc == (lam == mu ? 1 : 0));
            }
    }
}

TEST_CASE("normalized coefficients reduce to characters") {
    for (int n = 2; n <= 7; ++n) {
        auto t = jack_table(n, rat(1));
        for (const auto& lam : partitions_of(n))
            for (const auto& rho : partitions_of(n))
                REQUIRE(d_coeff(t, lam, rho) == rat(character(lam, rho)));
    }
}

TEST_CASE("conjugate duality") {
    for (int n = 2; n <= 8; ++n)
        for (const rat& th : {rat(1, 2), rat(2), rat(3)}) {
            auto t = jack_table(n, th);
            auto tr = jack_table(n, 1 / th);
            for (const auto& lam : partitions_of(n))
                for (const auto& mu : partitions_of(n))
                    REQUIRE(t.coeff(conjugate(lam), mu)
                            == rat_pow(-th, n - length(mu)) * tr.coeff(lam, mu));
        }
    for (int n = 1; n <= 10; ++n)
        for (const rat& th : {rat(1, 3), rat(2)})
            for (const auto& lam : partitions_of(n))
                REQUIRE(hook_pair_product(conjugate(lam), th)
                        == rat_pow(th, 2 * n) * hook_pair_product(lam, 1 / th));
}

TEST_CASE("principal specialization") {
    for (int n = 1; n <= 6; ++n)
        for (int N : {n, n + 3})
            for (const rat& th : {rat(1, 2), rat(2)}) {
                auto t = jack_table(n, th);
                for (const auto& lam : partitions_of(n)) {
                    rat via_sum = 0;
                    for (const auto& [rho, c] : t.row(lam))
                        via_sum += c * rat_pow(rat(N), length(rho));
                    REQUIRE(jack_at_ones(lam, N, th) == via_sum);
                }
            }
}

TEST_CASE("character monomial statistics") {
    for (int n = 6; n <= 7; ++n) {
        auto top = chi_to_m({n}, 0);
        REQUIRE(top == (std::map<partition, rat, desc_lex>{{{n}, rat(1)}}));
        auto std_rep = chi_to_m({n - 1, 1}, 1);
        REQUIRE(std_rep
                == (std::map<partition, rat, desc_lex>{{{n}, rat(-1)}, {{n - 1, 1}, rat(1)}}));
        auto two_ones = chi_to_m({n - 2, 1, 1}, 2);
        REQUIRE(two_ones
                == (std::map<partition, rat, desc_lex>{{{n}, rat(1)},
                                                       {{n - 1, 1}, rat(-3, 2)},
                                                       {{n - 2, 2}, rat(-1)},
                                                       {{n - 2, 1, 1}, rat(1, 2)}}));
        auto two = chi_to_m({n - 2, 2}, 2);
        REQUIRE(two
                == (std::map<partition, rat, desc_lex>{{{n - 1, 1}, rat(-3, 2)},
                                                       {{n - 2, 2}, rat(1)},
                                                       {{n - 2, 1, 1}, rat(1, 2)}}));
    }
    REQUIRE_THROWS_AS(chi_to_m({4, 3}, 4), std::invalid_argument);
    // independent evaluation over every class
    for (const auto& lam : {partition{5, 2}, partition{4, 3}}) {
        auto a = chi_to_m(lam, 3);
        for (const auto& rho : partitions_of(7)) {
            auto mult = multiplicities(rho);
            rat acc = 0;
            for (const auto& [mu, v] : a) {
                rat prod = v;
                for (size_t i = 1; i < mu.size(); ++i)
                    prod *= mu[i] < static_cast<int>(mult.size()) ? mult[mu[i]] : 0;
                acc += prod;
            }
            REQUIRE(acc == rat(character(lam, rho)));
        }
    }
}

TEST_CASE("norm split inequality") {
    for (const rat& th : {rat(1, 2), rat(1), rat(2)}) {
        double td = to_double(th);
        for (int n = 1; n <= 10; ++n)
            for (const auto& lam : partitions_of(n)) {
                double lhs = to_double(hook_pair_product(lam, th));
                partition rest(lam.begin() + 1, lam.end());
                double s = lam[0];
                double rhs = std::pow(std::tgamma(s + 1), 2.0) * std::pow(td, 2 * s - 1)
                             * std::pow(s, 1.0 / td - 1.0)
                             * std::exp(-M_PI * M_PI / (12.0 * td * td))
                             * to_double(hook_pair_product(rest, th));
                REQUIRE(lhs >= rhs - 1e-9);
            }
    }
}

TEST_CASE("full cycle coefficient bounds") {
    for (const rat& th : {rat(1, 2), rat(1), rat(2)}) {
        double td = to_double(th);
        double c1 = std::sqrt(td) + 1.0 / std::sqrt(td);
        double c2 = 1.0 + 1.0 / td;
        double c3 = td * std::exp(-M_PI * M_PI / (12.0 * td));
        double c3t = td * std::exp(-M_PI * M_PI * td / 12.0);
        for (int n = 2; n <= 10; ++n)
            for (const auto& lam : partitions_of(n)) {
                double ratio = to_double(c_n_cycle(lam, th) * c_n_cycle(lam, th)
                                         / hook_pair_product(lam, th));
                double s = lam[0];
                double bound = std::exp((c1 * std::sqrt(n - s) + c2) * std::log(n - s + 1))
                               / (c3 * std::pow(s, 1.0 + 1.0 / td));
                REQUIRE(ratio <= bound + 1e-9);
                double st = length(lam);
                if (st >= 2) {
                    double tbound = std::exp((c1 * std::sqrt(n - st) + c2) * std::log(n - st + 1))
                                    / (c3t * std::pow(st - 1.0, 1.0 + td));
                    REQUIRE(ratio <= tbound + 1e-9);
                }
            }
    }
}
