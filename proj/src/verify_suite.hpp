#pragma once

// exact invariant sweep behind the `verify` subcommand: re-runs the library
// identities at their full ranges, or at reduced ranges with --quick

#include <chrono>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <medchain/experiments.hpp>
#include <medchain/sdops.hpp>
#include <medchain/spectral.hpp>

namespace vsuite {

using namespace medchain;

struct ranges {
    int part_n;
    int conv_n;
    int jack_n;
    int spec_n;
    int eig_n;
    int eig_k;
    int char_n;
    int rows_n;
    int tri_n;
    int mom_hi;
};

inline ranges full_ranges() { return {25, 10, 9, 8, 8, 30, 9, 8, 8, 12}; }
inline ranges quick_ranges() { return {12, 6, 6, 6, 6, 15, 6, 6, 6, 6}; }

inline bool check_partitions(const ranges& R, std::string& note) {
    for (int n = 1; n <= R.part_n; ++n) {
        auto list = partitions_of(n);
        if (bigint(list.size()) != count_partitions(n)) {
            note = "count mismatch at n=" + std::to_string(n);
            return false;
        }
        if (list.front() != partition{n} || list.back() != partition(n, 1)) {
            note = "endpoint shapes wrong at n=" + std::to_string(n);
            return false;
        }
        for (std::size_t i = 0; i + 1 < list.size(); ++i)
            if (!(list[i] > list[i + 1])) {
                note = "enumeration not strictly descending at n=" + std::to_string(n);
                return false;
            }
        for (const auto& lam : list) {
            if (conjugate(conjugate(lam)) != lam || nt_stat(lam) != n_stat(conjugate(lam))) {
                note = "conjugation identities fail at " + partition_text(lam);
                return false;
            }
        }
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = i + 1; j < list.size(); ++j)
                if (dominance_leq(list[i], list[j])) {
                    note = "order does not refine dominance at n=" + std::to_string(n);
                    return false;
                }
    }
    return true;
}

inline bool check_conversions(const ranges& R, std::string& note) {
    for (int n = 1; n <= R.conv_n; ++n)
        for (const auto& mu : partitions_of(n)) {
            sym_expansion um = sym_unit(basis::monomial, n, mu);
            sym_expansion back = convert(
                convert(convert(convert(um, basis::power_sum), basis::elementary),
                        basis::complete),
                basis::monomial);
            if (back.coeffs != um.coeffs) {
                note = "basis round trip fails at " + partition_text(mu);
                return false;
            }
        }
    return true;
}

inline bool check_jack(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.jack_n; ++n) {
        partition ones(n, 1);
        partition two_cycle(n - 1, 1);
        two_cycle[0] = 2;
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(1), rat(2), rat(3)}) {
            auto t = jack_table(n, th);
            for (const auto& lam : partitions_of(n)) {
                rat parseval = 0;
                for (const auto& [rho, c] : t.row(lam))
                    parseval += c * c * rat(z_stat(rho)) * rat_pow(th, length(rho));
                rat princ = 0;
                for (const auto& [rho, c] : t.row(lam))
                    princ += c * rat_pow(rat(n + 2), length(rho));
                bool ok = t.coeff(lam, ones) == 1
                          && t.coeff(lam, two_cycle) == c_two_cycle(lam, th)
                          && t.coeff(lam, {n}) == c_n_cycle(lam, th)
                          && t.norm(lam) == hook_pair_product(lam, th)
                          && parseval == t.norm(lam)
                          && princ == jack_at_ones(lam, n + 2, th);
                if (!ok) {
                    note = "coefficient identities fail at " + partition_text(lam);
                    return false;
                }
            }
        }
        for (const rat& th : {rat(1, 2), rat(2), rat(3)}) {
            auto t = jack_table(n, th);
            auto tr = jack_table(n, 1 / th);
            for (const auto& lam : partitions_of(n))
                for (const auto& mu : partitions_of(n))
                    if (t.coeff(conjugate(lam), mu)
                        != rat_pow(-th, n - length(mu)) * tr.coeff(lam, mu)) {
                        note = "conjugate duality fails at " + partition_text(lam);
                        return false;
                    }
        }
    }
    return true;
}

inline bool check_spectrum(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.spec_n; ++n)
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(2), rat(3)})
            for (const rat& de : {rat(0), rat(1) / n}) {
                sparse_kernel K = build_kernel(n, th, de);
                std::size_t d = K.idx.size();
                std::vector<std::vector<rat>> P(d, std::vector<rat>(d, rat(0)));
                for (std::size_t i = 0; i < d; ++i)
                    for (const auto& [j, p] : K.rows[i]) P[i][j] = p;
                std::vector<rat> bpow(d, rat(1));
                std::vector<rat> beta(d);
                for (std::size_t i = 0; i < d; ++i) beta[i] = eigenvalue(K.idx.list[i], th, de);
                auto M = P;
                for (std::size_t k = 1; k <= d; ++k) {
                    rat trace = 0;
                    for (std::size_t i = 0; i < d; ++i) trace += M[i][i];
                    rat powsum = 0;
                    for (std::size_t i = 0; i < d; ++i) {
                        bpow[i] *= beta[i];
                        powsum += bpow[i];
                    }
                    if (trace != powsum) {
                        note = "trace identity fails at n=" + std::to_string(n)
                               + " k=" + std::to_string(k);
                        return false;
                    }
                    if (k == d) break;
                    std::vector<std::vector<rat>> next(d, std::vector<rat>(d, rat(0)));
                    for (std::size_t i = 0; i < d; ++i)
                        for (std::size_t l = 0; l < d; ++l) {
                            if (M[i][l] == 0) continue;
                            for (const auto& [j, p] : K.rows[l]) next[i][j] += M[i][l] * p;
                        }
                    M = std::move(next);
                }
            }
    return true;
}

inline bool check_eigenfunctions(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.eig_n; ++n)
        for (const rat& th : {rat(1, 2), rat(2)})
            for (const rat& de : {rat(0), rat(1) / n}) {
                sparse_kernel K = build_kernel(n, th, de);
                eigen_system sys(n, th, de);
                if (!left_eigen_check(sys, K)) {
                    note = "left eigenvector relation fails at n=" + std::to_string(n);
                    return false;
                }
                if (!completeness_check(sys)) {
                    note = "completeness sums fail at n=" + std::to_string(n);
                    return false;
                }
                scaled_kernel S = to_scaled(K);
                for (const auto& start : K.idx.list) {
                    scaled_vector v = scaled_point_mass(K.idx.size(), K.idx.at(start));
                    for (int k = 1; k <= R.eig_k; ++k) {
                        scaled_step(S, v);
                        rat tv = tv_distance(to_rats(v), sys.pi);
                        rat l2 = l2_distance(sys, start, k);
                        l2_groups g = l2_bound_by_lambda1(sys, start, k);
                        if (4 * tv * tv > l2 || g.total != l2) {
                            note = "distance sandwich fails from " + partition_text(start)
                                   + " at k=" + std::to_string(k);
                            return false;
                        }
                    }
                }
            }
    return true;
}

inline bool check_characters(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.char_n; ++n) {
        auto t = jack_table(n, rat(1));
        for (const auto& lam : partitions_of(n))
            for (const auto& rho : partitions_of(n))
                if (d_coeff(t, lam, rho) != rat(character(lam, rho))) {
                    note = "normalized coefficient is not the character at "
                           + partition_text(lam) + ", " + partition_text(rho);
                    return false;
                }
    }
    return true;
}

inline bool check_operator_rows(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.rows_n; ++n)
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(2), rat(7, 3)}) {
            sparse_kernel K = build_kernel(n, th);
            for (const auto& [lam, row] : lb2_markov_rows(n, th, n)) {
                rat total = 0;
                for (const auto& [mu, v] : row.coeffs) total += v;
                if (total != 1) {
                    note = "row sum differs from 1 at " + partition_text(lam);
                    return false;
                }
                std::map<int, rat> norm_row;
                if (th >= 1) {
                    for (const auto& [mu, v] : row.coeffs) norm_row[K.idx.at(mu)] = v;
                } else {
                    for (const auto& [mu, v] : row.coeffs)
                        if (th * v != 0) norm_row[K.idx.at(mu)] = th * v;
                    auto [it, fresh] = norm_row.try_emplace(K.idx.at(lam), 1 - th);
                    if (!fresh) it->second += 1 - th;
                    if (it->second == 0) norm_row.erase(it);
                }
                if (norm_row != K.row(lam)) {
                    note = "normalized row differs from the kernel at " + partition_text(lam);
                    return false;
                }
            }
        }
    return true;
}

inline bool check_triangularity(const ranges& R, std::string& note) {
    for (int n = 2; n <= R.tri_n; ++n) {
        partition_index idx(n);
        rat pairs = rat(binom(n, 2));
        for (const rat& th : {rat(1, 2), rat(1), rat(2)}) {
            for (const auto& mu : idx.list) {
                sym_expansion f = convert(sym_unit(basis::monomial, n, mu), basis::power_sum);
                sym_expansion img = convert(apply({op_kind::lb2, th, n}, f), basis::monomial);
                for (const auto& [kap, c] : img.coeffs)
                    if (idx.at(kap) < idx.at(mu)) {
                        note = "monomial image escapes the triangle at " + partition_text(mu);
                        return false;
                    }
                if (img.coeff(mu) != (rat(nt_stat(mu)) - rat(n_stat(mu)) / th) / pairs) {
                    note = "diagonal entry is not the eigenvalue at " + partition_text(mu);
                    return false;
                }
            }
        }
    }
    return true;
}

inline bool check_operator_fixtures(const ranges&, std::string& note) {
    sym_expansion f = sym_unit(basis::power_sum, 5, {3, 1, 1});
    for (const rat& th : {rat(1, 2), rat(1), rat(2), rat(3)}) {
        coeff_map order2;
        order2[{2, 1, 1, 1}] = -3 * th;
        order2[{3, 1, 1}] = 7 * th * th + 33 * th + 35;
        order2[{4, 1}] = -6 * th * th;
        order2[{3, 2}] = -th * th;
        sym_expansion img2 = apply({op_kind::dtheta2, th, 5}, f);
        coeff_map order3;
        order3[{5}] = 6 * th * th * th;
        order3[{4, 1}] = -6 * th * th * th - 30 * th * th;
        order3[{3, 2}] = -3 * th * th * th - 3 * th * th;
        order3[{3, 1, 1}] = 3 * th * th * th + 33 * th * th + 66 * th + 50;
        order3[{2, 2, 1}] = 6 * th * th;
        order3[{2, 1, 1, 1}] = -6 * th * th - 12 * th;
        order3[{1, 1, 1, 1, 1}] = th;
        if (img2.coeffs != order2
            || apply({op_kind::dtheta3, th, 5}, f).coeffs != order3) {
            note = "five-variable worked example fails at theta " + rat_str(th);
            return false;
        }
        sym_expansion twice = apply({op_kind::dtheta2, th, 5}, img2);
        if (twice.coeff({1, 1, 1, 1, 1}) != 3 * th * th
            || twice.coeff({2, 2, 1}) != 24 * th * th * th
            || twice.coeff({5}) != 30 * th * th * th * th) {
            note = "composed order-2 fixture fails at theta " + rat_str(th);
            return false;
        }
    }

    sym_expansion h321 = convert(sym_unit(basis::complete, 6, {3, 2, 1}), basis::power_sum);
    coeff_map u_disp;
    u_disp[{2, 1, 1, 1, 1}] = 2;
    u_disp[{2, 2, 1, 1}] = -8;
    u_disp[{3, 1, 1, 1}] = -2;
    u_disp[{3, 2, 1}] = 14;
    u_disp[{3, 3}] = 6;
    u_disp[{4, 1, 1}] = 6;
    u_disp[{4, 2}] = 8;
    u_disp[{5, 1}] = 10;
    if (convert(apply({op_kind::d002, rat(1), 6}, h321), basis::complete).coeffs != u_disp) {
        note = "square-term action on the complete basis fails";
        return false;
    }
    coeff_map v_disp;
    v_disp[{2, 1, 1, 1, 1}] = -1;
    v_disp[{2, 2, 1, 1}] = 4;
    v_disp[{3, 1, 1, 1}] = 1;
    v_disp[{3, 2, 1}] = 32;
    if (convert(apply({op_kind::d110, rat(1), 7}, h321), basis::complete).coeffs != v_disp) {
        note = "transport action on the complete basis fails";
        return false;
    }
    for (int r = 1; r <= 6; ++r) {
        sym_expansion er = convert(sym_unit(basis::elementary, r, {r}), basis::power_sum);
        sym_expansion img = apply({op_kind::d110, rat(1), 7}, er);
        if (img.coeffs != sym_scale(er, rat(6) * r - rat(binom(r, 2))).coeffs) {
            note = "transport scalar on e_r fails at r=" + std::to_string(r);
            return false;
        }
    }

    for (int n = 3; n <= 5; ++n)
        for (const rat& th : {rat(1, 2), rat(2), rat(3)}) {
            auto sigma = composition_stationary(th, th, n);
            ewens_dist dist = ewens(n, th);
            for (const auto& lam : partitions_of(n))
                if (sigma.at(lam) != dist.prob(lam)) {
                    note = "equal-parameter composition misses the stationary law";
                    return false;
                }
        }
    auto sigma23 = composition_stationary(rat(2), rat(3), 3);
    if (sigma23.at({3}) != rat(41, 65) || sigma23.at({2, 1}) != rat(21, 65)
        || sigma23.at({1, 1, 1}) != rat(3, 65)) {
        note = "composed stationary fixture at (2, 3) fails";
        return false;
    }
    return true;
}

inline bool check_moments(const ranges& R, std::string& note) {
    for (int n = 5; n <= R.mom_hi; ++n)
        for (const rat& th : {rat(1, 3), rat(1, 2), rat(2), rat(3)}) {
            moment_coeffs mc = second_moment_coeffs(n, th);
            moment_coeffs ref = second_moment_closed(n, th);
            if (mc.v != ref.v || mc.w != ref.w || mc.x != ref.x) {
                note = "solved coefficients differ from the reference forms at n="
                       + std::to_string(n);
                return false;
            }
            if (mc.u != stationary_d_second_moment(n, th)) {
                note = "constant term differs from the stationary second moment at n="
                       + std::to_string(n);
                return false;
            }
            d_poly p1 = d_poly_row(n, th);
            d_poly p2 = d_poly_hook(n, th);
            d_poly p3 = d_poly_two_row(n, th);
            for (const auto& rho : partitions_of(n)) {
                rat d1 = p1.at(rho);
                if (d1 * d1 != mc.u + mc.v * d1 + mc.w * p2.at(rho) + mc.x * p3.at(rho)) {
                    note = "decomposition identity fails at " + partition_text(rho);
                    return false;
                }
            }
        }
    return true;
}

inline int run_verify(bool quick) {
    ranges R = quick ? quick_ranges() : full_ranges();
    std::vector<std::pair<std::string, bool (*)(const ranges&, std::string&)>> checks = {
        {"partition-enumeration", check_partitions},
        {"basis-conversions", check_conversions},
        {"deformed-coefficient-identities", check_jack},
        {"spectrum-traces", check_spectrum},
        {"eigenfunctions-and-distances", check_eigenfunctions},
        {"character-bridge", check_characters},
        {"operator-rows", check_operator_rows},
        {"monomial-triangularity", check_triangularity},
        {"operator-fixtures", check_operator_fixtures},
        {"second-moment-system", check_moments},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        auto t0 = std::chrono::steady_clock::now();
        std::string note;
        bool ok = fn(R, note);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char line[160];
        std::snprintf(line, sizeof line, "%-34s %s (%.1fs)", name.c_str(),
                      ok ? "ok" : "FAIL", secs);
        std::cerr << line;
        if (!ok) {
            std::cerr << "  " << note;
            ++failed;
        }
        std::cerr << "\n";
    }
    std::cerr << "verify: " << checks.size() - failed << "/" << checks.size()
              << " checks passed" << (quick ? " (quick ranges)" : "") << "\n";
    return failed == 0 ? 0 : 1;
}

} // namespace vsuite
