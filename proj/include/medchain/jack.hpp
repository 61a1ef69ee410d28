#pragma once

#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <vector>

#include "partition.hpp"
#include "symfunc.hpp"

namespace medchain {

// power-sum coefficients c[lam][rho] of the deformed orthogonal basis, with the
// normalization c[lam][(1^n)] = 1, plus the squared norms j[lam]
struct jack_table_t {
    int n = 0;
    rat theta;
    std::map<partition, coeff_map, desc_lex> c;
    std::map<partition, rat, desc_lex> j;

    const coeff_map& row(const partition& lam) const {
        auto it = c.find(lam);
        if (it == c.end()) throw std::invalid_argument("jack row: " + partition_text(lam));
        return it->second;
    }
    rat coeff(const partition& lam, const partition& rho) const {
        const auto& r = row(lam);
        auto it = r.find(rho);
        return it == r.end() ? rat(0) : it->second;
    }
    rat norm(const partition& lam) const {
        auto it = j.find(lam);
        if (it == j.end()) throw std::invalid_argument("jack norm: " + partition_text(lam));
        return it->second;
    }
};

namespace detail {
inline rat p_pair_inner(const coeff_map& f, const coeff_map& g,
                        const std::map<partition, rat, desc_lex>& zth) {
    rat acc = 0;
    for (const auto& [rho, v] : f) {
        auto it = g.find(rho);
        if (it == g.end()) continue;
        acc += v * it->second * zth.at(rho);
    }
    return acc;
}
} // namespace detail

// Gram-Schmidt over <p_rho, p_rho> = z_rho theta^len, processed in reverse
// canonical order (a linear extension of dominance, smallest shape first),
// then rescaled so the (1^n) power-sum coefficient is 1
inline jack_table_t jack_table(int n, const rat& theta) {
    if (n < 1) throw std::invalid_argument("jack_table: n must be positive");
    if (theta <= 0) throw std::invalid_argument("jack_table: theta must be positive");
    jack_table_t out;
    out.n = n;
    out.theta = theta;

    auto plist = partitions_of(n);
    std::map<partition, rat, desc_lex> zth;
    for (const auto& rho : plist)
        zth.emplace(rho, rat(z_stat(rho)) * rat_pow(theta, length(rho)));

    std::vector<partition> order(plist.rbegin(), plist.rend());
    std::vector<coeff_map> basis_vecs;
    std::vector<rat> norms;
    for (const auto& lam : order) {
        sym_expansion m_lam = sym_unit(basis::monomial, n, lam);
        coeff_map v = to_power_sum(m_lam).coeffs;
        for (size_t k = 0; k < basis_vecs.size(); ++k) {
            rat proj = detail::p_pair_inner(v, basis_vecs[k], zth) / norms[k];
            if (proj == 0) continue;
            for (const auto& [rho, w] : basis_vecs[k]) {
                auto [pos, fresh] = v.try_emplace(rho, -proj * w);
                if (!fresh) {
                    pos->second -= proj * w;
                    if (pos->second == 0) v.erase(pos);
                }
            }
        }
        rat nv = detail::p_pair_inner(v, v, zth);
        if (nv == 0) throw std::logic_error("degenerate inner product in Gram-Schmidt");
        basis_vecs.push_back(v);
        norms.push_back(nv);
    }

    partition ones(n, 1);
    for (size_t k = 0; k < order.size(); ++k) {
        auto it = basis_vecs[k].find(ones);
        if (it == basis_vecs[k].end() || it->second == 0)
            throw std::logic_error("vanishing (1^n) coefficient in Gram-Schmidt");
        rat scale = 1 / it->second;
        coeff_map row;
        for (const auto& [rho, w] : basis_vecs[k]) row.emplace(rho, w * scale);
        out.c.emplace(order[k], std::move(row));
        out.j.emplace(order[k], norms[k] * scale * scale);
    }
    return out;
}

// theta n(lam^t) - n(lam)
inline rat c_two_cycle(const partition& lam, const rat& theta) {
    if (weight(lam) < 2) throw std::invalid_argument("c_two_cycle: need n >= 2");
    return theta * nt_stat(lam) - n_stat(lam);
}

// prod over cells except (1,1) of [theta (j-1) - (i-1)]
inline rat c_n_cycle(const partition& lam, const rat& theta) {
    rat acc = 1;
    for (const auto& cell : hooks(lam)) {
        if (cell.row == 1 && cell.col == 1) continue;
        acc *= theta * (cell.col - 1) - (cell.row - 1);
    }
    return acc;
}

// d_{lam,rho} = c_{lam,rho} z_rho theta^{-(n-len(rho))} / H_lam
inline rat d_coeff(const jack_table_t& table, const partition& lam, const partition& rho) {
    rat c = table.coeff(lam, rho);
    return c * rat(z_stat(rho)) * rat_pow(table.theta, length(rho) - table.n)
           / rat(hook_product(lam));
}

// principal specialization: prod over cells of (N - (i-1) + theta (j-1))
inline rat jack_at_ones(const partition& lam, int N, const rat& theta) {
    rat acc = 1;
    for (const auto& cell : hooks(lam))
        acc *= rat(N) - (cell.row - 1) + theta * (cell.col - 1);
    return acc;
}

namespace detail {

// abacus form of the border-strip recursion: beta numbers b_i = lam_i + L - i,
// removing a strip of size r moves one bead down r positions; the sign is the
// parity of occupied positions jumped over
inline bigint mn_dispatch(const std::vector<int>& beta, const std::multiset<int>& rho,
                          std::map<std::pair<std::vector<int>, std::vector<int>>, bigint>& memo) {
    if (rho.empty()) return 1;
    std::vector<int> key_rho(rho.begin(), rho.end());
    auto key = std::make_pair(beta, key_rho);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bigint acc = 0;
    int r = *rho.rbegin();
    std::multiset<int> rest = rho;
    rest.erase(std::prev(rest.end()));
    std::set<int> occupied(beta.begin(), beta.end());
    for (int b : beta) {
        int target = b - r;
        if (target < 0 || occupied.count(target)) continue;
        int crossed = static_cast<int>(std::count_if(
            beta.begin(), beta.end(), [&](int x) { return target < x && x < b; }));
        std::vector<int> nb = beta;
        std::replace(nb.begin(), nb.end(), b, target);
        std::sort(nb.begin(), nb.end(), std::greater<int>());
        // drop a trailing run 0,1,..,k-1 only as a no-op; normalization happens on read
        bigint sub = mn_dispatch(nb, rest, memo);
        acc += (crossed % 2) ? -sub : sub;
    }
    memo.emplace(std::move(key), acc);
    return acc;
}

} // namespace detail

// irreducible symmetric group character chi_lambda(rho), Murnaghan-Nakayama
inline bigint character(const partition& lam, const partition& rho) {
    if (weight(lam) != weight(rho))
        throw std::invalid_argument("character: weight mismatch");
    int L = length(lam);
    std::vector<int> beta(L);
    for (int i = 0; i < L; ++i) beta[i] = lam[i] + (L - 1 - i);
    std::multiset<int> parts(rho.begin(), rho.end());
    static std::map<std::pair<std::vector<int>, std::vector<int>>, bigint> memo;
    static std::mutex memo_mu;
    std::lock_guard<std::mutex> lock(memo_mu);
    return detail::mn_dispatch(beta, parts, memo);
}

// coefficients a_mu with chi_lam(rho) = sum_mu a_mu prod_{parts of mu beyond the
// first} m_part(rho), over mu |- n with mu_1 >= n - k; exact solve over all classes
inline std::map<partition, rat, desc_lex> chi_to_m(const partition& lam, int k) {
    int n = weight(lam);
    if (k > n / 2) throw std::invalid_argument("chi_to_m: k must be at most n/2");
    if (length(lam) ? lam[0] < n - k : n > 0)
        throw std::invalid_argument("chi_to_m: first part below n - k");
    std::vector<partition> mus;
    for (const auto& mu : partitions_of(n))
        if (mu[0] >= n - k) mus.push_back(mu);
    auto classes = partitions_of(n);
    size_t rows = classes.size(), cols = mus.size();
    std::vector<std::vector<rat>> A(rows, std::vector<rat>(cols + 1, rat(0)));
    for (size_t r = 0; r < rows; ++r) {
        auto mult = multiplicities(classes[r]);
        for (size_t ccol = 0; ccol < cols; ++ccol) {
            rat prod = 1;
            for (size_t i = 1; i < mus[ccol].size(); ++i) {
                int part = mus[ccol][i];
                int have = part < static_cast<int>(mult.size()) ? mult[part] : 0;
                prod *= have;
            }
            A[r][ccol] = prod;
        }
        A[r][cols] = rat(character(lam, classes[r]));
    }
    // exact elimination; the system is overdetermined and must be consistent
    size_t lead = 0;
    std::vector<int> pivot_col(cols, -1);
    for (size_t ccol = 0; ccol < cols && lead < rows; ++ccol) {
        size_t piv = lead;
        while (piv < rows && A[piv][ccol] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[piv], A[lead]);
        rat lv = A[lead][ccol];
        for (size_t j = 0; j <= cols; ++j) A[lead][j] /= lv;
        for (size_t r = 0; r < rows; ++r) {
            if (r == lead || A[r][ccol] == 0) continue;
            rat f = A[r][ccol];
            for (size_t j = 0; j <= cols; ++j) A[r][j] -= f * A[lead][j];
        }
        pivot_col[ccol] = static_cast<int>(lead);
        ++lead;
    }
    for (size_t r = lead; r < rows; ++r)
        if (A[r][cols] != 0) throw std::logic_error("chi_to_m: inconsistent system");
    std::map<partition, rat, desc_lex> out;
    for (size_t ccol = 0; ccol < cols; ++ccol) {
        if (pivot_col[ccol] < 0) throw std::logic_error("chi_to_m: underdetermined system");
        rat v = A[pivot_col[ccol]][cols];
        if (v != 0) out.emplace(mus[ccol], v);
    }
    return out;
}

} // namespace medchain
