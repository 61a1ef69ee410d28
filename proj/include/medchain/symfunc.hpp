#pragma once

#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "partition.hpp"

namespace medchain {

enum class basis { monomial, power_sum, elementary, complete };

inline std::string basis_tag(basis b) {
    switch (b) {
        case basis::monomial: return "m";
        case basis::power_sum: return "p";
        case basis::elementary: return "e";
        case basis::complete: return "h";
    }
    throw std::logic_error("bad basis");
}

inline basis parse_basis(const std::string& s) {
    if (s == "m") return basis::monomial;
    if (s == "p") return basis::power_sum;
    if (s == "e") return basis::elementary;
    if (s == "h") return basis::complete;
    throw std::invalid_argument("bad basis tag: " + s);
}

// iteration follows the canonical (descending lexicographic) partition order
struct desc_lex {
    bool operator()(const partition& a, const partition& b) const { return a > b; }
};

using coeff_map = std::map<partition, rat, desc_lex>;

inline constexpr int exact_degree_cap = 40;

// homogeneous symmetric function: sparse coefficients over partitions of one degree
struct sym_expansion {
    basis b = basis::power_sum;
    int degree = 0;
    coeff_map coeffs;

    void add(const partition& key, const rat& value) {
        if (value == 0) return;
        auto [it, fresh] = coeffs.try_emplace(key, value);
        if (!fresh) {
            it->second += value;
            if (it->second == 0) coeffs.erase(it);
        }
    }
    rat coeff(const partition& key) const {
        auto it = coeffs.find(key);
        return it == coeffs.end() ? rat(0) : it->second;
    }
    bool zero() const { return coeffs.empty(); }
};

inline sym_expansion sym_unit(basis b, int degree, const partition& key, const rat& value = 1) {
    if (weight(key) != degree) throw std::invalid_argument("key weight mismatch");
    sym_expansion f{b, degree, {}};
    f.add(key, value);
    return f;
}

inline sym_expansion sym_scale(const sym_expansion& f, const rat& s) {
    sym_expansion out{f.b, f.degree, {}};
    if (s == 0) return out;
    for (const auto& [k, v] : f.coeffs) out.coeffs.emplace(k, v * s);
    return out;
}

inline sym_expansion sym_add(const sym_expansion& f, const sym_expansion& g) {
    if (f.b != g.b || f.degree != g.degree)
        throw std::invalid_argument("sym_add: basis or degree mismatch");
    sym_expansion out = f;
    for (const auto& [k, v] : g.coeffs) out.add(k, v);
    return out;
}

inline bool is_multiplicative(basis b) { return b != basis::monomial; }

namespace detail {

// p_r * m_lam: add r to one part value a (or start a new part, a = 0);
// the resulting m_mu picks up coefficient m_{a+r}(mu)
inline void mul_power_into_monomial(int r, const partition& lam, const rat& cv, coeff_map& out) {
    std::vector<int> cands{0};
    for (size_t i = 0; i < lam.size(); ++i)
        if (i == 0 || lam[i] != lam[i - 1]) cands.push_back(lam[i]);
    for (int a : cands) {
        partition mu = lam;
        if (a == 0) {
            mu.push_back(r);
        } else {
            auto it = std::find(mu.begin(), mu.end(), a);
            *it = a + r;
        }
        std::sort(mu.begin(), mu.end(), std::greater<int>());
        int mult = static_cast<int>(std::count(mu.begin(), mu.end(), a + r));
        rat add = cv * mult;
        auto [pos, fresh] = out.try_emplace(mu, add);
        if (!fresh) {
            pos->second += add;
            if (pos->second == 0) out.erase(pos);
        }
    }
}

struct conversion_cache {
    std::mutex mu;
    // per degree: expansion of p_rho in the m basis, keyed by rho
    std::map<int, std::map<partition, coeff_map, desc_lex>> p_in_m;
    // per degree: expansion of m_lam in the p basis (solved from the above)
    std::map<int, std::map<partition, coeff_map, desc_lex>> m_in_p;
    // one-part expansions by k: e_k and h_k in the p basis, p_k in the e / h basis
    std::vector<coeff_map> e_in_p{{}}, h_in_p{{}}, p_in_e{{}}, p_in_h{{}};
};

inline conversion_cache& conv_cache() {
    static conversion_cache c;
    return c;
}

inline coeff_map mult_basis_product(const coeff_map& f, const coeff_map& g) {
    coeff_map out;
    for (const auto& [kf, vf] : f)
        for (const auto& [kg, vg] : g) {
            partition k = kf;
            k.insert(k.end(), kg.begin(), kg.end());
            std::sort(k.begin(), k.end(), std::greater<int>());
            rat add = vf * vg;
            auto [pos, fresh] = out.try_emplace(k, add);
            if (!fresh) {
                pos->second += add;
                if (pos->second == 0) out.erase(pos);
            }
        }
    return out;
}

// Newton recurrences: k e_k = sum_{i=1..k} (-1)^{i-1} p_i e_{k-i}, k h_k = sum p_i h_{k-i};
// the same identities solved for p_k give the reverse direction
inline void extend_one_part_tables(int k_needed) {
    auto& c = conv_cache();
    if (c.e_in_p[0].empty()) {
        // degree-0 units: e_0 = h_0 = 1
        c.e_in_p[0].emplace(partition{}, rat(1));
        c.h_in_p[0].emplace(partition{}, rat(1));
    }
    for (int k = static_cast<int>(c.e_in_p.size()); k <= k_needed; ++k) {
        coeff_map ek, hk;
        for (int i = 1; i <= k; ++i) {
            rat sign = (i % 2) ? rat(1) : rat(-1);
            coeff_map pe = mult_basis_product({{partition{i}, rat(1)}}, c.e_in_p[k - i]);
            coeff_map ph = mult_basis_product({{partition{i}, rat(1)}}, c.h_in_p[k - i]);
            for (const auto& [kk, v] : pe) {
                auto [pos, fresh] = ek.try_emplace(kk, sign * v);
                if (!fresh) pos->second += sign * v;
            }
            for (const auto& [kk, v] : ph) {
                auto [pos, fresh] = hk.try_emplace(kk, v);
                if (!fresh) pos->second += v;
            }
        }
        for (auto& [kk, v] : ek) v /= k;
        for (auto& [kk, v] : hk) v /= k;
        c.e_in_p.push_back(ek);
        c.h_in_p.push_back(hk);

        // p_k = (-1)^{k-1} [k e_k - sum_{i<k} (-1)^{i-1} p_i e_{k-i}] and the h analogue
        coeff_map pk_e;
        {
            coeff_map acc;
            acc.try_emplace(partition{k}, rat(k));  // k e_k as e-expansion key (k)
            for (int i = 1; i < k; ++i) {
                rat sign = (i % 2) ? rat(1) : rat(-1);
                // p_i (in e) times e_{k-i} (basis element)
                for (const auto& [kk, v] : c.p_in_e[i]) {
                    partition key = kk;
                    key.push_back(k - i);
                    std::sort(key.begin(), key.end(), std::greater<int>());
                    auto [pos, fresh] = acc.try_emplace(key, -sign * v);
                    if (!fresh) pos->second += -sign * v;
                }
            }
            rat lead = (k % 2) ? rat(1) : rat(-1);
            for (auto& [kk, v] : acc) {
                v *= lead;
                if (v != 0) pk_e.emplace(kk, v);
            }
        }
        coeff_map pk_h;
        {
            coeff_map acc;
            acc.try_emplace(partition{k}, rat(k));
            for (int i = 1; i < k; ++i) {
                for (const auto& [kk, v] : c.p_in_h[i]) {
                    partition key = kk;
                    key.push_back(k - i);
                    std::sort(key.begin(), key.end(), std::greater<int>());
                    auto [pos, fresh] = acc.try_emplace(key, -v);
                    if (!fresh) pos->second += -v;
                }
            }
            for (auto& [kk, v] : acc)
                if (v != 0) pk_h.emplace(kk, v);
        }
        c.p_in_e.push_back(pk_e);
        c.p_in_h.push_back(pk_h);
    }
}

inline const std::map<partition, coeff_map, desc_lex>& p_in_m_table(int n) {
    auto& c = conv_cache();
    auto it = c.p_in_m.find(n);
    if (it != c.p_in_m.end()) return it->second;
    std::map<partition, coeff_map, desc_lex> table;
    for (const auto& rho : partitions_of(n)) {
        coeff_map acc{{partition{}, rat(1)}};
        // build p_rho = prod p_{rho_i} directly in the m basis
        for (int r : rho) {
            coeff_map next;
            for (const auto& [lam, v] : acc) mul_power_into_monomial(r, lam, v, next);
            acc = std::move(next);
        }
        table.emplace(rho, std::move(acc));
    }
    return c.p_in_m.emplace(n, std::move(table)).first->second;
}

// m_lam in the p basis by solving the triangular-free dense system over the degree
inline const std::map<partition, coeff_map, desc_lex>& m_in_p_table(int n) {
    auto& c = conv_cache();
    auto it = c.m_in_p.find(n);
    if (it != c.m_in_p.end()) return it->second;
    auto plist = partitions_of(n);
    size_t d = plist.size();
    const auto& fwd = p_in_m_table(n);
    // dense matrix A[i][j] = coefficient of m_{plist[j]} in p_{plist[i]}
    std::vector<std::vector<rat>> A(d, std::vector<rat>(d, rat(0)));
    partition_index idx(n);
    for (size_t i = 0; i < d; ++i)
        for (const auto& [lam, v] : fwd.at(plist[i])) A[i][idx.at(lam)] = v;
    // invert by Gauss-Jordan; X A = I gives rows expressing m in p
    std::vector<std::vector<rat>> inv(d, std::vector<rat>(d, rat(0)));
    for (size_t i = 0; i < d; ++i) inv[i][i] = 1;
    for (size_t col = 0; col < d; ++col) {
        size_t piv = col;
        while (piv < d && A[piv][col] == 0) ++piv;
        if (piv == d) throw std::logic_error("p to m transition singular");
        std::swap(A[piv], A[col]);
        std::swap(inv[piv], inv[col]);
        rat lead = A[col][col];
        for (size_t j = 0; j < d; ++j) {
            A[col][j] /= lead;
            inv[col][j] /= lead;
        }
        for (size_t r = 0; r < d; ++r) {
            if (r == col || A[r][col] == 0) continue;
            rat f = A[r][col];
            for (size_t j = 0; j < d; ++j) {
                A[r][j] -= f * A[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    // p = A m entrywise, so m_j = sum_i inv[j][i] p_i with inv = A^{-1}
    std::map<partition, coeff_map, desc_lex> table;
    for (size_t j = 0; j < d; ++j) {
        coeff_map row;
        for (size_t i = 0; i < d; ++i)
            if (inv[j][i] != 0) row.emplace(plist[i], inv[j][i]);
        table.emplace(plist[j], std::move(row));
    }
    return c.m_in_p.emplace(n, std::move(table)).first->second;
}

} // namespace detail

// expansion of f in the power-sum basis
inline sym_expansion to_power_sum(const sym_expansion& f) {
    if (f.b == basis::power_sum) return f;
    std::lock_guard<std::mutex> lock(detail::conv_cache().mu);
    sym_expansion out{basis::power_sum, f.degree, {}};
    if (f.b == basis::monomial) {
        const auto& table = detail::m_in_p_table(f.degree);
        for (const auto& [lam, v] : f.coeffs)
            for (const auto& [rho, w] : table.at(lam)) out.add(rho, v * w);
        return out;
    }
    // elementary / complete: products of one-part expansions
    detail::extend_one_part_tables(f.degree);
    auto& c = detail::conv_cache();
    const auto& one = (f.b == basis::elementary) ? c.e_in_p : c.h_in_p;
    for (const auto& [lam, v] : f.coeffs) {
        coeff_map acc{{partition{}, v}};
        for (int part : lam) acc = detail::mult_basis_product(acc, one[part]);
        for (const auto& [rho, w] : acc) out.add(rho, w);
    }
    return out;
}

inline sym_expansion convert(const sym_expansion& f, basis target) {
    if (f.b == target) return f;
    if (f.degree > exact_degree_cap) throw std::invalid_argument("degree exceeds exact cap");
    sym_expansion p = to_power_sum(f);
    if (target == basis::power_sum) return p;
    std::lock_guard<std::mutex> lock(detail::conv_cache().mu);
    sym_expansion out{target, f.degree, {}};
    if (target == basis::monomial) {
        const auto& table = detail::p_in_m_table(f.degree);
        for (const auto& [rho, v] : p.coeffs)
            for (const auto& [lam, w] : table.at(rho)) out.add(lam, v * w);
        return out;
    }
    detail::extend_one_part_tables(f.degree);
    auto& c = detail::conv_cache();
    const auto& one = (target == basis::elementary) ? c.p_in_e : c.p_in_h;
    for (const auto& [rho, v] : p.coeffs) {
        coeff_map acc{{partition{}, v}};
        for (int part : rho) acc = detail::mult_basis_product(acc, one[part]);
        for (const auto& [lam, w] : acc) out.add(lam, w);
    }
    return out;
}

inline sym_expansion multiply(const sym_expansion& f, const sym_expansion& g) {
    if (f.degree + g.degree > exact_degree_cap)
        throw std::invalid_argument("product degree exceeds exact cap");
    if (f.b == basis::monomial || g.b == basis::monomial) {
        // no direct monomial product; route through the power-sum basis
        sym_expansion pf = to_power_sum(f), pg = to_power_sum(g);
        sym_expansion prod{basis::power_sum, f.degree + g.degree,
                           detail::mult_basis_product(pf.coeffs, pg.coeffs)};
        return convert(prod, basis::monomial);
    }
    if (f.b != g.b) throw std::invalid_argument("multiply: mixed bases");
    return {f.b, f.degree + g.degree, detail::mult_basis_product(f.coeffs, g.coeffs)};
}

// <p_lam, p_mu>_theta = delta z_lam theta^{len(lam)}, extended bilinearly
inline rat theta_inner(const sym_expansion& f, const sym_expansion& g, const rat& theta) {
    if (f.degree != g.degree) throw std::invalid_argument("theta_inner: degree mismatch");
    if (theta <= 0) throw std::invalid_argument("theta_inner: theta must be positive");
    sym_expansion pf = to_power_sum(f);
    sym_expansion pg = to_power_sum(g);
    rat acc = 0;
    for (const auto& [rho, v] : pf.coeffs) {
        auto it = pg.coeffs.find(rho);
        if (it == pg.coeffs.end()) continue;
        acc += v * it->second * rat(z_stat(rho)) * rat_pow(theta, length(rho));
    }
    return acc;
}

inline nlohmann::json sym_to_json(const sym_expansion& f) {
    nlohmann::json j;
    j["basis"] = basis_tag(f.b);
    j["degree"] = f.degree;
    nlohmann::json coeffs = nlohmann::json::object();
    for (const auto& [k, v] : f.coeffs) coeffs[partition_text(k)] = rat_str(v);
    j["coeffs"] = coeffs;
    return j;
}

inline sym_expansion sym_from_json(const nlohmann::json& j) {
    sym_expansion f;
    f.b = parse_basis(j.at("basis").get<std::string>());
    f.degree = j.at("degree").get<int>();
    for (const auto& [k, v] : j.at("coeffs").items())
        f.add(parse_partition(k), parse_rat(v.get<std::string>()));
    return f;
}

} // namespace medchain
