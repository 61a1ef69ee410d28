#pragma once

// brute-force differential operators on dense multivariate polynomials, used
// to cross-check the closed-form rows in sdops.hpp on small instances

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include <medchain/partition.hpp>
#include <medchain/rational.hpp>
#include <medchain/symfunc.hpp>

namespace oracle {

using medchain::rat;

using expo = std::vector<int>;
using poly = std::map<expo, rat>;

inline void add_term(poly& p, const expo& e, const rat& c) {
    if (c == 0) return;
    auto [it, fresh] = p.try_emplace(e, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) p.erase(it);
    }
}

inline poly padd(const poly& a, const poly& b) {
    poly out = a;
    for (const auto& [e, c] : b) add_term(out, e, c);
    return out;
}

inline poly pscal(const poly& a, const rat& s) {
    poly out;
    if (s == 0) return out;
    for (const auto& [e, c] : a) out.emplace(e, c * s);
    return out;
}

inline poly pmul(const poly& a, const poly& b) {
    poly out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            expo e = ea;
            for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
            add_term(out, e, ca * cb);
        }
    return out;
}

inline poly xvar(int i, int N) {
    expo e(N, 0);
    e[i] = 1;
    return {{e, rat(1)}};
}

inline poly deriv(const poly& p, int i) {
    poly out;
    for (const auto& [e, c] : p) {
        if (e[i] == 0) continue;
        expo ne = e;
        ne[i] -= 1;
        add_term(out, ne, c * e[i]);
    }
    return out;
}

inline poly xidi(const poly& p, int i) {
    poly out;
    for (const auto& [e, c] : p)
        if (e[i] != 0) out.emplace(e, c * e[i]);
    return out;
}

// exact division by (x_i - x_j): peel the term with the highest x_i degree,
// breaking ties by exponent order; throws if a remainder survives
inline poly divide_by_diff(poly p, int i, int j) {
    poly q;
    while (!p.empty()) {
        auto best = p.begin();
        for (auto it = std::next(p.begin()); it != p.end(); ++it)
            if (it->first[i] > best->first[i]
                || (it->first[i] == best->first[i] && it->first > best->first))
                best = it;
        expo e = best->first;
        rat c = best->second;
        if (e[i] <= 0) throw std::logic_error("division by x_i - x_j leaves a remainder");
        expo ne = e;
        ne[i] -= 1;
        add_term(q, ne, c);
        add_term(p, e, -c);
        expo sh = ne;
        sh[j] += 1;
        add_term(p, sh, c);
    }
    return q;
}

inline poly p_poly(int k, int N) {
    poly out;
    for (int i = 0; i < N; ++i) {
        expo e(N, 0);
        e[i] = k;
        add_term(out, e, rat(1));
    }
    return out;
}

inline poly plam_poly(const medchain::partition& lam, int N) {
    poly out = {{expo(N, 0), rat(1)}};
    for (int v : lam) out = pmul(out, p_poly(v, N));
    return out;
}

// sum_i g_i sum_{j != i} x_i / (x_i - x_j), as sum_{i<j} (x_i g_i - x_j g_j) / (x_i - x_j)
inline poly with_transport(const std::vector<poly>& g, int N) {
    poly out;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            poly num = padd(pmul(xvar(i, N), g[i]), pscal(pmul(xvar(j, N), g[j]), rat(-1)));
            out = padd(out, divide_by_diff(std::move(num), i, j));
        }
    return out;
}

inline poly bf_d110(const poly& f, int N) {
    std::vector<poly> g(N);
    for (int i = 0; i < N; ++i) g[i] = xidi(f, i);
    return with_transport(g, N);
}

inline poly bf_d002(const poly& f, int N) {
    poly out;
    for (int i = 0; i < N; ++i) out = padd(out, xidi(xidi(f, i), i));
    return out;
}

inline poly bf_d120(const poly& f, int N) {
    std::vector<poly> g(N);
    for (int i = 0; i < N; ++i) g[i] = xidi(xidi(f, i), i);
    return with_transport(g, N);
}

inline poly bf_d003(const poly& f, int N) {
    poly out;
    for (int i = 0; i < N; ++i) out = padd(out, xidi(xidi(xidi(f, i), i), i));
    return out;
}

// sum_i g_i [A_i + sum over ordered pairs j != k (both != i) of
// x_i^2 / ((x_i - x_j)(x_i - x_k))]; the pair sum collapses per triple a < b < c
// to twice an alternating quotient by the triple Vandermonde
inline poly bf_d210(const poly& f, int N) {
    std::vector<poly> g(N);
    for (int i = 0; i < N; ++i) g[i] = xidi(f, i);
    poly out = with_transport(g, N);
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            for (int c = b + 1; c < N; ++c) {
                auto sq = [&](int i) { return pmul(xvar(i, N), xvar(i, N)); };
                poly diff_bc = padd(xvar(b, N), pscal(xvar(c, N), rat(-1)));
                poly diff_ac = padd(xvar(a, N), pscal(xvar(c, N), rat(-1)));
                poly diff_ab = padd(xvar(a, N), pscal(xvar(b, N), rat(-1)));
                poly num = pmul(pmul(sq(a), g[a]), diff_bc);
                num = padd(num, pscal(pmul(pmul(sq(b), g[b]), diff_ac), rat(-1)));
                num = padd(num, pmul(pmul(sq(c), g[c]), diff_ab));
                poly q = divide_by_diff(std::move(num), a, b);
                q = divide_by_diff(std::move(q), a, c);
                q = divide_by_diff(std::move(q), b, c);
                out = padd(out, pscal(q, rat(2)));
            }
    return out;
}

// coefficient of X^{N-k} in the antisymmetrized product of X + delta_j + theta x_j d_j,
// conjugated by the Vandermonde: expand e_k over index sets S, split each S into
// the transported subset U and the scalar rest, and divide the alternating sum
inline poly gen_dk(const poly& f, int N, int k, const rat& theta) {
    std::vector<int> delta(N);
    for (int i = 0; i < N; ++i) delta[i] = N - 1 - i;

    std::vector<std::vector<int>> ksets;
    std::vector<int> cur;
    auto gen_sets = [&](auto&& self, int start) -> void {
        if (static_cast<int>(cur.size()) == k) {
            ksets.push_back(cur);
            return;
        }
        for (int v = start; v < N; ++v) {
            cur.push_back(v);
            self(self, v + 1);
            cur.pop_back();
        }
    };
    gen_sets(gen_sets, 0);

    // iterated x_j d_j images of f, keyed by the sorted index subset
    std::map<std::vector<int>, poly> pre;
    pre[{}] = f;
    auto build_pre = [&](auto&& self, const std::vector<int>& base, int start) -> void {
        if (static_cast<int>(base.size()) == k) return;
        for (int v = start; v < N; ++v) {
            std::vector<int> ext = base;
            ext.push_back(v);
            pre[ext] = xidi(pre.at(base), v);
            self(self, ext, v + 1);
        }
    };
    build_pre(build_pre, {}, 0);

    std::vector<int> perm(N);
    for (int i = 0; i < N; ++i) perm[i] = i;
    poly total;
    do {
        int inv = 0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (perm[i] > perm[j]) ++inv;
        rat sign = (inv % 2 == 0) ? rat(1) : rat(-1);
        std::vector<int> wd(N);
        for (int i = 0; i < N; ++i) wd[i] = delta[perm[i]];

        std::map<std::vector<int>, rat> coeff;
        for (const auto& S : ksets) {
            for (int mask = 0; mask < (1 << k); ++mask) {
                std::vector<int> U;
                rat c = 1;
                for (int b = 0; b < k; ++b) {
                    if (mask & (1 << b)) {
                        U.push_back(S[b]);
                        c *= theta;
                    } else {
                        c *= wd[S[b]];
                    }
                }
                if (c == 0) continue;
                auto [it, fresh] = coeff.try_emplace(U, c);
                if (!fresh) it->second += c;
            }
        }
        poly acc;
        for (const auto& [U, c] : coeff) acc = padd(acc, pscal(pre.at(U), c));
        for (const auto& [e, c] : acc) {
            expo ne = e;
            for (int i = 0; i < N; ++i) ne[i] += wd[i];
            add_term(total, ne, sign * c);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) total = divide_by_diff(std::move(total), i, j);
    return total;
}

// exact solve of f against the degree-n power-sum products in N variables
inline medchain::sym_expansion to_p_expansion(const poly& f, int n, int N) {
    auto plist = medchain::partitions_of(n);
    size_t P = plist.size();
    std::vector<poly> bas(P);
    for (size_t i = 0; i < P; ++i) bas[i] = plam_poly(plist[i], N);

    std::map<expo, size_t> rows;
    auto row_of = [&](const expo& e) {
        auto [it, fresh] = rows.try_emplace(e, rows.size());
        return it->second;
    };
    for (const auto& b : bas)
        for (const auto& [e, c] : b) row_of(e);
    for (const auto& [e, c] : f) row_of(e);

    size_t R = rows.size();
    std::vector<std::vector<rat>> M(R, std::vector<rat>(P + 1, rat(0)));
    for (size_t i = 0; i < P; ++i)
        for (const auto& [e, c] : bas[i]) M[rows.at(e)][i] = c;
    for (const auto& [e, c] : f) M[rows.at(e)][P] = c;

    size_t rank = 0;
    std::vector<int> piv(P, -1);
    for (size_t col = 0; col < P; ++col) {
        size_t p = rank;
        while (p < R && M[p][col] == 0) ++p;
        if (p == R) continue;
        std::swap(M[p], M[rank]);
        rat lead = M[rank][col];
        for (size_t j = col; j <= P; ++j) M[rank][j] /= lead;
        for (size_t r = 0; r < R; ++r) {
            if (r == rank || M[r][col] == 0) continue;
            rat fq = M[r][col];
            for (size_t j = col; j <= P; ++j) M[r][j] -= fq * M[rank][j];
        }
        piv[col] = static_cast<int>(rank);
        ++rank;
    }
    for (size_t col = 0; col < P; ++col)
        if (piv[col] < 0) throw std::logic_error("power-sum basis degenerate");
    for (size_t r = rank; r < R; ++r)
        if (M[r][P] != 0) throw std::logic_error("polynomial outside the span");

    medchain::sym_expansion out{medchain::basis::power_sum, n, {}};
    for (size_t col = 0; col < P; ++col) out.add(plist[col], M[piv[col]][P]);
    return out;
}

} // namespace oracle
