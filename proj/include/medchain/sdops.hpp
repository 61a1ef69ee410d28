#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain.hpp"
#include "symfunc.hpp"

namespace medchain {

enum class op_kind { d110, d002, d120, d210, d003, dtheta2, dtheta3, lb2 };

inline std::string op_kind_tag(op_kind k) {
    switch (k) {
        case op_kind::d110: return "d110";
        case op_kind::d002: return "d002";
        case op_kind::d120: return "d120";
        case op_kind::d210: return "d210";
        case op_kind::d003: return "d003";
        case op_kind::dtheta2: return "dtheta2";
        case op_kind::dtheta3: return "dtheta3";
        case op_kind::lb2: return "lb2";
    }
    throw std::logic_error("bad op kind");
}

inline op_kind parse_op_kind(const std::string& s) {
    for (op_kind k : {op_kind::d110, op_kind::d002, op_kind::d120, op_kind::d210,
                      op_kind::d003, op_kind::dtheta2, op_kind::dtheta3, op_kind::lb2})
        if (s == op_kind_tag(k)) return k;
    throw std::invalid_argument("bad operator tag: " + s);
}

// theta feeds only the dtheta2 / dtheta3 / lb2 kinds; nvars must cover the
// degree of every operand
struct operator_spec {
    op_kind kind = op_kind::d002;
    rat theta = rat(1);
    int nvars = 0;
};

namespace detail {

inline void add_shape(coeff_map& out, partition mu, const rat& v) {
    if (v == 0) return;
    std::sort(mu.begin(), mu.end(), std::greater<int>());
    auto [pos, fresh] = out.try_emplace(std::move(mu), v);
    if (!fresh) {
        pos->second += v;
        if (pos->second == 0) out.erase(pos);
    }
}

inline partition drop_part(const partition& lam, int s) {
    partition out;
    out.reserve(lam.size());
    for (int t = 0; t < length(lam); ++t)
        if (t != s) out.push_back(lam[t]);
    return out;
}

inline partition drop_parts(const partition& lam, int s, int t) {
    partition out;
    out.reserve(lam.size());
    for (int u = 0; u < length(lam); ++u)
        if (u != s && u != t) out.push_back(lam[u]);
    return out;
}

// transport term sum_i A_i (x_i d_i) with A_i = sum_{j != i} x_i / (x_i - x_j):
// each part v holds at v (2N - v - 1) / 2 and splits at v / 2 per ordered offset
inline coeff_map d110_row(const partition& lam, int N) {
    coeff_map out;
    for (int s = 0; s < length(lam); ++s) {
        int v = lam[s];
        add_shape(out, lam, rat(v) * (2 * N - v - 1) / 2);
        partition base = drop_part(lam, s);
        for (int r = 1; r < v; ++r) {
            partition mu = base;
            mu.push_back(r);
            mu.push_back(v - r);
            add_shape(out, std::move(mu), rat(v) / 2);
        }
    }
    return out;
}

// sum_i (x_i d_i)^2: diagonal sum v^2, each unordered pair merges at 2 lam_s lam_t
inline coeff_map d002_row(const partition& lam) {
    coeff_map out;
    rat diag = 0;
    for (int v : lam) diag += rat(v) * v;
    add_shape(out, lam, diag);
    for (int s = 0; s < length(lam); ++s)
        for (int t = s + 1; t < length(lam); ++t) {
            partition mu = drop_parts(lam, s, t);
            mu.push_back(lam[s] + lam[t]);
            add_shape(out, std::move(mu), 2 * rat(lam[s]) * lam[t]);
        }
    return out;
}

// sum_i A_i (x_i d_i)^2: the single-part terms of d110 weighted by an extra v,
// plus ordered pairs that first merge and then either hold or split anywhere
// (an offset hitting lam_s or lam_t lands back on the diagonal)
inline coeff_map d120_row(const partition& lam, int N) {
    coeff_map out;
    for (int s = 0; s < length(lam); ++s) {
        int v = lam[s];
        add_shape(out, lam, rat(v) * v * (2 * N - v - 1) / 2);
        partition base = drop_part(lam, s);
        for (int r = 1; r < v; ++r) {
            partition mu = base;
            mu.push_back(r);
            mu.push_back(v - r);
            add_shape(out, std::move(mu), rat(v) * v / 2);
        }
    }
    for (int s = 0; s < length(lam); ++s)
        for (int t = 0; t < length(lam); ++t) {
            if (t == s) continue;
            int vs = lam[s], vt = lam[t];
            partition base = drop_parts(lam, s, t);
            partition merged = base;
            merged.push_back(vs + vt);
            add_shape(out, std::move(merged), rat(vs) * vt * (2 * N - vs - vt - 1) / 2);
            for (int r = 1; r < vs + vt; ++r) {
                partition mu = base;
                mu.push_back(r);
                mu.push_back(vs + vt - r);
                add_shape(out, std::move(mu), rat(vs) * vt / 2);
            }
        }
    return out;
}

// sum_i [A_i + sum_{j != k != i} x_i^2 / ((x_i - x_j)(x_i - x_k))] (x_i d_i):
// two-piece splits at v (2N - 1 - v) / 2, three-piece splits at v / 3 per
// ordered composition; the diagonal is v [(N - 1)(N - v) + (2v - 1)(v - 1) / 6],
// the last factor being the mean of r^2 over the split offsets
inline coeff_map d210_row(const partition& lam, int N) {
    coeff_map out;
    for (int s = 0; s < length(lam); ++s) {
        int v = lam[s];
        partition base = drop_part(lam, s);
        for (int r = 1; r < v; ++r) {
            partition mu = base;
            mu.push_back(r);
            mu.push_back(v - r);
            add_shape(out, std::move(mu), rat(v) * (2 * N - 1 - v) / 2);
        }
        for (int r1 = 1; r1 < v - 1; ++r1)
            for (int r2 = 1; r2 < v - r1; ++r2) {
                partition mu = base;
                mu.push_back(r1);
                mu.push_back(r2);
                mu.push_back(v - r1 - r2);
                add_shape(out, std::move(mu), rat(v) / 3);
            }
        add_shape(out, lam, rat(v) * (rat(static_cast<long>(N - 1) * (N - v))
                                      + rat(static_cast<long>(2 * v - 1) * (v - 1)) / 6));
    }
    return out;
}

// sum_i (x_i d_i)^3: diagonal sum v^3, ordered pairs merge at 3 lam_s^2 lam_t,
// distinct triples merge at lam_s lam_t lam_u
inline coeff_map d003_row(const partition& lam) {
    coeff_map out;
    rat diag = 0;
    for (int v : lam) diag += rat(v) * v * v;
    add_shape(out, lam, diag);
    for (int s = 0; s < length(lam); ++s)
        for (int t = 0; t < length(lam); ++t) {
            if (t == s) continue;
            partition mu = drop_parts(lam, s, t);
            mu.push_back(lam[s] + lam[t]);
            add_shape(out, std::move(mu), 3 * rat(lam[s]) * lam[s] * lam[t]);
        }
    for (int s = 0; s < length(lam); ++s)
        for (int t = s + 1; t < length(lam); ++t)
            for (int u = t + 1; u < length(lam); ++u) {
                partition mu = drop_parts(lam, s, t);
                // drop_parts removed s and t; u shifted left past both
                mu.erase(mu.begin() + (u - 2));
                mu.push_back(lam[s] + lam[t] + lam[u]);
                add_shape(out, std::move(mu), 6 * rat(lam[s]) * lam[t] * lam[u]);
            }
    return out;
}

// coefficient of X^{N-2} in the operator generating function
inline coeff_map dtheta2_row(const partition& lam, const rat& theta, int N) {
    long nn = weight(lam);
    rat c2 = (theta * theta * nn * nn + theta * nn * N * (N - 1)
              + rat(static_cast<long>(N) * (N - 1) * (N - 2) * (3 * N - 1)) / 12) / 2;
    coeff_map out;
    add_shape(out, lam, c2);
    for (const auto& [mu, v] : d110_row(lam, N)) add_shape(out, mu, -theta * v);
    for (const auto& [mu, v] : d002_row(lam)) add_shape(out, mu, -theta * theta / 2 * v);
    return out;
}

// coefficient of X^{N-3}: inclusion-exclusion over distinct index triples puts
// weights theta^3/6, theta^2/2 and theta on the three brackets
inline coeff_map dtheta3_row(const partition& lam, const rat& theta, int N) {
    long nn = weight(lam);
    rat b2 = rat(binom(N, 2));
    rat s2 = rat(static_cast<long>(N) * (N - 1) * (2 * N - 1)) / 6;
    rat c3 = (b2 * b2 * b2 - 3 * s2 * b2 + 2 * b2 * b2) / 6
             + theta * (b2 * b2 - s2) * nn / 2
             + theta * theta * b2 * nn * nn / 2
             + theta * theta * theta * nn * nn * nn / 6;
    coeff_map out;
    add_shape(out, lam, c3);
    auto fold = [&out](const coeff_map& part, const rat& w) {
        for (const auto& [mu, v] : part) add_shape(out, mu, w * v);
    };
    fold(d003_row(lam), theta * theta * theta / 3);
    fold(d002_row(lam), -theta * theta * theta * nn / 2 - theta * theta * b2 / 2);
    fold(d120_row(lam, N), theta * theta);
    fold(d110_row(lam, N), -theta * theta * nn - theta * b2);
    fold(d210_row(lam, N), theta);
    return out;
}

} // namespace detail

// one row of the degree-preserving second-order operator, normalized so that
// every row sums to 1 for every positive theta: merge a pair at lam_s lam_t,
// split a part at v / (2 theta) per offset, hold (1 - 1/theta) sum binom(lam_i, 2),
// all over C(n, 2); entries can be negative below theta = 1
inline sym_expansion lb2_row(const partition& lam, const rat& theta) {
    int n = weight(lam);
    if (n < 2) throw std::invalid_argument("lb2_row: need degree at least 2");
    if (theta <= 0) throw std::invalid_argument("lb2_row: theta must be positive");
    rat pairs = rat(binom(n, 2));
    coeff_map out;
    detail::add_shape(out, lam, (theta - 1) / theta * nt_stat(lam) / pairs);
    for (int s = 0; s < length(lam); ++s) {
        for (int t = s + 1; t < length(lam); ++t) {
            partition mu = detail::drop_parts(lam, s, t);
            mu.push_back(lam[s] + lam[t]);
            detail::add_shape(out, std::move(mu), rat(lam[s]) * lam[t] / pairs);
        }
        int v = lam[s];
        partition base = detail::drop_part(lam, s);
        for (int r = 1; r < v; ++r) {
            partition mu = base;
            mu.push_back(r);
            mu.push_back(v - r);
            detail::add_shape(out, std::move(mu), rat(v) / 2 / (theta * pairs));
        }
    }
    return {basis::power_sum, n, std::move(out)};
}

namespace detail {

// Metropolis normalization: the row itself for theta >= 1, otherwise theta
// times the row plus (1 - theta) extra holding; always a probability vector
inline coeff_map metropolis_row(const partition& lam, const rat& theta) {
    sym_expansion base = lb2_row(lam, theta);
    if (theta >= 1) return base.coeffs;
    coeff_map out;
    for (const auto& [mu, v] : base.coeffs) add_shape(out, mu, theta * v);
    add_shape(out, lam, rat(1) - theta);
    return out;
}

} // namespace detail

// linear extension of the per-p_lambda rows; conserves the degree
inline sym_expansion apply(const operator_spec& op, const sym_expansion& f) {
    if (f.b != basis::power_sum)
        throw std::invalid_argument("apply: operand must be in the power-sum basis");
    int n = f.degree;
    if (n < 1 || n > exact_degree_cap)
        throw std::invalid_argument("apply: degree out of range");
    for (const auto& [lam, v] : f.coeffs)
        if (weight(lam) != n) throw std::invalid_argument("apply: operand not homogeneous");
    if (op.nvars < n)
        throw std::invalid_argument("apply: fewer variables than the degree");
    bool uses_theta = op.kind == op_kind::dtheta2 || op.kind == op_kind::dtheta3
                      || op.kind == op_kind::lb2;
    if (uses_theta && op.theta <= 0)
        throw std::invalid_argument("apply: theta must be positive");

    sym_expansion out{basis::power_sum, n, {}};
    for (const auto& [lam, v] : f.coeffs) {
        coeff_map row;
        switch (op.kind) {
            case op_kind::d110: row = detail::d110_row(lam, op.nvars); break;
            case op_kind::d002: row = detail::d002_row(lam); break;
            case op_kind::d120: row = detail::d120_row(lam, op.nvars); break;
            case op_kind::d210: row = detail::d210_row(lam, op.nvars); break;
            case op_kind::d003: row = detail::d003_row(lam); break;
            case op_kind::dtheta2: row = detail::dtheta2_row(lam, op.theta, op.nvars); break;
            case op_kind::dtheta3: row = detail::dtheta3_row(lam, op.theta, op.nvars); break;
            case op_kind::lb2: row = lb2_row(lam, op.theta).coeffs; break;
        }
        for (const auto& [mu, w] : row) out.add(mu, v * w);
    }
    return out;
}

// the full degree-n matrix in the power-sum basis
inline std::map<partition, sym_expansion, desc_lex> lb2_markov_rows(int n, const rat& theta,
                                                                    int nvars) {
    if (n < 2) throw std::invalid_argument("lb2_markov_rows: n must be at least 2");
    if (theta <= 0) throw std::invalid_argument("lb2_markov_rows: theta must be positive");
    if (nvars < n) throw std::invalid_argument("lb2_markov_rows: fewer variables than n");
    std::map<partition, sym_expansion, desc_lex> out;
    for (const auto& lam : partitions_of(n)) out.emplace(lam, lb2_row(lam, theta));
    return out;
}

// elementary symmetric polynomial e_k of the shifted values N - 1 - i + theta lam_i
// over all N rows; the generating-function operators act on the deformed basis
// by these scalars
inline rat sd_eigenvalue(const partition& lam, int nvars, const rat& theta, int k) {
    if (nvars < length(lam))
        throw std::invalid_argument("sd_eigenvalue: need nvars >= length");
    if (k < 0) throw std::invalid_argument("sd_eigenvalue: order out of range");
    if (k > nvars) return rat(0);
    std::vector<rat> e(k + 1, rat(0));
    e[0] = 1;
    for (int i = 0; i < nvars; ++i) {
        rat val = rat(nvars - 1 - i) + theta * (i < length(lam) ? lam[i] : 0);
        for (int j = std::min<int>(k, i + 1); j >= 1; --j) e[j] += val * e[j - 1];
    }
    return e[k];
}

// the tabulated two-row action in the elementary basis: diagonal 3 (1 + r1) and
// merged shapes (r1 + r2 - j, j) at -2 (r1 + r2 - 2j) for j = 0..r1-1; the true
// diagonal of sum (x_i d_i)^2 is 3 r1 + r2, so the table is exact only at r2 = 3
inline sym_expansion elementary_u(int r1, int r2) {
    if (r1 < 1 || r1 > r2)
        throw std::invalid_argument("elementary_u: need 1 <= r1 <= r2");
    int w = r1 + r2;
    sym_expansion out{basis::elementary, w, {}};
    out.add(partition{r2, r1}, rat(3) * (1 + r1));
    for (int j = 0; j < r1; ++j) {
        partition key = j ? partition{w - j, j} : partition{w};
        out.add(key, rat(-2) * (w - 2 * j));
    }
    return out;
}

// left fixed probability vector of the two-step kernel P_{theta1} P_{theta2},
// solved exactly; the composition loses reversibility but keeps a unique
// stationary law away from theta1 = theta2 = 1
inline std::map<partition, rat, desc_lex> composition_stationary(const rat& theta1,
                                                                 const rat& theta2, int n) {
    if (theta1 <= 0 || theta2 <= 0)
        throw std::invalid_argument("composition_stationary: thetas must be positive");
    if (n < 2 || n > 9)
        throw std::invalid_argument("composition_stationary: n must be in 2..9");
    if (theta1 == 1 && theta2 == 1)
        throw periodicity_error("composition of two unit-theta kernels has period 2");

    partition_index idx(n);
    size_t d = idx.size();
    auto dense = [&](const rat& th) {
        std::vector<std::vector<rat>> M(d, std::vector<rat>(d, rat(0)));
        for (size_t i = 0; i < d; ++i)
            for (const auto& [mu, v] : detail::metropolis_row(idx.list[i], th))
                M[i][idx.at(mu)] = v;
        return M;
    };
    auto P1 = dense(theta1);
    auto P2 = dense(theta2);
    std::vector<std::vector<rat>> C(d, std::vector<rat>(d, rat(0)));
    for (size_t i = 0; i < d; ++i)
        for (size_t k = 0; k < d; ++k) {
            if (P1[i][k] == 0) continue;
            for (size_t j = 0; j < d; ++j)
                if (P2[k][j] != 0) C[i][j] += P1[i][k] * P2[k][j];
        }

    // balance equations sigma (C - I) = 0 plus normalization, eliminated exactly
    std::vector<std::vector<rat>> A(d + 1, std::vector<rat>(d + 1, rat(0)));
    for (size_t j = 0; j < d; ++j)
        for (size_t i = 0; i < d; ++i) A[j][i] = C[i][j] - (i == j ? rat(1) : rat(0));
    for (size_t i = 0; i < d; ++i) A[d][i] = 1;
    A[d][d] = 1;

    size_t rank = 0;
    std::vector<int> pivot_row(d, -1);
    for (size_t col = 0; col < d; ++col) {
        size_t p = rank;
        while (p <= d && A[p][col] == 0) ++p;
        if (p > d) continue;
        std::swap(A[p], A[rank]);
        rat lead = A[rank][col];
        for (size_t j = col; j <= d; ++j) A[rank][j] /= lead;
        for (size_t r = 0; r <= d; ++r) {
            if (r == rank || A[r][col] == 0) continue;
            rat f = A[r][col];
            for (size_t j = col; j <= d; ++j) A[r][j] -= f * A[rank][j];
        }
        pivot_row[col] = static_cast<int>(rank);
        ++rank;
    }
    if (rank < d)
        throw periodicity_error("composition kernel has multiple fixed vectors");
    for (size_t r = rank; r <= d; ++r)
        if (A[r][d] != 0) throw std::logic_error("fixed-vector system inconsistent");

    std::map<partition, rat, desc_lex> out;
    rat total = 0;
    for (size_t i = 0; i < d; ++i) {
        rat v = A[pivot_row[i]][d];
        if (v < 0) throw std::logic_error("negative stationary probability");
        total += v;
        if (v != 0) out.emplace(idx.list[i], v);
    }
    if (total != 1) throw std::logic_error("stationary probabilities do not sum to 1");
    return out;
}

} // namespace medchain
