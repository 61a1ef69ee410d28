#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"

namespace medchain {

// parts in weakly decreasing order, no trailing zeros; () is the empty partition of 0
using partition = std::vector<int>;

inline int weight(const partition& lam) {
    return std::accumulate(lam.begin(), lam.end(), 0);
}

inline int length(const partition& lam) { return static_cast<int>(lam.size()); }

inline bool is_valid_partition(const partition& lam) {
    for (size_t i = 0; i < lam.size(); ++i) {
        if (lam[i] <= 0) return false;
        if (i > 0 && lam[i] > lam[i - 1]) return false;
    }
    return true;
}

inline partition conjugate(const partition& lam) {
    partition out;
    if (lam.empty()) return out;
    out.resize(lam[0]);
    for (int j = 0; j < lam[0]; ++j)
        out[j] = static_cast<int>(std::count_if(lam.begin(), lam.end(),
                                                [&](int p) { return p > j; }));
    return out;
}

// n(lam) = sum (i-1) lam_i
inline long n_stat(const partition& lam) {
    long out = 0;
    for (size_t i = 0; i < lam.size(); ++i) out += static_cast<long>(i) * lam[i];
    return out;
}

// n(lam') = sum binom(lam_i, 2), without building the conjugate
inline long nt_stat(const partition& lam) {
    long out = 0;
    for (int p : lam) out += static_cast<long>(p) * (p - 1) / 2;
    return out;
}

inline std::vector<int> multiplicities(const partition& lam) {
    std::vector<int> mult(lam.empty() ? 1 : lam[0] + 1, 0);
    for (int p : lam) mult[p]++;
    return mult;
}

// z_lam = prod_i i^{m_i} m_i!
inline bigint z_stat(const partition& lam) {
    bigint z = 1;
    auto mult = multiplicities(lam);
    for (size_t i = 1; i < mult.size(); ++i) {
        if (!mult[i]) continue;
        bigint ip;
        mpz_ui_pow_ui(ip.get_mpz_t(), i, mult[i]);
        z *= ip * factorial(mult[i]);
    }
    return z;
}

// dominance: a <= b iff all prefix sums of a are <= those of b (equal weight assumed)
inline bool dominance_leq(const partition& a, const partition& b) {
    if (weight(a) != weight(b))
        throw std::invalid_argument("dominance_leq: weights differ");
    long sa = 0, sb = 0;
    size_t k = std::max(a.size(), b.size());
    for (size_t i = 0; i < k; ++i) {
        sa += i < a.size() ? a[i] : 0;
        sb += i < b.size() ? b[i] : 0;
        if (sa > sb) return false;
    }
    return true;
}

// arm a = lam_i - j and leg l = lam^t_j - i for the 1-based cell (i, j)
struct hook_entry {
    int row, col, arm, leg;
};

inline std::vector<hook_entry> hooks(const partition& lam) {
    std::vector<hook_entry> out;
    partition lt = conjugate(lam);
    for (int i = 1; i <= length(lam); ++i)
        for (int j = 1; j <= lam[i - 1]; ++j)
            out.push_back({i, j, lam[i - 1] - j, lt[j - 1] - i});
    return out;
}

inline bigint hook_product(const partition& lam) {
    bigint h = 1;
    for (const auto& c : hooks(lam)) h *= c.arm + c.leg + 1;
    return h;
}

// deformed hook pair product j_lam = prod ((a+1)theta + l)(a theta + l + 1)
inline rat hook_pair_product(const partition& lam, const rat& theta) {
    rat j = 1;
    for (const auto& c : hooks(lam))
        j *= (rat(c.arm + 1) * theta + c.leg) * (rat(c.arm) * theta + c.leg + 1);
    return j;
}

// smallest u >= 1 with cell (u, floor(u/theta) + 1) outside lam
inline int theta_durfee_height(const partition& lam, const rat& theta) {
    if (theta <= 0) throw std::invalid_argument("theta_durfee_height: theta must be positive");
    for (int u = 1;; ++u) {
        bigint col = (u * theta.get_den()) / theta.get_num();  // floor(u/theta)
        long j = col.get_si() + 1;
        bool inside = u <= length(lam) && j <= lam[u - 1];
        if (!inside) return u;
    }
}

namespace detail {
inline void gen_rec(int m, int maxpart, partition& cur, std::vector<partition>& out) {
    if (m == 0) {
        out.push_back(cur);
        return;
    }
    for (int first = std::min(m, maxpart); first >= 1; --first) {
        cur.push_back(first);
        gen_rec(m - first, first, cur, out);
        cur.pop_back();
    }
}
} // namespace detail

// canonical order: descending lexicographic, (n) first and (1^n) last
inline std::vector<partition> partitions_of(int n) {
    if (n < 1) throw std::invalid_argument("partitions_of: n must be positive");
    std::vector<partition> out;
    partition cur;
    detail::gen_rec(n, n, cur, out);
    return out;
}

inline std::string partition_text(const partition& lam) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < lam.size(); ++i) {
        if (i) os << ',';
        os << lam[i];
    }
    os << ']';
    return os.str();
}

inline partition parse_partition(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw std::invalid_argument("bad partition: " + raw);
    partition lam;
    std::string body = s.substr(1, s.size() - 2);
    if (!body.empty()) {
        std::istringstream is(body);
        std::string tok;
        while (std::getline(is, tok, ','))
            lam.push_back(std::stoi(tok));
    }
    if (!is_valid_partition(lam))
        throw std::invalid_argument("bad partition: " + s);
    return lam;
}

// index of each partition of n in the canonical enumeration
struct partition_index {
    std::vector<partition> list;
    std::map<partition, int> pos;

    explicit partition_index(int n) : list(partitions_of(n)) {
        for (size_t i = 0; i < list.size(); ++i) pos[list[i]] = static_cast<int>(i);
    }
    int at(const partition& lam) const {
        auto it = pos.find(lam);
        if (it == pos.end()) throw std::invalid_argument("not a partition of n: " + partition_text(lam));
        return it->second;
    }
    size_t size() const { return list.size(); }
};

// the canonical order must refine dominance: mu < lam in dominance implies lam enumerated first
inline bool canonical_order_refines_dominance(int n) {
    auto ps = partitions_of(n);
    for (size_t i = 0; i < ps.size(); ++i)
        for (size_t j = i + 1; j < ps.size(); ++j)
            if (dominance_leq(ps[i], ps[j]) && ps[i] != ps[j]) return false;
    return true;
}

inline size_t count_partitions(int n) {
    // Euler recurrence with pentagonal numbers
    std::vector<bigint> p(n + 1);
    p[0] = 1;
    for (int m = 1; m <= n; ++m) {
        bigint acc = 0;
        for (int k = 1;; ++k) {
            long g1 = static_cast<long>(k) * (3 * k - 1) / 2;
            long g2 = static_cast<long>(k) * (3 * k + 1) / 2;
            if (g1 > m && g2 > m) break;
            int sign = (k % 2) ? 1 : -1;
            if (g1 <= m) acc += sign * p[m - g1];
            if (g2 <= m) acc += sign * p[m - g2];
        }
        p[m] = acc;
    }
    return static_cast<size_t>(p[n].get_ui());
}

} // namespace medchain
