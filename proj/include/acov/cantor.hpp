#pragma once

// Cantor-like index subsets of {1, ..., B} used to decouple dependent blocks.
// All indices are 1-based.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "acov/error.hpp"

namespace acov {

struct IndexRange {
    std::int64_t first = 0;
    std::int64_t last = -1;  ///< inclusive; empty when last < first

    std::int64_t size() const { return last >= first ? last - first + 1 : 0; }
    bool operator==(const IndexRange&) const = default;
};

struct CantorStructure {
    std::int64_t b = 0;
    double delta = 0.0;
    int ell = 0;
    bool degenerate = false;
    std::vector<std::int64_t> n_levels;  ///< n_0 ... n_ell
    std::vector<std::int64_t> d_levels;  ///< d_0 ... d_{ell-1}
    /// intervals[k] holds I_k^1 ... I_k^{2^k}; gaps[k] holds J_k^1 ... J_k^{2^k}.
    std::vector<std::vector<IndexRange>> intervals;
    std::vector<std::vector<IndexRange>> gaps;
    std::vector<std::int64_t> k_b;  ///< sorted

    /// K_k^j: union of I_ell^i for i in ((j-1) 2^{ell-k}, j 2^{ell-k}].
    std::vector<std::int64_t> k_block(int k, std::int64_t j) const {
        if (k < 0 || k > ell) throw InputError("k_block: level out of range");
        const std::int64_t width = std::int64_t{1} << (ell - k);
        if (j < 1 || j > (std::int64_t{1} << k)) throw InputError("k_block: block index out of range");
        std::vector<std::int64_t> out;
        for (std::int64_t i = (j - 1) * width; i < j * width; ++i) {
            const IndexRange& r = intervals[ell][static_cast<std::size_t>(i)];
            for (std::int64_t v = r.first; v <= r.last; ++v) out.push_back(v);
        }
        return out;
    }

    bool operator==(const CantorStructure&) const = default;
};

namespace detail {

inline double cantor_level_term(double b, double delta, int k) {
    return b * delta * std::pow(1.0 - delta, k - 1) / std::ldexp(1.0, k);
}

}  // namespace detail

inline CantorStructure build_cantor(std::int64_t b) {
    if (b < 2) throw InputError("build_cantor: B must be >= 2");
    const double bd = static_cast<double>(b);
    CantorStructure c;
    c.b = b;
    c.delta = std::log(2.0) / (2.0 * std::log(bd));

    int ell = 0;
    while (detail::cantor_level_term(bd, c.delta, ell + 1) >= 2.0) ++ell;
    c.ell = ell;
    c.n_levels.push_back(b);
    c.intervals.push_back({IndexRange{1, b}});

    if (ell == 0) {
        c.degenerate = true;
        c.k_b.resize(static_cast<std::size_t>(b));
        for (std::int64_t i = 0; i < b; ++i) c.k_b[static_cast<std::size_t>(i)] = i + 1;
        return c;
    }

    for (int j = 1; j <= ell; ++j) {
        const double raw = bd * std::pow(1.0 - c.delta, j) / std::ldexp(1.0, j);
        c.n_levels.push_back(static_cast<std::int64_t>(std::ceil(raw)));
        c.d_levels.push_back(c.n_levels[j - 1] - 2 * c.n_levels[j]);
    }

    for (int k = 0; k < ell; ++k) {
        const std::int64_t n_next = c.n_levels[k + 1];
        const std::int64_t d = c.d_levels[k];
        std::vector<IndexRange> next;
        std::vector<IndexRange> gap;
        next.reserve(c.intervals[k].size() * 2);
        for (const IndexRange& r : c.intervals[k]) {
            const std::int64_t a = r.first;
            next.push_back({a, a + n_next - 1});
            gap.push_back({a + n_next, a + n_next + d - 1});
            next.push_back({a + n_next + d, a + 2 * n_next + d - 1});
        }
        c.gaps.push_back(std::move(gap));
        c.intervals.push_back(std::move(next));
    }

    for (const IndexRange& r : c.intervals[ell]) {
        for (std::int64_t v = r.first; v <= r.last; ++v) c.k_b.push_back(v);
    }
    return c;
}

struct CantorReport {
    bool applicable = false;
    bool prop[6] = {false, false, false, false, false, false};

    bool all() const {
        if (!applicable) return false;
        for (bool p : prop) {
            if (!p) return false;
        }
        return true;
    }
};

/// Checks the six structural properties directly against the stored
/// intervals, so a structure edited after construction is judged on what it
/// holds rather than on how it was built.
inline CantorReport verify_cantor_properties(const CantorStructure& c) {
    CantorReport rep;
    if (c.degenerate || c.ell < 1) return rep;
    const std::size_t ell = static_cast<std::size_t>(c.ell);
    if (c.n_levels.size() != ell + 1 || c.d_levels.size() != ell || c.intervals.size() != ell + 1) {
        return rep;
    }
    rep.applicable = true;
    const double bd = static_cast<double>(c.b);
    const double delta = c.delta;
    const std::int64_t n_ell = c.n_levels[ell];
    const auto& leaves = c.intervals[ell];
    const std::size_t leaf_count = std::size_t{1} << ell;

    rep.prop[0] = delta <= 0.5 && static_cast<double>(c.ell) <= std::log(bd) / std::log(2.0);

    bool p2 = true;
    for (std::size_t j = 0; j < ell; ++j) {
        const double lower = bd * delta * std::pow(1.0 - delta, static_cast<double>(j)) /
                             std::ldexp(1.0, static_cast<int>(j) + 1);
        if (static_cast<double>(c.d_levels[j]) < lower) p2 = false;
    }
    const double upper = bd * std::pow(1.0 - delta, static_cast<double>(ell)) /
                         std::ldexp(1.0, static_cast<int>(ell) - 1);
    if (static_cast<double>(n_ell) > upper) p2 = false;
    rep.prop[1] = p2;

    bool p3 = leaves.size() == leaf_count;
    if (p3) {
        for (const IndexRange& r : leaves) {
            if (r.size() != n_ell) p3 = false;
        }
        for (std::size_t i = 0; p3 && i + 1 < leaf_count; i += 2) {
            if (leaves[i + 1].first - leaves[i].last - 1 != c.d_levels[ell - 1]) p3 = false;
        }
    }
    rep.prop[2] = p3;

    std::vector<std::int64_t> union_leaves;
    for (const IndexRange& r : leaves) {
        for (std::int64_t v = r.first; v <= r.last; ++v) union_leaves.push_back(v);
    }
    rep.prop[3] = 2 * static_cast<std::int64_t>(c.k_b.size()) >= c.b;

    bool p5 = p3;
    for (std::size_t k = 0; p5 && k <= ell; ++k) {
        const std::int64_t blocks = std::int64_t{1} << k;
        const std::int64_t expect = (std::int64_t{1} << (ell - k)) * n_ell;
        std::vector<std::int64_t> prev;
        for (std::int64_t j = 1; p5 && j <= blocks; ++j) {
            const auto block = c.k_block(static_cast<int>(k), j);
            if (static_cast<std::int64_t>(block.size()) != expect) p5 = false;
            if (p5 && k >= 1 && j % 2 == 0) {
                if (block.front() - prev.back() - 1 != c.d_levels[k - 1]) p5 = false;
            }
            prev = block;
        }
    }
    rep.prop[4] = p5;

    bool p6 = p3 && c.k_block(0, 1) == c.k_b && union_leaves == c.k_b;
    for (std::size_t j = 0; p6 && j < leaf_count; ++j) {
        const auto block = c.k_block(c.ell, static_cast<std::int64_t>(j) + 1);
        const IndexRange& r = leaves[j];
        if (block.size() != static_cast<std::size_t>(r.size()) || block.front() != r.first ||
            block.back() != r.last) {
            p6 = false;
        }
    }
    rep.prop[5] = p6;
    return rep;
}

}  // namespace acov
