#pragma once

// Exact finite distributions and joint tables.  All masses are rationals;
// entropy values alone are returned as doubles (the max-mass they log is
// still exact and exposed alongside).

#include <cstddef>
#include <string>
#include <vector>

#include "nmext/rational.hpp"

namespace nmext::analysis {

struct Distribution {
    std::vector<Rat> p;

    static Distribution uniform(std::size_t n) {
        if (n == 0) throw Error("Distribution: empty support");
        Distribution d;
        d.p.assign(n, Rat(1, (long)n));
        return d;
    }

    static Distribution from_counts(const std::vector<Int>& counts) {
        Int total = 0;
        for (const Int& c : counts) {
            if (c < 0) throw Error("Distribution: negative count");
            total += c;
        }
        if (total == 0) throw Error("Distribution: zero total mass");
        Distribution d;
        d.p.reserve(counts.size());
        for (const Int& c : counts) d.p.emplace_back(c, total);
        return d;
    }

    std::size_t size() const { return p.size(); }

    void validate() const {
        Rat sum = 0;
        for (const Rat& x : p) {
            if (x < 0) throw Error("Distribution: negative mass");
            sum += x;
        }
        if (sum != 1) throw Error("Distribution: masses do not sum to 1");
    }

    Rat max_mass() const {
        Rat m = 0;
        for (const Rat& x : p)
            if (x > m) m = x;
        return m;
    }
};

inline Rat stat_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) throw Error("stat_distance: support size mismatch");
    Rat sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rat d = a.p[i] - b.p[i];
        sum += d < 0 ? -d : d;
    }
    return sum / 2;
}

inline double min_entropy(const Distribution& d) { return neg_log2(d.max_mass()); }

// Joint mass over rows x cols; conditioning is always on the column axis.
struct JointTable {
    std::size_t rows = 0, cols = 0;
    std::vector<Rat> p;  // row-major
    std::string row_axis = "x", col_axis = "w";

    JointTable() = default;
    JointTable(std::size_t r, std::size_t c) : rows(r), cols(c), p(r * c, Rat(0)) {}

    Rat& at(std::size_t r, std::size_t c) { return p[r * cols + c]; }
    const Rat& at(std::size_t r, std::size_t c) const { return p[r * cols + c]; }

    void validate() const {
        Rat sum = 0;
        for (const Rat& x : p) {
            if (x < 0) throw Error("JointTable: negative mass");
            sum += x;
        }
        if (sum != 1) throw Error("JointTable: masses do not sum to 1");
    }

    Distribution row_marginal() const {
        Distribution d;
        d.p.assign(rows, Rat(0));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) d.p[r] += at(r, c);
        return d;
    }

    Distribution col_marginal() const {
        Distribution d;
        d.p.assign(cols, Rat(0));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) d.p[c] += at(r, c);
        return d;
    }
};

// E over columns of the max conditional row mass; zero-mass columns drop out
// of the expectation on their own (their joint masses are all zero).
inline Rat avg_cond_max_mass(const JointTable& j) {
    Rat g = 0;
    for (std::size_t c = 0; c < j.cols; ++c) {
        Rat m = 0;
        for (std::size_t r = 0; r < j.rows; ++r)
            if (j.at(r, c) > m) m = j.at(r, c);
        g += m;
    }
    return g;
}

inline double avg_cond_min_entropy(const JointTable& j) { return neg_log2(avg_cond_max_mass(j)); }

// With probability at least 1 - 2^-s over the conditioning value, the
// conditional min-entropy is within s of the average-case value.  Exact
// check: the mass of columns whose max conditional probability exceeds
// 2^s * G is at most 2^-s.
inline bool entropy_spread_check(const JointTable& j, unsigned s) {
    Rat g = avg_cond_max_mass(j);
    Rat threshold = rat_pow2(long(s)) * g;
    Rat bad_mass = 0;
    for (std::size_t c = 0; c < j.cols; ++c) {
        Rat colsum = 0, m = 0;
        for (std::size_t r = 0; r < j.rows; ++r) {
            colsum += j.at(r, c);
            if (j.at(r, c) > m) m = j.at(r, c);
        }
        if (colsum == 0) continue;
        if (m > threshold * colsum) bad_mass += colsum;
    }
    return bad_mass <= rat_pow2(-long(s));
}

// Conditioning on a variable with at most 2^l values costs at most l bits:
// G <= cols * max unconditional row mass.
inline bool conditioning_loss_check(const JointTable& j) {
    Rat g = avg_cond_max_mass(j);
    Rat maxrow = j.row_marginal().max_mass();
    return g <= Rat((long)j.cols) * maxrow;
}

}  // namespace nmext::analysis
