#pragma once

// Exact brute-force analysis: character sums against their proven bounds,
// exact extractor distances with per-seed decompositions, the numeric XOR
// lemma, residue-map distances and l1 Fourier norms.  Counting is integer or
// rational exact; characters and bounds live in doubles with a pinned 1e-9
// comparison tolerance.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "nmext/distribution.hpp"
#include "nmext/dlog.hpp"
#include "nmext/extract.hpp"
#include "nmext/ff.hpp"
#include "nmext/rational.hpp"
#include "nmext/seeding.hpp"

namespace nmext::analysis {

using ff::u64;
using json = nlohmann::json;
using cplx = std::complex<double>;

constexpr double kFloatTol = 1e-9;

// ---------------------------------------------------------------------------
// concurrency

inline unsigned worker_count() {
    if (const char* env = std::getenv("NMEXT_LAB_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return unsigned(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// Order-independent work distribution: tasks write into preallocated slots,
// so reports come out identical regardless of worker count.
template <typename Fn>
inline void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mtx);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// multiplicative characters via a full log table (desk-scale q)

struct CharField {
    u64 q = 0, g = 0;
    std::vector<u64> log;    // log[z] for z in [1,q)
    std::vector<cplx> root;  // e^(2*pi*i*e/(q-1)) for e in [0,q-1)

    // chi^a(z), with chi of full order q-1 pinned to chi(g^e) = root[e].
    // chi(0) = 0 before exponentiation, so every power vanishes at 0.
    cplx chi(u64 a, u64 z) const {
        if (z == 0) return {0.0, 0.0};
        return root[ff::mulmod(a % (q - 1), log[z], q - 1)];
    }
};

inline CharField make_char_field(u64 q) {
    if (!ff::is_prime(q) || q < 3) throw Error("make_char_field: q must be an odd prime");
    CharField cf;
    cf.q = q;
    cf.g = ff::find_generator(q, ff::factorize(q - 1));
    cf.log = dlog::dlog_table(q, cf.g);
    cf.root.resize(q - 1);
    for (u64 e = 0; e < q - 1; ++e) {
        double ang = 2.0 * M_PI * double(e) / double(q - 1);
        cf.root[e] = {std::cos(ang), std::sin(ang)};
    }
    return cf;
}

// ---------------------------------------------------------------------------
// character sums

struct CharSpec {
    u64 q = 0;
    u64 a = 0;  // exponent of the first character, 0 < a < q-1
    u64 b = 0;  // exponent of the second character, 0 <= b < q-1
};

// Theta = sum over y in T of |sum over s in S of chi^a(s+y) chi^b(s+A(y))|.
inline double charsum_theta(const CharField& cf, const CharSpec& spec,
                            const std::vector<u64>& S, const std::vector<u64>& T,
                            const std::function<u64(u64)>& A) {
    u64 q = cf.q;
    if (spec.q != q) throw Error("charsum_theta: spec/field q mismatch");
    if (spec.a == 0 || spec.a >= q - 1)
        throw Error("charsum_theta: first exponent must satisfy 0 < a < q-1");
    if (spec.b >= q - 1) throw Error("charsum_theta: second exponent must satisfy 0 <= b < q-1");
    double theta = 0.0;
    for (u64 y : T) {
        if (y >= q) throw Error("charsum_theta: T element outside F_q");
        u64 ay = A(y);
        if (ay >= q) throw Error("charsum_theta: A(y) outside F_q");
        if (ay == y) throw Error("charsum_theta: A has a fixed point inside T");
        cplx inner{0.0, 0.0};
        for (u64 s : S) {
            if (s >= q) throw Error("charsum_theta: S element outside F_q");
            inner += cf.chi(spec.a, ff::addmod(s, y, q)) * cf.chi(spec.b, ff::addmod(s, ay, q));
        }
        theta += std::abs(inner);
    }
    return theta;
}

// Same Theta when both characters are the quadratic one, evaluated through
// Euler's criterion with no log table; used to cross-check the table path.
inline double charsum_theta_quad(u64 q, const std::vector<u64>& S, const std::vector<u64>& T,
                                 const std::function<u64(u64)>& A) {
    std::vector<int> chi(q, 0);
    for (u64 x = 1; x < q; ++x) chi[ff::mulmod(x, x, q)] = 1;
    for (u64 z = 1; z < q; ++z)
        if (!chi[z]) chi[z] = -1;
    chi[0] = 0;
    double theta = 0.0;
    for (u64 y : T) {
        u64 ay = A(y);
        if (ay == y) throw Error("charsum_theta_quad: A has a fixed point inside T");
        long long inner = 0;
        for (u64 s : S)
            inner += (long long)chi[ff::addmod(s, y, q)] * chi[ff::addmod(s, ay, q)];
        theta += std::abs((double)inner);
    }
    return theta;
}

inline double uniform_theta_bound(u64 q, std::size_t s_size) {
    return std::pow(11.0, 0.25) * std::pow(double(q), 1.25) * std::sqrt(double(s_size));
}

// The eta < 2 q^(1/4) / sqrt(|S|) corollary, restated as a Theta ceiling.
inline double eta_theta_bound(u64 q, std::size_t s_size) {
    return 2.0 * std::pow(double(q), 1.25) * std::sqrt(double(s_size));
}

inline double lambda_r(unsigned r, u64 q, std::size_t t_size) {
    double rr = double(r);
    double inner = std::pow(4.0 * rr - 1.0, 2.0) +
                   std::pow(2.0 * rr, 4.0 * rr) * double(q) * std::pow(double(t_size), -rr);
    return std::pow(inner, 1.0 / (4.0 * rr));
}

inline double weak_theta_bound(unsigned r, u64 q, std::size_t s_size, std::size_t t_size) {
    return lambda_r(r, q, t_size) * std::pow(double(q), 1.0 / (4.0 * r)) *
           std::pow(double(s_size), 1.0 - 1.0 / (2.0 * r)) * double(t_size);
}

// Default moment order for a seed set of size |T| over F_q.
inline unsigned default_moment_order(u64 q, std::size_t t_size) {
    if (t_size < 2) return 1;
    return 1 + unsigned(std::floor(2.0 * std::log2(double(q)) / std::log2(double(t_size))));
}

// ---------------------------------------------------------------------------
// complete-sum bound for square roots of polynomials (spot check)

struct WeilResult {
    double sum_abs = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// |sum over x in F_q of chi(f(x))| for chi of full order q-1 and monic f
// given by distinct roots with multiplicities.  f must not be a (q-1)-th
// power, i.e. not all multiplicities divisible by q-1.  The bound is
// (#distinct roots - 1) * sqrt(q).
inline WeilResult weil_check(const CharField& cf, const std::vector<u64>& roots,
                             const std::vector<u64>& mults) {
    u64 q = cf.q;
    if (roots.empty() || roots.size() != mults.size())
        throw Error("weil_check: need matching nonempty root and multiplicity lists");
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i] >= q) throw Error("weil_check: root outside F_q");
        if (mults[i] < 1) throw Error("weil_check: multiplicities must be positive");
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (roots[i] == roots[j]) throw Error("weil_check: repeated root");
    }
    bool all_dth = true;
    for (u64 m : mults)
        if (m % (q - 1) != 0) all_dth = false;
    if (all_dth) throw Error("weil_check: f is a full power, the sum degenerates");
    cplx sum{0.0, 0.0};
    for (u64 x = 0; x < q; ++x) {
        u64 e = 0;
        bool zero = false;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            u64 diff = ff::addmod(x, q - roots[i], q);
            if (diff == 0) {
                zero = true;
                break;
            }
            e = (e + ff::mulmod(mults[i] % (q - 1), cf.log[diff], q - 1)) % (q - 1);
        }
        if (!zero) sum += cf.root[e];
    }
    WeilResult res;
    res.sum_abs = std::abs(sum);
    res.bound = double(roots.size() - 1) * std::sqrt(double(q));
    res.pass = res.sum_abs <= res.bound + kFloatTol;
    return res;
}

// ---------------------------------------------------------------------------
// exact extractor distance

enum class NmVariant { Bit, Dlog, GeneralM };

struct NmDistance {
    Rat delta;                 // mean over T of the per-seed distances
    std::vector<Rat> per_seed; // parallel to T
};

namespace detail {

// Extractor value table over all of F_q, with the designated 0 at z = 0.
inline std::vector<std::uint32_t> nm_table(u64 q, u64 M, NmVariant variant) {
    if (M < 1 || M > 1024) throw Error("nm_distance: M out of the tabulated range [1,1024]");
    std::vector<std::uint32_t> t(q, 0);
    switch (variant) {
        case NmVariant::Bit: {
            if (M != 2 && M != 1) throw Error("nm_distance: bit variant needs M = 2");
            std::vector<char> qr(q, 0);
            for (u64 x = 1; x < q; ++x) qr[ff::mulmod(x, x, q)] = 1;
            if (M == 2)
                for (u64 z = 1; z < q; ++z) t[z] = qr[z] ? 0 : 1;
            break;
        }
        case NmVariant::Dlog: {
            u64 mm = M, m = 0;
            while (mm > 1) {
                if (mm % 2 != 0) throw Error("nm_distance: dlog variant needs M = 2^m");
                mm >>= 1;
                ++m;
            }
            ff::FieldCtx ctx = ff::make_field_ctx(q, std::uint32_t(m));
            for (u64 z = 1; z < q; ++z) t[z] = std::uint32_t(dlog::dlog_pow2(z, ctx));
            break;
        }
        case NmVariant::GeneralM: {
            u64 g = ff::find_generator(q, ff::factorize(q - 1));
            std::vector<u64> log = dlog::dlog_table(q, g);
            for (u64 z = 1; z < q; ++z) t[z] = std::uint32_t(log[z] % M);
            break;
        }
    }
    return t;
}

}  // namespace detail

// Exact distance of (nm(X,Y), nm(X,A(Y)), Y) from (U, nm(X,A(Y)), Y) for X
// flat on S and Y flat on T: for each seed the conditional pair table is
// tallied in one pass over S, and the per-seed L1 gaps against the product
// with a uniform first coordinate are averaged over T.
inline NmDistance nm_distance(u64 q, u64 M, const std::vector<u64>& S, const std::vector<u64>& T,
                              const std::function<u64(u64)>& A, NmVariant variant) {
    if (!ff::is_prime(q)) throw Error("nm_distance: q must be prime");
    if (S.empty() || T.empty()) throw Error("nm_distance: S and T must be nonempty");
    std::vector<std::uint32_t> table = detail::nm_table(q, M, variant);
    std::vector<long long> counts(M * M);
    NmDistance out;
    out.per_seed.reserve(T.size());
    Int num_total = 0;
    Int per_seed_den = Int(2) * Int(M) * Int(S.size());
    for (u64 y : T) {
        if (y >= q) throw Error("nm_distance: T element outside F_q");
        u64 ay = A(y);
        if (ay >= q) throw Error("nm_distance: A(y) outside F_q");
        if (ay == y) throw Error("nm_distance: A has a fixed point inside T");
        std::fill(counts.begin(), counts.end(), 0);
        for (u64 x : S) {
            if (x >= q) throw Error("nm_distance: S element outside F_q");
            std::uint32_t u = table[ff::addmod(x, y, q)];
            std::uint32_t v = table[ff::addmod(x, ay, q)];
            ++counts[std::size_t(u) * M + v];
        }
        long long n_y = 0;
        for (u64 v = 0; v < M; ++v) {
            long long colsum = 0;
            for (u64 u = 0; u < M; ++u) colsum += counts[std::size_t(u) * M + v];
            for (u64 u = 0; u < M; ++u) {
                long long d = (long long)M * counts[std::size_t(u) * M + v] - colsum;
                n_y += d < 0 ? -d : d;
            }
        }
        out.per_seed.emplace_back(Int(n_y), per_seed_den);
        num_total += n_y;
    }
    out.delta = Rat(num_total, per_seed_den * Int(T.size()));
    return out;
}

// Flat-source distance ceiling: M q^(1/4) 2^(1-k/2) plus the designated-zero
// mass, clipped at 1.
inline double nm_distance_bound(u64 q, u64 M, std::size_t s_size) {
    double k = std::log2(double(s_size));
    double b = double(M) * std::pow(double(q), 0.25) * std::pow(2.0, 1.0 - k / 2.0) +
               1.0 / double(q);
    return std::min(1.0, b);
}

// ---------------------------------------------------------------------------
// leftover hash

struct LhlResult {
    Rat delta;          // exact distance of (Hash(X,W), W) from (U_m, W)
    double bound = 0.0; // half of 2^((m-k)/2)
    bool pass = false;
};

// Multiply-in-GF(2^n)-and-truncate hash against the leftover hash ceiling
// for a flat source S.  Walks every seed, so n stays desk-scale.
inline LhlResult lhl_check(const ff::Gf2Ctx& field, std::size_t m,
                           const std::vector<BitString>& S) {
    std::size_t n = field.v;
    if (n > 12) throw Error("lhl_check: seed space capped at 2^12");
    if (m < 1 || m > n) throw Error("lhl_check: output width out of range");
    if (S.empty()) throw Error("lhl_check: empty source");
    for (const BitString& x : S)
        if (x.size() != n) throw Error("lhl_check: source element width mismatch");
    u64 seeds = u64(1) << n;
    u64 space = u64(1) << m;
    std::vector<long long> counts(space);
    Int num = 0;
    for (u64 w = 0; w < seeds; ++w) {
        BitString wb = BitString::from_u64(w, n);
        std::fill(counts.begin(), counts.end(), 0);
        for (const BitString& x : S)
            ++counts[extract::strong_ext(x, wb, m, field).to_u64()];
        long long n_w = 0;
        for (u64 z = 0; z < space; ++z) {
            long long d = (long long)space * counts[z] - (long long)S.size();
            n_w += d < 0 ? -d : d;
        }
        num += n_w;
    }
    LhlResult res;
    res.delta = Rat(num, Int(2) * Int(space) * Int(S.size()) * Int(seeds));
    double k = std::log2(double(S.size()));
    res.bound = 0.5 * std::pow(2.0, (double(m) - k) / 2.0);
    res.pass = to_double(res.delta) <= res.bound + kFloatTol;
    return res;
}

// ---------------------------------------------------------------------------
// numeric XOR lemma

// Max over nontrivial first characters (all second characters) of
// |E[phi_j(W) phi_j'(W')]| for a joint on Z_M x Z_M.
inline double fourier_alpha(const JointTable& jt) {
    if (jt.rows != jt.cols) throw Error("fourier_alpha: table must be square (Z_M x Z_M)");
    std::size_t M = jt.rows;
    double alpha = 0.0;
    for (std::size_t j = 1; j < M; ++j) {
        for (std::size_t jp = 0; jp < M; ++jp) {
            cplx sum{0.0, 0.0};
            for (std::size_t u = 0; u < M; ++u)
                for (std::size_t v = 0; v < M; ++v) {
                    double ang = 2.0 * M_PI * double(j * u + jp * v) / double(M);
                    sum += to_double(jt.at(u, v)) * cplx{std::cos(ang), std::sin(ang)};
                }
            alpha = std::max(alpha, std::abs(sum));
        }
    }
    return alpha;
}

struct XorCheck {
    Rat delta;      // exact distance of (W,W') from (U, W')
    Rat linf;       // exact max pointwise gap
    double alpha = 0.0;
    bool pass_delta = false;
    bool pass_linf = false;
};

// If every nontrivial character correlation is at most alpha, the joint is
// alpha*M close to uniform-in-the-first-slot and the pointwise gap is at
// most alpha.
inline XorCheck xor_lemma_check(const JointTable& jt, double tol = kFloatTol) {
    if (jt.rows != jt.cols) throw Error("xor_lemma_check: table must be square");
    std::size_t M = jt.rows;
    Distribution wmarg = jt.col_marginal();
    XorCheck res;
    res.alpha = fourier_alpha(jt);
    Rat total = 0, linf = 0;
    for (std::size_t u = 0; u < M; ++u)
        for (std::size_t v = 0; v < M; ++v) {
            Rat gap = jt.at(u, v) - wmarg.p[v] / Rat((long)M);
            if (gap < 0) gap = -gap;
            total += gap;
            if (gap > linf) linf = gap;
        }
    res.delta = total / 2;
    res.linf = linf;
    res.pass_delta = to_double(res.delta) <= res.alpha * double(M) + tol;
    res.pass_linf = to_double(res.linf) <= res.alpha + tol;
    return res;
}

// ---------------------------------------------------------------------------
// residue map and l1 norms

// Exact distance of (U_N mod M) from U_M.
inline Rat residue_map_distance(u64 N, u64 M) {
    if (M < 1 || N < 1) throw Error("residue_map_distance: N and M must be positive");
    if (M > N) throw Error("residue_map_distance: M must not exceed N");
    Rat sum = 0;
    for (u64 v = 0; v < M; ++v) {
        u64 count = N / M + (v < N % M ? 1 : 0);
        Rat gap = Rat(Int(count), Int(N)) - Rat(1, Int(M));
        sum += gap < 0 ? -gap : gap;
    }
    return sum / 2;
}

struct L1NormResult {
    std::vector<double> norms;  // per character of Z_M, trivial first
    double bound = 0.0;
    bool pass = false;
};

// l1 Fourier mass over Z_N of each Z_M character composed with mod-M
// reduction: sum over k of |<f, e_k>| with the unnormalized inner product,
// checked against c_max * N * ln N.
inline L1NormResult l1_fourier_norm_check(u64 N, u64 M, double c_max) {
    if (N < 2 || M < 1 || M > N) throw Error("l1_fourier_norm_check: need 1 <= M <= N, N >= 2");
    L1NormResult res;
    res.bound = c_max * double(N) * std::log(double(N));
    std::vector<cplx> rootN(N), rootM(M);
    for (u64 k = 0; k < N; ++k) {
        double ang = 2.0 * M_PI * double(k) / double(N);
        rootN[k] = {std::cos(ang), std::sin(ang)};
    }
    for (u64 j = 0; j < M; ++j) {
        double ang = 2.0 * M_PI * double(j) / double(M);
        rootM[j] = {std::cos(ang), std::sin(ang)};
    }
    res.pass = true;
    for (u64 j = 0; j < M; ++j) {
        double norm = 0.0;
        for (u64 k = 0; k < N; ++k) {
            cplx coeff{0.0, 0.0};
            for (u64 x = 0; x < N; ++x)
                coeff += rootM[(j * (x % M)) % M] * std::conj(rootN[(k * x) % N]);
            norm += std::abs(coeff);
        }
        res.norms.push_back(norm);
        if (norm > res.bound + kFloatTol) res.pass = false;
    }
    return res;
}

}  // namespace nmext::analysis
