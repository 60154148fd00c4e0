#ifndef QOPER_POLY_HPP
#define QOPER_POLY_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qoper {

using cplx = std::complex<double>;

inline constexpr double kTrimRel = 1e-12;   // trailing-coefficient trim, relative to max |coeff|
inline constexpr double kMatchTol = 1e-8;   // default root-matching tolerance (relative)

// Thrown when a requested computation exceeds the configured budget
// (oracle unknown count, retry caps).  The CLI maps it to exit code 3.
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// deterministic xorshift-based generator; avoids platform-dependent
// std distributions so seeded runs produce identical bytes everywhere
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next_u64();
    double uniform();                       // [0,1)
    double uniform(double lo, double hi);
    cplx unit_circle();                     // e^{i theta}
    cplx annulus(double rlo, double rhi);   // log-uniform radius
    cplx gaussian_like();                   // sum of uniforms, zero mean

private:
    std::uint64_t state_;
};

// Dense complex polynomial in z, coefficients ascending, trailing
// near-zeros trimmed.  The zero polynomial has an empty coefficient
// vector and degree() == -1.
class Poly {
public:
    Poly() = default;
    explicit Poly(cplx c0) { c_.push_back(c0); trim(); }
    explicit Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly zero() { return Poly(); }
    static Poly one() { return Poly(cplx(1.0, 0.0)); }
    static Poly variable();                              // z
    static Poly from_roots(const std::vector<cplx>& roots, cplx lead = cplx(1.0, 0.0));

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx(0.0, 0.0);
    }
    cplx lead() const { return c_.empty() ? cplx(0.0, 0.0) : c_.back(); }
    const std::vector<cplx>& coeffs() const { return c_; }
    double max_abs_coeff() const;

    Poly operator-() const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly scaled(cplx s) const;

    cplx eval(cplx z) const;                              // Horner
    Poly derivative() const;
    Poly qshift(cplx q, int k) const;                     // p(q^k z)
    Poly monic() const;                                   // divide by lead; error on zero poly
    Poly deflate_root(cplx w) const;                      // exact synthetic division by (z-w)
    bool near_equal(const Poly& o, double tol) const;     // coefficientwise, relative to joint scale

    // quotient/remainder; divisor must be nonzero
    static std::pair<Poly, Poly> divmod(const Poly& num, const Poly& den);

private:
    void trim();
    std::vector<cplx> c_;
};

Poly operator*(cplx s, const Poly& p);

// All complex roots with multiplicity.  Companion-matrix eigenvalues
// polished by Newton; Aberth-Ehrlich fallback when the eigensolver
// fails to converge.  Requires degree >= 1.
std::vector<cplx> roots(const Poly& p);

// true iff q^Z u and q^Z v are disjoint as far as the window can see:
// min over n in [-N,N] of |u - q^n v| / max(|u|,|q^n v|) > tol
bool q_distinct(cplx u, cplx v, cplx q, int window, double tol);

// the witness version: returns the offending n, or nullopt-style flag
struct QDistinctWitness {
    bool distinct = true;
    int n = 0;
    double rel_dist = 0.0;
};
QDistinctWitness q_distinct_witness(cplx u, cplx v, cplx q, int window, double tol);

struct RationalFn {
    Poly num;
    Poly den = Poly::one();

    RationalFn() = default;
    RationalFn(Poly n, Poly d);
    static RationalFn from_poly(Poly p) { return RationalFn(std::move(p), Poly::one()); }
    static RationalFn constant(cplx c) { return from_poly(Poly(c)); }

    cplx eval(cplx z) const;
    RationalFn qshift(cplx q, int k) const;
    RationalFn inverse() const;

    friend RationalFn operator+(const RationalFn& a, const RationalFn& b);
    friend RationalFn operator-(const RationalFn& a, const RationalFn& b);
    friend RationalFn operator*(const RationalFn& a, const RationalFn& b);
    friend RationalFn operator/(const RationalFn& a, const RationalFn& b);
    RationalFn operator-() const;
    RationalFn scale_by(cplx s) const { return RationalFn(num.scaled(s), den); }

    // cancel matching num/den root pairs; safe only while factors are
    // well separated, used to keep degrees small in long products
    RationalFn simplified(double tol = 1e-9) const;

    // sampling identity test: agreement at deg_num+deg_den+7 seeded
    // annulus points away from poles implies equality up to tolerance
    bool same_function(const RationalFn& o, std::uint64_t seed = 17, double tol = 1e-9) const;
};

RationalFn pow_int(const RationalFn& f, int k);

// Deflate common num/den roots drawn from a trusted candidate list.
// Divisibility is decided by evaluation against each polynomial's
// evaluation scale and deflation is synthetic division, so this stays
// accurate at multiple roots and for polynomials too large for reliable
// full root finding.
RationalFn reduce_with_candidate_roots(const RationalFn& f, const std::vector<cplx>& candidates,
                                       double tol = 1e-7);

struct PartialFractions {
    Poly poly_part;
    std::vector<std::vector<cplx>> residues;  // [group][pole index]
};

// f = poly_part + sum res_p/(z - p) over all labeled poles; poles must
// be simple and pairwise separated.  Residues are num(p)/den'(p) after
// the polynomial part is split off.  Reconstruction is checked at
// 2*deg+7 seeded sample points to 1e-9 relative.
PartialFractions partial_fractions_simple(const RationalFn& f,
                                          const std::vector<std::vector<cplx>>& pole_groups,
                                          double separation_tol = 1e-8,
                                          double reconstruction_tol = 1e-9);

// sum_k |c_k| |z|^k: the natural magnitude scale for evaluating p at z
// (evaluation noise floor and near-pole detection both measure against it)
double poly_eval_scale(const Poly& p, cplx z);

std::string format_cplx(cplx v);  // 17 significant digits, round-trip

}  // namespace qoper

#endif
