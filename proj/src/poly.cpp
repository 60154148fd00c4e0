#include "qoper/poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qoper {

// ---------------------------------------------------------------- Rng

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

cplx Rng::unit_circle() {
    const double th = uniform() * 6.283185307179586476925286766559;
    return {std::cos(th), std::sin(th)};
}

cplx Rng::annulus(double rlo, double rhi) {
    const double r = std::exp(uniform(std::log(rlo), std::log(rhi)));
    return r * unit_circle();
}

cplx Rng::gaussian_like() {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < 4; ++i) {
        re += uniform() - 0.5;
        im += uniform() - 0.5;
    }
    return {re, im};
}

// --------------------------------------------------------------- Poly

void Poly::trim() {
    double scale = 0.0;
    for (const cplx& v : c_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) {
        c_.clear();
        return;
    }
    const double tol = kTrimRel * scale;
    while (!c_.empty() && std::abs(c_.back()) <= tol) c_.pop_back();
}

Poly Poly::variable() {
    Poly p;
    p.c_ = {cplx(0.0, 0.0), cplx(1.0, 0.0)};
    return p;
}

Poly Poly::from_roots(const std::vector<cplx>& rts, cplx lead) {
    Poly p(lead);
    for (const cplx& w : rts) {
        Poly lin;
        lin.c_ = {-w, cplx(1.0, 0.0)};
        p = p * lin;
    }
    return p;
}

double Poly::max_abs_coeff() const {
    double m = 0.0;
    for (const cplx& v : c_) m = std::max(m, std::abs(v));
    return m;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (cplx& v : r.c_) v = -v;
    return r;
}

Poly& Poly::operator+=(const Poly& o) {
    if (c_.size() < o.c_.size()) c_.resize(o.c_.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    if (c_.size() < o.c_.size()) c_.resize(o.c_.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly::zero();
    std::vector<cplx> r(a.c_.size() + b.c_.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(r));
}

Poly Poly::scaled(cplx s) const {
    Poly r = *this;
    for (cplx& v : r.c_) v *= s;
    r.trim();
    return r;
}

Poly operator*(cplx s, const Poly& p) { return p.scaled(s); }

cplx Poly::eval(cplx z) const {
    cplx acc(0.0, 0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly::zero();
    std::vector<cplx> r(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) r[k - 1] = static_cast<double>(k) * c_[k];
    return Poly(std::move(r));
}

Poly Poly::qshift(cplx q, int k) const {
    if (std::abs(q) == 0.0) throw std::invalid_argument("qshift: q must be nonzero");
    Poly r = *this;
    const cplx qk = (k >= 0) ? std::pow(q, k) : cplx(1.0, 0.0) / std::pow(q, -k);
    cplx f(1.0, 0.0);
    for (std::size_t m = 0; m < r.c_.size(); ++m) {
        r.c_[m] *= f;
        f *= qk;
    }
    r.trim();
    return r;
}

Poly Poly::monic() const {
    if (is_zero()) throw std::invalid_argument("monic: zero polynomial");
    return scaled(cplx(1.0, 0.0) / lead());
}

Poly Poly::deflate_root(cplx w) const {
    if (degree() < 1) throw std::invalid_argument("deflate_root: degree < 1");
    std::vector<cplx> r(c_.size() - 1);
    cplx carry = c_.back();
    for (int k = degree() - 1; k >= 0; --k) {
        r[k] = carry;
        carry = c_[k] + carry * w;
    }
    return Poly(std::move(r));
}

bool Poly::near_equal(const Poly& o, double tol) const {
    const double scale = std::max({max_abs_coeff(), o.max_abs_coeff(), 1e-300});
    const std::size_t n = std::max(c_.size(), o.c_.size());
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(coeff(static_cast<int>(k)) - o.coeff(static_cast<int>(k))) > tol * scale)
            return false;
    return true;
}

std::pair<Poly, Poly> Poly::divmod(const Poly& num, const Poly& den) {
    if (den.is_zero()) throw std::invalid_argument("divmod: zero divisor");
    if (num.degree() < den.degree()) return {Poly::zero(), num};
    std::vector<cplx> rem = num.c_;
    const int dq = num.degree() - den.degree();
    std::vector<cplx> quo(dq + 1, cplx(0.0, 0.0));
    const cplx dl = den.lead();
    for (int k = dq; k >= 0; --k) {
        const cplx f = rem[k + den.degree()] / dl;
        quo[k] = f;
        for (int j = 0; j <= den.degree(); ++j) rem[k + j] -= f * den.c_[j];
    }
    return {Poly(std::move(quo)), Poly(std::move(rem))};
}

// -------------------------------------------------------------- roots

namespace {

// one pass of Newton per root; multiple roots converge slower but the
// residual target below still certifies them
cplx newton_polish(const Poly& p, const Poly& dp, cplx w, int iters) {
    for (int it = 0; it < iters; ++it) {
        const cplx f = p.eval(w);
        const cplx df = dp.eval(w);
        if (std::abs(df) < 1e-300) break;
        const cplx step = f / df;
        w -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

std::vector<cplx> aberth_ehrlich(const Poly& p) {
    const int n = p.degree();
    const Poly dp = p.derivative();
    // initial guesses on a circle slightly off-symmetry
    const double r = 1.0 + p.max_abs_coeff() / std::max(1e-300, std::abs(p.lead()));
    std::vector<cplx> w(n);
    for (int k = 0; k < n; ++k) {
        const double th = 6.283185307179586 * (k + 0.35) / n + 0.4;
        w[k] = r * cplx(std::cos(th), std::sin(th));
    }
    for (int it = 0; it < 400; ++it) {
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            const cplx pk = p.eval(w[k]);
            const cplx dk = dp.eval(w[k]);
            if (std::abs(dk) < 1e-300) continue;
            const cplx newton = pk / dk;
            cplx sum(0.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != k) sum += cplx(1.0, 0.0) / (w[k] - w[j]);
            const cplx denom = cplx(1.0, 0.0) - newton * sum;
            const cplx step = newton / denom;
            w[k] -= step;
            worst = std::max(worst, std::abs(step) / (1.0 + std::abs(w[k])));
        }
        if (worst < 1e-15) break;
    }
    return w;
}

}  // namespace

std::vector<cplx> roots(const Poly& p) {
    if (p.is_zero()) throw std::invalid_argument("roots: zero polynomial");
    if (p.degree() == 0) throw std::invalid_argument("roots: degree 0 has no roots");
    const int n = p.degree();

    std::vector<cplx> out;
    bool eigen_ok = false;
    {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
        const cplx lead = p.lead();
        for (int k = 0; k < n; ++k) comp(k, n - 1) = -p.coeff(k) / lead;
        for (int k = 1; k < n; ++k) comp(k, k - 1) = cplx(1.0, 0.0);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
        if (es.info() == Eigen::Success) {
            eigen_ok = true;
            out.reserve(n);
            for (int k = 0; k < n; ++k) out.push_back(es.eigenvalues()(k));
        }
    }
    if (!eigen_ok) out = aberth_ehrlich(p);

    const Poly dp = p.derivative();
    for (cplx& w : out) w = newton_polish(p, dp, w, 32);

    // residual certificate: |p(w)| < 1e-12 * ||p|| * max(1,|w|)^deg
    const double norm = p.max_abs_coeff();
    bool certified = true;
    for (const cplx& w : out) {
        const double bound = 1e-12 * norm * std::pow(std::max(1.0, std::abs(w)), n);
        if (std::abs(p.eval(w)) > bound) {
            certified = false;
            break;
        }
    }
    if (!certified && eigen_ok) {
        // deterministic fallback
        out = aberth_ehrlich(p);
        for (cplx& w : out) w = newton_polish(p, dp, w, 48);
    }

    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

// --------------------------------------------------------- q-distinct

QDistinctWitness q_distinct_witness(cplx u, cplx v, cplx q, int window, double tol) {
    QDistinctWitness w;
    cplx qn(1.0, 0.0);
    // n >= 0 sweep, then negative powers
    for (int sgn = 0; sgn < 2; ++sgn) {
        qn = cplx(1.0, 0.0);
        const cplx step = (sgn == 0) ? q : cplx(1.0, 0.0) / q;
        for (int n = 0; n <= window; ++n) {
            if (!(sgn == 1 && n == 0)) {
                const cplx qv = qn * v;
                const double denom = std::max(std::abs(u), std::abs(qv));
                const double rel = (denom == 0.0) ? 0.0 : std::abs(u - qv) / denom;
                if (rel <= tol) {
                    w.distinct = false;
                    w.n = (sgn == 0) ? n : -n;
                    w.rel_dist = rel;
                    return w;
                }
            }
            qn *= step;
        }
    }
    return w;
}

bool q_distinct(cplx u, cplx v, cplx q, int window, double tol) {
    return q_distinct_witness(u, v, q, window, tol).distinct;
}

// --------------------------------------------------------- RationalFn

RationalFn::RationalFn(Poly n, Poly d) : num(std::move(n)), den(std::move(d)) {
    if (den.is_zero()) throw std::invalid_argument("RationalFn: zero denominator");
}

cplx RationalFn::eval(cplx z) const { return num.eval(z) / den.eval(z); }

RationalFn RationalFn::qshift(cplx q, int k) const {
    return RationalFn(num.qshift(q, k), den.qshift(q, k));
}

RationalFn RationalFn::inverse() const {
    if (num.is_zero()) throw std::invalid_argument("RationalFn: inverse of zero");
    return RationalFn(den, num);
}

RationalFn operator+(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num * b.den + b.num * a.den, a.den * b.den);
}

RationalFn operator-(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num * b.den - b.num * a.den, a.den * b.den);
}

RationalFn operator*(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num * b.num, a.den * b.den);
}

RationalFn operator/(const RationalFn& a, const RationalFn& b) {
    if (b.num.is_zero()) throw std::invalid_argument("RationalFn: division by zero function");
    return RationalFn(a.num * b.den, a.den * b.num);
}

RationalFn RationalFn::operator-() const { return RationalFn(-num, den); }

RationalFn RationalFn::simplified(double tol) const {
    if (num.is_zero()) return RationalFn(Poly::zero(), Poly::one());
    if (den.degree() == 0) return RationalFn(num.scaled(cplx(1.0, 0.0) / den.lead()), Poly::one());
    if (num.degree() == 0) return *this;
    std::vector<cplx> nr = roots(num);
    std::vector<cplx> dr = roots(den);
    std::vector<bool> used(nr.size(), false);
    std::vector<cplx> dkeep;
    for (const cplx& d : dr) {
        bool cancelled = false;
        for (std::size_t i = 0; i < nr.size(); ++i) {
            if (used[i]) continue;
            if (std::abs(nr[i] - d) <= tol * std::max(1.0, std::abs(d))) {
                used[i] = true;
                cancelled = true;
                break;
            }
        }
        if (!cancelled) dkeep.push_back(d);
    }
    if (dkeep.size() == dr.size()) return *this;
    std::vector<cplx> nkeep;
    for (std::size_t i = 0; i < nr.size(); ++i)
        if (!used[i]) nkeep.push_back(nr[i]);
    RationalFn r(Poly::from_roots(nkeep, num.lead()), Poly::from_roots(dkeep, den.lead()));
    // accept the cancellation only if it is numerically faithful
    return r.same_function(*this, 23, 1e-7) ? r : *this;
}

bool RationalFn::same_function(const RationalFn& o, std::uint64_t seed, double tol) const {
    const int bound = std::max(0, num.degree()) + std::max(0, den.degree()) +
                      std::max(0, o.num.degree()) + std::max(0, o.den.degree()) + 7;
    Rng rng(seed);
    int checked = 0;
    int tries = 0;
    while (checked < bound && tries < 50 * bound + 200) {
        ++tries;
        const cplx z = rng.annulus(0.37, 2.9);
        const cplx d1 = den.eval(z), d2 = o.den.eval(z);
        const double dscale1 = std::max(1e-300, den.max_abs_coeff());
        const double dscale2 = std::max(1e-300, o.den.max_abs_coeff());
        if (std::abs(d1) < 1e-8 * dscale1 || std::abs(d2) < 1e-8 * dscale2) continue;
        const cplx v1 = num.eval(z) / d1;
        const cplx v2 = o.num.eval(z) / d2;
        const double denom = std::max({std::abs(v1), std::abs(v2), 1.0});
        if (std::abs(v1 - v2) > tol * denom) return false;
        ++checked;
    }
    if (checked < bound) throw budget_error("same_function: could not sample away from poles");
    return true;
}

namespace {

// |p(w)| measured against the evaluation scale sum_k |c_k| |w|^k, which
// is the attainable noise floor; degree-independent and multiplicity-safe
bool vanishes_at(const Poly& p, cplx w, double tol) {
    double scale = 0.0;
    double wk = 1.0;
    const double aw = std::abs(w);
    for (const cplx& c : p.coeffs()) {
        scale += std::abs(c) * wk;
        wk *= aw;
    }
    return std::abs(p.eval(w)) <= tol * std::max(scale, 1e-300);
}

}  // namespace

RationalFn reduce_with_candidate_roots(const RationalFn& f, const std::vector<cplx>& candidates,
                                       double tol) {
    if (f.num.is_zero()) return RationalFn(Poly::zero(), Poly::one());
    Poly num = f.num, den = f.den;
    for (const cplx& cand : candidates) {
        // candidates are trusted (they come from accurate low-degree
        // factors); divisibility is decided by evaluation, which stays
        // meaningful at multiple roots where root-finding scatters
        while (num.degree() >= 1 && den.degree() >= 1 && vanishes_at(den, cand, tol) &&
               vanishes_at(num, cand, tol)) {
            num = num.deflate_root(cand);
            den = den.deflate_root(cand);
        }
    }
    if (den.degree() == 0) return RationalFn(num.scaled(cplx(1.0, 0.0) / den.lead()), Poly::one());
    // keep the representation normalized: monic denominator
    const cplx lead = den.lead();
    return RationalFn(num.scaled(cplx(1.0, 0.0) / lead), den.scaled(cplx(1.0, 0.0) / lead));
}

RationalFn pow_int(const RationalFn& f, int k) {
    if (k == 0) return RationalFn::from_poly(Poly::one());
    RationalFn base = (k > 0) ? f : f.inverse();
    int e = std::abs(k);
    RationalFn acc = RationalFn::from_poly(Poly::one());
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

// --------------------------------------------- partial fractions

PartialFractions partial_fractions_simple(const RationalFn& f,
                                          const std::vector<std::vector<cplx>>& pole_groups,
                                          double separation_tol,
                                          double reconstruction_tol) {
    std::vector<cplx> all;
    for (const auto& g : pole_groups) all.insert(all.end(), g.begin(), g.end());
    const int npoles = static_cast<int>(all.size());
    if (npoles != std::max(0, f.den.degree()))
        throw std::invalid_argument("partial_fractions: pole list does not exhaust denominator");

    double scale = 0.0;
    for (const cplx& p : all) scale = std::max(scale, std::abs(p));
    scale = std::max(scale, 1.0);
    for (int i = 0; i < npoles; ++i)
        for (int j = i + 1; j < npoles; ++j)
            if (std::abs(all[i] - all[j]) < separation_tol * scale)
                throw std::invalid_argument("partial_fractions: repeated or clustered poles");
    for (const cplx& p : all) {
        const double dv = std::abs(f.den.eval(p));
        if (dv > 1e-6 * std::max(1.0, f.den.max_abs_coeff()) * std::pow(std::max(1.0, std::abs(p)), f.den.degree()))
            throw std::invalid_argument("partial_fractions: listed point is not a denominator root");
    }

    auto [quot, rem] = Poly::divmod(f.num, f.den);
    PartialFractions out;
    out.poly_part = quot;
    const Poly dden = f.den.derivative();
    out.residues.resize(pole_groups.size());
    for (std::size_t g = 0; g < pole_groups.size(); ++g) {
        out.residues[g].reserve(pole_groups[g].size());
        for (const cplx& p : pole_groups[g]) out.residues[g].push_back(rem.eval(p) / dden.eval(p));
    }

    // reconstruction check at seeded sample points
    const int nsamp = 2 * std::max(f.num.degree(), f.den.degree()) + 7;
    Rng rng(43);
    int done = 0, tries = 0;
    while (done < nsamp && tries < 60 * nsamp + 100) {
        ++tries;
        const cplx z = rng.annulus(0.31 * scale, 3.1 * scale);
        bool near_pole = false;
        for (const cplx& p : all)
            if (std::abs(z - p) < 1e-3 * scale) near_pole = true;
        if (near_pole) continue;
        cplx rec = out.poly_part.eval(z);
        std::size_t idx = 0;
        for (std::size_t g = 0; g < pole_groups.size(); ++g)
            for (std::size_t k = 0; k < pole_groups[g].size(); ++k, ++idx)
                rec += out.residues[g][k] / (z - pole_groups[g][k]);
        const cplx direct = f.eval(z);
        const double denom = std::max({std::abs(direct), std::abs(rec), 1.0});
        if (std::abs(rec - direct) > reconstruction_tol * denom)
            throw std::runtime_error("partial_fractions: reconstruction residual too large");
        ++done;
    }
    if (done < nsamp) throw budget_error("partial_fractions: sampling failed to avoid poles");
    return out;
}

std::string format_cplx(cplx v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
    return buf;
}

}  // namespace qoper
