#include "qoper/miura.hpp"

#include <algorithm>
#include <cmath>

namespace qoper {

namespace {

Eigen::MatrixXcd mat_exp_nilpotent(const Eigen::MatrixXcd& x) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        term = term * x / static_cast<double>(k);
        if (term.norm() == 0.0) break;
        acc += term;
    }
    return acc;
}

double rel_err(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1.0});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

SLnRep SLnRep::make(int n) {
    if (n < 2) throw std::invalid_argument("SLnRep: n >= 2 required");
    SLnRep rep;
    rep.n = n;
    for (int i = 0; i < n - 1; ++i) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
        Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, n);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
        e(i, i + 1) = 1.0;
        f(i + 1, i) = 1.0;
        h(i, i) = 1.0;
        h(i + 1, i + 1) = -1.0;
        rep.E.push_back(e);
        rep.F.push_back(f);
        rep.Hcheck.push_back(h);
        rep.S.push_back(mat_exp_nilpotent(e) * mat_exp_nilpotent(-f) * mat_exp_nilpotent(e));
    }
    return rep;
}

double SLnRep::serre_residual() const {
    const int r = n - 1;
    auto comm = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return a * b - b * a; };
    auto aij = [&](int i, int j) { return (i == j) ? 2 : (std::abs(i - j) == 1 ? -1 : 0); };
    double worst = 0.0;
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            Eigen::MatrixXcd d = comm(E[i], F[j]);
            if (i == j) d -= Hcheck[i];
            worst = std::max(worst, d.cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (comm(Hcheck[i], E[j]) - static_cast<double>(aij(i, j)) * E[j])
                                 .cwiseAbs()
                                 .maxCoeff());
            worst = std::max(worst,
                             (comm(Hcheck[i], F[j]) + static_cast<double>(aij(i, j)) * F[j])
                                 .cwiseAbs()
                                 .maxCoeff());
            if (i != j) {
                // (ad E_i)^{1-a_ij} E_j = 0
                Eigen::MatrixXcd ad = E[j];
                for (int t = 0; t < 1 - aij(i, j); ++t) ad = comm(E[i], ad);
                worst = std::max(worst, ad.cwiseAbs().maxCoeff());
            }
        }
        // S_i block must be [[0,1],[-1,0]]
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(n, n);
        expect(i, i) = 0.0;
        expect(i + 1, i + 1) = 0.0;
        expect(i, i + 1) = 1.0;
        expect(i + 1, i) = -1.0;
        worst = std::max(worst, (S[i] - expect).cwiseAbs().maxCoeff());
    }
    return worst;
}

// ----------------------------------------------------- RationalMatrix

RationalMatrix::RationalMatrix(int r, int c)
    : rows(r), cols(c), entries(static_cast<std::size_t>(r) * c, RationalFn::constant(cplx(0.0, 0.0))) {}

RationalMatrix RationalMatrix::identity(int n) {
    RationalMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = RationalFn::constant(cplx(1.0, 0.0));
    return m;
}

Eigen::MatrixXcd RationalMatrix::eval(cplx z) const {
    Eigen::MatrixXcd out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out(r, c) = at(r, c).eval(z);
    return out;
}

RationalMatrix RationalMatrix::qshift(cplx q, int k) const {
    RationalMatrix out = *this;
    for (auto& e : out.entries) e = e.qshift(q, k);
    return out;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("RationalMatrix: shape mismatch");
    RationalMatrix out(a.rows, b.cols);
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < b.cols; ++c) {
            RationalFn acc = RationalFn::constant(cplx(0.0, 0.0));
            for (int k = 0; k < a.cols; ++k) {
                const RationalFn& x = a.at(r, k);
                const RationalFn& y = b.at(k, c);
                if (x.num.is_zero() || y.num.is_zero()) continue;
                acc = acc + x * y;
            }
            out.at(r, c) = acc;
        }
    return out;
}

RationalMatrix RationalMatrix::simplified(double tol) const {
    RationalMatrix out = *this;
    for (auto& e : out.entries) e = e.simplified(tol);
    return out;
}

RationalMatrix rational_exp_nilpotent(const Eigen::MatrixXcd& X, const RationalFn& coeff) {
    const int n = static_cast<int>(X.rows());
    RationalMatrix out = RationalMatrix::identity(n);
    Eigen::MatrixXcd power = X;
    RationalFn cpow = coeff;
    double fact = 1.0;
    for (int k = 1; k <= n && power.cwiseAbs().maxCoeff() > 0.0; ++k) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (std::abs(power(r, c)) > 0.0)
                    out.at(r, c) = out.at(r, c) + RationalFn::constant(power(r, c) / fact) * cpow;
        power = power * X;
        cpow = cpow * coeff;
        fact *= (k + 1);
    }
    return out;
}

RationalMatrix inverse_unipotent(const RationalMatrix& m) {
    const int n = m.rows;
    RationalMatrix L(n, n);  // strictly triangular part
    bool lower = true, upper = true;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (r == c) continue;
            L.at(r, c) = m.at(r, c);
            if (!m.at(r, c).num.is_zero()) {
                if (r < c) lower = false;
                if (r > c) upper = false;
            }
        }
    if (!lower && !upper) throw std::invalid_argument("inverse_unipotent: not triangular");
    RationalMatrix acc = RationalMatrix::identity(n);
    RationalMatrix term = RationalMatrix::identity(n);
    for (int k = 1; k < n; ++k) {
        term = term * L;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                acc.at(r, c) = acc.at(r, c) + RationalFn::constant(cplx(sign, 0.0)) * term.at(r, c);
    }
    return acc;
}

cplx SamplePlan::next(const std::vector<const Poly*>& denominators) {
    for (int attempt = 0; attempt < 400; ++attempt) {
        const cplx z = rng_.annulus(rlo_, rhi_);
        bool ok = true;
        for (const Poly* d : denominators) {
            if (d->is_zero()) throw std::invalid_argument("SamplePlan: zero denominator");
            const double scale =
                d->max_abs_coeff() * std::pow(std::max(1.0, std::abs(z)), std::max(0, d->degree()));
            if (std::abs(d->eval(z)) < 1e-6 * scale) ok = false;
        }
        if (ok) return z;
    }
    throw budget_error("SamplePlan: could not sample away from poles");
}

// --------------------------------------------------------- connection

RationalMatrix build_miura_connection(const QQInstance& inst, const std::vector<Poly>& q_plus,
                                      const SLnRep& rep) {
    const CartanData& cd = inst.cartan;
    if (cd.lie_type != LieType::A)
        throw std::invalid_argument("build_miura_connection: type A only");
    if (rep.n != cd.rank + 1)
        throw std::invalid_argument("build_miura_connection: rep.n must equal rank+1");
    if (static_cast<int>(q_plus.size()) != cd.rank)
        throw std::invalid_argument("build_miura_connection: q_plus size mismatch");

    RationalMatrix A = RationalMatrix::identity(rep.n);
    for (int p = 0; p < cd.rank; ++p) {
        const int i = cd.ordering[p];
        const cplx zeta = inst.twist.zetas[i - 1];
        const Poly& qp = q_plus[i - 1];
        const Poly qp_shift = qp.qshift(inst.q, 1);
        RationalMatrix factor = RationalMatrix::identity(rep.n);
        // [g]^{alpha^vee} (I + (Lambda/g) E_i) has block [[g, Lambda],[0, 1/g]]
        factor.at(i - 1, i - 1) = RationalFn(zeta * qp_shift, qp);
        factor.at(i, i) = RationalFn(qp, zeta * qp_shift);
        factor.at(i - 1, i) = RationalFn::from_poly(inst.lambdas[i - 1]);
        A = A * factor;
    }
    return A;
}

// ------------------------------------------------------------- GL(2)

namespace {

RationalFn g_fn(const QQInstance& inst, const std::vector<Poly>& q_plus, int j) {
    return RationalFn(inst.twist.zetas[j - 1] * q_plus[j - 1].qshift(inst.q, 1), q_plus[j - 1]);
}

}  // namespace

AssociatedGL2 associated_gl2(const QQInstance& inst, const QQSolution& sol, int i) {
    const CartanData& cd = inst.cartan;
    if (i < 1 || i > cd.rank) throw std::invalid_argument("associated_gl2: bad node");
    for (const Poly& p : sol.q_plus)
        if (p.is_zero()) throw std::invalid_argument("associated_gl2: zero Q+");

    AssociatedGL2 out;
    const RationalFn gi = g_fn(inst, sol.q_plus, i);

    RationalFn offdiag = RationalFn::from_poly(inst.lambdas[i - 1]);
    RationalFn corner = gi.inverse();
    cplx det_const(1.0, 0.0);
    // rho as a rational function, then extracted as a polynomial
    RationalFn rho = RationalFn::from_poly(inst.lambdas[i - 1]);
    for (int j = 1; j <= cd.rank; ++j) {
        if (j == i || cd.aij(j, i) == 0) continue;
        const int e = -cd.aij(j, i);
        const RationalFn gj = g_fn(inst, sol.q_plus, j);
        if (cd.pos(j) > cd.pos(i)) {
            offdiag = offdiag * pow_int(gj, e);
            const Poly yq = sol.q_plus[j - 1].qshift(inst.q, 1);
            rho = rho * RationalFn::from_poly(yq).scale_by(int_pow(inst.twist.zetas[j - 1], e));
            for (int t = 1; t < e; ++t) rho = rho * RationalFn::from_poly(yq);
        } else {
            for (int t = 0; t < e; ++t) rho = rho * RationalFn::from_poly(sol.q_plus[j - 1]);
        }
        corner = corner * pow_int(gj, e);
        det_const *= int_pow(inst.twist.zetas[j - 1], e);
    }
    out.det_value = det_const;

    out.plucker = RationalMatrix(2, 2);
    out.plucker.at(0, 0) = gi;
    out.plucker.at(0, 1) = offdiag;
    out.plucker.at(1, 1) = corner;

    auto [rq, rr] = Poly::divmod(rho.num, rho.den);
    if (rr.max_abs_coeff() > 1e-9 * std::max(1.0, rho.num.max_abs_coeff()))
        throw std::runtime_error("associated_gl2: rho_i is not a polynomial (nondegeneracy fails)");
    out.rho = rq;

    out.constant_det = RationalMatrix(2, 2);
    out.constant_det.at(0, 0) = gi;
    out.constant_det.at(0, 1) = RationalFn::from_poly(out.rho);
    out.constant_det.at(1, 1) = gi.inverse().scale_by(det_const);

    out.sl2 = RationalMatrix(2, 2);
    out.sl2.at(0, 0) = gi;
    out.sl2.at(0, 1) = RationalFn::from_poly(out.rho);
    out.sl2.at(1, 1) = gi.inverse();
    return out;
}

SampleReport check_miura_plucker(const QQInstance& inst, const QQSolution& sol, int samples,
                                 std::uint64_t seed, double tol) {
    const CartanData& cd = inst.cartan;
    SampleReport rep;
    rep.samples = samples;

    std::vector<const Poly*> dens;
    for (const Poly& p : sol.q_plus) dens.push_back(&p);
    std::vector<Poly> shifted;
    shifted.reserve(cd.rank);
    for (const Poly& p : sol.q_plus) shifted.push_back(p.qshift(inst.q, 1));
    for (const Poly& p : shifted) dens.push_back(&p);
    std::vector<Poly> shifted2;
    shifted2.reserve(cd.rank);
    for (const Poly& p : sol.q_plus) shifted2.push_back(p.qshift(inst.q, 2));
    for (const Poly& p : shifted2) dens.push_back(&p);

    SamplePlan plan(seed, 0.4, 2.6);
    for (int s = 0; s < samples; ++s) {
        const cplx z = plan.next(dens);
        const cplx zq = inst.q * z;
        for (int i = 1; i <= cd.rank; ++i) {
            auto eval_g = [&](int j, cplx at) {
                return inst.twist.zetas[j - 1] * sol.q_plus[j - 1].eval(inst.q * at) /
                       sol.q_plus[j - 1].eval(at);
            };
            // raw rank-2 reduction at z
            Eigen::MatrixXcd Ai(2, 2);
            cplx off = inst.lambdas[i - 1].eval(z);
            cplx corner = cplx(1.0, 0.0) / eval_g(i, z);
            for (int j = 1; j <= cd.rank; ++j) {
                if (j == i || cd.aij(j, i) == 0) continue;
                const int e = -cd.aij(j, i);
                const cplx gj = eval_g(j, z);
                if (cd.pos(j) > cd.pos(i)) off *= int_pow(gj, e);
                corner *= int_pow(gj, e);
            }
            Ai << eval_g(i, z), off, cplx(0.0, 0.0), corner;

            // v_i at z and qz (2x2 gauge with y_j = Q+_j)
            auto eval_v = [&](cplx at) {
                const cplx yi = sol.q_plus[i - 1].eval(at);
                cplx lower = cplx(1.0, 0.0) / yi;
                for (int j = 1; j <= cd.rank; ++j)
                    if (j != i && cd.aij(j, i) != 0)
                        lower *= int_pow(sol.q_plus[j - 1].eval(at), -cd.aij(j, i));
                const cplx phi = sol.q_minus[i - 1].eval(at) / yi;
                Eigen::MatrixXcd v(2, 2);
                v << yi, -yi * phi, cplx(0.0, 0.0), lower;
                return v;
            };
            cplx z2 = cplx(1.0, 0.0) / inst.twist.zetas[i - 1];
            for (int j = 1; j <= cd.rank; ++j)
                if (j != i) z2 *= int_pow(inst.twist.zetas[j - 1], -cd.aij(j, i));
            Eigen::MatrixXcd Zi(2, 2);
            Zi << inst.twist.zetas[i - 1], cplx(0.0, 0.0), cplx(0.0, 0.0), z2;

            const Eigen::MatrixXcd lhs = eval_v(zq) * Zi * eval_v(z).inverse();
            const double err = rel_err(lhs, Ai);
            rep.max_rel_err = std::max(rep.max_rel_err, err);
            if (err > tol) {
                rep.pass = false;
                rep.detail = "Miura-Plucker mismatch at node " + std::to_string(i) + ", z = " +
                             format_cplx(z) + ", rel err " + std::to_string(err);
            }
        }
    }
    return rep;
}

std::pair<RationalMatrix, SampleReport> sl2_gauge_to_Z(const QQInstance& inst,
                                                       const std::vector<Poly>& q_plus,
                                                       const std::vector<Poly>& q_minus,
                                                       int samples) {
    if (inst.cartan.rank != 1) throw std::invalid_argument("sl2_gauge_to_Z: rank-1 only");
    const cplx zeta = inst.twist.zetas[0];
    if (std::abs(zeta - cplx(1.0, 0.0)) < 1e-12 || std::abs(zeta + cplx(1.0, 0.0)) < 1e-12)
        throw std::invalid_argument("sl2_gauge_to_Z: zeta = +-1 is excluded");
    const Poly& qp = q_plus[0];
    const Poly& qm = q_minus[0];
    // relative primality guard
    if (qp.degree() >= 1 && qm.degree() >= 1)
        for (const cplx& w : roots(qp))
            if (std::abs(qm.eval(w)) < 1e-9 * std::max(1.0, qm.max_abs_coeff()))
                throw std::invalid_argument("sl2_gauge_to_Z: Q+ and Q- share a root");

    RationalMatrix U(2, 2);
    U.at(0, 0) = RationalFn::from_poly(qp);
    U.at(0, 1) = RationalFn::from_poly(-qm);
    U.at(1, 1) = RationalFn(Poly::one(), qp);

    SampleReport rep;
    rep.samples = samples;
    const SLnRep rep2 = SLnRep::make(2);
    const RationalMatrix A = build_miura_connection(inst, q_plus, rep2);

    // symbolic q-Wronskian must reproduce Lambda
    const Poly wron = zeta * (qm * qp.qshift(inst.q, 1)) -
                      (cplx(1.0, 0.0) / zeta) * (qm.qshift(inst.q, 1) * qp);
    if (!wron.near_equal(inst.lambdas[0], 1e-9)) {
        rep.pass = false;
        rep.detail = "q-Wronskian does not equal Lambda";
    }

    const Poly qp_shift = qp.qshift(inst.q, 1);
    std::vector<const Poly*> dens = {&qp, &qp_shift};
    SamplePlan plan(77, 0.4, 2.6);
    for (int s = 0; s < samples; ++s) {
        const cplx z = plan.next(dens);
        Eigen::MatrixXcd Z(2, 2);
        Z << zeta, cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0) / zeta;
        const Eigen::MatrixXcd lhs = U.eval(inst.q * z) * Z * U.eval(z).inverse();
        const double err = rel_err(lhs, A.eval(z));
        rep.max_rel_err = std::max(rep.max_rel_err, err);
        if (err > 1e-9) {
            rep.pass = false;
            rep.detail = "U(qz) Z U(z)^{-1} mismatch at z = " + format_cplx(z);
        }
    }
    return {U, rep};
}

RationalFn canonical_tq_sl2(const QQInstance& inst, const std::vector<Poly>& q_plus,
                            SampleReport* gauge_check, int samples) {
    if (inst.cartan.rank != 1) throw std::invalid_argument("canonical_tq_sl2: rank-1 only");
    const Poly& qp = q_plus[0];
    if (std::abs(qp.lead() - cplx(1.0, 0.0)) > 1e-9)
        throw std::invalid_argument("canonical_tq_sl2: Q+ must be monic");
    const Poly& lam = inst.lambdas[0];
    const cplx zeta = inst.twist.zetas[0];
    const cplx q = inst.q;

    const Poly qp1 = qp.qshift(q, 1);
    const Poly qp2 = qp.qshift(q, 2);
    const Poly lam1 = lam.qshift(q, 1);
    const Poly num = zeta * (qp2 * lam) + (cplx(1.0, 0.0) / zeta) * (qp * lam1);
    const Poly den = lam * lam1 * qp1;
    RationalFn T(num, den);

    if (gauge_check) {
        SampleReport rep;
        rep.samples = samples;
        std::vector<const Poly*> dens = {&lam, &lam1, &qp, &qp1, &qp2};
        SamplePlan plan(91, 0.4, 2.5);
        const SLnRep rep2 = SLnRep::make(2);
        const RationalMatrix A = build_miura_connection(inst, q_plus, rep2);
        for (int s = 0; s < samples; ++s) {
            const cplx z = plan.next(dens);
            const cplx zq = q * z;
            auto u_at = [&](cplx at) { return -zeta * qp.eval(q * at) / (qp.eval(at) * lam.eval(at)); };
            Eigen::MatrixXcd canon(2, 2), nl(2, 2), nr(2, 2);
            canon << cplx(0.0, 0.0), lam.eval(z), -cplx(1.0, 0.0) / lam.eval(z),
                lam.eval(z) * T.eval(z);
            nl << cplx(1.0, 0.0), cplx(0.0, 0.0), u_at(zq), cplx(1.0, 0.0);
            nr << cplx(1.0, 0.0), cplx(0.0, 0.0), -u_at(z), cplx(1.0, 0.0);
            const double err = rel_err(nl * canon * nr, A.eval(z));
            rep.max_rel_err = std::max(rep.max_rel_err, err);
            if (err > 1e-9) {
                rep.pass = false;
                rep.detail = "Baxter gauge identity fails at z = " + format_cplx(z);
            }
        }
        *gauge_check = rep;
    }
    return T;
}

std::vector<cplx> tq_residues_at_roots(const QQInstance& inst, const std::vector<Poly>& q_plus) {
    const RationalFn T = canonical_tq_sl2(inst, q_plus);
    const Poly dden = T.den.derivative();
    std::vector<cplx> out;
    if (q_plus[0].degree() < 1) return out;
    for (const cplx& w : roots(q_plus[0])) {
        const cplx z0 = w / inst.q;  // pole of the Q+(qz) factor tied to root w
        out.push_back(T.num.eval(z0) / dden.eval(z0));
    }
    return out;
}

// --------------------------------------------------- canonical form

std::vector<cplx> denominator_root_candidates(const RationalMatrix& m, const QQInstance& inst,
                                              int shift_range) {
    std::vector<cplx> base;
    auto harvest = [&](const Poly& p) {
        if (p.degree() >= 1)
            for (const cplx& w : roots(p)) base.push_back(w);
    };
    for (const auto& e : m.entries) harvest(e.den);
    for (const Poly& lam : inst.lambdas) harvest(lam);
    std::vector<cplx> out;
    out.reserve(base.size() * (2 * shift_range + 1));
    for (int t = -shift_range; t <= shift_range; ++t) {
        const cplx qt = int_pow(inst.q, t);
        for (const cplx& w : base) out.push_back(qt * w);
    }
    return out;
}

Eigen::MatrixXcd twist_matrix(const Twist& twist, const SLnRep& rep) {
    Eigen::MatrixXcd Z = Eigen::MatrixXcd::Identity(rep.n, rep.n);
    for (int i = 0; i < rep.n - 1; ++i) {
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(rep.n, rep.n);
        p(i, i) = twist.zetas[i];
        p(i + 1, i + 1) = cplx(1.0, 0.0) / twist.zetas[i];
        Z = Z * p;
    }
    return Z;
}

Eigen::MatrixXcd canonical_shape_eval(const QQInstance& inst, const SLnRep& rep,
                                      const std::vector<RationalFn>& T, cplx z) {
    const int n = rep.n;
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(n, n);
    for (int i = 0; i < n - 1; ++i) {
        Eigen::MatrixXcd lam = Eigen::MatrixXcd::Identity(n, n);
        const cplx lv = inst.lambdas[i].eval(z);
        lam(i, i) = lv;
        lam(i + 1, i + 1) = cplx(1.0, 0.0) / lv;
        Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(n, n);
        x(i, i + 1) = -T[i].eval(z);
        C = C * lam * rep.S[i] * x;
    }
    return C;
}

CanonicalForm canonical_form_sln(const RationalMatrix& A, const QQInstance& inst,
                                 const SLnRep& rep, int samples) {
    const CartanData& cd = inst.cartan;
    if (cd.lie_type != LieType::A) throw std::invalid_argument("canonical_form_sln: type A only");
    const int n = rep.n;
    if (n != cd.rank + 1 || A.rows != n || A.cols != n)
        throw std::invalid_argument("canonical_form_sln: dimension mismatch");
    if (n > 4) throw std::invalid_argument("canonical_form_sln: n <= 4 in this version");
    for (int p = 0; p < cd.rank; ++p)
        if (cd.ordering[p] != p + 1)
            throw std::invalid_argument("canonical_form_sln: standard ordering required");

    // product of all Lambda's and the partial products Lambda_k...Lambda_{n-1}
    Poly lam_all = Poly::one();
    for (const Poly& lam : inst.lambdas) lam_all = lam_all * lam;

    // cell check: the (1,n) entry must equal Lambda_1...Lambda_{n-1}
    if (!A.at(0, n - 1).same_function(RationalFn::from_poly(lam_all), 11, 1e-7))
        throw std::runtime_error(
            "canonical_form_sln: A is not in the oper cell (corner entry != prod Lambda_i)");

    CanonicalForm out;
    out.uprime = RationalMatrix::identity(n);
    out.T.assign(n - 1, RationalFn::constant(cplx(0.0, 0.0)));

    const std::vector<cplx> candidates = denominator_root_candidates(A, inst, n + 2);
    auto reduce = [&](const RationalFn& f) {
        return reduce_with_candidate_roots(f, candidates).simplified();
    };
    RationalMatrix Ar = A;
    for (auto& e : Ar.entries) e = reduce(e);

    // row n of u' comes from row 1 of the defining equation u'(qz) A = C u'(z)
    const RationalFn lam_all_fn = RationalFn::from_poly(lam_all);
    for (int l = 0; l < n - 1; ++l)
        out.uprime.at(n - 1, l) = reduce(Ar.at(0, l) / lam_all_fn);

    // walk rows bottom-up: row k of the equation determines tau_k = C_{k,n}
    // and row k-1 of u'
    std::vector<RationalFn> tau(n + 1, RationalFn::constant(cplx(0.0, 0.0)));
    for (int k = n; k >= 2; --k) {
        // v = (row k of u')(qz) * A(z)
        std::vector<RationalFn> v(n, RationalFn::constant(cplx(0.0, 0.0)));
        for (int l = 0; l < n; ++l) {
            RationalFn acc = RationalFn::constant(cplx(0.0, 0.0));
            for (int m = 0; m < n; ++m) {
                const RationalFn& u = out.uprime.at(k - 1, m);
                if (u.num.is_zero() || Ar.at(m, l).num.is_zero()) continue;
                acc = reduce(acc + u.qshift(inst.q, 1) * Ar.at(m, l));
            }
            v[l] = acc;
        }
        tau[k] = v[n - 1];
        if (k >= 3) {
            const RationalFn lam_prev = RationalFn::from_poly(inst.lambdas[k - 2]);
            for (int l = 0; l < k - 2; ++l) {
                // u'_{k-1,l} = -Lambda_{k-1} (v_l - tau_k u'_{n,l})
                const RationalFn val = -(lam_prev * (v[l] - tau[k] * out.uprime.at(n - 1, l)));
                out.uprime.at(k - 2, l) = reduce(val);
            }
        }
    }

    // T_{k-1} = tau_k * Lambda_{k-1} / (Lambda_k ... Lambda_{n-1})
    for (int k = 2; k <= n; ++k) {
        Poly tail = Poly::one();
        for (int j = k; j <= n - 1; ++j) tail = tail * inst.lambdas[j - 1];
        out.T[k - 2] = reduce(tau[k] * RationalFn(inst.lambdas[k - 2], tail));
    }

    // shape verification at sample points
    SampleReport rep_check;
    rep_check.samples = samples;
    std::vector<const Poly*> dens;
    std::vector<Poly> keep;
    keep.reserve(2 * n * n + 2 * (n - 1));
    for (const auto& e : A.entries) keep.push_back(e.den);
    for (const auto& e : out.uprime.entries) keep.push_back(e.den);
    for (const auto& e : out.uprime.entries) keep.push_back(e.den.qshift(inst.q, 1));
    for (const auto& t : out.T) keep.push_back(t.den);
    for (const Poly& lam : inst.lambdas) keep.push_back(lam);
    for (const Poly& p : keep)
        if (!p.is_zero() && p.degree() >= 0) dens.push_back(&p);
    SamplePlan plan(131, 0.45, 2.3);
    for (int s = 0; s < samples; ++s) {
        const cplx z = plan.next(dens);
        const Eigen::MatrixXcd lhs =
            out.uprime.eval(inst.q * z) * A.eval(z) * out.uprime.eval(z).inverse();
        const Eigen::MatrixXcd rhs = canonical_shape_eval(inst, rep, out.T, z);
        const double err = rel_err(lhs, rhs);
        rep_check.max_rel_err = std::max(rep_check.max_rel_err, err);
        if (err > 1e-8) {
            rep_check.pass = false;
            rep_check.detail = "canonical shape mismatch at z = " + format_cplx(z);
        }
    }
    out.shape_check = rep_check;
    return out;
}

}  // namespace qoper
