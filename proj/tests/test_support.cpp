#include "test_support.hpp"

namespace qoper::testing {

QQInstance make_instance(LieType type, int rank, cplx q, std::vector<cplx> zetas,
                         std::vector<Poly> lambdas) {
    QQInstance inst;
    inst.cartan = cartan_matrix(type, rank);
    inst.q = q;
    inst.twist.zetas = std::move(zetas);
    inst.lambdas = std::move(lambdas);
    inst.validate();
    return inst;
}

QQInstance a1_instance(cplx q, cplx zeta, cplx z1) {
    return make_instance(LieType::A, 1, q, {zeta}, {Poly::from_roots({z1})});
}

cplx a1_closed_form_root(cplx q, cplx zeta, cplx z1) {
    const cplx z2 = zeta * zeta;
    return z1 * (cplx(1.0, 0.0) - z2 * q) / (cplx(1.0, 0.0) - z2);
}

QQInstance random_instance(Rng& rng, LieType type, int rank, int max_lambda_deg) {
    const CartanData cd = cartan_matrix(type, rank);
    for (int attempt = 0; attempt < 200; ++attempt) {
        QQInstance inst;
        inst.cartan = cd;
        inst.q = rng.uniform(1.3, 2.1) * rng.unit_circle();
        inst.twist.zetas.clear();
        for (int i = 0; i < rank; ++i) inst.twist.zetas.push_back(rng.annulus(0.35, 0.92));
        inst.lambdas.clear();
        for (int i = 0; i < rank; ++i) {
            const int deg = 1 + static_cast<int>(rng.uniform() * max_lambda_deg) % max_lambda_deg;
            std::vector<cplx> rts;
            for (int k = 0; k < deg; ++k) rts.push_back(rng.annulus(0.6, 1.7));
            inst.lambdas.push_back(Poly::from_roots(rts));
        }
        try {
            inst.validate();
            return inst;
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("random_instance: could not draw a valid instance");
}

std::vector<int> random_feasible_degrees(Rng& rng, const QQInstance& inst, int max_m) {
    for (int attempt = 0; attempt < 400; ++attempt) {
        std::vector<int> m(inst.cartan.rank);
        for (int& v : m) v = static_cast<int>(rng.uniform() * (max_m + 1)) % (max_m + 1);
        int total = 0;
        for (int v : m) total += v;
        if (total == 0) continue;
        try {
            qminus_degree(inst, m);
            return m;
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("random_feasible_degrees: no feasible vector found");
}

std::vector<QQSolution> solved_solutions(const QQInstance& inst, const std::vector<int>& degrees,
                                         std::uint64_t seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    const auto roots = solve_bethe(inst, degrees, cfg);
    std::vector<QQSolution> out;
    out.reserve(roots.size());
    for (const auto& br : roots) {
        QQSolution sol;
        sol.q_plus = br.to_q_plus();
        sol.q_minus = reconstruct_qminus(inst, sol.q_plus);
        out.push_back(std::move(sol));
    }
    return out;
}

}  // namespace qoper::testing
