#include "qoper/json_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace qoper {

using nlohmann::json;

json to_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument("expected complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const Poly& p) {
    json arr = json::array();
    for (const cplx& c : p.coeffs()) arr.push_back(to_json(c));
    return arr;
}

Poly poly_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected polynomial as coefficient array");
    std::vector<cplx> c;
    c.reserve(j.size());
    for (const auto& e : j) c.push_back(cplx_from_json(e));
    return Poly(std::move(c));
}

json to_json(const RationalFn& f) { return json{{"num", to_json(f.num)}, {"den", to_json(f.den)}}; }

json to_json(const RationalMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(to_json(m.at(r, c)));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const CartanData& cd) {
    json m = json::array();
    for (int i = 1; i <= cd.rank; ++i) {
        json row = json::array();
        for (int j = 1; j <= cd.rank; ++j) row.push_back(cd.aij(i, j));
        m.push_back(row);
    }
    return json{{"lie_type", to_string(cd.lie_type)},
                {"rank", cd.rank},
                {"ordering", cd.ordering},
                {"cartan_matrix", m}};
}

CartanData cartan_from_json(const json& j) {
    if (!j.is_object() || !j.contains("lie_type") || !j.contains("rank"))
        throw std::invalid_argument("cartan: need lie_type and rank");
    CartanData cd = cartan_matrix(lie_type_from_string(j.at("lie_type").get<std::string>()),
                                  j.at("rank").get<int>());
    if (j.contains("ordering")) {
        cd.ordering = j.at("ordering").get<std::vector<int>>();
        cd.validate();
    }
    return cd;
}

json instance_to_json(const QQInstance& inst) {
    json lambdas = json::array();
    for (const Poly& lam : inst.lambdas) lambdas.push_back(to_json(lam));
    json zetas = json::array();
    for (const cplx& z : inst.twist.zetas) zetas.push_back(to_json(z));
    return json{{"schema", kSchemaTag},
                {"cartan", to_json(inst.cartan)},
                {"q", to_json(inst.q)},
                {"lambdas", lambdas},
                {"zetas", zetas},
                {"twist_window", inst.twist_window}};
}

QQInstance instance_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("instance: expected object");
    QQInstance inst;
    inst.cartan = cartan_from_json(j.at("cartan"));
    // ordering may also be supplied at top level (overrides cartan block)
    if (j.contains("ordering")) {
        inst.cartan.ordering = j.at("ordering").get<std::vector<int>>();
        inst.cartan.validate();
    }
    inst.q = cplx_from_json(j.at("q"));
    for (const auto& e : j.at("lambdas")) inst.lambdas.push_back(poly_from_json(e));
    for (const auto& e : j.at("zetas")) inst.twist.zetas.push_back(cplx_from_json(e));
    if (j.contains("twist_window")) inst.twist_window = j.at("twist_window").get<int>();
    inst.validate();
    return inst;
}

json solution_to_json(const QQSolution& sol) {
    json qp = json::array(), qm = json::array();
    for (const Poly& p : sol.q_plus) qp.push_back(to_json(p));
    for (const Poly& p : sol.q_minus) qm.push_back(to_json(p));
    return json{{"schema", kSchemaTag}, {"q_plus", qp}, {"q_minus", qm}};
}

QQSolution solution_from_json(const json& j) {
    if (!j.is_object() || !j.contains("q_plus"))
        throw std::invalid_argument("solution: expected object with q_plus");
    QQSolution sol;
    for (const auto& e : j.at("q_plus")) sol.q_plus.push_back(poly_from_json(e));
    if (j.contains("q_minus"))
        for (const auto& e : j.at("q_minus")) sol.q_minus.push_back(poly_from_json(e));
    return sol;
}

json nondeg_to_json(const NondegReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries) {
        json je{{"kind", e.kind}, {"pass", e.pass}};
        if (e.i) je["i"] = e.i;
        if (e.j) je["j"] = e.j;
        if (e.k) je["k"] = e.k;
        if (!e.pass) {
            je["detail"] = e.detail;
            je["witness_u"] = to_json(e.witness_u);
            je["witness_v"] = to_json(e.witness_v);
            je["witness_n"] = e.witness_n;
        }
        entries.push_back(je);
    }
    return json{{"pass", rep.pass}, {"entries", entries}};
}

json sample_report_to_json(const SampleReport& rep) {
    json j{{"pass", rep.pass}, {"samples", rep.samples}, {"max_rel_err", rep.max_rel_err}};
    if (!rep.detail.empty()) j["detail"] = rep.detail;
    return j;
}

json step_to_json(const BacklundStep& step) {
    return json{{"node", step.node},
                {"mu", to_json(step.mu)},
                {"monic_scale", to_json(step.monic_scale)},
                {"pre_twist", [&] {
                     json z = json::array();
                     for (const cplx& v : step.pre_twist.zetas) z.push_back(to_json(v));
                     return z;
                 }()},
                {"post_twist", [&] {
                     json z = json::array();
                     for (const cplx& v : step.post_twist.zetas) z.push_back(to_json(v));
                     return z;
                 }()},
                {"post_solution", solution_to_json(step.post_solution)},
                {"hypotheses", nondeg_to_json(step.nondeg)}};
}

json chain_to_json(const BacklundChain& chain) {
    json steps = json::array();
    for (const auto& s : chain.steps) steps.push_back(step_to_json(s));
    json j{{"schema", kSchemaTag}, {"word", chain.word}, {"steps", steps}};
    if (chain.has_bminus) {
        j["b_minus"] = to_json(chain.b_minus);
        j["hw_check"] = sample_report_to_json(chain.hw_check);
    }
    return j;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void require_schema(const json& j) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema") != kSchemaTag)
        throw std::invalid_argument("missing or unsupported schema tag (want \"qoper/1\")");
}

}  // namespace qoper
