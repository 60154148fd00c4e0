#ifndef QOPER_JSON_IO_HPP
#define QOPER_JSON_IO_HPP

#include <nlohmann/json_fwd.hpp>

#include <string>

#include "qoper/backlund.hpp"
#include "qoper/bethe.hpp"

namespace qoper {

// Schema "qoper/1".  Complex numbers are [re, im]; polynomials are
// arrays of coefficient pairs in ascending powers.
inline constexpr const char* kSchemaTag = "qoper/1";

nlohmann::json to_json(cplx v);
cplx cplx_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Poly& p);
Poly poly_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RationalFn& f);
nlohmann::json to_json(const RationalMatrix& m);

nlohmann::json to_json(const CartanData& cd);
CartanData cartan_from_json(const nlohmann::json& j);

nlohmann::json instance_to_json(const QQInstance& inst);
QQInstance instance_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const QQSolution& sol);
QQSolution solution_from_json(const nlohmann::json& j);

nlohmann::json step_to_json(const BacklundStep& step);
nlohmann::json chain_to_json(const BacklundChain& chain);
nlohmann::json nondeg_to_json(const NondegReport& rep);
nlohmann::json sample_report_to_json(const SampleReport& rep);

// files: a "bundle" holds {"schema", "instance", "solution"?}
nlohmann::json load_json_file(const std::string& path);
void require_schema(const nlohmann::json& j);

}  // namespace qoper

#endif
