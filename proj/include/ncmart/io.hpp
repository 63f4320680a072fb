#pragma once

// JSON and CSV serialization of operators, filtrations and reports.
//
// Operator: {"dim": d, "trace": "normalized"|"unnormalized",
//            "entries": [[re, im], ...]}  (row-major, d*d pairs)
// Filtration: {"type": "pinching"|"diagonal", "partitions": [[[1,2],[3,4]], ...]}
//             (1-based indices) or {"type": "tensor", "dims": [2,2,3]}

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ncmart/harness.hpp"

namespace ncmart {

using Json = nlohmann::ordered_json;

Json operator_to_json(const Operator& x);
// StructuralError on malformed input.
Operator operator_from_json(const Json& j);

Json filtration_to_json(const Filtration& f);
Filtration filtration_from_json(const Json& j);

Json norm_report_to_json(const NormReport& r);
Json suite_to_json(const SuiteResult& s);
Json constants_to_json(const ConstantsReport& r);
Json khintchine_to_json(const KhintchineReport& r);

// header p,ratio_name,max,mean,exact,trials,seed
void write_constants_csv(std::ostream& os, const ConstantsReport& r);
// One row per martingale and p with every norm and the exactness flags.
void write_norms_csv(std::ostream& os, const ConstantsReport& r);
// suite,check,observed,threshold,pass,gating,worst_trial,worst_seed,samples
void write_suite_csv(std::ostream& os, const SuiteResult& s);

// Round-trip safe decimal formatting used by every writer.
std::string format_double(double v);

const char* kind_name(FiltrationKind k);
FiltrationKind kind_from_name(const std::string& name);

}  // namespace ncmart
