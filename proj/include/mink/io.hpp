#pragma once

#include "mink/kernel.hpp"
#include "mink/solver.hpp"
#include "mink/verify.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace mink {

using ojson = nlohmann::ordered_json;

// Non-finite doubles become the strings "nan", "inf", "-inf" and set `nonfinite`.
struct JsonNumbers {
    bool nonfinite = false;
    ojson operator()(double v);
    ojson vec(const Vec& v);
};

std::string fmt17(double v);

ojson identity_json(const std::vector<IdentityResult>& results, const IdentityConfig& cfg, JsonNumbers& num);
ojson psd_json(const PsdReport& r, JsonNumbers& num);
ojson inequality_json(const InequalityReport& r, JsonNumbers& num);
ojson solve_log_json(const SolveResult& s, JsonNumbers& num);
ojson report_json(const CurvatureReport& r, JsonNumbers& num, bool with_points = false);
ojson stability_json(const Stability& s, JsonNumbers& num);

// Columns i,j[,k],xi1..xin,ustar over masked nodes.
void write_field_csv(const MaskedGridField& f, std::ostream& os);
void write_json_file(const std::string& path, const ojson& j);

}  // namespace mink
