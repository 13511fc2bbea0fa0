#pragma once

#include <iosfwd>

#include <json.hpp>

#include "nfet/config.hpp"
#include "nfet/harness.hpp"

namespace nfet::io {

/// Row-major matrix with real and imaginary parts interleaved:
/// {"rows": n, "cols": m, "data": [re00, im00, re01, im01, ...]}.
nlohmann::json matrix_json(const CMat& m);
CMat matrix_from_json(const nlohmann::json& j);

/// Self-describing solution document: scenario hash and canonical config,
/// method, status, covariances, beams, CRB, verification checks, diagnostics.
nlohmann::json solution_json(const config::Scenario& scenario, harness::Method method, const harness::DesignRun& run);

void write_solution(std::ostream& os, const config::Scenario& scenario, harness::Method method,
                    const harness::DesignRun& run);

}  // namespace nfet::io
