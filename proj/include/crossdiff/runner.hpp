#pragma once

#include <iosfwd>

#include "crossdiff/config.hpp"
#include "crossdiff/structure.hpp"

namespace crossdiff {

// Exit-code contract: 0 ok, 1 program error, 2 structure failure,
// 3 diagnostic violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotCertified = 2;
inline constexpr int kExitDiagnosticViolation = 3;

json certificate_to_json(const StructureCertificate& cert);

int run_simulate(const RunConfig& cfg, const std::string& out_dir,
                 std::ostream& log, std::ostream& err);
int run_audit(const RunConfig& cfg, const std::string& out_dir,
              std::ostream& log, std::ostream& err);
int run_converge(const RunConfig& cfg, int levels, const std::string& out_dir,
                 std::ostream& log, std::ostream& err);
int run_invert(const RunConfig& cfg, const Vec& W, std::ostream& log,
               std::ostream& err);

}  // namespace crossdiff
