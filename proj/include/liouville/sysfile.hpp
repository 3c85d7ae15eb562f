#ifndef LIOUVILLE_SYSFILE_HPP
#define LIOUVILLE_SYSFILE_HPP

#include <string>

#include "liouville/actionangle.hpp"
#include "liouville/systems.hpp"

namespace liouville {

/// Parse failure in a system-definition file; message carries origin:line.
class SysFileError : public std::runtime_error {
public:
    SysFileError(const std::string& origin, int line, const std::string& msg)
        : std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// One system definition plus optional verification overrides.
///
/// Format: INI-style sections.
///   [system]
///     name = ...
///     coordinates = theta:angle, x:real, ...
///     fibers = a, y, ...            (optional; defaults to p_<base>)
///     transverse = z1, ...          (optional)
///     structure = canonical | twisted_b | canonical_b | custom
///     c = 2.5                       (twisted_b)
///     singular = a                  (twisted_b: fiber; canonical_b: base)
///     pi_i_j = <expr>               (custom; 1-based full-coordinate indices)
///   [integrals]
///     <name> = <expr>               (log(abs(s)) terms promoted to b-functions)
///   [verify]                        (optional overrides)
///     samples, seed, box, tol_jacobi, tol_involutivity, min_independence
struct SystemFile {
    IntegrableSystem system;
    VerifyOptions verify;
    bool hasVerifySection = false;
};

SystemFile parseSystemFile(const std::string& text, const std::string& origin);
SystemFile loadSystemFile(const std::string& path);

/// Inverse of parseSystemFile on the data model.
std::string serializeSystemFile(const IntegrableSystem& sys, const VerifyOptions* verify = nullptr);

/// JSON renderings (stable key order) for the CLI.
std::string reportToJson(const VerificationReport& rep, const IntegrableSystem& sys);
std::string actionReportToJson(const ActionReport& rep, const PeriodLattice& lattice);

}  // namespace liouville

#endif
