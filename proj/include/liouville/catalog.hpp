#ifndef LIOUVILLE_CATALOG_HPP
#define LIOUVILLE_CATALOG_HPP

#include <functional>
#include <string>
#include <vector>

#include "liouville/lift.hpp"
#include "liouville/systems.hpp"

namespace liouville {

class CatalogError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A built-in model with its expected verification outcome.
struct CatalogEntry {
    std::string id;      // e.g. "tw_model(2,2.5)"
    std::string note;    // what the model is
    IntegrableSystem system;
    VerifyOptions expected;  // tolerances the entry is promised to meet
    /// Points where the integrals fail to be independent; empty when the
    /// system is regular everywhere.
    std::function<bool(const std::vector<double>&)> singularSet;
    std::string singularSetDescription;
    std::vector<std::string> warnings;
};

/// Constructors, one per id.
CatalogEntry canModel(int n);
CatalogEntry twModel(int n, double c);
CatalogEntry bDarboux(int n);
CatalogEntry oscillatorB();
CatalogEntry hyperbolic(double c);
CatalogEntry focusFocus(double c);
CatalogEntry affine(int k, int n, const LiftKind& kind);
CatalogEntry poissonProduct(int r, int s);

/// ids with one-line descriptions, for the CLI listing.
std::vector<std::pair<std::string, std::string>> catalogIndex();

/// Parses "id(p1,p2,...)" — e.g. "tw_model(2,2.5)", "affine(1,2,canonical)",
/// "oscillator_b" — and constructs the entry.
CatalogEntry catalogGet(const std::string& spec);

}  // namespace liouville

#endif
