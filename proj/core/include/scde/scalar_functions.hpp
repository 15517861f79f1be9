#pragma once

#include <iosfwd>

#include "scde/ext_scalar.hpp"
#include "scde/fn_table.hpp"

namespace scde {

// Mutual-information deficit at which a message is considered saturated and
// promoted to PERFECT; keeps the reciprocal map and phi/J inversions away
// from their singular ends.
inline constexpr double kPerfectMiDeficit = 1e-9;

// Table parameters shared by all three transcendental functions.
inline constexpr double kTableUMin = 1e-6;
inline constexpr double kTableUMax = 100.0;
inline constexpr int kTableKnots = 4096;
inline constexpr double kTableAccuracy = 1e-8;

// Direct quadrature evaluations. Slow; ground truth for the tables.
namespace direct {
// 1 - J(m): complementary mutual information of a consistent Gaussian LLR
// with mean m (variance 2m).
double j_deficit(double m);
// Chung's check-node statistic E[1 - tanh(L/2)], L ~ N(u, 2u).
double phi(double u);
// 1 - C_f(u): complementary BIAWGN mutual information at SNR u.
inline double cf_deficit(double u) { return j_deficit(2.0 * u); }
}  // namespace direct

// Immutable memoization tables; built once, shareable across threads.
struct ScalarTables {
    FnTable cf_def;  // decreasing: 1 - C_f(u)
    FnTable j_def;   // decreasing: 1 - J(u)
    FnTable phi;     // decreasing
};
const ScalarTables& tables();

// Deficit-domain primitives. These avoid the catastrophic cancellation of
// mutual informations near 1 and are what the DE engines accumulate.
double cf_deficit(double u);            // finite u >= 0
double j_deficit(double u);             // finite u >= 0
ExtScalar cf_inv_deficit(double d);     // u with cf_deficit(u) = d, d in [0,1]
ExtScalar j_inv_deficit(double d);      // u with j_deficit(u) = d

// Mutual information of a BIAWGN channel at SNR snr.
double cf(ExtScalar snr);
ExtScalar cf_inv(double mi);

// Reciprocal SNR: C_f(z) + C_f(reciprocal_snr(z)) = 1.
ExtScalar reciprocal_snr(ExtScalar z);

double phi(ExtScalar u);
ExtScalar phi_inv(double v);

// Mutual information of a consistent Gaussian LLR with mean u.
double j_fun(ExtScalar u);
ExtScalar j_inv(double mi);

// Saturation promotion (see kPerfectMiDeficit). SNR flavour for RCA
// messages, LLR flavour for GA messages.
ExtScalar promote_if_saturated_snr(ExtScalar x);
ExtScalar promote_if_saturated_llr(ExtScalar x);

// Diagnostic CSV dump of one of the tables ("cf", "j", "phi"): rows of
// "abscissa,value" where value is the mutual information (cf, j) or phi.
void dump_table_csv(const char* name, std::ostream& os);

}  // namespace scde
