#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scde/engines.hpp"
#include "scde/ensemble.hpp"

namespace scde {

struct SearchParams {
    double sigma_min = 0.4;
    double sigma_max = 1.6;
    double precision = 1e-4;
};

struct ThresholdResult {
    double sigma_star = 0.0;   // the certified-converging end of the bracket
    double bracket_lo = 0.0;   // run_de converges here
    double bracket_hi = 0.0;   // run_de does not converge here
    double precision = 0.0;    // bracket width at termination
    std::string engine;
    int dv = 0, dc = 0, gamma = 0, chain_len = 0;
    double design_rate = 0.0;
    int iterations_at_lo = 0;
};

// Thrown when the threshold lies outside the search range.
class ThresholdRangeError : public std::runtime_error {
public:
    enum class Kind { above_range, below_range };
    ThresholdRangeError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

// Bisection for the BP threshold sigma*_n of the given engine. Requires
// convergence at sigma_min and failure at sigma_max.
ThresholdResult find_threshold(const Engine& engine, const SearchParams& search,
                               const DeLimits& limits);

// Convenience wrapper that also stamps the ensemble parameters and rate.
ThresholdResult find_threshold(EngineId id, const EnsembleSpec& spec, const SearchParams& search,
                               const DeLimits& limits);

struct SweepCell {
    EnsembleSpec spec;
    EngineId engine = EngineId::ga_avg;
    std::optional<ThresholdResult> result;
    std::string error;  // non-empty when the cell failed
};

// One row per (spec, engine), spec-major order. Per-cell errors are recorded
// in-row and the sweep continues. jobs <= 0 uses the hardware concurrency.
std::vector<SweepCell> sweep(const std::vector<EnsembleSpec>& specs,
                             const std::vector<EngineId>& engines, const SearchParams& search,
                             const DeLimits& limits, int jobs = 0);

}  // namespace scde
