#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "scde/threshold.hpp"

namespace scde {

struct QuantParams {
    double delta = 0.005;
    double l_max = 30.0;
};

struct OracleLimits {
    std::int64_t max_iter = 4000;
    double eps_conv = 1e-6;   // converged when mass at +inf >= 1 - eps_conv
    int stall_window = 50;
    double eps_stall = 1e-10;  // on error-probability improvement
};

// Discretized LLR density: uniform grid l_i = (i - half)*delta over
// [-l_max, +l_max] plus explicit mass points at +/- infinity.
class QuantizedDensity {
public:
    QuantizedDensity(QuantParams params);

    const QuantParams& params() const { return params_; }
    int half() const { return half_; }
    int size() const { return 2 * half_ + 1; }
    double grid(int i) const { return (i - half_) * params_.delta; }

    std::vector<double>& mass() { return mass_; }
    const std::vector<double>& mass() const { return mass_; }
    double& mass_pos_inf() { return pinf_; }
    double& mass_neg_inf() { return minf_; }
    double mass_pos_inf() const { return pinf_; }
    double mass_neg_inf() const { return minf_; }

    double total_mass() const;
    // Moments over the finite grid only (the infinite bins carry no moment).
    double mean() const;
    double variance() const;
    double error_probability() const;
    // 1 - E[log2(1 + e^{-l})]; the -inf bin is counted at -l_max to keep the
    // functional finite.
    double mutual_information() const;
    // Total deviation from the symmetry condition f(-l) = e^{-l} f(l),
    // summed over the finite grid; zero for exactly consistent densities.
    double consistency_error() const;

    // Deposit mass at LLR value l, split linearly between neighboring bins;
    // values beyond +/- l_max fold into the boundary bins.
    void deposit(double l, double m);

    void dump_csv(std::ostream& os) const;

private:
    QuantParams params_;
    int half_;
    std::vector<double> mass_;
    double pinf_ = 0.0;
    double minf_ = 0.0;
};

QuantizedDensity channel_density(double sigma_n, QuantParams params);

// Output of a degree-d_v variable node: channel plus (d_v - 1)-fold
// self-convolution of `incoming`. Overflow folds into the +/- infinity bins.
QuantizedDensity vn_update(const QuantizedDensity& channel,
                           const QuantizedDensity& incoming, int dv);

// Output of a degree-d_c check node: (d_c - 1)-fold box-plus of `incoming`
// with itself, computed by convolution in the -ln tanh(|l|/2) domain.
QuantizedDensity cn_update(const QuantizedDensity& incoming, int dc);

enum class OracleStatus { converged, stalled, iteration_limit };

struct OracleOutcome {
    OracleStatus status;
    std::int64_t iterations;
    double final_error_probability;
};

OracleOutcome run_oracle_de(int dv, int dc, double sigma_n, QuantParams params,
                            const OracleLimits& limits);

ThresholdResult oracle_threshold(int dv, int dc, const SearchParams& search,
                                 QuantParams params = {},
                                 const OracleLimits& limits = {});

}  // namespace scde
