#pragma once

#include <functional>
#include <string>
#include <vector>

namespace scde {

// Memoization table for a strictly monotone function on [u_min, u_max].
// Knots are log-spaced; evaluation uses monotone cubic Hermite interpolation
// (Fritsch-Carlson slopes), so the interpolant inherits strict monotonicity
// and the inverse is well-posed.
class FnTable {
public:
    FnTable() = default;

    // Samples fn at n log-spaced knots. fn must be strictly monotone on
    // [u_min, u_max]. accuracy is the documented interpolation error bound.
    FnTable(const std::function<double(double)>& fn, double u_min, double u_max, int n,
            double accuracy);

    double u_min() const { return u_[0]; }
    double u_max() const { return u_.back(); }
    double front() const { return v_[0]; }
    double back() const { return v_.back(); }
    bool increasing() const { return increasing_; }
    double accuracy() const { return accuracy_; }
    std::size_t size() const { return u_.size(); }
    double knot(std::size_t i) const { return u_[i]; }
    double knot_value(std::size_t i) const { return v_[i]; }

    // Interpolated value; u clamped to [u_min, u_max].
    double eval(double u) const;

    // Inverse of eval; v clamped to the value range. Bisection over the
    // segment followed by refinement to 1e-10 relative.
    double invert(double v) const;

    // Two-column CSV dump (abscissa, value).
    void dump_csv(std::ostream& os) const;

    // Binary cache round-trip. load returns false on mismatch or read error.
    void save(const std::string& path) const;
    bool load(const std::string& path, double u_min, double u_max, int n, double accuracy);

private:
    void build_slopes();
    std::size_t locate(double u) const;
    double eval_segment(std::size_t i, double u) const;

    std::vector<double> u_, v_, d_;  // knots, values, Hermite slopes
    double accuracy_ = 0.0;
    double log_umin_ = 0.0, inv_dlog_ = 0.0;
    bool increasing_ = true;
};

}  // namespace scde
