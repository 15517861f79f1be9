#include "scde/scalar_functions.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "scde/quadrature.hpp"

namespace scde {

namespace {

// log2(1 + e^-f), stable for large |f|
double softplus2(double f) {
    const double a = std::fabs(f);
    const double base = f < 0.0 ? -f : 0.0;
    return (base + std::log1p(std::exp(-a))) / std::numbers::ln2;
}

// 1 - tanh(f/2), stable for large |f|
double one_minus_tanh_half(double f) {
    if (f >= 0.0) {
        const double e = std::exp(-f);
        return 2.0 * e / (1.0 + e);
    }
    return 2.0 / (1.0 + std::exp(f));
}

// E[h(F)] with F ~ N(m, 2m). For large m the integrand concentrates in a
// boundary layer near t = 0 (scale e^{-m/4}) far from the Gaussian peak, so
// a single adaptive pass over m +/- 10 sqrt(2m) never samples it. Integrate
// over explicit segments covering both regions, with the tolerance set
// relative to a coarse composite scan.
template <typename H>
double gauss_expectation(double m, const H& h) {
    const double s = std::sqrt(2.0 * m);
    const double a0 = m - 10.0 * s;
    const double b0 = m + 10.0 * s;
    const double pref = 1.0 / std::sqrt(4.0 * std::numbers::pi * m);
    auto f = [&](double t) {
        const double d = t - m;
        return pref * std::exp(-d * d / (4.0 * m)) * h(t);
    };

    std::vector<double> bp;
    if (a0 > -60.0) {
        constexpr int n_ext = 64;
        for (int i = 0; i < n_ext; ++i) {
            bp.push_back(-60.0 + (a0 + 60.0) * i / n_ext);
        }
    }
    constexpr int n_peak = 192;
    for (int i = 0; i <= n_peak; ++i) {
        bp.push_back(a0 + (b0 - a0) * i / n_peak);
    }

    double est = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double w = bp[i + 1] - bp[i];
        est += w / 6.0 * (f(bp[i]) + 4.0 * f(bp[i] + 0.5 * w) + f(bp[i + 1]));
    }
    const double tol = std::max(est, 1e-300) * 1e-11 / static_cast<double>(bp.size());

    double val = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        val += adaptive_simpson(f, bp[i], bp[i + 1], tol, 36);
    }
    return val;
}

}  // namespace

namespace direct {

double j_deficit(double m) {
    if (m < 0.0) throw std::domain_error("j_deficit: negative mean");
    if (m == 0.0) return 1.0;
    return gauss_expectation(m, softplus2);
}

double phi(double u) {
    if (u < 0.0) throw std::domain_error("phi: negative input");
    if (u == 0.0) return 1.0;
    return gauss_expectation(u, one_minus_tanh_half);
}

}  // namespace direct

namespace {

FnTable build_table(const char* name, double (*fn)(double)) {
    const char* dir = std::getenv("COUPLED_DE_TABLE_DIR");
    FnTable t;
    std::string path;
    if (dir != nullptr && *dir != '\0') {
        path = std::string(dir) + "/" + name + ".tab";
        if (t.load(path, kTableUMin, kTableUMax, kTableKnots, kTableAccuracy)) return t;
    }
    t = FnTable(fn, kTableUMin, kTableUMax, kTableKnots, kTableAccuracy);
    if (!path.empty()) t.save(path);
    return t;
}

double cf_deficit_direct(double u) { return direct::cf_deficit(u); }

}  // namespace

const ScalarTables& tables() {
    static const ScalarTables t{
        build_table("cf_deficit", &cf_deficit_direct),
        build_table("j_deficit", &direct::j_deficit),
        build_table("phi", &direct::phi),
    };
    return t;
}

double cf_deficit(double u) {
    if (u < 0.0) throw std::domain_error("cf: negative SNR");
    const auto& t = tables().cf_def;
    if (u < kTableUMin) {
        const double mi_at_min = 1.0 - t.front();
        return 1.0 - mi_at_min * (u / kTableUMin);
    }
    return t.eval(u);
}

double j_deficit(double u) {
    if (u < 0.0) throw std::domain_error("j_fun: negative mean");
    const auto& t = tables().j_def;
    if (u < kTableUMin) {
        const double mi_at_min = 1.0 - t.front();
        return 1.0 - mi_at_min * (u / kTableUMin);
    }
    return t.eval(u);
}

namespace {

ExtScalar inv_deficit(const FnTable& t, double d) {
    if (d < 0.0 || d > 1.0) throw std::domain_error("inverse: argument outside [0,1]");
    if (d == 0.0) return ExtScalar::perfect();
    if (d <= t.back()) return ExtScalar(t.u_max());
    if (d >= t.front()) {
        const double mi_at_min = 1.0 - t.front();
        return ExtScalar(kTableUMin * (1.0 - d) / mi_at_min);
    }
    return ExtScalar(t.invert(d));
}

}  // namespace

ExtScalar cf_inv_deficit(double d) { return inv_deficit(tables().cf_def, d); }
ExtScalar j_inv_deficit(double d) { return inv_deficit(tables().j_def, d); }

double cf(ExtScalar snr) {
    if (snr.is_perfect()) return 1.0;
    return 1.0 - cf_deficit(snr.value());
}

ExtScalar cf_inv(double mi) {
    if (mi < 0.0 || mi > 1.0) throw std::domain_error("cf_inv: argument outside [0,1]");
    if (mi == 0.0) return ExtScalar(0.0);
    return cf_inv_deficit(1.0 - mi);
}

ExtScalar reciprocal_snr(ExtScalar z) {
    if (z.is_perfect()) return ExtScalar(0.0);
    if (z.value() < 0.0) throw std::domain_error("reciprocal_snr: negative SNR");
    if (z.value() == 0.0) return ExtScalar::perfect();
    // The complement swaps the deficit and the mutual information. Stay in
    // whichever of the two is small: forming 1 - d in a double and handing
    // it back through the tables destroys the relative accuracy of tiny
    // deficits (the complement of z = 75 would round to a zero SNR).
    const auto& t = tables().cf_def;
    const double mi_at_min = 1.0 - t.front();
    const double zv = z.value();
    if (zv < kTableUMin) {
        // MI is linear below the table; the partner's deficit equals it
        return cf_inv_deficit(mi_at_min * (zv / kTableUMin));
    }
    const double d = cf_deficit(zv);
    if (d <= mi_at_min) {
        // partner lands below the table; invert the same linear MI model
        return ExtScalar(kTableUMin * (d / mi_at_min));
    }
    return cf_inv_deficit(1.0 - d);
}

double phi(ExtScalar u) {
    if (u.is_perfect()) return 0.0;
    const double v = u.value();
    if (v < 0.0) throw std::domain_error("phi: negative input");
    if (v < kTableUMin) return 1.0;  // small-u limit
    return tables().phi.eval(v);
}

ExtScalar phi_inv(double v) {
    if (v < 0.0 || v > 1.0) throw std::domain_error("phi_inv: argument outside [0,1]");
    const auto& t = tables().phi;
    if (v == 0.0) return ExtScalar::perfect();
    if (v <= t.back()) return ExtScalar(t.u_max());
    if (v >= t.front()) {
        // linear ramp down to phi(0) = 1 below the table
        return ExtScalar(kTableUMin * (1.0 - v) / (1.0 - t.front()));
    }
    return ExtScalar(t.invert(v));
}

double j_fun(ExtScalar u) {
    if (u.is_perfect()) return 1.0;
    return 1.0 - j_deficit(u.value());
}

ExtScalar j_inv(double mi) {
    if (mi < 0.0 || mi > 1.0) throw std::domain_error("j_inv: argument outside [0,1]");
    if (mi == 0.0) return ExtScalar(0.0);
    return j_inv_deficit(1.0 - mi);
}

ExtScalar promote_if_saturated_snr(ExtScalar x) {
    if (x.is_perfect()) return x;
    if (cf_deficit(x.value()) < kPerfectMiDeficit) return ExtScalar::perfect();
    return x;
}

ExtScalar promote_if_saturated_llr(ExtScalar x) {
    if (x.is_perfect()) return x;
    if (j_deficit(x.value()) < kPerfectMiDeficit) return ExtScalar::perfect();
    return x;
}

void dump_table_csv(const char* name, std::ostream& os) {
    const std::string n(name);
    const FnTable* t = nullptr;
    bool as_mi = false;
    if (n == "cf") {
        t = &tables().cf_def;
        as_mi = true;
    } else if (n == "j") {
        t = &tables().j_def;
        as_mi = true;
    } else if (n == "phi") {
        t = &tables().phi;
    } else {
        throw std::invalid_argument("dump_table_csv: unknown table " + n);
    }
    os.precision(17);
    for (std::size_t i = 0; i < t->size(); ++i) {
        const double v = t->knot_value(i);
        os << t->knot(i) << "," << (as_mi ? 1.0 - v : v) << "\n";
    }
}

}  // namespace scde
