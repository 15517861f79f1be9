#include "scde/fn_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace scde {

FnTable::FnTable(const std::function<double(double)>& fn, double u_min, double u_max, int n,
                 double accuracy)
    : accuracy_(accuracy) {
    if (!(u_min > 0.0) || !(u_max > u_min) || n < 4) {
        throw std::invalid_argument("FnTable: bad grid parameters");
    }
    u_.resize(n);
    v_.resize(n);
    const double l0 = std::log(u_min);
    const double l1 = std::log(u_max);
    const double dl = (l1 - l0) / (n - 1);
    for (int i = 0; i < n; ++i) {
        u_[i] = (i == 0) ? u_min : (i == n - 1 ? u_max : std::exp(l0 + i * dl));
        v_[i] = fn(u_[i]);
    }
    increasing_ = v_.back() > v_.front();
    for (int i = 1; i < n; ++i) {
        const bool ok = increasing_ ? v_[i] > v_[i - 1] : v_[i] < v_[i - 1];
        if (!ok) throw std::runtime_error("FnTable: sampled function is not strictly monotone");
    }
    log_umin_ = l0;
    inv_dlog_ = 1.0 / dl;
    build_slopes();
}

void FnTable::build_slopes() {
    const std::size_t n = u_.size();
    std::vector<double> sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (v_[i + 1] - v_[i]) / (u_[i + 1] - u_[i]);
    d_.assign(n, 0.0);
    d_[0] = sec[0];
    d_[n - 1] = sec[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (sec[i - 1] * sec[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            // harmonic mean keeps the interpolant monotone (Fritsch-Carlson)
            const double w1 = 2.0 * (u_[i + 1] - u_[i]) + (u_[i] - u_[i - 1]);
            const double w2 = (u_[i + 1] - u_[i]) + 2.0 * (u_[i] - u_[i - 1]);
            d_[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
        }
    }
    // endpoint clamp to three times the adjacent secant
    auto clamp_end = [](double& d, double s) {
        if (d * s <= 0.0) d = 0.0;
        else if (std::fabs(d) > 3.0 * std::fabs(s)) d = 3.0 * s;
    };
    clamp_end(d_[0], sec[0]);
    clamp_end(d_[n - 1], sec[n - 2]);
}

std::size_t FnTable::locate(double u) const {
    const std::size_t n = u_.size();
    double fi = (std::log(u) - log_umin_) * inv_dlog_;
    auto i = static_cast<std::ptrdiff_t>(fi);
    if (i < 0) i = 0;
    if (i > static_cast<std::ptrdiff_t>(n) - 2) i = static_cast<std::ptrdiff_t>(n) - 2;
    // guard against log round-off at segment boundaries
    while (i > 0 && u < u_[i]) --i;
    while (i + 2 < static_cast<std::ptrdiff_t>(n) && u >= u_[i + 1]) ++i;
    return static_cast<std::size_t>(i);
}

double FnTable::eval_segment(std::size_t i, double u) const {
    const double h = u_[i + 1] - u_[i];
    const double t = (u - u_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * v_[i] + h10 * h * d_[i] + h01 * v_[i + 1] + h11 * h * d_[i + 1];
}

double FnTable::eval(double u) const {
    if (u <= u_[0]) return v_[0];
    if (u >= u_.back()) return v_.back();
    return eval_segment(locate(u), u);
}

double FnTable::invert(double v) const {
    const double lo_v = increasing_ ? v_.front() : v_.back();
    const double hi_v = increasing_ ? v_.back() : v_.front();
    if (v <= lo_v) return increasing_ ? u_.front() : u_.back();
    if (v >= hi_v) return increasing_ ? u_.back() : u_.front();

    // bisect over knots
    std::size_t lo = 0, hi = u_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool below = increasing_ ? (v_[mid] <= v) : (v_[mid] >= v);
        if (below) lo = mid; else hi = mid;
    }
    // bisect the cubic inside the segment, then it is already ~1e-16 of the
    // segment width; iterate until 1e-10 relative
    double a = u_[lo], b = u_[hi];
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = eval_segment(lo, m);
        const bool below = increasing_ ? (fm < v) : (fm > v);
        if (below) a = m; else b = m;
        if (b - a <= 1e-10 * std::max(std::fabs(a), 1e-300)) break;
    }
    return 0.5 * (a + b);
}

void FnTable::dump_csv(std::ostream& os) const {
    os.precision(17);
    for (std::size_t i = 0; i < u_.size(); ++i) os << u_[i] << "," << v_[i] << "\n";
}

namespace {
constexpr std::uint64_t kMagic = 0x5343444554414231ull;  // "SCDETAB1"
}

void FnTable::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) return;
    const std::uint64_t n = u_.size();
    const double umin = u_.front(), umax = u_.back();
    os.write(reinterpret_cast<const char*>(&kMagic), sizeof kMagic);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&umin), sizeof umin);
    os.write(reinterpret_cast<const char*>(&umax), sizeof umax);
    os.write(reinterpret_cast<const char*>(&accuracy_), sizeof accuracy_);
    os.write(reinterpret_cast<const char*>(v_.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

bool FnTable::load(const std::string& path, double u_min, double u_max, int n, double accuracy) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    std::uint64_t magic = 0, fn = 0;
    double fumin = 0, fumax = 0, facc = 0;
    is.read(reinterpret_cast<char*>(&magic), sizeof magic);
    is.read(reinterpret_cast<char*>(&fn), sizeof fn);
    is.read(reinterpret_cast<char*>(&fumin), sizeof fumin);
    is.read(reinterpret_cast<char*>(&fumax), sizeof fumax);
    is.read(reinterpret_cast<char*>(&facc), sizeof facc);
    if (!is || magic != kMagic || fn != static_cast<std::uint64_t>(n) || fumin != u_min ||
        fumax != u_max || facc != accuracy) {
        return false;
    }
    std::vector<double> vals(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!is) return false;

    u_.resize(static_cast<std::size_t>(n));
    const double l0 = std::log(u_min);
    const double dl = (std::log(u_max) - l0) / (n - 1);
    for (int i = 0; i < n; ++i) {
        u_[static_cast<std::size_t>(i)] = (i == 0) ? u_min : (i == n - 1 ? u_max : std::exp(l0 + i * dl));
    }
    v_ = std::move(vals);
    increasing_ = v_.back() > v_.front();
    for (std::size_t i = 1; i < v_.size(); ++i) {
        const bool ok = increasing_ ? v_[i] > v_[i - 1] : v_[i] < v_[i - 1];
        if (!ok) return false;
    }
    accuracy_ = accuracy;
    log_umin_ = l0;
    inv_dlog_ = 1.0 / dl;
    build_slopes();
    return true;
}

}  // namespace scde
