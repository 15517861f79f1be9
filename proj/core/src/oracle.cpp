#include "scde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fft.hpp"

namespace scde {

namespace {

double softplus2(double l) {
    if (l > 0.0) return std::log1p(std::exp(-l)) / std::numbers::ln2;
    return (std::log1p(std::exp(l)) - l) / std::numbers::ln2;
}

// The check-node magnitude transform g(l) = -ln tanh(l/2); an involution on
// (0, inf), so it also maps magnitudes back.
double g_transform(double l) { return -std::log(std::tanh(0.5 * l)); }

void deposit_grid(std::vector<double>& grid, double step, double pos, double m) {
    if (m <= 0.0) return;
    const double t = pos / step;
    const auto last = static_cast<double>(grid.size() - 1);
    if (t <= 0.0) {
        grid.front() += m;
        return;
    }
    if (t >= last) {
        grid.back() += m;
        return;
    }
    const auto j = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(j);
    grid[j] += m * (1.0 - frac);
    grid[j + 1] += m * frac;
}

std::complex<double> cpow_int(std::complex<double> base, int k) {
    std::complex<double> r(1.0, 0.0);
    for (int i = 0; i < k; ++i) r *= base;
    return r;
}

}  // namespace

QuantizedDensity::QuantizedDensity(QuantParams params) : params_(params) {
    if (!(params_.delta > 0.0) || !(params_.l_max > 0.0)) {
        throw std::invalid_argument("QuantizedDensity: delta and l_max must be positive");
    }
    half_ = static_cast<int>(std::lround(params_.l_max / params_.delta));
    mass_.assign(static_cast<std::size_t>(2 * half_ + 1), 0.0);
}

double QuantizedDensity::total_mass() const {
    return std::accumulate(mass_.begin(), mass_.end(), 0.0) + pinf_ + minf_;
}

double QuantizedDensity::mean() const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += mass_[static_cast<std::size_t>(i)] * grid(i);
    return s;
}

double QuantizedDensity::variance() const {
    const double m = mean();
    double s = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double d = grid(i) - m;
        s += mass_[static_cast<std::size_t>(i)] * d * d;
    }
    return s;
}

double QuantizedDensity::error_probability() const {
    double s = minf_;
    for (int i = 0; i < half_; ++i) s += mass_[static_cast<std::size_t>(i)];
    s += 0.5 * mass_[static_cast<std::size_t>(half_)];
    return s;
}

double QuantizedDensity::mutual_information() const {
    double loss = minf_ * softplus2(-params_.l_max);
    for (int i = 0; i < size(); ++i) {
        const double m = mass_[static_cast<std::size_t>(i)];
        if (m > 0.0) loss += m * softplus2(grid(i));
    }
    return 1.0 - loss;
}

double QuantizedDensity::consistency_error() const {
    double acc = 0.0;
    for (int i = half_ + 1; i < size(); ++i) {
        const double l = grid(i);
        acc += std::fabs(mass_[static_cast<std::size_t>(2 * half_ - i)] -
                         std::exp(-l) * mass_[static_cast<std::size_t>(i)]);
    }
    return acc;
}

void QuantizedDensity::deposit(double l, double m) {
    deposit_grid(mass_, params_.delta, l + params_.l_max, m);
}

void QuantizedDensity::dump_csv(std::ostream& os) const {
    os << "llr,mass\n";
    os << "-inf," << minf_ << "\n";
    for (int i = 0; i < size(); ++i) {
        os << grid(i) << "," << mass_[static_cast<std::size_t>(i)] << "\n";
    }
    os << "+inf," << pinf_ << "\n";
}

QuantizedDensity channel_density(double sigma_n, QuantParams params) {
    if (!(sigma_n > 0.0)) throw std::invalid_argument("channel_density: sigma must be positive");
    QuantizedDensity out(params);
    const double mu = 2.0 / (sigma_n * sigma_n);
    const double sd = 2.0 / sigma_n;
    const int n = out.size();
    // Cumulative probability at the n + 1 bin edges; differencing keeps the
    // total telescoped to exactly 1.
    auto cdf = [&](double e) { return 0.5 * std::erfc((mu - e) / (sd * std::numbers::sqrt2)); };
    double prev = cdf(out.grid(0) - 0.5 * params.delta);
    out.mass_neg_inf() = prev;
    for (int i = 0; i < n; ++i) {
        const double cur = cdf(out.grid(i) + 0.5 * params.delta);
        out.mass()[static_cast<std::size_t>(i)] = std::max(cur - prev, 0.0);
        prev = cur;
    }
    out.mass_pos_inf() = std::max(1.0 - prev, 0.0);
    return out;
}

QuantizedDensity vn_update(const QuantizedDensity& channel, const QuantizedDensity& incoming,
                           int dv) {
    if (dv < 2) throw std::invalid_argument("vn_update: d_v must be >= 2");
    const int n = incoming.size();
    const int half = incoming.half();
    const std::size_t conv_len = static_cast<std::size_t>(dv) * static_cast<std::size_t>(n - 1) + 1;
    const std::size_t m = detail::next_pow2(conv_len);

    std::vector<std::complex<double>> fi(m), fc(m);
    for (int i = 0; i < n; ++i) {
        fi[static_cast<std::size_t>(i)] = incoming.mass()[static_cast<std::size_t>(i)];
        fc[static_cast<std::size_t>(i)] = channel.mass()[static_cast<std::size_t>(i)];
    }
    detail::fft(fi, false);
    detail::fft(fc, false);
    for (std::size_t i = 0; i < m; ++i) fi[i] = cpow_int(fi[i], dv - 1) * fc[i];
    detail::fft(fi, true);

    QuantizedDensity out(incoming.params());
    const std::size_t offset = static_cast<std::size_t>(dv - 1) * static_cast<std::size_t>(half);
    double under = 0.0, over = 0.0;
    for (std::size_t j = 0; j < conv_len; ++j) {
        const double v = std::max(fi[j].real(), 0.0);
        if (j < offset) {
            under += v;
        } else if (j >= offset + static_cast<std::size_t>(n)) {
            over += v;
        } else {
            out.mass()[j - offset] = v;
        }
    }

    const double ai = 1.0 - incoming.mass_pos_inf() - incoming.mass_neg_inf();
    const double ac = 1.0 - channel.mass_pos_inf() - channel.mass_neg_inf();
    const double no_inf = std::pow(ai, dv - 1) * ac;
    const double pout =
        std::max(std::pow(ai + incoming.mass_pos_inf(), dv - 1) * (ac + channel.mass_pos_inf()) -
                     no_inf,
                 0.0);
    const double mout =
        std::max(std::pow(ai + incoming.mass_neg_inf(), dv - 1) * (ac + channel.mass_neg_inf()) -
                     no_inf,
                 0.0);
    // Mass with both signs of infinity among the summands; sum is undefined,
    // treated as an erased (zero-LLR) message.
    const double conflict = std::max(1.0 - no_inf - pout - mout, 0.0);
    out.mass_pos_inf() = pout + over;
    out.mass_neg_inf() = mout + under;
    out.mass()[static_cast<std::size_t>(half)] += conflict;
    return out;
}

QuantizedDensity cn_update(const QuantizedDensity& incoming, int dc) {
    if (dc < 2) throw std::invalid_argument("cn_update: d_c must be >= 2");
    const int k = dc - 1;
    const auto& params = incoming.params();
    const int n = incoming.size();
    const int half = incoming.half();

    if (k == 1) return incoming;

    // Sign/magnitude decomposition on a uniform grid in g = -ln tanh(l/2):
    // box-plus multiplies signs and adds g magnitudes, so the k-fold combine
    // is a plain convolution of A = f+ + f- and B = f+ - f-.
    const double delta_g = params.delta / 10.0;
    const double g_top = g_transform(params.delta);
    const auto n_g = static_cast<std::size_t>(std::ceil(g_top / delta_g)) + 2;

    std::vector<double> pos(n_g, 0.0), neg(n_g, 0.0);
    for (int i = 0; i < n; ++i) {
        if (i == half) continue;
        const double mval = incoming.mass()[static_cast<std::size_t>(i)];
        if (mval <= 0.0) continue;
        const double l = incoming.grid(i);
        if (l > 0.0) {
            deposit_grid(pos, delta_g, g_transform(l), mval);
        } else {
            deposit_grid(neg, delta_g, g_transform(-l), mval);
        }
    }
    pos[0] += incoming.mass_pos_inf();
    neg[0] += incoming.mass_neg_inf();

    const double zero_free =
        std::accumulate(pos.begin(), pos.end(), 0.0) + std::accumulate(neg.begin(), neg.end(), 0.0);

    const std::size_t conv_len = static_cast<std::size_t>(k) * (n_g - 1) + 1;
    const std::size_t m = detail::next_pow2(conv_len);
    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t i = 0; i < n_g; ++i) {
        fa[i] = pos[i] + neg[i];
        fb[i] = pos[i] - neg[i];
    }
    detail::fft(fa, false);
    detail::fft(fb, false);
    for (std::size_t i = 0; i < m; ++i) {
        const auto pa = cpow_int(fa[i], k);
        const auto pb = cpow_int(fb[i], k);
        fa[i] = 0.5 * (pa + pb);  // positive-sign output
        fb[i] = 0.5 * (pa - pb);  // negative-sign output
    }
    detail::fft(fa, true);
    detail::fft(fb, true);

    QuantizedDensity out(params);
    // Outputs with all k magnitudes infinite land in g-bin 0 with a definite
    // sign; split them out combinatorially before reading the bin back.
    const double q = incoming.mass_pos_inf() + incoming.mass_neg_inf();
    const double qd = incoming.mass_pos_inf() - incoming.mass_neg_inf();
    const double all_pos = 0.5 * (std::pow(q, k) + std::pow(qd, k));
    const double all_neg = 0.5 * (std::pow(q, k) - std::pow(qd, k));
    out.mass_pos_inf() = std::max(all_pos, 0.0);
    out.mass_neg_inf() = std::max(all_neg, 0.0);
    const double res_pos = std::max(fa[0].real() - all_pos, 0.0);
    const double res_neg = std::max(fb[0].real() - all_neg, 0.0);
    // Finite remainder of g-bin 0 corresponds to l beyond the grid top.
    out.mass().back() += res_pos;
    out.mass().front() += res_neg;
    for (std::size_t j = 1; j < conv_len; ++j) {
        const double l = g_transform(static_cast<double>(j) * delta_g);
        const double pv = std::max(fa[j].real(), 0.0);
        const double nv = std::max(fb[j].real(), 0.0);
        if (pv > 0.0) out.deposit(l, pv);
        if (nv > 0.0) out.deposit(-l, nv);
    }
    // Any zero-LLR input forces a zero output.
    out.mass()[static_cast<std::size_t>(half)] += std::max(1.0 - std::pow(zero_free, k), 0.0);
    return out;
}

OracleOutcome run_oracle_de(int dv, int dc, double sigma_n, QuantParams params,
                            const OracleLimits& limits) {
    const QuantizedDensity channel = channel_density(sigma_n, params);
    QuantizedDensity x = channel;  // variable output with zero check messages

    const auto window = static_cast<std::size_t>(limits.stall_window);
    std::vector<double> pe_hist;
    pe_hist.reserve(window + 1);
    std::size_t hist_head = 0;

    for (std::int64_t it = 0;; ++it) {
        const double pe = x.error_probability();
        if (x.mass_pos_inf() >= 1.0 - limits.eps_conv) {
            return {OracleStatus::converged, it, pe};
        }
        if (pe_hist.size() < window + 1) {
            pe_hist.push_back(pe);
        } else {
            const double oldest = pe_hist[hist_head];
            pe_hist[hist_head] = pe;
            hist_head = (hist_head + 1) % (window + 1);
            if (oldest - pe < limits.eps_stall) {
                return {OracleStatus::stalled, it, pe};
            }
        }
        if (it >= limits.max_iter) {
            return {OracleStatus::iteration_limit, it, pe};
        }
        const QuantizedDensity y = cn_update(x, dc);
        x = vn_update(channel, y, dv);
    }
}

ThresholdResult oracle_threshold(int dv, int dc, const SearchParams& search, QuantParams params,
                                 const OracleLimits& limits) {
    if (dv < 2) throw std::invalid_argument("oracle_threshold: d_v must be >= 2");
    if (dc <= dv) throw std::invalid_argument("oracle_threshold: d_c must exceed d_v");
    if (!(search.sigma_min > 0.0) || !(search.sigma_max > search.sigma_min)) {
        throw std::invalid_argument("oracle_threshold: invalid search range");
    }

    std::int64_t iters_lo = 0;
    auto converges = [&](double sigma) {
        const OracleOutcome r = run_oracle_de(dv, dc, sigma, params, limits);
        if (r.status == OracleStatus::converged) {
            iters_lo = r.iterations;
            return true;
        }
        return false;
    };

    if (!converges(search.sigma_min)) {
        throw ThresholdRangeError(ThresholdRangeError::Kind::below_range,
                                  "threshold below search range: no convergence at sigma_min");
    }
    const std::int64_t lo_probe_iters = iters_lo;
    if (converges(search.sigma_max)) {
        throw ThresholdRangeError(ThresholdRangeError::Kind::above_range,
                                  "threshold above search range: convergence at sigma_max");
    }

    double lo = search.sigma_min;
    double hi = search.sigma_max;
    iters_lo = lo_probe_iters;
    while (hi - lo > search.precision) {
        const double mid = 0.5 * (lo + hi);
        if (converges(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    ThresholdResult res;
    res.sigma_star = lo;
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    res.precision = hi - lo;
    res.engine = "oracle";
    res.dv = dv;
    res.dc = dc;
    res.gamma = 1;
    res.chain_len = 1;
    res.design_rate = 1.0 - static_cast<double>(dv) / static_cast<double>(dc);
    res.iterations_at_lo = static_cast<int>(iters_lo);
    return res;
}

}  // namespace scde
