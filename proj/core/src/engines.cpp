#include "scde/engines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scde/scalar_functions.hpp"

namespace scde {

const char* to_string(EngineId id) {
    switch (id) {
        case EngineId::rca_met: return "rca-met";
        case EngineId::ga_met: return "ga-met";
        case EngineId::rca_avg: return "rca-avg";
        case EngineId::ga_avg: return "ga-avg";
        case EngineId::ga_proto_avg: return "ga-proto-avg";
    }
    return "?";
}

EngineId engine_from_string(const std::string& s) {
    if (s == "rca-met") return EngineId::rca_met;
    if (s == "ga-met") return EngineId::ga_met;
    if (s == "rca-avg") return EngineId::rca_avg;
    if (s == "ga-avg") return EngineId::ga_avg;
    if (s == "ga-proto-avg") return EngineId::ga_proto_avg;
    throw std::invalid_argument("unknown engine: " + s);
}

const char* to_string(DeOutcome::Status s) {
    switch (s) {
        case DeOutcome::Status::converged: return "converged";
        case DeOutcome::Status::stalled: return "stalled";
        case DeOutcome::Status::iteration_limit: return "iteration-limit";
    }
    return "?";
}

namespace {

// a * m with a real-valued multiplicity; a <= 0 yields the neutral message.
ExtScalar scale_real(double a, ExtScalar m) {
    if (a <= 0.0) return ExtScalar(0.0);
    if (m.is_perfect()) return ExtScalar::perfect();
    return ExtScalar(a * m.value());
}

double dj_of(ExtScalar v) { return v.is_perfect() ? 0.0 : j_deficit(v.value()); }
double dcf_of(ExtScalar v) { return v.is_perfect() ? 0.0 : cf_deficit(v.value()); }

// phi-domain check combination: phi_inv of 1 - prod (1 - phi terms).
// Accumulates in log space so large products stay accurate.
struct PhiProduct {
    double log_sum = 0.0;
    void add(double k, double phi_val) {
        if (k <= 0.0) return;
        log_sum += k * std::log1p(-phi_val);
    }
    ExtScalar result() const { return phi_inv(-std::expm1(log_sum)); }
};

void check_sized(const DeState& s, std::size_t nx, const char* what) {
    if (s.x.size() != nx) {
        throw std::invalid_argument(std::string("DeState does not match ") + what);
    }
}

}  // namespace

DeState rca_met_step(const DeState& s, const MetGraph& g) {
    const std::size_t n = static_cast<std::size_t>(g.n_edge_types());
    check_sized(s, n, "MET graph");
    DeState out;
    out.sigma_n = s.sigma_n;
    out.iteration = s.iteration + 1;
    out.y.resize(n);
    out.x.resize(n);

    std::vector<ExtScalar> rx(n);
    for (std::size_t e = 0; e < n; ++e) rx[e] = reciprocal_snr(s.x[e]);
    for (std::size_t e = 0; e < n; ++e) {
        const MetEdgeType& et = g.edges[e];
        ExtScalar acc = scaled(et.q_chk - 1, rx[e]);
        for (int j : g.chk_edges[static_cast<std::size_t>(et.check_node_type)]) {
            if (static_cast<std::size_t>(j) == e) continue;
            acc = acc + scaled(g.edges[static_cast<std::size_t>(j)].q_chk, rx[static_cast<std::size_t>(j)]);
        }
        out.y[e] = acc;
    }

    std::vector<ExtScalar> ry(n);
    for (std::size_t e = 0; e < n; ++e) ry[e] = reciprocal_snr(out.y[e]);
    const double chan = 1.0 / (s.sigma_n * s.sigma_n);
    for (std::size_t e = 0; e < n; ++e) {
        const MetEdgeType& et = g.edges[e];
        ExtScalar acc = ExtScalar(chan) + scaled(et.q_var - 1, ry[e]);
        for (int j : g.var_edges[static_cast<std::size_t>(et.var_node_type)]) {
            if (static_cast<std::size_t>(j) == e) continue;
            acc = acc + scaled(g.edges[static_cast<std::size_t>(j)].q_var, ry[static_cast<std::size_t>(j)]);
        }
        out.x[e] = promote_if_saturated_snr(acc);
    }
    return out;
}

DeState ga_met_step(const DeState& s, const MetGraph& g) {
    const std::size_t n = static_cast<std::size_t>(g.n_edge_types());
    check_sized(s, n, "MET graph");
    DeState out;
    out.sigma_n = s.sigma_n;
    out.iteration = s.iteration + 1;
    out.y.resize(n);
    out.x.resize(n);

    std::vector<double> px(n);
    for (std::size_t e = 0; e < n; ++e) px[e] = phi(s.x[e]);
    for (std::size_t e = 0; e < n; ++e) {
        const MetEdgeType& et = g.edges[e];
        PhiProduct prod;
        prod.add(et.q_chk - 1, px[e]);
        for (int j : g.chk_edges[static_cast<std::size_t>(et.check_node_type)]) {
            if (static_cast<std::size_t>(j) == e) continue;
            prod.add(g.edges[static_cast<std::size_t>(j)].q_chk, px[static_cast<std::size_t>(j)]);
        }
        out.y[e] = prod.result();
    }

    const double chan = 2.0 / (s.sigma_n * s.sigma_n);
    for (std::size_t e = 0; e < n; ++e) {
        const MetEdgeType& et = g.edges[e];
        ExtScalar acc = ExtScalar(chan) + scaled(et.q_var - 1, out.y[e]);
        for (int j : g.var_edges[static_cast<std::size_t>(et.var_node_type)]) {
            if (static_cast<std::size_t>(j) == e) continue;
            acc = acc + scaled(g.edges[static_cast<std::size_t>(j)].q_var, out.y[static_cast<std::size_t>(j)]);
        }
        out.x[e] = promote_if_saturated_llr(acc);
    }
    return out;
}

namespace {

ExtScalar var_side(const std::vector<ExtScalar>& x, int pos, int chain_len) {
    if (pos < 1 || pos > chain_len) return ExtScalar::perfect();
    return x[static_cast<std::size_t>(pos - 1)];
}

// In-range coupling weight mass for a check position (reduced-degree mode).
double in_range_weight(const EnsembleSpec& spec, int p) {
    double w = 0.0;
    for (int k = 0; k < spec.gamma; ++k) {
        const int src = p - k;
        if (src >= 1 && src <= spec.chain_len) w += spec.weights[static_cast<std::size_t>(k)];
    }
    return w;
}

}  // namespace

DeState rca_avg_step(const DeState& s, const EnsembleSpec& spec, CheckDegreeMode mode) {
    spec.validate();
    const int cl = spec.chain_len;
    check_sized(s, static_cast<std::size_t>(cl), "ensemble positions");
    DeState out;
    out.sigma_n = s.sigma_n;
    out.iteration = s.iteration + 1;
    out.y.resize(static_cast<std::size_t>(cl + spec.gamma - 1));
    out.x.resize(static_cast<std::size_t>(cl));

    for (int p = 1; p <= cl + spec.gamma - 1; ++p) {
        double m = 0.0;
        for (int k = 0; k < spec.gamma; ++k) {
            m += spec.weights[static_cast<std::size_t>(k)] * dcf_of(var_side(s.x, p - k, cl));
        }
        double mult = static_cast<double>(spec.dc - 1);
        if (mode == CheckDegreeMode::reduced) {
            mult = spec.dc * in_range_weight(spec, p) - 1.0;
        }
        out.y[static_cast<std::size_t>(p - 1)] = scale_real(mult, cf_inv_deficit(1.0 - m));
    }

    const double chan = 1.0 / (s.sigma_n * s.sigma_n);
    for (int i = 1; i <= cl; ++i) {
        double def = 0.0;  // 1 - averaged mutual information of the incoming checks
        for (int k = 0; k < spec.gamma; ++k) {
            def += spec.weights[static_cast<std::size_t>(k)] * cf(out.y[static_cast<std::size_t>(i + k - 1)]);
        }
        const ExtScalar r = cf_inv_deficit(std::min(def, 1.0));
        out.x[static_cast<std::size_t>(i - 1)] =
            promote_if_saturated_snr(ExtScalar(chan) + scale_real(spec.dv - 1, r));
    }
    return out;
}

DeState ga_avg_step(const DeState& s, const EnsembleSpec& spec, CheckDegreeMode mode) {
    spec.validate();
    const int cl = spec.chain_len;
    check_sized(s, static_cast<std::size_t>(cl), "ensemble positions");
    DeState out;
    out.sigma_n = s.sigma_n;
    out.iteration = s.iteration + 1;
    out.y.resize(static_cast<std::size_t>(cl + spec.gamma - 1));
    out.x.resize(static_cast<std::size_t>(cl));

    for (int p = 1; p <= cl + spec.gamma - 1; ++p) {
        ExtScalar inner;
        double mult = static_cast<double>(spec.dc - 1);
        if (spec.gamma == 1) {
            inner = var_side(s.x, p, cl);  // single-term average is the value itself
        } else {
            double d = 0.0;
            for (int k = 0; k < spec.gamma; ++k) {
                d += spec.weights[static_cast<std::size_t>(k)] * dj_of(var_side(s.x, p - k, cl));
            }
            if (mode == CheckDegreeMode::reduced) {
                mult = spec.dc * in_range_weight(spec, p) - 1.0;
            }
            inner = j_inv_deficit(std::min(d, 1.0));
        }
        PhiProduct prod;
        prod.add(mult, phi(inner));
        out.y[static_cast<std::size_t>(p - 1)] = prod.result();
    }

    const double chan = 2.0 / (s.sigma_n * s.sigma_n);
    for (int i = 1; i <= cl; ++i) {
        ExtScalar inner;
        if (spec.gamma == 1) {
            inner = out.y[static_cast<std::size_t>(i - 1)];
        } else {
            double d = 0.0;
            for (int k = 0; k < spec.gamma; ++k) {
                d += spec.weights[static_cast<std::size_t>(k)] * dj_of(out.y[static_cast<std::size_t>(i + k - 1)]);
            }
            inner = j_inv_deficit(std::min(d, 1.0));
        }
        out.x[static_cast<std::size_t>(i - 1)] =
            promote_if_saturated_llr(ExtScalar(chan) + scale_real(spec.dv - 1, inner));
    }
    return out;
}

DeState ga_proto_avg_step(const DeState& s, const CoupledLayout& l) {
    const int cl = l.chain_len;
    const int nv = l.n_var_types();
    const int nc = l.n_chk_types();
    const int g = l.gamma();
    check_sized(s, static_cast<std::size_t>(cl * nv), "protograph layout");
    DeState out;
    out.sigma_n = s.sigma_n;
    out.iteration = s.iteration + 1;
    out.y.resize(static_cast<std::size_t>((cl + g - 1) * nc));
    out.x.resize(static_cast<std::size_t>(cl * nv));

    auto x_at = [&](int pos, int v) -> ExtScalar {
        if (pos < 1 || pos > cl) return ExtScalar::perfect();
        return s.x[static_cast<std::size_t>((pos - 1) * nv + v)];
    };
    auto y_at = [&](int pos, int c) -> ExtScalar {
        return out.y[static_cast<std::size_t>((pos - 1) * nc + c)];
    };

    for (int p = 1; p <= cl + g - 1; ++p) {
        for (int c = 0; c < nc; ++c) {
            const double deg = l.chk_degree[static_cast<std::size_t>(c)];
            // bundle-weighted J-domain average of the incoming variable
            // messages; per-offset partial sums keep the degenerate
            // single-type case identical to ga_avg_step
            double d = 0.0;
            for (int k = 0; k < g; ++k) {
                const IMatrix& sp = l.proto.spread[static_cast<std::size_t>(k)];
                double dk = 0.0;
                for (int v = 0; v < nv; ++v) {
                    const int m = sp(c, v);
                    if (m == 0) continue;
                    dk += (m / deg) * dj_of(x_at(p - k, v));
                }
                d += dk;
            }
            const ExtScalar inner = j_inv_deficit(std::min(d, 1.0));
            PhiProduct prod;
            prod.add(deg - 1.0, phi(inner));
            out.y[static_cast<std::size_t>((p - 1) * nc + c)] = prod.result();
        }
    }

    const double chan_full = 2.0 / (s.sigma_n * s.sigma_n);
    for (int i = 1; i <= cl; ++i) {
        for (int v = 0; v < nv; ++v) {
            const double deg = l.var_degree[static_cast<std::size_t>(v)];
            double d = 0.0;
            for (int k = 0; k < g; ++k) {
                const IMatrix& sp = l.proto.spread[static_cast<std::size_t>(k)];
                double dk = 0.0;
                for (int c = 0; c < nc; ++c) {
                    const int m = sp(c, v);
                    if (m == 0) continue;
                    dk += (m / deg) * dj_of(y_at(i + k, c));
                }
                d += dk;
            }
            const ExtScalar inner = j_inv_deficit(std::min(d, 1.0));
            const double chan = l.proto.is_punctured(v) ? 0.0 : chan_full;
            out.x[static_cast<std::size_t>((i - 1) * nv + v)] =
                promote_if_saturated_llr(ExtScalar(chan) + scale_real(deg - 1.0, inner));
        }
    }
    return out;
}

namespace {

class MetEngine final : public Engine {
public:
    MetEngine(EngineId id, MetGraph graph) : id_(id), g_(std::move(graph)) {}

    DeState initial_state(double sigma_n) const override {
        DeState st;
        st.sigma_n = sigma_n;
        const double chan = (id_ == EngineId::rca_met ? 1.0 : 2.0) / (sigma_n * sigma_n);
        ExtScalar v(chan);
        v = id_ == EngineId::rca_met ? promote_if_saturated_snr(v) : promote_if_saturated_llr(v);
        st.x.assign(static_cast<std::size_t>(g_.n_edge_types()), v);
        st.y.assign(static_cast<std::size_t>(g_.n_edge_types()), ExtScalar(0.0));
        return st;
    }

    DeState step(const DeState& s) const override {
        return id_ == EngineId::rca_met ? rca_met_step(s, g_) : ga_met_step(s, g_);
    }

    void profile(const DeState& s, std::vector<double>& mi) const override {
        mi.resize(s.x.size());
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            mi[i] = id_ == EngineId::rca_met ? cf(s.x[i]) : j_fun(s.x[i]);
        }
    }

    std::size_t tracked_count() const override { return static_cast<std::size_t>(g_.n_edge_types()); }
    EngineId id() const override { return id_; }
    const MetGraph& graph() const { return g_; }

private:
    EngineId id_;
    MetGraph g_;
};

class AvgEngine final : public Engine {
public:
    AvgEngine(EngineId id, EnsembleSpec spec, CheckDegreeMode mode)
        : id_(id), spec_(std::move(spec)), mode_(mode) {}

    DeState initial_state(double sigma_n) const override {
        DeState st;
        st.sigma_n = sigma_n;
        const double chan = (id_ == EngineId::rca_avg ? 1.0 : 2.0) / (sigma_n * sigma_n);
        ExtScalar v(chan);
        v = id_ == EngineId::rca_avg ? promote_if_saturated_snr(v) : promote_if_saturated_llr(v);
        st.x.assign(static_cast<std::size_t>(spec_.chain_len), v);
        st.y.assign(static_cast<std::size_t>(spec_.chain_len + spec_.gamma - 1), ExtScalar(0.0));
        return st;
    }

    DeState step(const DeState& s) const override {
        return id_ == EngineId::rca_avg ? rca_avg_step(s, spec_, mode_)
                                        : ga_avg_step(s, spec_, mode_);
    }

    void profile(const DeState& s, std::vector<double>& mi) const override {
        mi.resize(s.x.size());
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            mi[i] = id_ == EngineId::rca_avg ? cf(s.x[i]) : j_fun(s.x[i]);
        }
    }

    std::size_t tracked_count() const override { return static_cast<std::size_t>(spec_.chain_len); }
    EngineId id() const override { return id_; }

private:
    EngineId id_;
    EnsembleSpec spec_;
    CheckDegreeMode mode_;
};

class ProtoEngine final : public Engine {
public:
    explicit ProtoEngine(CoupledLayout layout) : l_(std::move(layout)) {}

    DeState initial_state(double sigma_n) const override {
        DeState st;
        st.sigma_n = sigma_n;
        const int nv = l_.n_var_types();
        st.x.resize(static_cast<std::size_t>(l_.chain_len * nv));
        for (int i = 0; i < l_.chain_len; ++i) {
            for (int v = 0; v < nv; ++v) {
                const double chan = l_.proto.is_punctured(v) ? 0.0 : 2.0 / (sigma_n * sigma_n);
                st.x[static_cast<std::size_t>(i * nv + v)] = promote_if_saturated_llr(ExtScalar(chan));
            }
        }
        st.y.assign(static_cast<std::size_t>((l_.chain_len + l_.gamma() - 1) * l_.n_chk_types()),
                    ExtScalar(0.0));
        return st;
    }

    DeState step(const DeState& s) const override { return ga_proto_avg_step(s, l_); }

    void profile(const DeState& s, std::vector<double>& mi) const override {
        mi.resize(s.x.size());
        for (std::size_t i = 0; i < s.x.size(); ++i) mi[i] = j_fun(s.x[i]);
    }

    std::size_t tracked_count() const override {
        return static_cast<std::size_t>(l_.chain_len) * static_cast<std::size_t>(l_.n_var_types());
    }
    EngineId id() const override { return EngineId::ga_proto_avg; }

private:
    CoupledLayout l_;
};

}  // namespace

std::unique_ptr<Engine> make_engine(EngineId id, const EnsembleSpec& spec, CheckDegreeMode mode) {
    switch (id) {
        case EngineId::rca_met:
        case EngineId::ga_met:
            return std::make_unique<MetEngine>(id, build_met_graph(spec));
        case EngineId::rca_avg:
        case EngineId::ga_avg:
            spec.validate();
            return std::make_unique<AvgEngine>(id, spec, mode);
        case EngineId::ga_proto_avg:
            throw std::invalid_argument("ga-proto-avg requires a protograph layout");
    }
    throw std::invalid_argument("unknown engine id");
}

std::unique_ptr<Engine> make_proto_engine(const CoupledLayout& layout) {
    return std::make_unique<ProtoEngine>(layout);
}

DeOutcome run_de(const Engine& engine, double sigma_n, const DeLimits& limits, int dump_every) {
    if (!(sigma_n > 0.0)) throw std::domain_error("run_de: sigma_n must be positive");
    DeState s = engine.initial_state(sigma_n);

    DeOutcome out;
    std::vector<double> mi;
    engine.profile(s, mi);

    const int ring_len = limits.stall_window + 1;
    std::vector<std::vector<double>> ring(static_cast<std::size_t>(ring_len));
    ring[0] = mi;

    auto converged = [&](const std::vector<double>& p) {
        for (double v : p) {
            if (v < 1.0 - limits.eps_conv) return false;
        }
        return true;
    };

    if (dump_every > 0) out.history.push_back({0, mi});
    if (converged(mi)) {
        out.status = DeOutcome::Status::converged;
        out.iterations = 0;
        out.final_profile = mi;
        return out;
    }

    for (int l = 1; l <= limits.max_iter; ++l) {
        s = engine.step(s);
        engine.profile(s, mi);
        if (dump_every > 0 && l % dump_every == 0) out.history.push_back({l, mi});
        if (converged(mi)) {
            out.status = DeOutcome::Status::converged;
            out.iterations = l;
            out.final_profile = mi;
            return out;
        }
        if (l >= limits.stall_window) {
            const auto& old = ring[static_cast<std::size_t>((l - limits.stall_window) % ring_len)];
            double best = 0.0;
            for (std::size_t i = 0; i < mi.size(); ++i) best = std::max(best, mi[i] - old[i]);
            if (best < limits.eps_stall) {
                out.status = DeOutcome::Status::stalled;
                out.iterations = l;
                out.final_profile = mi;
                return out;
            }
        }
        ring[static_cast<std::size_t>(l % ring_len)] = mi;
    }
    out.status = DeOutcome::Status::iteration_limit;
    out.iterations = limits.max_iter;
    out.final_profile = mi;
    return out;
}

}  // namespace scde
