#include "scde/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace scde {

EnsembleSpec EnsembleSpec::regular(int dv, int dc, int gamma, int chain_len) {
    EnsembleSpec s;
    s.dv = dv;
    s.dc = dc;
    s.gamma = gamma;
    s.chain_len = chain_len;
    s.weights.assign(static_cast<std::size_t>(gamma), 1.0 / gamma);
    s.validate();
    return s;
}

EnsembleSpec EnsembleSpec::with_weights(int dv, int dc, int chain_len, std::vector<double> w) {
    EnsembleSpec s;
    s.dv = dv;
    s.dc = dc;
    s.gamma = static_cast<int>(w.size());
    s.chain_len = chain_len;
    s.weights = std::move(w);
    s.validate();
    return s;
}

bool EnsembleSpec::uniform_weights() const {
    const double u = 1.0 / gamma;
    return std::all_of(weights.begin(), weights.end(),
                       [u](double w) { return std::fabs(w - u) <= 1e-12; });
}

void EnsembleSpec::validate() const {
    if (dv < 2) throw std::invalid_argument("EnsembleSpec: d_v must be >= 2");
    if (dc <= dv) throw std::invalid_argument("EnsembleSpec: d_c must exceed d_v");
    if (gamma < 1) throw std::invalid_argument("EnsembleSpec: gamma must be >= 1");
    if (chain_len < 1) throw std::invalid_argument("EnsembleSpec: chain_len must be >= 1");
    if (static_cast<int>(weights.size()) != gamma) {
        throw std::invalid_argument("EnsembleSpec: weights size must equal gamma");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("EnsembleSpec: negative coupling weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("EnsembleSpec: coupling weights must sum to 1");
    }
}

double design_rate(const EnsembleSpec& spec) {
    const double dv = spec.dv;
    const double dc = spec.dc;
    const double g = spec.gamma;
    const double cl = spec.chain_len;
    double s = 0.0;
    for (int i = 0; i <= spec.gamma; ++i) s += std::pow(i / g, dc);
    return 1.0 - (dv / dc) * (cl + g + 1.0 - 2.0 * s) / cl;
}

IMatrix::IMatrix(std::initializer_list<std::initializer_list<int>> rows_init) {
    rows = static_cast<int>(rows_init.size());
    cols = rows > 0 ? static_cast<int>(rows_init.begin()->size()) : 0;
    a.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& r : rows_init) {
        if (static_cast<int>(r.size()) != cols) {
            throw std::invalid_argument("IMatrix: ragged initializer");
        }
        a.insert(a.end(), r.begin(), r.end());
    }
}

int IMatrix::row_sum(int r) const {
    int s = 0;
    for (int c = 0; c < cols; ++c) s += (*this)(r, c);
    return s;
}

int IMatrix::col_sum(int c) const {
    int s = 0;
    for (int r = 0; r < rows; ++r) s += (*this)(r, c);
    return s;
}

bool ProtographSpec::is_punctured(int col) const {
    return std::find(punctured.begin(), punctured.end(), col) != punctured.end();
}

void ProtographSpec::validate() const {
    if (base.rows < 1 || base.cols < 1) {
        throw std::invalid_argument("ProtographSpec: empty base matrix");
    }
    if (spread.empty()) throw std::invalid_argument("ProtographSpec: no spread matrices");
    IMatrix sum(base.rows, base.cols);
    for (const auto& m : spread) {
        if (m.rows != base.rows || m.cols != base.cols) {
            throw std::invalid_argument("ProtographSpec: spread matrix shape mismatch");
        }
        for (std::size_t i = 0; i < m.a.size(); ++i) {
            if (m.a[i] < 0) throw std::invalid_argument("ProtographSpec: negative multiplicity");
            sum.a[i] += m.a[i];
        }
    }
    if (!(sum == base)) {
        throw std::invalid_argument("ProtographSpec: spread matrices do not sum to base");
    }
    for (int c = 0; c < base.cols; ++c) {
        if (base.col_sum(c) < 2 && !allow_degree_one) {
            throw std::invalid_argument("ProtographSpec: degree-1 variable column " +
                                        std::to_string(c) + " (set allow_degree_one)");
        }
    }
    for (int c : punctured) {
        if (c < 0 || c >= base.cols) {
            throw std::invalid_argument("ProtographSpec: punctured column out of range");
        }
    }
}

namespace {

IMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a non-empty array");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    IMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) {
            throw std::invalid_argument("matrix rows have unequal length");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<int>();
    }
    return m;
}

}  // namespace

ProtographSpec ProtographSpec::from_json_text(const std::string& text) {
    ProtographSpec p;
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        p.base = matrix_from_json(j.at("base"));
        for (const auto& s : j.at("spread")) p.spread.push_back(matrix_from_json(s));
        if (j.contains("punctured")) p.punctured = j["punctured"].get<std::vector<int>>();
        if (j.contains("allow_degree_one")) p.allow_degree_one = j["allow_degree_one"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("protograph json: ") + e.what());
    }
    p.validate();
    return p;
}

ProtographSpec ProtographSpec::from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open protograph file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

MetGraph build_met_graph(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.dv % spec.gamma != 0) {
        throw std::invalid_argument(
            "deterministic MET unsupported: gamma does not divide d_v; use an averaging engine");
    }
    if (!spec.uniform_weights()) {
        throw std::invalid_argument("deterministic MET unsupported: non-uniform coupling weights");
    }
    MetGraph g;
    g.dv = spec.dv;
    g.dc = spec.dc;
    g.gamma = spec.gamma;
    g.chain_len = spec.chain_len;
    const int n_var_types = spec.chain_len;
    const int n_chk_types = spec.chain_len + spec.gamma - 1;
    g.var_edges.resize(static_cast<std::size_t>(n_var_types));
    g.chk_edges.resize(static_cast<std::size_t>(n_chk_types));
    const int q_var = spec.dv / spec.gamma;
    // q_chk = d_c / gamma sockets of each incident type at a check; d_c must
    // split evenly across offsets in the deterministic construction
    if (spec.dc % spec.gamma != 0) {
        throw std::invalid_argument(
            "deterministic MET unsupported: gamma does not divide d_c; use an averaging engine");
    }
    const int q_chk = spec.dc / spec.gamma;
    for (int pos = 1; pos <= spec.chain_len; ++pos) {
        for (int k = 0; k < spec.gamma; ++k) {
            MetEdgeType e;
            e.id = static_cast<int>(g.edges.size());
            e.var_pos = pos;
            e.offset = k;
            e.var_node_type = pos - 1;
            e.check_node_type = pos - 1 + k;
            e.q_var = q_var;
            e.q_chk = q_chk;
            g.var_edges[static_cast<std::size_t>(e.var_node_type)].push_back(e.id);
            g.chk_edges[static_cast<std::size_t>(e.check_node_type)].push_back(e.id);
            g.edges.push_back(e);
        }
    }
    g.var_fraction.assign(static_cast<std::size_t>(n_var_types), 1.0 / n_var_types);
    g.chk_fraction.assign(static_cast<std::size_t>(n_chk_types), 1.0 / n_chk_types);
    const int gcd = std::gcd(spec.dv, spec.dc);
    g.var_count_per_pos = spec.dc / gcd;
    g.chk_count_per_pos = spec.dv / gcd;
    return g;
}

long long CoupledLayout::total_var_sockets() const {
    long long s = 0;
    for (int v = 0; v < n_var_types(); ++v) s += var_degree[static_cast<std::size_t>(v)];
    return s * chain_len;
}

long long CoupledLayout::total_chk_sockets() const {
    long long s = 0;
    for (int p = 1; p <= n_chk_positions(); ++p) {
        for (int k = 0; k < gamma(); ++k) {
            const int src = p - k;
            if (src < 1 || src > chain_len) continue;
            for (std::size_t i = 0; i < proto.spread[static_cast<std::size_t>(k)].a.size(); ++i) {
                s += proto.spread[static_cast<std::size_t>(k)].a[i];
            }
        }
    }
    return s;
}

double CoupledLayout::rate() const {
    int unpunctured = 0;
    for (int v = 0; v < n_var_types(); ++v) {
        if (!proto.is_punctured(v)) ++unpunctured;
    }
    const double checks = static_cast<double>(n_chk_positions()) * n_chk_types();
    const double vars = static_cast<double>(chain_len) * unpunctured;
    return 1.0 - checks / vars;
}

CoupledLayout couple_protograph(const ProtographSpec& proto, int chain_len) {
    proto.validate();
    if (chain_len < 1) throw std::invalid_argument("couple_protograph: chain_len must be >= 1");
    CoupledLayout l;
    l.proto = proto;
    l.chain_len = chain_len;
    l.var_degree.resize(static_cast<std::size_t>(proto.n_var()));
    l.chk_degree.resize(static_cast<std::size_t>(proto.n_chk()));
    for (int v = 0; v < proto.n_var(); ++v) l.var_degree[static_cast<std::size_t>(v)] = proto.base.col_sum(v);
    for (int c = 0; c < proto.n_chk(); ++c) l.chk_degree[static_cast<std::size_t>(c)] = proto.base.row_sum(c);
    return l;
}

}  // namespace scde
