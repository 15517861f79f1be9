#pragma once

#include <string>
#include <vector>

namespace scde {

// (d_v, d_c, gamma, C_L)-SC-LDPC ensemble: a chain of C_L regular
// protographs whose variable edges are smeared over gamma check positions
// with the given coupling weights.
struct EnsembleSpec {
    int dv = 3;
    int dc = 6;
    int gamma = 1;
    int chain_len = 1;
    std::vector<double> weights;  // size gamma, non-negative, sums to 1

    static EnsembleSpec regular(int dv, int dc, int gamma, int chain_len);
    static EnsembleSpec with_weights(int dv, int dc, int chain_len, std::vector<double> w);

    bool uniform_weights() const;
    void validate() const;  // throws std::invalid_argument
};

// Design rate of the terminated ensemble (uniform termination). May be
// non-positive for very short chains; callers treat that as a degenerate
// rate, not an error.
double design_rate(const EnsembleSpec& spec);

// Integer matrix, row-major, checks x variables.
struct IMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> a;

    IMatrix() = default;
    IMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0) {}
    IMatrix(std::initializer_list<std::initializer_list<int>> rows_init);

    int& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    int operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    int row_sum(int r) const;
    int col_sum(int c) const;
    friend bool operator==(const IMatrix&, const IMatrix&) = default;
};

// Protograph with per-offset spreading matrices; generalizes EnsembleSpec
// to multiple node types per position.
struct ProtographSpec {
    IMatrix base;                 // checks x variables
    std::vector<IMatrix> spread;  // gamma matrices, elementwise sum == base
    std::vector<int> punctured;   // variable columns excluded from rate/channel
    bool allow_degree_one = false;

    int gamma() const { return static_cast<int>(spread.size()); }
    int n_var() const { return base.cols; }
    int n_chk() const { return base.rows; }
    bool is_punctured(int col) const;
    void validate() const;  // throws std::invalid_argument

    static ProtographSpec from_json_text(const std::string& text);
    static ProtographSpec from_json_file(const std::string& path);
};

// One edge type of the MET representation: all edges between variable
// position var_pos and check position var_pos + offset.
struct MetEdgeType {
    int id = 0;              // 0-based; Fig-style numbering is id + 1
    int var_pos = 1;         // 1..C_L
    int offset = 0;          // 0..gamma-1
    int var_node_type = 0;   // == var_pos - 1
    int check_node_type = 0; // == var_pos - 1 + offset
    int q_var = 1;           // multiplicity at its variable node (d_v / gamma)
    int q_chk = 1;           // multiplicity at its check node (d_c / gamma)
};

// Edge-type adjacency of the coupled ensemble, with the node-perspective
// multinomial coefficients.
struct MetGraph {
    int dv = 0, dc = 0, gamma = 0, chain_len = 0;
    std::vector<MetEdgeType> edges;           // gamma * chain_len
    std::vector<std::vector<int>> var_edges;  // per variable node type, edge ids
    std::vector<std::vector<int>> chk_edges;  // per check node type, edge ids
    std::vector<double> var_fraction;         // L coefficients, size chain_len
    std::vector<double> chk_fraction;         // R coefficients, size chain_len+gamma-1
    int var_count_per_pos = 0;                // protograph node counts per position
    int chk_count_per_pos = 0;

    int n_edge_types() const { return static_cast<int>(edges.size()); }
    int n_var_types() const { return static_cast<int>(var_edges.size()); }
    int n_chk_types() const { return static_cast<int>(chk_edges.size()); }
};

// Deterministic MET construction; requires gamma | d_v and uniform weights.
MetGraph build_met_graph(const EnsembleSpec& spec);

// Coupled protograph layout: positions x node types with per-offset edge
// bundles taken from the spread matrices. Check positions run to
// chain_len + gamma - 1 (termination checks).
struct CoupledLayout {
    ProtographSpec proto;
    int chain_len = 1;

    std::vector<int> var_degree;  // per variable type, column sums of base
    std::vector<int> chk_degree;  // per check type, row sums of base

    int gamma() const { return proto.gamma(); }
    int n_var_types() const { return proto.n_var(); }
    int n_chk_types() const { return proto.n_chk(); }
    int n_var_positions() const { return chain_len; }
    int n_chk_positions() const { return chain_len + gamma() - 1; }

    // Total variable-side sockets of the expanded layout (physical edges).
    long long total_var_sockets() const;
    // Total check-side sockets, counted through the in-range bundles.
    long long total_chk_sockets() const;

    // 1 - (#checks)/(#unpunctured variables) of the expanded layout.
    double rate() const;
};

CoupledLayout couple_protograph(const ProtographSpec& proto, int chain_len);

}  // namespace scde
