#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scde/ensemble.hpp"
#include "scde/ext_scalar.hpp"

namespace scde {

enum class EngineId { rca_met, ga_met, rca_avg, ga_avg, ga_proto_avg };

const char* to_string(EngineId id);
EngineId engine_from_string(const std::string& s);  // throws std::invalid_argument

// Boundary handling for the averaging engines: nominal keeps d_c - 1 at
// every check position with PERFECT messages standing in for out-of-range
// positions (the idealized uniform recursion); reduced keeps the same positional
// average but replaces d_c - 1 by the actual (lower) degree of each
// termination check minus one.
enum class CheckDegreeMode { nominal, reduced };

// One iteration's messages. x is variable-side, y check-side; the index
// meaning depends on the engine (edge types for MET, positions for
// averaging, position x node type for protograph averaging).
struct DeState {
    std::vector<ExtScalar> x;
    std::vector<ExtScalar> y;
    double sigma_n = 1.0;
    int iteration = 0;
};

struct DeLimits {
    int max_iter = 20000;
    double eps_conv = 1e-6;
    int stall_window = 50;
    double eps_stall = 1e-12;
};

struct ProfileSample {
    int iteration = 0;
    std::vector<double> mi;
};

struct DeOutcome {
    enum class Status { converged, stalled, iteration_limit };
    Status status = Status::iteration_limit;
    int iterations = 0;
    std::vector<double> final_profile;   // mutual information per tracked index
    std::vector<ProfileSample> history;  // filled when dump_every > 0
};

const char* to_string(DeOutcome::Status s);

// Step kernels (pure: state in, state out).
DeState rca_met_step(const DeState& s, const MetGraph& g);
DeState ga_met_step(const DeState& s, const MetGraph& g);
DeState rca_avg_step(const DeState& s, const EnsembleSpec& spec,
                     CheckDegreeMode mode = CheckDegreeMode::nominal);
DeState ga_avg_step(const DeState& s, const EnsembleSpec& spec,
                    CheckDegreeMode mode = CheckDegreeMode::nominal);
DeState ga_proto_avg_step(const DeState& s, const CoupledLayout& layout);

// Uniform driver interface over the five kernels.
class Engine {
public:
    virtual ~Engine() = default;
    virtual DeState initial_state(double sigma_n) const = 0;
    virtual DeState step(const DeState& s) const = 0;
    // Mutual information of each tracked variable-side value.
    virtual void profile(const DeState& s, std::vector<double>& mi) const = 0;
    virtual std::size_t tracked_count() const = 0;
    virtual EngineId id() const = 0;
};

std::unique_ptr<Engine> make_engine(EngineId id, const EnsembleSpec& spec,
                                    CheckDegreeMode mode = CheckDegreeMode::nominal);
std::unique_ptr<Engine> make_proto_engine(const CoupledLayout& layout);

// Iterates to convergence: all tracked mutual informations >= 1 - eps_conv,
// a stall (max improvement over stall_window iterations < eps_stall), or the
// iteration limit. dump_every > 0 records every dump_every-th profile.
DeOutcome run_de(const Engine& engine, double sigma_n, const DeLimits& limits,
                 int dump_every = 0);

}  // namespace scde
