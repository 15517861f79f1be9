#include "scde/threshold.hpp"

#include <atomic>
#include <thread>

namespace scde {

ThresholdResult find_threshold(const Engine& engine, const SearchParams& search,
                               const DeLimits& limits) {
    if (!(search.sigma_min > 0.0) || !(search.sigma_max > search.sigma_min)) {
        throw std::invalid_argument("find_threshold: bad search range");
    }
    auto probe = [&](double sigma) { return run_de(engine, sigma, limits); };

    DeOutcome at_lo = probe(search.sigma_min);
    if (at_lo.status != DeOutcome::Status::converged) {
        throw ThresholdRangeError(ThresholdRangeError::Kind::below_range,
                                  "threshold below search range");
    }
    DeOutcome at_hi = probe(search.sigma_max);
    if (at_hi.status == DeOutcome::Status::converged) {
        throw ThresholdRangeError(ThresholdRangeError::Kind::above_range,
                                  "threshold above search range");
    }

    double lo = search.sigma_min;
    double hi = search.sigma_max;
    int iters_at_lo = at_lo.iterations;
    while (hi - lo > search.precision) {
        const double mid = 0.5 * (lo + hi);
        const DeOutcome o = probe(mid);
        if (o.status == DeOutcome::Status::converged) {
            lo = mid;
            iters_at_lo = o.iterations;
        } else {
            hi = mid;
        }
    }

    ThresholdResult r;
    r.sigma_star = lo;
    r.bracket_lo = lo;
    r.bracket_hi = hi;
    r.precision = hi - lo;
    r.engine = to_string(engine.id());
    r.iterations_at_lo = iters_at_lo;
    return r;
}

ThresholdResult find_threshold(EngineId id, const EnsembleSpec& spec, const SearchParams& search,
                               const DeLimits& limits) {
    auto engine = make_engine(id, spec);
    ThresholdResult r = find_threshold(*engine, search, limits);
    r.dv = spec.dv;
    r.dc = spec.dc;
    r.gamma = spec.gamma;
    r.chain_len = spec.chain_len;
    r.design_rate = design_rate(spec);
    return r;
}

std::vector<SweepCell> sweep(const std::vector<EnsembleSpec>& specs,
                             const std::vector<EngineId>& engines, const SearchParams& search,
                             const DeLimits& limits, int jobs) {
    std::vector<SweepCell> cells;
    for (const auto& spec : specs) {
        for (EngineId e : engines) {
            SweepCell c;
            c.spec = spec;
            c.engine = e;
            cells.push_back(std::move(c));
        }
    }
    if (cells.empty()) return cells;

    unsigned n_jobs = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
    if (n_jobs == 0) n_jobs = 1;
    n_jobs = std::min<unsigned>(n_jobs, static_cast<unsigned>(cells.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            SweepCell& c = cells[i];
            try {
                c.result = find_threshold(c.engine, c.spec, search, limits);
            } catch (const std::exception& ex) {
                c.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return cells;
}

}  // namespace scde
