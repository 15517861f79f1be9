#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scde/engines.hpp"
#include "scde/ensemble.hpp"
#include "scde/oracle.hpp"
#include "scde/scalar_functions.hpp"
#include "scde/threshold.hpp"

using nlohmann::ordered_json;

namespace {

// exit 2: bad/missing flags; exit 4: values that fail validation.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_g(double v, int prec = 10) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

void emit_error(const std::string& code, const std::string& reason) {
    ordered_json e;
    e["error"] = code;
    e["reason"] = reason;
    std::cerr << e.dump() << "\n";
}

// Minimal flat TOML reader: top-level `key = value` lines with string,
// number, boolean, or one-level array values. Enough to mirror the flag set.
ordered_json parse_flat_toml(std::istream& in) {
    ordered_json out = ordered_json::object();
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    auto scalar = [&](std::string v) -> ordered_json {
        v = trim(v);
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
        if (v == "true") return true;
        if (v == "false") return false;
        try {
            std::size_t pos = 0;
            if (v.find_first_of(".eE") != std::string::npos) {
                const double d = std::stod(v, &pos);
                if (pos == v.size()) return d;
            } else {
                const long long i = std::stoll(v, &pos);
                if (pos == v.size()) return i;
            }
        } catch (...) {
        }
        throw ConfigError("config: cannot parse TOML value '" + v + "'");
    };
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') throw ConfigError("config: TOML tables are not supported");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: malformed TOML line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']') throw ConfigError("config: unterminated TOML array");
            ordered_json arr = ordered_json::array();
            std::stringstream ss(val.substr(1, val.size() - 2));
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!trim(item).empty()) arr.push_back(scalar(item));
            }
            out[key] = arr;
        } else {
            out[key] = scalar(val);
        }
    }
    return out;
}

ordered_json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") return parse_flat_toml(in);
    try {
        ordered_json j = ordered_json::parse(in);
        if (!j.is_object()) throw ConfigError("config: document must be an object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

// Merged view over the config document and CLI flags; CLI wins.
struct Params {
    ordered_json j = ordered_json::object();

    bool has(const std::string& k) const { return j.contains(k); }
    int geti(const std::string& k) const {
        if (!has(k)) throw UsageError("missing required parameter --" + k);
        if (!j[k].is_number_integer()) throw ConfigError("parameter '" + k + "' must be an integer");
        return j[k].get<int>();
    }
    int geti_or(const std::string& k, int d) const { return has(k) ? geti(k) : d; }
    double getd(const std::string& k) const {
        if (!has(k)) throw UsageError("missing required parameter --" + k);
        if (!j[k].is_number()) throw ConfigError("parameter '" + k + "' must be a number");
        return j[k].get<double>();
    }
    double getd_or(const std::string& k, double d) const { return has(k) ? getd(k) : d; }
    std::string gets(const std::string& k) const {
        if (!has(k)) throw UsageError("missing required parameter --" + k);
        if (!j[k].is_string()) throw ConfigError("parameter '" + k + "' must be a string");
        return j[k].get<std::string>();
    }
    std::string gets_or(const std::string& k, const std::string& d) const {
        return has(k) ? gets(k) : d;
    }
};

struct OutputSink {
    std::ofstream file;
    std::ostream* os = &std::cout;

    void open(const Params& p) {
        if (p.has("output")) {
            const std::string path = p.gets("output");
            file.open(path);
            if (!file) throw ConfigError("cannot open output file '" + path + "'");
            os = &file;
        }
    }
    std::ostream& out() { return *os; }
};

scde::SearchParams search_from(const Params& p) {
    scde::SearchParams s;
    s.sigma_min = p.getd_or("sigma_min", s.sigma_min);
    s.sigma_max = p.getd_or("sigma_max", s.sigma_max);
    s.precision = p.getd_or("precision", s.precision);
    if (!(s.sigma_min > 0.0) || !(s.sigma_max > s.sigma_min) || !(s.precision > 0.0)) {
        throw ConfigError("invalid search range");
    }
    return s;
}

scde::DeLimits limits_from(const Params& p) {
    scde::DeLimits l;
    l.max_iter = p.geti_or("max_iter", l.max_iter);
    if (l.max_iter < 1) throw ConfigError("max_iter must be positive");
    return l;
}

scde::EnsembleSpec spec_from(const Params& p) {
    const int dv = p.geti("dv");
    const int dc = p.geti("dc");
    const int gamma = p.geti("gamma");
    const int chain = p.geti("chain");
    try {
        return scde::EnsembleSpec::regular(dv, dc, gamma, chain);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ordered_json result_json(const scde::ThresholdResult& r) {
    ordered_json o;
    o["engine"] = r.engine;
    o["dv"] = r.dv;
    o["dc"] = r.dc;
    o["gamma"] = r.gamma;
    o["chain_len"] = r.chain_len;
    o["design_rate"] = r.design_rate;
    o["sigma_star"] = r.sigma_star;
    o["bracket_lo"] = r.bracket_lo;
    o["bracket_hi"] = r.bracket_hi;
    o["precision"] = r.precision;
    o["iterations"] = r.iterations_at_lo;
    return o;
}

void print_result(std::ostream& os, const scde::ThresholdResult& r, const std::string& format) {
    if (format == "json") {
        os << result_json(r).dump(2) << "\n";
    } else if (format == "csv") {
        os << "dv,dc,gamma,chain_len,engine,rate,sigma_star,bracket_lo,bracket_hi,iterations\n";
        os << r.dv << "," << r.dc << "," << r.gamma << "," << r.chain_len << "," << r.engine << ","
           << fmt_g(r.design_rate) << "," << fmt_g(r.sigma_star) << "," << fmt_g(r.bracket_lo)
           << "," << fmt_g(r.bracket_hi) << "," << r.iterations_at_lo << "\n";
    } else {
        os << "engine       " << r.engine << "\n";
        os << "ensemble     (" << r.dv << "," << r.dc << "," << r.gamma << "," << r.chain_len
           << ")\n";
        os << "design_rate  " << fmt_g(r.design_rate) << "\n";
        os << "sigma_star   " << fmt_g(r.sigma_star) << "\n";
        os << "bracket      [" << fmt_g(r.bracket_lo) << ", " << fmt_g(r.bracket_hi) << "]\n";
        os << "iterations   " << r.iterations_at_lo << "\n";
    }
}

std::string format_from(const Params& p) {
    const std::string f = p.gets_or("format", "table");
    if (f != "table" && f != "json" && f != "csv") {
        throw UsageError("unknown format '" + f + "' (expected table, json, or csv)");
    }
    return f;
}

int cmd_threshold(const Params& p) {
    const scde::SearchParams search = search_from(p);
    const scde::DeLimits limits = limits_from(p);
    scde::ThresholdResult r;
    const std::string engine = p.gets("engine");
    if (engine == "oracle") {
        if (p.geti_or("gamma", 1) != 1 || p.geti_or("chain", 1) != 1) {
            throw ConfigError("oracle engine supports only gamma = 1, chain = 1");
        }
        scde::QuantParams q;
        q.delta = p.getd_or("delta", q.delta);
        q.l_max = p.getd_or("l_max", q.l_max);
        try {
            r = scde::oracle_threshold(p.geti("dv"), p.geti("dc"), search, q);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (engine == "ga-proto-avg") {
        scde::ProtographSpec proto;
        try {
            proto = scde::ProtographSpec::from_json_file(p.gets("proto"));
            const auto layout = scde::couple_protograph(proto, p.geti("chain"));
            const auto eng = scde::make_proto_engine(layout);
            r = scde::find_threshold(*eng, search, limits);
            r.engine = "ga-proto-avg";
            r.gamma = layout.gamma();
            r.chain_len = layout.chain_len;
            r.design_rate = layout.rate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        scde::EngineId id;
        try {
            id = scde::engine_from_string(engine);
            r = scde::find_threshold(id, spec_from(p), search, limits);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    OutputSink sink;
    sink.open(p);
    print_result(sink.out(), r, format_from(p));
    return 0;
}

int cmd_sweep(const Params& p) {
    if (!p.has("chains")) throw UsageError("missing required parameter --chains");
    if (!p.has("engines")) throw UsageError("missing required parameter --engines");
    const int dv = p.geti("dv");
    const int dc = p.geti("dc");
    const int gamma = p.geti("gamma");

    std::vector<scde::EnsembleSpec> specs;
    for (const auto& c : p.j["chains"]) {
        if (!c.is_number_integer()) throw ConfigError("chains must be integers");
        try {
            specs.push_back(scde::EnsembleSpec::regular(dv, dc, gamma, c.get<int>()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    std::vector<scde::EngineId> engines;
    for (const auto& e : p.j["engines"]) {
        if (!e.is_string()) throw ConfigError("engines must be strings");
        try {
            engines.push_back(scde::engine_from_string(e.get<std::string>()));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ex.what());
        }
    }
    if (specs.empty() || engines.empty()) throw ConfigError("empty sweep grid");

    const auto cells = scde::sweep(specs, engines, search_from(p), limits_from(p),
                                   p.geti_or("jobs", 0));
    std::size_t ok = 0;
    for (const auto& c : cells) {
        if (c.result) ++ok;
    }

    OutputSink sink;
    sink.open(p);
    const std::string format = format_from(p);
    if (format == "json") {
        ordered_json rows = ordered_json::array();
        for (const auto& c : cells) {
            if (c.result) {
                rows.push_back(result_json(*c.result));
            } else {
                ordered_json o;
                o["engine"] = scde::to_string(c.engine);
                o["dv"] = c.spec.dv;
                o["dc"] = c.spec.dc;
                o["gamma"] = c.spec.gamma;
                o["chain_len"] = c.spec.chain_len;
                o["error"] = c.error;
                rows.push_back(o);
            }
        }
        sink.out() << ordered_json{{"rows", rows}}.dump(2) << "\n";
    } else {
        auto& os = sink.out();
        os << "dv,dc,gamma,chain_len,engine,rate,sigma_star,bracket_lo,bracket_hi,iterations,"
              "error\n";
        for (const auto& c : cells) {
            os << c.spec.dv << "," << c.spec.dc << "," << c.spec.gamma << "," << c.spec.chain_len
               << "," << scde::to_string(c.engine) << ",";
            if (c.result) {
                const auto& r = *c.result;
                os << fmt_g(r.design_rate) << "," << fmt_g(r.sigma_star) << ","
                   << fmt_g(r.bracket_lo) << "," << fmt_g(r.bracket_hi) << ","
                   << r.iterations_at_lo << ",\n";
            } else {
                std::string msg = c.error;
                for (auto& ch : msg) {
                    if (ch == ',' || ch == '\n') ch = ';';
                }
                os << ",,,,," << msg << "\n";
            }
        }
    }
    return ok > 0 ? 0 : 3;
}

int cmd_profile(const Params& p) {
    const double sigma = p.getd("sigma");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    const int dump_every = p.geti_or("dump_every", 0);
    const scde::DeLimits limits = limits_from(p);
    const std::string engine = p.gets_or("engine", "ga-avg");

    std::unique_ptr<scde::Engine> eng;
    try {
        if (engine == "ga-proto-avg") {
            const auto proto = scde::ProtographSpec::from_json_file(p.gets("proto"));
            eng = scde::make_proto_engine(scde::couple_protograph(proto, p.geti("chain")));
        } else {
            eng = scde::make_engine(scde::engine_from_string(engine), spec_from(p));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const scde::DeOutcome out = scde::run_de(*eng, sigma, limits, dump_every);

    OutputSink sink;
    sink.open(p);
    const std::string format = format_from(p);
    if (format == "json") {
        ordered_json o;
        o["engine"] = engine;
        o["sigma"] = sigma;
        o["status"] = scde::to_string(out.status);
        o["iterations"] = out.iterations;
        ordered_json hist = ordered_json::array();
        for (const auto& s : out.history) {
            hist.push_back({{"iteration", s.iteration}, {"mi", s.mi}});
        }
        o["history"] = hist;
        o["final_profile"] = out.final_profile;
        sink.out() << o.dump(2) << "\n";
    } else {
        auto& os = sink.out();
        os << "iteration,position,mutual_information\n";
        for (const auto& s : out.history) {
            for (std::size_t i = 0; i < s.mi.size(); ++i) {
                os << s.iteration << "," << (i + 1) << "," << fmt_g(s.mi[i], 12) << "\n";
            }
        }
        for (std::size_t i = 0; i < out.final_profile.size(); ++i) {
            os << out.iterations << "," << (i + 1) << "," << fmt_g(out.final_profile[i], 12)
               << "\n";
        }
        std::cerr << "status: " << scde::to_string(out.status) << " after " << out.iterations
                  << " iterations\n";
    }
    return 0;
}

int cmd_rate(const Params& p) {
    const scde::EnsembleSpec spec = spec_from(p);
    const double rate = scde::design_rate(spec);
    if (rate <= 0.0) {
        std::cerr << "warning: degenerate rate (termination overhead exceeds the chain)\n";
    }
    OutputSink sink;
    sink.open(p);
    const std::string format = format_from(p);
    if (format == "json") {
        ordered_json o;
        o["dv"] = spec.dv;
        o["dc"] = spec.dc;
        o["gamma"] = spec.gamma;
        o["chain_len"] = spec.chain_len;
        o["design_rate"] = rate;
        sink.out() << o.dump(2) << "\n";
    } else if (format == "csv") {
        sink.out() << "dv,dc,gamma,chain_len,design_rate\n";
        sink.out() << spec.dv << "," << spec.dc << "," << spec.gamma << "," << spec.chain_len
                   << "," << fmt_g(rate, 12) << "\n";
    } else {
        sink.out() << fmt_g(rate, 12) << "\n";
    }
    return 0;
}

int cmd_oracle(const Params& p) {
    scde::QuantParams q;
    q.delta = p.getd_or("delta", q.delta);
    q.l_max = p.getd_or("l_max", q.l_max);
    if (!(q.delta > 0.0) || !(q.l_max > 0.0)) throw ConfigError("delta and l_max must be positive");
    scde::ThresholdResult r;
    try {
        r = scde::oracle_threshold(p.geti("dv"), p.geti("dc"), search_from(p), q);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    OutputSink sink;
    sink.open(p);
    print_result(sink.out(), r, format_from(p));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Density evolution thresholds for spatially coupled LDPC ensembles"};
    app.require_subcommand(1);

    struct Flags {
        std::string config, engine, proto, format, output, chains_csv, engines_csv;
        int dv = 0, dc = 0, gamma = 0, chain = 0, max_iter = 0, dump_every = 0, jobs = 0;
        double sigma_min = 0, sigma_max = 0, precision = 0, sigma = 0, delta = 0, l_max = 0;
    } f;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON or TOML config file mirroring the flags");
        sub->add_option("--format", f.format, "Output format: table, json, or csv");
        sub->add_option("--output", f.output, "Write the report to this file instead of stdout");
    };
    auto add_ensemble = [&](CLI::App* sub) {
        sub->add_option("--dv", f.dv, "Variable node degree");
        sub->add_option("--dc", f.dc, "Check node degree");
        sub->add_option("--gamma", f.gamma, "Coupling length");
        sub->add_option("--chain", f.chain, "Chain length");
    };
    auto add_search = [&](CLI::App* sub) {
        sub->add_option("--sigma-min", f.sigma_min, "Lower end of the search range");
        sub->add_option("--sigma-max", f.sigma_max, "Upper end of the search range");
        sub->add_option("--precision", f.precision, "Bisection stopping width");
        sub->add_option("--max-iter", f.max_iter, "Iteration cap per DE run");
    };

    CLI::App* th = app.add_subcommand("threshold", "Compute a BP threshold");
    add_ensemble(th);
    add_search(th);
    add_common(th);
    th->add_option("--engine", f.engine, "rca-met, ga-met, rca-avg, ga-avg, ga-proto-avg, oracle");
    th->add_option("--proto", f.proto, "Protograph JSON file (ga-proto-avg)");
    th->add_option("--delta", f.delta, "Oracle grid step");
    th->add_option("--l-max", f.l_max, "Oracle grid range");

    CLI::App* sw = app.add_subcommand("sweep", "Threshold sweep over chain lengths and engines");
    add_ensemble(sw);
    add_search(sw);
    add_common(sw);
    sw->add_option("--chains", f.chains_csv, "Comma-separated chain lengths");
    sw->add_option("--engines", f.engines_csv, "Comma-separated engine names");
    sw->add_option("--jobs", f.jobs, "Concurrent cells (default: processor count)");

    CLI::App* pr = app.add_subcommand("profile", "Per-position convergence profile");
    add_ensemble(pr);
    add_common(pr);
    pr->add_option("--engine", f.engine, "Engine name");
    pr->add_option("--proto", f.proto, "Protograph JSON file (ga-proto-avg)");
    pr->add_option("--sigma", f.sigma, "Channel noise level");
    pr->add_option("--dump-every", f.dump_every, "Record every Nth profile (0: final only)");
    pr->add_option("--max-iter", f.max_iter, "Iteration cap");

    CLI::App* ra = app.add_subcommand("rate", "Design rate of a coupled ensemble");
    add_ensemble(ra);
    add_common(ra);

    CLI::App* orc = app.add_subcommand("oracle", "Quantized-DE threshold for an uncoupled ensemble");
    orc->add_option("--dv", f.dv, "Variable node degree");
    orc->add_option("--dc", f.dc, "Check node degree");
    add_search(orc);
    add_common(orc);
    orc->add_option("--delta", f.delta, "Grid step");
    orc->add_option("--l-max", f.l_max, "Grid range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        Params p;
        if (sub->count("--config") > 0) p.j = load_config(f.config);
        if (p.j.contains("command") && p.j["command"] != sub->get_name()) {
            throw ConfigError("config: command mismatch with the invoked subcommand");
        }
        p.j.erase("command");

        const bool cfg_has_ensemble =
            p.j.contains("dv") || p.j.contains("dc") || p.j.contains("gamma") ||
            p.j.contains("chain");
        bool cli_has_ensemble = false;
        for (const char* k : {"--dv", "--dc", "--gamma", "--chain"}) {
            if (sub->get_option_no_throw(k) && sub->count(k) > 0) cli_has_ensemble = true;
        }
        if (cfg_has_ensemble && cli_has_ensemble) {
            throw ConfigError("ambiguous ensemble source: use either flags or a config file");
        }

        auto seti = [&](const char* flag, const char* key, int v) {
            if (sub->get_option_no_throw(flag) && sub->count(flag) > 0) p.j[key] = v;
        };
        auto setd = [&](const char* flag, const char* key, double v) {
            if (sub->get_option_no_throw(flag) && sub->count(flag) > 0) p.j[key] = v;
        };
        auto sets = [&](const char* flag, const char* key, const std::string& v) {
            if (sub->get_option_no_throw(flag) && sub->count(flag) > 0) p.j[key] = v;
        };
        seti("--dv", "dv", f.dv);
        seti("--dc", "dc", f.dc);
        seti("--gamma", "gamma", f.gamma);
        seti("--chain", "chain", f.chain);
        seti("--max-iter", "max_iter", f.max_iter);
        seti("--dump-every", "dump_every", f.dump_every);
        seti("--jobs", "jobs", f.jobs);
        setd("--sigma-min", "sigma_min", f.sigma_min);
        setd("--sigma-max", "sigma_max", f.sigma_max);
        setd("--precision", "precision", f.precision);
        setd("--sigma", "sigma", f.sigma);
        setd("--delta", "delta", f.delta);
        setd("--l-max", "l_max", f.l_max);
        sets("--engine", "engine", f.engine);
        sets("--proto", "proto", f.proto);
        sets("--format", "format", f.format);
        sets("--output", "output", f.output);
        if (sub->get_option_no_throw("--chains") && sub->count("--chains") > 0) {
            ordered_json arr = ordered_json::array();
            std::stringstream ss(f.chains_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) arr.push_back(std::stoi(item));
            }
            p.j["chains"] = arr;
        }
        if (sub->get_option_no_throw("--engines") && sub->count("--engines") > 0) {
            ordered_json arr = ordered_json::array();
            std::stringstream ss(f.engines_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) arr.push_back(item);
            }
            p.j["engines"] = arr;
        }

        const std::string name = sub->get_name();
        if (name == "threshold") return cmd_threshold(p);
        if (name == "sweep") return cmd_sweep(p);
        if (name == "profile") return cmd_profile(p);
        if (name == "rate") return cmd_rate(p);
        return cmd_oracle(p);
    } catch (const scde::ThresholdRangeError& e) {
        emit_error(e.kind == scde::ThresholdRangeError::Kind::above_range
                       ? "search-range-above"
                       : "search-range-below",
                   e.what());
        return 3;
    } catch (const UsageError& e) {
        emit_error("usage", e.what());
        return 2;
    } catch (const ConfigError& e) {
        emit_error("config-validation", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("config-validation", e.what());
        return 4;
    }
}
