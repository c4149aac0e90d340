// Command line front end: kernel synthesis, decay-rate sweeps, the
// slow-convergence construction, and the graph Dirichlet reports.
// Exit codes: 0 success, 2 usage, 3 numerical/assertion, 4 resource.

#include "fracheat/counterexample.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/fit.hpp"
#include "fracheat/graph.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/semigroup.hpp"
#include "fracheat/stable_profile.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;

struct RunConfig {
    int d = 1;
    double s = 1.0;
    std::string p = "inf";
    std::string times;      // comma list; empty means the command default
    double t = 0.0;         // single time, kernel convenience
    double tol = 1e-8;
    double box_mult = 0.0;  // 0 means the command default
    std::string out;
    std::string format = "json";
    int jobs = 1;
    bool do_assert = false;
    double assert_tol = 0.1;
    std::string mode = "sweep";
    std::string datum = "shift-e1";
    std::string phi = "t^-0.25";
    int kmax = 2;
    std::string graph;
    std::string omega = "file";
    std::string u0;
};

double parse_p(const std::string& p) {
    if (p == "inf") return std::numeric_limits<double>::infinity();
    const double v = std::stod(p);
    if (!(v >= 1.0)) throw std::invalid_argument("p must be >= 1 or 'inf'");
    return v;
}

std::vector<double> parse_times(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("bad time value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("time grid is empty");
    return out;
}

std::vector<double> parse_values(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// phi specs: t^-<beta> for a power law, log for 1/log(e+t)
fracheat::DecayProfile parse_phi(const std::string& spec, double* beta_out) {
    if (spec == "log") {
        if (beta_out) *beta_out = 0.0;
        return [](double t) { return 1.0 / std::log(std::exp(1.0) + t); };
    }
    if (spec.rfind("t^", 0) == 0) {
        const double beta = std::stod(spec.substr(2));
        if (!(beta < 0.0)) throw std::invalid_argument("phi exponent must be negative");
        if (beta_out) *beta_out = beta;
        return [beta](double t) { return std::pow(t, beta); };
    }
    throw std::invalid_argument("phi spec must be t^-<beta> or log");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot open output file " + path);
    os << text;
}

// payload: the JSON report plus an optional CSV block writer
struct Output {
    std::string json_text;
    std::function<void(std::ostream&)> csv;
};

void emit(const Output& o, const std::string& out, const std::string& format) {
    if (!out.empty()) {
        write_text(out + ".json", o.json_text + "\n");
        if (o.csv) {
            std::ofstream os(out + ".csv", std::ios::binary);
            if (!os) throw std::invalid_argument("cannot open output file " + out + ".csv");
            o.csv(os);
        }
        return;
    }
    if (format == "csv") {
        if (!o.csv) throw std::invalid_argument("this command has no CSV payload");
        o.csv(std::cout);
    } else {
        std::cout << o.json_text << "\n";
    }
}

// ---- kernel ----------------------------------------------------------------

int cmd_kernel(const RunConfig& cfg) {
    std::vector<double> times;
    if (cfg.t > 0.0) times.push_back(cfg.t);
    if (!cfg.times.empty()) {
        for (double v : parse_times(cfg.times)) times.push_back(v);
    }
    if (times.empty()) throw std::invalid_argument("kernel needs --t or --times");

    fracheat::SynthesisOptions opt;
    if (cfg.box_mult > 0.0) opt.box_mult = cfg.box_mult;
    const int jobs = std::min<int>(cfg.jobs, static_cast<int>(times.size()));
    if (jobs > 1) opt.mem_share /= jobs; // workers split the advisory share

    std::vector<std::optional<fracheat::KernelSlice>> slices(times.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= times.size()) return;
            try {
                slices[i] = fracheat::synthesize_kernel(times[i], fracheat::FracOrder(cfg.s),
                                                        cfg.d, cfg.tol, opt);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < times.size(); ++i) {
        const fracheat::KernelSlice& ks = *slices[i];
        Output o;
        o.json_text = fracheat::kernel_json_header(ks);
        o.csv = [&ks](std::ostream& os) { fracheat::write_kernel_csv(ks, os); };
        std::string base = cfg.out;
        if (!base.empty() && times.size() > 1) base += "_" + std::to_string(i);
        emit(o, base, cfg.format);
    }
    return 0;
}

// ---- rates -----------------------------------------------------------------

int assert_slope(const fracheat::RateReport& r, double expected, double tol) {
    if (std::fabs(r.slope - expected) <= tol) return 0;
    std::cerr << "assertion failed: slope " << r.slope << " vs expected " << expected
              << " (tolerance " << tol << ")\n";
    return 3;
}

int cmd_rates(const RunConfig& cfg) {
    const double p = parse_p(cfg.p);
    fracheat::SynthesisOptions opt;
    if (cfg.box_mult > 0.0) opt.box_mult = cfg.box_mult;

    if (cfg.mode == "optimality") {
        if (cfg.d != 1) throw std::invalid_argument("optimality limit is evaluated in d = 1");
        const double t = cfg.times.empty() ? 4096.0 : parse_times(cfg.times).back();
        if (cfg.box_mult <= 0.0) opt.box_mult = 20.0; // increments live in the tail
        const double constant =
            fracheat::optimality_constant(t, fracheat::FracOrder(cfg.s), 1, p, cfg.tol, opt);
        fracheat::StableProfileEvaluator ev(fracheat::FracOrder(cfg.s), 1,
                                            std::min(cfg.tol, 1e-5));
        const double limit = fracheat::optimality_limit_1d(ev, p);
        const double rel = std::fabs(constant - limit) / limit;
        json j;
        j["t"] = t;
        j["s"] = cfg.s;
        j["p"] = cfg.p;
        j["constant"] = constant;
        j["profile_limit"] = limit;
        j["rel_error"] = rel;
        emit({j.dump(), nullptr}, cfg.out, cfg.format);
        if (cfg.do_assert && rel > cfg.assert_tol) {
            std::cerr << "assertion failed: constant " << constant << " vs limit " << limit
                      << " (rel " << rel << ")\n";
            return 3;
        }
        return 0;
    }

    const std::vector<double> times =
        cfg.times.empty() ? fracheat::dyadic_times(4, 9) : parse_times(cfg.times);

    fracheat::RateReport r;
    double expected = 0.0;
    bool have_expected = false;
    if (cfg.mode == "sweep" && cfg.datum == "shift-e1") {
        fracheat::LatticeField u0(cfg.d, 1);
        u0.at(1) = 1.0;
        r = fracheat::rate_sweep(u0, fracheat::FracOrder(cfg.s), p, times, cfg.tol, opt);
        expected = -1.0 / (2.0 * cfg.s);
        have_expected = true;
    } else if (cfg.mode == "sweep" && cfg.datum == "heavy-tail") {
        const fracheat::LatticeField u0 = fracheat::heavy_tail_datum(cfg.d, 2000);
        r = fracheat::no_moment_convergence_check(u0, fracheat::FracOrder(cfg.s), times,
                                                  cfg.tol, opt);
    } else {
        throw std::invalid_argument("mode must be sweep|optimality, datum shift-e1|heavy-tail");
    }

    json j = json::parse(fracheat::rate_json(r));
    j["d"] = cfg.d;
    j["s"] = cfg.s;
    j["p"] = cfg.p;
    j["datum"] = cfg.datum;
    if (have_expected) j["expected_slope"] = expected;
    Output o;
    o.json_text = j.dump();
    o.csv = [&r](std::ostream& os) { fracheat::write_rate_csv(r, os); };
    emit(o, cfg.out, cfg.format);

    if (cfg.do_assert) {
        if (have_expected) return assert_slope(r, expected, cfg.assert_tol);
        if (!fracheat::decreasing_to_small(r)) {
            std::cerr << "assertion failed: error sequence does not decrease to small\n";
            return 3;
        }
    }
    return 0;
}

// ---- counterexample --------------------------------------------------------

int cmd_counterexample(const RunConfig& cfg) {
    double beta = 0.0;
    const fracheat::DecayProfile phi = parse_phi(cfg.phi, &beta);
    fracheat::SynthesisOptions opt;
    // receding-site boxes grow like t_k^{1/(2s)}; a lean multiplier keeps the
    // last level inside the budget without changing any verified quantity
    opt.box_mult = cfg.box_mult > 0.0 ? cfg.box_mult : 3.0;
    opt.measure_annulus = false;

    const fracheat::SlowDatum sd = fracheat::build_slow_datum(
        phi, fracheat::FracOrder(cfg.s), cfg.d, cfg.kmax, cfg.tol, opt);

    json j = json::parse(fracheat::slow_datum_json(sd));
    json checks = json::array();
    bool all_pass = true;
    for (int k = 1; k <= sd.achieved_k; ++k) {
        const fracheat::SlowBoundCheck c = fracheat::verify_slow_bound(sd, k, cfg.tol, opt);
        json cj;
        cj["k"] = k;
        cj["t"] = c.t;
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        cj["pass"] = c.pass;
        checks.push_back(cj);
        all_pass = all_pass && c.pass;
    }
    j["checks"] = checks;
    emit({j.dump(), nullptr}, cfg.out, cfg.format);

    if (cfg.do_assert) {
        if (sd.achieved_k < cfg.kmax) {
            std::cerr << "assertion failed: achieved " << sd.achieved_k << " of " << cfg.kmax
                      << " levels\n";
            return 3;
        }
        if (!all_pass) {
            std::cerr << "assertion failed: a lower bound check did not pass\n";
            return 3;
        }
    }
    return 0;
}

// ---- graph commands --------------------------------------------------------

std::vector<int> resolve_omega(const fracheat::graph::GraphInput& gi, const std::string& spec) {
    const int n = gi.g.n();
    if (spec == "file") {
        if (gi.omega.empty()) {
            throw std::invalid_argument("graph file has no omega; pass --omega");
        }
        return gi.omega;
    }
    if (spec.rfind("mid", 0) == 0) {
        const int k = std::stoi(spec.substr(3));
        if (k < 1 || k > n - 1) throw std::invalid_argument("mid<k> needs 1 <= k < n");
        std::vector<int> om;
        const int start = (n - k) / 2;
        for (int i = 0; i < k; ++i) om.push_back(start + i);
        return om;
    }
    std::vector<int> om;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const int idx = gi.g.index_of(std::stoll(item));
        if (idx < 0) throw std::invalid_argument("omega id '" + item + "' is not a vertex");
        om.push_back(idx);
    }
    if (om.empty()) throw std::invalid_argument("omega spec is empty");
    return om;
}

fracheat::graph::DirichletOperator load_operator(const RunConfig& cfg) {
    if (cfg.graph.empty()) throw std::invalid_argument("this command needs --graph");
    const fracheat::graph::GraphInput gi = fracheat::graph::load_graph_json(cfg.graph);
    return fracheat::graph::dirichlet_operator(gi.g, resolve_omega(gi, cfg.omega),
                                               fracheat::FracOrder(cfg.s));
}

int cmd_dirichlet(const RunConfig& cfg) {
    const fracheat::graph::DirichletOperator op = load_operator(cfg);
    const fracheat::graph::SpectralData sd = fracheat::graph::spectral_solve(op);

    Eigen::VectorXd u0(op.matrix.rows());
    if (cfg.u0.empty()) {
        // deterministic generic datum: a ramp overlaps every mode
        for (int i = 0; i < u0.size(); ++i) u0(i) = 1.0 + 0.1 * i;
    } else {
        const std::vector<double> vals = parse_values(cfg.u0);
        if (static_cast<int>(vals.size()) != u0.size()) {
            throw std::invalid_argument("u0 needs exactly one value per omega vertex");
        }
        for (int i = 0; i < u0.size(); ++i) u0(i) = vals[static_cast<std::size_t>(i)];
    }

    const std::vector<double> times = cfg.times.empty()
                                          ? std::vector<double>{2, 4, 6, 8, 10, 12}
                                          : parse_times(cfg.times);
    const fracheat::graph::FirstModeReport fm =
        fracheat::graph::first_mode_report(op, u0, parse_p(cfg.p), times);

    json j = json::parse(fracheat::graph::spectral_json(op, sd));
    j["mu1"] = fm.mu1;
    j["mu2"] = fm.mu2;
    j["overlap1"] = fm.overlap1;
    j["raw"] = json::parse(fracheat::rate_json(fm.raw));
    j["renormalized"] = json::parse(fracheat::rate_json(fm.renormalized));
    Output o;
    o.json_text = j.dump();
    o.csv = [&fm](std::ostream& os) { fracheat::write_rate_csv(fm.raw, os); };
    emit(o, cfg.out, cfg.format);

    if (cfg.do_assert) {
        const int bad_raw = assert_slope(fm.raw, -fm.mu2, 0.01 * fm.mu2);
        const int bad_ren =
            assert_slope(fm.renormalized, -(fm.mu2 - fm.mu1), 0.01 * (fm.mu2 - fm.mu1));
        if (bad_raw || bad_ren) return 3;
    }
    return 0;
}

int cmd_positivity(const RunConfig& cfg) {
    const fracheat::graph::DirichletOperator op = load_operator(cfg);
    const std::vector<double> times = cfg.times.empty()
                                          ? std::vector<double>{0.01, 1.0, 10.0}
                                          : parse_times(cfg.times);
    const fracheat::graph::PositivityReport rep =
        fracheat::graph::positivity_improving_check(op, times);
    json j;
    j["s"] = op.s;
    j["n"] = op.matrix.rows();
    j["times"] = times;
    j["positive"] = rep.positive;
    j["min_entry"] = rep.min_entry;
    j["metzler"] = rep.metzler;
    j["irreducible"] = rep.irreducible;
    emit({j.dump(), nullptr}, cfg.out, cfg.format);

    if (cfg.do_assert && !rep.positive) {
        std::cerr << "assertion failed: semigroup is not entrywise positive\n";
        return 3;
    }
    return 0;
}

// ---- config file merge (flags win) ------------------------------------------

void merge_config(const json& file_cfg, CLI::App* sub, RunConfig& cfg) {
    auto absent = [&](const char* flag, const char* key) {
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        return opt && opt->count() == 0 && file_cfg.contains(key);
    };
    auto num = [&](const char* flag, const char* key, auto& target) {
        if (absent(flag, key)) target = file_cfg.at(key).get<std::decay_t<decltype(target)>>();
    };
    auto str = [&](const char* flag, const char* key, std::string& target) {
        if (!absent(flag, key)) return;
        const json& v = file_cfg.at(key);
        if (v.is_string()) {
            target = v.get<std::string>();
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) {
                if (!joined.empty()) joined += ",";
                joined += e.dump();
            }
            target = joined;
        } else {
            target = v.dump();
        }
    };
    num("--d", "d", cfg.d);
    num("--s", "s", cfg.s);
    str("--p", "p", cfg.p);
    str("--times", "times", cfg.times);
    num("--t", "t", cfg.t);
    num("--tol", "tol", cfg.tol);
    num("--box-mult", "box_mult", cfg.box_mult);
    str("--out", "out", cfg.out);
    str("--format", "format", cfg.format);
    num("--jobs", "jobs", cfg.jobs);
    num("--assert-tol", "assert_tol", cfg.assert_tol);
    str("--mode", "mode", cfg.mode);
    str("--datum", "datum", cfg.datum);
    str("--phi", "phi", cfg.phi);
    num("--kmax", "kmax", cfg.kmax);
    str("--graph", "graph", cfg.graph);
    str("--omega", "omega", cfg.omega);
    str("--u0", "u0", cfg.u0);
    if (absent("--assert", "assert")) cfg.do_assert = file_cfg.at("assert").get<bool>();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice fractional heat flow driver"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string config_path;

    auto add_common = [&](CLI::App* sub, bool with_assert) {
        sub->add_option("--config", config_path, "JSON config file, flags take precedence");
        sub->add_option("--d", cfg.d, "lattice dimension")->check(CLI::Range(1, 3));
        sub->add_option("--s", cfg.s, "fractional order in (0, 1]")
            ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
        sub->add_option("--tol", cfg.tol, "synthesis tolerance")
            ->check(CLI::Range(1e-13, 1e-2));
        sub->add_option("--times", cfg.times, "comma separated time grid");
        sub->add_option("--box-mult", cfg.box_mult, "box radius multiplier")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", cfg.out, "output base path (.json/.csv appended)");
        sub->add_option("--format", cfg.format, "stdout payload when --out is absent")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", cfg.jobs, "worker pool size")->check(CLI::Range(1, 64));
        if (with_assert) {
            sub->add_flag("--assert", cfg.do_assert, "exit 3 unless the check passes");
            sub->add_option("--assert-tol", cfg.assert_tol, "slope tolerance for --assert")
                ->check(CLI::PositiveNumber);
        }
        return sub;
    };

    CLI::App* kernel = add_common(app.add_subcommand("kernel", "synthesize heat kernels"), false);
    kernel->add_option("--t", cfg.t, "single time")->check(CLI::PositiveNumber);

    CLI::App* rates = add_common(app.add_subcommand("rates", "decay rate sweeps"), true);
    rates->add_option("--p", cfg.p, "norm exponent: 1, 2, ... or inf");
    rates->add_option("--mode", cfg.mode, "sweep | optimality")
        ->check(CLI::IsMember({"sweep", "optimality"}));
    rates->add_option("--datum", cfg.datum, "shift-e1 | heavy-tail")
        ->check(CLI::IsMember({"shift-e1", "heavy-tail"}));

    CLI::App* cx =
        add_common(app.add_subcommand("counterexample", "slow-convergence construction"), true);
    cx->add_option("--phi", cfg.phi, "decay budget: t^-<beta> or log");
    cx->add_option("--kmax", cfg.kmax, "levels requested")->check(CLI::Range(1, 64));

    CLI::App* dirichlet =
        add_common(app.add_subcommand("dirichlet", "spectral gap decay on a graph"), true);
    dirichlet->add_option("--graph", cfg.graph, "graph JSON file");
    dirichlet->add_option("--omega", cfg.omega, "file | mid<k> | comma separated vertex ids");
    dirichlet->add_option("--p", cfg.p, "report norm exponent");
    dirichlet->add_option("--u0", cfg.u0, "comma separated initial datum");
    dirichlet->add_flag("--assert-gap", cfg.do_assert,
                        "exit 3 unless both slopes match the gap within 1%");

    CLI::App* positivity =
        add_common(app.add_subcommand("positivity", "entrywise positivity of the evolution"), true);
    positivity->add_option("--graph", cfg.graph, "graph JSON file");
    positivity->add_option("--omega", cfg.omega, "file | mid<k> | comma separated vertex ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot open config file " + config_path);
            json file_cfg;
            try {
                file_cfg = json::parse(in);
            } catch (const json::exception& e) {
                throw std::invalid_argument(std::string("config parse failure: ") + e.what());
            }
            merge_config(file_cfg, sub, cfg);
        }
        fracheat::FracOrder checked(cfg.s); // validates merged values too
        if (sub == kernel) return cmd_kernel(cfg);
        if (sub == rates) return cmd_rates(cfg);
        if (sub == cx) return cmd_counterexample(cfg);
        if (sub == dirichlet) return cmd_dirichlet(cfg);
        if (sub == positivity) return cmd_positivity(cfg);
        return 2;
    } catch (const fracheat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
