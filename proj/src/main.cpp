#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <medchain/experiments.hpp>
#include <medchain/sdops.hpp>
#include <medchain/spectral.hpp>

#include "verify_suite.hpp"

namespace {

using namespace medchain;
using nlohmann::json;

// beyond this many states the profile falls back to the certified sandwich
constexpr long float_state_cap = 20000;

std::string float_str(double x) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_part(const partition& lam) { return "\"" + partition_text(lam) + "\""; }

rat parse_theta(const std::string& s) {
    rat th = parse_rat(s);
    if (th <= 0) throw std::invalid_argument("theta must be a positive rational, got " + s);
    return th;
}

rat parse_laziness(const std::string& s) {
    rat de = parse_rat(s);
    if (de < 0 || de >= 1) throw std::invalid_argument("laziness must lie in [0,1), got " + s);
    return de;
}

partition parse_start(const std::string& s, int n) {
    partition start;
    if (s == "id") start = partition(n, 1);
    else if (s == "cycle") start = partition{n};
    else start = parse_partition(s);
    if (weight(start) != n)
        throw std::invalid_argument("start " + partition_text(start) + " has the wrong size");
    return start;
}

run_mode parse_mode(const std::string& s) {
    if (s == "exact") return run_mode::exact;
    if (s == "float") return run_mode::floating;
    return run_mode::automatic;
}

// relative paths land in MEDCHAIN_OUT_DIR when it is set; "-" or empty is stdout
class sink {
  public:
    explicit sink(const std::string& out) {
        if (out.empty() || out == "-") return;
        std::filesystem::path p(out);
        if (p.is_relative()) {
            const char* dir = std::getenv("MEDCHAIN_OUT_DIR");
            if (dir && *dir) p = std::filesystem::path(dir) / p;
        }
        path_ = p.string();
        file_.open(p);
        if (!file_) throw std::invalid_argument("cannot open output file " + path_);
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    void finish() {
        if (path_.empty()) return;
        file_.close();
        std::cerr << "wrote " << path_ << "\n";
    }

  private:
    std::string path_;
    std::ofstream file_;
};

// flags shared across subcommands; each one binds the fields it uses
struct run_config {
    int n = 0;
    std::string theta = "1";
    std::string laziness = "0";
    std::string start = "id";
    std::string mode = "auto";
    std::string out;
    std::uint64_t seed = 12345;
    int threads = 0;

    int threads_or_cores() const {
        if (threads > 0) return threads;
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
};

json estimate_json(const estimate& e) { return json{{"value", e.value}, {"se", e.se}}; }

int cmd_kernel(const run_config& cfg) {
    sparse_kernel K = build_kernel(cfg.n, parse_theta(cfg.theta), parse_laziness(cfg.laziness));
    sink out(cfg.out);
    out.stream() << "from,to,prob\n";
    for (std::size_t i = 0; i < K.idx.size(); ++i)
        for (const auto& [j, p] : K.rows[i])
            out.stream() << csv_part(K.idx.list[i]) << "," << csv_part(K.idx.list[j]) << ","
                         << rat_str(p) << "\n";
    out.finish();
    return 0;
}

int cmd_jack(const run_config& cfg) {
    rat th = parse_theta(cfg.theta);
    jack_table_t t = jack_table(cfg.n, th);
    json coeffs = json::object();
    json norms = json::object();
    for (const auto& lam : partitions_of(cfg.n)) {
        json row = json::object();
        for (const auto& [rho, c] : t.row(lam)) row[partition_text(rho)] = rat_str(c);
        coeffs[partition_text(lam)] = std::move(row);
        norms[partition_text(lam)] = rat_str(t.norm(lam));
    }
    json doc{{"n", cfg.n}, {"theta", rat_str(th)}, {"coefficients", std::move(coeffs)},
             {"norms", std::move(norms)}};
    sink out(cfg.out);
    out.stream() << doc.dump(2) << "\n";
    out.finish();
    return 0;
}

int cmd_sample(const run_config& cfg, long steps, long replicas, bool from_stationary) {
    rat th = parse_theta(cfg.theta);
    rat de = parse_laziness(cfg.laziness);
    partition start = parse_start(cfg.start, cfg.n);
    sink out(cfg.out);
    out.stream() << "replica,partition\n";
    for (long r = 0; r < replicas; ++r) {
        rng64 gen{replica_seed(cfg.seed, static_cast<std::uint64_t>(r))};
        partition lam;
        if (from_stationary) {
            lam = sample_ewens(cfg.n, th, gen);
        } else {
            lam = start;
            for (long t = 0; t < steps; ++t) lam = sample_step(lam, th, de, gen);
        }
        out.stream() << r << "," << csv_part(lam) << "\n";
    }
    out.finish();
    return 0;
}

int cmd_tv_profile(const run_config& cfg, double cmin, double cmax, double cstep) {
    rat th = parse_theta(cfg.theta);
    rat de = parse_laziness(cfg.laziness);
    if (th == 1 && de == 0)
        throw periodicity_error("the chain at theta 1 without laziness has period 2");
    if (cstep <= 0) throw std::invalid_argument("cstep must be positive");
    std::vector<double> cs;
    for (double c = cmin; c <= cmax + 1e-9; c += cstep) cs.push_back(c);
    if (cs.empty()) throw std::invalid_argument("empty c grid");
    partition start = parse_start(cfg.start, cfg.n);

    bigint states = count_partitions(cfg.n);
    sink out(cfg.out);
    if (states <= float_state_cap) {
        sparse_kernel K = build_kernel(cfg.n, th, de);
        ewens_dist pi = ewens(cfg.n, th);
        run_mode mode = parse_mode(cfg.mode);
        std::cerr << "powering " << states << " states ("
                  << (wants_exact(mode, K.idx.size()) ? "exact" : "float") << " mode)\n";
        auto rows = tv_profile(K, pi, start, cs, mode);
        out.stream() << "c,t,tv,chi2\n";
        for (const auto& r : rows)
            out.stream() << float_str(r.c) << "," << r.t << "," << float_str(r.tv) << ","
                         << float_str(r.l2) << "\n";
    } else {
        if (de != 0)
            throw std::invalid_argument("certified profile needs laziness 0");
        if (length(start) != cfg.n)
            throw std::invalid_argument("certified profile starts from id only");
        std::cerr << "certified sandwich over " << states << " states; tv is the upper bound\n";
        auto rows = mixing_profile(cfg.n, th, cs, 45, cfg.threads_or_cores());
        out.stream() << "c,t,tv,tv_lower\n";
        for (const auto& r : rows)
            out.stream() << float_str(r.c) << "," << r.t << "," << float_str(r.tv_upper) << ","
                         << float_str(r.tv_lower) << "\n";
    }
    out.finish();
    return 0;
}

int cmd_lower_bound(const run_config& cfg, double c, long reps) {
    lower_bound_report rep = lower_bound_witness(cfg.n, parse_theta(cfg.theta), c, reps,
                                                 cfg.seed, cfg.threads_or_cores());
    json doc{{"n", rep.n},
             {"theta", rat_str(rep.theta)},
             {"c", rep.c},
             {"steps", rep.steps},
             {"reps", rep.reps},
             {"eta", rep.eta},
             {"chain_below", estimate_json(rep.chain_below)},
             {"stat_below", estimate_json(rep.stat_below)},
             {"witness", rep.witness},
             {"witness_se", rep.witness_se},
             {"mean_k", rat_str(rep.mean_k)},
             {"var_k", rat_str(rep.var_k)},
             {"stat_second", rat_str(rep.stat_second)},
             {"chebyshev_lower", rep.chebyshev_lower}};
    sink out(cfg.out);
    out.stream() << doc.dump(2) << "\n";
    out.finish();
    return 0;
}

int cmd_fk(const run_config& cfg, int k, long t, long reps) {
    fk_report rep = ncycle_fk_experiment(cfg.n, k, t, reps, cfg.seed, parse_theta(cfg.theta),
                                         parse_laziness(cfg.laziness), cfg.threads_or_cores());
    json doc{{"n", rep.n},
             {"k", rep.k},
             {"t", rep.t},
             {"reps", rep.reps},
             {"theta", rat_str(rep.theta)},
             {"laziness", rat_str(rep.delta)},
             {"harmonic", rat_str(rep.harmonic)},
             {"literal_chain", estimate_json(rep.literal_chain)},
             {"literal_stat", estimate_json(rep.literal_stat)},
             {"centered_chain", estimate_json(rep.centered_chain)},
             {"centered_stat", estimate_json(rep.centered_stat)},
             {"gap", rep.gap},
             {"gap_se", rep.gap_se}};
    sink out(cfg.out);
    out.stream() << doc.dump(2) << "\n";
    out.finish();
    return 0;
}

int cmd_ops(const run_config& cfg, const std::string& op, const std::string& input) {
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot read input file " + input);
    json doc = json::parse(in);
    sym_expansion f = sym_from_json(doc);
    operator_spec spec{parse_op_kind(op), parse_theta(cfg.theta), cfg.n};
    sym_expansion img = apply(spec, f);
    sink out(cfg.out);
    out.stream() << sym_to_json(img).dump(2) << "\n";
    out.finish();
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"random transposition chains on integer partitions: exact kernels, "
                 "deformed coefficient tables, mixing profiles, and operator actions"};
    app.require_subcommand(1);
    run_config cfg;

    auto add_common = [&cfg](CLI::App* sub, bool with_n = true) {
        if (with_n) sub->add_option("--n", cfg.n, "partition size")->required();
        sub->add_option("--out", cfg.out, "output path; '-' or empty writes to stdout; "
                                          "relative paths land in $MEDCHAIN_OUT_DIR");
        sub->add_option("--threads", cfg.threads, "worker threads (default: cores)");
    };

    auto* kernel = app.add_subcommand("kernel", "emit the exact transition kernel as CSV");
    add_common(kernel);
    kernel->add_option("--theta", cfg.theta, "deformation parameter p/q")->required();
    kernel->add_option("--laziness", cfg.laziness, "holding probability p/q in [0,1)");

    auto* jack = app.add_subcommand("jack", "emit the deformed coefficient table as JSON");
    add_common(jack);
    jack->add_option("--theta", cfg.theta, "deformation parameter p/q")->required();

    long steps = 1, replicas = 1;
    bool from_stationary = false;
    auto* sample = app.add_subcommand("sample", "run chain replicas and emit final states");
    add_common(sample);
    sample->add_option("--theta", cfg.theta, "deformation parameter p/q")->required();
    sample->add_option("--laziness", cfg.laziness, "holding probability p/q in [0,1)");
    sample->add_option("--steps", steps, "chain steps per replica");
    sample->add_option("--replicas", replicas, "number of replicas");
    sample->add_option("--seed", cfg.seed, "master seed");
    sample->add_option("--start", cfg.start, "start shape: id, cycle, or [a,b,...]");
    sample->add_flag("--ewens", from_stationary, "draw from the stationary law instead");

    double cmin = -4.0, cmax = 4.0, cstep = 0.5;
    auto* tv = app.add_subcommand("tv-profile", "distance-to-stationarity profile as CSV");
    add_common(tv);
    tv->add_option("--theta", cfg.theta, "deformation parameter p/q")->required();
    tv->add_option("--laziness", cfg.laziness, "holding probability p/q in [0,1)");
    tv->add_option("--start", cfg.start, "start shape: id, cycle, or [a,b,...]");
    tv->add_option("--mode", cfg.mode, "exact|float|auto (auto: exact up to 5000 states)")
        ->check(CLI::IsMember({"exact", "float", "auto"}));
    tv->add_option("--cmin", cmin, "smallest window offset c");
    tv->add_option("--cmax", cmax, "largest window offset c");
    tv->add_option("--cstep", cstep, "grid spacing in c");

    double lb_c = 1.0;
    long lb_reps = 100000;
    auto* lb = app.add_subcommand("lower-bound", "moment witness below the window as JSON");
    add_common(lb);
    lb->add_option("--theta", cfg.theta, "deformation parameter p/q")->required();
    lb->add_option("--c", lb_c, "offset below the mixing window");
    lb->add_option("--reps", lb_reps, "Monte Carlo replicas");
    lb->add_option("--seed", cfg.seed, "master seed");

    int fk_k = 0;
    long fk_t = 0, fk_reps = 100000;
    auto* fk = app.add_subcommand("fk", "short-cycle statistic experiment as JSON");
    add_common(fk);
    fk->add_option("--theta", cfg.theta, "deformation parameter p/q");
    fk->add_option("--laziness", cfg.laziness, "holding probability p/q in [0,1)");
    fk->add_option("--k", fk_k, "count cycles of length up to k (default n/10)");
    fk->add_option("--t", fk_t, "steps from the one-part start (default n/10)");
    fk->add_option("--reps", fk_reps, "Monte Carlo replicas");
    fk->add_option("--seed", cfg.seed, "master seed");

    std::string ops_op, ops_input;
    auto* ops = app.add_subcommand("ops", "apply a closed-form operator to a power-sum file");
    ops->add_option("--op", ops_op, "operator kind")
        ->required()
        ->check(CLI::IsMember({"dtheta2", "dtheta3", "d110", "d002", "d120", "d210", "d003"}));
    ops->add_option("--theta", cfg.theta, "deformation parameter p/q");
    ops->add_option("--nvars", cfg.n, "number of variables")->required();
    ops->add_option("--input", ops_input, "input expansion (JSON)")->required();
    ops->add_option("--out", cfg.out, "output path；relative paths land in $MEDCHAIN_OUT_DIR");

    bool quick = false;
    auto* verify = app.add_subcommand("verify", "run the exact invariant suite");
    verify->add_flag("--quick", quick, "reduced ranges (n <= 6)");
    verify->add_option("--threads", cfg.threads, "worker threads (default: cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (kernel->parsed()) return cmd_kernel(cfg);
    if (jack->parsed()) return cmd_jack(cfg);
    if (sample->parsed()) return cmd_sample(cfg, steps, replicas, from_stationary);
    if (tv->parsed()) return cmd_tv_profile(cfg, cmin, cmax, cstep);
    if (lb->parsed()) return cmd_lower_bound(cfg, lb_c, lb_reps);
    if (fk->parsed()) {
        if (fk_k <= 0) fk_k = std::max(1, cfg.n / 10);
        if (fk_t <= 0) fk_t = std::max(1L, static_cast<long>(cfg.n / 10));
        return cmd_fk(cfg, fk_k, fk_t, fk_reps);
    }
    if (ops->parsed()) return cmd_ops(cfg, ops_op, ops_input);
    if (verify->parsed()) return vsuite::run_verify(quick);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const numeric_instability_error& e) {
        std::cerr << "numeric instability: " << e.what() << "\n";
        return 3;
    } catch (const periodicity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}
