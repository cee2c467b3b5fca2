#include "mink/config.hpp"
#include "mink/errors.hpp"
#include "mink/io.hpp"
#include "mink/kernel.hpp"
#include "mink/legendre.hpp"
#include "mink/parallel.hpp"
#include "mink/solver.hpp"
#include "mink/verify.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace mink;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kIdentityFail = 1, kPsdFail = 2, kNonconvergence = 3, kUsage = 64, kLevels = 65, kInternal = 70 };

std::uint64_t parse_seed(const std::string& s) {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw ConfigError("bad seed '" + s + "'");
    return v;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string radius_tag(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", r);
    return buf;
}

double max_error(const SolveResult& s, const BoundaryData& phi) {
    double e = 0;
    for (long i = 0; i < s.field.size(); ++i)
        if (s.field.mask[i]) e = std::max(e, std::abs(s.field.values[i] - phi.exact(s.field.position(i))));
    return e;
}

int cmd_identities(int n_min, int n_max, long trials, const std::string& seed, bool self_test, const std::string& out) {
    IdentityConfig cfg;
    cfg.n_min = n_min;
    cfg.n_max = n_max;
    cfg.trials = trials;
    cfg.seed = parse_seed(seed);
    cfg.self_test = self_test;
    if (trials == 0) std::cerr << "warning: trials = 0, nothing checked\n";
    JsonNumbers num;
    const auto res = trials == 0 ? std::vector<IdentityResult>{} : identity_suite(cfg);
    ojson j = identity_json(res, cfg, num);
    j["nonfinite_values"] = num.nonfinite;
    std::cout << j.dump(2) << '\n';
    if (!out.empty()) write_json_file(out, j);
    for (const auto& r : res)
        if (!r.pass) {
            std::cerr << "identity '" << r.name << "' failed: residual " << fmt17(r.max_residual) << " at n = " << r.witness_n
                      << "\n";
            return kIdentityFail;
        }
    return kPass;
}

int cmd_kernel_psd(int n, long trials, const std::string& seed, const std::string& out) {
    if (n < 3 || n > 8) throw ConfigError("kernel-psd: n must lie in [3, 8]");
    SamplerConfig cfg;
    cfg.n = n;
    cfg.samples = trials;
    cfg.seed = parse_seed(seed);
    const PsdReport psd = psd_certify(cfg);
    const InequalityReport ineq = inequality_certify(n, trials, cfg.seed);
    JsonNumbers num;
    ojson j = psd_json(psd, num);
    j["inequality"] = inequality_json(ineq, num);
    const bool psd_ok = psd.min_eig_S >= -1e-9 && psd.min_eig_R >= -1e-9;
    j["pass"] = psd_ok && ineq.pass();
    j["nonfinite_values"] = num.nonfinite;
    std::cout << j.dump(2) << '\n';
    const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    if (!out.empty()) {
        fs::create_directories(dir);
        write_json_file((dir / "kernel_psd.json").string(), j);
    }
    if (psd_ok && ineq.pass()) return kPass;
    fs::create_directories(dir);
    ojson w;
    w["n"] = n;
    w["seed"] = cfg.seed;
    if (!psd_ok) {
        w["lambda_S"] = num.vec(psd.argmin_S);
        w["pivot_S"] = psd.argmin_pivot_S;
        w["lambda_R"] = num.vec(psd.argmin_R);
        w["pivot_R"] = psd.argmin_pivot_R;
    }
    if (!ineq.pass()) {
        w["lambda"] = num.vec(ineq.witness_lambda);
        w["h"] = num.vec(ineq.witness_h);
    }
    write_json_file((dir / "kernel_psd_witness.json").string(), w);
    std::cerr << "violation found; witness written to " << (dir / "kernel_psd_witness.json").string() << "\n";
    return kPsdFail;
}

int cmd_solve(const std::string& config, const std::string& out, bool points) {
    const RunSpec spec = load_run_config(config);
    const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    fs::create_directories(dir);

    std::vector<SolveResult> results;
    std::string failure;
    try {
        results = continuation_solve(spec.phi, spec.solver);
    } catch (const EllipticityError& e) {
        failure = std::string(e.what()) + " (node " + std::to_string(e.node) + ")";
    } catch (const InitializationError& e) {
        failure = e.what();
    }

    JsonNumbers num;
    ojson log;
    log["generated_at"] = utc_now();
    log["config"] = config;
    log["n"] = spec.n;
    log["h"] = num(spec.solver.h);
    log["phi"] = spec.phi_json;
    log["phi_c1"] = num(spec.phi.c1);
    log["phi_c2"] = num(spec.phi.c2);
    ojson solves = ojson::array();
    std::vector<CurvatureReport> reports;
    bool ok = failure.empty() && results.size() == spec.solver.r_schedule.size();
    for (const auto& s : results) {
        ojson sj = solve_log_json(s, num);
        if (spec.phi.exact) sj["max_error_vs_closed_form"] = num(max_error(s, spec.phi));
        solves.push_back(sj);
        const std::string tag = radius_tag(s.r);
        {
            std::ofstream f(dir / ("field_r" + tag + ".csv"));
            write_field_csv(s.field, f);
        }
        ok = ok && s.converged;
        if (!s.converged) continue;
        {
            std::ofstream f(dir / ("cloud_r" + tag + ".csv"));
            write_cloud_csv(dual_field_to_primal_cloud(s.field), spec.n, f);
        }
        reports.push_back(verify_solution(s, spec.phi));
        ok = ok && reports.back().valid;
    }
    log["solves"] = solves;
    if (!failure.empty()) log["failure"] = failure;
    log["nonfinite_values"] = num.nonfinite;
    write_json_file((dir / "run_log.json").string(), log);

    JsonNumbers rnum;
    ojson rep;
    rep["phi"] = spec.phi_json;
    ojson rl = ojson::array();
    for (const auto& r : reports) rl.push_back(report_json(r, rnum, points));
    rep["reports"] = rl;
    if (reports.size() >= 2) rep["boundedness"] = stability_json(boundedness_track(reports), rnum);
    rep["all_converged"] = ok;
    rep["nonfinite_values"] = rnum.nonfinite;
    write_json_file((dir / "report.json").string(), rep);

    for (const auto& s : results)
        std::cout << "r = " << radius_tag(s.r) << ": " << (s.converged ? "converged" : "NOT converged") << " in "
                  << s.iterations() << " iterations, residual " << fmt17(s.final_residual()) << "\n";
    if (!failure.empty()) std::cerr << "solve failed: " << failure << "\n";
    return ok ? kPass : kNonconvergence;
}

int cmd_convergence(const std::string& config, const std::string& out) {
    const RunSpec spec = load_run_config(config);
    if (spec.h_schedule.size() < 3) {
        std::cerr << "convergence: need at least 3 grid levels in h_schedule\n";
        return kLevels;
    }
    if (!spec.phi.exact) throw ConfigError("convergence: phi has no closed-form solution (use kind 'hyperboloid')");
    JsonNumbers num;
    ojson levels = ojson::array();
    std::vector<double> hs, errs;
    for (double h : spec.h_schedule) {
        SolverConfig cfg = spec.solver;
        cfg.h = h;
        const SolveResult s = newton_solve(spec.phi, spec.convergence_r, cfg);
        if (!s.converged) {
            std::cerr << "convergence: solve at h = " << fmt17(h) << " did not converge\n";
            return kNonconvergence;
        }
        const double e = max_error(s, spec.phi);
        hs.push_back(h);
        errs.push_back(e);
        levels.push_back({{"h", num(h)}, {"iterations", s.iterations()}, {"max_error", num(e)}});
    }
    // least-squares slope of log(error) against log(h)
    double mx = 0, my = 0;
    const double m = static_cast<double>(hs.size());
    for (size_t i = 0; i < hs.size(); ++i) {
        mx += std::log(hs[i]) / m;
        my += std::log(errs[i]) / m;
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < hs.size(); ++i) {
        sxy += (std::log(hs[i]) - mx) * (std::log(errs[i]) - my);
        sxx += (std::log(hs[i]) - mx) * (std::log(hs[i]) - mx);
    }
    const double order = sxy / sxx;
    std::printf("%-24s %-24s %s\n", "h", "max_error", "order");
    for (size_t i = 0; i < hs.size(); ++i) {
        if (i == 0) {
            std::printf("%-24.17g %-24.17g -\n", hs[i], errs[i]);
        } else {
            const double p = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
            std::printf("%-24.17g %-24.17g %.4f\n", hs[i], errs[i], p);
            levels[i]["order"] = num(p);
        }
    }
    std::printf("fitted order %.4f (threshold %.4f)\n", order, spec.order_threshold);
    ojson j;
    j["n"] = spec.n;
    j["r"] = num(spec.convergence_r);
    j["levels"] = levels;
    j["fitted_order"] = num(order);
    j["threshold"] = num(spec.order_threshold);
    j["pass"] = order >= spec.order_threshold;
    j["nonfinite_values"] = num.nonfinite;
    if (!out.empty()) {
        fs::create_directories(fs::path(out).parent_path().empty() ? fs::path(".") : fs::path(out).parent_path());
        write_json_file(out, j);
    }
    return order >= spec.order_threshold ? kPass : kNonconvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sigma-cli: symmetric-function certification and constant sigma_{n-1} curvature solver"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: hardware concurrency)");

    std::string seed = "0xC0FFEE", out, config;
    int n_max = 12, n_min = 3, n = 4;
    long trials = 100000;
    bool self_test = false, points = false;

    auto* ids = app.add_subcommand("identities", "randomized identity suite");
    ids->add_option("--n-max", n_max, "largest n (<= 12)");
    ids->add_option("--n-min", n_min, "smallest n (>= 3)");
    ids->add_option("--trials", trials, "trials per identity and n");
    ids->add_option("--seed", seed, "64-bit seed, decimal or 0x-hex");
    ids->add_flag("--self-test", self_test, "corrupt one oracle; the run must fail");
    ids->add_option("--out", out, "also write the JSON summary to this file");

    auto* psd = app.add_subcommand("kernel-psd", "PSD certification of S and R plus the reduced inequality");
    psd->add_option("--n", n, "dimension, 3..8");
    psd->add_option("--trials", trials, "number of sampled lambda");
    psd->add_option("--seed", seed, "64-bit seed, decimal or 0x-hex");
    psd->add_option("--out", out, "directory for the report and any witness");

    auto* solve = app.add_subcommand("solve", "continuation solve of the dual Dirichlet problem");
    solve->add_option("--config", config, "JSON run configuration")->required();
    solve->add_option("--out", out, "output directory");
    solve->add_flag("--points", points, "include per-node records in report.json");

    auto* conv = app.add_subcommand("convergence", "grid refinement study against a closed-form solution");
    conv->add_option("--config", config, "JSON run configuration with h_schedule")->required();
    conv->add_option("--out", out, "write the order table as JSON to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return e.get_exit_code() == 0 ? rc : kUsage;
    }
    if (threads > 0) set_default_threads(threads);

    try {
        if (*ids) return cmd_identities(n_min, n_max, trials, seed, self_test, out);
        if (*psd) return cmd_kernel_psd(n, trials, seed, out);
        if (*solve) return cmd_solve(config, out, points);
        if (*conv) return cmd_convergence(config, out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const EllipticityError& e) {
        std::cerr << "error: " << e.what() << " (node " << e.node << ")\n";
        return kNonconvergence;
    } catch (const InitializationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNonconvergence;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
