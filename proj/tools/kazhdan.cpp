#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kazhdan/certify.hpp"
#include "kazhdan/chevalley.hpp"
#include "kazhdan/elements.hpp"
#include "kazhdan/replicate.hpp"
#include "kazhdan/rootsys.hpp"
#include "kazhdan/sos.hpp"

using namespace kazhdan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit : int {
    ok = 0,
    usage = 1,
    solver_failed = 2,
    certification_failed = 3,
    resource = 4,
    io = 5,
    verify_failed = 6,
    internal = 7,
};

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON lines to a file, a plain mirror on stderr.
class Log {
public:
    void open(const fs::path& path) {
        fs::create_directories(path.parent_path());
        file_.open(path, std::ios::app);
        if (!file_) throw IoError("cannot open log " + path.string());
    }
    void quiet(bool q) { quiet_ = q; }

    void event(const std::string& name, json fields = json::object(), const std::string& human = "") {
        fields["event"] = name;
        fields["time"] = std::time(nullptr);
        if (file_) file_ << fields.dump() << "\n" << std::flush;
        if (!quiet_) std::cerr << "[" << name << "] " << (human.empty() ? fields.dump() : human) << "\n";
    }

private:
    std::ofstream file_;
    bool quiet_ = false;
};

Log logger;

struct Common {
    std::string cache_dir;
    bool no_cache = false;
    int jobs = 1;
    std::string config;
    bool quiet = false;

    std::optional<fs::path> cache() const {
        if (no_cache) return std::nullopt;
        return resolve_cache_dir(cache_dir);
    }
};

struct SolveArgs {
    char family = 'A';
    int rank = 2;
    std::string target = "delta_sq";
    int R = 2;
    std::string solver = "ipm";
    double tol = 1e-9;
    double gap_tol = 1e-8;
    int max_iter = 100000;
    double time_limit = 0.0;
    double checkpoint_interval = 300.0;
    bool symmetry = true;
    std::string output;
    int k = 30;
};

// Keys a config file may set for solve; anything else is rejected.
const std::set<std::string> solve_keys = {"radius", "target", "solver", "tol", "gap_tol", "max_iter", "time_limit",
                                          "checkpoint_interval", "symmetry", "output", "cache_dir", "jobs",
                                          "no_cache", "denominator_bits"};
const std::set<std::string> report_keys = {"constants", "only", "n_max", "certificates", "override", "output",
                                           "cache_dir", "no_cache"};

json read_config(const std::string& path, const std::set<std::string>& allowed) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("malformed config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw UsageError("unknown config key '" + k + "'");
    return j;
}

template <typename T>
void from_config(const json& cfg, const char* key, const CLI::Option* flag, T& value) {
    if (!cfg.contains(key) || (flag && flag->count() > 0)) return;
    try {
        value = cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
}

char parse_family(const std::string& s) {
    if (s.size() != 1 || std::string("ABCDEFG").find(s[0]) == std::string::npos)
        throw UsageError("family must be one of A B C D E F G");
    return s[0];
}

int cmd_roots(const std::string& family, int rank, bool as_json) {
    const auto omega = build_root_system(parse_family(family), rank);
    const auto planes = admissible_planes(omega);
    std::map<std::string, int> census;
    for (PlaneType t : {PlaneType::A1xA1, PlaneType::A1xC1, PlaneType::A2, PlaneType::C2, PlaneType::G2}) census[to_string(t)] = 0;
    for (const auto& p : planes) ++census[to_string(p.plane_type)];
    json incidence = json::array();
    std::set<std::int64_t> seen;
    for (int a = 0; a < static_cast<int>(omega.size()); ++a) {
        const auto& r = omega.roots[static_cast<std::size_t>(a)];
        if (!seen.insert(r.squared_length).second) continue;
        json row = {{"root", std::vector<std::int64_t>(r.coords.data(), r.coords.data() + r.coords.size())},
                    {"squared_length", r.squared_length},
                    {"long", omega.is_long(a)}};
        for (const auto& [t, c] : plane_incidence(omega, planes, a)) row["planes"][to_string(t)] = c;
        incidence.push_back(row);
    }
    const int g = gamma(omega);
    json out = to_json(omega);
    out["plane_census"] = census;
    out["gamma"] = g;
    out["incidence"] = incidence;
    if (planes.empty()) out["note"] = "no admissible planes";
    if (as_json) {
        std::cout << out.dump(2) << "\n";
        return ok;
    }
    std::cout << omega.name() << ": " << omega.size() << " roots in dimension " << omega.ambient_dim << "\n";
    std::cout << "planes:";
    for (const auto& [t, c] : census) std::cout << " " << t << "=" << c;
    std::cout << "\ngamma = " << g << "\n";
    if (planes.empty()) std::cout << "no admissible planes\n";
    for (const auto& row : incidence) {
        if (seen.size() > 1) std::cout << (row["long"].get<bool>() ? "long " : "short ");
        std::cout << "root " << row["root"].dump() << ":";
        if (row.contains("planes"))
            for (const auto& [t, c] : row["planes"].items()) std::cout << " " << t << "=" << c.get<int>();
        std::cout << "\n";
    }
    return ok;
}

fs::path output_dir(const std::string& explicit_dir, const Common& common) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const auto c = common.cache()) return *c / "certificates";
    return "certificates";
}

SOSProblem build_problem(const SolveArgs& a, const Common& common) {
    if (a.family != 'A' && a.family != 'C')
        throw UnsupportedRealization("solve needs family A or C (Steinberg matrices exist only for these)");
    const Target target = target_from_string(a.target);
    const auto gens = steinberg_generators(a.family, a.rank);
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = make_context(gens, a.R, common.cache());
    const auto x = target_element(target, gens, ctx);
    const auto delta = laplacian(ctx);
    SOSProblem p = formulate(x, delta, a.R);
    logger.event("problem", problem_summary(p),
                 gens.system.name() + " " + a.target + " R=" + std::to_string(a.R) + ": |Ball(R)| = " + std::to_string(p.n) +
                     ", " + std::to_string(p.n_constraints) + " constraints, built in " +
                     std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    return p;
}

void apply_solve_config(SolveArgs& a, Common& common, CLI::App& sub) {
    const json cfg = read_config(common.config, solve_keys);
    from_config(cfg, "radius", sub.get_option("--radius"), a.R);
    from_config(cfg, "target", sub.get_option("--target"), a.target);
    from_config(cfg, "solver", sub.get_option("--solver"), a.solver);
    from_config(cfg, "tol", sub.get_option("--tol"), a.tol);
    from_config(cfg, "gap_tol", sub.get_option("--gap-tol"), a.gap_tol);
    from_config(cfg, "max_iter", sub.get_option("--max-iter"), a.max_iter);
    from_config(cfg, "time_limit", sub.get_option("--time-limit"), a.time_limit);
    from_config(cfg, "checkpoint_interval", sub.get_option("--checkpoint-interval"), a.checkpoint_interval);
    from_config(cfg, "output", sub.get_option("--output"), a.output);
    from_config(cfg, "denominator_bits", sub.get_option("--denominator-bits"), a.k);
    from_config(cfg, "cache_dir", sub.get_option("--cache-dir"), common.cache_dir);
    from_config(cfg, "jobs", sub.get_option("--jobs"), common.jobs);
    from_config(cfg, "no_cache", sub.get_option("--no-cache"), common.no_cache);
    bool no_sym = !a.symmetry;
    if (cfg.contains("symmetry") && sub.get_option("--no-symmetry")->count() == 0) {
        from_config(cfg, "symmetry", nullptr, a.symmetry);
        no_sym = !a.symmetry;
    }
    a.symmetry = !no_sym;
    if (a.solver != "ipm") throw UsageError("unknown solver '" + a.solver + "' (available: ipm)");
    if (a.R < 1) throw UsageError("radius must be at least 1");
    if (a.tol <= 0 || a.gap_tol <= 0) throw UsageError("tolerances must be positive");
    if (common.jobs < 1) throw UsageError("--jobs must be at least 1");
    target_from_string(a.target);
}

json run_config_json(const SolveArgs& a, const Common& common) {
    return {{"family", std::string(1, a.family)}, {"rank", a.rank}, {"target", a.target}, {"radius", a.R},
            {"solver", a.solver}, {"tol", a.tol}, {"gap_tol", a.gap_tol}, {"max_iter", a.max_iter},
            {"time_limit", a.time_limit}, {"symmetry", a.symmetry}, {"denominator_bits", a.k},
            {"no_cache", common.no_cache}};
}

int cmd_solve(SolveArgs a, Common common) {
    const fs::path out = output_dir(a.output, common);
    fs::create_directories(out);
    logger.open(out / "log.jsonl");
    logger.event("start", {{"command", "solve"}, {"config", run_config_json(a, common)}},
                 std::string("solve ") + a.family + std::to_string(a.rank) + " " + a.target + " R=" + std::to_string(a.R));

    const SOSProblem p = build_problem(a, common);
    SolverConfig sc;
    sc.tol = a.tol;
    sc.gap_tol = a.gap_tol;
    sc.max_iter = a.max_iter;
    sc.time_limit_sec = a.time_limit;
    sc.use_symmetry = a.symmetry;
    sc.jobs = common.jobs;
    const std::string stem = std::string(1, a.family) + std::to_string(a.rank) + "-" + a.target + "-R" + std::to_string(a.R);
    const fs::path ckpt = out / ("checkpoint-" + stem + ".json");
    sc.checkpoint = ckpt;
    sc.checkpoint_interval_sec = a.checkpoint_interval;
    if (!common.no_cache && fs::exists(ckpt)) {
        sc.resume = ckpt;
        logger.event("resume", {{"checkpoint", ckpt.string()}}, "resuming from " + ckpt.string());
    }
    sc.on_iteration = [](const IterationLog& it) {
        if (it.iteration % 5 != 0) return;
        char buf[160];
        std::snprintf(buf, sizeof buf, "it %3d  lambda %.9f  dual %.9f  mu %.2e  pinf %.2e  dinf %.2e  %.1fs", it.iteration,
                      it.lambda, it.dual_objective, it.mu, it.primal_residual, it.dual_residual, it.seconds);
        logger.event("iteration",
                     {{"iteration", it.iteration}, {"lambda", it.lambda}, {"dual_objective", it.dual_objective},
                      {"mu", it.mu}, {"primal_residual", it.primal_residual}, {"dual_residual", it.dual_residual},
                      {"seconds", it.seconds}},
                     buf);
    };
    const NumericSolution sol = solve(p, sc);
    logger.event("solved",
                 {{"status", to_string(sol.status)}, {"lambda", sol.lambda}, {"iterations", sol.stats.iterations},
                  {"seconds", sol.stats.seconds}, {"message", sol.stats.message}},
                 std::string(to_string(sol.status)) + ", lambda = " + std::to_string(sol.lambda) + " after " +
                     std::to_string(sol.stats.iterations) + " iterations (" + sol.stats.message + ")");
    if (sol.status != SolverStatus::optimal && sol.status != SolverStatus::near_optimal)
        throw SolverFailure(std::string("solver finished with status ") + to_string(sol.status) + ": " + sol.stats.message);

    CertifyConfig cc;
    cc.k = a.k;
    const Certificate cert = certify(p, sol, a.target, cc, {{"config", run_config_json(a, common)}});
    const fs::path path = write_certificate(cert, out);
    const VerifyReport rep = verify(read_certificate(path, common.cache()));
    logger.event("certified",
                 {{"certificate", path.string()},
                  {"lambda_rounded", cert.lambda_rounded.get_str()},
                  {"lambda_certified", cert.lambda_certified.get_str()},
                  {"lambda_certified_decimal", cert.lambda_certified.get_d()},
                  {"residual_l1", cert.residual_l1.get_d()},
                  {"epsilon", cert.epsilon.get_d()},
                  {"kappa_lb", cert.kappa_lb},
                  {"replay_ok", rep.ok}},
                 "certificate " + path.string());
    if (fs::exists(ckpt)) fs::remove(ckpt), fs::remove(fs::path(ckpt.string() + ".bin"));
    std::printf("group            %s (|S| = %d)\n", cert.group.c_str(), cert.s_size);
    std::printf("target           %s, R = %d\n", cert.target_name.c_str(), cert.R);
    std::printf("lambda (solver)  %.9f\n", sol.lambda);
    std::printf("residual l1      %.3e\n", cert.residual_l1.get_d());
    std::printf("PSD shift        %.3e\n", cert.epsilon.get_d());
    std::printf("lambda certified %.9f\n", cert.lambda_certified.get_d());
    std::printf("kappa >=         %.9f\n", cert.kappa_lb);
    std::printf("certificate      %s\n", path.c_str());
    if (!rep.ok) return verify_failed;
    return ok;
}

int cmd_export(SolveArgs a, Common common, const std::string& path) {
    const SOSProblem p = build_problem(a, common);
    export_problem(p, path);
    std::cout << "wrote " << path << " (" << p.n << "x" << p.n << " block, " << p.n_constraints << " group elements)\n";
    return ok;
}

int cmd_verify(const std::vector<std::string>& paths, const Common& common, bool as_json) {
    bool all = true;
    json out = json::array();
    for (const auto& path : paths) {
        const Certificate cert = read_certificate(path, common.cache());
        const VerifyReport rep = verify(cert);
        all = all && rep.ok;
        json checks = json::object();
        for (const auto& [name, pass] : rep.checks) checks[name] = pass;
        out.push_back({{"certificate", path},
                       {"ok", rep.ok},
                       {"checks", checks},
                       {"lambda_certified", cert.lambda_certified.get_str()},
                       {"kappa_lb", cert.kappa_lb}});
        if (as_json) continue;
        std::cout << path << ": " << (rep.ok ? "OK" : "FAILED") << "\n";
        for (const auto& [name, pass] : rep.checks) std::cout << "  [" << (pass ? "pass" : "FAIL") << "] " << name << "\n";
        std::printf("  %s %s R=%d: lambda >= %.9f, kappa >= %.9f\n", cert.group.c_str(), cert.target_name.c_str(), cert.R,
                    cert.lambda_certified.get_d(), cert.kappa_lb);
    }
    if (as_json) std::cout << out.dump(2) << "\n";
    return all ? ok : verify_failed;
}

struct ReportArgs {
    std::string constants;
    std::string only;
    int n_max = 20;
    std::string certificates;
    bool override_constants = false;
    std::string output;
};

int cmd_report(ReportArgs a, Common common, CLI::App& sub) {
    const json cfg = read_config(common.config, report_keys);
    from_config(cfg, "constants", sub.get_option("--constants"), a.constants);
    from_config(cfg, "only", sub.get_option("--only"), a.only);
    from_config(cfg, "n_max", sub.get_option("--n-max"), a.n_max);
    from_config(cfg, "certificates", sub.get_option("--certificates"), a.certificates);
    from_config(cfg, "override", sub.get_option("--override"), a.override_constants);
    from_config(cfg, "output", sub.get_option("--output"), a.output);
    from_config(cfg, "cache_dir", sub.get_option("--cache-dir"), common.cache_dir);
    from_config(cfg, "no_cache", sub.get_option("--no-cache"), common.no_cache);

    Constants c = load_constants(a.constants.empty() ? default_constants_path() : fs::path(a.constants));
    std::optional<fs::path> certs;
    if (!a.certificates.empty()) certs = a.certificates;
    else if (const auto cache = common.cache()) certs = *cache / "certificates";
    if (certs) {
        for (const auto& h : apply_certificates(c, *certs, a.override_constants))
            std::cerr << "[certificate] using " << h << "\n";
    }
    TableOptions opt;
    opt.n_max = a.n_max;
    if (!a.only.empty()) opt.only = parse_family(a.only);
    if (opt.n_max < 2) throw UsageError("--n-max must be at least 2");
    const Report rep = render_tables(table_bounds(c, opt), c);
    std::cout << rep.text;
    if (!a.output.empty()) {
        std::ofstream f(a.output);
        if (!f) throw IoError("cannot write " + a.output);
        f << rep.json.dump(2) << "\n";
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified lower bounds for Kazhdan constants of Chevalley groups over Z"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--cache-dir", common.cache_dir, "Cache directory (default: $KAZHDAN_CACHE_DIR)");
        s->add_flag("--no-cache", common.no_cache, "Ignore caches, checkpoints and stored certificates");
        s->add_option("--jobs", common.jobs, "Worker threads");
        s->add_option("--config", common.config, "JSON config file; unknown keys are rejected");
    };

    std::string family;
    int rank = 0;
    bool as_json = false;
    auto* roots = app.add_subcommand("roots", "Root list, plane census, gamma and incidence counts");
    roots->add_option("family", family, "A..G")->required();
    roots->add_option("rank", rank)->required();
    roots->add_flag("--json", as_json);

    SolveArgs sa;
    std::string fam_s;
    auto add_problem = [&](CLI::App* s) {
        s->add_option("family", fam_s, "A or C")->required();
        s->add_option("rank", sa.rank)->required();
        s->add_option("--target", sa.target, "delta_sq | adj | levels23");
        s->add_option("-R,--radius", sa.R, "Word-length radius");
        s->add_flag("--no-symmetry", [&](std::int64_t) { sa.symmetry = false; }, "Disable orbit reduction");
        add_common(s);
    };
    auto* solve_cmd = app.add_subcommand("solve", "Solve, certify and write a certificate");
    add_problem(solve_cmd);
    solve_cmd->add_option("--solver", sa.solver, "Only 'ipm'");
    solve_cmd->add_option("--tol", sa.tol, "Relative feasibility tolerance");
    solve_cmd->add_option("--gap-tol", sa.gap_tol, "Relative duality gap tolerance");
    solve_cmd->add_option("--max-iter", sa.max_iter);
    solve_cmd->add_option("--time-limit", sa.time_limit, "Seconds; 0 disables");
    solve_cmd->add_option("--checkpoint-interval", sa.checkpoint_interval, "Seconds between checkpoints");
    solve_cmd->add_option("--denominator-bits", sa.k, "Gram entries are rounded to multiples of 2^-k");
    solve_cmd->add_option("--output", sa.output, "Certificate directory");
    solve_cmd->add_flag("--quiet", common.quiet);

    std::string export_path;
    auto* export_cmd = app.add_subcommand("export", "Write the SDP in SDPA sparse format");
    add_problem(export_cmd);
    export_cmd->add_option("--output", export_path, "Output .dat-s file")->required();

    std::vector<std::string> cert_paths;
    auto* verify_cmd = app.add_subcommand("verify", "Re-verify certificates from file");
    verify_cmd->add_option("certificates", cert_paths)->required();
    verify_cmd->add_flag("--json", as_json);
    verify_cmd->add_option("--cache-dir", common.cache_dir);
    verify_cmd->add_flag("--no-cache", common.no_cache);

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Regenerate the tables of family bounds");
    report->add_option("--constants", ra.constants, "Constants file");
    report->add_option("--only", ra.only, "One family (B and C go together)");
    report->add_option("--n-max", ra.n_max, "Largest rank in family rows");
    report->add_option("--certificates", ra.certificates, "Directory of certificates to use");
    report->add_flag("--override", ra.override_constants, "Use certificates even when their lambda is larger");
    report->add_option("--output", ra.output, "Also write the JSON report here");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        logger.quiet(common.quiet);
        if (*roots) return cmd_roots(family, rank, as_json);
        if (*solve_cmd || *export_cmd) {
            CLI::App& sub = *solve_cmd ? *solve_cmd : *export_cmd;
            sa.family = parse_family(fam_s);
            if (*solve_cmd) {
                apply_solve_config(sa, common, sub);
                return cmd_solve(sa, common);
            }
            const json cfg = read_config(common.config, solve_keys);
            from_config(cfg, "radius", sub.get_option("--radius"), sa.R);
            from_config(cfg, "target", sub.get_option("--target"), sa.target);
            return cmd_export(sa, common, export_path);
        }
        if (*verify_cmd) return cmd_verify(cert_paths, common, as_json);
        if (*report) return cmd_report(ra, common, *report);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const UnsupportedRealization& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return solver_failed;
    } catch (const CertificationError& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return certification_failed;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return resource;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal;
    }
    return usage;
}
