#include "mvbsde/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mvbsde/baselines.hpp"
#include "mvbsde/csv.hpp"
#include "mvbsde/evaluate.hpp"
#include "mvbsde/policy.hpp"
#include "mvbsde/presets.hpp"
#include "mvbsde/statedep.hpp"

namespace mvbsde {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Object view that rejects keys nobody asked for.
class Block {
public:
    Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("block '" + name_ + "' must be an object");
    }
    ~Block() = default;

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(name_ + "." + key + ": " + e.what());
        }
    }

    Block sub(const std::string& key) {
        seen_.insert(key);
        return Block(j_.at(key), name_ + "." + key);
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigError("unknown key '" + name_ + "." + item.key() + "'");
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void read_model(Block b, MarketModel& m) {
    std::string preset;
    b.read("preset", preset);
    if (preset == "problem_a") {
        m = problem_a();
    } else if (preset == "problem_b") {
        m = problem_b();
    } else if (preset == "problem_c") {
        double p = 0.5;
        b.read("p", p);
        m = problem_c(p);
    } else if (!preset.empty()) {
        throw ConfigError("unknown model preset '" + preset + "'");
    }
    b.read("a", m.ckls.a);
    b.read("b", m.ckls.b);
    b.read("sigma", m.ckls.sigma);
    b.read("p", m.ckls.p);
    b.read("r0_factor", m.ckls.r0_factor);
    b.read("r0", m.stock.r0);
    b.read("delta", m.stock.delta);
    b.read("alpha", m.stock.alpha);
    b.read("rho_corr", m.stock.rho_corr);
    b.read("ou_limit", m.stock.ou_limit);
    b.read("horizon", m.horizon);
    b.finish();
}

void read_preference(Block b, DiscountPreference& pref) {
    b.read("gamma", pref.gamma);
    if (b.has("rho")) {
        Block r = b.sub("rho");
        std::string kind = "constant";
        double value = 1.0, rate = 0.0;
        r.read("kind", kind);
        r.read("value", value);
        r.read("rate", rate);
        r.finish();
        if (kind == "constant") pref.rho = RhoWeight::constant(value);
        else if (kind == "exponential") pref.rho = RhoWeight::exponential(value, rate);
        else throw ConfigError("unknown rho kind '" + kind + "'");
    }
    if (b.has("eta")) {
        Block e = b.sub("eta");
        std::string kind = "zero";
        double scale = 1.0, rate = 0.0;
        e.read("kind", kind);
        e.read("scale", scale);
        e.read("rate", rate);
        e.finish();
        if (kind == "zero") pref.eta = EtaKernel::zero();
        else if (kind == "constant") pref.eta = EtaKernel::constant(scale);
        else if (kind == "exponential") pref.eta = EtaKernel::exponential(rate, scale);
        else throw ConfigError("unknown eta kind '" + kind + "'");
    }
    if (b.has("mu")) {
        Block u = b.sub("mu");
        std::string kind = "one";
        double rate = 0.0;
        u.read("kind", kind);
        u.read("rate", rate);
        u.finish();
        if (kind == "one") pref.mu = MuKernel::one();
        else if (kind == "exponential") pref.mu = MuKernel::exponential(rate);
        else throw ConfigError("unknown mu kind '" + kind + "'");
    }
    if (b.has("lambda_coef")) {
        if (b.has("eta") || b.has("mu")) throw ConfigError("lambda_coef cannot be combined with eta or mu");
        double c = 0.0;
        b.read("lambda_coef", c);
        pref.eta = EtaKernel::exponential(c);
        pref.mu = MuKernel::exponential(c);
    }
    b.finish();
}

void read_solver(Block b, ExperimentConfig& c) {
    b.read("N", c.n_steps);
    b.read("M", c.n_paths);
    b.read("K", c.solver.basis_size);
    b.read("I", c.solver.picard_iters);
    b.read("J", c.solver.layer_sweeps);
    b.read("tolerance", c.solver.tolerance);
    std::string point = "current", scheme = "euler";
    b.read("generator_point", point);
    b.read("scheme", scheme);
    b.finish();
    if (point == "current") c.solver.generator_point = GeneratorPoint::current;
    else if (point == "next") c.solver.generator_point = GeneratorPoint::next;
    else throw ConfigError("unknown generator_point '" + point + "'");
    if (scheme == "euler") c.scheme = FactorScheme::full_truncation_euler;
    else if (scheme == "exact_ou") c.scheme = FactorScheme::exact_ou;
    else throw ConfigError("unknown scheme '" + scheme + "'");
}

void read_experiment(Block b, ExperimentConfig& c) {
    b.read("trajectory", c.trajectory);
    b.read("w0", c.w0);
    b.read("policy", c.policy);
    b.read("lambda_coefs", c.lambda_coefs);
    b.finish();
    if (c.policy != "numerical" && c.policy != "analytic")
        throw ConfigError("experiment.policy must be 'numerical' or 'analytic'");
}

void read_statedep(Block b, StateDepSettings& s) {
    b.read("beta", s.beta);
    b.read("sigma", s.sigma);
    b.read("r0", s.r0);
    b.read("n_grid", s.n_grid);
    b.read("tolerance", s.tolerance);
    b.read("max_iter", s.max_iter);
    b.read("omega", s.omega);
    b.finish();
}

std::vector<std::string> required_blocks(const std::string& kind) {
    if (kind == "validate") return {"model", "preference"};
    if (kind == "simulate") return {"model", "solver"};
    if (kind == "statedep") return {"preference", "statedep"};
    return {"model", "preference", "solver"};
}

json rho_json(const RhoWeight& r) {
    if (r.kind == RhoWeight::Kind::constant) return {{"kind", "constant"}, {"value", r.value}};
    if (r.kind == RhoWeight::Kind::exponential) return {{"kind", "exponential"}, {"value", r.value}, {"rate", r.rate}};
    throw ConfigError("tabulated rho has no configuration form");
}

json eta_json(const EtaKernel& e) {
    switch (e.kind) {
        case EtaKernel::Kind::zero: return {{"kind", "zero"}};
        case EtaKernel::Kind::constant: return {{"kind", "constant"}, {"scale", e.scale}};
        case EtaKernel::Kind::exponential: return {{"kind", "exponential"}, {"scale", e.scale}, {"rate", e.rate}};
    }
    return {};
}

json mu_json(const MuKernel& m) {
    if (m.kind == MuKernel::Kind::one) return {{"kind", "one"}};
    return {{"kind", "exponential"}, {"rate", m.rate}};
}

json to_json(const ExperimentConfig& c) {
    const auto& m = c.model;
    json j;
    j["kind"] = c.kind;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["model"] = {{"a", m.ckls.a},           {"b", m.ckls.b},
                  {"sigma", m.ckls.sigma},   {"p", m.ckls.p},
                  {"r0_factor", m.ckls.r0_factor}, {"r0", m.stock.r0},
                  {"delta", m.stock.delta},  {"alpha", m.stock.alpha},
                  {"rho_corr", m.stock.rho_corr}, {"ou_limit", m.stock.ou_limit},
                  {"horizon", m.horizon}};
    j["preference"] = {{"gamma", m.pref.gamma},
                       {"rho", rho_json(m.pref.rho)},
                       {"eta", eta_json(m.pref.eta)},
                       {"mu", mu_json(m.pref.mu)}};
    j["solver"] = {{"N", c.n_steps},
                   {"M", c.n_paths},
                   {"K", c.solver.basis_size},
                   {"I", c.solver.picard_iters},
                   {"J", c.solver.layer_sweeps},
                   {"tolerance", c.solver.tolerance},
                   {"generator_point", c.solver.generator_point == GeneratorPoint::next ? "next" : "current"},
                   {"scheme", c.scheme == FactorScheme::exact_ou ? "exact_ou" : "euler"}};
    j["experiment"] = {{"trajectory", c.trajectory},
                       {"w0", c.w0},
                       {"policy", c.policy},
                       {"lambda_coefs", c.lambda_coefs}};
    j["statedep"] = {{"beta", c.statedep.beta},           {"sigma", c.statedep.sigma},
                     {"r0", c.statedep.r0},               {"n_grid", c.statedep.n_grid},
                     {"tolerance", c.statedep.tolerance}, {"max_iter", c.statedep.max_iter},
                     {"omega", c.statedep.omega}};
    return j;
}

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Pipeline state shared by the kinds.
struct Run {
    const ExperimentConfig& cfg;
    fs::path dir;
    std::vector<std::string> files;
    bool converged = true;

    std::string file(const std::string& name) {
        files.push_back(name);
        return (dir / name).string();
    }

    TimeGrid grid() const { return TimeGrid(cfg.n_steps, cfg.model.horizon); }

    PathEnsemble ensemble() const {
        return simulate_factor(cfg.model, grid(), cfg.n_paths, cfg.seed, cfg.solver.threads, cfg.scheme);
    }

    std::shared_ptr<const BsdeSolution> solve(const PathEnsemble& ens) {
        auto sol = std::make_shared<const BsdeSolution>(solve_bsde(mv_generator(cfg.model, ens.grid), ens, cfg.solver));
        converged = converged && sol->converged();
        return sol;
    }

    PolicyField numerical(std::shared_ptr<const BsdeSolution> sol) const {
        return equilibrium_policy(cfg.model, MyopicCoefficient::closed_form(cfg.model.pref, cfg.model.horizon),
                                  std::move(sol));
    }

    std::vector<double> trajectory(const PathEnsemble& ens) const {
        if (cfg.trajectory >= ens.n_paths) throw ConfigError("experiment.trajectory exceeds the number of paths");
        std::vector<double> r(ens.grid.n_steps() + 1);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = ens.factor(cfg.trajectory, i);
        return r;
    }
};

void write_diagnostics(const BsdeSolution& sol, const std::string& path) {
    CsvWriter csv(path, {"t_idx", "sweeps", "last_delta", "converged", "rank", "condition"});
    for (const auto& d : sol.diagnostics())
        csv.field(static_cast<long long>(d.t_idx))
            .field(static_cast<long long>(d.sweeps))
            .field(d.last_delta)
            .field(static_cast<long long>(d.converged))
            .field(static_cast<long long>(d.rank))
            .field(d.condition)
            .end_row();
}

void write_validation(const ValidationReport& rep, const std::string& path) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", c.value},
                          {"bound", std::isfinite(c.bound) ? json(c.bound) : json("inf")},
                          {"note", c.note}});
    json j = {{"ok", rep.ok()}, {"beta", rep.beta}, {"lambda_bound", rep.lambda_bound}, {"checks", checks}};
    std::ofstream(path) << j.dump(2) << '\n';
}

void execute(Run& run) {
    const auto& cfg = run.cfg;
    const auto& kind = cfg.kind;
    if (kind == "statedep") {
        StateDepProblem p;
        const auto& sd = cfg.statedep;
        p.beta = [b = sd.beta](double) { return b; };
        p.sigma = [s = sd.sigma](double) { return s; };
        p.r0 = sd.r0;
        p.gamma = cfg.model.pref.gamma;
        p.rho = [rho = cfg.model.pref.rho](double s) { return rho(s); };
        p.lambda = [pref = cfg.model.pref, T = cfg.model.horizon](double s, double tau) { return pref.lambda(s, tau, T); };
        p.horizon = cfg.model.horizon;
        p.n_grid = sd.n_grid;
        write_phi_csv(solve_phi(p, sd.tolerance, sd.max_iter, sd.omega), run.file("phi.csv"));
        return;
    }
    if (kind == "simulate") {
        write_paths_csv(run.ensemble(), run.file("paths.csv"));
        return;
    }
    if (kind == "discount-study") {
        DiscountStudyConfig dc;
        dc.n_steps = cfg.n_steps;
        dc.n_paths = cfg.n_paths;
        dc.seed = cfg.seed;
        dc.solver = cfg.solver;
        write_discount_csv(discount_study(cfg.model, cfg.lambda_coefs, dc), run.file("discount_study.csv"));
        return;
    }
    const PathEnsemble ens = run.ensemble();
    auto sol = run.solve(ens);
    if (kind == "solve-bsde") {
        write_coefficients_csv(*sol, run.file("coefficients.csv"));
        write_diagnostics(*sol, run.file("diagnostics.csv"));
        return;
    }
    const PolicyField numerical = run.numerical(sol);
    if (kind == "policy") {
        write_policy_curves_csv(numerical, run.trajectory(ens), run.file("policy_curves.csv"));
        return;
    }
    if (kind == "evaluate") {
        const PolicyField policy = cfg.policy == "analytic"
                                       ? analytic_policy(AnalyticBaseline::for_model(cfg.model), ens.grid)
                                       : numerical;
        auto w = simulate_wealth(cfg.model, ens, policy, cfg.w0, cfg.solver.threads);
        write_objective_csv({estimate_objective(w, cfg.model.pref.gamma)}, run.file("objective_curves.csv"));
        return;
    }
    if (kind == "compare") {
        const AnalyticBaseline baseline = AnalyticBaseline::for_model(cfg.model);
        const PolicyField analytic = analytic_policy(baseline, ens.grid);
        const auto traj = run.trajectory(ens);
        write_policy_curves_csv(numerical, traj, run.file("policy_curves.csv"));
        write_baseline_csv(baseline, ens.grid, traj, run.file("baseline_curves.csv"));
        std::vector<ObjectiveEstimate> est;
        for (const PolicyField* p : {&numerical, &analytic})
            est.push_back(estimate_objective(simulate_wealth(cfg.model, ens, *p, cfg.w0, cfg.solver.threads),
                                             cfg.model.pref.gamma));
        write_objective_csv(est, run.file("objective_curves.csv"));
        return;
    }
    throw ConfigError("unknown experiment kind '" + kind + "'");
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig parse_config(const std::string& text, const std::string& kind,
                              std::optional<std::uint64_t> seed_override) {
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw ConfigError("unknown experiment kind '" + kind + "'");
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Block root(doc, "config");
    ExperimentConfig c;
    c.kind = kind;
    std::string doc_kind = kind;
    root.read("kind", doc_kind);
    if (doc_kind != kind) throw ConfigError("config kind '" + doc_kind + "' does not match '" + kind + "'");
    if (!doc.contains("seed") && !seed_override) throw ConfigError("seed is mandatory");
    root.read("seed", c.seed);
    if (seed_override) c.seed = *seed_override;
    root.read("output_dir", c.output_dir);
    for (const auto& name : required_blocks(kind))
        if (!doc.contains(name)) throw ConfigError("kind '" + kind + "' needs a '" + name + "' block");
    if (doc.contains("model")) read_model(root.sub("model"), c.model);
    if (doc.contains("preference")) read_preference(root.sub("preference"), c.model.pref);
    if (doc.contains("solver")) read_solver(root.sub("solver"), c);
    if (doc.contains("experiment")) read_experiment(root.sub("experiment"), c);
    if (doc.contains("statedep")) read_statedep(root.sub("statedep"), c.statedep);
    root.finish();
    try {
        c.solver.validate();
        if (kind != "statedep") check_invariants(c.model);
        TimeGrid(c.n_steps, c.model.horizon);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.n_paths == 0) throw ConfigError("solver.M must be positive");
    return c;
}

std::string canonical_json(const ExperimentConfig& config) { return to_json(config).dump(); }

RunResult run_experiment(const std::string& kind, const std::string& config_path, const RunOptions& options) {
    RunResult result;
    ExperimentConfig cfg;
    try {
        cfg = parse_config(read_file(config_path), kind, options.seed);
    } catch (const ConfigError& e) {
        result.exit_code = 1;
        result.message = e.what();
        return result;
    }
    if (options.out) cfg.output_dir = *options.out;
    cfg.solver.threads = options.threads;

    // The hash ignores the output location so that the same experiment maps to the same name.
    json canon = to_json(cfg);
    json hashed = canon;
    hashed.erase("output_dir");
    char name[64];
    std::snprintf(name, sizeof name, "%s-%016llx", kind.c_str(),
                  static_cast<unsigned long long>(fnv1a(hashed.dump())));
    const fs::path dir = fs::path(cfg.output_dir) / name;
    result.output_dir = dir.string();

    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    Run run{cfg, dir, {}, true};
    try {
        fs::create_directories(dir);
        if (kind != "statedep") {
            ValidationReport rep = validate_model(cfg.model);
            if (kind == "validate") write_validation(rep, run.file("validation.json"));
            if (!rep.ok()) {
                result.exit_code = 1;
                result.message = "model validation failed\n" + rep.to_string();
            } else if (kind == "validate") {
                result.message = rep.to_string();
            }
        }
        if (result.exit_code == 0 && kind != "validate") execute(run);
        if (!run.converged) {
            result.exit_code = 2;
            result.message = "BSDE layer sweeps did not reach the tolerance; see diagnostics";
        }
    } catch (const ConfigError& e) {
        result.exit_code = 1;
        result.message = e.what();
    } catch (const std::invalid_argument& e) {
        result.exit_code = 1;
        result.message = e.what();
    } catch (const std::domain_error& e) {
        result.exit_code = 1;
        result.message = e.what();
    } catch (const StateDepError& e) {
        result.exit_code = 2;
        result.message = e.what();
    } catch (const SolverError& e) {
        result.exit_code = 2;
        result.message = e.what();
    }

    json manifest = {{"config", canon},
                     {"seed", cfg.seed},
                     {"version", MVBSDE_VERSION},
                     {"started_at", started},
                     {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                     {"files", run.files},
                     {"exit_code", result.exit_code}};
    if (fs::exists(dir)) {
        std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
        run.files.push_back("manifest.json");
    }
    result.files = run.files;
    return result;
}

}  // namespace mvbsde
