#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "heatopt/config.hpp"
#include "heatopt/experiments.hpp"
#include "heatopt/selfcheck.hpp"

using namespace heatopt;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNotConverged = 3;

constexpr long kMaxControlCsvEntries = 2000000;

const char* kOutputRootEnv = "HEATOPT_OUTPUT_ROOT";

/// Flag name -> config key. Flags override config file values.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"example", "problem.example"},     {"M", "problem.M"},
    {"level", "problem.level"},         {"kind", "problem.kind"},
    {"alpha", "problem.alpha"},         {"tol-g", "solver.tol_g"},
    {"tol-s", "solver.tol_s"},          {"max-outer", "solver.max_outer"},
    {"max-inner", "solver.max_inner"},  {"out", "output.dir"},
    {"axis", "study.axis"},             {"levels", "study.levels"},
    {"start", "study.start"},           {"reference-depth", "study.reference_depth"},
    {"alphas", "ssc.alphas"},           {"grids", "ssc.grids"},
    {"eps-act", "ssc.eps_act_rel"},     {"minres-tol", "ssc.tol"},
    {"seed", "selfcheck.seed"},
};

const std::map<std::string, std::string> kFlagHelp = {
    {"example", "example1 | example2 | example3"},
    {"M", "number of time intervals"},
    {"level", "spatial level, 4 * 2^level squares per side"},
    {"kind", "variational | p0 | p1 | parameter"},
    {"alpha", "control cost, overrides the example value"},
    {"tol-g", "feasibility tolerance on |G(u(1))|"},
    {"tol-s", "stationarity tolerance"},
    {"max-outer", "augmented Lagrangian iterations"},
    {"max-inner", "Newton iterations per outer iteration"},
    {"out", "output directory, relative to $HEATOPT_OUTPUT_ROOT"},
    {"axis", "space | time"},
    {"levels", "count of levels, or an explicit comma separated list"},
    {"start", "first spatial level (space axis, default 2) or first M (time axis, default 16)"},
    {"reference-depth", "extra refinements of the fine-grid reference"},
    {"alphas", "comma separated control costs"},
    {"grids", "comma separated M:level pairs"},
    {"eps-act", "strong activity threshold relative to max |alpha q + B*z|"},
    {"minres-tol", "relative MINRES residual"},
    {"seed", "random seed"},
};

std::vector<std::string> known_keys() {
    std::vector<std::string> k;
    for (const auto& [flag, key] : kFlagKeys) k.push_back(key);
    return k;
}

/// Writes to two streams.
class TeeBuf : public std::streambuf {
public:
    TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

protected:
    int overflow(int c) override {
        if (c == EOF) return 0;
        const int r1 = a_->sputc(char(c)), r2 = b_->sputc(char(c));
        return r1 == EOF || r2 == EOF ? EOF : c;
    }
    int sync() override { return a_->pubsync() == 0 && b_->pubsync() == 0 ? 0 : -1; }

private:
    std::streambuf* a_;
    std::streambuf* b_;
};

struct Context {
    std::string command;
    KeyValueConfig cfg;
    bool self_check = false;
    bool quiet = false;

    std::string example() const { return cfg.get_string("problem.example").value_or("example1"); }
    int M() const { return cfg.get_int("problem.M").value_or(64); }
    int level() const { return cfg.get_int("problem.level").value_or(3); }

    ExampleConfig example_config() const {
        ExampleConfig c = heatopt::example_config(example());
        if (auto a = cfg.get_double("problem.alpha")) {
            if (!(*a > 0.0)) throw ConfigError("problem.alpha must be positive");
            c.alpha = *a;
        }
        return c;
    }

    ControlKind kind(const ExampleConfig& c) const {
        const auto k = cfg.get_string("problem.kind");
        return k ? parse_control_kind(*k) : c.default_kind;
    }

    SolverOptions solver() const {
        SolverOptions o;
        if (auto v = cfg.get_double("solver.tol_g")) o.tol_g = *v;
        if (auto v = cfg.get_double("solver.tol_s")) o.tol_s = *v;
        if (auto v = cfg.get_int("solver.max_outer")) o.max_outer = *v;
        if (auto v = cfg.get_int("solver.max_inner")) o.max_inner = *v;
        if (!(o.tol_g > 0.0) || !(o.tol_s > 0.0)) throw ConfigError("solver tolerances must be positive");
        if (o.max_outer < 1 || o.max_inner < 1) throw ConfigError("iteration limits must be positive");
        return o;
    }

    std::filesystem::path output_dir() const {
        const char* env = std::getenv(kOutputRootEnv);
        const std::filesystem::path root = env && *env ? env : ".";
        const auto dir = cfg.get_string("output.dir");
        if (!dir) return root / (command + "_" + example());
        const std::filesystem::path p(*dir);
        return p.is_absolute() ? p : root / p;
    }
};

void write_text(const std::filesystem::path& p, const std::string& s) {
    write_file_atomic(p.string(), [&](std::ostream& os) { os << s; });
}

void write_effective_config(const Context& ctx, const std::filesystem::path& dir) {
    std::ostringstream os;
    std::string section;
    for (const auto& [k, v] : ctx.cfg.values()) {
        const auto dot = k.find('.');
        const std::string s = k.substr(0, dot), key = k.substr(dot + 1);
        if (s != section) os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
        section = s;
        os << key << " = " << v << "\n";
    }
    write_text(dir / "config.txt", os.str());
}

int run_selfcheck_command(const Context& ctx) {
    SelfCheckOptions o;
    if (auto s = ctx.cfg.get_int("selfcheck.seed")) o.seed = unsigned(*s);
    if (auto m = ctx.cfg.get_int("problem.M")) o.M = *m;
    if (auto l = ctx.cfg.get_int("problem.level")) o.level = *l;
    const auto results = run_selfcheck(o);
    std::ostringstream os;
    write_selfcheck(os, results);
    std::cout << os.str();
    const auto dir = ctx.output_dir();
    write_text(dir / "selfcheck.txt", os.str());
    const bool ok = all_passed(results);
    std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
    return ok ? kOk : kCheckFailed;
}

int run_solve(const Context& ctx) {
    const ExampleConfig cfg = ctx.example_config();
    const int M = ctx.M(), level = ctx.level();
    if (M < 1) throw ConfigError("M must be positive");
    if (ctx.self_check) {
        SelfCheckOptions so;
        so.solves = false;
        const auto r = run_selfcheck(so);
        if (!all_passed(r)) {
            write_selfcheck(std::cerr, r);
            std::cerr << "self check failed, not solving\n";
            return kCheckFailed;
        }
    }
    const ProblemData pd = build_problem(cfg, M, level, ctx.kind(cfg));
    SolverOptions opts = ctx.solver();
    std::ostringstream log;
    TeeBuf tee(log.rdbuf(), std::cout.rdbuf());
    std::ostream log_stream(ctx.quiet ? static_cast<std::streambuf*>(log.rdbuf()) : &tee);
    opts.log = &log_stream;
    const SolveReport rep = solve(pd, opts);
    log_stream.flush();

    std::ostringstream report;
    report << "example = " << cfg.key << "\n"
           << "level = " << level << "\n"
           << "N = " << node_count(level) << "\n"
           << "alpha = " << std::setprecision(15) << cfg.alpha << "\n";
    write_report(report, rep);
    const long entries = long(rep.q.coeffs.rows()) * rep.q.coeffs.cols();
    report << "control_entries = " << entries << "\n";

    const auto dir = ctx.output_dir();
    write_effective_config(ctx, dir);
    write_text(dir / "report.txt", report.str());
    write_text(dir / "log.txt", log.str());
    write_file_atomic((dir / "history.csv").string(), [&](std::ostream& os) { write_history_csv(os, rep); });
    if (entries <= kMaxControlCsvEntries)
        write_file_atomic((dir / "control.csv").string(), [&](std::ostream& os) { write_control_csv(os, rep.q); });
    std::cout << report.str() << "artifacts = " << dir.string() << "\n";
    if (!rep.converged) {
        std::cerr << "not converged: " << rep.message << "\n";
        return kNotConverged;
    }
    return kOk;
}

int run_study(const Context& ctx) {
    const ExampleConfig cfg = ctx.example_config();
    StudyOptions o;
    o.axis = parse_axis(ctx.cfg.get_string("study.axis").value_or("space"));
    o.kind = ctx.kind(cfg);
    o.solver = ctx.solver();
    if (auto d = ctx.cfg.get_int("study.reference_depth")) o.reference_depth = *d;
    if (o.reference_depth < 1) throw ConfigError("study.reference_depth must be at least 1");
    if (!ctx.cfg.has("study.levels")) throw ConfigError("study needs --levels");
    const std::string levels = *ctx.cfg.get_string("study.levels");
    if (levels.find(',') != std::string::npos) {
        o.levels = *ctx.cfg.get_ints("study.levels");
    } else {
        const int n = *ctx.cfg.get_int("study.levels");
        const int start = ctx.cfg.get_int("study.start").value_or(o.axis == StudyAxis::Space ? 2 : 16);
        if (start < 0 || (o.axis == StudyAxis::Time && start < 1)) throw ConfigError("study.start out of range");
        for (int i = 0; i < n; ++i) o.levels.push_back(o.axis == StudyAxis::Space ? start + i : start << i);
    }
    if (o.levels.size() < 3) throw ConfigError("a study needs at least 3 levels for EOC columns");
    o.fixed = o.axis == StudyAxis::Space ? ctx.M() : ctx.level();

    const auto rows = convergence_study(cfg, o);
    const auto dir = ctx.output_dir();
    write_effective_config(ctx, dir);
    std::ostringstream csv;
    write_study_csv(csv, rows);
    write_text(dir / "study.csv", csv.str());
    write_file_atomic((dir / "study.svg").string(), [&](std::ostream& os) { write_study_svg(os, rows, o.axis); });
    std::cout << csv.str() << "artifacts = " << dir.string() << "\n";
    for (const auto& r : rows)
        if (!r.converged) {
            std::cerr << "not converged at M = " << r.M << ", level = " << r.level << "\n";
            return kNotConverged;
        }
    return kOk;
}

int run_ssc(const Context& ctx) {
    const ExampleConfig cfg = ctx.example_config();
    SscSweepOptions o;
    o.alphas = ctx.cfg.get_doubles("ssc.alphas").value_or(std::vector<double>{1.0, 0.1, 0.01, 0.001});
    if (auto g = ctx.cfg.get_string("ssc.grids")) {
        for (const auto& item : split_list(*g)) {
            int M = 0, level = 0;
            char extra = 0;
            if (std::sscanf(item.c_str(), "%d:%d%c", &M, &level, &extra) != 2)
                throw ConfigError("ssc.grids entries must read M:level, got '" + item + "'");
            o.grids.emplace_back(M, level);
        }
    } else {
        o.grids = {{ctx.M(), ctx.level()}};
    }
    if (ctx.cfg.has("problem.kind")) o.kind = ctx.kind(cfg);
    o.solver = ctx.solver();
    if (auto v = ctx.cfg.get_double("ssc.eps_act_rel")) o.ssc.eps_act_rel = *v;
    if (auto v = ctx.cfg.get_double("ssc.tol")) o.ssc.tol = *v;

    const auto cells = ssc_sweep(cfg, o);
    const auto dir = ctx.output_dir();
    write_effective_config(ctx, dir);
    std::ostringstream csv, table;
    write_ssc_csv(csv, cells);
    write_ssc_table(table, cells);
    write_text(dir / "ssc.csv", csv.str());
    write_text(dir / "ssc_table.txt", table.str());
    std::cout << table.str() << "artifacts = " << dir.string() << "\n";
    int status = kOk;
    for (const auto& c : cells) {
        if (c.ok && c.report.gamma <= 0.0) std::cout << "alpha = " << c.alpha << ", M = " << c.M << ": non-positive curvature\n";
        if (!c.error.empty()) {
            std::cerr << "alpha = " << c.alpha << ", M = " << c.M << ", level = " << c.level << ": " << c.error << "\n";
            status = kNotConverged;
        }
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-optimal control of the heat equation: solve, refinement studies, second order checks"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> opts;
    Context ctx;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file with [section] headers");
        for (const char* f : {"example", "M", "level", "kind", "alpha", "tol-g", "tol-s", "max-outer", "max-inner", "out"})
            opts[std::string(sub->get_name()) + f] = sub->add_option(std::string("--") + f, flags[f], kFlagHelp.at(f));
    };
    auto* solve_cmd = app.add_subcommand("solve", "solve one discrete problem");
    add_common(solve_cmd);
    solve_cmd->add_flag("--self-check", ctx.self_check, "run the derivative checks before solving");
    solve_cmd->add_flag("--quiet", ctx.quiet, "no per-iteration log on stdout");
    auto* study_cmd = app.add_subcommand("study", "refinement study with errors and EOC");
    add_common(study_cmd);
    for (const char* f : {"axis", "levels", "start", "reference-depth"})
        opts[std::string("study") + f] = study_cmd->add_option(std::string("--") + f, flags[f], kFlagHelp.at(f));
    auto* ssc_cmd = app.add_subcommand("ssc", "second order sufficient condition sweep");
    add_common(ssc_cmd);
    for (const char* f : {"alphas", "grids", "eps-act", "minres-tol"})
        opts[std::string("ssc") + f] = ssc_cmd->add_option(std::string("--") + f, flags[f], kFlagHelp.at(f));
    auto* check_cmd = app.add_subcommand("selfcheck", "finite difference and symmetry checks");
    add_common(check_cmd);
    opts["selfcheckseed"] = check_cmd->add_option("--seed", flags["seed"], kFlagHelp.at("seed"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kConfigError;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        ctx.command = sub->get_name();
        if (!config_path.empty()) ctx.cfg = KeyValueConfig::load(config_path);
        for (const auto& [flag, key] : kFlagKeys) {
            const auto it = opts.find(ctx.command + flag);
            if (it != opts.end() && it->second->count() > 0) ctx.cfg.set(key, flags[flag]);
        }
        ctx.cfg.require_known(known_keys());
        if (ctx.command == "solve") return run_solve(ctx);
        if (ctx.command == "study") return run_study(ctx);
        if (ctx.command == "ssc") return run_ssc(ctx);
        return run_selfcheck_command(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const StagnationError& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return kNotConverged;
    } catch (const DegenerateProblemError& e) {
        std::cerr << "degenerate problem: " << e.what() << "\n";
        return kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
}
