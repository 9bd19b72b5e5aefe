#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "heatopt/experiments.hpp"
#include "heatopt/selfcheck.hpp"

using namespace heatopt;

namespace {

/// Grid sizes per criterion; the quick plan keeps every criterion under a minute.
struct Plan {
    std::vector<int> ex1_space_levels;
    int ex1_space_M;
    std::vector<int> ex1_time_M;
    int ex1_time_level;
    int fixed_M, fixed_level;  ///< criteria 2 and 3
    std::vector<int> ex3_levels;
    int ex3_M, ex3_depth;
    int ssc_M, ssc_level;
    int curv_M, curv_level;
};

const Plan kFull{{2, 3, 4, 5}, 512, {16, 32, 64, 128, 256, 512}, 5, 320, 3, {0, 1, 2}, 40, 2, 160, 3, 20, 1};
const Plan kQuick{{1, 2, 3}, 64, {8, 16, 32}, 3, 40, 1, {0, 1, 2}, 10, 1, 20, 1, 20, 1};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

/// Every solve the run performs, for the feasibility criterion.
struct Ledger {
    int runs = 0;
    double worst_g = 0.0;
    void add(bool converged, double g) {
        if (!converged) return;
        ++runs;
        worst_g = std::max(worst_g, std::abs(g));
    }
};

double last_eoc(const std::vector<StudyRow>& rows, double ratio, double (*err)(const StudyRow&)) {
    const std::size_t n = rows.size();
    return compute_eoc({err(rows[n - 2]), err(rows[n - 1])}, ratio)[0];
}

Verdict example1_rates(const Plan& p, Ledger& led) {
    const ExampleConfig cfg = example_config("example1");
    StudyOptions o;
    o.kind = cfg.default_kind;
    o.axis = StudyAxis::Space;
    o.levels = p.ex1_space_levels;
    o.fixed = p.ex1_space_M;
    const auto space = convergence_study(cfg, o);
    o.axis = StudyAxis::Time;
    o.levels = p.ex1_time_M;
    o.fixed = p.ex1_time_level;
    const auto time = convergence_study(cfg, o);
    bool ok = true;
    for (const auto* rows : {&space, &time})
        for (const auto& r : *rows) {
            led.add(r.converged, r.g);
            ok = ok && r.converged;
        }
    auto total = [](const StudyRow& r) { return r.err_nu + r.err_q; };
    const double es = last_eoc(space, 2.0, total);
    const double et = last_eoc(time, 2.0, total);
    return {ok && es >= 1.7 && et >= 0.85,
            "space EOC " + fmt("%.3f", es) + " (>= 1.7), time EOC " + fmt("%.3f", et) + " (>= 0.85)"};
}

Verdict optimal_time(const std::string& example, double target, const Plan& p, Ledger& led) {
    const ExampleConfig cfg = example_config(example);
    const ProblemData pd = build_problem(cfg, p.fixed_M, p.fixed_level);
    const SolveReport r = solve(pd);
    led.add(r.converged, r.g);
    const double err = std::abs(r.nu - target);
    return {r.converged && err <= 2e-3, "at (" + std::to_string(p.fixed_M) + ", " +
                                            std::to_string(node_count(p.fixed_level)) + ") nu " + fmt("%.5f", r.nu) + " vs " + fmt("%.5f", target) + " +- 2e-3"};
}

Verdict example3(const Plan& p, Ledger& led) {
    Verdict v = optimal_time("example3", 1.22198, p, led);
    StudyOptions o;
    o.axis = StudyAxis::Space;
    o.kind = ControlKind::PiecewiseConstant;
    o.levels = p.ex3_levels;
    o.fixed = p.ex3_M;
    o.reference_depth = p.ex3_depth;
    const auto rows = convergence_study(example_config("example3"), o);
    bool ok = true;
    for (const auto& r : rows) {
        led.add(r.converged, r.g);
        ok = ok && r.converged;
    }
    const double eq = last_eoc(rows, 2.0, [](const StudyRow& r) { return r.err_q; });
    const double en = last_eoc(rows, 2.0, [](const StudyRow& r) { return r.err_nu; });
    const double eu = last_eoc(rows, 2.0, [](const StudyRow& r) { return r.err_u; });
    v.pass = v.pass && ok && eq >= 0.85 && en >= 1.7 && eu >= 1.7;
    v.detail += "; space EOC q " + fmt("%.3f", eq) + " (>= 0.85), nu " + fmt("%.3f", en) + ", u " + fmt("%.3f", eu) +
                " (>= 1.7)";
    return v;
}

Verdict ssc_table(const Plan& p, Ledger& led) {
    const double alphas[4] = {1, 0.1, 0.01, 0.001};
    const double gamma[4] = {7.55, 18.1, 2.51e3, 1.37e6};
    const double kappa[4] = {4.53e-1, 4.88e-2, 6.01e-3, 6.02e-4};
    const double inactive[4] = {96, 62, 5, 1};
    SscSweepOptions o;
    o.alphas.assign(alphas, alphas + 4);
    o.grids = {{p.ssc_M, p.ssc_level}};
    const auto cells = ssc_sweep(example_config("example2"), o);
    int good = 0;
    std::ostringstream d;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const SscCell& c = cells[i];
        led.add(c.solve.converged, c.solve.g);
        if (!c.ok) {
            d << " a=" << alphas[i] << " failed;";
            continue;
        }
        const double pct = 100.0 * c.report.inactive_fraction;
        const bool g_ok = c.report.gamma > 0 && std::abs(c.report.gamma / gamma[i] - 1) <= 0.1;
        const bool k_ok = std::abs(c.report.kappa_lower / kappa[i] - 1) <= 0.1;
        // the last column is "< 1 %", so the band is [0, 1 + 5]
        const bool i_ok = i == 3 ? pct < inactive[i] + 5 : std::abs(pct - inactive[i]) <= 5;
        good += g_ok + k_ok + i_ok;
        d << " a=" << alphas[i] << " gamma " << fmt("%.3g", c.report.gamma) << (g_ok ? "" : "*") << " kappa "
          << fmt("%.3g", c.report.kappa_lower) << (k_ok ? "" : "*") << " inactive " << fmt("%.1f", pct)
          << (i_ok ? "" : "*") << ";";
    }
    return {good == 12, std::to_string(good) + "/12 cells in band (* = out of band):" + d.str()};
}

Verdict selfcheck() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_selfcheck();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int failed = 0;
    std::string names;
    for (const auto& r : results)
        if (!r.pass) {
            ++failed;
            names += " " + r.name + ";";
        }
    return {failed == 0 && seconds < 180,
            std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " checks pass in " +
                fmt("%.1f", seconds) + " s (< 180 s)" + names};
}

Verdict curvature(const Plan& p, Ledger& led) {
    ExampleConfig cfg = example_config("example2");
    cfg.alpha = 1.0;
    const ProblemData pd = build_problem(cfg, p.curv_M, p.curv_level);
    const SolveReport r = solve(pd);
    led.add(r.converged, r.g);
    const CurvatureCheck c = value_curvature(pd, r);
    return {c.relative_error < 0.05, "alpha 1 at (" + std::to_string(p.curv_M) + ", " +
                                         std::to_string(node_count(p.curv_level)) + "): V'' " +
                                         fmt("%.5g", c.second_difference) + " vs gamma " + fmt("%.5g", c.gamma) +
                                         ", relative error " + fmt("%.2e", c.relative_error) + " (< 5%)"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance run: one PASS/FAIL line per criterion"};
    bool quick = false, strict = false;
    std::vector<int> only;
    app.add_flag("--quick", quick, "coarse grids for every criterion");
    app.add_flag("--strict", strict, "exit 1 when a criterion fails");
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 7));
    CLI11_PARSE(app, argc, argv);
    const Plan& p = quick ? kQuick : kFull;
    std::cout << "mode " << (quick ? "quick" : "full") << std::endl;

    Ledger led;
    int failed = 0, errors = 0;
    std::map<int, std::string> lines;
    auto run = [&](int id, const std::string& name, const std::function<Verdict()>& f) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = f();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
            ++errors;
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        lines[id] = std::string(v.pass ? "PASS " : "FAIL ") + std::to_string(id) + " " + name + ": " + v.detail +
                    " [" + fmt("%.0f", s) + " s]";
        std::cerr << lines[id] << std::endl;
    };
    run(1, "example1 convergence rates", [&] { return example1_rates(p, led); });
    run(2, "example2 optimal time", [&] { return optimal_time("example2", 1.79931, p, led); });
    run(3, "example3 optimal time and rates", [&] { return example3(p, led); });
    run(4, "second order table", [&] { return ssc_table(p, led); });
    run(6, "property suite", [&] { return selfcheck(); });
    run(7, "value function curvature", [&] { return curvature(p, led); });
    run(5, "feasibility at convergence", [&] {
        return Verdict{led.runs > 0 && led.worst_g < 1e-9,
                       "max |g| " + fmt("%.2e", led.worst_g) + " over " + std::to_string(led.runs) + " converged solves"};
    });
    for (const auto& [id, line] : lines) std::cout << line << "\n";
    if (errors) return 2;
    return strict && failed ? 1 : 0;
}
