// Command-line front end. Every subcommand writes CSV (to --out/<name>.csv,
// or stdout) and a JSON summary (stdout when --out is given, else stderr).
// Failures print {"error": ...} on stderr: exit 2 for configuration errors,
// 3 for failed checks, 1 for anything else.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "prefstein/acceptance.hpp"
#include "prefstein/attachment.hpp"
#include "prefstein/chain.hpp"
#include "prefstein/csv.hpp"
#include "prefstein/error.hpp"
#include "prefstein/graphsim.hpp"
#include "prefstein/grid.hpp"
#include "prefstein/htable.hpp"
#include "prefstein/limitlaw.hpp"
#include "prefstein/outdegree.hpp"
#include "prefstein/random.hpp"
#include "prefstein/stein.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace prefstein;

namespace {

// A check that ran but did not hold.
class CheckFailed : public Error {
public:
    CheckFailed(json summary, const std::string& what) : Error("CheckFailed", what), summary_(std::move(summary)) {}
    const json& summary() const noexcept { return summary_; }

private:
    json summary_;
};

struct Common {
    std::string rule;
    std::string n_grid;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 20240611;
    double epsilon = kDefaultEpsilon;
    std::string out;
    int threads = 0;
};

AttachmentRule load_rule(const std::string& arg) {
    if (arg.empty()) throw ConfigError("rule", "--rule is required");
    std::string text = arg;
    if (fs::is_regular_file(arg)) {
        std::ifstream in(arg);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("rule", std::string("rule is neither a readable file nor valid JSON: ") + e.what());
    }
    return AttachmentRule::from_json(j);
}

std::vector<std::size_t> load_grid(const std::string& spec, const char* fallback) {
    return parse_grid(spec.empty() ? fallback : spec);
}

// Writes CSV produced by `body` to --out/<name> or stdout.
template <class Body>
void emit_csv(const Common& c, const std::string& name, Body body) {
    if (c.out.empty()) {
        body(std::cout);
        return;
    }
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / name);
    if (!os) throw ConfigError("out", "cannot write " + (fs::path(c.out) / name).string());
    body(os);
}

void emit_summary(const Common& c, const json& summary) {
    (c.out.empty() ? std::cerr : std::cout) << summary.dump(2) << '\n';
    if (!c.out.empty()) {
        std::ofstream os(fs::path(c.out) / "summary.json");
        os << summary.dump(2) << '\n';
    }
}

json quartiles_json(const QuartileSummary& q) {
    return {{"sup", q.sup},
            {"first_quartile_sup", q.first_quartile_sup},
            {"last_quartile_sup", q.last_quartile_sup},
            {"ratio", q.ratio()}};
}

void run_mu(const Common& c) {
    const auto rule = load_rule(c.rule);
    const auto law = compute_mu(rule, c.epsilon);
    const auto times = hitting_times(rule, law.truncation_K);
    emit_csv(c, "mu.csv", [&](std::ostream& os) { write_limit_csv(os, law, times); });
    json s = {{"rule", rule.to_json()},
              {"K", law.truncation_K},
              {"truncation_mass", law.truncation_mass},
              {"epsilon_used", law.epsilon_used},
              {"epsilon_capped", law.epsilon_capped}};
    try {
        const auto m = mean_f_of_W(law, rule);
        s["mean_f_W"] = {{"value", m.value}, {"error_bound", m.error_bound}};
    } catch (const ToleranceNotMet& e) {
        s["mean_f_W"] = {{"error", e.what()}};
    }
    emit_summary(c, s);
}

void run_wn(const Common& c, const std::string& snapshots, int start) {
    const auto rule = load_rule(c.rule);
    const auto times = parse_grid(snapshots.empty() ? std::string("1:16:geometric") : snapshots);
    json rows = json::array();
    emit_csv(c, "wn.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"n", "k", "p"});
        evolve(rule, times, static_cast<std::size_t>(start), [&](const ChainLaw& law) {
            for (std::size_t k = 0; k < law.pmf.size(); ++k) csv.row(law.n, k, law.pmf[k]);
            rows.push_back({{"n", law.n}, {"E_f", expected_f(law, rule)}});
        });
    });
    emit_summary(c, {{"rule", rule.to_json()}, {"start", start}, {"snapshots", rows}});
}

void run_tv_rate(const Common& c, const std::string& regime_arg) {
    const auto rule = load_rule(c.rule);
    const auto grid = load_grid(c.n_grid, "128:16384:geometric");
    RateRegime regime;
    if (regime_arg == "log") {
        regime = RateRegime::log_over_n();
    } else if (regime_arg.rfind("power:", 0) == 0) {
        regime = RateRegime::power_law(std::stod(regime_arg.substr(6)));
    } else if (regime_arg.empty() || regime_arg == "auto") {
        const auto cls = classify(rule, grid.back());
        if (cls.k_star)
            regime = RateRegime::log_over_n();
        else if (cls.theorem2_gamma)
            regime = RateRegime::power_law(*cls.theorem2_gamma);
        else
            throw RegimeMismatch(rule.describe() + " fits neither the log(n)/n nor the n^-(1-gamma) regime");
    } else {
        throw ConfigError("regime", "regime must be auto, log or power:<gamma>");
    }
    const auto table = certify_rate(rule, grid, regime, c.epsilon);
    emit_csv(c, "tv_rate.csv", [&](std::ostream& os) { write_rate_csv(os, table); });
    emit_summary(c, {{"rule", rule.to_json()},
                     {"regime", regime.kind == RateRegime::Kind::LogOverN ? "log(n)/n"
                                                                          : "n^-(1-" + std::to_string(regime.gamma) + ")"},
                     {"normalized", quartiles_json(table.summary)}});
}

json check_json(const PropertyCheck& p) {
    json j = {{"applicable", p.applicable}, {"passed", p.passed}};
    if (!p.passed) j["violation"] = {{"k", p.k}, {"l", p.l}, {"detail", p.detail}};
    return j;
}

void run_h_check(const Common& c, std::size_t L) {
    const auto rule = load_rule(c.rule);
    const auto table = build(rule, L);
    const auto rep = verify_properties(table, classify(rule, L));
    emit_csv(c, "htable.csv", [&](std::ostream& os) { write_htable_csv(os, table, rep); });
    json s = {{"rule", rule.to_json()},
              {"L", L},
              {"i", check_json(rep.nonnegative)},
              {"ii", check_json(rep.nondecreasing)},
              {"iii", check_json(rep.unimodal)},
              {"iv", check_json(rep.inverse_l_bound)},
              {"v", check_json(rep.gamma_bound)},
              {"C_explicit", rep.C_explicit},
              {"empirical_C", rep.empirical_C},
              {"definition_gap", definition_gap(rule, table)},
              {"increment_recursion_residual", increment_recursion_residual(table)}};
    emit_summary(c, s);
    require_properties(rep);
}

void run_stein_check(const Common& c, std::size_t sets, std::size_t k_max, std::size_t n) {
    const auto rule = load_rule(c.rule);
    const SteinSolver solver(rule, compute_mu(rule, c.epsilon, std::max(k_max, n) + 60));
    const auto table = build(rule, n);
    const auto law = evolve(rule, n + 1);
    double max_v = 0.0, max_res = 0.0, max_triple = 0.0;
    emit_csv(c, "stein.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"set", "size", "complement", "max_abs_v", "max_residual", "lhs", "rhs", "law_difference"});
        for (std::size_t s = 0; s < sets; ++s) {
            PhiloxStream rng(c.seed, s, 0x5E7u);
            const double density = rng.uniform();
            std::vector<std::size_t> members;
            for (std::size_t k = 0; k <= k_max + 50; ++k)
                if (rng.uniform() < density) members.push_back(k);
            const bool complement = s % 2 == 1;
            const auto A = complement ? IndexSet::complement_of(members) : IndexSet::finite(members);
            const auto fv = set_function(solver, A, k_max);
            double v = 0.0, r = 0.0;
            for (std::size_t k = 0; k <= k_max; ++k) {
                v = std::max(v, std::abs(fv.v[k]));
                r = std::max(r, std::abs(stein_residual(solver, fv, A, k)));
            }
            const auto t = triple_sum_check(solver, table, law, A);
            max_v = std::max(max_v, v);
            max_res = std::max(max_res, r);
            max_triple = std::max(max_triple, t.max_disagreement());
            csv.row(s, A.members().size(), complement ? 1 : 0, v, r, t.lhs, t.rhs, t.law_difference);
        }
    });
    const json s = {{"rule", rule.to_json()},   {"sets", sets},       {"k_max", k_max},
                    {"n", n},                   {"max_abs_v", max_v}, {"max_residual", max_res},
                    {"max_triple_sum_disagreement", max_triple}};
    emit_summary(c, s);
    if (max_v > 1.0 + 1e-12 || max_res > 1e-9 || max_triple > 1e-9)
        throw CheckFailed(s, "Stein checks exceeded their tolerances");
}

void run_outdegree(const Common& c, bool mc) {
    const auto rule = load_rule(c.rule);
    const auto grid = load_grid(c.n_grid, "16:2048:geometric");
    if (!mc) {
        if (grid.back() > 4096) throw ConfigError("n-grid", "exact outdegree mode is capped at n <= 4096; use --mc");
        const auto table = outdegree_rate_report(rule, grid);
        emit_csv(c, "outdegree.csv", [&](std::ostream& os) { write_outdegree_csv(os, table); });
        std::size_t violations = 0;
        for (const auto& r : table.rows) violations += r.exact_tv > r.bh_bound;
        const json s = {{"rule", rule.to_json()},
                        {"gamma", table.gamma},
                        {"bh_violations", violations},
                        {"normalized", quartiles_json(table.summary)}};
        emit_summary(c, s);
        if (violations) throw CheckFailed(s, "exact d_TV exceeded the Barbour-Hall bound");
        return;
    }
    json rows = json::array();
    emit_csv(c, "outdegree_mc.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"n", "d", "count", "frequency", "poisson"});
        for (std::size_t n : grid) {
            if (n < 2) continue;
            const auto h = empirical_outdegree(rule, n, c.trials, c.seed);
            double mean = 0.0;
            for (std::size_t d = 0; d < h.counts.size(); ++d) mean += static_cast<double>(d) * h.frequency(d);
            double tv = 0.0;
            for (std::size_t d = 0; d < h.counts.size() + 30; ++d) {
                const double po = std::exp(-mean + d * std::log(mean) - std::lgamma(d + 1.0));
                tv += std::abs(h.frequency(d) - po);
                if (d < h.counts.size()) csv.row(n, d, h.counts[d], h.frequency(d), po);
            }
            rows.push_back({{"n", n}, {"mean", mean}, {"empirical_tv_to_poisson", 0.5 * tv}});
        }
    });
    emit_summary(c, {{"rule", rule.to_json()}, {"trials", c.trials}, {"seed", c.seed}, {"rows", rows}});
}

struct SimulateArgs {
    std::string model = "random";
    double delta = 0.0;
    int dim = 2;
    double a1 = 1.0, a2 = 1.0, p = 0.5;
    std::size_t n = 200;
    std::string edges;
};

void run_simulate(const Common& c, const SimulateArgs& a) {
    const Model model = [&]() -> Model {
        if (a.model == "random") return RandomOutdegree{load_rule(c.rule)};
        if (a.model == "fixed") return FixedOutdegree{a.delta};
        if (a.model == "spatial") return Spatial{a.dim, a.a1, a.a2, a.p};
        throw ConfigError("model", "model must be random, fixed or spatial");
    }();
    const auto rule = induced_rule(model);
    const std::size_t start = std::holds_alternative<FixedOutdegree>(model) ? 1 : static_cast<std::size_t>(rule.d0());

    if (!a.edges.empty()) {
        if (const auto dir = fs::path(a.edges).parent_path(); !dir.empty()) fs::create_directories(dir);
        std::ofstream os(a.edges);
        if (!os) throw ConfigError("edges", "cannot write " + a.edges);
        write_edge_list(os, simulate(model, a.n, c.seed, 0, true));
    }
    const auto h = empirical_uniform_indegree(model, a.n, c.trials, c.seed);
    // The uniform-vertex chain applies to all three models through their induced rule.
    const auto law = evolve(rule, a.n, start);
    std::optional<EnumerationResult> oracle;
    if (std::holds_alternative<RandomOutdegree>(model) && a.n <= 5) oracle = enumerate_exact(rule, a.n);
    emit_csv(c, "histogram.csv", [&](std::ostream& os) {
        CsvWriter csv(os, {"k", "count", "frequency", "chain", "z"});
        for (std::size_t k = 0; k < std::max(h.counts.size(), law.pmf.size()); ++k) {
            const double p = law.prob(k);
            const double z = p > 0.0 ? (h.frequency(k) - p) / h.sigma(p) : 0.0;
            csv.row(k, k < h.counts.size() ? h.counts[k] : 0, h.frequency(k), p, z);
        }
    });
    const auto cmp = compare_histogram(h, law.pmf);
    json s = {{"model", a.model},
              {"rule", rule.to_json()},
              {"n", a.n},
              {"trials", c.trials},
              {"seed", c.seed},
              {"max_z", cmp.max_z},
              {"share_within_2sigma", cmp.share_within_2sigma},
              {"impossible_bin_hit", cmp.impossible_bin_hit}};
    if (oracle) {
        double gap = 0.0;
        for (std::size_t k = 0; k < oracle->pmf.size(); ++k) gap = std::max(gap, std::abs(oracle->pmf[k] - law.prob(k)));
        s["oracle_vs_chain"] = gap;
    }
    if (const auto* sp = std::get_if<Spatial>(&model)) {
        const auto m = spatial_marginal_check(*sp, a.n, c.trials, c.seed);
        s["spatial_marginal"] = {{"pooled_z", m.pooled_z},
                                 {"max_z", m.max_z},
                                 {"bins_tested", m.bins_tested},
                                 {"familywise_threshold", m.familywise_threshold()}};
    }
    emit_summary(c, s);
    if (cmp.max_z > 4.0 || cmp.impossible_bin_hit) throw CheckFailed(s, "histogram outside 4 sigma of the chain law");
}

int run_all(const Common& c, const std::vector<int>& only) {
    AcceptanceOptions opt;
    opt.only = only;
    opt.seed = c.seed;
    opt.trials = c.trials;
    const auto results = run_acceptance(std::cout, opt);
    json j = json::array();
    bool ok = true;
    for (const auto& r : results) {
        ok &= r.passed;
        j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
    }
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        std::ofstream(fs::path(c.out) / "acceptance.json") << j.dump(2) << '\n';
    }
    return ok ? 0 : 3;
}

void print_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
    json j = {{"error", kind}, {"message", message}};
    j.update(extra);
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact laws, rates and Stein checks for preferential attachment indegrees"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* sub, bool rule = true) {
        if (rule) sub->add_option("--rule", c.rule, "attachment rule: JSON file or inline JSON");
        sub->add_option("--n-grid", c.n_grid, "a:b:geometric[:r], a:b:linear[:s] or n1,n2,...");
        sub->add_option("--trials", c.trials, "Monte Carlo trials");
        sub->add_option("--seed", c.seed, "RNG seed");
        sub->add_option("--epsilon", c.epsilon, "tail mass left beyond the truncation of mu");
        sub->add_option("--out", c.out, "output directory (default: CSV to stdout)");
        sub->add_option("--threads", c.threads, "OpenMP threads (0: runtime default)");
    };

    auto* mu = app.add_subcommand("mu", "limit law mu, tails and expected up-step times");
    add_common(mu);
    auto* wn = app.add_subcommand("wn", "exact law of the uniform-vertex indegree at chosen times");
    add_common(wn);
    std::string snapshots;
    int start = 0;
    wn->add_option("--snapshot-at", snapshots, "times, in grid syntax");
    wn->add_option("--start", start, "initial state d0 of the chain");
    auto* tv = app.add_subcommand("tv-rate", "exact d_TV(W_n, W) with rate normalisation");
    add_common(tv);
    std::string regime;
    tv->add_option("--regime", regime, "auto, log or power:<gamma>");
    auto* hc = app.add_subcommand("h-check", "h(k,l) table and its structural properties");
    add_common(hc);
    std::size_t L = 500;
    hc->add_option("--L", L, "rows");
    auto* sc = app.add_subcommand("stein-check", "Stein solutions, residuals and the triple-sum identity");
    add_common(sc);
    std::size_t sets = 200, k_max = 200, n_stein = 200;
    sc->add_option("--sets", sets, "random sets");
    sc->add_option("--k-max", k_max, "largest k checked");
    sc->add_option("--n", n_stein, "chain time for the triple sum");
    auto* od = app.add_subcommand("outdegree", "outdegree of vertex n against Po(lambda_n)");
    add_common(od);
    bool exact = false, mc = false;
    od->add_flag("--exact", exact, "exact Poisson-binomial laws");
    od->add_flag("--mc", mc, "Monte Carlo histograms");
    auto* sim = app.add_subcommand("simulate", "Monte Carlo indegree histograms against the chain law");
    add_common(sim);
    SimulateArgs sa;
    sim->add_option("--model", sa.model, "random, fixed or spatial");
    sim->add_option("--delta", sa.delta, "fixed-outdegree delta");
    sim->add_option("--dim", sa.dim, "spatial dimension");
    sim->add_option("--a1", sa.a1, "spatial A1");
    sim->add_option("--a2", sa.a2, "spatial A2");
    sim->add_option("--p", sa.p, "spatial connection probability");
    sim->add_option("--n", sa.n, "graph size");
    sim->add_option("--edges", sa.edges, "write one trajectory's edge list here");
    auto* all = app.add_subcommand("all", "full acceptance suite");
    add_common(all, false);
    std::vector<int> only;
    all->add_option("--only", only, "criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("UsageError", e.what());
        return 2;
    }
    if (c.threads > 0) omp_set_num_threads(c.threads);

    try {
        if (mu->parsed()) run_mu(c);
        if (wn->parsed()) run_wn(c, snapshots, start);
        if (tv->parsed()) run_tv_rate(c, regime);
        if (hc->parsed()) run_h_check(c, L);
        if (sc->parsed()) run_stein_check(c, sets, k_max, n_stein);
        if (od->parsed()) {
            if (exact == mc) throw ConfigError("outdegree", "choose exactly one of --exact and --mc");
            run_outdegree(c, mc);
        }
        if (sim->parsed()) run_simulate(c, sa);
        if (all->parsed()) return run_all(c, only);
    } catch (const ConfigError& e) {
        print_error(e.kind(), e.what(), {{"field", e.field()}});
        return 2;
    } catch (const CheckFailed& e) {
        print_error(e.kind(), e.what(), {{"summary", e.summary()}});
        return 3;
    } catch (const PropertyViolation& e) {
        print_error(e.kind(), e.what(), {{"property", e.which()}, {"k", e.k()}, {"l", e.row()}});
        return 3;
    } catch (const ViolationAt& e) {
        print_error(e.kind(), e.what(), {{"k", e.k()}});
        return 1;
    } catch (const Error& e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what());
        return 1;
    }
    return 0;
}
