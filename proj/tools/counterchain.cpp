// counterchain: build, simulate and verify superposed counterexample chains.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "counterchain/block.hpp"
#include "counterchain/cli_support.hpp"
#include "counterchain/diagnostics.hpp"
#include "counterchain/errors.hpp"
#include "counterchain/limit_laws.hpp"
#include "counterchain/report.hpp"
#include "counterchain/rng.hpp"
#include "counterchain/schedule.hpp"
#include "counterchain/superchain.hpp"

namespace fs = std::filesystem;
using namespace cchain;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string out_dir;
    std::uint64_t seed = 0;

    // block
    std::string epsilon = "1/9";
    std::string theta = "1/9";
    std::int64_t n_max = 50;

    // schedule
    std::string theorem = "t34";
    std::string q = "log-inverse";
    std::string g;
    std::string f = "power:2";
    std::string w;
    int j_max = 8;
    std::int64_t scan_cap = 10'000'000;
    std::string schedule_file;

    // chain and runs
    int truncation = 0;
    std::int64_t n = 1000;
    std::size_t replicates = 1;
    int level = 1;
    double budget_steps = 1e9;
    std::size_t limit_replicates = 100'000;
    std::size_t dissipation_replicates = 10'000;
    double x_max = 1024.0;
};

std::string num(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct Artifacts {
    fs::path dir;
    json config;
    std::string digest;

    std::string header_comment() const {
        return std::string("# counterchain ") + kVersion + " config " + digest + "\n";
    }
    void write(const std::string& name, const std::string& body) const {
        fs::create_directories(dir);
        std::ofstream os(dir / name, std::ios::binary);
        os << body;
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    }
    void write_csv(const std::string& name, const std::string& body) const { write(name, header_comment() + body); }
    void write_report(const RunReport& rep) const {
        json j;
        j["tool"] = "counterchain";
        j["version"] = kVersion;
        j["config_digest"] = digest;
        j["config"] = config;
        const json body = rep.to_json();
        for (const auto& [k, v] : body.items()) j[k] = v;
        write("report.json", j.dump(2) + "\n");
    }
};

Artifacts make_artifacts(const Options& o, const std::string& command, json config) {
    Artifacts a;
    a.dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    a.config = json{{"command", command}};
    a.config.update(config);
    a.digest = sha256_hex(a.config.dump());
    return a;
}

int finish(const RunReport& rep, const Artifacts& art) {
    art.write_report(rep);
    const auto& f = rep.body;
    int failed = 0, skipped = 0;
    for (const auto& c : f.checks) {
        if (c.status == CheckStatus::Fail) ++failed;
        if (c.status == CheckStatus::Skipped) ++skipped;
    }
    std::cout << "checks: " << f.checks.size() << ", failed: " << failed << ", skipped: " << skipped << "\n";
    std::cout << "report: " << (art.dir / "report.json").string() << "\n";
    if (const CheckRecord* c = f.first_failure()) {
        std::cerr << "check failed: " << c->name << " (" << c->property << "): measured " << num(c->measured)
                  << ", bound " << num(c->bound);
        if (!c->note.empty()) std::cerr << "; " << c->note;
        std::cerr << "\n";
        return kExitCheck;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Schedule selection shared by schedule, simulate, verify, limits, quantile.

std::string default_g(TheoremTag tag) { return tag == TheoremTag::T55 ? "log-e-plus" : "log"; }

json schedule_config(const Options& o) {
    if (!o.schedule_file.empty()) return json{{"schedule_file", o.schedule_file}};
    const TheoremTag tag = parse_tag(o.theorem);
    json c{{"theorem", tag_name(tag)}, {"j_max", o.j_max}};
    if (tag == TheoremTag::T34) c["q"] = o.q, c["scan_cap"] = o.scan_cap;
    if (tag == TheoremTag::T44 || tag == TheoremTag::T55) c["g"] = o.g.empty() ? default_g(tag) : o.g;
    if (tag == TheoremTag::T55) c["f"] = o.f, c["w"] = o.w.empty() ? "auto" : o.w;
    return c;
}

LevelSchedule build_schedule(const Options& o) {
    if (!o.schedule_file.empty()) {
        std::ifstream is(o.schedule_file, std::ios::binary);
        if (!is) throw RangeError("cannot read schedule file " + o.schedule_file);
        std::stringstream ss;
        ss << is.rdbuf();
        return parse_schedule(ss.str());
    }
    const TheoremTag tag = parse_tag(o.theorem);
    const std::string g = o.g.empty() ? default_g(tag) : o.g;
    switch (tag) {
        case TheoremTag::T34: {
            ScheduleOptions so;
            so.m_scan_cap = o.scan_cap;
            return schedule_t34(parse_sequence(o.q), o.j_max, so);
        }
        case TheoremTag::T44: return schedule_t44(parse_sequence(g), o.j_max);
        case TheoremTag::T55: {
            const ConvexRate phi = parse_rate(o.f);
            const double w = o.w.empty() ? find_w(phi) : parse_rational(o.w);
            return schedule_t55(phi, parse_sequence(g), w, o.j_max);
        }
        case TheoremTag::SmallI: return schedule_small_i(o.j_max);
    }
    throw RangeError("unknown theorem");
}

VerifyInputs verify_inputs(const Options& o, TheoremTag tag) {
    VerifyInputs in;
    if (!o.schedule_file.empty() && tag != TheoremTag::SmallI)
        throw RangeError("verify needs the schedule inputs; pass --theorem and its presets instead of --schedule-file");
    const std::string g = o.g.empty() ? default_g(tag) : o.g;
    if (tag == TheoremTag::T34) in.q = parse_sequence(o.q);
    if (tag == TheoremTag::T44 || tag == TheoremTag::T55) in.g = parse_sequence(g);
    if (tag == TheoremTag::T55) in.phi = parse_rate(o.f);
    return in;
}

SuperChain build_chain(const Options& o, const LevelSchedule& s) {
    const int jt = o.truncation > 0 ? o.truncation : s.emitted();
    if (jt < 1) throw RangeError("schedule has no levels: " + s.range_note);
    return make_super_chain(s, jt);
}

VerifyBudget budget_of(const Options& o) {
    VerifyBudget b;
    b.steps.max_steps = o.budget_steps;
    b.limit_replicates = o.limit_replicates;
    b.dissipation_replicates = o.dissipation_replicates;
    return b;
}

// ---------------------------------------------------------------------------

int run_block(const Options& o) {
    const double eps = parse_rational(o.epsilon), theta = parse_rational(o.theta);
    if (o.n_max < 1 || o.n_max > 1'000'000) throw RangeError("--n-max must lie in [1, 1e6]");
    const auto [bp, k] = construct_block(eps, theta);
    const Artifacts art =
        make_artifacts(o, "block", json{{"epsilon", o.epsilon}, {"theta", o.theta}, {"n_max", o.n_max}});

    auto print = [](const char* name, const Mat3& m) {
        std::cout << name << ":\n";
        for (const auto& row : m) std::cout << "  " << num(row[0]) << "  " << num(row[1]) << "  " << num(row[2]) << "\n";
    };
    std::cout << "epsilon = " << num(bp.epsilon) << ", theta = " << num(bp.theta) << ", theta* = " << num(bp.theta_star)
              << ", I = " << bp.i_cap << "\n";
    std::cout << "marginal: " << num(k.marginal[0]) << "  " << num(k.marginal[1]) << "  " << num(k.marginal[2]) << "\n";
    print("transition", k.transition);
    print("joint", k.joint);

    RunReport rep;
    rep.theorem_tag = "block";
    rep.inputs = art.config;
    double worst_sym = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) worst_sym = std::max(worst_sym, std::fabs(k.joint[a][b] - k.joint[b][a]));
    rep.body.add(check_le("detailed balance", "|P(X_0 = a, X_1 = b) - P(X_0 = b, X_1 = a)|", worst_sym, 0.0, 1e-14));

    std::ostringstream csv;
    csv << "n,cov,cov_closed_form,beta,beta_bound,alpha\n";
    std::cout << "n  cov  beta  alpha\n";
    double worst_cov = 0.0, worst_beta = -1.0, worst_alpha = -1.0, max_beta = 0.0;
    for (std::int64_t n = 1; n <= o.n_max; ++n) {
        const double cov = exact_cov(k, n);
        const double closed = eps * std::pow(1.0 - theta, static_cast<double>(n));
        const double beta = exact_beta(k, n), alpha = exact_alpha(k, n);
        const double bound = 6.0 * closed;
        worst_cov = std::max(worst_cov, std::fabs(cov - closed) / closed);
        worst_beta = std::max(worst_beta, beta - bound);
        worst_alpha = std::max(worst_alpha, 2.0 * alpha - beta);
        max_beta = std::max(max_beta, beta);
        csv << n << ',' << num(cov) << ',' << num(closed) << ',' << num(beta) << ',' << num(bound) << ',' << num(alpha)
            << '\n';
        std::cout << n << "  " << num(cov) << "  " << num(beta) << "  " << num(alpha) << "\n";
    }
    rep.body.add(check_le("covariance", "relative error of Cov(X_0, X_n) against eps (1 - theta)^n", worst_cov, 1e-12));
    rep.body.add(check_le("beta bound", "beta(n) - 6 eps (1 - theta)^n", worst_beta, 0.0, 1e-15));
    rep.body.add(check_le("alpha vs beta", "2 alpha(n) - beta(n)", worst_alpha, 0.0, 1e-15));
    rep.body.add(check_le("beta <= 1", "beta(n) <= 1", max_beta, 1.0));
    art.write_csv("block.csv", csv.str());
    return finish(rep, art);
}

int run_schedule(const Options& o) {
    const LevelSchedule s = build_schedule(o);
    const Artifacts art = make_artifacts(o, "schedule", schedule_config(o));
    art.write("schedule.txt", serialize_schedule(s));

    std::ostringstream csv;
    csv << "j,log_epsilon,log_theta,log_theta_star,log_i_cap,log_h,log_t,log_m\n";
    std::cout << "theorem " << tag_name(s.tag) << ": " << s.emitted() << " of " << s.requested_levels
              << " levels\n  j  log eps  log theta  log I  log h\n";
    for (const auto& r : s.levels) {
        csv << r.j << ',' << num(r.epsilon.log()) << ',' << num(r.theta.log()) << ',' << num(r.theta_star.log()) << ','
            << num(r.i_cap.log()) << ',' << num(r.h.log()) << ',' << (r.log_t ? num(*r.log_t) : "") << ','
            << (r.m ? num(r.m->log()) : "") << '\n';
        std::cout << "  " << r.j << "  " << num(r.epsilon.log()) << "  " << num(r.theta.log()) << "  "
                  << num(r.i_cap.log()) << "  " << num(r.h.log()) << "\n";
    }
    if (!s.range_note.empty()) std::cout << "note: " << s.range_note << "\n";
    art.write_csv("schedule.csv", csv.str());

    RunReport rep;
    rep.theorem_tag = tag_name(s.tag);
    rep.inputs = art.config;
    rep.body = validate_schedule(s);
    rep.truncation = {{"levels", s.emitted()}, {"log_eps_tail", tail_eps_bound(s, s.emitted()).log()}};
    return finish(rep, art);
}

int run_simulate(const Options& o) {
    const LevelSchedule s = build_schedule(o);
    const SuperChain c = build_chain(o, s);
    if (o.n < 1) throw RangeError("--n must be >= 1");
    json cfg = schedule_config(o);
    cfg.update(json{{"truncation", c.truncation_j}, {"n", o.n}, {"replicates", o.replicates}, {"seed", o.seed}});
    const Artifacts art = make_artifacts(o, "simulate", cfg);

    std::ostringstream csv;
    csv << "replicate,k,value\n";
    double sum = 0.0;
    std::size_t zeros = 0, count = 0;
    for (std::size_t rep = 0; rep < o.replicates; ++rep) {
        const auto path = sample_super_path(c, o.n, derive_seed(o.seed, stream::kSuperLevel, rep));
        for (std::size_t k = 0; k < path.size(); ++k) {
            csv << rep << ',' << k + 1 << ',' << num(path[k]) << '\n';
            sum += path[k];
            zeros += path[k] == 0.0;
            ++count;
        }
    }
    art.write_csv("path.csv", csv.str());

    RunReport rep;
    rep.theorem_tag = tag_name(s.tag);
    rep.inputs = art.config;
    rep.seeds.emplace_back("master", o.seed);
    rep.truncation = {{"levels", c.truncation_j}, {"log_eps_tail", c.trunc_eps_tail.log()}};
    rep.truncation["sample_mean"] = sum / static_cast<double>(count);
    rep.truncation["zero_fraction"] = static_cast<double>(zeros) / static_cast<double>(count);
    std::cout << "wrote " << count << " values to " << (art.dir / "path.csv").string() << "\n";
    return finish(rep, art);
}

int run_verify(const Options& o) {
    const LevelSchedule s = build_schedule(o);
    const SuperChain c = build_chain(o, s);
    const VerifyBudget b = budget_of(o);
    json cfg = schedule_config(o);
    cfg.update(json{{"truncation", c.truncation_j},
                    {"seed", o.seed},
                    {"budget_steps", b.steps.max_steps},
                    {"limit_replicates", b.limit_replicates},
                    {"dissipation_replicates", b.dissipation_replicates}});
    const Artifacts art = make_artifacts(o, "verify", cfg);
    RunReport rep = verify_theorem(c, verify_inputs(o, s.tag), b, o.seed);
    ReportFragment all = validate_schedule(s);
    all.merge(rep.body);
    rep.body = all;
    rep.inputs = art.config;
    return finish(rep, art);
}

int run_limits(const Options& o) {
    const LevelSchedule s = build_schedule(o);
    const SuperChain c = build_chain(o, s);
    json cfg = schedule_config(o);
    cfg.update(json{{"truncation", c.truncation_j},
                    {"level", o.level},
                    {"replicates", o.limit_replicates},
                    {"seed", o.seed},
                    {"budget_steps", o.budget_steps}});
    const Artifacts art = make_artifacts(o, "limits", cfg);
    CostBudget budget;
    budget.max_steps = o.budget_steps;
    const std::uint64_t sum_seed = derive_seed(o.seed, stream::kNormalizedSum, static_cast<std::uint64_t>(o.level));
    const std::uint64_t ref_seed = derive_seed(o.seed, stream::kReference, static_cast<std::uint64_t>(o.level));
    auto sums = normalized_sum_samples(c, o.level, o.limit_replicates, sum_seed, budget);
    std::ostringstream csv;
    csv << "replicate,value\n";
    for (std::size_t i = 0; i < sums.size(); ++i) csv << i << ',' << num(sums[i]) << '\n';
    art.write_csv("normalized_sums.csv", csv.str());
    const double ks = ks_distance(sums, sample_mu_p1sl(ref_seed, o.limit_replicates));

    RunReport rep;
    rep.theorem_tag = tag_name(s.tag);
    rep.inputs = art.config;
    rep.seeds = {{"master", o.seed}, {"normalized_sums", sum_seed}, {"reference", ref_seed}};
    rep.truncation = {{"levels", c.truncation_j}, {"log_eps_tail", c.trunc_eps_tail.log()},
                      {"i_cap", c.level(o.level).i_cap_exact}};
    rep.body.add(check_le("limit law distance", "KS distance of normalized level sums to mu_P1sL", ks, 0.05));
    std::cout << "level " << o.level << ", I = " << c.level(o.level).i_cap_exact << ", KS = " << num(ks) << "\n";
    return finish(rep, art);
}

int run_quantile(const Options& o) {
    Options t = o;
    if (t.schedule_file.empty()) t.theorem = "t55";
    const LevelSchedule s = build_schedule(t);
    if (s.tag != TheoremTag::T55) throw RangeError("quantile needs a T55 schedule");
    const SuperChain c = build_chain(t, s);
    json cfg = schedule_config(t);
    cfg.update(json{{"truncation", c.truncation_j}, {"x_max", o.x_max}});
    const Artifacts art = make_artifacts(t, "quantile", cfg);
    const VerifyInputs in = verify_inputs(t, TheoremTag::T55);

    std::vector<double> grid;
    for (double x = 2.0; x <= o.x_max; x += 2.0) grid.push_back(x);
    std::ostringstream csv;
    csv << "x,log_f,log_tail_integral\n";
    for (double x : grid) {
        const double lf = in.phi->phi_log(std::log(x));
        csv << num(x) << ',' << num(lf) << ',' << num(log_tail_integral(c, lf)) << '\n';
    }
    art.write_csv("quantile.csv", csv.str());

    RunReport rep;
    rep.theorem_tag = tag_name(s.tag);
    rep.inputs = art.config;
    rep.truncation = {{"levels", c.truncation_j}, {"log_eps_tail", c.trunc_eps_tail.log()}};
    rep.body = verify_t55_quantile_bound(c, *in.phi, *in.g, grid);
    return finish(rep, art);
}

void add_schedule_options(CLI::App* app, Options& o) {
    app->add_option("--theorem", o.theorem, "t34, t44, t55 or smalli")->capture_default_str();
    app->add_option("--q", o.q, "target sequence for t34")->capture_default_str();
    app->add_option("--g", o.g, "g preset (default log for t44, log-e-plus for t55)");
    app->add_option("--f", o.f, "rate for t55: power:p or subexp:q")->capture_default_str();
    app->add_option("--w", o.w, "t55 threshold w (default: smallest admissible power of two)");
    app->add_option("--jmax", o.j_max, "levels to construct")->capture_default_str()->check(CLI::Range(1, 64));
    app->add_option("--scan-cap", o.scan_cap, "integer scan horizon for M_j")->capture_default_str();
    app->add_option("--schedule-file", o.schedule_file, "load a schedule written by the schedule command");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superposed three-state chains: construction, simulation and verification"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "TOML/INI configuration file; flags override its fields");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    if (const char* env = std::getenv("COUNTERCHAIN_OUT")) o.out_dir = env;
    app.add_option("--out", o.out_dir, "output directory (default $COUNTERCHAIN_OUT or .)");

    auto* block = app.add_subcommand("block", "building block matrices, covariance and mixing tables");
    block->add_option("--epsilon", o.epsilon, "rational or decimal in (0, 1/9]")->capture_default_str();
    block->add_option("--theta", o.theta, "rational or decimal in (0, 1/9]")->capture_default_str();
    block->add_option("--n-max", o.n_max, "largest lag")->capture_default_str();

    auto* sched = app.add_subcommand("schedule", "construct and validate a level schedule");
    add_schedule_options(sched, o);

    auto* sim = app.add_subcommand("simulate", "stationary sample paths of the truncated chain");
    add_schedule_options(sim, o);
    sim->add_option("--truncation", o.truncation, "levels kept (default: all emitted)");
    sim->add_option("--n", o.n, "path length")->capture_default_str();
    sim->add_option("--replicates", o.replicates, "independent paths")->capture_default_str();
    sim->add_option("--seed", o.seed, "master seed")->required();

    auto* ver = app.add_subcommand("verify", "validate the schedule and run the theorem checks");
    add_schedule_options(ver, o);
    ver->add_option("--truncation", o.truncation, "levels kept (default: all emitted)");
    ver->add_option("--seed", o.seed, "master seed")->required();
    ver->add_option("--budget-steps", o.budget_steps, "block steps allowed per sampled check")->capture_default_str();
    ver->add_option("--limit-replicates", o.limit_replicates, "replicates for the limit-law check")
        ->capture_default_str();
    ver->add_option("--dissipation-replicates", o.dissipation_replicates, "replicates per n for the dissipation trend")
        ->capture_default_str();

    auto* lim = app.add_subcommand("limits", "normalized level sums against mu_P1sL");
    add_schedule_options(lim, o);
    lim->add_option("--truncation", o.truncation, "levels kept (default: all emitted)");
    lim->add_option("--level", o.level, "level j")->capture_default_str();
    lim->add_option("--replicates", o.limit_replicates, "replicates")->capture_default_str();
    lim->add_option("--seed", o.seed, "master seed")->required();
    lim->add_option("--budget-steps", o.budget_steps, "block steps allowed")->capture_default_str();

    auto* qua = app.add_subcommand("quantile", "quantile tail integrals of |X_0| for a t55 schedule");
    add_schedule_options(qua, o);
    qua->add_option("--truncation", o.truncation, "levels kept (default: all emitted)");
    qua->add_option("--x-max", o.x_max, "largest grid point (grid 2, 4, ..., x-max)")->capture_default_str();

    // The limits command defaults to the small-horizon schedule.
    lim->preparse_callback([&o](std::size_t) { o.theorem = "smalli", o.j_max = 3; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : kExitUsage;
    }

    try {
        if (*block) return run_block(o);
        if (*sched) return run_schedule(o);
        if (*sim) return run_simulate(o);
        if (*ver) return run_verify(o);
        if (*lim) return run_limits(o);
        if (*qua) return run_quantile(o);
    } catch (const RangeError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetError& e) {
        std::cerr << "over budget: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ScheduleError& e) {
        std::cerr << "schedule error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheck;
    }
    return kExitUsage;
}
