#include "haarfactor/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "haarfactor/estimates.hpp"
#include "haarfactor/util.hpp"

namespace haarfactor {

namespace {

constexpr double kEstimateTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::pair<double, double> parse_pair(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("--grid expects p,q but got '" + s + "'");
    try {
        std::size_t used = 0;
        const double p = std::stod(s.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument(s);
        const auto rest = s.substr(comma + 1);
        const double q = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(s);
        return {p, q};
    } catch (const std::logic_error&) {
        throw ConfigError("--grid expects p,q but got '" + s + "'");
    }
}

ReportFormat format_of(const std::string& f, const std::string& out) {
    if (f == "json") return ReportFormat::Json;
    if (f == "csv") return ReportFormat::Csv;
    if (f.empty()) return out.size() >= 5 && out.substr(out.size() - 5) == ".json" ? ReportFormat::Json : ReportFormat::Csv;
    throw ConfigError("unknown format '" + f + "'");
}

void deliver(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_atomic(path, text);
}

void emit_suite(const SuiteReport& r, const std::string& format, const std::string& path, std::ostream& out, std::ostream& err) {
    deliver(render_report(r, format_of(format, path)), path, out);
    std::size_t failed = 0;
    for (const auto& c : r.cases) failed += c.pass ? 0 : 1;
    err << r.suite << ": " << r.cases.size() - failed << "/" << r.cases.size() << " cases pass\n";
    for (const auto& c : r.cases)
        if (!c.pass) err << "  FAIL " << c.name << " (margin " << fmt(c.margin) << ")\n";
}

struct Args {
    std::string config, out, replay, format, suite = "r-estimates";
    std::vector<std::string> grid;
    int threads = -1;
    int sequences = 200;
    int depth = -1;
    int n_max = 64;
    int samples = 4;
    std::uint64_t seed = 1;
    double delta = 0.5, offdiag = 0.01;
    std::uint64_t op_seed = 7;
};

RunConfig load_with_threads(const std::string& path, int threads) {
    auto c = load_config(path);
    if (threads >= 0) c.game.threads = static_cast<unsigned>(threads);
    return c;
}

int cmd_factorize(const Args& a, std::ostream& out, std::ostream& err) {
    const auto cfg = load_with_threads(a.config, a.threads);
    const auto T = make_operator(cfg);
    const auto t0 = Clock::now();
    const auto res = factorize(T, cfg.game);
    const auto& c = res.certificate;
    const bool pass = certificate_passes(c);
    deliver(dump(certificate_artifact(cfg, res)), a.out, out);
    err << "factorize " << branch_name(cfg.game.branch) << ": " << (pass ? "PASS" : "FAIL");
    if (!c.success) err << " at stage " << c.stage << " (" << c.message << ")";
    err << ", residual " << fmt(c.residual_max) << ", ledger " << (c.ledger.all_ok() ? "clean" : "has failures") << ", "
        << fmt(seconds_since(t0)) << " s\n";
    return pass ? 0 : 1;
}

int cmd_game(const Args& a, std::ostream& out, std::ostream& err) {
    if (a.replay.empty() == a.config.empty()) throw ConfigError("game needs exactly one of --config or --replay");
    if (!a.config.empty()) {
        const auto cfg = load_with_threads(a.config, a.threads);
        const auto res = run_game(make_operator(cfg), cfg.game);
        deliver(dump(transcript_artifact(cfg, res)), a.out, out);
        err << "game: " << res.transcript.turns.size() << " turns" << (res.transcript.aborted ? ", aborted: " + res.transcript.abort_reason : "")
            << "\n";
        return res.transcript.aborted ? 1 : 0;
    }
    std::string original;
    {
        std::ifstream in(a.replay, std::ios::binary);
        if (!in) throw ConfigError("cannot open '" + a.replay + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        original = ss.str();
    }
    ojson art;
    try {
        art = ojson::parse(original);
    } catch (const ojson::exception& e) {
        throw ConfigError("'" + a.replay + "': " + e.what());
    }
    if (!art.is_object() || !art.contains("config")) throw ConfigError("'" + a.replay + "' is not a transcript artifact");
    auto cfg = config_from_json(art["config"]);
    if (a.threads >= 0) cfg.game.threads = static_cast<unsigned>(a.threads);
    const auto res = run_game(make_operator(cfg), cfg.game);
    const auto again = dump(transcript_artifact(cfg, res));
    if (!a.out.empty()) write_atomic(a.out, again);
    const bool same = again == original;
    err << "replay: " << (same ? "byte-identical" : "MISMATCH") << "\n";
    return same ? 0 : 1;
}

int cmd_estimates(const Args& a, std::ostream& out, std::ostream& err) {
    SuiteReport r;
    if (a.suite == "r-estimates") {
        REstimateSuiteOptions o;
        if (!a.grid.empty()) {
            o.grid.clear();
            for (const auto& g : a.grid) o.grid.push_back(parse_pair(g));
        }
        o.sequences = a.sequences;
        if (a.depth >= 0) o.depth = a.depth;
        o.seed = a.seed;
        o.threads = a.threads >= 0 ? static_cast<unsigned>(a.threads) : 0;
        r = run_r_estimate_suite(o);
    } else if (a.suite == "curvature") {
        CurvatureSuiteOptions o;
        o.n_max = a.n_max;
        o.samples = a.samples;
        if (a.depth >= 0) o.depth = a.depth;
        o.seed = a.seed;
        o.threads = a.threads >= 0 ? static_cast<unsigned>(a.threads) : 0;
        r = run_curvature_suite(o);
    } else {
        throw ConfigError("unknown suite '" + a.suite + "'");
    }
    emit_suite(r, a.format, a.out, out, err);
    return r.pass() ? 0 : 1;
}

int cmd_gen_op(const Args& a, std::ostream& out, std::ostream&) {
    ZTrunc big;
    if (!a.config.empty())
        big = load_config(a.config).game.big;
    else
        big = ZTrunc({SpaceSpec::hp(2, 6), SpaceSpec::hp(3, 6), SpaceSpec::hphq(3, 2, 3)});
    if (!(a.delta > 0.0) || !(a.offdiag >= 0.0)) throw ConfigError("gen-op: delta must be positive, offdiag non-negative");
    deliver(dump(to_json(random_large_diagonal(big, a.delta, a.offdiag, a.op_seed))), a.out, out);
    return 0;
}

}  // namespace

std::vector<std::string> suite_names() { return {"r-estimates", "curvature"}; }

SuiteReport run_r_estimate_suite(const REstimateSuiteOptions& opt) {
    if (opt.sequences < 0) throw ConfigError("sequences must be >= 0");
    if (opt.depth < 1 || opt.depth > 4) throw ConfigError("r-estimates: 2D depth must lie in [1, 4]");
    const auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "r-estimates";
    r.seed = opt.seed;
    constexpr Profile profiles[] = {Profile::Gaussian, Profile::Flat, Profile::Spike};
    for (std::size_t gi = 0; gi < opt.grid.size(); ++gi) {
        const auto [p, q] = opt.grid[gi];
        const auto spec = SpaceSpec::hphq(p, q, opt.depth);
        try {
            spec.validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        const double lo = std::max({2.0, p, q}), up = std::min({2.0, p, q});
        const auto label = "p" + fmt(p) + "_q" + fmt(q);
        const auto case_seed = derive_seed(opt.seed, gi);
        std::vector<ReportRow> lower(static_cast<std::size_t>(opt.sequences)), upper(lower.size());
        const int max_blocks = static_cast<int>(std::min<std::int64_t>(8, spec.dim()));
        parallel_for(lower.size(), opt.threads, [&](std::size_t i) {
            const auto s = derive_seed(case_seed, i);
            const int count = 2 + static_cast<int>(i % static_cast<std::size_t>(std::max(1, max_blocks - 1)));
            const auto seq = random_blocks(spec, std::min(count, max_blocks), profiles[i % 3], s);
            auto worst = [&](const BlockEstimateReport& rep, const std::string& series) {
                const auto it = std::min_element(rep.rows.begin(), rep.rows.end(),
                                                 [](const EstimateRow& a, const EstimateRow& b) { return a.margin < b.margin; });
                return ReportRow{series, static_cast<std::int64_t>(i), it->value, it->bound, it->margin};
            };
            lower[i] = worst(check_block_estimate(seq, Direction::Lower, lo, 1.0, kEstimateTolerance), "lower_" + label);
            upper[i] = worst(check_block_estimate(seq, Direction::Upper, up, 1.0, kEstimateTolerance), "upper_" + label);
        });
        for (auto* rows : {&lower, &upper}) {
            SuiteCase c;
            c.name = (rows == &lower ? "lower_" : "upper_") + label;
            c.seed = case_seed;
            c.margin = rows->empty() ? 0.0 : std::numeric_limits<double>::infinity();
            for (const auto& row : *rows) c.margin = std::min(c.margin, row.margin);
            c.pass = c.margin >= -kEstimateTolerance;
            c.rows = std::move(*rows);
            r.cases.push_back(std::move(c));
        }
    }
    r.wall_clock_s = seconds_since(t0);
    return r;
}

SuiteReport run_curvature_suite(const CurvatureSuiteOptions& opt) {
    const auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "curvature";
    r.seed = opt.seed;
    if (opt.ps.empty()) return r;
    std::vector<SpaceSpec> specs;
    for (double p : opt.ps) specs.push_back(SpaceSpec::hp(p, opt.depth));
    CurvatureTable tab;
    try {
        tab = curvature_profile(ZTrunc(specs), opt.n_max, opt.samples, opt.seed, opt.threads);
    } catch (const std::logic_error& e) {
        throw ConfigError(e.what());
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto label = "H" + fmt(specs[k].p);
        SuiteCase bound;
        bound.name = "bound_" + label;
        bound.seed = opt.seed;
        bound.margin = std::numeric_limits<double>::infinity();
        for (const auto& row : tab.rows) {
            if (row.component != static_cast<int>(k)) continue;
            bound.rows.push_back({"bound_" + label, row.n, row.value, row.bound, row.margin});
            if (!std::isnan(row.margin)) bound.margin = std::min(bound.margin, row.margin);
        }
        bound.pass = bound.margin >= -kEstimateTolerance;
        r.cases.push_back(std::move(bound));

        SuiteCase fit;
        fit.name = "fit_" + label;
        fit.seed = opt.seed;
        const double got = tab.fitted_exponent[k], want = tab.target_exponent[k];
        fit.margin = opt.fit_tolerance - std::fabs(got - want);
        fit.pass = fit.margin >= 0.0;
        fit.rows.push_back({"fit_" + label, opt.n_max, got, want, fit.margin});
        r.cases.push_back(std::move(fit));
    }
    r.wall_clock_s = seconds_since(t0);
    return r;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"haarfactor: Haar system factorization through the Rep game", "haarfactor"};
    app.require_subcommand(0, 1);
    bool list_suites = false, schema = false;
    app.add_flag("--list-suites", list_suites, "List the available suites");
    app.add_flag("--schema-version", schema, "Print the artifact schema version");

    Args a;
    auto threads_opt = [&](CLI::App* s) {
        s->add_option("--threads", a.threads, "Worker threads (0 = hardware); artifacts do not depend on it")->check(CLI::NonNegativeNumber);
    };

    auto* fac = app.add_subcommand("factorize", "Run the game and assemble a factorization certificate");
    fac->add_option("--config", a.config, "Run configuration (JSON)")->required();
    fac->add_option("--out", a.out, "Certificate path (stdout when omitted)");
    threads_opt(fac);

    auto* game = app.add_subcommand("game", "Play the game, or replay a transcript and compare bytes");
    game->add_option("--config", a.config, "Run configuration (JSON)");
    game->add_option("--replay", a.replay, "Transcript artifact to replay");
    game->add_option("--out", a.out, "Transcript path (stdout when omitted)");
    threads_opt(game);

    auto* est = app.add_subcommand("estimates", "Block estimate suites");
    est->add_option("--suite", a.suite, "Suite name")->check(CLI::IsMember(suite_names()));
    est->add_option("--grid", a.grid, "Exponent pair p,q (repeatable)")->take_all();
    est->add_option("--sequences", a.sequences, "Random sequences per case")->check(CLI::NonNegativeNumber);
    est->add_option("--depth", a.depth, "Truncation depth")->check(CLI::NonNegativeNumber);
    est->add_option("--nmax", a.n_max, "Largest average length (curvature)")->check(CLI::PositiveNumber);
    est->add_option("--samples", a.samples, "Random samples per n (curvature)")->check(CLI::NonNegativeNumber);
    est->add_option("--seed", a.seed, "Suite seed");
    est->add_option("--format", a.format, "csv or json (default from --out extension, csv otherwise)");
    est->add_option("--out", a.out, "Report path (stdout when omitted)");
    threads_opt(est);

    auto* curv = app.add_subcommand("curvature", "Averaging envelopes of H^p components");
    curv->add_option("--nmax", a.n_max, "Largest average length")->check(CLI::PositiveNumber);
    curv->add_option("--depth", a.depth, "Component depth")->check(CLI::NonNegativeNumber);
    curv->add_option("--samples", a.samples, "Random samples per n")->check(CLI::NonNegativeNumber);
    curv->add_option("--seed", a.seed, "Suite seed");
    curv->add_option("--format", a.format, "csv or json");
    curv->add_option("--out", a.out, "Report path (stdout when omitted)");
    threads_opt(curv);

    auto* gen = app.add_subcommand("gen-op", "Write a random operator with a large diagonal");
    gen->add_option("--delta", a.delta, "Diagonal lower bound");
    gen->add_option("--offdiag", a.offdiag, "Off-diagonal scale");
    gen->add_option("--seed", a.op_seed, "Operator seed")->required();
    gen->add_option("--config", a.config, "Take the truncation from this config");
    gen->add_option("--out", a.out, "Operator path (stdout when omitted)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (schema) {
            out << kSchemaVersion << "\n";
            return 0;
        }
        if (list_suites) {
            for (const auto& s : suite_names()) out << s << "\n";
            return 0;
        }
        if (fac->parsed()) return cmd_factorize(a, out, err);
        if (game->parsed()) return cmd_game(a, out, err);
        if (est->parsed()) return cmd_estimates(a, out, err);
        if (curv->parsed()) {
            a.suite = "curvature";
            return cmd_estimates(a, out, err);
        }
        if (gen->parsed()) return cmd_gen_op(a, out, err);
        err << app.help();
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace haarfactor
