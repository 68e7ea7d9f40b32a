#include "haarfactor/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace haarfactor {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

const ojson& field(const ojson& j, const char* key, const std::string& where) {
    if (!j.is_object()) bad(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(where + ": missing field '" + key + "'");
    return *it;
}

double num(const ojson& j, const std::string& where) {
    if (!j.is_number()) bad(where + ": expected a number");
    return j.get<double>();
}

std::int64_t integer(const ojson& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where + ": expected an integer");
    return j.get<std::int64_t>();
}

std::uint64_t seed_of(const ojson& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        bad(where + ": seed must be a non-negative integer");
    return j.get<std::uint64_t>();
}

std::string str(const ojson& j, const std::string& where) {
    if (!j.is_string()) bad(where + ": expected a string");
    return j.get<std::string>();
}

double opt_num(const ojson& j, const char* key, double def, const std::string& where) {
    auto it = j.find(key);
    return it == j.end() ? def : num(*it, where + "." + key);
}

// NaN and infinities have no JSON literal; they travel as null.
ojson real(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }
double real_of(const ojson& j, const std::string& where) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return num(j, where);
}

ojson interval_json(const DyadicInterval& I) {
    ojson j;
    j["level"] = I.level;
    j["pos"] = I.pos;
    return j;
}

ojson matrix_rows(const Eigen::MatrixXd& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(real(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

ojson coords_header(const ZTrunc& t) {
    ojson h = ojson::array();
    for (std::int64_t g = 0; g < t.size(); ++g) {
        const auto [k, jj] = t.coord(g);
        ojson e;
        e["g"] = g;
        e["k"] = k;
        e["j"] = jj;
        e["index"] = index_json(t.spec(k), jj);
        h.push_back(std::move(e));
    }
    return h;
}

ojson ints(const std::vector<int>& v) {
    ojson a = ojson::array();
    for (int x : v) a.push_back(x);
    return a;
}

ojson ints(const std::vector<std::int64_t>& v) {
    ojson a = ojson::array();
    for (auto x : v) a.push_back(x);
    return a;
}

ojson reals(const std::vector<double>& v) {
    ojson a = ojson::array();
    for (double x : v) a.push_back(real(x));
    return a;
}

std::string csv_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ojson to_json(const SpaceSpec& s) {
    ojson j;
    j["kind"] = kind_name(s.kind);
    switch (s.kind) {
        case Kind::Lp:
        case Kind::Hp: j["p"] = s.p; break;
        case Kind::HpHq: j["p"] = s.p; j["q"] = s.q; break;
        case Kind::VMO: break;
        case Kind::VMOHr: j["r"] = s.p; break;
        case Kind::LrLs: j["r"] = s.p; j["s"] = s.q; break;
    }
    j["depth"] = s.depth;
    return j;
}

SpaceSpec spec_from_json(const ojson& j) {
    const std::string w = "component";
    SpaceSpec s;
    try {
        s.kind = kind_from_name(str(field(j, "kind", w), w + ".kind"));
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }
    const auto d = integer(field(j, "depth", w), w + ".depth");
    if (d < 0 || d > 30) bad(w + ": depth out of range");
    s.depth = static_cast<int>(d);
    switch (s.kind) {
        case Kind::Lp:
        case Kind::Hp: s.p = num(field(j, "p", w), w + ".p"); break;
        case Kind::HpHq:
            s.p = num(field(j, "p", w), w + ".p");
            s.q = num(field(j, "q", w), w + ".q");
            break;
        case Kind::VMO: break;
        case Kind::VMOHr: s.p = num(field(j, "r", w), w + ".r"); break;
        case Kind::LrLs:
            s.p = num(field(j, "r", w), w + ".r");
            s.q = num(field(j, "s", w), w + ".s");
            break;
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        bad(std::string("component: ") + e.what());
    }
    return s;
}

ojson to_json(const ZTrunc& t) {
    ojson c = ojson::array();
    for (const auto& s : t.components()) c.push_back(to_json(s));
    ojson j;
    j["components"] = std::move(c);
    return j;
}

ZTrunc trunc_from_json(const ojson& j) {
    const auto& c = field(j, "components", "truncation");
    if (!c.is_array()) bad("truncation.components: expected an array");
    std::vector<SpaceSpec> specs;
    for (const auto& e : c) specs.push_back(spec_from_json(e));
    return ZTrunc(std::move(specs));
}

ojson to_json(const HaarIndex& idx) {
    ojson j;
    if (idx.two_param()) {
        j["dim"] = 2;
        j["x"] = interval_json(idx.rect().x);
        j["y"] = interval_json(idx.rect().y);
    } else {
        j["dim"] = 1;
        j["level"] = idx.interval().level;
        j["pos"] = idx.interval().pos;
    }
    return j;
}

ojson index_json(const SpaceSpec& s, std::int64_t ordinal0) {
    if (!s.two_param()) return to_json(HaarIndex{interval_from_ordinal0(ordinal0), ordinal0 + 1});
    const auto& ro = rect_order(s.depth);
    const auto [ox, oy] = ro.rect_of.at(static_cast<std::size_t>(ordinal0));
    return to_json(HaarIndex{DyadicRect{interval_from_ordinal0(ox), interval_from_ordinal0(oy)}, ordinal0 + 1});
}

ojson to_json(const OperatorZ& T) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["domain"] = to_json(T.domain);
    j["codomain"] = to_json(T.codomain);
    j["rows"] = T.m.rows();
    j["cols"] = T.m.cols();
    j["row_coords"] = coords_header(T.codomain);
    j["col_coords"] = coords_header(T.domain);
    j["data"] = matrix_rows(T.m);
    return j;
}

OperatorZ operator_from_json(const ojson& j) {
    const std::string w = "operator";
    const auto dom = trunc_from_json(field(j, "domain", w));
    const auto cod = trunc_from_json(field(j, "codomain", w));
    const auto& data = field(j, "data", w);
    if (!data.is_array() || static_cast<std::int64_t>(data.size()) != cod.size())
        bad(w + ".data: row count does not match the codomain");
    Eigen::MatrixXd m(cod.size(), dom.size());
    for (std::int64_t r = 0; r < cod.size(); ++r) {
        const auto& row = data[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<std::int64_t>(row.size()) != dom.size())
            bad(w + ".data: row " + std::to_string(r) + " has the wrong length");
        for (std::int64_t c = 0; c < dom.size(); ++c) m(r, c) = num(row[static_cast<std::size_t>(c)], w + ".data");
    }
    return OperatorZ(dom, cod, std::move(m));
}

RunConfig config_from_json(const ojson& j) {
    const std::string w = "config";
    if (!j.is_object()) bad(w + ": expected an object");
    if (auto it = j.find("schema_version"); it != j.end() && integer(*it, w + ".schema_version") != kSchemaVersion)
        bad(w + ": unsupported schema_version");
    RunConfig c;
    auto& g = c.game;
    g.seed = seed_of(field(j, "seed", w), w + ".seed");
    g.big = trunc_from_json(field(j, "big", w));
    g.small = trunc_from_json(field(j, "small", w));
    g.eta = opt_num(j, "eta", g.eta, w);
    try {
        if (auto it = j.find("branch"); it != j.end()) g.branch = branch_from_name(str(*it, w + ".branch"));
        if (auto it = j.find("constraint_mode"); it != j.end()) g.mode = mode_from_name(str(*it, w + ".constraint_mode"));
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }
    if (auto it = j.find("delta"); it != j.end() && !it->is_null()) g.delta = num(*it, w + ".delta");
    g.C = opt_num(j, "C", g.C, w);
    g.norm_slack = opt_num(j, "norm_slack", g.norm_slack, w);
    if (auto it = j.find("norm_trials"); it != j.end()) g.norm_trials = static_cast<int>(integer(*it, w + ".norm_trials"));
    if (auto it = j.find("equivalence_samples"); it != j.end())
        g.equivalence_samples = static_cast<int>(integer(*it, w + ".equivalence_samples"));
    if (auto it = j.find("threads"); it != j.end()) {
        const auto t = integer(*it, w + ".threads");
        if (t < 0) bad(w + ".threads: must be >= 0");
        g.threads = static_cast<unsigned>(t);
    }
    if (auto it = j.find("rho"); it != j.end() && !it->is_null()) g.rho = num(*it, w + ".rho");
    if (auto it = j.find("omega"); it != j.end()) {
        if (!it->is_array()) bad(w + ".omega: expected an array of arrays");
        for (const auto& set : *it) {
            if (!set.is_array()) bad(w + ".omega: expected an array of arrays");
            std::vector<int> s;
            for (const auto& x : set) s.push_back(static_cast<int>(integer(x, w + ".omega")));
            g.omega.push_back(std::move(s));
        }
    }

    const auto& op = field(j, "operator", w);
    const std::string wo = w + ".operator";
    c.op.type = str(field(op, "type", wo), wo + ".type");
    if (c.op.type == "random_large_diagonal") {
        c.op.delta = num(field(op, "delta", wo), wo + ".delta");
        c.op.off_diag = opt_num(op, "off_diag", c.op.off_diag, wo);
        c.op.seed = seed_of(field(op, "seed", wo), wo + ".seed");
        if (!(c.op.delta > 0.0) || !(c.op.off_diag >= 0.0)) bad(wo + ": delta must be positive, off_diag non-negative");
    } else if (c.op.type == "file") {
        c.op.path = str(field(op, "path", wo), wo + ".path");
    } else if (c.op.type != "identity") {
        bad(wo + ".type: unknown operator type '" + c.op.type + "'");
    }

    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }
    return c;
}

ojson to_json(const RunConfig& c) {
    const auto& g = c.game;
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = g.seed;
    j["eta"] = g.eta;
    j["branch"] = branch_name(g.branch);
    j["constraint_mode"] = mode_name(g.mode);
    j["big"] = to_json(g.big);
    j["small"] = to_json(g.small);
    j["delta"] = g.delta ? ojson(*g.delta) : ojson(nullptr);
    j["C"] = g.C;
    j["norm_slack"] = g.norm_slack;
    j["norm_trials"] = g.norm_trials;
    j["equivalence_samples"] = g.equivalence_samples;
    if (!g.omega.empty()) {
        ojson om = ojson::array();
        for (const auto& s : g.omega) om.push_back(ints(s));
        j["omega"] = std::move(om);
    }
    j["rho"] = g.rho ? ojson(*g.rho) : ojson(nullptr);
    ojson op;
    op["type"] = c.op.type;
    if (c.op.type == "random_large_diagonal") {
        op["delta"] = c.op.delta;
        op["off_diag"] = c.op.off_diag;
        op["seed"] = c.op.seed;
    } else if (c.op.type == "file") {
        op["path"] = c.op.path;
    }
    j["operator"] = std::move(op);
    return j;
}

OperatorZ make_operator(const RunConfig& c, const std::filesystem::path& base_dir) {
    const auto& big = c.game.big;
    if (c.op.type == "identity") return OperatorZ::identity(big);
    if (c.op.type == "random_large_diagonal") return random_large_diagonal(big, c.op.delta, c.op.off_diag, c.op.seed);
    std::filesystem::path p(c.op.path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    auto T = operator_from_json(parse_json_file(p));
    if (!(T.domain == big) || !(T.codomain == big)) bad("operator file: truncation does not match the config's big system");
    return T;
}

ojson parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open '" + path.string() + "'");
    try {
        return ojson::parse(in);
    } catch (const ojson::exception& e) {
        bad("'" + path.string() + "': " + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    auto c = config_from_json(parse_json_file(path));
    // pin operator files to absolute paths so artifacts replay from any directory
    if (c.op.type == "file") {
        std::filesystem::path p(c.op.path);
        if (p.is_relative()) c.op.path = std::filesystem::absolute(path.parent_path() / p).lexically_normal().string();
    }
    return c;
}

ojson to_json(const BlockSystem& bs) {
    ojson arr = ojson::array();
    for (std::size_t g = 0; g < bs.blocks.size(); ++g) {
        const auto& b = bs.blocks[g];
        const auto [k, j] = bs.small.coord(static_cast<std::int64_t>(g));
        ojson e;
        e["g"] = g;
        e["small"] = {{"k", k}, {"j", j}, {"index", index_json(bs.small.spec(k), j)}};
        e["host"] = b.host;
        ojson E = ojson::array();
        for (auto o : b.E) E.push_back({{"ordinal", o}, {"index", index_json(bs.big.spec(b.host), o)}});
        e["E"] = std::move(E);
        e["lambda"] = reals(b.lambda);
        e["mu"] = reals(b.mu);
        e["eps"] = ints(b.eps);
        arr.push_back(std::move(e));
    }
    ojson j;
    j["small"] = to_json(bs.small);
    j["big"] = to_json(bs.big);
    j["blocks"] = std::move(arr);
    return j;
}

ojson to_json(const Transcript& tr, const ZTrunc& big) {
    ojson j;
    j["schema_version"] = tr.schema_version;
    j["branch"] = tr.branch;
    j["constraint_mode"] = tr.mode;
    j["seed"] = tr.seed;
    j["eta"] = real(tr.eta);
    j["delta"] = real(tr.delta);
    j["T_norm_lower"] = real(tr.T_norm_lower);
    j["T_norm_upper"] = real(tr.T_norm_upper);
    j["tau"] = real(tr.tau);
    j["classes"] = ints(tr.classes);
    ojson turns = ojson::array();
    for (const auto& t : tr.turns) {
        ojson p1;
        p1["n"] = t.p1.n;
        p1["host"] = t.p1.host;
        p1["eta_n"] = real(t.p1.eta_n);
        p1["l_n"] = t.p1.l_n;
        p1["tails"] = ints(t.p1.tails);
        ojson p2;
        p2["sign_class"] = t.p2.sign_class;
        ojson E = ojson::array();
        for (auto o : t.p2.E) {
            ojson e;
            e["ordinal"] = o;
            if (t.p1.host >= 0 && t.p1.host < big.K()) e["index"] = index_json(big.spec(t.p1.host), o);
            E.push_back(std::move(e));
        }
        p2["E"] = std::move(E);
        p2["lambda"] = reals(t.p2.lambda);
        p2["mu"] = reals(t.p2.mu);
        p2["dist_G"] = real(t.p2.dist_G);
        p2["dist_W"] = real(t.p2.dist_W);
        p2["placement"] = t.p2.placement;
        ojson s;
        s["eps"] = ints(t.signs.eps);
        s["value"] = real(t.signs.value);
        s["mean"] = real(t.signs.mean);
        s["exhaustive"] = t.signs.exhaustive;
        turns.push_back({{"player1", std::move(p1)}, {"player2", std::move(p2)}, {"signs", std::move(s)}});
    }
    j["turns"] = std::move(turns);
    j["final_tails"] = ints(tr.final_tails);
    ojson past = ojson::array();
    for (const auto& p : tr.past)
        past.push_back({{"n", p.n}, {"value", real(p.value)}, {"bound", real(p.bound)}, {"ok", p.ok}});
    j["past_estimates"] = std::move(past);
    j["aborted"] = tr.aborted;
    j["abort_reason"] = tr.abort_reason;
    return j;
}

ojson transcript_artifact(const RunConfig& cfg, const GameResult& res) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "transcript";
    j["config"] = to_json(cfg);
    j["transcript"] = to_json(res.transcript, cfg.game.big);
    j["block_system"] = res.blocks ? to_json(*res.blocks) : ojson(nullptr);
    return j;
}

ojson to_json(const Ledger& l) {
    ojson arr = ojson::array();
    for (const auto& e : l.entries) {
        ojson x;
        x["cond"] = e.cond;
        x["m"] = e.m;
        x["sum"] = real(e.value);
        x["bound"] = real(e.bound);
        x["margin"] = real(e.margin);
        x["ok"] = e.ok;
        if (!e.note.empty()) x["note"] = e.note;
        arr.push_back(std::move(x));
    }
    return arr;
}

ojson to_json(const FactorizationCertificate& c) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["success"] = c.success;
    j["stage"] = c.stage;
    j["message"] = c.message;
    j["branch"] = c.branch;
    j["delta"] = real(c.delta);
    j["eta"] = real(c.eta);
    j["lambda"] = real(c.lambda);
    j["C_lower"] = real(c.C_lower);
    j["C_heuristic"] = real(c.C_heuristic);
    j["K"] = real(c.K);
    j["ledger"] = to_json(c.ledger);
    j["ledger_all_ok"] = c.ledger.all_ok();
    j["residual_max"] = real(c.residual_max);
    j["norm_product_lower"] = real(c.norm_product_lower);
    j["paper_bound"] = c.paper_bound ? real(*c.paper_bound) : ojson(nullptr);
    j["gamma"] = ints(c.gamma);
    j["q_condition"] = real(c.q_condition);
    ojson norms;
    norms["T_lower"] = real(c.T_norm_lower);
    norms["T_upper"] = real(c.T_norm_upper);
    norms["A_tilde_lower"] = real(c.norm_A_lower);
    norms["B_tilde_lower"] = real(c.norm_B_lower);
    norms["product_lower"] = real(c.norm_product_lower);
    j["norms"] = std::move(norms);
    ojson ops;
    auto put = [&](const char* name, const OperatorZ& T) {
        if (T.m.size() > 0) ops[name] = to_json(T);
    };
    put("A", c.A);
    put("B", c.B);
    put("D", c.D);
    put("Q", c.Q);
    put("A_tilde", c.A_tilde);
    put("B_tilde", c.B_tilde);
    j["operators"] = std::move(ops);
    return j;
}

ojson certificate_artifact(const RunConfig& cfg, const FactorizeResult& res) {
    ojson j = to_json(res.certificate);
    j["pass"] = certificate_passes(res.certificate);
    j["config"] = to_json(cfg);
    if (res.gamma) {
        ojson g;
        g["gamma"] = ints(res.gamma->gamma);
        g["picks"] = ints(res.gamma->picks);
        g["bound_upper"] = real(res.gamma->bound_upper);
        g["bound_lower"] = real(res.gamma->bound_lower);
        g["target"] = real(res.gamma->target);
        ojson hits = ojson::array();
        for (bool b : res.gamma_meets_omega) hits.push_back(b);
        g["meets_omega"] = std::move(hits);
        j["gamma_selection"] = std::move(g);
    }
    j["transcript"] = to_json(res.transcript, cfg.game.big);
    return j;
}

bool certificate_passes(const FactorizationCertificate& c) {
    return c.success && std::isfinite(c.residual_max) && c.residual_max <= kResidualTolerance;
}

bool SuiteReport::pass() const {
    return std::all_of(cases.begin(), cases.end(), [](const SuiteCase& c) { return c.pass; });
}

ojson to_json(const SuiteReport& r) {
    ojson j;
    j["schema_version"] = r.schema_version;
    j["suite"] = r.suite;
    j["seed"] = r.seed;
    j["pass"] = r.pass();
    ojson cases = ojson::array();
    for (const auto& c : r.cases) {
        ojson rows = ojson::array();
        for (const auto& row : c.rows)
            rows.push_back({{"series", row.series}, {"n", row.n}, {"value", real(row.value)}, {"bound", real(row.bound)},
                            {"margin", real(row.margin)}});
        cases.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", real(c.margin)}, {"seed", c.seed}, {"rows", std::move(rows)}});
    }
    j["cases"] = std::move(cases);
    j["metadata"] = {{"wall_clock_s", r.wall_clock_s}};
    return j;
}

SuiteReport report_from_json(const ojson& j) {
    const std::string w = "report";
    SuiteReport r;
    r.schema_version = static_cast<int>(integer(field(j, "schema_version", w), w + ".schema_version"));
    if (r.schema_version != kSchemaVersion) bad(w + ": unsupported schema_version");
    r.suite = str(field(j, "suite", w), w + ".suite");
    r.seed = seed_of(field(j, "seed", w), w + ".seed");
    for (const auto& c : field(j, "cases", w)) {
        SuiteCase sc;
        sc.name = str(field(c, "name", w), w + ".name");
        sc.pass = field(c, "pass", w).get<bool>();
        sc.margin = real_of(field(c, "margin", w), w + ".margin");
        sc.seed = seed_of(field(c, "seed", w), w + ".seed");
        for (const auto& row : field(c, "rows", w))
            sc.rows.push_back({str(field(row, "series", w), w), integer(field(row, "n", w), w),
                               real_of(field(row, "value", w), w), real_of(field(row, "bound", w), w),
                               real_of(field(row, "margin", w), w)});
        r.cases.push_back(std::move(sc));
    }
    if (auto it = j.find("metadata"); it != j.end()) r.wall_clock_s = opt_num(*it, "wall_clock_s", 0.0, w);
    return r;
}

std::string report_csv(const SuiteReport& r) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& c : r.cases)
        for (const auto& row : c.rows)
            out += row.series + "," + std::to_string(row.n) + "," + csv_real(row.value) + "," + csv_real(row.bound) + "," +
                   csv_real(row.margin) + "\n";
    return out;
}

std::string render_report(const SuiteReport& r, ReportFormat f) {
    return f == ReportFormat::Json ? dump(to_json(r)) : report_csv(r);
}

void emit_report(const SuiteReport& r, ReportFormat f, const std::filesystem::path& path) {
    write_atomic(path, render_report(r, f));
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

}  // namespace haarfactor
