#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "haarfactor/game.hpp"

namespace haarfactor {

using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed or inconsistent input; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ojson to_json(const SpaceSpec& s);
SpaceSpec spec_from_json(const ojson& j);
ojson to_json(const ZTrunc& t);  // {"components":[...]}
ZTrunc trunc_from_json(const ojson& j);
ojson to_json(const HaarIndex& idx);  // {"dim":1,"level":n,"pos":k} or {"dim":2,"x":{...},"y":{...}}
ojson index_json(const SpaceSpec& s, std::int64_t ordinal0);

// Dense row-major matrix with headers binding rows/columns to (k, j) and Haar indices.
ojson to_json(const OperatorZ& T);
OperatorZ operator_from_json(const ojson& j);

struct OperatorSpec {
    std::string type = "random_large_diagonal";  // random_large_diagonal | identity | file
    double delta = 0.5;
    double off_diag = 0.01;
    std::uint64_t seed = 0;
    std::string path;  // type file; relative paths resolve against the config directory
};

struct RunConfig {
    GameConfig game;
    OperatorSpec op;
};

// Seeds are mandatory: the config seed always, the operator seed for random operators.
RunConfig config_from_json(const ojson& j);
// Thread count is an execution detail and is not serialized, so artifacts do not depend on it.
ojson to_json(const RunConfig& c);
OperatorZ make_operator(const RunConfig& c, const std::filesystem::path& base_dir = {});

ojson parse_json_file(const std::filesystem::path& path);  // ConfigError on I/O or syntax failure
RunConfig load_config(const std::filesystem::path& path);

ojson to_json(const BlockSystem& bs);
ojson to_json(const Transcript& tr, const ZTrunc& big);  // E entries carry the host's Haar indices
// Replayable artifact: config, transcript, and the block system when the game finished.
ojson transcript_artifact(const RunConfig& cfg, const GameResult& res);
ojson to_json(const Ledger& l);
ojson to_json(const FactorizationCertificate& c);
ojson certificate_artifact(const RunConfig& cfg, const FactorizeResult& res);

// Exit status contract for a factorization: pipeline success and residual within tolerance.
inline constexpr double kResidualTolerance = 1e-8;
bool certificate_passes(const FactorizationCertificate& c);

struct ReportRow {
    std::string series;
    std::int64_t n = 0;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct SuiteCase {
    std::string name;
    bool pass = true;
    double margin = 0.0;  // worst margin over the rows
    std::uint64_t seed = 0;
    std::vector<ReportRow> rows;
};

struct SuiteReport {
    int schema_version = kSchemaVersion;
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<SuiteCase> cases;
    double wall_clock_s = 0.0;  // metadata only

    bool pass() const;
};

enum class ReportFormat { Json, Csv };

ojson to_json(const SuiteReport& r);
SuiteReport report_from_json(const ojson& j);
std::string report_csv(const SuiteReport& r);
inline constexpr const char* kCsvHeader = "series,n,value,bound,margin";
std::string render_report(const SuiteReport& r, ReportFormat f);
void emit_report(const SuiteReport& r, ReportFormat f, const std::filesystem::path& path);

// Stable text form used for every artifact (two-space indent, trailing newline).
std::string dump(const ojson& j);
// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace haarfactor
