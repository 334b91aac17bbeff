#pragma once

// Curve-database ingestion, the staged census filter and report emission.

#include <cft/structure.hpp>

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cft {

inline constexpr const char* kVersion = "1.0.0";

struct CurveRecord {
    std::string label;  // e.g. "11a1"
    long conductor = 0;
    std::array<mpz_class, 5> ainvs;
    std::optional<long> rank;
    std::optional<long> torsion;
    std::size_t line = 0;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string text;
    std::string reason;
};

struct Database {
    std::vector<CurveRecord> records;
    std::vector<ParseIssue> errors;
};

enum class DbFormat { cremona, csv };
DbFormat parse_db_format(const std::string& name);

/// One record per line; malformed lines go to the error list. Throws
/// DataError when the file cannot be read or yields no record.
Database parse_database(const std::string& path, DbFormat format);
/// Same on an already opened stream (no emptiness check).
Database parse_database(std::istream& in, DbFormat format);

struct CensusParams {
    long p = 3;
    int M = 1;
    long max_conductor = 1000;
    bool inclusive_bound = false;  // conductor <= bound instead of <
    int jobs = 1;
};

struct StageCounts {
    long total = 0;      // within the conductor bound
    long good = 0;       // good reduction at p
    long ordinary = 0;   // a_p prime to p
    long red_tors = 0;   // p | #E~(F_p)
    long full_tors = 0;  // E[p] inside E(Q_p(mu_{p^M}))
    bool operator==(const StageCounts&) const = default;
};

struct CensusRow {
    std::string label;
    long conductor = 0;
    ConditionsReport report;
    int stage = 0;                 // number of stages passed (1..5)
    std::optional<AbGroup> V_fin;  // only when the structure hypotheses hold
};

struct CurveFailure {
    std::string label;
    std::string kind;  // data / precision / hypothesis / integrity
    std::string message;
};

struct CensusReport {
    CensusParams params;
    std::size_t records_read = 0;
    StageCounts stages;
    std::vector<CensusRow> rows;
    std::vector<CurveFailure> errors;
    std::vector<ParseIssue> parse_errors;
    long fast_path_checked = 0;  // records where the p = 3 shortcut was compared
    double seconds = 0.0;
};

/// Serial reference pipeline.
CensusReport run_census_serial(const std::vector<CurveRecord>& records, const CensusParams& params);
/// OpenMP map over records with an in-order fold; identical output to the
/// serial pipeline for any params.jobs.
CensusReport run_census(const std::vector<CurveRecord>& records, const CensusParams& params);

enum class ReportFormat { json, csv };
/// Deterministic serialization; with_timings=false omits the timing object.
std::string report_json(const CensusReport& report, bool with_timings = true);
std::string report_csv(const CensusReport& report);
/// Writes the report; DataError when the path cannot be written.
void emit_report(const CensusReport& report, ReportFormat format, const std::string& path);

/// CFT_DATA_DIR when set, otherwise the compiled-in data directory.
std::string default_data_dir();

}  // namespace cft
