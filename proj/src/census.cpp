#include <cft/census.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#ifndef CFT_SOURCE_DATA_DIR
#define CFT_SOURCE_DATA_DIR "data"
#endif

namespace cft {

namespace {

using ojson = nlohmann::ordered_json;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long parse_long(const std::string& s, const char* what)
{
    static const std::regex integer(R"([+-]?\d+)");
    if (!std::regex_match(s, integer))
        throw DataError(std::string("not an integer ") + what + ": '" + s + "'");
    try {
        return std::stol(s);
    } catch (const std::out_of_range&) {
        throw DataError(std::string(what) + " out of range: '" + s + "'");
    }
}

std::array<mpz_class, 5> parse_ainvs(const std::string& field)
{
    const std::string s = trim(field);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw DataError("a-invariants must be written [a1,a2,a3,a4,a6]");
    std::array<mpz_class, 5> a;
    std::stringstream ss(s.substr(1, s.size() - 2));
    std::string item;
    std::size_t i = 0;
    static const std::regex integer(R"([+-]?\d+)");
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (i >= 5)
            throw DataError("more than five a-invariants");
        if (!std::regex_match(item, integer))
            throw DataError("non-integer a-invariant '" + item + "'");
        a[i++] = mpz_class(item[0] == '+' ? item.substr(1) : item);
    }
    if (i != 5)
        throw DataError("expected five a-invariants, found " + std::to_string(i));
    return a;
}

// RFC 4180 style field splitting with double-quote escaping
std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw DataError("unterminated quote");
    out.push_back(cur);
    return out;
}

void finish(CurveRecord& r)
{
    if (r.conductor < 11)
        throw DataError("conductor below 11");
    WeierstrassCurve E(r.ainvs);  // DataError when singular
    (void)E;
}

CurveRecord parse_cremona_line(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;)
        tok.push_back(t);
    if (tok.size() != 6 && tok.size() != 4)
        throw DataError("expected 6 fields (conductor class number ainvs rank torsion), found " +
                        std::to_string(tok.size()));
    static const std::regex cls("[a-z]+");
    CurveRecord r;
    r.conductor = parse_long(tok[0], "conductor");
    if (!std::regex_match(tok[1], cls))
        throw DataError("isogeny class must be lower-case letters: '" + tok[1] + "'");
    const long number = parse_long(tok[2], "curve number");
    r.label = tok[0] + tok[1] + std::to_string(number);
    r.ainvs = parse_ainvs(tok[3]);
    if (tok.size() == 6) {
        r.rank = parse_long(tok[4], "rank");
        r.torsion = parse_long(tok[5], "torsion");
    }
    finish(r);
    return r;
}

struct CsvColumns {
    std::size_t label, conductor, ainvs;
    std::optional<std::size_t> rank, torsion;
};

CsvColumns csv_header(const std::string& line)
{
    auto cols = split_csv(line);
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < cols.size(); ++i)
        pos[trim(cols[i])] = i;
    auto need = [&](const char* name) {
        auto it = pos.find(name);
        if (it == pos.end())
            throw DataError(std::string("CSV header lacks column '") + name + "'");
        return it->second;
    };
    auto maybe = [&](const char* name) -> std::optional<std::size_t> {
        auto it = pos.find(name);
        return it == pos.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    };
    return {need("label"), need("conductor"), need("ainvs"), maybe("rank"), maybe("torsion")};
}

CurveRecord parse_csv_line(const std::string& line, const CsvColumns& c)
{
    const auto f = split_csv(line);
    auto get = [&](std::size_t i) -> std::string {
        if (i >= f.size())
            throw DataError("row has too few columns");
        return trim(f[i]);
    };
    CurveRecord r;
    r.label = get(c.label);
    if (r.label.empty())
        throw DataError("empty label");
    r.conductor = parse_long(get(c.conductor), "conductor");
    r.ainvs = parse_ainvs(get(c.ainvs));
    if (c.rank && !get(*c.rank).empty())
        r.rank = parse_long(get(*c.rank), "rank");
    if (c.torsion && !get(*c.torsion).empty())
        r.torsion = parse_long(get(*c.torsion), "torsion");
    finish(r);
    return r;
}

struct Outcome {
    bool in_bound = false;
    int stage = 0;
    std::optional<CensusRow> row;
    std::optional<CurveFailure> failure;
    bool fast_path_checked = false;
};

template <class F>
std::optional<CurveFailure> guarded(const std::string& label, F&& body)
{
    try {
        body();
        return std::nullopt;
    } catch (const DataError& e) {
        return CurveFailure{label, "data", e.what()};
    } catch (const PrecisionError& e) {
        return CurveFailure{label, "precision", e.what()};
    } catch (const HypothesisError& e) {
        return CurveFailure{label, "hypothesis", e.what()};
    } catch (const IntegrityError& e) {
        return CurveFailure{label, "integrity", e.what()};
    } catch (const std::exception& e) {
        return CurveFailure{label, "internal", e.what()};
    }
}

Outcome evaluate(const CurveRecord& rec, const CensusParams& P, const FieldPtr& k)
{
    Outcome out;
    out.in_bound = P.inclusive_bound ? rec.conductor <= P.max_conductor : rec.conductor < P.max_conductor;
    if (!out.in_bound)
        return out;
    CensusRow row;
    row.label = rec.label;
    row.conductor = rec.conductor;
    row.report.p = P.p;
    row.report.M = P.M;
    row.report.id = rec.label;
    row.stage = 1;
    out.failure = guarded(rec.label, [&] {
        const WeierstrassCurve E(rec.ainvs);
        // database models are globally minimal, so the conductor decides reduction type
        const ReductionType red = good_ordinary_at(E, P.p, true);
        if (red.good != (rec.conductor % P.p != 0))
            throw DataError("discriminant and conductor disagree about reduction at p");
        row.report.good = red.good;
        row.report.ordinary = red.ordinary;
        row.report.ap = red.ap;
        if (!red.good)
            return;
        row.stage = 2;
        if (red.ordinary) {
            row.stage = 3;
            const bool slow = *red.num_points % P.p == 0;
            if (P.p == 3) {
                // #E~(F_3) = 4 - a_3 and |a_3| <= 3: 3-torsion exactly when a_3 = 1 mod 3
                const bool fast = ((*red.ap % 3) + 3) % 3 == 1;
                out.fast_path_checked = true;
                if (fast != slow)
                    throw IntegrityError("a_3 shortcut disagrees with enumeration");
            }
            if (slow)
                row.stage = 4;
        }
        row.report = check_conditions(E, k, rec.label, true);
        if (row.stage == 4 && row.report.rat)
            row.stage = 5;
        if (hypotheses_hold(row.report))
            row.V_fin = structure_Kfin(row.report);
    });
    out.stage = row.stage;
    out.row = std::move(row);
    return out;
}

CensusReport fold(const std::vector<Outcome>& outcomes, const std::vector<CurveRecord>& records,
                  const CensusParams& P)
{
    CensusReport rep;
    rep.params = P;
    rep.records_read = records.size();
    for (const auto& o : outcomes) {
        if (!o.in_bound)
            continue;
        rep.stages.total += o.stage >= 1;
        rep.stages.good += o.stage >= 2;
        rep.stages.ordinary += o.stage >= 3;
        rep.stages.red_tors += o.stage >= 4;
        rep.stages.full_tors += o.stage >= 5;
        rep.fast_path_checked += o.fast_path_checked;
        if (o.row)
            rep.rows.push_back(*o.row);
        if (o.failure)
            rep.errors.push_back(*o.failure);
    }
    return rep;
}

void check_params(const CensusParams& P)
{
    if (P.p < 3 || P.p > 97)
        throw DataError("census needs an odd prime 3 <= p <= 97");
    for (long d = 2; d * d <= P.p; ++d)
        if (P.p % d == 0)
            throw DataError("p must be prime");
    if (P.M < 1)
        throw DataError("M must be at least 1");
    if (P.jobs < 1)
        throw DataError("jobs must be at least 1");
}

ojson group_json(const std::optional<AbGroup>& g)
{
    if (!g)
        return nullptr;
    ojson a = ojson::array();
    for (long d : g->invariants())
        a.push_back(d);
    return a;
}

std::string group_text(const std::optional<AbGroup>& g)
{
    return g ? group_json(g).dump() : std::string();
}

}  // namespace

DbFormat parse_db_format(const std::string& name)
{
    if (name == "cremona" || name == "cremona-allcurves" || name == "allcurves")
        return DbFormat::cremona;
    if (name == "csv")
        return DbFormat::csv;
    throw DataError("unknown database format '" + name + "' (cremona or csv)");
}

Database parse_database(std::istream& in, DbFormat format)
{
    Database db;
    std::optional<CsvColumns> cols;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        try {
            if (format == DbFormat::csv && !cols) {
                cols = csv_header(t);
                continue;
            }
            CurveRecord r = format == DbFormat::csv ? parse_csv_line(t, *cols) : parse_cremona_line(t);
            r.line = n;
            db.records.push_back(std::move(r));
        } catch (const DataError& e) {
            if (format == DbFormat::csv && !cols)
                throw;
            db.errors.push_back({n, t, e.what()});
        }
    }
    return db;
}

Database parse_database(const std::string& path, DbFormat format)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot read database '" + path + "'");
    Database db = parse_database(in, format);
    if (db.records.empty())
        throw DataError("database '" + path + "' contains no valid record");
    return db;
}

CensusReport run_census_serial(const std::vector<CurveRecord>& records, const CensusParams& params)
{
    check_params(params);
    const auto start = std::chrono::steady_clock::now();
    const FieldPtr k = LocalField::cyclotomic(params.p, params.M);
    std::vector<Outcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& r : records)
        outcomes.push_back(evaluate(r, params, k));
    CensusReport rep = fold(outcomes, records, params);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

CensusReport run_census(const std::vector<CurveRecord>& records, const CensusParams& params)
{
    check_params(params);
    const auto start = std::chrono::steady_clock::now();
    const FieldPtr k = LocalField::cyclotomic(params.p, params.M);
    std::vector<Outcome> outcomes(records.size());
    const long n = static_cast<long>(records.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(params.jobs)
    for (long i = 0; i < n; ++i)
        outcomes[static_cast<std::size_t>(i)] = evaluate(records[static_cast<std::size_t>(i)], params, k);
    CensusReport rep = fold(outcomes, records, params);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::string report_json(const CensusReport& rep, bool with_timings)
{
    ojson j;
    const auto& P = rep.params;
    j["params"] = {{"p", P.p},
                   {"M", P.M},
                   {"field", "Q_" + std::to_string(P.p) + "(mu_" + std::to_string(P.p) +
                                 (P.M > 1 ? "^" + std::to_string(P.M) : std::string()) + ")"},
                   {"max_conductor", P.max_conductor},
                   {"conductor_bound", P.inclusive_bound ? "inclusive" : "strict"},
                   {"unit", "curves"},
                   {"records_read", rep.records_read}};
    j["stages"] = {{"total", rep.stages.total},
                   {"good", rep.stages.good},
                   {"ordinary", rep.stages.ordinary},
                   {"red_tors", rep.stages.red_tors},
                   {"full_tors", rep.stages.full_tors}};
    ojson curves = ojson::array();
    for (const auto& row : rep.rows) {
        const auto& r = row.report;
        ojson c;
        c["label"] = row.label;
        c["conductor"] = row.conductor;
        c["a_p"] = r.ap ? ojson(*r.ap) : ojson(nullptr);
        c["flags"] = {{"good", r.good},
                      {"ord", r.ordinary},
                      {"rat", r.rat_checked ? ojson(r.rat) : ojson(nullptr)},
                      {"ram", r.rat_checked ? ojson(r.ram) : ojson(nullptr)}};
        c["N"] = r.rat_checked ? ojson(r.N) : ojson(nullptr);
        c["reduced_group"] = group_json(r.reduced_group);
        c["V_fin"] = group_json(row.V_fin);
        c["stage"] = row.stage;
        curves.push_back(std::move(c));
    }
    j["curves"] = std::move(curves);
    ojson errors = ojson::array();
    for (const auto& e : rep.parse_errors)
        errors.push_back({{"kind", "parse"}, {"line", e.line}, {"text", e.text}, {"message", e.reason}});
    for (const auto& e : rep.errors)
        errors.push_back({{"kind", e.kind}, {"label", e.label}, {"message", e.message}});
    j["errors"] = std::move(errors);
    if (with_timings)
        j["timings"] = {{"census_seconds", rep.seconds}, {"jobs", P.jobs}};
    j["version"] = kVersion;
    return j.dump(2) + "\n";
}

std::string report_csv(const CensusReport& rep)
{
    std::ostringstream out;
    out << "label,conductor,a_p,good,ord,rat,ram,N,reduced_group,V_fin,stage\n";
    auto b = [](bool v) { return v ? "true" : "false"; };
    for (const auto& row : rep.rows) {
        const auto& r = row.report;
        out << row.label << ',' << row.conductor << ',' << (r.ap ? std::to_string(*r.ap) : "") << ','
            << b(r.good) << ',' << b(r.ordinary) << ',' << (r.rat_checked ? b(r.rat) : "") << ','
            << (r.rat_checked ? b(r.ram) : "") << ',' << (r.rat_checked ? std::to_string(r.N) : "") << ",\""
            << group_text(r.reduced_group) << "\",\"" << group_text(row.V_fin) << "\"," << row.stage << '\n';
    }
    return out.str();
}

void emit_report(const CensusReport& report, ReportFormat format, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write report to '" + path + "'");
    out << (format == ReportFormat::json ? report_json(report) : report_csv(report));
    if (!out)
        throw DataError("failed writing report to '" + path + "'");
}

std::string default_data_dir()
{
    if (const char* env = std::getenv("CFT_DATA_DIR"); env && *env)
        return env;
    return CFT_SOURCE_DATA_DIR;
}

}  // namespace cft
