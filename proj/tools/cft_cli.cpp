// Command-line front end: census runs, single-curve checks, structure
// formulas, Hilbert symbols and the self-test.
//
// Exit codes: 0 success, 1 usage error, 2 data error (bad input, unmet
// hypotheses, precision exhausted), 3 internal integrity failure.

#include "selftest.hpp"

#include <cft/census.hpp>
#include <cft/symbols.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace cft;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kIntegrity = 3 };

std::array<mpz_class, 5> parse_ainvs_flag(const std::string& text)
{
    std::array<mpz_class, 5> a;
    std::stringstream ss(text);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (i >= 5)
            throw DataError("--ainvs takes exactly five integers");
        if (item.empty() || a[i].set_str(item[0] == '+' ? item.substr(1) : item, 10) != 0)
            throw DataError("--ainvs: not an integer '" + item + "'");
        ++i;
    }
    if (i != 5)
        throw DataError("--ainvs takes exactly five integers a1,a2,a3,a4,a6");
    return a;
}

// Elements of Q_p(mu_{p^M}) written as arithmetic expressions in integers,
// z (= zeta_{p^M}) and pi (= z - 1) with + - * / ^ and parentheses.
class ElementParser {
public:
    ElementParser(FieldPtr K, std::string text) : K_(std::move(K)), s_(std::move(text)) {}

    KElem parse()
    {
        KElem v = sum();
        skip();
        if (i_ != s_.size())
            fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const
    {
        throw DataError("element '" + s_ + "': " + why);
    }
    void skip()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
            ++i_;
    }
    bool eat(char c)
    {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    KElem sum()
    {
        KElem v = product();
        for (;;) {
            if (eat('+'))
                v = v + product();
            else if (eat('-'))
                v = v - product();
            else
                return v;
        }
    }
    KElem product()
    {
        KElem v = power();
        for (;;) {
            if (eat('*')) {
                v = v * power();
            } else if (eat('/')) {
                KElem d = power();
                if (d.is_zero())
                    fail("division by zero");
                v = v / d;
            } else {
                return v;
            }
        }
    }
    KElem power()
    {
        KElem b = unary();
        if (!eat('^'))
            return b;
        skip();
        const std::size_t start = i_;
        if (i_ < s_.size() && (s_[i_] == '-' || s_[i_] == '+'))
            ++i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
            ++i_;
        if (start == i_)
            fail("exponent must be an integer");
        const long k = std::stol(s_.substr(start, i_ - start));
        if (k < 0 && b.is_zero())
            fail("zero to a negative power");
        return b.pow(k);
    }
    KElem unary()
    {
        if (eat('-'))
            return -unary();
        if (eat('+'))
            return unary();
        return atom();
    }
    KElem atom()
    {
        skip();
        if (eat('(')) {
            KElem v = sum();
            if (!eat(')'))
                fail("missing ')'");
            return v;
        }
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            const std::size_t start = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
                ++i_;
            return KElem::exact(K_, mpz_class(s_.substr(start, i_ - start)));
        }
        std::size_t j = i_;
        while (j < s_.size() && std::isalpha(static_cast<unsigned char>(s_[j])))
            ++j;
        const std::string word = s_.substr(i_, j - i_);
        i_ = j;
        if (word == "pi")
            return KElem::pi_power(K_, 1, K_->precision_cap());
        if (word == "z" || word == "zeta")
            return KElem::one(K_) + KElem::pi_power(K_, 1, K_->precision_cap());
        fail(word.empty() ? "expected a number, z or pi" : "unknown name '" + word + "'");
    }

    FieldPtr K_;
    std::string s_;
    std::size_t i_ = 0;
};

std::string flag(bool v)
{
    return v ? "true" : "false";
}

void print_report(std::ostream& out, const WeierstrassCurve& E, const ConditionsReport& r)
{
    out << "curve          " << E.to_string() << "\n";
    out << "field          Q_" << r.p << "(mu_" << r.p << (r.M > 1 ? "^" + std::to_string(r.M) : "") << ")\n";
    out << "good           " << flag(r.good) << "\n";
    out << "a_p            " << (r.ap ? std::to_string(*r.ap) : "-") << "\n";
    out << "ordinary       " << flag(r.ordinary) << "\n";
    if (r.reduced_group)
        out << "reduced group  " << r.reduced_group->to_string() << "\n";
    if (r.rat_checked) {
        out << "rat            " << flag(r.rat) << "\n";
        out << "N              " << r.N << "\n";
        out << "ram            " << flag(r.ram) << "\n";
        out << "x-root vals    ";
        for (std::size_t i = 0; i < r.root_valuations.size(); ++i)
            out << (i ? " " : "") << r.root_valuations[i];
        out << "\n";
    } else {
        out << "rat            not checked (bad reduction)\n";
    }
    out << "hypotheses     " << (hypotheses_hold(r) ? "hold" : "unmet") << "\n";
}

// Input files for a census: the given path, a relative path found under
// CFT_DATA_DIR, or every allcurves.* file of the data directory.
std::vector<std::string> census_inputs(const std::string& input)
{
    namespace fs = std::filesystem;
    const fs::path dir = default_data_dir();
    if (!input.empty()) {
        if (fs::exists(input) || fs::path(input).is_absolute())
            return {input};
        if (fs::exists(dir / input))
            return {(dir / input).string()};
        return {input};  // let the parser report it
    }
    std::vector<std::string> files;
    if (fs::is_directory(dir))
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().filename().string().rfind("allcurves", 0) == 0)
                files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw DataError("no --input given and no allcurves.* file under '" + dir.string() +
                        "' (set CFT_DATA_DIR)");
    return files;
}

bool is_odd_prime(long p)
{
    if (p < 3 || p % 2 == 0)
        return false;
    for (long d = 3; d * d <= p; d += 2)
        if (p % d == 0)
            return false;
    return true;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Class groups of curves over p-adic fields: census, checks and symbols"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // census
    std::string input, format = "cremona", out_path, report_format;
    long p = 3, max_conductor = 1000;
    int M = 1, jobs = 1;
    bool le_bound = false, no_timings = false;
    auto* census = app.add_subcommand("census", "run the staged filter over a curve database");
    census->add_option("--input", input, "database file (default: allcurves.* under CFT_DATA_DIR)");
    census->add_option("--format", format, "cremona (allcurves) or csv")->capture_default_str();
    census->add_option("--p", p, "odd prime")->capture_default_str();
    census->add_option("--M", M, "cyclotomic level of k = Q_p(mu_{p^M})")->capture_default_str();
    census->add_option("--max-conductor", max_conductor, "conductor bound")->capture_default_str();
    census->add_flag("--le-bound", le_bound, "count conductor <= bound instead of <");
    census->add_option("--out", out_path, "report path (default: JSON on stdout)");
    census->add_option("--report-format", report_format, "json or csv (default: from the --out extension)");
    census->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    census->add_flag("--no-timings", no_timings, "omit the timings object from the JSON report");

    // check / structure
    std::string ainvs;
    long mod_n = 0, prime_to_p = 0;
    auto* check = app.add_subcommand("check", "print the condition report of one curve");
    check->add_option("--ainvs", ainvs, "a1,a2,a3,a4,a6")->required();
    check->add_option("--p", p)->capture_default_str();
    check->add_option("--M", M)->capture_default_str();
    auto* structure = app.add_subcommand("structure", "evaluate the structure formulas for one curve");
    structure->add_option("--ainvs", ainvs, "a1,a2,a3,a4,a6")->required();
    structure->add_option("--p", p)->capture_default_str();
    structure->add_option("--M", M)->capture_default_str();
    auto* mod_opt = structure->add_option("--mod", mod_n, "quotient by p^n");
    auto* ptp_opt = structure->add_option("--prime-to-p", prime_to_p, "quotient by m prime to p");
    mod_opt->excludes(ptp_opt);

    // symbol
    std::string a_text, b_text;
    auto* symbol = app.add_subcommand("symbol", "Hilbert symbol (a, b) on Q_p(mu_{p^M})");
    symbol->add_option("--p", p)->capture_default_str();
    symbol->add_option("--M", M)->capture_default_str();
    symbol->add_option("--a", a_text, "element, e.g. 1+z, 3, pi^2*(2-z)")->required();
    symbol->add_option("--b", b_text, "element")->required();
    symbol->footer("Elements are expressions in integers, z = zeta_{p^M} and pi = z - 1.\n"
                   "The value v in Z/p means (a, b) = zeta_p^v, normalized by\n"
                   "(zeta_{p^M}, b) = Tr(log b) / p^M mod p for principal units b.");

    auto* selftest = app.add_subcommand("selftest", "run the quick property suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if ((*census || *check || *structure || *symbol) && !is_odd_prime(p))
            throw CLI::ValidationError("--p", "must be an odd prime");
        if ((*census || *check || *structure || *symbol) && M < 1)
            throw CLI::ValidationError("--M", "must be at least 1");

        if (*census) {
            Database db;
            for (const auto& path : census_inputs(input)) {
                Database part = parse_database(path, parse_db_format(format));
                db.records.insert(db.records.end(), part.records.begin(), part.records.end());
                db.errors.insert(db.errors.end(), part.errors.begin(), part.errors.end());
            }
            CensusParams P;
            P.p = p;
            P.M = M;
            P.max_conductor = max_conductor;
            P.inclusive_bound = le_bound;
            P.jobs = jobs;
            CensusReport rep = jobs == 1 ? run_census_serial(db.records, P) : run_census(db.records, P);
            rep.parse_errors = db.errors;

            std::string fmt = report_format;
            if (fmt.empty())
                fmt = out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv" ? "csv" : "json";
            if (fmt != "json" && fmt != "csv")
                throw CLI::ValidationError("--report-format", "json or csv");
            const ReportFormat rf = fmt == "csv" ? ReportFormat::csv : ReportFormat::json;
            if (out_path.empty()) {
                std::cout << (rf == ReportFormat::csv ? report_csv(rep) : report_json(rep, !no_timings));
            } else if (rf == ReportFormat::json && no_timings) {
                std::ofstream out(out_path, std::ios::binary);
                if (!(out << report_json(rep, false)))
                    throw DataError("cannot write report to '" + out_path + "'");
            } else {
                emit_report(rep, rf, out_path);
            }
            const auto& s = rep.stages;
            std::cerr << "records " << rep.records_read << ", parse errors " << rep.parse_errors.size()
                      << ", curve errors " << rep.errors.size() << "\n"
                      << "stages total " << s.total << " good " << s.good << " ordinary " << s.ordinary
                      << " red_tors " << s.red_tors << " full_tors " << s.full_tors << "\n"
                      << "seconds " << rep.seconds << " (jobs " << jobs << ")\n";
            return kOk;
        }

        if (*check || *structure) {
            const WeierstrassCurve E(parse_ainvs_flag(ainvs));
            const ConditionsReport r = check_conditions(E, p, M);
            if (*check) {
                print_report(std::cout, E, r);
                return kOk;
            }
            std::string lhs = "V_fin";
            AbGroup G;
            if (*mod_opt) {
                G = structure_mod(r, static_cast<int>(mod_n));
                lhs += " / " + std::to_string(p) + "^" + std::to_string(mod_n);
            } else if (*ptp_opt) {
                G = structure_prime_to_p(r, prime_to_p);
                lhs += " / " + std::to_string(prime_to_p);
            } else {
                G = structure_Kfin(r);
            }
            std::cout << lhs << " = " << G.to_string() << "\n";
            return kOk;
        }

        if (*symbol) {
            const FieldPtr K = LocalField::cyclotomic(p, M);
            const KElem a = ElementParser(K, a_text).parse();
            const KElem b = ElementParser(K, b_text).parse();
            if (a.is_zero() || b.is_zero())
                throw DataError("the Hilbert symbol needs nonzero a and b");
            auto H = HilbertPairing::of(K);
            const long v = H->symbol(a, b);
            auto fmt_vec = [](const FpVector& c) {
                std::string s = "(";
                for (std::size_t i = 0; i < c.size(); ++i)
                    s += (i ? "," : "") + std::to_string(c[i]);
                return s + ")";
            };
            std::cout << "field       " << K->describe() << "\n"
                      << "basis       ";
            for (std::size_t i = 0; i < H->units()->labels().size(); ++i)
                std::cout << (i ? " " : "") << H->units()->labels()[i];
            std::cout << "\n"
                      << "a mod p     " << fmt_vec(H->units()->coordinates(a)) << "\n"
                      << "b mod p     " << fmt_vec(H->units()->coordinates(b)) << "\n"
                      << "vanishes    " << flag(v == 0) << "\n"
                      << "value       " << v << " in Z/" << p << "\n";
            return kOk;
        }

        if (*selftest) {
            const int failed = cli::run_selftest(std::cout);
            std::cout << (failed == 0 ? "selftest passed\n" : "selftest FAILED\n");
            return failed == 0 ? kOk : kIntegrity;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis error: " << e.what() << "\n";
        return kData;
    } catch (const PrecisionError& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return kData;
    } catch (const IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kIntegrity;
    }
    return kUsage;
}
