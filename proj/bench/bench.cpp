// Serial reference vs OpenMP kernels: census over a curve database and point
// counting over large prime fields. Every parallel result is compared with
// its serial counterpart before a timing is reported.

#include <cft/census.hpp>

#include <CLI11.hpp>

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>

using namespace cft;

namespace {

template <class F>
double seconds(F&& f, int repeats)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const std::string& what, int threads, double serial, double parallel)
{
    std::cout << std::left << std::setw(34) << what << std::right << std::setw(8) << threads << std::fixed
              << std::setprecision(4) << std::setw(12) << serial << std::setw(12) << parallel << std::setw(9)
              << std::setprecision(2) << serial / parallel << "x\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"serial vs OpenMP timings"};
    std::string input;
    int threads = omp_get_max_threads();
    int repeats = 3;
    bool quick = false;
    app.add_option("--input", input, "census database (default: allcurves.* under CFT_DATA_DIR)");
    app.add_option("--threads", threads, "OpenMP threads for the parallel runs")->check(CLI::PositiveNumber);
    app.add_option("--repeats", repeats, "best of this many runs")->check(CLI::PositiveNumber);
    app.add_flag("--quick", quick, "small sizes, for smoke testing");
    CLI11_PARSE(app, argc, argv);

    std::cout << "hardware threads: " << omp_get_num_procs() << ", parallel runs use " << threads << "\n\n";
    std::cout << std::left << std::setw(34) << "kernel" << std::right << std::setw(8) << "threads"
              << std::setw(12) << "serial s" << std::setw(12) << "omp s" << std::setw(10) << "speedup\n";

    int mismatches = 0;

    // point counting
    std::mt19937 rng(3);
    for (long p : quick ? std::vector<long>{10007} : std::vector<long>{10007, 65521}) {
        auto k = std::make_shared<const FiniteField>(p, 1);
        std::uniform_int_distribution<long> el(0, p - 1);
        std::vector<FqCurve> curves;
        while (curves.size() < (quick ? 4u : 16u)) {
            std::array<FiniteField::Elem, 5> a;
            for (auto& x : a)
                x = static_cast<FiniteField::Elem>(el(rng));
            try {
                curves.emplace_back(k, a);
            } catch (const DataError&) {
            }
        }
        std::vector<long> s(curves.size()), q(curves.size());
        const double ts = seconds([&] { for (std::size_t i = 0; i < curves.size(); ++i) s[i] = curves[i].count_points(); }, repeats);
        const double tp = seconds([&] { for (std::size_t i = 0; i < curves.size(); ++i) q[i] = curves[i].count_points_parallel(threads); }, repeats);
        mismatches += s != q;
        row("count_points  F_" + std::to_string(p) + " x" + std::to_string(curves.size()), threads, ts, tp);
    }

    // census
    std::vector<CurveRecord> records;
    try {
        namespace fs = std::filesystem;
        std::vector<std::string> files;
        if (!input.empty()) {
            files.push_back(input);
        } else {
            for (const auto& e : fs::directory_iterator(default_data_dir()))
                if (e.path().filename().string().rfind("allcurves", 0) == 0)
                    files.push_back(e.path().string());
            std::sort(files.begin(), files.end());
        }
        for (const auto& f : files) {
            auto db = parse_database(f, DbFormat::cremona);
            records.insert(records.end(), db.records.begin(), db.records.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "census skipped: " << e.what() << "\n";
    }
    if (!records.empty()) {
        if (quick && records.size() > 400)
            records.resize(400);
        CensusParams P;
        CensusReport s, q;
        const double ts = seconds([&] { s = run_census_serial(records, P); }, quick ? 1 : repeats);
        P.jobs = threads;
        const double tp = seconds([&] { q = run_census(records, P); }, quick ? 1 : repeats);
        mismatches += report_json(s, false) != report_json(q, false);
        row("census p=3 M=1 x" + std::to_string(records.size()), threads, ts, tp);
        std::cout << "census stages: " << s.stages.total << " " << s.stages.good << " " << s.stages.ordinary << " "
                  << s.stages.red_tors << " " << s.stages.full_tors << "\n";
    }

    if (mismatches) {
        std::cout << mismatches << " serial/parallel mismatches\n";
        return 3;
    }
    std::cout << "serial and parallel results agree\n";
    return 0;
}
