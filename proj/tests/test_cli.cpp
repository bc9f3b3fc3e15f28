#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <sys/wait.h>

#include "depthfilter/cli.hpp"
#include "depthfilter/csv.hpp"
#include "depthfilter/report.hpp"
#include "depthfilter/screening.hpp"

using namespace depthfilter;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::current_path() / "cli_work";

int run(const std::string& args) {
    const std::string line = "cd '" + kDir.string() + "' && '" DEPTHFILTER_CLI "' " + args + " > out.log 2> err.log";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const std::string& name, const std::string& text) { std::ofstream(kDir / name) << text; }

struct Fixture {
    Fixture() {
        fs::create_directories(kDir);
        std::mt19937_64 rng(61);
        std::normal_distribution<double> z;
        std::string csv = "a,b,c\n";
        for (int i = 0; i < 60; ++i) {
            const double a = i == 5 ? 40.0 : z(rng);
            csv += std::to_string(a) + "," + std::to_string(z(rng)) + "," + (i == 9 ? "NA" : std::to_string(z(rng))) +
                   "\n";
        }
        write("good.csv", csv);
        write("ragged.csv", "a,b\n1,2\n3\n");
        std::string holes = "a,b\n";
        for (int i = 0; i < 10; ++i) holes += std::to_string(i) + ",NA\n";
        write("holes.csv", holes);
    }
};

} // namespace

TEST_CASE_FIXTURE(Fixture, "successful runs exit 0 and write their outputs") {
    CHECK(run("filter good.csv -o f.csv --report r.json --directions 200") == kExitOk);
    const auto filtered = load_csv(kDir / "f.csv");
    CHECK(filtered.rows() == 60);
    CHECK_FALSE(filtered.observed(5, 0));
    CHECK_FALSE(filtered.observed(9, 2));
    const auto report = read_json(kDir / "r.json");
    CHECK(report["schema"] == "depthfilter.report");
    CHECK(report["manifest"]["inputs"][0]["sha256"].get<std::string>().size() == 64);

    CHECK(run("estimate good.csv -o e.json --directions 200") == kExitOk);
    CHECK(read_json(kDir / "e.json")["estimate"]["location"].size() == 3);
    CHECK(run("estimate good.csv -o e2.json --no-filter") == kExitOk);
    CHECK(read_json(kDir / "e2.json")["filter"].is_null());
    CHECK(run("depth good.csv -o d.csv --summary ds.json --directions 200") == kExitOk);
    CHECK(run("filter good.csv -o s.csv --report sr.json --sequence 1 2 --directions 200") == kExitOk);
    CHECK(run("--version") == kExitOk);

    std::string dated = "date,a,b\n";
    for (int i = 0; i < 30; ++i)
        dated += "2010-01-" + std::to_string(i + 1) + "," + std::to_string(i % 7) + "," + std::to_string((i * 5) % 11) + "\n";
    write("dated.csv", dated);
    const std::string digest = sha256_file((kDir / "dated.csv").string());
    CHECK(run("depth dated.csv -o dd.csv --summary dds.json --directions 200 --sha256 " + digest) == kExitOk);
    CHECK(read_json(kDir / "dds.json")["p"] == 2);
    CHECK(run("depth dated.csv --sha256 " + std::string(64, '0')) == kExitParse);
}

TEST_CASE_FIXTURE(Fixture, "parse errors exit 2") {
    CHECK(run("") == kExitParse);
    CHECK(run("filter") == kExitParse);
    CHECK(run("filter missing.csv") == kExitParse);
    CHECK(run("filter good.csv --no-such-flag") == kExitParse);
    CHECK(run("filter ragged.csv") == kExitParse);
    CHECK(run("simulate --preset nope") == kExitParse);
}

TEST_CASE_FIXTURE(Fixture, "configuration errors exit 3") {
    CHECK(run("filter good.csv --beta 1.5") == kExitConfig);
    CHECK(run("filter good.csv --method mcd") == kExitConfig);
    CHECK(run("filter good.csv --stages u,z") == kExitConfig);
    CHECK(run("filter good.csv --ref skewnormal") == kExitConfig);
    CHECK(run("filter good.csv --sequence 2 1") == kExitConfig);
    CHECK(run("estimate good.csv --estimator gse") == kExitConfig);
    CHECK(run("depth good.csv --ref skewnormal") == kExitConfig);
    write("bad_scenario.json", R"({"scenarios": [{"kind": "cellwise", "p": 3, "eps_cell": 0.7, "k": 2}]})");
    CHECK(run("simulate bad_scenario.json") == kExitConfig);
    CHECK(run("simulate") == kExitConfig);
}

TEST_CASE_FIXTURE(Fixture, "numerical failures exit 4") {
    CHECK(run("estimate holes.csv --no-filter") == kExitNumeric);
}
