#include <adjustkit/adjustkit.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int status = -1;
    std::string out;
    json doc() const { return json::parse(out); }
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " ADJUSTKIT_CLI_PATH " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("adjustkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string make(const std::string& name, const std::string& gallery_args) {
        const auto r = run("gallery " + gallery_args + " --out " + path(name));
        EXPECT_EQ(r.status, 0) << r.out;
        return path(name);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GalleryPrintsDistributionWithoutOut) {
    const auto r = run("gallery --family weak-edge --param eps=0.01");
    ASSERT_EQ(r.status, 0);
    const auto d = adjustkit::parse_dist(r.out);
    EXPECT_EQ(d.size(), 8U);
}

TEST_F(Cli, ExactQueries) {
    const auto hard = make("hard.json", "--family hardness --param eps=0.04 --param alpha=0.4");
    auto r = run("alpha --dist " + hard + " --x X=0 --set A");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NEAR(r.doc()["alpha"].get<double>(), 0.39, 1e-12);
    EXPECT_EQ(r.doc()["config"]["command"], "alpha");
    EXPECT_EQ(r.doc()["config"]["set"], "A");

    r = run("delta --dist " + hard + " --a X --b B --c A");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NEAR(r.doc()["delta"].get<double>(), 0.036, 1e-12);

    r = run("estimate --dist " + hard + " --x X=0 --y Y=1 --set A");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_NEAR(r.doc()["estimate"].get<double>(), 0.01, 1e-12);

    const auto xr = make("xor.json", "--family xor --param eps=0.1");
    r = run("delta --dist " + xr + " --a X --b A,B");
    EXPECT_NEAR(r.doc()["delta"].get<double>(), 0.8, 1e-12);
}

TEST_F(Cli, Searches) {
    const auto bd = make("bd.json", "--family backdoor --param k=3 --seed 1");
    auto r = run("amba --oracle " + bd + " --x X --candidates A1,A2,A3,B --eps 1e-12");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.doc()["chosen"], json({"A1", "A2", "A3"}));
    EXPECT_EQ(r.doc()["tests_per_level"], json({1, 4, 6, 4}));

    r = run("bamba --oracle " + bd + " --x X --y Y --candidates B,A1,A2,A3 --s A1,A2,A3 --eps 1e-12");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.doc()["chosen"], json({"B"}));
}

TEST_F(Cli, SampleEstimateAuto) {
    const auto bd = make("bd.json", "--family backdoor --param k=3 --seed 1");
    const auto data = path("d.csv");
    ASSERT_EQ(run("sample --dist " + bd + " --n 2000 --seed 4 --out " + data).status, 0);
    const auto loaded = adjustkit::read_data(data);
    EXPECT_EQ(loaded.rows(), 2000U);

    auto r = run("estimate --data " + data + " --schema " + bd + " --x X=1 --y Y=1 --set B");
    ASSERT_EQ(r.status, 0) << r.out;
    const double direct =
        adjustkit::plugin_adjustment(adjustkit::read_data(data, adjustkit::read_dist(bd).variables()),
                                     {{{"X", 1}}, {{"Y", 1}}, {"B"}})
            .value;
    EXPECT_DOUBLE_EQ(r.doc()["estimate"].get<double>(), direct);

    r = run("auto --data " + data + " --oracle " + bd + " --x X=1 --y Y=1 --set B,A1,A2,A3 --eps 1e-12");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.doc()["decision"]["decision"], "use-Z");
    EXPECT_EQ(r.doc()["blanket"]["chosen"], json({"A1", "A2", "A3"}));

    r = run("auto --data " + data + " --x X=1 --y Y=1 --set B,A1,A2,A3 --eps 0.05");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.doc()["error"]["code"], "INSUFFICIENT_SAMPLES");
    EXPECT_EQ(r.doc()["error"]["available"], 2000);
}

TEST_F(Cli, Errors) {
    auto r = run("estimate --x X=0");
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.doc()["error"]["code"], "USAGE");

    r = run("");
    EXPECT_EQ(r.status, 2);

    r = run("delta --dist " + path("missing.json") + " --a X --b Y");
    EXPECT_EQ(r.status, 2);

    const auto bad = path("bad.json");
    adjustkit::detail::spit(bad, "{\"variables\": [");
    r = run("validate --dist " + bad);
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.doc()["error"]["code"], "PARSE_ERROR");

    const auto hard = make("hard.json", "--family hardness --param eps=0.04 --param alpha=0.4");
    r = run("alpha --dist " + hard + " --x Q=0 --set A");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.doc()["error"]["code"], "UNKNOWN_VARIABLE");

    r = run("gallery --family hardness --param eps=0.04 --param alpha=0.1");
    EXPECT_EQ(r.status, 1);
    EXPECT_EQ(r.doc()["error"]["code"], "PARAM_RANGE");
}

TEST_F(Cli, BenchCsvParsesBack) {
    const auto csv = path("conv.csv");
    auto r = run("bench-convergence --family weak-edge --param eps=0.01 --x X=0 --y Y=1 --set Z --grid 100,1000 "
                 "--trials 5 --seed 2 --out " + csv);
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.doc()["rows"], 10);
    EXPECT_EQ(adjustkit::parse_report(adjustkit::detail::slurp(csv)).size(), 10U);

    const auto bd = make("bd.json", "--family backdoor --param k=3 --seed 1");
    const auto cmp = path("cmp.csv");
    r = run("bench-compare --dist " + bd + " --x X=1 --y Y=1 --set B,A1,A2,A3 --grid 10,500 --trials 4 --eps 1e-9 "
            "--out " + cmp);
    ASSERT_EQ(r.status, 0) << r.out;
    const auto rows = adjustkit::parse_report(adjustkit::detail::slurp(cmp));
    EXPECT_EQ(rows.size(), 24U);
}

TEST_F(Cli, ByteIdenticalReruns) {
    const auto bd = make("bd.json", "--family backdoor --param k=3 --seed 1");
    const std::string cmd =
        "bench-compare --dist " + bd + " --x X=1 --y Y=1 --set B,A1,A2,A3 --grid 10,100 --trials 6 --eps 1e-9 --seed 5";
    const auto a = run(cmd, "ADJUSTKIT_THREADS=1");
    const auto b = run(cmd, "ADJUSTKIT_THREADS=1");
    const auto c = run(cmd, "ADJUSTKIT_THREADS=4");
    ASSERT_EQ(a.status, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
}
