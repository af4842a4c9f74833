#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cnw/diagram_export.hpp"

namespace fs = std::filesystem;
using cnw::Json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cnw_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string spec(const std::string& name) { return (fs::path(CNW_SPECS_DIR) / (name + ".json")).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    // Runs the CLI with stdout and stderr captured to files; returns the exit status.
    int run(const std::string& args) {
        const std::string cmd =
            std::string(CNW_CLI_PATH) + " " + args + " > " + path("stdout") + " 2> " + path("stderr");
        const int status = std::system(cmd.c_str());
        out = slurp(path("stdout"));
        err = slurp(path("stderr"));
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
    std::string out, err;
};

} // namespace

TEST_F(Cli, AnalyzeDoublingMap) {
    ASSERT_EQ(run("analyze " + spec("f2") + " --out " + path("levels.csv")), 0) << err;
    EXPECT_TRUE(out.empty());
    EXPECT_NE(err.find("h = 0.01"), std::string::npos) << err;
    EXPECT_NE(err.find("N_max = 64"), std::string::npos) << err;
    EXPECT_NE(err.find("horizon stability"), std::string::npos) << err;
    std::istringstream csv(slurp(path("levels.csv")));
    std::string line;
    bool found = false;
    while (std::getline(csv, line))
        if (line.rfind("800,3,", 0) == 0) {
            found = true;
            EXPECT_NEAR(std::stod(line.substr(6)), 1.0, 0.02) << line;
        }
    EXPECT_TRUE(found);
}

TEST_F(Cli, AnalyzeWritesMatrix) {
    ASSERT_EQ(run("analyze " + spec("two_point") + " --matrix-out " + path("m.csv")), 0) << err;
    EXPECT_EQ(out, "index,lambda,beta\n0,1,\n1,0,inf\n");
    EXPECT_FALSE(slurp(path("m.csv")).empty());
}

TEST_F(Cli, MalformedSpecExitsTwo) {
    EXPECT_EQ(run("analyze " + write("bad.json", "{\n  \"source\": {\"builtin\": \"f2\",\n}")), 2);
    EXPECT_NE(err.find("line 3"), std::string::npos) << err;
    EXPECT_EQ(run("analyze " + path("missing.json")), 2);
    EXPECT_EQ(run("analyze"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, OversizedGridExitsThree) {
    const auto p = write("huge.json", R"({"source": {"builtin": "f2"}, "grid": {"box": [[-5, 5]], "h": 1e-6}})");
    EXPECT_EQ(run("analyze " + p), 3);
    EXPECT_NE(err.find("spacing"), std::string::npos) << err;
}

TEST_F(Cli, DiagramHalvingMap) {
    ASSERT_EQ(run("diagram " + spec("f_half") + " --eps-min 0 --eps-max 2 --eps-step 0.5 --json " + path("d.json") +
                  " --svg " + path("d.svg")),
              0)
        << err;
    const auto doc = Json::parse(slurp(path("d.json")));
    std::vector<std::string> tokens;
    for (const auto& s : doc["slices"]) tokens.push_back(s["level"]);
    EXPECT_EQ(tokens, (std::vector<std::string>{"-2", "-1.5", "-1", "-0.5", "-0", "+0", "0.5", "1", "1.5", "2"}));
    const auto& one = doc["slices"][7];
    ASSERT_EQ(one["intervals"].size(), 1u);
    EXPECT_NEAR(one["intervals"][0][0].get<double>(), -3.0, 0.02);
    EXPECT_NEAR(one["intervals"][0][1].get<double>(), 3.0, 0.02);
    EXPECT_NE(slurp(path("d.svg")).find("<svg"), std::string::npos);
}

TEST_F(Cli, DiagramRejectsBadRanges) {
    EXPECT_EQ(run("diagram " + spec("two_point") + " --eps-min 0 --eps-max 1 --eps-step 0"), 2);
    EXPECT_EQ(run("diagram " + spec("two_point") + " --eps-min 2 --eps-max 1 --eps-step 0.5"), 2);
    EXPECT_EQ(run("diagram " + spec("two_point") + " --eps-min -1 --eps-max 1 --eps-step 0.5"), 2);
}

TEST_F(Cli, DiagramSvgNeedsOneDimension) {
    const auto p = write("planar.json", R"({"source": {"builtin": "counterexample_s8", "params": {"n_max": 3, "m_max": 2}}})");
    EXPECT_EQ(run("diagram " + p + " --eps-min 0 --eps-max 1 --eps-step 0.5 --svg " + path("x.svg")), 2);
    EXPECT_NE(err.find("CSV"), std::string::npos) << err;
    EXPECT_EQ(run("diagram " + p + " --eps-min 0 --eps-max 1 --eps-step 0.5"), 0) << err;
}

TEST_F(Cli, DetectDoublingMap) {
    const auto p = write("f2.json", R"({"source": {"builtin": "f2"}, "grid": {"box": [[-2, 2]], "h": 0.01}})");
    ASSERT_EQ(run("detect " + p + " --min-gap 0.3 --limit 100000 --out " + path("c.json")), 0) << err;
    EXPECT_EQ(out.rfind("x\tz\t", 0), 0u);
    const auto doc = Json::parse(slurp(path("c.json")));
    EXPECT_EQ(doc["system"]["name"], "f2");
    ASSERT_FALSE(doc["certificates"].empty());
    bool two_thirds = false;
    for (const auto& c : doc["certificates"]) {
        EXPECT_TRUE(c.contains("witness"));
        if (c["eps"].get<double>() <= 0.02 && std::fabs(c["gap"].get<double>() - 2.0 / 3.0) <= 0.03) two_thirds = true;
    }
    EXPECT_TRUE(two_thirds);
}

TEST_F(Cli, DetectIdentityFindsNothing) {
    EXPECT_EQ(run("detect " + spec("identity")), 1) << err;
    EXPECT_EQ(out, "x\tz\tx_coords\tz_coords\teps\tgap\n");
}

TEST_F(Cli, DetectCounterexampleAtBasePoint) {
    const auto p =
        write("cx.json", R"({"source": {"builtin": "counterexample_s8", "params": {"n_max": 12, "m_max": 12}}})");
    ASSERT_EQ(run("detect " + p + " --limit 100000 --out " + path("c.json")), 0) << err;
    const auto doc = Json::parse(slurp(path("c.json")));
    bool at_p = false;
    for (const auto& c : doc["certificates"]) at_p = at_p || c["x"] == 0;
    EXPECT_TRUE(at_p);
}

TEST_F(Cli, VerifyPassesAndCatchesFaults) {
    EXPECT_EQ(run("verify --seeds 60 --max-size 6"), 0) << out << err;
    EXPECT_NE(out.find("verified 60 instances: 0 with violations"), std::string::npos) << out;
    EXPECT_EQ(run("verify --seeds 0"), 2);
    EXPECT_EQ(run("verify --seeds 3 --max-size 20"), 2);
    EXPECT_EQ(run("verify --seeds 3 --inject-fault bogus"), 2);
    EXPECT_EQ(run("verify --seeds 40 --inject-fault strict-lambda --dump-failures " + path("dump")), 1);
    std::size_t dumped = 0;
    for (const auto& e : fs::directory_iterator(path("dump"))) {
        ++dumped;
        EXPECT_EQ(e.path().extension(), ".json");
        // dumped witnesses are valid table specs
        EXPECT_EQ(run("analyze " + e.path().string()), 0) << err;
    }
    EXPECT_GT(dumped, 0u);
}

TEST_F(Cli, OutputIndependentOfThreads) {
    for (const char* name : {"f_rep", "two_point"}) {
        ASSERT_EQ(run("--threads 1 analyze " + spec(name) + " --out " + path("a.csv")), 0) << err;
        ASSERT_EQ(run("--threads 3 analyze " + spec(name) + " --out " + path("b.csv")), 0) << err;
        EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv"))) << name;
    }
}
