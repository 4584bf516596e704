#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "verix/cli.hpp"
#include "verix/io.hpp"
#include "verix/train.hpp"

using namespace verix;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "verix");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// A trained digits model and two held-out images, built once per process.
struct Fixture {
    fs::path dir;
    fs::path model;
    fs::path image;
    fs::path image2;

    Fixture() {
        dir = fs::temp_directory_path() / "verix_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        model = dir / "digits.json";
        REQUIRE(run({"train", "--data", std::string(VERIX_DATA_DIR) + "/digits8x8.csv", "--rows", "1500", "--out",
                     model.string()})
                    .code == 0);
        const auto rows = io::load_labeled_csv(fs::path(VERIX_DATA_DIR) / "digits8x8.csv");
        image = write_digit(rows[1500], "a.pgm");
        image2 = write_digit(rows[1501], "b.pgm");
    }

    fs::path write_digit(const io::LabeledSample& s, const std::string& name) const {
        io::GrayImage img{8, 8, {}, 16};
        for (double v : s.features) img.pixels.push_back(static_cast<std::uint8_t>(v * 16.0 + 0.5));
        io::write_pgm(dir / name, img);
        return dir / name;
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("explain writes a consistent json and mask") {
    const Fixture& f = fixture();
    const Run r = run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", "0.05",
                       "--out", f.path("e.json"), "--mask", f.path("e.pgm")});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(io::read_text(f.path("e.json")));
    CHECK(doc["A"].size() + doc["B"].size() == 64);
    CHECK(doc["counterfactuals"].size() == doc["A"].size());
    CHECK_FALSE(doc["steps"][0].contains("time_s"));
    const io::GrayImage mask = io::read_pgm(f.path("e.pgm"));
    CHECK(mask.width == 8);
    CHECK(static_cast<std::size_t>(std::ranges::count(mask.pixels, 255)) == doc["A"].size());
}

TEST_CASE("random traversal runs are byte-identical") {
    const Fixture& f = fixture();
    for (int k = 0; k < 2; ++k) {
        const std::string suffix = std::to_string(k);
        REQUIRE(run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--traversal", "random",
                     "--seed", "7", "--out", f.path("r" + suffix + ".json"), "--mask", f.path("r" + suffix + ".pgm")})
                    .code == 0);
    }
    CHECK(io::read_text(f.path("r0.json")) == io::read_text(f.path("r1.json")));
    CHECK(io::read_text(f.path("r0.pgm")) == io::read_text(f.path("r1.pgm")));
}

TEST_CASE("timings are opt-in") {
    const Fixture& f = fixture();
    REQUIRE(run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--backend", "incomplete",
                 "--with-timings", "--out", f.path("t.json")})
                .code == 0);
    const auto doc = nlohmann::json::parse(io::read_text(f.path("t.json")));
    CHECK(doc["steps"][0].contains("time_s"));
    CHECK(doc["params"]["backend"] == "incomplete");
}

TEST_CASE("usage and input errors exit 2") {
    const Fixture& f = fixture();
    const Run norm = run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--norm", "2",
                          "--out", f.path("n.json")});
    CHECK(norm.code == cli::kExitUsage);
    CHECK(norm.err.find("unsupported norm") != std::string::npos);
    CHECK(run({"explain", "--network", f.model.string(), "--input", f.path("missing.pgm"), "--out", f.path("x.json")})
              .code == cli::kExitUsage);
    CHECK(run({"explain", "--input", f.image.string()}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", "0", "--out",
               f.path("x.json")})
              .code == cli::kExitUsage);
}

TEST_CASE("sweep colormap levels") {
    const Fixture& f = fixture();
    REQUIRE(run({"sweep", "--network", f.model.string(), "--input", f.image.string(), "--epsilons", "0.1,0.05",
                 "--out", f.path("s.json"), "--colormap", f.path("s.pgm")})
                .code == 0);
    const io::GrayImage map = io::read_pgm(f.path("s.pgm"));
    CHECK(std::set<std::uint8_t>(map.pixels.begin(), map.pixels.end()).size() <= 3);

    REQUIRE(run({"sweep", "--network", f.model.string(), "--input", f.image.string(), "--epsilons", "0.05", "--out",
                 f.path("s1.json"), "--colormap", f.path("s1.pgm")})
                .code == 0);
    REQUIRE(run({"explain", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", "0.05", "--out",
                 f.path("s1e.json"), "--mask", f.path("s1e.pgm")})
                .code == 0);
    CHECK(io::read_pgm(f.path("s1.pgm")).pixels == io::read_pgm(f.path("s1e.pgm")).pixels);

    CHECK(run({"sweep", "--network", f.model.string(), "--input", f.image.string(), "--epsilons", "0.05,0.1",
               "--out", f.path("bad.json")})
              .code == cli::kExitUsage);
}

TEST_CASE("verify prints one verdict") {
    const Fixture& f = fixture();
    const Run holds = run({"verify", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", "0.001",
                           "--free", "0,1,2"});
    CHECK(holds.code == 0);
    CHECK(holds.out == "HOLDS\n");

    const std::string witness = f.path("w.csv");
    const Run flip = run({"verify", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", "0.5",
                          "--free", "all", "--witness", witness});
    CHECK(flip.code == 0);
    CHECK(flip.out == "VIOLATED " + witness + "\n");
    CHECK(io::load_input(witness).features.size() == 64);

    // Find a query the bounds cannot settle, then starve the complete backend on it.
    std::string hard;
    for (int k = 20; k <= 60 && hard.empty(); ++k) {
        const std::string eps = "0.0" + std::to_string(k / 10) + std::to_string(k % 10);
        const Run probe = run({"verify", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", eps,
                               "--free", "all", "--backend", "incomplete"});
        if (probe.out.starts_with("UNKNOWN")) hard = eps;
    }
    REQUIRE_FALSE(hard.empty());
    const Run slow = run({"verify", "--network", f.model.string(), "--input", f.image.string(), "--epsilon", hard,
                          "--free", "all", "--timeout", "1e-9"});
    CHECK(slow.code == 0);
    CHECK(slow.out == "UNKNOWN(timeout)\n");

    CHECK(run({"verify", "--network", f.model.string(), "--input", f.image.string(), "--free", "64"}).code ==
          cli::kExitUsage);
}

TEST_CASE("sensitivity writes vector and heatmap") {
    const Fixture& f = fixture();
    REQUIRE(run({"sensitivity", "--network", f.model.string(), "--input", f.image.string(), "--transform", "reversal",
                 "--out", f.path("sens.json"), "--heatmap", f.path("sens.pgm")})
                .code == 0);
    const auto doc = nlohmann::json::parse(io::read_text(f.path("sens.json")));
    CHECK(doc["sensitivity"].size() == 64);
    const io::GrayImage hm = io::read_pgm(f.path("sens.pgm"));
    CHECK(*std::ranges::max_element(hm.pixels) == 255);
}

TEST_CASE("compare writes report tables") {
    const Fixture& f = fixture();
    const std::string out = f.path("cmp");
    const Run r = run({"compare", "--network", f.model.string(), "--input", f.image.string(), "--input",
                       f.image2.string(), "--seeds", "3", "--epsilon", "0.03", "--oracle-cap", "6", "--out-dir", out});
    REQUIRE(r.code == 0);
    std::istringstream sizes(io::read_text(fs::path(out) / "traversal_sizes.csv"));
    std::string line;
    std::size_t lines = 0, sens = 0;
    while (std::getline(sizes, line)) {
        ++lines;
        if (line.find(",sensitivity,") != std::string::npos) ++sens;
    }
    CHECK(lines == 1 + 2 * 4);
    CHECK(sens == 2);
    std::istringstream trade(io::read_text(fs::path(out) / "backend_tradeoff.csv"));
    lines = 0;
    while (std::getline(trade, line)) ++lines;
    CHECK(lines == 1 + 2 * 2);
    CHECK(nlohmann::json::parse(io::read_text(fs::path(out) / "agreement.json")).is_object());

    CHECK(run({"compare", "--network", f.model.string(), "--out-dir", out}).code == cli::kExitUsage);
}

TEST_CASE("binary exit codes") {
    const std::string bin = VERIX_CLI_PATH;
    const int help = std::system((bin + " --help > /dev/null").c_str());
    CHECK(WEXITSTATUS(help) == 0);
    const int bad = std::system((bin + " explain --bogus 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(bad) == 2);
}
