#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "harvestkit/geometry.hpp"
#include "harvestkit/mask.hpp"
#include "harvestkit/pgm.hpp"
#include "testutil.hpp"

using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

// Runs the installed binary with the given argument string.
RunResult run_cli(const tu::TempDir& dir, const std::string& args) {
    const std::string out_path = dir.file("cli_stdout.txt");
    const std::string err_path = dir.file("cli_stderr.txt");
    const std::string cmd =
        std::string(HK_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string solid_mask_fixture(const tu::TempDir& dir) {
    hk::BinaryMask mask(5, 5);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) mask.set(x, y, true);
    }
    const std::string path = dir.file("solid.pgm");
    hk::save_mask_pgm(mask, path);
    return path;
}

}  // namespace

TEST_CASE("pick prints one JSON line for the picking point") {
    tu::TempDir dir;
    const std::string mask = solid_mask_fixture(dir);
    const RunResult r = run_cli(dir, "pick --mask " + mask);
    CHECK(r.code == 0);
    CHECK(r.out == "{\"x\":2,\"y\":2,\"clearance\":3.0}\n");
    CHECK(r.err.empty());
}

TEST_CASE("pick --out mirrors stdout into a file") {
    tu::TempDir dir;
    const std::string mask = solid_mask_fixture(dir);
    const std::string saved = dir.file("point.json");
    const RunResult r = run_cli(dir, "pick --mask " + mask + " --out " + saved);
    CHECK(r.code == 0);
    CHECK(slurp(saved) == r.out);
}

TEST_CASE("locate chains mask, depth, and calibration") {
    tu::TempDir dir;
    const std::string mask = solid_mask_fixture(dir);

    hk::Image16 depth;
    depth.width = 5;
    depth.height = 5;
    depth.pixels.assign(25, 2000);
    const std::string depth_path = dir.file("depth.pgm");
    hk::save_pgm16(depth, depth_path);

    hk::Calibration calib;
    calib.intrinsics = {100.0, 100.0, 2.5, 2.5};
    const std::string calib_path = dir.file("calib.txt");
    hk::save_calibration(calib, calib_path);

    const RunResult r = run_cli(dir, "locate --mask " + mask + " --depth " + depth_path +
                                         " --calib " + calib_path);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("x").get<int>() == 2);
    CHECK(j.at("y").get<int>() == 2);
    // Picking pixel centre (2.5, 2.5) is the principal point: the ray is the
    // optical axis, and identity extrinsics keep the base point on it.
    CHECK(j.at("camera")[0].get<double>() == 0.0);
    CHECK(j.at("camera")[1].get<double>() == 0.0);
    CHECK(j.at("camera")[2].get<double>() == 2.0);
    CHECK(j.at("base")[2].get<double>() == 2.0);
}

TEST_CASE("plan emits the approach line and quintic schedule") {
    tu::TempDir dir;
    const RunResult r = run_cli(dir, "plan --target 0.4 0.1 0.5");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(tu::close(j.at("grasp")[2].get<double>(), 0.52, 1e-15));
    CHECK(tu::close(j.at("pre_grasp")[2].get<double>(), 0.40, 1e-15));
    CHECK(j.at("safety_margin").get<double>() == 0.10);
    CHECK(j.at("enclose_offset").get<double>() == 0.02);
    REQUIRE(j.at("schedule").at("samples").size() == 11);
    CHECK(j.at("schedule").at("samples")[5].at("s").get<double>() == 0.5);

    const RunResult bad = run_cli(dir, "plan --target 0.4 0.1 0.5 --duration 0");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("invalid-argument") != std::string::npos);
}

TEST_CASE("eval scores files and honours --by-occlusion") {
    tu::TempDir dir;
    const std::string ann_path = dir.file("ann.json");
    const std::string pred_path = dir.file("pred.json");
    spill(ann_path, R"({
      "images": [{"id": 1, "w": 24, "h": 16, "file": "a.pgm"}],
      "instances": [
        {"image": 1, "class": 0, "amodal": [[2,2],[8,2],[8,8],[2,8]]},
        {"image": 1, "class": 0, "amodal": [[12,4],[20,4],[20,12],[12,12]]}
      ]
    })");
    spill(pred_path, R"({"predictions": [
      {"image": 1, "class": 0, "confidence": 0.9, "mask": [[2,2],[8,2],[8,8],[2,8]]},
      {"image": 1, "class": 0, "confidence": 0.8, "mask": [[12,4],[20,4],[20,12],[12,12]]}
    ]})");

    const RunResult r = run_cli(dir, "eval --annotations " + ann_path + " --predictions " +
                                         pred_path + " --by-occlusion --workers 2");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("map50_95").get<double>() == 1.0);
    CHECK(j.at("recall").get<double>() == 1.0);
    REQUIRE(j.at("per_occlusion_level").size() == 1);
    CHECK(j.at("per_occlusion_level")[0].at("level").get<std::string>() == "zero");
}

TEST_CASE("harvest-report prints the success table") {
    tu::TempDir dir;
    const std::string log_path = dir.file("log.json");
    spill(log_path, R"({"levels": [
      {"level": "zero",   "picked": 50, "total": 54},
      {"level": "low",    "picked": 46, "total": 54},
      {"level": "medium", "picked": 26, "total": 54},
      {"level": "high",   "picked": 12, "total": 54}
    ]})");
    const RunResult r = run_cli(dir, "harvest-report --log " + log_path);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("levels")[0].at("percent").get<std::string>() == "92.59");
    CHECK(j.at("overall").at("percent").get<std::string>() == "62.03");
}

TEST_CASE("correlate reads (x, y) pairs from JSON") {
    tu::TempDir dir;
    const std::string pairs_path = dir.file("pairs.json");
    spill(pairs_path, R"({"pairs": [
      [0.872, 92.59], [0.888, 85.18], [0.569, 48.14], [0.372, 22.22]
    ]})");
    const RunResult r = run_cli(dir, "correlate --pairs " + pairs_path);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(tu::close(j.at("r2").get<double>(), 0.9860871424446181, 1e-12));
    CHECK(j.at("n").get<int>() == 4);

    const std::string short_path = dir.file("short.json");
    spill(short_path, R"({"pairs": [[1, 2]]})");
    const RunResult bad = run_cli(dir, "correlate --pairs " + short_path);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("invalid-argument") != std::string::npos);
}

TEST_CASE("synth writes a scene directory") {
    tu::TempDir dir;
    const std::string out_dir = dir.file("scene");
    const RunResult r = run_cli(
        dir, "synth --out-dir " + out_dir + " --ratios 0,0.3 --width 64 --height 64 --seed 5");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.at("fruits").size() == 2);
    CHECK(j.at("fruits")[0].at("level").get<std::string>() == "zero");
    CHECK(j.at("fruits")[1].at("level").get<std::string>() == "medium");
    CHECK(slurp(out_dir + "/scene.json") == r.out);
    CHECK(!slurp(out_dir + "/scene.pgm").empty());
}

TEST_CASE("nn-check exits zero only when every check passes") {
    tu::TempDir dir;
    const RunResult r = run_cli(dir, "nn-check --seed 7");
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("all_passed").get<bool>());
}

TEST_CASE("usage errors exit 2, runtime failures exit 1") {
    tu::TempDir dir;
    CHECK(run_cli(dir, "").code == 2);                       // a subcommand is required
    CHECK(run_cli(dir, "pick").code == 2);                   // --mask is required
    CHECK(run_cli(dir, "pick --bogus x").code == 2);         // unknown flag
    CHECK(run_cli(dir, "definitely-not-a-command").code == 2);

    const RunResult missing = run_cli(dir, "pick --mask " + dir.file("nope.pgm"));
    CHECK(missing.code == 1);
    CHECK(missing.err.find("io-error") != std::string::npos);

    const RunResult help = run_cli(dir, "--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("pick") != std::string::npos);
    CHECK(help.out.find("correlate") != std::string::npos);
}
