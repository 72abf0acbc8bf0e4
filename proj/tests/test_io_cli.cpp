#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "h12/experiments.hpp"

using namespace h12;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("shape JSON round trip") {
    const ShapeSet ball = Ball{{0.4, 0.6}, 0.2};
    const auto j = shape_to_json(ball);
    const ShapeSet back = shape_from_json(nlohmann::json::parse(j.dump()));
    const auto* b = std::get_if<Ball>(&back);
    REQUIRE(b != nullptr);
    CHECK(b->center[0] == 0.4);
    CHECK(b->radius == 0.2);

    Intervals iv;
    iv.parts = {{0.1, 0.2}, {0.4, 0.9}};
    const ShapeSet back2 = shape_from_json(nlohmann::json::parse(shape_to_json(iv).dump()));
    const auto* i2 = std::get_if<Intervals>(&back2);
    REQUIRE(i2 != nullptr);
    CHECK(i2->parts == iv.parts);

    Subgraph s;
    s.offset = 0.5;
    s.amp = 0.01;
    const ShapeSet back3 = shape_from_json(nlohmann::json::parse(shape_to_json(s).dump()));
    CHECK(std::get_if<Subgraph>(&back3) != nullptr);
}

TEST_CASE("config hash is stable and content-sensitive") {
    nlohmann::ordered_json a = {{"x", 1}, {"y", "z"}};
    nlohmann::ordered_json b = {{"x", 2}, {"y", "z"}};
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("experiment runs are deterministic byte-for-byte") {
    TempDir dir_a("h12_det_a"), dir_b("h12_det_b");
    nlohmann::ordered_json cfg = {{"fixture", "three-jumps"},
                                  {"resolution", 1 << 14},
                                  {"r_from", 5},
                                  {"r_to", 9}};
    const auto ra = experiments::run("scan", cfg, dir_a.path.string());
    const auto rb = experiments::run("scan", cfg, dir_b.path.string());
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    for (std::size_t i = 0; i < ra.artifacts.size(); ++i)
        CHECK(slurp(ra.artifacts[i]) == slurp(rb.artifacts[i]));
    // artifacts carry the config hash in their names
    CHECK(ra.artifacts[0].find(config_hash(cfg)) != std::string::npos);
}

TEST_CASE("csv format: header, comma, LF") {
    ScaleTrace tr;
    tr.entries = {{0.5, 1.25}, {0.25, 1.5}};
    const std::string csv = trace_to_csv(tr);
    CHECK(csv.substr(0, 8) == "r,value\n");
    CHECK(csv.find("\r") == std::string::npos);
    CHECK(csv.find("0.5,1.25\n") != std::string::npos);
}

TEST_CASE("energy experiment emits trace and plateau") {
    TempDir dir("h12_energy");
    nlohmann::ordered_json cfg = {{"fixture", "single-jump"},
                                  {"resolution", 1 << 14},
                                  {"eps_from", 5},
                                  {"eps_to", 9}};
    const auto res = experiments::run("energy", cfg, dir.path.string());
    CHECK(res.exit_code == 0);
    CHECK(res.summary.contains("plateau_estimate"));
    REQUIRE(res.artifacts.size() == 2);
    const std::string csv = slurp(res.artifacts[0]);
    CHECK(csv.rfind("eps,value\n", 0) == 0);
}

TEST_CASE("diagnose experiment separates disk from checkerboard") {
    TempDir dir("h12_diag");
    nlohmann::ordered_json cfg_disk = {{"fixture", "disk"}, {"resolution", 512}};
    const auto rd = experiments::run("diagnose", cfg_disk, dir.path.string());
    CHECK(rd.summary["verdict"] == "finite-perimeter-consistent");

    nlohmann::ordered_json cfg_cb = {
        {"fixture", "checkerboard"}, {"resolution", 512}, {"cells", 128}};
    const auto rc = experiments::run("diagnose", cfg_cb, dir.path.string());
    CHECK(rc.summary["verdict"] == "infinite-perimeter-consistent");
}

TEST_CASE("kernel audit passes") {
    TempDir dir("h12_audit");
    const auto res =
        experiments::run("kernel-audit", nlohmann::ordered_json::object(), dir.path.string());
    CHECK(res.exit_code == 0);
    CHECK(res.summary["band_domination_ok"] == true);
    CHECK(res.summary["psi_plateau_check"] == true);
}

TEST_CASE("product-check experiment") {
    TempDir dir("h12_prod");
    nlohmann::ordered_json cfg = {{"resolution", 256}, {"eps_from", 5}, {"eps_to", 7}};
    const auto res = experiments::run("product-check", cfg, dir.path.string());
    CHECK(res.exit_code == 0);
    CHECK(res.summary["pass"] == true);
}

TEST_CASE("unknown experiment is a usage error") {
    CHECK_THROWS_AS(experiments::run("nope", nlohmann::ordered_json::object(), "/tmp"),
                    h12_error);
}

TEST_CASE("bitmap shape references a raw field file") {
    TempDir dir("h12_bitmap");
    const Grid g(2, 1.0, 16);
    std::vector<double> v(g.size(), 0.0);
    v[5 * 16 + 5] = 1.0;
    const std::string field_path = (dir.path / "bits.h12f").string();
    write_field(SampledField(g, v), field_path);
    nlohmann::json j = {{"variant", "bitmap"}, {"field_file", field_path}};
    const ShapeSet s = shape_from_json(j);
    CHECK(std::get_if<Bitmap>(&s) != nullptr);
    CHECK(measure(s) == Catch::Approx(1.0 / 256.0));
}
