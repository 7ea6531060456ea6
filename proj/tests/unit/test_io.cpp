#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bglmb/errors.hpp"
#include "bglmb/io.hpp"
#include "bglmb/metrics.hpp"

using namespace bglmb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path()
            / ("bglmb_test_" + std::to_string(::getpid()) + "_"
               + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p;
    }
};

}  // namespace

TEST_CASE("load_detections, MOT format") {
    TempDir tmp;
    const auto path = tmp.file("det.txt",
                               "1,-1,100,200,50,100,0.9\n"
                               "3,-1,10,20,2,2,0.5\n");
    const auto sets = io::load_detections(path, io::DetectionFormat::MotCsv);
    REQUIRE(sets.size() == 3);
    REQUIRE(sets[0].points.size() == 1);
    CHECK(sets[0].points[0](0) == doctest::Approx(125.0));  // bb center
    CHECK(sets[0].points[0](1) == doctest::Approx(250.0));
    CHECK(sets[1].points.empty());  // dense frames contract
    CHECK(sets[2].frame == 3);
    REQUIRE(sets[2].points.size() == 1);
    CHECK(sets[2].points[0](0) == doctest::Approx(11.0));
}

TEST_CASE("load_detections, bearing-range format") {
    TempDir tmp;
    const auto path = tmp.file("det.csv", "4,0.1,250.0\n");
    const auto sets = io::load_detections(path, io::DetectionFormat::BearingRangeCsv);
    REQUIRE(sets.size() == 4);
    CHECK(sets[3].points[0](0) == doctest::Approx(0.1));
    CHECK(sets[3].points[0](1) == doctest::Approx(250.0));
}

TEST_CASE("load_detections error paths") {
    TempDir tmp;
    SUBCASE("malformed row reports its line number") {
        const auto path = tmp.file("det.csv", "1,0.1,250.0\n2,oops,3\n");
        try {
            io::load_detections(path, io::DetectionFormat::BearingRangeCsv);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SUBCASE("empty file is an error") {
        const auto path = tmp.file("det.csv", "\n\n");
        CHECK_THROWS_AS(io::load_detections(path, io::DetectionFormat::BearingRangeCsv),
                        DataError);
    }
    SUBCASE("missing file is an error") {
        CHECK_THROWS_AS(
            io::load_detections(tmp.path / "nope.csv", io::DetectionFormat::BearingRangeCsv),
            DataError);
    }
}

TEST_CASE("track round trip") {
    TempDir tmp;
    Track t;
    t.id = 3;
    t.label = {1, 0};
    for (int f = 1; f <= 3; ++f) {
        Eigen::VectorXd state(4);
        state << 1.5 * f, 0.25, -2.0 * f, 0.125;
        t.points.push_back({f, {1.5 * f, -2.0 * f}, state});
    }
    const auto path = tmp.path / "tracks.csv";
    io::write_tracks({t}, path);
    const auto loaded = io::load_tracks(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].id == 3);
    REQUIRE(loaded[0].points.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(loaded[0].points[i].frame == i + 1);
        CHECK(loaded[0].points[i].position(0) == doctest::Approx(1.5 * (i + 1)).epsilon(1e-12));
        CHECK(loaded[0].points[i].position(1) == doctest::Approx(-2.0 * (i + 1)).epsilon(1e-12));
        CHECK(loaded[0].points[i].state(1) == doctest::Approx(0.25));
    }

    SUBCASE("write-load-evaluate of est == gt gives the perfect report") {
        const MotReport rep = evaluate_tracks(loaded, {t}, 1.0);
        CHECK(rep.recall == doctest::Approx(1.0));
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.frag == 0);
        CHECK(rep.ids == 0);
    }
}

TEST_CASE("empty track list round trips to the empty set") {
    TempDir tmp;
    const auto path = tmp.path / "tracks.csv";
    io::write_tracks({}, path);
    CHECK(io::load_tracks(path).empty());
}

TEST_CASE("tracker config: defaults, overrides, unknown keys") {
    TempDir tmp;
    SUBCASE("minimal file gets full defaults") {
        const auto cfg = io::load_tracker_config(tmp.file("t.cfg", "seed = 7\n"));
        CHECK(cfg.seed == 7);
        CHECK(cfg.rmb.n_particles == 1000);
        CHECK(cfg.glmb.h_max == 1000);
        CHECK(cfg.lambda_window == 10);
        CHECK(cfg.lambda_min == doctest::Approx(0.1));
        CHECK_FALSE(cfg.fixed_clutter.has_value());
        CHECK(cfg.models.sensor == SensorKind::BearingRange);
        CHECK(!cfg.glmb_birth.entries.empty());
    }
    SUBCASE("values parse and land in the right places") {
        const auto cfg = io::load_tracker_config(tmp.file("t.cfg",
                                                          "sensor.kind = linear\n"
                                                          "motion.kind = cv\n"
                                                          "rmb.n_particles = 250\n"
                                                          "lambda.fixed = 12.5\n"
                                                          "birth.site.1.x = 10\n"
                                                          "birth.site.1.y = -20\n"
                                                          "birth.r = 0.05\n"));
        CHECK(cfg.models.sensor == SensorKind::LinearPosition);
        CHECK(cfg.models.motion == MotionKind::ConstantVelocity);
        CHECK(cfg.rmb.n_particles == 250);
        CHECK(cfg.fixed_clutter == doctest::Approx(12.5));
        REQUIRE(cfg.glmb_birth.entries.size() == 1);
        CHECK(cfg.glmb_birth.entries[0].r == doctest::Approx(0.05));
        CHECK(cfg.glmb_birth.entries[0].density.comp[0].mean(kPosY) == doctest::Approx(-20));
        CHECK(cfg.glmb_birth.entries[0].density.comp[0].mean.size() == 4);
    }
    SUBCASE("unknown keys are a hard error") {
        CHECK_THROWS_AS(io::load_tracker_config(tmp.file("t.cfg", "rmb.n_partcles = 10\n")),
                        DataError);
    }
    SUBCASE("duplicate keys are a hard error") {
        CHECK_THROWS_AS(io::load_tracker_config(tmp.file("t.cfg", "seed = 1\nseed = 2\n")),
                        DataError);
    }
}

TEST_CASE("scenario file parsing") {
    TempDir tmp;
    const auto path = tmp.file("s.scn",
                               "duration = 50\n"
                               "seed = 3\n"
                               "clutter.step.1.frame = 1\n"
                               "clutter.step.1.rate = 5\n"
                               "clutter.step.2.frame = 26\n"
                               "clutter.step.2.rate = 20\n"
                               "target.1.birth = 2\n"
                               "target.1.death = 40\n"
                               "target.1.x = 100\n"
                               "target.1.vx = -4\n"
                               "target.1.y = 250\n"
                               "target.1.vy = 2\n"
                               "target.1.omega = 0.03\n");
    const auto spec = io::load_scenario(path);
    CHECK(spec.duration == 50);
    CHECK(spec.seed == 3);
    CHECK(spec.clutter_rate_at(25) == doctest::Approx(5.0));
    CHECK(spec.clutter_rate_at(26) == doctest::Approx(20.0));
    REQUIRE(spec.targets.size() == 1);
    CHECK(spec.targets[0].birth == 2);
    CHECK(spec.targets[0].x0(1) == doctest::Approx(-4));
    CHECK(spec.targets[0].x0(4) == doctest::Approx(0.03));
}

TEST_CASE("config fingerprint is order independent but value sensitive") {
    const std::vector<io::KvEntry> a{{"x", "1", 1}, {"y", "2", 2}};
    const std::vector<io::KvEntry> b{{"y", "2", 1}, {"x", "1", 2}};
    const std::vector<io::KvEntry> c{{"x", "1", 1}, {"y", "3", 2}};
    CHECK(io::config_fingerprint(a) == io::config_fingerprint(b));
    CHECK(io::config_fingerprint(a) != io::config_fingerprint(c));
}
