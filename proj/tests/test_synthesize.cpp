#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include <json.hpp>

#include "scenes.hpp"
#include "unidex/io.hpp"
#include "unidex/synthesize.hpp"

using namespace unidex;

namespace {

double median_random_ccd(const Pipeline& p, std::size_t n, std::size_t trials = 20) {
    std::vector<double> v;
    for (std::size_t t = 0; t < trials; ++t) v.push_back(p.random_design(n, derive_seed(0, 100 + t)).ccd_score);
    std::sort(v.begin(), v.end());
    return 0.5 * (v[trials / 2 - 1] + v[trials / 2]);
}

std::string error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Synthesize, CubeTableBeatsRandomMedian) {
    const Pipeline p(scenes::kCubeTable, {});
    const auto r = p.synthesize(25);
    ASSERT_EQ(r.design.points.rows(), 25);
    ASSERT_EQ(r.design.points.cols(), 3);
    for (Eigen::Index i = 0; i < 25; ++i) {
        EXPECT_TRUE(geom::contains(p.domain().polytope, r.design.points.row(i).transpose(), 1e-7));
    }
    EXPECT_TRUE(r.design.points.allFinite());
    EXPECT_LT(r.design.ccd_score, median_random_ccd(p, 25));
}

TEST(Synthesize, ScalarSpecGivesLineDesign) {
    const auto r = synthesize_design("Cube with mass (0, 1)", 5);
    ASSERT_EQ(r.design.points.rows(), 5);
    ASSERT_EQ(r.design.points.cols(), 1);
    const double expected[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.design.points(i, 0), expected[i], 1e-9);
}

TEST(Synthesize, TrayCubeEvaluatesFourOrders) {
    const auto r = synthesize_design(scenes::kTrayCubeTable, 10);
    EXPECT_EQ(r.orders_evaluated(), 4u);
    EXPECT_EQ(r.viable_order_count, 4u);
    ASSERT_EQ(r.per_order.size(), 4u);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_LE(std::abs(r.design.points(i, 2) - r.design.points(i, 0)), scenes::kCubeInTrayHalfX + 1e-7);
        EXPECT_LE(std::abs(r.design.points(i, 3) - r.design.points(i, 1)), scenes::kCubeInTrayHalfY + 1e-7);
    }
}

TEST(Synthesize, ReturnsFirstMinimumOrder) {
    const auto r = synthesize_design(scenes::kTrayCubeTable, 25);
    double best = r.per_order.front().ccd;
    scene::ConditioningOrder best_order = r.per_order.front().order;
    for (const auto& s : r.per_order) {
        if (s.ccd < best) {
            best = s.ccd;
            best_order = s.order;
        }
    }
    EXPECT_EQ(r.design.ccd_score, best);
    EXPECT_EQ(r.design.order_used, best_order);
    EXPECT_TRUE(std::is_sorted(r.per_order.begin(), r.per_order.end(),
                               [](const OrderScore& a, const OrderScore& b) { return a.order < b.order; }));
}

TEST(Synthesize, BitForBitReproducible) {
    const auto a = synthesize_design(scenes::kTrayCubeTable, 20);
    const auto b = synthesize_design(scenes::kTrayCubeTable, 20);
    EXPECT_EQ(a.design.points, b.design.points);
    EXPECT_EQ(a.design.ccd_score, b.design.ccd_score);
    EXPECT_EQ(io::to_csv(a.design), io::to_csv(b.design));
}

TEST(Synthesize, OrderCapSubsamples) {
    const char* src =
        "t = Table on V3D(0,0,0)\n"
        "Cube completely on t\n"
        "Cube completely on t\n"
        "Cube completely on t\n";
    SynthesisConfig cfg;
    cfg.order_cap = 5;
    cfg.mc_centers = 128;
    cfg.mc_pool = 500;
    const auto r = synthesize_design(src, 8, cfg);
    EXPECT_EQ(r.viable_order_count, 720u);
    EXPECT_EQ(r.orders_evaluated(), 5u);
    EXPECT_EQ(r.per_order.front().order, scene::ConditioningOrder::identity(6));
}

TEST(Synthesize, ErrorsNameTheStage) {
    EXPECT_NE(error_message([] { synthesize_design("Cube completely on nowhere", 5); }).find("parse"), std::string::npos);
    const auto geo = error_message([] {
        synthesize_design("t = Table on V3D(0,0,0)\nCube completely on t, left of t, right of t", 5);
    });
    EXPECT_NE(geo.find("geometry"), std::string::npos) << geo;
    try {
        synthesize_design(scenes::kCubeTable, 1);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.kind(), NumericErrorKind::InvalidN);
    }
    SynthesisConfig exact;
    exact.exact_ccd = true;
    try {
        synthesize_design(scenes::kTrayCubeTable, 5, exact);
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.kind(), GeometryErrorKind::NotABox);
    }
}

TEST(Synthesize, TimingsPopulated) {
    const auto r = synthesize_design(scenes::kCubeTable, 10);
    EXPECT_GT(r.timings.transforms, 0.0);
    EXPECT_GT(r.timings.ccd, 0.0);
    EXPECT_GE(r.timings.total(), r.timings.transforms + r.timings.ccd);
}

TEST(Synthesize, ExactModeOnBoxScene) {
    SynthesisConfig cfg;
    cfg.exact_ccd = true;
    const auto r = synthesize_design("Cube with mass (0, 1)", 2, cfg);
    // Points 1/4 and 3/4: CCD^2 = (1/2)(3/4 - 11/8 + 2/3) = 1/48.
    EXPECT_NEAR(r.design.points(0, 0), 0.25, 1e-12);
    EXPECT_NEAR(r.design.points(1, 0), 0.75, 1e-12);
    EXPECT_NEAR(r.design.ccd_score, 1.0 / std::sqrt(48.0), 1e-12);
}

// ---- io ----

TEST(Io, SeventeenSignificantDigits) {
    EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_double(500.0), "500");
    for (double v : {1.0 / 3.0, -0.45599999999999996, 1e-300, 6.02214076e23}) {
        EXPECT_EQ(std::stod(io::format_double(v)), v);
    }
}

TEST(Io, CsvRoundTrip) {
    const auto r = synthesize_design(scenes::kTrayCubeTable, 12);
    const std::string csv = io::to_csv(r.design);
    const auto t = io::parse_csv(csv);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"tr_1.pos.x", "tr_1.pos.y", "_obj3.pos.x", "_obj3.pos.y"}));
    EXPECT_EQ(t.points, r.design.points);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}

TEST(Io, CsvErrors) {
    EXPECT_THROW(io::parse_csv(""), ParseError);
    EXPECT_THROW(io::parse_csv("a,b\n1,2,3\n"), ParseError);
    EXPECT_THROW(io::parse_csv("a\nfoo\n"), ParseError);
    const auto t = io::parse_csv("a,b\r\n1, 2\r\n\r\n3,4");
    EXPECT_EQ(t.points.rows(), 2);
    EXPECT_EQ(t.points(0, 1), 2.0);
}

TEST(Io, JsonDocument) {
    const auto r = synthesize_design(scenes::kCubeTable, 10);
    const auto doc = nlohmann::json::parse(io::to_json(r.design, 7, r.timings));
    EXPECT_EQ(doc.at("columns").size(), 3u);
    EXPECT_EQ(doc.at("points").size(), 10u);
    EXPECT_EQ(doc.at("points")[0].size(), 3u);
    EXPECT_EQ(doc.at("ccd").get<double>(), r.design.ccd_score);
    EXPECT_EQ(doc.at("order").get<std::vector<std::size_t>>(), r.design.order_used.perm());
    EXPECT_EQ(doc.at("seed").get<int>(), 7);
    for (const char* k : {"parse", "geometry", "glp", "transforms", "ccd", "total"}) {
        EXPECT_TRUE(doc.at("timings_ms").contains(k)) << k;
    }
}

TEST(Io, MissingFile) {
    try {
        io::read_file("/nonexistent/spec.prs");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseErrorKind::Io);
        EXPECT_NE(std::string(e.what()).find("cannot read"), std::string::npos);
    }
}
