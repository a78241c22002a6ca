#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "scenes.hpp"
#include "unidex/ccd.hpp"
#include "unidex/glp.hpp"
#include "unidex/rosenblatt.hpp"

using namespace unidex;
using namespace unidex::design;
using geom::Interval;
using geom::Polytope;
using scene::ConditioningOrder;

namespace {

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return out;
}

// First n points of the Korobov lattice with the given modulus, written out
// independently of rank1_lattice.
std::vector<std::vector<double>> korobov_points(std::size_t n, std::size_t modulus, std::size_t a, std::size_t d) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t power = 1;
        for (std::size_t k = 0; k < d; ++k) {
            pts[i][k] = (static_cast<double>((i * power) % modulus) + 0.5) / static_cast<double>(modulus);
            power = (power * a) % modulus;
        }
    }
    return pts;
}

Eigen::MatrixXd random_cube(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = rng.uniform();
    }
    return u;
}

Polytope cube_table_domain() {
    return scene::assemble_joint_domain(scene::build_scene_graph(dsl::parse(scenes::kCubeTable))).polytope;
}

}  // namespace

// ---- GLP ----

TEST(Glp, LineDesign) {
    const auto hd = glp_design(5, 1);
    ASSERT_EQ(hd.points.rows(), 5);
    const double expected[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(hd.points(i, 0), expected[i], 1e-15);
}

TEST(Glp, KorobovCandidateTwoForFivePoints) {
    const auto u = rank1_lattice(5, korobov_generator(5, 2, 2), 5);
    const double expected[5][2] = {{0.1, 0.1}, {0.3, 0.5}, {0.5, 0.9}, {0.7, 0.3}, {0.9, 0.7}};
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(u(i, 0), expected[i][0], 1e-15);
        EXPECT_NEAR(u(i, 1), expected[i][1], 1e-15);
    }
}

TEST(Glp, MatchesBruteForceSearch) {
    for (std::size_t n : {5u, 7u, 10u, 11u, 13u, 16u, 25u}) {
        for (std::size_t d : {2u, 3u, 4u}) {
            double best = std::numeric_limits<double>::infinity();
            std::vector<std::vector<double>> best_pts;
            std::size_t best_modulus = 0;
            for (std::size_t modulus : {n, n + 1}) {
                for (std::size_t a = 2; a < modulus; ++a) {
                    if (std::gcd(a, modulus) != 1) continue;
                    std::size_t power = 1;
                    std::set<std::size_t> powers;
                    for (std::size_t k = 0; k < d; ++k, power = (power * a) % modulus) powers.insert(power);
                    if (powers.size() != d) continue;
                    const auto pts = korobov_points(n, modulus, a, d);
                    const double cd = oracle::centered_l2_reference(pts);
                    if (cd < best - 1e-13) {
                        best = cd;
                        best_pts = pts;
                        best_modulus = modulus;
                    }
                }
            }
            ASSERT_FALSE(best_pts.empty()) << "N=" << n << " d=" << d;
            const auto hd = glp_design(n, d);
            EXPECT_EQ(hd.lattice_size, best_modulus) << "N=" << n << " d=" << d;
            EXPECT_EQ(rows_of(hd.points), best_pts) << "N=" << n << " d=" << d;
            EXPECT_NEAR(centered_l2_discrepancy(hd.points), best, 1e-12);
        }
    }
}

TEST(Glp, PrimeModulusPreferredOverMirroredColumns) {
    // Every admissible generator mod 10 in four columns contains both h and -h.
    const auto hd = glp_design(10, 4);
    EXPECT_EQ(hd.lattice_size, 11u);
    const auto plain = rank1_lattice(10, korobov_generator(10, 3, 4), 10);
    EXPECT_LT(centered_l2_discrepancy(hd.points), centered_l2_discrepancy(plain));
}

TEST(Glp, BeatsRandomDesigns) {
    const auto hd = glp_design(7, 2);
    const double cd = centered_l2_discrepancy(hd.points);
    for (std::uint64_t s = 0; s < 100; ++s) {
        EXPECT_LE(cd, centered_l2_discrepancy(random_cube(7, 2, s))) << "seed " << s;
    }
}

TEST(Glp, DiscrepancyMatchesReference) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto u = random_cube(9, 3, s);
        EXPECT_NEAR(centered_l2_discrepancy(u), oracle::centered_l2_reference(rows_of(u)), 1e-12);
    }
}

TEST(Glp, FallsBackToLargerModulus) {
    // N = 12, d = 3: every unit squares to 1 mod 12, so only the 13-point lattice qualifies.
    const auto hd = glp_design(12, 3);
    EXPECT_EQ(hd.points.rows(), 12);
    EXPECT_EQ(hd.lattice_size, 13u);
    const std::set<std::size_t> h(hd.generator.begin(), hd.generator.end());
    EXPECT_EQ(h.size(), 3u);
}

TEST(Glp, RowsDistinctAndInsideCube) {
    for (std::size_t n : {2u, 3u, 10u, 25u, 50u}) {
        for (std::size_t d : {1u, 2u, 4u}) {
            const auto hd = glp_design(n, d);
            ASSERT_EQ(static_cast<std::size_t>(hd.points.rows()), n);
            ASSERT_EQ(static_cast<std::size_t>(hd.points.cols()), d);
            EXPECT_GT(hd.points.minCoeff(), 0.0);
            EXPECT_LT(hd.points.maxCoeff(), 1.0);
            const auto rows = rows_of(hd.points);
            EXPECT_EQ(std::set<std::vector<double>>(rows.begin(), rows.end()).size(), n);
            // Each column of a full rank-1 lattice is a permutation of the line design.
            if (hd.lattice_size != n) continue;
            for (std::size_t k = 0; k < d; ++k) {
                std::vector<double> col;
                for (const auto& r : rows) col.push_back(r[k]);
                std::sort(col.begin(), col.end());
                for (std::size_t i = 0; i < n; ++i) {
                    EXPECT_NEAR(col[i], (static_cast<double>(i) + 0.5) / static_cast<double>(hd.lattice_size), 1e-15);
                }
            }
        }
    }
}

TEST(Glp, Deterministic) { EXPECT_EQ(glp_design(50, 4).points, glp_design(50, 4).points); }

TEST(Glp, RejectsTinyN) {
    try {
        glp_design(1, 2);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.kind(), NumericErrorKind::InvalidN);
    }
}

TEST(ShiftedLattice, UniformMarginalsAndDeterministic) {
    const auto u = shifted_lattice(1024, 3, 5);
    EXPECT_EQ(u, shifted_lattice(1024, 3, 5));
    EXPECT_NE(u, shifted_lattice(1024, 3, 6));
    for (Eigen::Index k = 0; k < 3; ++k) {
        std::vector<double> col(u.col(k).data(), u.col(k).data() + u.rows());
        const double stat = oracle::ks_statistic(col, [](double t) { return std::clamp(t, 0.0, 1.0); });
        EXPECT_LT(stat, 2.0 / 1024.0);
    }
}

// ---- CDFs ----

TEST(Cdf, TriangleMarginalClosedForm) {
    const auto tri = oracle::triangle();
    const ConditionalCdf cdf(tri, 0);
    for (int i = 0; i < 100; ++i) {
        const double t = (i + 0.5) / 100.0;
        EXPECT_NEAR(cdf(t), 1.0 - (1.0 - t) * (1.0 - t), 1e-6) << t;
        EXPECT_NEAR(marginal_cdf(tri, 0, t), 1.0 - (1.0 - t) * (1.0 - t), 1e-6);
        EXPECT_NEAR(invert_cdf(cdf, t), 1.0 - std::sqrt(1.0 - t), 1e-6) << t;
    }
    EXPECT_NEAR(cdf(0.5), 0.75, 1e-12);
    EXPECT_NEAR(invert_cdf(cdf, 0.75), 0.5, 1e-9);
    EXPECT_EQ(cdf(1.0), 1.0);
    EXPECT_EQ(cdf(-3.0), 0.0);
}

TEST(Cdf, TriangleConditionalClosedForm) {
    const auto tri = oracle::triangle();
    for (int i = 0; i < 100; ++i) {
        const double x = (i + 0.5) / 101.0;
        const ConditionalCdf cdf(geom::slice(tri, 0, x), 0);
        for (double frac : {0.1, 0.37, 0.5, 0.9}) {
            const double y = frac * (1.0 - x);
            EXPECT_NEAR(cdf(y), y / (1.0 - x), 1e-6);
            EXPECT_NEAR(invert_cdf(cdf, frac), frac * (1.0 - x), 1e-6);
        }
    }
    EXPECT_NEAR(invert_cdf(ConditionalCdf(geom::slice(tri, 0, 0.5), 0), 0.5), 0.25, 1e-9);
}

TEST(Cdf, UnitSquareIsIdentity) {
    const auto sq = oracle::unit_square();
    EXPECT_NEAR(marginal_cdf(sq, 0, 0.3), 0.3, 1e-12);
    EXPECT_NEAR(invert_cdf(ConditionalCdf(sq, 1), 0.42), 0.42, 1e-9);
}

TEST(Cdf, AgreesWithSliceQuadrature) {
    const auto simplex = oracle::simplex3();
    const double total = oracle::quadrature_volume(simplex, 0);
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const ConditionalCdf cdf(simplex, axis);
        for (double t : {0.05, 0.2, 0.5, 0.8}) {
            EXPECT_NEAR(cdf(t), oracle::quadrature_cdf(simplex, axis, t, total), 1e-7);
            EXPECT_NEAR(cdf(t), 1.0 - std::pow(1.0 - t, 3), 1e-9);
        }
    }
    const auto dom = cube_table_domain();
    const double vol = oracle::quadrature_volume(dom, 2);
    for (double t : {550.0, 700.0, 990.0}) {
        EXPECT_NEAR(marginal_cdf(dom, 2, t), oracle::quadrature_cdf(dom, 2, t, vol), 1e-7);
    }
}

TEST(Cdf, ConditionalMonotone) {
    const auto simplex = oracle::simplex3();
    const ConditionalCdf cdf(simplex, 1);
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double v = cdf(i / 200.0);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_EQ(prev, 1.0);
}

TEST(Cdf, PointMassSliceInverts) {
    const ConditionalCdf cdf(geom::slice(oracle::triangle(), 0, 1.0), 0);
    EXPECT_TRUE(cdf.is_point_mass());
    EXPECT_NEAR(invert_cdf(cdf, 0.3), 0.0, 1e-12);
}

TEST(Cdf, RejectsLevelOutsideUnitInterval) {
    const ConditionalCdf cdf(oracle::unit_square(), 0);
    EXPECT_THROW(invert_cdf(cdf, 1.5), NumericError);
    EXPECT_THROW(invert_cdf(cdf, std::nan("")), NumericError);
}

TEST(Brent, FindsRootAndReportsFailure) {
    const auto r = brent_root([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-14, 1e-15, 200);
    EXPECT_NEAR(r.x, std::cbrt(2.0), 1e-12);
    EXPECT_THROW(brent_root([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 0.0, 0.0, 3), NumericError);
}

// ---- Rosenblatt ----

TEST(Rosenblatt, IdentityOnUnitCube) {
    for (std::size_t d : {1u, 2u, 3u}) {
        std::vector<Interval> sides(d, Interval{0.0, 1.0});
        const auto cube = Polytope::box(sides);
        const auto hd = glp_design(25, d);
        std::vector<std::size_t> perm(d);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            const auto x = inverse_rosenblatt(cube, hd.points, ConditioningOrder(perm));
            EXPECT_LE((x - hd.points).cwiseAbs().maxCoeff(), 1e-9);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST(Rosenblatt, AffineOnBox) {
    const Interval sides[] = {{2, 4}, {-1, 1}};
    const auto box = Polytope::box(sides);
    const auto hd = glp_design(11, 2);
    const auto x = inverse_rosenblatt(box, hd.points, ConditioningOrder({1, 0}));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        EXPECT_NEAR(x(i, 0), 2.0 + 2.0 * hd.points(i, 0), 1e-9);
        EXPECT_NEAR(x(i, 1), -1.0 + 2.0 * hd.points(i, 1), 1e-9);
    }
}

TEST(Rosenblatt, TriangleAnalyticPoint) {
    Eigen::MatrixXd u(1, 2);
    u << 0.75, 0.5;
    const auto x = inverse_rosenblatt(oracle::triangle(), u, ConditioningOrder::identity(2));
    EXPECT_NEAR(x(0, 0), 0.5, 1e-9);
    EXPECT_NEAR(x(0, 1), 0.25, 1e-9);
    const auto back = forward_rosenblatt(oracle::triangle(), x, ConditioningOrder::identity(2));
    EXPECT_NEAR(back(0, 0), 0.75, 1e-9);
    EXPECT_NEAR(back(0, 1), 0.5, 1e-9);
    // Reversed order: y ~ 1 - sqrt(1 - u_y), then x | y uniform on [0, 1 - y].
    const auto xr = inverse_rosenblatt(oracle::triangle(), u, ConditioningOrder({1, 0}));
    const double y = 1.0 - std::sqrt(0.5);
    EXPECT_NEAR(xr(0, 1), y, 1e-9);
    EXPECT_NEAR(xr(0, 0), 0.75 * (1.0 - y), 1e-9);
}

TEST(Rosenblatt, RoundTrip) {
    const std::vector<Polytope> domains = {oracle::triangle(), oracle::simplex3(), cube_table_domain()};
    for (const auto& dom : domains) {
        const std::size_t d = dom.dim();
        const auto hd = glp_design(50, d);
        std::vector<std::size_t> perm(d);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            const ConditioningOrder order(perm);
            const auto x = inverse_rosenblatt(dom, hd.points, order);
            for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_TRUE(geom::contains(dom, x.row(i).transpose(), 1e-7));
            const auto back = forward_rosenblatt(dom, x, order);
            EXPECT_LE((back - hd.points).cwiseAbs().maxCoeff(), 1e-7) << "d=" << d << " order " << order.to_string();
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST(Rosenblatt, PreservesMeasure) {
    const auto dom = oracle::simplex3();
    const auto ball = geom::chebyshev_center(dom);
    const auto x = inverse_rosenblatt(dom, random_cube(10000, 3, 17), ConditioningOrder::identity(3));
    std::array<int, 8> counts{};
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int k = 0;
        for (int j = 0; j < 3; ++j) k |= static_cast<int>(x(i, j) >= ball.center(j)) << j;
        ++counts[static_cast<std::size_t>(k)];
    }
    const double total = geom::volume(dom);
    for (int k = 0; k < 8; ++k) {
        Eigen::MatrixXd A(dom.rows() + 3, 3);
        Eigen::VectorXd b(dom.rows() + 3);
        A.topRows(dom.rows()) = dom.A();
        b.head(dom.rows()) = dom.b();
        for (int j = 0; j < 3; ++j) {
            const double s = ((k >> j) & 1) ? -1.0 : 1.0;  // x_j >= c_j  <=>  -x_j + c_j <= 0
            const auto r = static_cast<Eigen::Index>(dom.rows()) + j;
            A.row(r).setZero();
            A(r, j) = s;
            b(r) = -s * ball.center(j);
        }
        const double frac = geom::volume(Polytope(A, b)) / total;
        const double se = std::sqrt(std::max(frac * (1.0 - frac), 1e-12) / 10000.0);
        EXPECT_LE(std::abs(counts[static_cast<std::size_t>(k)] / 10000.0 - frac), 3.0 * se + 1e-12) << "octant " << k;
    }
}

TEST(Rosenblatt, SceneLevelChecksOrder) {
    const auto g = scene::build_scene_graph(dsl::parse(scenes::kTrayCubeTable));
    const auto jd = scene::assemble_joint_domain(g);
    const auto hd = glp_design(10, 4);
    EXPECT_THROW(inverse_rosenblatt(jd, g, hd, ConditioningOrder({2, 0, 1, 3})), Error);
    const auto design = inverse_rosenblatt(jd, g, hd, ConditioningOrder({1, 0, 3, 2}));
    EXPECT_EQ(design.points.rows(), 10);
    EXPECT_EQ(design.dim_meta, jd.dim_meta);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_LE(std::abs(design.points(i, 2) - design.points(i, 0)), scenes::kCubeInTrayHalfX + 1e-9);
        EXPECT_LE(std::abs(design.points(i, 3) - design.points(i, 1)), scenes::kCubeInTrayHalfY + 1e-9);
    }
}

TEST(Rosenblatt, DimensionMismatch) {
    EXPECT_THROW(inverse_rosenblatt(oracle::triangle(), glp_design(5, 3).points, ConditioningOrder::identity(3)),
                 GeometryError);
}

// ---- CCD ----

TEST(Ccd, ExactOnePointLine) {
    const Interval unit[] = {{0, 1}};
    Eigen::MatrixXd p(1, 1);
    p << 0.5;
    MCConfig cfg;
    cfg.exact = true;
    EXPECT_NEAR(ccd(Polytope::box(unit), p, cfg), 1.0 / std::sqrt(12.0), 1e-12);
}

TEST(Ccd, MonteCarloOnePointLine) {
    const Interval unit[] = {{0, 1}};
    Eigen::MatrixXd p(1, 1);
    p << 0.5;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        MCConfig cfg;
        cfg.seed = seed;
        EXPECT_NEAR(ccd(Polytope::box(unit), p, cfg), 1.0 / std::sqrt(12.0), 1e-3);
    }
}

TEST(Ccd, CenteredPointBeatsEdgePoint) {
    const Interval unit[] = {{0, 1}};
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << 0.5;
    b << 0.9;
    for (bool exact : {true, false}) {
        MCConfig cfg;
        cfg.exact = exact;
        const CcdScorer scorer(Polytope::box(unit), cfg);
        EXPECT_LT(scorer.score(a), scorer.score(b));
    }
}

TEST(Ccd, ExactMatchesDirectIntegration) {
    // d = 1: CCD^2 = int_0^1 (1/2)[(c(z)/N - (1 - z))^2 + ((N - c(z))/N - z)^2] dz with c(z) = #{x_i >= z}.
    const Interval unit[] = {{0, 1}};
    Eigen::MatrixXd p(3, 1);
    p << 0.1, 0.45, 0.8;
    const auto integrand = [&](double z) {
        double c = 0.0;
        for (int i = 0; i < 3; ++i) c += p(i, 0) >= z;
        const double hi = c / 3.0 - (1.0 - z);
        const double lo = (3.0 - c) / 3.0 - z;
        return 0.5 * (hi * hi + lo * lo);
    };
    double acc = 0.0;
    const double knots[] = {0.0, 0.1, 0.45, 0.8, 1.0};
    for (int k = 0; k < 4; ++k) acc += oracle::integrate(integrand, knots[k] + 1e-15, knots[k + 1] - 1e-15);
    MCConfig cfg;
    cfg.exact = true;
    EXPECT_NEAR(ccd(Polytope::box(unit), p, cfg), std::sqrt(acc), 1e-9);
}

TEST(Ccd, ExactAndMonteCarloAgreeOnBoxes) {
    const Interval sides[] = {{0, 2}, {-1, 3}};
    const auto box = Polytope::box(sides);
    MCConfig exact;
    exact.exact = true;
    const CcdScorer exact_scorer(box, exact);
    const CcdScorer mc_scorer(box, MCConfig{});
    const auto glp = inverse_rosenblatt(box, glp_design(20, 2).points, ConditioningOrder::identity(2));
    const auto rnd = inverse_rosenblatt(box, random_cube(20, 2, 4), ConditioningOrder::identity(2));
    for (const auto* pts : {&glp, &rnd}) {
        EXPECT_NEAR(mc_scorer.score(*pts), exact_scorer.score(*pts), 2e-3);
    }
    EXPECT_LT(exact_scorer.score(glp), exact_scorer.score(rnd));
}

TEST(Ccd, ScaleInvariant) {
    const Interval unit[] = {{0, 1}, {0, 1}};
    const Interval twice[] = {{0, 2}, {0, 2}};
    const auto u = random_cube(15, 2, 8);
    const MCConfig cfg;
    EXPECT_NEAR(ccd(Polytope::box(unit), u, cfg), ccd(Polytope::box(twice), 2.0 * u, cfg), 1e-3);
}

TEST(Ccd, ExactRequiresBox) {
    MCConfig cfg;
    cfg.exact = true;
    try {
        CcdScorer(oracle::triangle(), cfg);
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.kind(), GeometryErrorKind::NotABox);
    }
}

TEST(Ccd, GlpBeatsRandomOnTriangle) {
    const auto tri = oracle::triangle();
    MCConfig cfg;
    cfg.centers = 1024;
    cfg.pool = 5000;
    const CcdScorer scorer(tri, cfg);
    const auto glp = inverse_rosenblatt(tri, glp_design(50, 2).points, ConditioningOrder::identity(2));
    int wins = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto rnd = inverse_rosenblatt(tri, random_cube(50, 2, s), ConditioningOrder::identity(2));
        wins += scorer.score(glp) < scorer.score(rnd);
    }
    EXPECT_EQ(wins, 10);
}

TEST(Ccd, RejectsBadInput) {
    const CcdScorer scorer(oracle::triangle(), MCConfig{256, 1000, 0, false});
    EXPECT_THROW(scorer.score(Eigen::MatrixXd(3, 3)), GeometryError);
    EXPECT_THROW(scorer.score(Eigen::MatrixXd(0, 2)), NumericError);
}
