#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "volterra/disk.hpp"

using namespace volterra;

namespace {

// Independent gauge oracle: bisection on the smallest t with x in t*B,
// deciding membership by the raw p-norm inequality (no division formula).
bool member(const Vec& x, const Disk& B, double t) {
    if (t == 0.0) {
        for (double v : x)
            if (v != 0.0) return false;
        return true;
    }
    double acc = 0.0;
    switch (B.p) {
        case Disk::P::one:
            for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] / (t * B.weights[i]));
            break;
        case Disk::P::two:
            for (std::size_t i = 0; i < x.size(); ++i) {
                double r = x[i] / (t * B.weights[i]);
                acc += r * r;
            }
            acc = std::sqrt(acc);
            break;
        case Disk::P::inf:
            for (std::size_t i = 0; i < x.size(); ++i)
                acc = std::max(acc, std::abs(x[i] / (t * B.weights[i])));
            break;
    }
    return acc <= B.radius;
}

double gauge_bisect(const Vec& x, const Disk& B) {
    double hi = 1.0;
    while (!member(x, B, hi)) hi *= 2.0;
    if (member(x, B, hi / 2.0)) {
        double lo = hi / 2.0;
        while (lo > 1e-300 && member(x, B, lo)) {
            hi = lo;
            lo /= 2.0;
        }
        if (lo <= 1e-300) return 0.0;
    }
    double lo = hi / 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (member(x, B, mid) ? hi : lo) = mid;
    }
    return hi;
}

Vec random_vec(std::mt19937_64& rng, std::size_t dim, double span) {
    std::uniform_real_distribution<double> u(-span, span);
    Vec x(dim);
    for (double& v : x) v = u(rng);
    return x;
}

const Disk kDisks[] = {
    Disk{Disk::P::one, Vec{1.0, 2.0, 0.5}, 1.5},
    Disk{Disk::P::two, Vec{1.0, 2.0, 0.5}, 0.75},
    Disk{Disk::P::inf, Vec{1.0, 2.0, 0.5}, 2.0},
};

}  // namespace

TEST_CASE("gauge closed forms") {
    Disk linf2 = Disk::box(2);
    CHECK(gauge(Vec{0.0, 0.0}, linf2) == 0.0);
    CHECK(gauge(Vec{3.0, -4.0}, linf2) == doctest::Approx(4.0));

    Disk l2w{Disk::P::two, Vec{1.0, 2.0}, 1.0};
    CHECK(gauge(Vec{1.0, 1.0}, l2w) == doctest::Approx(1.118034).epsilon(1e-6));

    CHECK_THROWS_AS(gauge(Vec{1.0}, linf2), std::invalid_argument);
}

TEST_CASE("contains uses the closed disk") {
    Disk linf2 = Disk::box(2);
    CHECK(contains(linf2, Vec{1.0, -1.0}, 0.0));
    CHECK_FALSE(contains(linf2, Vec{1.01, 0.0}, 0.0));
    Disk l2w{Disk::P::two, Vec{1.0, 2.0}, 1.0};
    CHECK_FALSE(contains(l2w, Vec{1.0, 1.0}, 0.0));
}

TEST_CASE("scale_disk rescales the gauge") {
    Disk linf2 = Disk::box(2);
    Disk same = scale_disk(linf2, 1.0);
    CHECK(same.radius == linf2.radius);
    CHECK(gauge(Vec{2.0, 0.0}, scale_disk(linf2, 2.0)) == doctest::Approx(1.0));

    Disk l2w{Disk::P::two, Vec{1.0, 2.0}, 1.0};
    CHECK(gauge(Vec{1.0, 1.0}, scale_disk(l2w, 0.5)) == doctest::Approx(2.236068).epsilon(1e-6));
    CHECK_THROWS_AS(scale_disk(linf2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_disk(linf2, -1.0), std::invalid_argument);
}

TEST_CASE("gauge axioms on seeded random vectors") {
    std::mt19937_64 rng(7);
    for (const Disk& B : kDisks) {
        for (int i = 0; i < 1000; ++i) {
            Vec x = random_vec(rng, B.dim(), 3.0);
            Vec y = random_vec(rng, B.dim(), 3.0);

            // subadditivity
            CHECK(gauge(add(x, y), B) <= gauge(x, B) + gauge(y, B) + 1e-12);

            // homogeneity
            double gx = gauge(x, B);
            for (double a : {-3.0, -1.0, 0.0, 0.5, 7.0}) {
                double lhs = gauge(scale(x, a), B);
                CHECK(lhs == doctest::Approx(std::abs(a) * gx).epsilon(1e-12));
            }

            // membership duality
            CHECK((gx <= 1.0) == contains(B, x, 1e-12));

            // oracle equivalence
            CHECK(gx == doctest::Approx(gauge_bisect(x, B)).epsilon(1e-8));
        }
    }
}

TEST_CASE("inclusion monotonicity: larger disk, smaller gauge") {
    std::mt19937_64 rng(11);
    Disk B{Disk::P::two, Vec{1.0, 1.0, 1.0}, 1.0};
    Disk D{Disk::P::inf, Vec{1.0, 1.0, 1.0}, 1.0};  // B (unit ball) inside D (unit cube)
    REQUIRE(disk_inclusion_margin(B, D, 512, 3) <= 1.0);
    for (int i = 0; i < 1000; ++i) {
        Vec x = random_vec(rng, 3, 2.0);
        CHECK(gauge(x, D) <= gauge(x, B) * (1.0 + 1e-9));
    }
}

TEST_CASE("disk_inclusion_margin") {
    Disk B = Disk::box(2);
    CHECK(disk_inclusion_margin(B, B, 256, 1) == doctest::Approx(1.0));
    CHECK(disk_inclusion_margin(B, Disk::box(2, 2.0), 256, 1) == doctest::Approx(0.5));
    // sup ||x||_2 / 2 over the unit square boundary, attained at a corner
    CHECK(disk_inclusion_margin(B, Disk::ball(2, 2.0), 512, 1) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK_THROWS_AS(disk_inclusion_margin(B, Disk::box(3), 16, 1), std::invalid_argument);
}

TEST_CASE("check_strict_mackey equivalence constants") {
    Disk B = Disk::box(2);
    SUBCASE("identical norms") {
        auto rep = check_strict_mackey(B, B, B, 512, 5);
        CHECK(rep.lower_const == doctest::Approx(1.0));
        CHECK(rep.upper_const == doctest::Approx(1.0));
        CHECK(rep.max_violation == 0.0);
    }
    SUBCASE("scaled reference") {
        Disk D2 = Disk::box(2, 2.0);
        auto rep = check_strict_mackey(B, D2, B, 512, 5);
        CHECK(rep.lower_const == doctest::Approx(0.5));
        CHECK(rep.upper_const == doctest::Approx(0.5));
    }
    SUBCASE("classical linf/l2 constants in the plane") {
        auto rep = check_strict_mackey(B, B, Disk::ball(2), 2048, 5);
        CHECK(rep.lower_const == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
        CHECK(rep.upper_const == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(rep.lower_const <= rep.upper_const);
    }
    SUBCASE("B not inside D is rejected") {
        CHECK_THROWS_AS(check_strict_mackey(Disk::box(2, 2.0), Disk::box(2, 1.0), B, 64, 5),
                        PreconditionError);
    }
}

TEST_CASE("gauge-B convergence dominates the reference gauge") {
    // topology comparison: upper_const * gauge_B bounds gauge_ref on samples
    Disk B = Disk::box(2);
    Disk ref = Disk::ball(2);
    auto rep = check_strict_mackey(B, B, ref, 1024, 9);
    std::mt19937_64 rng(13);
    double upper_ref_over_B = 1.0 / rep.lower_const;  // sup gauge_ref / gauge_B on B
    for (int i = 0; i < 500; ++i) {
        Vec x = random_vec(rng, 2, 5.0);
        CHECK(gauge(x, ref) <= upper_ref_over_B * gauge(x, B) * (1.0 + 1e-9));
    }
}
