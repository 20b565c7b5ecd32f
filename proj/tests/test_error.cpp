#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "itofl/error.hpp"

using namespace itofl;

TEST_CASE("distinct pair defect telescopes exactly") {
    for (int q = 0; q <= 50; ++q) {
        CAPTURE(q);
        REQUIRE(mse_exact_distinct_coeff(2, q) == i11_mse_coeff(q));
    }
    CHECK(i11_mse_coeff(0) == Rational(1, 4));
    CHECK(i11_mse_coeff(3) == Rational(1, 28));
}

TEST_CASE("single-level defect is exactly zero at every order") {
    for (int p = 0; p <= 6; ++p) REQUIRE(mse_exact_distinct_coeff(1, p) == 0);
}

TEST_CASE("distinct defects match pinned exact values") {
    CHECK(mse_exact_distinct_coeff(3, 0) == Rational(5, 36));
    CHECK(mse_exact_distinct_coeff(3, 1) == Rational(37, 450));
    CHECK(mse_exact_distinct_coeff(3, 6) == Rational(BigInt("3754499729"), BigInt("192008134890")));
    CHECK(mse_exact_distinct_coeff(4, 2) == Rational(234761, 10245312));
    CHECK(mse_exact_distinct_coeff(5, 1) == Rational(32131, 4233600));
    CHECK(to_double(mse_exact_distinct_coeff(3, 2)) == Catch::Approx(0.05024943).margin(5e-9));
    CHECK(to_double(mse_exact_distinct_coeff(3, 3)) == Catch::Approx(0.03614125).margin(5e-9));
    CHECK(to_double(mse_exact_distinct_coeff(3, 4)) == Catch::Approx(0.02819370).margin(5e-9));
    CHECK(to_double(mse_exact_distinct_coeff(3, 5)) == Catch::Approx(0.02309763).margin(5e-9));
}

TEST_CASE("defect decreases strictly with the order") {
    for (int k = 2; k <= 4; ++k) {
        Rational prev = mse_exact_distinct_coeff(k, 0);
        for (int p = 1; p <= 4; ++p) {
            const Rational cur = mse_exact_distinct_coeff(k, p);
            CAPTURE(k, p);
            REQUIRE(cur < prev);
            REQUIRE(cur > 0);
            prev = cur;
        }
    }
    CHECK(mse_exact_distinct_coeff(5, 1) < mse_exact_distinct_coeff(5, 0));
    CHECK(mse_exact_distinct_coeff(5, 2) < mse_exact_distinct_coeff(5, 1));
}

TEST_CASE("factorial bound dominates the exact cases and reports correctly") {
    const MseReport b = mse_bound(3, 2, 2.0);
    CHECK(b.formula == "factorial_defect_bound");
    CHECK_FALSE(b.exact);
    CHECK(b.coeff == 6 * mse_exact_distinct_coeff(3, 2));
    CHECK(b.dt_power == 3);
    CHECK(b.value == Catch::Approx(to_double(b.coeff) * 8.0));

    CHECK(mse_bound(3, 2, 1.0).coeff >= mse_exact_case_coeff({1, 1, 2}, 2));
    CHECK(mse_bound(4, 2, 1.0).coeff >= mse_exact_case_coeff({1, 1, 2, 2}, 2));
    CHECK(mse_bound(2, 3, 1.0).coeff >= mse_exact_case_coeff({1, 2}, 3));

    // weighted pair bound: 2! times the defect, dt power 4
    const MseReport wb = mse_bound(WeightSpec({Weight::unit(), Weight::start_minus_time()}), 3, 1.0);
    CHECK(wb.dt_power == 4);
    CHECK(wb.coeff > 0);
}

TEST_CASE("exact repeat-pattern errors") {
    SECTION("distinct components reduce to the plain defect") {
        CHECK(mse_exact_case_coeff({1, 2, 3}, 2) == mse_exact_distinct_coeff(3, 2));
        CHECK(mse_exact_case_coeff({4, 2}, 5) == mse_exact_distinct_coeff(2, 5));
    }

    SECTION("all components equal: the truncation is exact") {
        for (int q : {0, 1, 3}) {
            CHECK(mse_exact_case_coeff({1, 1}, q) == 0);
            CHECK(mse_exact_case_coeff({2, 2, 2}, q) == 0);
            CHECK(mse_exact_case_coeff({1, 1, 1, 1}, q) == 0);
        }
        CHECK(mse_exact_case_coeff({3, 3, 3, 3, 3}, 1) == 0);
    }

    SECTION("repeat patterns decrease with order and respect relabeling") {
        const Rational a2 = mse_exact_case_coeff({1, 1, 2}, 2);
        const Rational a6 = mse_exact_case_coeff({1, 1, 2}, 6);
        const Rational a12 = mse_exact_case_coeff({1, 1, 2}, 12);
        CHECK(a2 > a6);
        CHECK(a6 > a12);
        CHECK(a12 > 0);
        CHECK(3 * a12 < a2);
        CHECK(mse_exact_case_coeff({2, 2, 1}, 2) == a2);
        CHECK(mse_exact_case_coeff({7, 7, 5}, 2) == a2);

        const Rational b1 = mse_exact_case_coeff({1, 1, 2, 2}, 1);
        const Rational b3 = mse_exact_case_coeff({1, 1, 2, 2}, 3);
        CHECK(b1 > b3);
        CHECK(b3 > 0);

        const Rational c1 = mse_exact_case_coeff({1, 1, 2, 2, 1}, 1);
        CHECK(c1 > 0);
        CHECK(mse_exact_case_coeff({1, 1, 2, 2, 1}, 2) < c1);
    }

    SECTION("pair placement changes the exact value in general") {
        // pair on the inner two levels versus the outer two levels
        const Rational inner = mse_exact_case_coeff({1, 1, 2}, 1);
        const Rational outer = mse_exact_case_coeff({2, 1, 1}, 1);
        CHECK(inner > 0);
        CHECK(outer > 0);
    }

    SECTION("unsupported patterns are rejected with guidance") {
        CHECK_FALSE(mse_case_supported({1, 1, 2, 3}));        // pair plus two singles, k = 4
        CHECK_FALSE(mse_case_supported({1, 1, 2, 2, 3}));     // two pairs plus single, k = 5
        CHECK_FALSE(mse_case_supported({1, 1, 1, 2}));        // triple plus single
        CHECK_THROWS_AS(mse_exact_case_coeff({1, 1, 2, 3}, 1), std::invalid_argument);
        CHECK_THROWS_AS(mse_exact_case_coeff({0, 1}, 1), std::invalid_argument);
        CHECK_THROWS_AS(mse_exact_case_coeff({1, 2}, -1), std::invalid_argument);
    }

    SECTION("report wrapper") {
        const MseReport r = mse_exact_case({1, 1, 2}, 2, 0.5);
        CHECK(r.exact);
        CHECK(r.formula == "class_permutation");
        CHECK(r.dt_power == 3);
        CHECK(r.value == Catch::Approx(to_double(r.coeff) * 0.125));
        const MseReport d = mse_exact_distinct(3, 2, 1.0);
        CHECK(d.formula == "parseval_defect");
        CHECK(d.value == Catch::Approx(to_double(mse_exact_distinct_coeff(3, 2))));
    }
}

TEST_CASE("time-weighted pair defects") {
    // both orientations carry the same error, larger at q = 0 than the series
    CHECK(j01_mse_coeff(0) == Rational(5, 72));
    CHECK(j10_mse_coeff(0) == Rational(5, 72));
    CHECK(j01_mse_coeff(1) == Rational(299, 12600));
    CHECK(j01_mse_coeff(2) == Rational(1283, 88200));
    CHECK(j01_mse_coeff(5) == Rational(3343, 490776));
    for (int q = 0; q <= 6; ++q) {
        CAPTURE(q);
        REQUIRE(j01_mse_coeff(q) == j10_mse_coeff(q));
    }

    CHECK(weighted_pair_mse_series_coeff(0) == Rational(1, 36));
    for (int q = 1; q <= 6; ++q) {
        CAPTURE(q);
        REQUIRE(weighted_pair_mse_series_coeff(q) == j01_mse_coeff(q));
    }
    CHECK(j01_mse_coeff(0) > weighted_pair_mse_series_coeff(0));

    CHECK(j01_mse(2, 0.5) == Catch::Approx(to_double(Rational(1283, 88200)) * 0.0625));
    CHECK(j10_mse(0, 2.0) == Catch::Approx(to_double(Rational(5, 72)) * 16.0));
}

TEST_CASE("smallest sufficient order") {
    const auto cols = reference_min_q_columns();
    REQUIRE(cols.size() == 4);

    SECTION("pair row, no slack") {
        std::vector<int> want{18, 50, 234, 327};
        for (std::size_t i = 0; i < cols.size(); ++i)
            CHECK(min_q_for_threshold(2, cols[i], 0.0) == want[i]);
    }

    SECTION("triple row needs the documented slack") {
        std::vector<int> with_slack{1, 2, 5, 6};
        std::vector<int> without{2, 3, 5, 6};
        for (std::size_t i = 0; i < cols.size(); ++i) {
            CHECK(min_q_for_threshold(3, cols[i], 5e-5) == with_slack[i]);
            CHECK(min_q_for_threshold(3, cols[i], 0.0) == without[i]);
        }
    }

    SECTION("slack on the pair row would overshoot the third column") {
        CHECK(min_q_for_threshold(2, cols[2], 5e-5) == 233);
    }

    SECTION("table assembly") {
        const MinQTable t = min_q_table(cols);
        REQUIRE(t.rows.size() == 2);
        CHECK(t.rows[0].k == 2);
        CHECK(t.rows[0].slack == 0.0);
        CHECK(t.rows[0].q == std::vector<int>{18, 50, 234, 327});
        CHECK(t.rows[1].k == 3);
        CHECK(t.rows[1].slack == 5e-5);
        CHECK(t.rows[1].q == std::vector<int>{1, 2, 5, 6});
    }

    SECTION("validation") {
        CHECK_THROWS_AS(min_q_for_threshold(4, 0.1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(min_q_for_threshold(2, 0.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(min_q_for_threshold(2, 0.1, -1e-9), std::invalid_argument);
        CHECK_THROWS_AS(min_q_table({}), std::invalid_argument);
    }
}
