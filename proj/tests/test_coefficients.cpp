#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "itofl/coeff_db.hpp"
#include "itofl/coefficients.hpp"

using namespace itofl;

namespace {

Rational R(long long n, long long d) { return Rational(n, d); }

// published triple-integral coefficients with outermost index pinned to 3;
// rows = middle index 0..6, columns = inner index 0..6
const std::vector<std::vector<Rational>> kTriple3 = {
    {R(0, 1), R(2, 105), R(0, 1), R(-4, 315), R(0, 1), R(2, 693), R(0, 1)},
    {R(4, 105), R(0, 1), R(-2, 315), R(0, 1), R(-8, 3465), R(0, 1), R(10, 9009)},
    {R(2, 35), R(-2, 105), R(0, 1), R(4, 3465), R(0, 1), R(-74, 45045), R(0, 1)},
    {R(2, 315), R(0, 1), R(-2, 3465), R(0, 1), R(16, 45045), R(0, 1), R(-10, 9009)},
    {R(-2, 63), R(46, 3465), R(0, 1), R(-32, 45045), R(0, 1), R(2, 9009), R(0, 1)},
    {R(-10, 693), R(0, 1), R(38, 9009), R(0, 1), R(-4, 9009), R(0, 1), R(122, 765765)},
    {R(0, 1), R(-10, 3003), R(0, 1), R(20, 9009), R(0, 1), R(-226, 765765), R(0, 1)},
};

// quadruple-integral coefficients with outer pair (2,1); rows = level-2 index,
// columns = level-1 (innermost) index
const std::vector<std::vector<Rational>> kQuad21 = {
    {R(2, 21), R(-2, 45), R(2, 315)},
    {R(2, 315), R(2, 315), R(-2, 225)},
    {R(-2, 105), R(2, 225), R(2, 1155)},
};

// quintuple-integral coefficients with outer triple (1,0,1); rows = level-2
// index, columns = level-1 index
const std::vector<std::vector<Rational>> kQuint101 = {
    {R(4, 315), R(0, 1)},
    {R(4, 315), R(-8, 945)},
};

}  // namespace

TEST_CASE("triple coefficients with outer index 3 match the published 7x7 block exactly") {
    CoefficientGrid grid(WeightSpec::unit(3), {6, 6, 3});
    for (int row = 0; row <= 6; ++row)
        for (int col = 0; col <= 6; ++col)
            REQUIRE(grid.cbar_at({col, row, 3}) == kTriple3[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]);
}

TEST_CASE("quadruple coefficients with outer pair (2,1) match the published 3x3 block exactly") {
    CoefficientGrid grid(WeightSpec::unit(4), {2, 2, 2, 2});
    for (int row = 0; row <= 2; ++row)
        for (int col = 0; col <= 2; ++col)
            REQUIRE(grid.cbar_at({col, row, 1, 2}) == kQuad21[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]);
}

TEST_CASE("quintuple coefficients with outer triple (1,0,1) match the published 2x2 block exactly") {
    CoefficientGrid grid(WeightSpec::unit(5), {1, 1, 1, 1, 1});
    for (int row = 0; row <= 1; ++row)
        for (int col = 0; col <= 1; ++col)
            REQUIRE(grid.cbar_at({col, row, 1, 0, 1}) == kQuint101[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]);
}

TEST_CASE("cbar spot values") {
    REQUIRE(cbar({1, 0, 3}) == R(2, 105));
    REQUIRE(cbar({0, 1, 3}) == R(4, 105));
    REQUIRE(cbar({0, 0, 0}) == R(4, 3));
    REQUIRE(cbar({0, 0, 1, 2}) == R(2, 21));
    REQUIRE(cbar({0, 0, 1, 0, 1}) == R(4, 315));
    // one-level values: integral of P_j over [-1,1]
    REQUIRE(cbar({0}) == 2);
    REQUIRE(cbar({5}) == 0);
}

TEST_CASE("cbar validates its inputs") {
    REQUIRE_THROWS_AS(cbar({0, 0}, WeightSpec::unit(3)), std::invalid_argument);
    REQUIRE_THROWS_AS(cbar({0, 0, 0, 0, 0, 0, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(cbar({-1}), std::invalid_argument);
}

TEST_CASE("grid agrees with one-off cbar everywhere") {
    WeightSpec w({Weight::unit(), Weight::start_minus_time(), Weight::unit()});
    CoefficientGrid grid(w, {2, 3, 2});
    std::vector<int> idx;
    for (std::int64_t f = 0; f < grid.size(); ++f) {
        grid.unflatten(f, idx);
        REQUIRE(grid.cbar_flat(f) == cbar(idx, w));
    }
}

TEST_CASE("dimensional scaling of coefficients") {
    // multiplicity 3, all-zero indices: C = (T-t)^{3/2} * cbar / 8 = (T-t)^{3/2}/6
    REQUIRE(c_scaled({0, 0, 0}, WeightSpec::unit(3), 1.0) == Catch::Approx(1.0 / 6).epsilon(1e-14));
    // multiplicity 1: C_0 = sqrt(T-t)
    REQUIRE(c_scaled({0}, WeightSpec::unit(1), 4.0) == Catch::Approx(2.0).epsilon(1e-14));
    // table entry combined with the scaling rule
    REQUIRE(c_scaled({1, 0, 3}, WeightSpec::unit(3), 1.0) ==
            Catch::Approx(std::sqrt(21.0) / 8 * (2.0 / 105)).epsilon(1e-14));
    // grid route matches the one-off route
    CoefficientGrid grid(WeightSpec::unit(3), {3, 3, 3});
    REQUIRE(grid.scaled({1, 0, 3}, 0.25) == Catch::Approx(c_scaled({1, 0, 3}, WeightSpec::unit(3), 0.25)).epsilon(1e-14));
    REQUIRE(grid.dt_pow2() == 3);
}

TEST_CASE("kernel norms") {
    KernelNorm k3 = kernel_norm(WeightSpec::unit(3));
    REQUIRE(k3.coeff == R(1, 6));
    REQUIRE(k3.dt_power == 3);

    KernelNorm k1 = kernel_norm(WeightSpec::unit(1));
    REQUIRE(k1.coeff == 1);
    REQUIRE(k1.value(2.0) == Catch::Approx(2.0));

    // inner unit, outer (t - s): norm (T-t)^4 / 4
    KernelNorm outer_weighted = kernel_norm(WeightSpec({Weight::unit(), Weight::start_minus_time()}));
    REQUIRE(outer_weighted.coeff == R(1, 4));
    REQUIRE(outer_weighted.dt_power == 4);

    // inner (t - s), outer unit: norm (T-t)^4 / 12
    KernelNorm inner_weighted = kernel_norm(WeightSpec({Weight::start_minus_time(), Weight::unit()}));
    REQUIRE(inner_weighted.coeff == R(1, 12));
    REQUIRE(inner_weighted.dt_power == 4);

    // sign of the weight cannot matter
    REQUIRE(kernel_norm(WeightSpec({Weight::time_minus_start(), Weight::unit()})).coeff == R(1, 12));
}

TEST_CASE("unit-weight kernels: included coefficient mass grows toward the norm") {
    for (int k = 2; k <= 5; ++k) {
        Rational norm = kernel_norm(WeightSpec::unit(k)).coeff;
        Rational prev = -1;
        for (int p = 0; p <= 3; ++p) {
            Rational s = coefficient_grid(WeightSpec::unit(k), p).c_squared_sum_unit();
            REQUIRE(s > prev);
            REQUIRE(s <= norm);
            prev = s;
        }
    }
}

TEST_CASE("single-level expansion is exact at order zero") {
    // for multiplicity 1 with unit weight only j = 0 contributes
    CoefficientGrid grid(WeightSpec::unit(1), {12});
    for (int j = 1; j <= 12; ++j) REQUIRE(grid.cbar_at({j}) == 0);
    REQUIRE(kernel_norm(WeightSpec::unit(1)).coeff == grid.c_squared_sum_unit());
}

TEST_CASE("linear single-level weights terminate after two coefficients") {
    for (Weight w : {Weight::time_minus_start(), Weight::end_minus_time()}) {
        CoefficientGrid grid(WeightSpec({w}), {12});
        for (int j = 2; j <= 12; ++j) REQUIRE(grid.cbar_at({j}) == 0);
        REQUIRE(grid.cbar_at({0}) != 0);
        REQUIRE(grid.cbar_at({1}) != 0);
        // the two coefficients already carry the whole norm
        REQUIRE(grid.c_squared_sum_unit() == kernel_norm(WeightSpec({w})).coeff);
    }
    // orientation: (s-t) and (T-s) share the constant term, the linear term flips sign
    CoefficientGrid a(WeightSpec({Weight::time_minus_start()}), {1});
    CoefficientGrid b(WeightSpec({Weight::end_minus_time()}), {1});
    REQUIRE(a.cbar_at({0}) == b.cbar_at({0}));
    REQUIRE(a.cbar_at({1}) == -b.cbar_at({1}));
}

TEST_CASE("coefficient database round-trips exactly") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "itofl-dbtest";
    fs::create_directories(dir);
    fs::path file = dir / "k3p6.db";

    export_db(6, {3}, file.string());
    CoeffDb db = import_db(file.string());
    REQUIRE(db.record_count() == 343);
    REQUIRE(db.blocks.count(3) == 1);

    CoefficientGrid grid(WeightSpec::unit(3), {6, 6, 6});
    std::vector<int> idx;
    for (std::int64_t f = 0; f < grid.size(); ++f) {
        grid.unflatten(f, idx);
        REQUIRE(db.blocks[3].at(idx) == grid.cbar_flat(f));
    }

    // the published block sits inside the export
    for (int row = 0; row <= 6; ++row)
        for (int col = 0; col <= 6; ++col)
            REQUIRE(db.blocks[3].at({col, row, 3}) == kTriple3[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]);

    fs::remove_all(dir);
}

TEST_CASE("coefficient database import rejects damage") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "itofl-dbtest-bad";
    fs::create_directories(dir);
    fs::path good = dir / "good.db";
    export_db(2, {2, 3}, good.string());
    REQUIRE(import_db(good.string()).record_count() == 9 + 27);

    // truncated: drop the last line
    {
        std::ifstream in(good.string());
        std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto cut = all.find_last_of('\n', all.size() - 2);
        std::ofstream out((dir / "trunc.db").string());
        out << all.substr(0, cut + 1);
    }
    REQUIRE_THROWS_AS(import_db((dir / "trunc.db").string()), CoeffDbError);

    // wrong magic
    {
        std::ofstream out((dir / "magic.db").string());
        out << "itofl-coeffdb v9\n";
    }
    REQUIRE_THROWS_AS(import_db((dir / "magic.db").string()), CoeffDbError);

    // mangled record
    {
        std::ifstream in(good.string());
        std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        all.replace(all.find("2,0,0,"), 6, "2,0,x,");
        std::ofstream out((dir / "mangle.db").string());
        out << all;
    }
    REQUIRE_THROWS_AS(import_db((dir / "mangle.db").string()), CoeffDbError);

    REQUIRE_THROWS_AS(import_db((dir / "missing.db").string()), CoeffDbError);
    fs::remove_all(dir);
}
