#include "calcium/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

using namespace calcium;

TEST_CASE("csv round trip keeps schema, metadata and values")
{
    const std::string path = (std::filesystem::temp_directory_path() / "calcium_io_test.csv").string();
    {
        io::CsvWriter w(path, "orbit", {"t", "h", "c"}, Convention::Derived, "0123456789abcdef");
        w.row({0.0, 0.1, 1e-300});
        w.row({1.5, -2.25, 3.0});
        w.row_text({"x", "y", "z"});
        CHECK_THROWS(w.row({1.0}));
    }
    const io::CsvTable t = io::read_csv(path);
    CHECK(t.schema == "orbit");
    REQUIRE(t.meta.size() == 3);
    CHECK(t.meta[1] == "convention: derived");
    CHECK(t.meta[2] == "fingerprint: 0123456789abcdef");
    CHECK(t.columns == std::vector<std::string>{"t", "h", "c"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.column("h") == 1);
    CHECK(t.column("missing") == -1);
    CHECK(std::strtod(t.rows[0][2].c_str(), nullptr) == 1e-300);
    CHECK(t.rows[2][0] == "x");
    std::filesystem::remove(path);
}

TEST_CASE("format_double round-trips to 15 significant digits")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> m(-1.0, 1.0);
    std::uniform_int_distribution<int> e(-200, 200);
    for (int k = 0; k < 1000; ++k) {
        const double v = m(rng) * std::pow(10.0, e(rng));
        const double back = std::strtod(io::format_double(v).c_str(), nullptr);
        CHECK(std::abs(back - v) <= 1e-14 * std::abs(v));
    }
}
