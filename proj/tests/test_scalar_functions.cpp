#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "scde/scalar_functions.hpp"

using namespace scde;

namespace {

// Reference BIAWGN mutual information, integrated over the channel output
// y ~ N(1, 1/u) with LLR 2uy: independent of the tabulated implementation.
double cf_reference(double u) {
    const double sigma = 1.0 / std::sqrt(u);
    const double lo = std::min(1.0 - 12.0 * sigma, -4.0 * sigma);
    const double hi = 1.0 + 12.0 * sigma;
    const int n = 400000;  // composite Simpson, even count
    const double h = (hi - lo) / n;
    auto f = [&](double y) {
        const double d = y - 1.0;
        const double w = std::exp(-d * d / (2.0 * sigma * sigma)) /
                         (sigma * std::sqrt(2.0 * std::numbers::pi));
        const double l = 2.0 * u * y;
        const double a = std::fabs(l);
        const double sp = ((l < 0.0 ? -l : 0.0) + std::log1p(std::exp(-a))) / std::numbers::ln2;
        return w * sp;
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
    return 1.0 - acc * h / 3.0;
}

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> v;
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) {
        v.push_back(std::exp(a + (b - a) * i / (n - 1)));
    }
    return v;
}

}  // namespace

TEST_CASE("cf matches an independent channel-output quadrature") {
    for (double u : log_space(1e-3, 30.0, 25)) {
        CHECK(std::fabs(cf(ExtScalar(u)) - cf_reference(u)) <= 1e-6);
    }
}

TEST_CASE("cf endpoints and capacity landmark") {
    CHECK(cf(ExtScalar(0.0)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cf(ExtScalar::perfect()) == 1.0);
    // rate-1/2 capacity sits at sigma ~ 0.9787
    const double u = 1.0 / (0.9787 * 0.9787);
    CHECK(std::fabs(cf(ExtScalar(u)) - 0.5) < 1e-3);
}

TEST_CASE("j_fun equals cf at half the mean") {
    for (double m : log_space(1e-6, 100.0, 100)) {
        CHECK(std::fabs(j_fun(ExtScalar(m)) - cf(ExtScalar(m / 2.0))) <= 1e-6);
    }
}

TEST_CASE("reciprocal involution") {
    for (double z : log_space(1e-6, 100.0, 100)) {
        const ExtScalar r = reciprocal_snr(ExtScalar(z));
        REQUIRE_FALSE(r.is_perfect());
        const ExtScalar rr = reciprocal_snr(r);
        REQUIRE_FALSE(rr.is_perfect());
        CHECK(std::fabs(rr.value() - z) <= 1e-6 * std::max(1.0, z));
    }
    CHECK(reciprocal_snr(ExtScalar(0.0)).is_perfect());
    CHECK(reciprocal_snr(ExtScalar::perfect()).value() == 0.0);
}

TEST_CASE("reciprocal complements mutual information") {
    for (double z : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        const ExtScalar r = reciprocal_snr(ExtScalar(z));
        CHECK(std::fabs(cf(ExtScalar(z)) + cf(r) - 1.0) <= 1e-9);
    }
}

TEST_CASE("monotonicity of the tabulated functions") {
    // compare in the deficit domain: near saturation 1 - d collapses onto
    // 1.0 in a double while the deficits themselves stay resolvable
    const auto us = log_space(1e-6, 100.0, 1000);
    for (std::size_t i = 1; i < us.size(); ++i) {
        CHECK(cf_deficit(us[i]) < cf_deficit(us[i - 1]));
        CHECK(j_deficit(us[i]) < j_deficit(us[i - 1]));
        CHECK(phi(ExtScalar(us[i])) < phi(ExtScalar(us[i - 1])));
    }
}

TEST_CASE("inverse round trips") {
    // the cf round trip passes through 1 - mi, so it is only meaningful
    // while the deficit stays well above machine epsilon
    for (double u : log_space(1e-5, 30.0, 40)) {
        const double c = cf(ExtScalar(u));
        const ExtScalar back = cf_inv(c);
        REQUIRE_FALSE(back.is_perfect());
        CHECK(std::fabs(back.value() - u) <= 1e-6 * std::max(1.0, u));
    }
    for (double u : log_space(1e-5, 90.0, 60)) {
        const double j = j_fun(ExtScalar(u));
        const ExtScalar jb = j_inv(j);
        REQUIRE_FALSE(jb.is_perfect());
        CHECK(std::fabs(jb.value() - u) <= 1e-6 * std::max(1.0, u));

        const double p = phi(ExtScalar(u));
        const ExtScalar pb = phi_inv(p);
        REQUIRE_FALSE(pb.is_perfect());
        CHECK(std::fabs(pb.value() - u) <= 2e-6 * std::max(1.0, u));
    }
}

TEST_CASE("direct integrands at tabulated midpoints") {
    // interpolation error between knots stays within the advertised accuracy
    for (double u : log_space(2e-6, 95.0, 37)) {
        CHECK(std::fabs((1.0 - j_deficit(u)) - (1.0 - direct::j_deficit(u))) <= 1e-8);
        CHECK(std::fabs(phi(ExtScalar(u)) - direct::phi(u)) <= 1e-8);
    }
}

TEST_CASE("perfect-message algebra") {
    const ExtScalar p = ExtScalar::perfect();
    CHECK(p.is_perfect());
    CHECK((p + ExtScalar(3.0)).is_perfect());
    CHECK((ExtScalar(1.0) + ExtScalar(2.0)).value() == 3.0);
    CHECK(scaled(0, p).value() == 0.0);
    CHECK(scaled(2, p).is_perfect());
    CHECK(scaled(2, ExtScalar(1.5)).value() == 3.0);
    CHECK(phi(p) == 0.0);
    CHECK(j_fun(p) == 1.0);
    CHECK(cf(p) == 1.0);
    CHECK(phi_inv(0.0).is_perfect());
    CHECK(cf_inv(1.0).is_perfect());
    CHECK(j_inv(1.0).is_perfect());
}

TEST_CASE("saturation promotion") {
    CHECK(promote_if_saturated_llr(ExtScalar(1000.0)).is_perfect());
    CHECK_FALSE(promote_if_saturated_llr(ExtScalar(10.0)).is_perfect());
    CHECK(promote_if_saturated_snr(ExtScalar(500.0)).is_perfect());
    CHECK_FALSE(promote_if_saturated_snr(ExtScalar(5.0)).is_perfect());
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(cf(ExtScalar(-1.0)), std::domain_error);
    CHECK_THROWS_AS(phi(ExtScalar(-0.5)), std::domain_error);
    CHECK_THROWS_AS(cf_inv(1.5), std::domain_error);
    CHECK_THROWS_AS(phi_inv(-0.1), std::domain_error);
}

TEST_CASE("table csv dump") {
    std::ostringstream os;
    dump_table_csv("cf", os);
    const std::string s = os.str();
    CHECK(s.find(',') != std::string::npos);
    // one line per knot, two columns each
    std::istringstream is(s);
    std::string line;
    std::size_t rows = 0;
    double prev_u = -1.0;
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const double u = std::stod(line.substr(0, comma));
        CHECK(u > prev_u);
        prev_u = u;
        ++rows;
    }
    CHECK(rows == 4096);
    CHECK_THROWS_AS(dump_table_csv("nope", os), std::invalid_argument);
}
