#include <cmath>

#include "doctest.h"
#include "rnn_surgery/errors.hpp"
#include "rnn_surgery/theory.hpp"

using namespace rnn_surgery;
using namespace rnn_surgery::regression;

TEST_CASE("covering bound arithmetic") {
    CHECK(covering_bound(2, 2, 1, 10, 0.1) == doctest::Approx(16 * std::log(2.0) * std::log(100.0)));
    CHECK(covering_bound(2, 2, 1, 10, 0.1) == doctest::Approx(51.07).epsilon(1e-3));
    CHECK(covering_bound(1, 1, 1, 10, 0.1) == doctest::Approx(std::log(2.0) * std::log(100.0)));
    CHECK_THROWS_AS(covering_bound(1, 1, 1, 10, 10), DomainError);
    CHECK_THROWS_AS(covering_bound(0, 1, 1, 10, 0.1), DomainError);
}

TEST_CASE("covering bound is monotone") {
    const double base = covering_bound(3, 2, 2, 50, 0.5);
    CHECK(covering_bound(4, 2, 2, 50, 0.5) >= base);
    CHECK(covering_bound(3, 3, 2, 50, 0.5) >= base);
    CHECK(covering_bound(3, 2, 3, 50, 0.5) >= base);
    CHECK(covering_bound(3, 2, 2, 60, 0.5) >= base);
    CHECK(covering_bound(3, 2, 2, 50, 0.4) >= base);
}

TEST_CASE("schedule exponents") {
    ScheduleParams p{0.1, 1.0, 1, 2, MixingCase::exp_mixing, 1.0};
    CHECK(rate_exponent(p) == doctest::Approx(-0.5));
    CHECK(alpha_upper(p) == doctest::Approx(0.25));
    p.kind = MixingCase::iid;
    CHECK(rate_exponent(p) == doctest::Approx(-0.5));

    ScheduleParams q{0.1, 2.0, 2, 3, MixingCase::exp_mixing, 1.0};
    CHECK(rate_exponent(q) == doctest::Approx(-4.0 / 10.0));
    q.kind = MixingCase::alg_mixing;
    q.r = 2.0;
    CHECK(rate_exponent(q) == doctest::Approx(-8.0 / (18.0 + 16.0)));
    q.r = 1e6;
    ScheduleParams e = q;
    e.kind = MixingCase::exp_mixing;
    CHECK(std::abs(rate_exponent(q) - rate_exponent(e)) <= 1e-5);
    CHECK(std::abs(alpha_upper(q) - alpha_upper(e)) <= 1e-5);
}

TEST_CASE("schedule sizes") {
    ScheduleParams p{0.1, 1.0, 1, 2, MixingCase::exp_mixing, 1.0};
    const double n = 1000;
    const auto s = theory_schedule(n, p);
    CHECK(s.W == static_cast<Eigen::Index>(std::ceil(std::pow(n, 0.1) * std::log(n))));
    CHECK(s.L == static_cast<Eigen::Index>(std::ceil(std::pow(n, 0.15) * std::log(n))));
    CHECK(s.rate_exponent == doctest::Approx(-0.5));

    p.alpha = alpha_upper(p);
    CHECK(theory_schedule(n, p).L == static_cast<Eigen::Index>(std::ceil(std::log(n))));

    p.alpha = 0.3;
    CHECK_THROWS_AS(theory_schedule(n, p), DomainError);
    p.alpha = -0.01;
    CHECK_THROWS_AS(theory_schedule(n, p), DomainError);
    CHECK(mixing_case_from_string("alg_mixing") == MixingCase::alg_mixing);
    CHECK_THROWS_AS(mixing_case_from_string("poly"), FormatError);
}
