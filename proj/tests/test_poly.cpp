#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpinv/polynomial.hpp"
#include "fpinv/ratfunc.hpp"

#include <random>

using namespace fpinv;

TEST_CASE("rational parsing is exact") {
    CHECK(rat_parse("3") == Rat(3));
    CHECK(rat_parse("-7/2") == Rat(-7, 2));
    CHECK(rat_parse("0.1") == Rat(1, 10));
    CHECK(rat_parse("1.5") == Rat(3, 2));
    CHECK(rat_parse("-0.0001") == Rat(-1, 10000));
    CHECK(rat_parse("2.5e-3") == Rat(1, 400));
    CHECK(rat_parse("1e3") == Rat(1000));
}

TEST_CASE("monomial ordering is degree-graded") {
    // over (x=0, i=1), degree 2: 1, x, i, x^2, x*i, i^2
    Monomial one = Monomial::one();
    Monomial x = Monomial::var(0), i = Monomial::var(1);
    Monomial x2 = Monomial::var(0, 2), xi = x * i, i2 = Monomial::var(1, 2);
    CHECK(one < x);
    CHECK(x < i);
    CHECK(i < x2);
    CHECK(x2 < xi);
    CHECK(xi < i2);
}

TEST_CASE("polynomial arithmetic and substitution") {
    Poly x = Poly::variable(0), y = Poly::variable(1);
    Poly p = x * x - y * Rat(2) + Poly(Rat(1));
    CHECK(p.eval({Rat(3), Rat(5)}) == Rat(9 - 10 + 1));
    Poly q = p * p;
    CHECK(q.degree() == 4);

    std::map<int, Poly> sub{{0, y + Poly(Rat(1))}};  // x := y + 1
    Poly r = p.subst(sub);
    // (y+1)^2 - 2y + 1 = y^2 + 2
    CHECK(r == y * y + Poly(Rat(2)));
}

TEST_CASE("derivative matches finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    Poly x = Poly::variable(0), y = Poly::variable(1);
    Poly p = x * x * y - y * y * Rat(3) + x * Rat(7);
    Poly dx = p.derivative(0);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> pt{uni(rng), uni(rng)};
        double h = 1e-6;
        std::vector<double> hi{pt[0] + h, pt[1]}, lo{pt[0] - h, pt[1]};
        double fd = (p.eval_d(hi) - p.eval_d(lo)) / (2 * h);
        CHECK(dx.eval_d(pt) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("interval evaluation is even-power aware") {
    Poly x = Poly::variable(0);
    Poly p = x * x;  // x^2 over [-1,1] stays in [0,1]
    Interval r = p.eval_interval({Interval(-1, 1)});
    CHECK(r.lo >= -1e-12);
    CHECK(r.hi <= 1.0 + 1e-12);
}

TEST_CASE("interval product bound") {
    // x*i over x in [-10,10], i in [-1,1] -> [-10, 10]
    Poly p = Poly::variable(0) * Poly::variable(1);
    Interval r = p.eval_interval({Interval(-10, 10), Interval(-1, 1)});
    CHECK(r.lo == doctest::Approx(-10.0).epsilon(1e-9));
    CHECK(r.hi == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("rational function arithmetic and quotient-rule derivative") {
    RatFunc x = RatFunc::variable(0);
    RatFunc f = x / (x * x + RatFunc::constant(Rat(1)));  // x / (x^2+1)
    RatFunc df = f.derivative(0);
    // derivative = (1 - x^2) / (x^2+1)^2
    std::vector<Rat> pt{Rat(2)};
    CHECK(f.eval(pt) == Rat(2, 5));
    CHECK(df.eval(pt) == Rat(1 - 4, 25));
}

TEST_CASE("abs image applies the triangle inequality") {
    Poly x = Poly::variable(0), y = Poly::variable(1);
    Poly p = x * y * Rat(-3) + x * Rat(2) - Poly(Rat(5));
    std::map<int, int> absmap{{0, 10}, {1, 11}};
    Poly a = p.abs_image(absmap);
    // 3*xa*ya + 2*xa + 5
    CHECK(a.coeff(Monomial::var(10) * Monomial::var(11)) == Rat(3));
    CHECK(a.coeff(Monomial::var(10)) == Rat(2));
    CHECK(a.constant_term() == Rat(5));
}
