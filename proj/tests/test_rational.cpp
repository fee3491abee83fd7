#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ucsat/rational.hpp"

using namespace ucsat;

TEST_CASE("decimal literals parse exactly", "[rational]") {
	CHECK(parse_decimal("0") == Rational(0));
	CHECK(parse_decimal("12") == Rational(12));
	CHECK(parse_decimal("3.25") == Rational(13, 4));
	CHECK(parse_decimal("0.1") == Rational(1, 10));
	CHECK(parse_decimal("-0.5") == Rational(-1, 2));
	CHECK(parse_decimal("+2.") == Rational(2));
	CHECK(parse_decimal(".5") == Rational(1, 2));
	CHECK(parse_decimal("007.50") == Rational(15, 2));
}

TEST_CASE("malformed decimal literals are rejected", "[rational]") {
	for (const char *bad : {"", ".", "-", "+.", "1e3", "1..2", "abc", "1.2.3", "--1", "1 2"})
		CHECK_THROWS_AS(parse_decimal(bad), DataError);
}

TEST_CASE("decimal printing is exact for terminating fractions", "[rational]") {
	CHECK(to_decimal_string(Rational(0)) == "0");
	CHECK(to_decimal_string(Rational(42)) == "42");
	CHECK(to_decimal_string(Rational(1, 8)) == "0.125");
	CHECK(to_decimal_string(Rational(3, 20)) == "0.15");
	CHECK(to_decimal_string(Rational(-7, 4)) == "-1.75");
	CHECK(to_decimal_string(Rational(1, 3)) == "1/3");
}

TEST_CASE("print then parse is the identity on terminating fractions", "[rational]") {
	std::mt19937_64 rng(7);
	for (int k = 0; k < 500; ++k) {
		const long num = static_cast<long>(rng() % 100000);
		const int two = static_cast<int>(rng() % 8), five = static_cast<int>(rng() % 5);
		BigInt den = pow2(two);
		for (int j = 0; j < five; ++j)
			den *= 5;
		const Rational x = Rational(BigInt(num), den);
		CHECK(parse_decimal(to_decimal_string(x)) == x);
	}
}

TEST_CASE("fractional bit requirement detects the dyadic grid", "[rational]") {
	CHECK(frac_bits_required(Rational(5)) == 0);
	CHECK(frac_bits_required(Rational(0)) == 0);
	CHECK(frac_bits_required(Rational(13, 4)) == 2);
	CHECK(frac_bits_required(Rational(7, 64)) == 6);
	CHECK(frac_bits_required(Rational(1, 3)) == -1);
	CHECK(frac_bits_required(Rational(1, 10)) == -1);
}

TEST_CASE("floor and ceiling on rationals", "[rational]") {
	CHECK(floor_rat(Rational(5, 2)) == 2);
	CHECK(ceil_rat(Rational(5, 2)) == 3);
	CHECK(floor_rat(Rational(-3, 2)) == -2);
	CHECK(ceil_rat(Rational(-3, 2)) == -1);
	CHECK(floor_rat(Rational(4)) == 4);
	CHECK(ceil_rat(Rational(4)) == 4);
}

TEST_CASE("powers of two", "[rational]") {
	CHECK(pow2(0) == 1);
	CHECK(pow2(1) == 2);
	CHECK(pow2(30) == BigInt(1) << 30);
	CHECK(pow2(100) == BigInt(1) << 100);
}
