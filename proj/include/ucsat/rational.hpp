#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "ucsat/errors.hpp"

namespace ucsat {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt pow2(int e) {
	BigInt r = 1;
	return r << e;
}

// "12", "-3.5", "0.125", ".5", "+7." are fine; exponents and hex are not.
inline Rational parse_decimal(std::string_view s) {
	const std::string whole(s);
	std::size_t i = 0;
	bool neg = false;
	if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
		neg = (s[i] == '-');
		++i;
	}
	BigInt num = 0;
	int frac_digits = 0;
	bool seen_digit = false;
	bool seen_point = false;
	for (; i < s.size(); ++i) {
		const char c = s[i];
		if (c == '.') {
			if (seen_point)
				throw DataError("bad decimal literal: " + whole);
			seen_point = true;
		} else if (std::isdigit(static_cast<unsigned char>(c))) {
			num = num * 10 + (c - '0');
			if (seen_point)
				++frac_digits;
			seen_digit = true;
		} else {
			throw DataError("bad decimal literal: " + whole);
		}
	}
	if (!seen_digit)
		throw DataError("bad decimal literal: " + whole);
	BigInt den = 1;
	for (int k = 0; k < frac_digits; ++k)
		den *= 10;
	Rational r(num, den);
	return neg ? -r : r;
}

// Exact decimal rendering when the denominator is 2^a * 5^b,
// otherwise "num/den". No trailing zeros, no exponent.
inline std::string to_decimal_string(const Rational &r) {
	BigInt num = boost::multiprecision::numerator(r);
	BigInt den = boost::multiprecision::denominator(r);
	std::string sign;
	if (num < 0) {
		sign = "-";
		num = -num;
	}
	int twos = 0, fives = 0;
	BigInt d = den;
	while (d % 2 == 0) {
		d /= 2;
		++twos;
	}
	while (d % 5 == 0) {
		d /= 5;
		++fives;
	}
	if (d != 1)
		return sign + num.str() + "/" + den.str();
	const int digits = twos > fives ? twos : fives;
	for (int k = twos; k < digits; ++k)
		num *= 2;
	for (int k = fives; k < digits; ++k)
		num *= 5;
	std::string s = num.str();
	if (digits == 0)
		return sign + s;
	if (static_cast<int>(s.size()) <= digits)
		s.insert(0, digits + 1 - s.size(), '0');
	s.insert(s.size() - digits, ".");
	while (s.back() == '0')
		s.pop_back();
	if (s.back() == '.')
		s.pop_back();
	return sign + s;
}

// Smallest m with r * 2^m integral, or -1 if no such m exists.
inline int frac_bits_required(const Rational &r) {
	BigInt den = boost::multiprecision::denominator(r);
	int m = 0;
	while (den % 2 == 0) {
		den /= 2;
		++m;
	}
	return den == 1 ? m : -1;
}

inline BigInt floor_div(const BigInt &num, const BigInt &den) {
	BigInt q = num / den; // truncates toward zero
	if ((num % den != 0) && ((num < 0) != (den < 0)))
		--q;
	return q;
}

inline BigInt floor_rat(const Rational &r) {
	return floor_div(boost::multiprecision::numerator(r),
	                 boost::multiprecision::denominator(r));
}

inline BigInt ceil_rat(const Rational &r) {
	return -floor_rat(-r);
}

} // namespace ucsat
