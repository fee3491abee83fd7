#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ucsat/cnf.hpp"
#include "ucsat/rational.hpp"

namespace ucsat {

// Unsigned fixed point: n integer bits, m fractional bits, values in
// [0, 2^n - 2^-m] on the 2^-m grid.
struct FixedPointFormat {
	int int_bits = 0;
	int frac_bits = 0;
	int width() const { return int_bits + frac_bits; }
	friend bool operator==(const FixedPointFormat &, const FixedPointFormat &) = default;
};

// bits[0] is the most significant: bit i carries weight 2^(n-1-i).
struct BitVec {
	FixedPointFormat fmt;
	std::vector<Lit> bits;
};

enum class RoundMode { Nearest, Up, Down };
enum class CmpOp { Gt, Ge, Lt, Le };

inline Rational format_max(FixedPointFormat fmt) {
	return Rational(pow2(fmt.int_bits + fmt.frac_bits) - 1, pow2(fmt.frac_bits));
}

// Nearest rounds ties up. Throws when the rounded value leaves the format.
inline Rational round_to_grid(const Rational &v, FixedPointFormat fmt,
                              RoundMode mode = RoundMode::Nearest) {
	if (v < 0)
		throw EncodeError("negative value not representable: " + to_decimal_string(v));
	const Rational scaled = v * Rational(pow2(fmt.frac_bits));
	BigInt g;
	switch (mode) {
	case RoundMode::Nearest:
		g = floor_rat(scaled + Rational(1, 2));
		break;
	case RoundMode::Up:
		g = ceil_rat(scaled);
		break;
	case RoundMode::Down:
		g = floor_rat(scaled);
		break;
	}
	Rational r(g, pow2(fmt.frac_bits));
	if (r > format_max(fmt))
		throw EncodeError("value " + to_decimal_string(v) + " exceeds format (" +
		                  std::to_string(fmt.int_bits) + "," +
		                  std::to_string(fmt.frac_bits) + ")");
	return r;
}

inline int int_bits_needed(const Rational &v) {
	BigInt f = floor_rat(v);
	int n = 0;
	while (pow2(n) <= f)
		++n;
	return n;
}

// Smallest format holding v at m fractional bits (width at least 1).
inline FixedPointFormat fmt_for(const Rational &v, int frac_bits) {
	FixedPointFormat fmt{int_bits_needed(v), frac_bits};
	if (fmt.width() == 0)
		fmt.int_bits = 1;
	return fmt;
}

inline BitVec fresh_bitvec(CnfBuilder &b, FixedPointFormat fmt) {
	BitVec v{fmt, {}};
	v.bits.reserve(fmt.width());
	for (int i = 0; i < fmt.width(); ++i)
		v.bits.push_back(b.fresh_var());
	return v;
}

// The value must already sit on the grid; round first if it might not.
inline BitVec const_bitvec(CnfBuilder &b, const Rational &v, FixedPointFormat fmt) {
	if (v < 0)
		throw EncodeError("negative value not representable: " + to_decimal_string(v));
	const Rational scaled = v * Rational(pow2(fmt.frac_bits));
	if (boost::multiprecision::denominator(scaled) != 1)
		throw EncodeError("value " + to_decimal_string(v) + " not on the 2^-" +
		                  std::to_string(fmt.frac_bits) + " grid");
	const BigInt i = boost::multiprecision::numerator(scaled);
	if (i >= pow2(fmt.width()))
		throw EncodeError("value " + to_decimal_string(v) + " exceeds format (" +
		                  std::to_string(fmt.int_bits) + "," +
		                  std::to_string(fmt.frac_bits) + ")");
	BitVec out{fmt, {}};
	out.bits.reserve(fmt.width());
	for (int k = fmt.width() - 1; k >= 0; --k)
		out.bits.push_back(boost::multiprecision::bit_test(i, static_cast<unsigned>(k))
		                       ? b.true_lit()
		                       : b.false_lit());
	return out;
}

// model[var] is the assigned truth value, 1-based by variable index.
inline Rational decode_bitvec(const BitVec &v, const std::vector<uint8_t> &model) {
	BigInt acc = 0;
	for (Lit l : v.bits) {
		const bool bit = model.at(l.var()) ? l.positive() : !l.positive();
		acc <<= 1;
		if (bit)
			acc |= 1;
	}
	return Rational(acc, pow2(v.fmt.frac_bits));
}

inline BitVec pad_to(CnfBuilder &b, const BitVec &v, FixedPointFormat fmt) {
	if (fmt.int_bits < v.fmt.int_bits || fmt.frac_bits < v.fmt.frac_bits)
		throw std::invalid_argument("pad_to cannot narrow a bit vector");
	BitVec out{fmt, {}};
	out.bits.reserve(fmt.width());
	for (int k = 0; k < fmt.int_bits - v.fmt.int_bits; ++k)
		out.bits.push_back(b.false_lit());
	out.bits.insert(out.bits.end(), v.bits.begin(), v.bits.end());
	for (int k = 0; k < fmt.frac_bits - v.fmt.frac_bits; ++k)
		out.bits.push_back(b.false_lit());
	return out;
}

inline void align(CnfBuilder &b, BitVec &x, BitVec &y) {
	const FixedPointFormat common{std::max(x.fmt.int_bits, y.fmt.int_bits),
	                              std::max(x.fmt.frac_bits, y.fmt.frac_bits)};
	x = pad_to(b, x, common);
	y = pad_to(b, y, common);
}

// Folding gate library for the arithmetic circuits: constants and
// repeated literals never cost a fresh variable.
inline Lit g_and(CnfBuilder &b, Lit x, Lit y) {
	if (b.is_false_lit(x) || b.is_false_lit(y))
		return b.false_lit();
	if (b.is_true_lit(x))
		return y;
	if (b.is_true_lit(y))
		return x;
	if (x == y)
		return x;
	if (x == ~y)
		return b.false_lit();
	const Lit r = b.fresh_var();
	b.add_clause({~r, x});
	b.add_clause({~r, y});
	b.add_clause({r, ~x, ~y});
	return r;
}

inline Lit g_or(CnfBuilder &b, Lit x, Lit y) {
	return ~g_and(b, ~x, ~y);
}

inline Lit g_xor(CnfBuilder &b, Lit x, Lit y) {
	if (b.is_false_lit(x))
		return y;
	if (b.is_false_lit(y))
		return x;
	if (b.is_true_lit(x))
		return ~y;
	if (b.is_true_lit(y))
		return ~x;
	if (x == y)
		return b.false_lit();
	if (x == ~y)
		return b.true_lit();
	const Lit r = b.fresh_var();
	b.add_clause({~r, x, y});
	b.add_clause({~r, ~x, ~y});
	b.add_clause({r, ~x, y});
	b.add_clause({r, x, ~y});
	return r;
}

inline Lit g_xor3(CnfBuilder &b, Lit x, Lit y, Lit z) {
	if (b.is_true_lit(x))
		return ~g_xor(b, y, z);
	if (b.is_false_lit(x))
		return g_xor(b, y, z);
	if (b.is_true_lit(y))
		return ~g_xor(b, x, z);
	if (b.is_false_lit(y))
		return g_xor(b, x, z);
	if (b.is_true_lit(z))
		return ~g_xor(b, x, y);
	if (b.is_false_lit(z))
		return g_xor(b, x, y);
	if (x == y)
		return z;
	if (x == ~y)
		return ~z;
	if (x == z)
		return y;
	if (x == ~z)
		return ~y;
	if (y == z)
		return x;
	if (y == ~z)
		return ~x;
	const Lit r = b.fresh_var();
	b.add_clause({x, y, z, ~r});
	b.add_clause({x, ~y, ~z, ~r});
	b.add_clause({~x, y, ~z, ~r});
	b.add_clause({~x, ~y, z, ~r});
	b.add_clause({~x, ~y, ~z, r});
	b.add_clause({~x, y, z, r});
	b.add_clause({x, ~y, z, r});
	b.add_clause({x, y, ~z, r});
	return r;
}

inline Lit g_maj(CnfBuilder &b, Lit x, Lit y, Lit z) {
	if (b.is_true_lit(x))
		return g_or(b, y, z);
	if (b.is_false_lit(x))
		return g_and(b, y, z);
	if (b.is_true_lit(y))
		return g_or(b, x, z);
	if (b.is_false_lit(y))
		return g_and(b, x, z);
	if (b.is_true_lit(z))
		return g_or(b, x, y);
	if (b.is_false_lit(z))
		return g_and(b, x, y);
	if (x == y)
		return x;
	if (x == ~y)
		return z;
	if (x == z)
		return x;
	if (x == ~z)
		return y;
	if (y == z)
		return y;
	if (y == ~z)
		return x;
	const Lit r = b.fresh_var();
	b.add_clause({~r, x, y});
	b.add_clause({~r, x, z});
	b.add_clause({~r, y, z});
	b.add_clause({r, ~x, ~y});
	b.add_clause({r, ~x, ~z});
	b.add_clause({r, ~y, ~z});
	return r;
}

namespace detail {

// Internal little-endian view used by the ripple circuits.
inline std::vector<Lit> lsb_first(const BitVec &v) {
	return {v.bits.rbegin(), v.bits.rend()};
}

inline BitVec from_lsb(std::vector<Lit> lsb, FixedPointFormat fmt) {
	BitVec out{fmt, {lsb.rbegin(), lsb.rend()}};
	return out;
}

} // namespace detail

// Ripple-carry sum; result grows one integer bit so it never overflows.
inline BitVec encode_add(CnfBuilder &b, const BitVec &x, const BitVec &y) {
	if (!(x.fmt == y.fmt))
		throw std::invalid_argument("encode_add: operand formats differ");
	const auto xs = detail::lsb_first(x);
	const auto ys = detail::lsb_first(y);
	std::vector<Lit> out;
	out.reserve(xs.size() + 1);
	Lit carry = b.false_lit();
	for (std::size_t i = 0; i < xs.size(); ++i) {
		out.push_back(g_xor3(b, xs[i], ys[i], carry));
		carry = g_maj(b, xs[i], ys[i], carry);
	}
	out.push_back(carry);
	return detail::from_lsb(std::move(out),
	                        {x.fmt.int_bits + 1, x.fmt.frac_bits});
}

// Borrow subtractor; the final borrow is pinned false, so the emitted
// clauses are satisfiable only when x >= y and the result is x - y.
inline BitVec encode_sub(CnfBuilder &b, const BitVec &x, const BitVec &y) {
	if (!(x.fmt == y.fmt))
		throw std::invalid_argument("encode_sub: operand formats differ");
	const auto xs = detail::lsb_first(x);
	const auto ys = detail::lsb_first(y);
	std::vector<Lit> out;
	out.reserve(xs.size());
	Lit borrow = b.false_lit();
	for (std::size_t i = 0; i < xs.size(); ++i) {
		out.push_back(g_xor3(b, xs[i], ys[i], borrow));
		borrow = g_maj(b, ~xs[i], ys[i], borrow);
	}
	b.add_clause({~borrow});
	return detail::from_lsb(std::move(out), x.fmt);
}

// Shift-and-add schoolbook multiplier, multiplier = y. The running high
// part H always holds exactly width(x) bits, so the product comes out at
// exactly width(x) + width(y) bits with no overflow spill. Constant bits
// of either operand melt away inside the gates.
inline BitVec encode_mul(CnfBuilder &b, const BitVec &x, const BitVec &y) {
	const auto xs = detail::lsb_first(x);
	const auto ys = detail::lsb_first(y);
	const std::size_t wx = xs.size(), wy = ys.size();
	std::vector<Lit> out;
	out.reserve(wx + wy);
	std::vector<Lit> high(wx, b.false_lit());
	for (std::size_t j = 0; j < wy; ++j) {
		Lit carry = b.false_lit();
		for (std::size_t i = 0; i < wx; ++i) {
			const Lit row = g_and(b, xs[i], ys[j]);
			const Lit sum = g_xor3(b, high[i], row, carry);
			carry = g_maj(b, high[i], row, carry);
			high[i] = sum;
		}
		out.push_back(high[0]);
		for (std::size_t i = 0; i + 1 < wx; ++i)
			high[i] = high[i + 1];
		high[wx - 1] = carry;
	}
	out.insert(out.end(), high.begin(), high.end());
	return detail::from_lsb(std::move(out),
	                        {x.fmt.int_bits + y.fmt.int_bits,
	                         x.fmt.frac_bits + y.fmt.frac_bits});
}

// x * x; the gate library folds the a AND a partial products, so this
// needs no special casing beyond reusing the operand.
inline BitVec encode_square(CnfBuilder &b, const BitVec &x) {
	return encode_mul(b, x, x);
}

inline BitVec encode_div(CnfBuilder &, const BitVec &, const BitVec &) {
	throw Error("unsupported operation: division");
}

// Bitwise equality after aligning both operands. Constant bits are plain
// forced literals here; contradictory constants make the CNF unsat
// through the pinned constant variable, no special handling.
inline void encode_eq(CnfBuilder &b, BitVec x, BitVec y,
                      std::span<const Lit> guards = {}) {
	align(b, x, y);
	std::vector<Lit> cl;
	for (int i = 0; i < x.fmt.width(); ++i) {
		cl.assign(guards.begin(), guards.end());
		cl.push_back(~x.bits[i]);
		cl.push_back(y.bits[i]);
		b.add_clause(cl);
		cl.assign(guards.begin(), guards.end());
		cl.push_back(x.bits[i]);
		cl.push_back(~y.bits[i]);
		b.add_clause(cl);
	}
}

namespace detail {

// Gate makers for the textbook comparator: always a fresh output
// variable, never folded, with the guard literals widening every clause.
inline Lit t_and(CnfBuilder &b, Lit x, Lit y, std::span<const Lit> g) {
	const Lit u = b.fresh_var();
	std::vector<Lit> cl(g.begin(), g.end());
	auto emit = [&](std::initializer_list<Lit> lits) {
		cl.resize(g.size());
		cl.insert(cl.end(), lits.begin(), lits.end());
		b.add_clause(cl);
	};
	emit({~u, x});
	emit({~u, y});
	emit({u, ~x, ~y});
	return u;
}

inline Lit t_or(CnfBuilder &b, Lit x, Lit y, std::span<const Lit> g) {
	const Lit u = b.fresh_var();
	std::vector<Lit> cl(g.begin(), g.end());
	auto emit = [&](std::initializer_list<Lit> lits) {
		cl.resize(g.size());
		cl.insert(cl.end(), lits.begin(), lits.end());
		b.add_clause(cl);
	};
	emit({~u, x, y});
	emit({u, ~x});
	emit({u, ~y});
	return u;
}

inline Lit t_eq(CnfBuilder &b, Lit x, Lit y, std::span<const Lit> g) {
	const Lit u = b.fresh_var();
	std::vector<Lit> cl(g.begin(), g.end());
	auto emit = [&](std::initializer_list<Lit> lits) {
		cl.resize(g.size());
		cl.insert(cl.end(), lits.begin(), lits.end());
		b.add_clause(cl);
	};
	emit({~u, ~x, y});
	emit({~u, x, ~y});
	emit({u, x, y});
	emit({u, ~x, ~y});
	return u;
}

// Gate tree for "x > y": difference terms guarded by equality prefixes,
// joined by a right-nested or chain. Returns the top gate literal.
inline Lit gt_gate_tree(CnfBuilder &b, const BitVec &x, const BitVec &y,
                        std::span<const Lit> g) {
	const int w = x.fmt.width();
	std::vector<Lit> d;
	d.reserve(w);
	d.push_back(t_and(b, x.bits[0], ~y.bits[0], g));
	Lit prefix(0);
	for (int i = 1; i < w; ++i) {
		const Lit eq_prev = t_eq(b, x.bits[i - 1], y.bits[i - 1], g);
		prefix = (i == 1) ? eq_prev : t_and(b, prefix, eq_prev, g);
		const Lit dif = t_and(b, x.bits[i], ~y.bits[i], g);
		d.push_back(t_and(b, prefix, dif, g));
	}
	Lit top = d[w - 1];
	for (int i = w - 2; i >= 0; --i)
		top = t_or(b, d[i], top, g);
	return top;
}

} // namespace detail

// Comparison via Tseitin transformation of the comparison formula. The
// non-strict forms go through the complement: x >= y is not(y > x).
inline void encode_cmp_tseitin(CnfBuilder &b, BitVec x, BitVec y, CmpOp op,
                               std::span<const Lit> guards = {}) {
	if (op == CmpOp::Lt || op == CmpOp::Le) {
		encode_cmp_tseitin(b, std::move(y), std::move(x),
		                   op == CmpOp::Lt ? CmpOp::Gt : CmpOp::Ge, guards);
		return;
	}
	align(b, x, y);
	std::vector<Lit> cl(guards.begin(), guards.end());
	if (op == CmpOp::Gt) {
		cl.push_back(detail::gt_gate_tree(b, x, y, guards));
	} else {
		cl.push_back(~detail::gt_gate_tree(b, y, x, guards));
	}
	b.add_clause(cl);
}

// Specialized comparator: per position i, T_i means "decided greater at
// i", E_i means "still equal through i". A strict difference at some
// position satisfies everything below it by unit propagation alone.
inline void encode_cmp_binary(CnfBuilder &b, BitVec x, BitVec y, CmpOp op,
                              std::span<const Lit> guards = {}) {
	if (op == CmpOp::Lt || op == CmpOp::Le) {
		encode_cmp_binary(b, std::move(y), std::move(x),
		                  op == CmpOp::Lt ? CmpOp::Gt : CmpOp::Ge, guards);
		return;
	}
	align(b, x, y);
	const int w = x.fmt.width();
	std::vector<Lit> t(w), e(w);
	for (int i = 0; i < w; ++i) {
		t[i] = b.fresh_var();
		e[i] = b.fresh_var();
	}
	std::vector<Lit> cl;
	auto emit = [&](std::initializer_list<Lit> lits) {
		cl.assign(guards.begin(), guards.end());
		cl.insert(cl.end(), lits.begin(), lits.end());
		b.add_clause(cl);
	};
	{
		const Lit xi = x.bits[0], yi = y.bits[0];
		emit({~xi, yi, t[0]});
		emit({~xi, ~yi, e[0]});
		emit({xi, yi, e[0]});
		emit({xi, ~yi, ~e[0]});
		emit({xi, ~yi, ~t[0]});
		emit({~t[0], ~e[0]});
	}
	for (int i = 1; i < w; ++i) {
		const Lit xi = x.bits[i], yi = y.bits[i];
		const Lit ep = e[i - 1];
		emit({ep, ~e[i]});
		emit({ep, ~t[i]});
		emit({~ep, ~xi, yi, t[i]});
		emit({~ep, ~xi, ~yi, e[i]});
		emit({~ep, xi, yi, e[i]});
		emit({~ep, xi, ~yi, ~e[i]});
		emit({~ep, xi, ~yi, ~t[i]});
		emit({~ep, ~t[i], ~e[i]});
	}
	cl.assign(guards.begin(), guards.end());
	cl.insert(cl.end(), t.begin(), t.end());
	if (op == CmpOp::Ge)
		cl.push_back(e[w - 1]);
	b.add_clause(cl);
}

inline void encode_cmp(CnfBuilder &b, BitVec x, BitVec y, CmpOp op, bool tseitin,
                       std::span<const Lit> guards = {}) {
	if (tseitin)
		encode_cmp_tseitin(b, std::move(x), std::move(y), op, guards);
	else
		encode_cmp_binary(b, std::move(x), std::move(y), op, guards);
}

// Balanced pairwise summation; every addition is exact, so the result
// width grows only logarithmically with the term count.
inline BitVec sum_tree(CnfBuilder &b, std::vector<BitVec> terms) {
	if (terms.empty())
		return const_bitvec(b, Rational(0), {1, 0});
	while (terms.size() > 1) {
		std::vector<BitVec> next;
		next.reserve(terms.size() / 2 + 1);
		for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
			BitVec x = terms[i], y = terms[i + 1];
			align(b, x, y);
			next.push_back(encode_add(b, x, y));
		}
		if (terms.size() % 2 == 1)
			next.push_back(terms.back());
		terms = std::move(next);
	}
	return terms[0];
}

// Constant gated by a switch literal: value when s holds, zero when not.
// Shared form reuses s itself for the one-bits; materialized form spends
// an aux variable per bit (the generic capacity path wants real vectors).
inline BitVec mux_const(CnfBuilder &b, Lit s, const Rational &v,
                        FixedPointFormat fmt, bool materialize = false) {
	const Rational scaled = v * Rational(pow2(fmt.frac_bits));
	if (v < 0 || boost::multiprecision::denominator(scaled) != 1)
		throw EncodeError("value " + to_decimal_string(v) + " not on the 2^-" +
		                  std::to_string(fmt.frac_bits) + " grid");
	const BigInt i = boost::multiprecision::numerator(scaled);
	if (i >= pow2(fmt.width()))
		throw EncodeError("value " + to_decimal_string(v) + " exceeds format (" +
		                  std::to_string(fmt.int_bits) + "," +
		                  std::to_string(fmt.frac_bits) + ")");
	BitVec out{fmt, {}};
	out.bits.reserve(fmt.width());
	for (int k = fmt.width() - 1; k >= 0; --k) {
		const bool one = boost::multiprecision::bit_test(i, static_cast<unsigned>(k));
		if (!materialize) {
			out.bits.push_back(one ? s : b.false_lit());
		} else {
			const Lit aux = b.fresh_var();
			if (one) {
				b.add_clause({~aux, s});
				b.add_clause({aux, ~s});
			} else {
				b.add_clause({~aux});
			}
			out.bits.push_back(aux);
		}
	}
	return out;
}

} // namespace ucsat
