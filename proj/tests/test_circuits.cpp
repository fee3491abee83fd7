#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <vector>

#include "ucsat/circuits.hpp"
#include "ucsat/sat/propagate.hpp"
#include "ucsat/sat/solver.hpp"

using namespace ucsat;

namespace {

BitVec pinned(CnfBuilder &b, unsigned long long val, FixedPointFormat fmt) {
	BitVec v = fresh_bitvec(b, fmt);
	const int w = fmt.width();
	for (int i = 0; i < w; ++i) {
		const bool bit = (val >> (w - 1 - i)) & 1ull;
		b.add_clause({bit ? v.bits[i] : ~v.bits[i]});
	}
	return v;
}

std::optional<std::vector<uint8_t>> solve_model(const CnfBuilder &b) {
	CdclSolver s;
	s.ensure_vars(b.var_count());
	for (std::size_t k = 0; k < b.clause_count(); ++k)
		s.add_clause(b.clause(k));
	if (s.solve() != SatResult::Sat)
		return std::nullopt;
	std::vector<uint8_t> a(static_cast<std::size_t>(s.var_count()) + 1, 0);
	for (int v = 1; v <= s.var_count(); ++v)
		a[v] = s.model_value(v) ? 1 : 0;
	return a;
}

Rational scaled(unsigned long long raw, FixedPointFormat fmt) {
	return Rational(BigInt(raw), pow2(fmt.frac_bits));
}

} // namespace

TEST_CASE("grid rounding modes", "[circuits]") {
	const FixedPointFormat f{8, 1};
	CHECK(round_to_grid(Rational(23, 10), f) == Rational(5, 2));
	CHECK(round_to_grid(Rational(11, 5), f) == Rational(2));
	CHECK(round_to_grid(Rational(9, 4), f) == Rational(5, 2)); // tie goes up
	CHECK(round_to_grid(Rational(9, 4), f, RoundMode::Down) == Rational(2));
	CHECK(round_to_grid(Rational(9, 4), f, RoundMode::Up) == Rational(5, 2));
	CHECK(round_to_grid(Rational(3), f) == Rational(3));
	CHECK(round_to_grid(Rational(3), f, RoundMode::Up) == Rational(3));
	CHECK(round_to_grid(Rational(3), f, RoundMode::Down) == Rational(3));
	CHECK_THROWS_AS(round_to_grid(Rational(-1, 2), f), EncodeError);
	const FixedPointFormat tiny{2, 0};
	CHECK(round_to_grid(Rational(16, 5), tiny, RoundMode::Down) == Rational(3));
	CHECK_THROWS_AS(round_to_grid(Rational(18, 5), tiny), EncodeError);
}

TEST_CASE("formats fit their values", "[circuits]") {
	CHECK(format_max({3, 0}) == Rational(7));
	CHECK(format_max({2, 2}) == Rational(15, 4));
	const FixedPointFormat f5 = fmt_for(Rational(5), 0);
	CHECK(f5.frac_bits == 0);
	CHECK(format_max(f5) >= 5);
	CHECK(f5.int_bits == 3);
	const FixedPointFormat fh = fmt_for(Rational(15, 2), 1);
	CHECK(fh.int_bits == 3);
	CHECK(fh.frac_bits == 1);
	const FixedPointFormat f0 = fmt_for(Rational(0), 0);
	CHECK(f0.width() >= 1);
}

TEST_CASE("constants store and decode every representable value", "[circuits]") {
	for (const FixedPointFormat fmt : {FixedPointFormat{3, 0}, FixedPointFormat{2, 2}}) {
		for (unsigned long long k = 0; k < (1ull << fmt.width()); ++k) {
			CnfBuilder b;
			const BitVec v = const_bitvec(b, scaled(k, fmt), fmt);
			const auto m = solve_model(b);
			REQUIRE(m);
			CHECK(decode_bitvec(v, *m) == scaled(k, fmt));
		}
	}
	CnfBuilder b;
	CHECK_THROWS_AS(const_bitvec(b, Rational(1, 4), {3, 1}), EncodeError);
	CHECK_THROWS_AS(const_bitvec(b, Rational(-1), {3, 1}), EncodeError);
	CHECK_THROWS_AS(const_bitvec(b, Rational(9), {3, 0}), EncodeError);
}

TEST_CASE("addition is exact on all inputs", "[circuits]") {
	for (const FixedPointFormat fmt : {FixedPointFormat{3, 0}, FixedPointFormat{2, 2}}) {
		const unsigned long long n = 1ull << fmt.width();
		for (unsigned long long a = 0; a < n; ++a)
			for (unsigned long long c = 0; c < n; ++c) {
				CnfBuilder b;
				const BitVec x = pinned(b, a, fmt);
				const BitVec y = pinned(b, c, fmt);
				const BitVec sum = encode_add(b, x, y);
				CHECK(sum.fmt.int_bits == fmt.int_bits + 1);
				CHECK(sum.fmt.frac_bits == fmt.frac_bits);
				const auto m = solve_model(b);
				REQUIRE(m);
				CHECK(decode_bitvec(sum, *m) == scaled(a + c, fmt));
			}
	}
}

TEST_CASE("constant addition folds without fresh variables", "[circuits]") {
	const FixedPointFormat fmt{5, 0};
	CnfBuilder b;
	const BitVec x = const_bitvec(b, Rational(19), fmt);
	const BitVec y = const_bitvec(b, Rational(24), fmt);
	const int before = b.var_count();
	const BitVec sum = encode_add(b, x, y);
	CHECK(b.var_count() == before);
	const auto m = solve_model(b);
	REQUIRE(m);
	CHECK(decode_bitvec(sum, *m) == Rational(43));
}

TEST_CASE("mixed operand formats are rejected", "[circuits]") {
	CnfBuilder b;
	const BitVec x = fresh_bitvec(b, {3, 0});
	const BitVec y = fresh_bitvec(b, {2, 1});
	CHECK_THROWS_AS(encode_add(b, x, y), std::invalid_argument);
	CHECK_THROWS_AS(encode_sub(b, x, y), std::invalid_argument);
}

TEST_CASE("subtraction is exact and forbids negative results", "[circuits]") {
	const FixedPointFormat fmt{3, 1};
	const unsigned long long n = 1ull << fmt.width();
	for (unsigned long long a = 0; a < n; ++a)
		for (unsigned long long c = 0; c < n; ++c) {
			CnfBuilder b;
			const BitVec x = pinned(b, a, fmt);
			const BitVec y = pinned(b, c, fmt);
			const BitVec diff = encode_sub(b, x, y);
			const auto m = solve_model(b);
			if (a >= c) {
				REQUIRE(m);
				CHECK(decode_bitvec(diff, *m) == scaled(a - c, fmt));
			} else {
				CHECK(!m);
			}
		}
}

TEST_CASE("multiplication is exact with exact result width", "[circuits]") {
	const std::pair<FixedPointFormat, FixedPointFormat> cases[] = {
	    {{2, 0}, {2, 0}},
	    {{3, 0}, {2, 0}},
	    {{2, 1}, {1, 2}},
	    {{2, 2}, {2, 2}},
	};
	for (const auto &[fx, fy] : cases) {
		for (unsigned long long a = 0; a < (1ull << fx.width()); ++a)
			for (unsigned long long c = 0; c < (1ull << fy.width()); ++c) {
				CnfBuilder b;
				const BitVec x = pinned(b, a, fx);
				const BitVec y = pinned(b, c, fy);
				const BitVec prod = encode_mul(b, x, y);
				CHECK(prod.fmt.int_bits == fx.int_bits + fy.int_bits);
				CHECK(prod.fmt.frac_bits == fx.frac_bits + fy.frac_bits);
				const auto m = solve_model(b);
				REQUIRE(m);
				CHECK(decode_bitvec(prod, *m) == scaled(a, fx) * scaled(c, fy));
			}
	}
}

TEST_CASE("squaring is exact", "[circuits]") {
	for (const FixedPointFormat fmt : {FixedPointFormat{3, 0}, FixedPointFormat{2, 1}}) {
		for (unsigned long long a = 0; a < (1ull << fmt.width()); ++a) {
			CnfBuilder b;
			const BitVec x = pinned(b, a, fmt);
			const BitVec sq = encode_square(b, x);
			const auto m = solve_model(b);
			REQUIRE(m);
			CHECK(decode_bitvec(sq, *m) == scaled(a, fmt) * scaled(a, fmt));
		}
	}
}

TEST_CASE("division is not part of the circuit library", "[circuits]") {
	CnfBuilder b;
	const BitVec x = fresh_bitvec(b, {3, 0});
	const BitVec y = fresh_bitvec(b, {3, 0});
	CHECK_THROWS_AS(encode_div(b, x, y), Error);
}

TEST_CASE("equality constraint pins the free side", "[circuits]") {
	const FixedPointFormat fmt{3, 0};
	for (unsigned long long a = 0; a < 8; ++a) {
		CnfBuilder b;
		const BitVec x = pinned(b, a, fmt);
		const BitVec y = fresh_bitvec(b, fmt);
		encode_eq(b, x, y);
		const auto m = solve_model(b);
		REQUIRE(m);
		CHECK(decode_bitvec(y, *m) == scaled(a, fmt));
	}
}

TEST_CASE("a true guard relaxes equality", "[circuits]") {
	const FixedPointFormat fmt{3, 0};
	{
		CnfBuilder b;
		const Lit g = b.fresh_var();
		const BitVec x = pinned(b, 3, fmt);
		const BitVec y = pinned(b, 5, fmt);
		const Lit guards[] = {g};
		encode_eq(b, x, y, guards);
		b.add_clause({g});
		CHECK(solve_model(b).has_value());
	}
	{
		CnfBuilder b;
		const Lit g = b.fresh_var();
		const BitVec x = pinned(b, 3, fmt);
		const BitVec y = pinned(b, 5, fmt);
		const Lit guards[] = {g};
		encode_eq(b, x, y, guards);
		b.add_clause({~g});
		CHECK(!solve_model(b).has_value());
	}
}

TEST_CASE("comparisons agree with arithmetic on all inputs", "[circuits]") {
	for (int w = 1; w <= 4; ++w) {
		const FixedPointFormat fmt{w, 0};
		const unsigned long long n = 1ull << w;
		for (bool tseitin : {false, true}) {
			for (const CmpOp op : {CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le}) {
				for (unsigned long long a = 0; a < n; ++a)
					for (unsigned long long c = 0; c < n; ++c) {
						CnfBuilder b;
						const BitVec x = pinned(b, a, fmt);
						const BitVec y = pinned(b, c, fmt);
						encode_cmp(b, x, y, op, tseitin);
						bool expect = false;
						switch (op) {
						case CmpOp::Gt: expect = a > c; break;
						case CmpOp::Ge: expect = a >= c; break;
						case CmpOp::Lt: expect = a < c; break;
						case CmpOp::Le: expect = a <= c; break;
						}
						CAPTURE(w, tseitin, int(op), a, c);
						CHECK(solve_model(b).has_value() == expect);
					}
			}
		}
	}
}

TEST_CASE("comparisons align mixed formats", "[circuits]") {
	const FixedPointFormat fx{3, 0}, fy{2, 2};
	for (bool tseitin : {false, true})
		for (unsigned long long a = 0; a < 8; ++a)
			for (unsigned long long c = 0; c < 16; ++c) {
				CnfBuilder b;
				const BitVec x = pinned(b, a, fx);
				const BitVec y = pinned(b, c, fy);
				encode_cmp(b, x, y, CmpOp::Ge, tseitin);
				CHECK(solve_model(b).has_value() == (scaled(a, fx) >= scaled(c, fy)));
			}
}

TEST_CASE("a true guard relaxes comparisons", "[circuits]") {
	const FixedPointFormat fmt{3, 0};
	for (bool tseitin : {false, true}) {
		for (bool guard_true : {true, false}) {
			CnfBuilder b;
			const Lit g = b.fresh_var();
			const BitVec x = pinned(b, 2, fmt); // 2 > 6 is false
			const BitVec y = pinned(b, 6, fmt);
			const Lit guards[] = {g};
			encode_cmp(b, x, y, CmpOp::Gt, tseitin, guards);
			b.add_clause({guard_true ? g : ~g});
			CHECK(solve_model(b).has_value() == guard_true);
		}
	}
}

TEST_CASE("selector chooses between a constant and zero", "[circuits]") {
	const FixedPointFormat fmt{3, 0};
	for (bool materialize : {false, true}) {
		for (bool on : {true, false}) {
			CnfBuilder b;
			const Lit s = b.fresh_var();
			const BitVec v = mux_const(b, s, Rational(5), fmt, materialize);
			b.add_clause({on ? s : ~s});
			const auto m = solve_model(b);
			REQUIRE(m);
			CHECK(decode_bitvec(v, *m) == (on ? Rational(5) : Rational(0)));
		}
	}
}

TEST_CASE("balanced summation adds any number of terms", "[circuits]") {
	const FixedPointFormat fmt{2, 0};
	const std::vector<std::vector<unsigned long long>> cases = {
	    {}, {3}, {1, 2}, {3, 3, 3}, {0, 1, 2, 3, 2}};
	for (const auto &vals : cases) {
		CnfBuilder b;
		std::vector<BitVec> terms;
		unsigned long long want = 0;
		for (unsigned long long v : vals) {
			terms.push_back(pinned(b, v, fmt));
			want += v;
		}
		const BitVec total = sum_tree(b, terms);
		const auto m = solve_model(b);
		REQUIRE(m);
		CHECK(decode_bitvec(total, *m) == Rational(BigInt(want)));
	}
}

TEST_CASE("satisfied comparisons close under propagation alone", "[circuits]") {
	// The ladder encoding settles every clause by unit propagation once
	// both operands are fixed and the claim holds.
	const FixedPointFormat fmt{8, 0};
	const std::pair<unsigned long long, unsigned long long> pairs[] = {
	    {200, 100}, {255, 0}, {129, 128}, {1, 0}, {170, 85}};
	for (const auto &[a, c] : pairs) {
		CnfBuilder b;
		const BitVec x = pinned(b, a, fmt);
		const BitVec y = pinned(b, c, fmt);
		encode_cmp(b, x, y, CmpOp::Gt, false);
		const auto r = propagate_only(b, {});
		CHECK(!r.conflict);
		CHECK(r.all_satisfied());
	}
	{
		CnfBuilder b;
		const BitVec x = pinned(b, 5, fmt);
		const BitVec y = pinned(b, 9, fmt);
		encode_cmp(b, x, y, CmpOp::Gt, false);
		const auto r = propagate_only(b, {});
		CHECK(r.conflict);
	}
}
