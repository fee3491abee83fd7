#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "ucsat/cnf.hpp"
#include "ucsat/sat/propagate.hpp"
#include "ucsat/sat/solver.hpp"

using namespace ucsat;

namespace {

using Formula = std::vector<std::vector<int>>;

bool brute_force_sat(int nvars, const Formula &cls) {
	REQUIRE(nvars <= 20);
	for (uint32_t m = 0; m < (1u << nvars); ++m) {
		bool ok = true;
		for (const auto &c : cls) {
			bool sat = false;
			for (int l : c) {
				const int v = l < 0 ? -l : l;
				const bool val = (m >> (v - 1)) & 1;
				if (val == (l > 0)) {
					sat = true;
					break;
				}
			}
			if (!sat) {
				ok = false;
				break;
			}
		}
		if (ok)
			return true;
	}
	return false;
}

void load(CdclSolver &s, int nvars, const Formula &cls) {
	s.ensure_vars(nvars);
	for (const auto &c : cls) {
		std::vector<Lit> lits;
		for (int l : c)
			lits.push_back(Lit(l));
		s.add_clause(lits);
	}
}

bool model_ok(const CdclSolver &s, const Formula &cls) {
	for (const auto &c : cls) {
		bool sat = false;
		for (int l : c)
			if (s.model_value(l < 0 ? -l : l) == (l > 0)) {
				sat = true;
				break;
			}
		if (!sat)
			return false;
	}
	return true;
}

Formula pigeonhole(int pigeons, int holes) {
	auto var = [&](int p, int h) { return p * holes + h + 1; };
	Formula f;
	for (int p = 0; p < pigeons; ++p) {
		std::vector<int> c;
		for (int h = 0; h < holes; ++h)
			c.push_back(var(p, h));
		f.push_back(c);
	}
	for (int h = 0; h < holes; ++h)
		for (int p = 0; p < pigeons; ++p)
			for (int q = p + 1; q < pigeons; ++q)
				f.push_back({-var(p, h), -var(q, h)});
	return f;
}

} // namespace

TEST_CASE("tiny formulas", "[sat]") {
	{
		CdclSolver s;
		CHECK(s.solve() == SatResult::Sat); // no clauses
	}
	{
		CdclSolver s;
		load(s, 1, {{1}});
		CHECK(s.solve() == SatResult::Sat);
		CHECK(s.model_value(1));
	}
	{
		CdclSolver s;
		load(s, 1, {{1}, {-1}});
		CHECK(s.solve() == SatResult::Unsat);
	}
	{
		CdclSolver s;
		load(s, 2, {{1, 2}, {-1, 2}, {1, -2}, {-1, -2}});
		CHECK(s.solve() == SatResult::Unsat);
	}
}

TEST_CASE("too many pigeons", "[sat]") {
	CdclSolver s;
	load(s, 4 * 3, pigeonhole(4, 3));
	CHECK(s.solve() == SatResult::Unsat);

	CdclSolver ok;
	load(ok, 3 * 3, pigeonhole(3, 3));
	CHECK(ok.solve() == SatResult::Sat);
}

TEST_CASE("random formulas agree with exhaustive search", "[sat]") {
	std::mt19937_64 rng(20240917);
	int sat_seen = 0, unsat_seen = 0;
	for (int round = 0; round < 300; ++round) {
		const int nvars = 3 + static_cast<int>(rng() % 10);
		const int nclauses = static_cast<int>(nvars * 4.3) + static_cast<int>(rng() % 5) - 2;
		Formula f;
		for (int k = 0; k < nclauses; ++k) {
			std::vector<int> c;
			for (int j = 0; j < 3; ++j) {
				int v = 1 + static_cast<int>(rng() % nvars);
				c.push_back((rng() & 1) ? v : -v);
			}
			f.push_back(c);
		}
		const bool expect = brute_force_sat(nvars, f);
		CdclSolver s(round);
		load(s, nvars, f);
		const SatResult got = s.solve();
		REQUIRE(got == (expect ? SatResult::Sat : SatResult::Unsat));
		if (expect) {
			CHECK(model_ok(s, f));
			++sat_seen;
		} else {
			++unsat_seen;
		}
	}
	CHECK(sat_seen > 20);
	CHECK(unsat_seen > 20);
}

TEST_CASE("clauses can be added between solves", "[sat]") {
	CdclSolver s;
	s.ensure_vars(4);
	std::vector<Lit> c{Lit(1), Lit(2), Lit(3), Lit(4)};
	s.add_clause(c);
	int models = 0;
	while (s.solve() == SatResult::Sat) {
		++models;
		REQUIRE(models <= 15);
		std::vector<Lit> block;
		for (int v = 1; v <= 4; ++v)
			block.push_back(s.model_value(v) ? ~Lit(v) : Lit(v));
		s.add_clause(block);
	}
	CHECK(models == 15);
}

TEST_CASE("a hopeless budget reports unknown", "[sat]") {
	CdclSolver s;
	load(s, 10 * 9, pigeonhole(10, 9));
	CHECK(s.solve(0.001) == SatResult::Unknown);
}

TEST_CASE("seeds change the search, not the verdict", "[sat]") {
	const Formula f = pigeonhole(4, 4); // satisfiable
	for (uint64_t seed : {0ull, 1ull, 42ull, 12345ull}) {
		CdclSolver s(seed);
		load(s, 16, f);
		REQUIRE(s.solve() == SatResult::Sat);
		CHECK(model_ok(s, f));
	}
}

TEST_CASE("propagation harness reports satisfied clauses and conflicts", "[sat]") {
	CnfBuilder b;
	const Lit x = b.fresh_var(), y = b.fresh_var(), z = b.fresh_var();
	b.add_clause({~x, y});
	b.add_clause({~y, z});
	{
		const Lit as[] = {x};
		const auto r = propagate_only(b, as);
		CHECK(!r.conflict);
		CHECK(r.all_satisfied());
		CHECK(r.value[x.var()] == 1);
		CHECK(r.value[y.var()] == 1);
		CHECK(r.value[z.var()] == 1);
	}
	{
		const Lit as[] = {x, ~z};
		const auto r = propagate_only(b, as);
		CHECK(r.conflict);
	}
	{
		const auto r = propagate_only(b, {});
		CHECK(!r.conflict);
		CHECK(!r.all_satisfied()); // nothing assigned, both clauses open
	}
}
