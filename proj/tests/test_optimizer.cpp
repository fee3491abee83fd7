#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "ucsat/bench.hpp"
#include "ucsat/optimizer.hpp"
#include "ucsat/oracle.hpp"

using namespace ucsat;

namespace {

UcInstance tiny_instance(uint64_t seed, int n, int T, bool ramp) {
	GeneratorConfig cfg;
	cfg.n_units = n;
	cfg.horizon = T;
	cfg.seed = seed;
	cfg.with_ramp = ramp;
	cfg.p_min = {1, 3};
	cfg.p_max_add = {1, 4};
	cfg.a = {0, 9};
	cfg.b = {1, 5};
	cfg.c_cents = {0, 3};
	cfg.c_hot = {1, 9};
	cfg.c_cold_add = {0, 9};
	return generate_instance(cfg);
}

} // namespace

TEST_CASE("optimal objectives match the exhaustive reference", "[optimizer]") {
	for (uint64_t seed = 1; seed <= 6; ++seed) {
		const bool ramp = seed > 3;
		const UcInstance inst = tiny_instance(seed, 2, 3, ramp);
		const OracleResult want = oracle_solve(inst);
		REQUIRE(want.feasible);
		EncodedProblem ep = reduce(inst);
		InternalBackend backend(seed);
		const OptimizationResult got = solve_optimal(ep, backend);
		CAPTURE(seed, ramp);
		REQUIRE(got.status == OptStatus::ProvedOptimal);
		REQUIRE(got.best);
		CHECK(got.best->obj_discrete == want.best.obj_discrete);
		CHECK(validate_solution(inst, *got.best));
		CHECK(got.backend_calls == got.iterations.size() + 1);
	}
}

TEST_CASE("each accepted model strictly improves the objective", "[optimizer]") {
	const UcInstance inst = tiny_instance(11, 3, 4, false);
	EncodedProblem ep = reduce(inst);
	InternalBackend backend(3);
	OptimizeOptions opts;
	std::vector<Schedule> seen;
	opts.on_improvement = [&](const Schedule &s, double) { seen.push_back(s); };
	const OptimizationResult r = solve_optimal(ep, backend, opts);
	REQUIRE(r.status == OptStatus::ProvedOptimal);
	REQUIRE(!r.iterations.empty());
	CHECK(seen.size() == r.iterations.size());
	for (std::size_t k = 0; k < r.iterations.size(); ++k) {
		if (k > 0)
			CHECK(r.iterations[k].objective < r.iterations[k - 1].objective);
		CHECK(validate_solution(inst, seen[k]));
		CHECK(seen[k].obj_discrete == r.iterations[k].objective);
	}
	CHECK(r.best->obj_discrete == r.iterations.back().objective);
}

TEST_CASE("an exhausted budget returns the best known answer", "[optimizer]") {
	const UcInstance inst = tiny_instance(2, 2, 3, false);
	{
		EncodedProblem ep = reduce(inst);
		InternalBackend backend;
		OptimizeOptions opts;
		opts.budget_s = 0.0;
		const OptimizationResult r = solve_optimal(ep, backend, opts);
		CHECK(r.status == OptStatus::TimeLimitBestKnown);
		CHECK(!r.best);
		CHECK(!r.diagnostic.empty());
	}
	{
		EncodedProblem ep = reduce(inst);
		InternalBackend backend;
		OptimizeOptions opts;
		opts.budget_s = 3600.0;
		const OptimizationResult r = solve_optimal(ep, backend, opts);
		CHECK(r.status == OptStatus::ProvedOptimal);
	}
}

TEST_CASE("impossible demand is reported as infeasible", "[optimizer]") {
	UcInstance inst;
	inst.n_units = 1;
	inst.horizon = 1;
	inst.reserve_factor = 0;
	inst.load = {Rational(10)};
	UnitParams u;
	u.p_min = 1;
	u.p_max = 5;
	u.b = 1;
	u.init_on = true;
	inst.units = {u};
	EncodedProblem ep = reduce(inst);
	InternalBackend backend;
	const OptimizationResult r = solve_optimal(ep, backend);
	CHECK(r.status == OptStatus::Infeasible);
	CHECK(!r.best);
	CHECK(r.backend_calls == 1);
}

TEST_CASE("objective cuts work in either comparator encoding", "[optimizer]") {
	const UcInstance inst = tiny_instance(21, 2, 3, true);
	std::optional<Rational> reference;
	for (CmpMode cut : {CmpMode::Binary, CmpMode::Tseitin}) {
		EncodedProblem ep = reduce(inst);
		InternalBackend backend;
		OptimizeOptions opts;
		opts.cut_cmp = cut;
		const OptimizationResult r = solve_optimal(ep, backend, opts);
		REQUIRE(r.status == OptStatus::ProvedOptimal);
		if (!reference)
			reference = r.best->obj_discrete;
		else
			CHECK(*reference == r.best->obj_discrete);
	}
}

TEST_CASE("seeds steer the search but never the answer", "[optimizer]") {
	const UcInstance inst = tiny_instance(31, 2, 4, false);
	std::optional<Rational> reference;
	for (uint64_t seed : {0ull, 7ull, 99ull}) {
		EncodedProblem ep = reduce(inst);
		InternalBackend backend(seed);
		const OptimizationResult r = solve_optimal(ep, backend);
		REQUIRE(r.status == OptStatus::ProvedOptimal);
		if (!reference)
			reference = r.best->obj_discrete;
		else
			CHECK(*reference == r.best->obj_discrete);
	}
}

TEST_CASE("assignments are checked against the formula", "[optimizer]") {
	CnfBuilder b;
	const Lit x = b.fresh_var(), y = b.fresh_var();
	b.add_clause({x, y});
	b.add_clause({~x, y});
	std::vector<uint8_t> good{0, 0, 1};
	std::vector<uint8_t> bad{0, 1, 0};
	CHECK(model_satisfies(b, good));
	CHECK(!model_satisfies(b, bad));
}

TEST_CASE("external solver process agrees with the built-in one", "[optimizer]") {
	const char *bin = std::getenv("DIMACS_BIN");
	if (!bin || !*bin) {
		WARN("DIMACS_BIN not set, external backend not exercised here");
		return;
	}
	for (uint64_t seed : {3ull, 14ull}) {
		const UcInstance inst = tiny_instance(seed, 2, 3, seed == 14);
		Rational internal_obj, external_obj;
		{
			EncodedProblem ep = reduce(inst);
			InternalBackend backend;
			const OptimizationResult r = solve_optimal(ep, backend);
			REQUIRE(r.status == OptStatus::ProvedOptimal);
			internal_obj = r.best->obj_discrete;
		}
		{
			EncodedProblem ep = reduce(inst);
			DimacsBackend backend(bin);
			const OptimizationResult r = solve_optimal(ep, backend);
			REQUIRE(r.status == OptStatus::ProvedOptimal);
			external_obj = r.best->obj_discrete;
			CHECK(validate_solution(inst, *r.best));
		}
		CHECK(internal_obj == external_obj);
	}
}

TEST_CASE("a missing external solver degrades to best known, not a wrong answer",
          "[optimizer]") {
	const UcInstance inst = tiny_instance(4, 1, 2, false);
	EncodedProblem ep = reduce(inst);
	DimacsBackend backend("/nonexistent/sat_solver_binary");
	const OptimizationResult r = solve_optimal(ep, backend);
	CHECK(r.status == OptStatus::TimeLimitBestKnown);
	CHECK(!r.best);
	CHECK(!r.diagnostic.empty());
}
