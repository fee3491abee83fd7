#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "ucsat/discretize.hpp"
#include "ucsat/reduction.hpp"
#include "ucsat/sat/solver.hpp"

namespace ucsat {

struct BackendStats {
	uint64_t conflicts = 0;
	uint64_t decisions = 0;
	uint64_t propagations = 0;
	double time_s = 0.0;
};

enum class SolveStatus { Sat, Unsat, Unknown };

struct SolveOutcome {
	SolveStatus status = SolveStatus::Unknown;
	std::vector<uint8_t> assignment; // indexed by variable, valid when Sat
	BackendStats stats;
	std::string diagnostic;
};

// One satisfiability call over the builder's current clause set. The
// budget is advisory: a call may overrun a little and its result still
// counts. Backend trouble surfaces as Unknown with a diagnostic, never
// as a bogus verdict.
class SatBackend {
public:
	virtual ~SatBackend() = default;
	virtual bool incremental() const = 0;
	virtual SolveOutcome solve(const CnfBuilder &cnf, std::optional<double> budget_s) = 0;
};

inline bool model_satisfies(const CnfBuilder &cnf, const std::vector<uint8_t> &assignment) {
	for (std::size_t k = 0; k < cnf.clause_count(); ++k) {
		bool sat = false;
		for (Lit l : cnf.clause(k)) {
			if (static_cast<bool>(assignment[l.var()]) == l.positive()) {
				sat = true;
				break;
			}
		}
		if (!sat)
			return false;
	}
	return true;
}

// In-process CDCL. Keeps its clause cursor between calls, so the cut
// loop only feeds it the delta and learned clauses survive.
class InternalBackend final : public SatBackend {
public:
	explicit InternalBackend(uint64_t seed = 0) : solver_(seed) {}
	bool incremental() const override { return true; }

	SolveOutcome solve(const CnfBuilder &cnf, std::optional<double> budget_s) override {
		const auto t0 = std::chrono::steady_clock::now();
		SolveOutcome out;
		solver_.ensure_vars(cnf.var_count());
		for (; loaded_ < cnf.clause_count(); ++loaded_)
			solver_.add_clause(cnf.clause(loaded_));
		const uint64_t c0 = solver_.conflicts();
		const uint64_t d0 = solver_.decisions();
		const uint64_t p0 = solver_.propagations();
		const SatResult r = solver_.solve(budget_s);
		out.stats.conflicts = solver_.conflicts() - c0;
		out.stats.decisions = solver_.decisions() - d0;
		out.stats.propagations = solver_.propagations() - p0;
		out.stats.time_s = std::chrono::duration<double>(
		                       std::chrono::steady_clock::now() - t0)
		                       .count();
		switch (r) {
		case SatResult::Unsat:
			out.status = SolveStatus::Unsat;
			break;
		case SatResult::Unknown:
			out.status = SolveStatus::Unknown;
			out.diagnostic = "budget exhausted";
			break;
		case SatResult::Sat:
			out.assignment.assign(static_cast<std::size_t>(cnf.var_count()) + 1, 0);
			for (int v = 1; v <= cnf.var_count(); ++v)
				out.assignment[v] = solver_.model_value(v) ? 1 : 0;
			if (!model_satisfies(cnf, out.assignment)) {
				out.status = SolveStatus::Unknown;
				out.diagnostic = "internal model check failed";
			} else {
				out.status = SolveStatus::Sat;
			}
			break;
		}
		return out;
	}

private:
	CdclSolver solver_;
	std::size_t loaded_ = 0;
};

// Out-of-process backend speaking the standard CNF solver protocol:
// formula in a file, verdict on the s-line or the exit code (10/20),
// model on v-lines. Non-incremental: every call rewrites the whole
// formula.
class DimacsBackend final : public SatBackend {
public:
	explicit DimacsBackend(std::string solver_path) : path_(std::move(solver_path)) {}
	bool incremental() const override { return false; }

	SolveOutcome solve(const CnfBuilder &cnf, std::optional<double> budget_s) override {
		const auto t0 = std::chrono::steady_clock::now();
		SolveOutcome out;
		namespace fs = std::filesystem;
		const fs::path file =
		    fs::temp_directory_path() /
		    ("cnf_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++) + ".cnf");
		{
			std::ofstream f(file);
			if (!f) {
				out.diagnostic = "cannot write " + file.string();
				return out;
			}
			cnf.export_dimacs(f);
		}
		std::string cmd;
		if (budget_s) {
			char buf[64];
			std::snprintf(buf, sizeof buf, "timeout %.3f ", std::max(*budget_s, 0.001));
			cmd += buf;
		}
		cmd += "'" + path_ + "' '" + file.string() + "' 2>/dev/null";
		FILE *pipe = ::popen(cmd.c_str(), "r");
		if (!pipe) {
			fs::remove(file);
			out.diagnostic = "cannot run " + path_;
			return out;
		}
		std::string text;
		char chunk[4096];
		std::size_t got;
		while ((got = std::fread(chunk, 1, sizeof chunk, pipe)) > 0)
			text.append(chunk, got);
		const int rc = ::pclose(pipe);
		fs::remove(file);
		const int exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;

		std::string sline;
		std::vector<int64_t> vlits;
		std::istringstream lines(text);
		std::string line;
		while (std::getline(lines, line)) {
			if (line.rfind("s ", 0) == 0) {
				sline = line.substr(2);
			} else if (line.rfind("v ", 0) == 0) {
				std::istringstream vs(line.substr(2));
				int64_t x;
				while (vs >> x)
					vlits.push_back(x);
			}
		}
		out.stats.time_s = std::chrono::duration<double>(
		                       std::chrono::steady_clock::now() - t0)
		                       .count();
		const bool says_sat = sline.rfind("SATISFIABLE", 0) == 0 || exit_code == 10;
		const bool says_unsat = sline.rfind("UNSATISFIABLE", 0) == 0 || exit_code == 20;
		if (exit_code == 124) {
			out.status = SolveStatus::Unknown;
			out.diagnostic = "budget exhausted";
		} else if (says_unsat) {
			out.status = SolveStatus::Unsat;
		} else if (says_sat) {
			out.assignment.assign(static_cast<std::size_t>(cnf.var_count()) + 1, 0);
			for (int64_t x : vlits) {
				if (x == 0)
					continue;
				const int64_t v = x < 0 ? -x : x;
				if (v <= cnf.var_count())
					out.assignment[v] = x > 0 ? 1 : 0;
			}
			if (!model_satisfies(cnf, out.assignment)) {
				out.status = SolveStatus::Unknown;
				out.diagnostic = "solver claimed sat but its model fails the formula";
			} else {
				out.status = SolveStatus::Sat;
			}
		} else {
			out.status = SolveStatus::Unknown;
			out.diagnostic = "unusable solver output (exit " + std::to_string(exit_code) + ")";
		}
		return out;
	}

private:
	std::string path_;
	uint64_t counter_ = 0;
};

// Assignment -> schedule. A decoded model that fails the independent
// checker, or whose objective bits disagree with the discretized cost,
// means the encoding itself is broken: that is a hard failure.
inline Schedule decode(const EncodedProblem &ep, const std::vector<uint8_t> &assignment) {
	const int n = ep.instance.n_units, horizon = ep.instance.horizon;
	Schedule s;
	s.status.assign(n, std::vector<uint8_t>(horizon, 0));
	s.power.assign(n, std::vector<Rational>(horizon, Rational(0)));
	for (int i = 0; i < n; ++i) {
		for (int t = 0; t < horizon; ++t) {
			const Lit l = ep.status[i][t];
			s.status[i][t] = assignment[l.var()] ? 1 : 0;
			s.power[i][t] = decode_bitvec(ep.power[i][t], assignment);
		}
	}
	s.obj_discrete = decode_bitvec(ep.objective, assignment);
	const EvalResult ev = evaluate_exact(ep.instance, s.status, s.power);
	if (ev.violation)
		throw std::logic_error("decoded model violates " + ev.violation->constraint +
		                       " (unit " + std::to_string(ev.violation->unit) + ", period " +
		                       std::to_string(ev.violation->period) + "): " +
		                       ev.violation->detail);
	s.obj_exact = ev.cost;
	if (s.obj_discrete != discretized_cost(ep.instance, ep.costs, s.status, s.power))
		throw std::logic_error("objective bits disagree with the discretized cost");
	return s;
}

enum class OptStatus { ProvedOptimal, TimeLimitBestKnown, Infeasible };

struct IterationRecord {
	Rational objective; // discretized objective of the model found
	double time_s;      // elapsed when it landed
};

struct OptimizeOptions {
	std::optional<double> budget_s;
	CmpMode cut_cmp = CmpMode::Binary;
	std::function<void(const Schedule &, double)> on_improvement;
};

struct OptimizationResult {
	OptStatus status = OptStatus::Infeasible;
	std::optional<Schedule> best;
	std::vector<IterationRecord> iterations;
	uint64_t backend_calls = 0;
	BackendStats total;
	std::string diagnostic;
};

// Descending linear search: solve, harvest the model, forbid anything
// at or above it with a strict objective cut, repeat. Unsat then proves
// the last model optimal; running out of budget returns it as best
// known. Each cut strictly lowers the objective, enforced here.
inline OptimizationResult solve_optimal(EncodedProblem &ep, SatBackend &backend,
                                        const OptimizeOptions &opts = {}) {
	OptimizationResult res;
	const auto t0 = std::chrono::steady_clock::now();
	auto elapsed = [&] {
		return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	};
	for (;;) {
		std::optional<double> remaining;
		if (opts.budget_s) {
			remaining = *opts.budget_s - elapsed();
			if (*remaining <= 0) {
				res.status = OptStatus::TimeLimitBestKnown;
				res.diagnostic = "budget exhausted";
				return res;
			}
		}
		SolveOutcome o = backend.solve(ep.builder, remaining);
		++res.backend_calls;
		res.total.conflicts += o.stats.conflicts;
		res.total.decisions += o.stats.decisions;
		res.total.propagations += o.stats.propagations;
		res.total.time_s += o.stats.time_s;
		if (o.status == SolveStatus::Unknown) {
			res.status = OptStatus::TimeLimitBestKnown;
			res.diagnostic = o.diagnostic.empty() ? "budget exhausted" : o.diagnostic;
			return res;
		}
		if (o.status == SolveStatus::Unsat) {
			res.status = res.best ? OptStatus::ProvedOptimal : OptStatus::Infeasible;
			return res;
		}
		Schedule sched = decode(ep, o.assignment);
		if (res.best && !(sched.obj_discrete < res.best->obj_discrete))
			throw std::logic_error("objective cut failed to force strict descent");
		res.iterations.push_back({sched.obj_discrete, elapsed()});
		if (opts.on_improvement)
			opts.on_improvement(sched, elapsed());
		res.best = std::move(sched);
		const BitVec bound =
		    const_bitvec(ep.builder, res.best->obj_discrete, ep.objective.fmt);
		encode_cmp(ep.builder, ep.objective, bound, CmpOp::Lt,
		           opts.cut_cmp == CmpMode::Tseitin);
	}
}

} // namespace ucsat
