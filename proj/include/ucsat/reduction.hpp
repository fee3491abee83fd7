#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ucsat/circuits.hpp"
#include "ucsat/discretize.hpp"
#include "ucsat/model.hpp"

namespace ucsat {

enum class CapacityMode { Specialized, Generic };
enum class CmpMode { Binary, Tseitin };

struct ReduceOptions {
	CapacityMode capacity = CapacityMode::Specialized;
	CmpMode cmp = CmpMode::Binary;
	std::optional<int> power_frac_bits; // default: smallest m covering the data
	int cost_frac_bits = 7;
};

struct TagStats {
	std::string tag;
	long vars = 0;
	long clauses = 0;
};

struct EncodedProblem {
	UcInstance instance;
	ReduceOptions options;
	CnfBuilder builder;
	FixedPointFormat power_format;     // common alignment format
	FixedPointFormat objective_format;
	CostGrid costs;
	std::vector<std::vector<Lit>> status;   // [unit][period]
	std::vector<std::vector<Lit>> startup;  // y
	std::vector<std::vector<Lit>> shutdown; // z
	std::vector<std::vector<Lit>> cold;
	std::vector<std::vector<BitVec>> power;
	BitVec objective;
	Rational objective_bound; // worst-case objective the format must hold
	std::vector<TagStats> tag_stats;
	std::vector<std::string> notes;
};

namespace detail {

inline bool use_tseitin(const EncodedProblem &ep) {
	return ep.options.cmp == CmpMode::Tseitin;
}

inline FixedPointFormat power_vec_format(const EncodedProblem &ep, const UnitParams &u) {
	return fmt_for(u.p_max, ep.power_format.frac_bits);
}

} // namespace detail

// Off forces every power bit to zero; on turns the two capacity bounds
// into guarded comparisons against plain constants.
inline void encode_capacity_specialized(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const bool ts = detail::use_tseitin(ep);
	const int m = ep.power_format.frac_bits;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		for (int t = 0; t < ep.instance.horizon; ++t) {
			const Lit s = ep.status[i][t];
			const BitVec &p = ep.power[i][t];
			for (Lit bit : p.bits)
				b.add_clause({s, ~bit});
			const Lit guards[] = {~s};
			encode_cmp(b, p, const_bitvec(b, u.p_min, fmt_for(u.p_min, m)),
			           CmpOp::Ge, ts, std::span<const Lit>(guards, 1));
			encode_cmp(b, p, const_bitvec(b, u.p_max, fmt_for(u.p_max, m)),
			           CmpOp::Le, ts, std::span<const Lit>(guards, 1));
		}
	}
}

// Literal transcription of p_min*S <= P <= p_max*S: the products
// S-times-constant get materialized as real bit vectors first.
inline void encode_capacity_generic(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const bool ts = detail::use_tseitin(ep);
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		for (int t = 0; t < ep.instance.horizon; ++t) {
			const Lit s = ep.status[i][t];
			const BitVec &p = ep.power[i][t];
			const BitVec lo = mux_const(b, s, u.p_min, p.fmt, true);
			const BitVec hi = mux_const(b, s, u.p_max, p.fmt, true);
			encode_cmp(b, lo, p, CmpOp::Le, ts);
			encode_cmp(b, p, hi, CmpOp::Le, ts);
		}
	}
}

// Committed power must meet the load exactly; capacity already zeroes
// the power of off units, so the plain sum is the committed sum.
inline void encode_balance(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const int m = ep.power_format.frac_bits;
	for (int t = 0; t < ep.instance.horizon; ++t) {
		std::vector<BitVec> terms;
		terms.reserve(ep.instance.n_units);
		for (int i = 0; i < ep.instance.n_units; ++i)
			terms.push_back(ep.power[i][t]);
		const BitVec sum = sum_tree(b, std::move(terms));
		const Rational &load = ep.instance.load[t];
		encode_eq(b, sum, const_bitvec(b, load, fmt_for(load, m)));
	}
}

// Minimum up/down times as windows over the status literals: a start at
// t pins the next h_on-1 periods on, a stop pins the next h_off-1
// periods off, and an initial state too young to switch pins a prefix.
inline void encode_min_up_down(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const int horizon = ep.instance.horizon;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		const auto &s = ep.status[i];
		if (u.init_on && u.init_duration < u.h_on) {
			const int forced = std::min(horizon, u.h_on - u.init_duration);
			for (int t = 1; t <= forced; ++t)
				b.add_clause({s[t - 1]});
		}
		if (!u.init_on && u.init_duration < u.h_off) {
			const int forced = std::min(horizon, u.h_off - u.init_duration);
			for (int t = 1; t <= forced; ++t)
				b.add_clause({~s[t - 1]});
		}
		for (int t = 1; t <= horizon; ++t) {
			for (int k = 1; k <= u.h_on - 1 && t + k <= horizon; ++k) {
				if (t == 1) {
					if (!u.init_on)
						b.add_clause({~s[0], s[k]});
				} else {
					b.add_clause({s[t - 2], ~s[t - 1], s[t - 1 + k]});
				}
			}
			for (int k = 1; k <= u.h_off - 1 && t + k <= horizon; ++k) {
				if (t == 1) {
					if (u.init_on)
						b.add_clause({s[0], ~s[k]});
				} else {
					b.add_clause({~s[t - 2], s[t - 1], ~s[t - 1 + k]});
				}
			}
		}
	}
}

// Committed capacity (p_max of the on units) must reach the reserve
// threshold, which rounds up onto the grid so the encoded constraint
// never under-asks the exact one.
inline void encode_reserve(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const bool ts = detail::use_tseitin(ep);
	const int m = ep.power_format.frac_bits;
	for (int t = 0; t < ep.instance.horizon; ++t) {
		std::vector<BitVec> terms;
		terms.reserve(ep.instance.n_units);
		for (int i = 0; i < ep.instance.n_units; ++i) {
			const UnitParams &u = ep.instance.units[i];
			terms.push_back(mux_const(b, ep.status[i][t], u.p_max,
			                          detail::power_vec_format(ep, u)));
		}
		const BitVec sum = sum_tree(b, std::move(terms));
		const Rational threshold =
		    reserve_threshold(ep.instance.load[t], ep.instance.reserve_factor, m);
		encode_cmp(b, sum, const_bitvec(b, threshold, fmt_for(threshold, m)),
		           CmpOp::Ge, ts);
	}
}

// y and z are defined from the status transitions (period 1 reads the
// initial state, which is a constant); the definitions already make
// them exclusive and consistent, no extra clauses needed.
inline void encode_startup_shutdown_link(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		for (int t = 1; t <= ep.instance.horizon; ++t) {
			const Lit s = ep.status[i][t - 1];
			const Lit y = ep.startup[i][t - 1];
			const Lit z = ep.shutdown[i][t - 1];
			if (t == 1) {
				if (u.init_on) {
					b.add_clause({~y});
					b.add_clause({~z, ~s});
					b.add_clause({z, s});
				} else {
					b.add_clause({~y, s});
					b.add_clause({y, ~s});
					b.add_clause({~z});
				}
			} else {
				const Lit sp = ep.status[i][t - 2];
				b.add_clause({~y, s});
				b.add_clause({~y, ~sp});
				b.add_clause({y, ~s, sp});
				b.add_clause({~z, ~s});
				b.add_clause({~z, sp});
				b.add_clause({z, s, ~sp});
			}
		}
	}
}

// cold_t holds exactly when the unit starts at t after at least
// h_off + t_cold consecutive off periods, counting the initial state.
inline void encode_cold_indicator(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		const int k = u.h_off + u.t_cold;
		for (int t = 1; t <= ep.instance.horizon; ++t) {
			const Lit c = ep.cold[i][t - 1];
			const Lit y = ep.startup[i][t - 1];
			const bool needs_init = k >= t;
			const bool init_ok = !u.init_on && u.init_duration >= k - (t - 1);
			if (needs_init && !init_ok) {
				b.add_clause({~c});
				continue;
			}
			std::vector<Lit> window; // ~S over the k periods before t
			for (int j = 1; j <= k && t - j >= 1; ++j)
				window.push_back(~ep.status[i][t - 1 - j]);
			b.add_clause({~c, y});
			for (Lit w : window)
				b.add_clause({~c, w});
			std::vector<Lit> back{c, ~y};
			for (Lit w : window)
				back.push_back(~w);
			b.add_clause(back);
		}
	}
}

// Movement limits between adjacent periods. Each bound is a guarded
// comparison; the adders defining the relaxed right-hand sides are
// unconditional, only the comparisons switch off. A rate at or above
// p_max can never bind and is skipped.
inline void encode_ramping(EncodedProblem &ep) {
	if (!ep.instance.has_ramping())
		return;
	CnfBuilder &b = ep.builder;
	const bool ts = detail::use_tseitin(ep);
	const int m = ep.power_format.frac_bits;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		const RampParams &rp = *u.ramp;
		for (int t = 2; t <= ep.instance.horizon; ++t) {
			const BitVec &pt = ep.power[i][t - 1];
			const BitVec &pp = ep.power[i][t - 2];
			const Lit s = ep.status[i][t - 1];
			const Lit sp = ep.status[i][t - 2];
			const Lit both[] = {~sp, ~s};
			if (rp.r_up < u.p_max) {
				const BitVec rhs = encode_add(b, pp, const_bitvec(b, rp.r_up, pp.fmt));
				encode_cmp(b, pt, rhs, CmpOp::Le, ts, std::span<const Lit>(both, 2));
			}
			if (rp.r_down < u.p_max) {
				const BitVec rhs = encode_add(b, pt, const_bitvec(b, rp.r_down, pt.fmt));
				encode_cmp(b, pp, rhs, CmpOp::Le, ts, std::span<const Lit>(both, 2));
			}
			const Lit up_guard[] = {~ep.startup[i][t - 1]};
			encode_cmp(b, pt, const_bitvec(b, rp.p_up, fmt_for(rp.p_up, m)),
			           CmpOp::Le, ts, std::span<const Lit>(up_guard, 1));
			const Lit down_guard[] = {~ep.shutdown[i][t - 1]};
			encode_cmp(b, pp, const_bitvec(b, rp.p_down, fmt_for(rp.p_down, m)),
			           CmpOp::Le, ts, std::span<const Lit>(down_guard, 1));
		}
	}
}

// Objective as one exact bit vector: running costs, hot startup cost per
// start, plus the cold surcharge when the cold indicator fires.
// Zero-valued coefficients contribute nothing and are skipped.
inline void encode_objective(EncodedProblem &ep) {
	CnfBuilder &b = ep.builder;
	const int mc = ep.costs.frac_bits;
	std::vector<BitVec> terms;
	Rational bound = 0;
	for (int i = 0; i < ep.instance.n_units; ++i) {
		const UnitParams &u = ep.instance.units[i];
		const CostGrid::UnitCosts &cc = ep.costs.units[i];
		const Rational delta = cc.c_cold - cc.c_hot;
		for (int t = 0; t < ep.instance.horizon; ++t) {
			const BitVec &p = ep.power[i][t];
			if (cc.a > 0)
				terms.push_back(mux_const(b, ep.status[i][t], cc.a, fmt_for(cc.a, mc)));
			if (cc.b > 0)
				terms.push_back(encode_mul(b, p, const_bitvec(b, cc.b, fmt_for(cc.b, mc))));
			if (cc.c > 0)
				terms.push_back(encode_mul(b, encode_square(b, p),
				                           const_bitvec(b, cc.c, fmt_for(cc.c, mc))));
			if (cc.c_hot > 0)
				terms.push_back(mux_const(b, ep.startup[i][t], cc.c_hot,
				                          fmt_for(cc.c_hot, mc)));
			if (delta > 0)
				terms.push_back(mux_const(b, ep.cold[i][t], delta, fmt_for(delta, mc)));
		}
		bound += Rational(ep.instance.horizon) *
		         (cc.a + cc.b * u.p_max + cc.c * u.p_max * u.p_max + cc.c_cold);
	}
	ep.objective = sum_tree(b, std::move(terms));
	ep.objective_format = ep.objective.fmt;
	ep.objective_bound = bound;
}

// Full pipeline: pick the grids, lay out the named variables, then emit
// every constraint block in a fixed order with per-block accounting.
inline EncodedProblem reduce(const UcInstance &inst, const ReduceOptions &opts = {}) {
	validate_instance(inst);
	EncodedProblem ep;
	ep.instance = inst;
	ep.options = opts;
	ep.power_format = power_format(inst, opts.power_frac_bits, &ep.notes);
	ep.costs = discretize_costs(inst, opts.cost_frac_bits);
	for (const CoefficientRounding &r : ep.costs.report)
		ep.notes.push_back("rounded " + r.name + ": " + to_decimal_string(r.original) +
		                   " -> " + to_decimal_string(r.rounded));

	CnfBuilder &b = ep.builder;
	const int n = inst.n_units, horizon = inst.horizon;
	auto tagged = [&](const char *tag, auto &&fn) {
		const long v0 = b.var_count();
		const long c0 = static_cast<long>(b.clause_count());
		fn();
		ep.tag_stats.push_back({tag, b.var_count() - v0,
		                        static_cast<long>(b.clause_count()) - c0});
	};
	auto alloc_grid = [&](std::vector<std::vector<Lit>> &grid) {
		grid.assign(n, {});
		for (int i = 0; i < n; ++i) {
			grid[i].reserve(horizon);
			for (int t = 0; t < horizon; ++t)
				grid[i].push_back(b.fresh_var());
		}
	};
	tagged("vars.status", [&] { alloc_grid(ep.status); });
	tagged("vars.transition", [&] {
		alloc_grid(ep.startup);
		alloc_grid(ep.shutdown);
	});
	tagged("vars.cold", [&] { alloc_grid(ep.cold); });
	tagged("vars.power", [&] {
		ep.power.assign(n, {});
		for (int i = 0; i < n; ++i) {
			const FixedPointFormat fmt = detail::power_vec_format(ep, inst.units[i]);
			ep.power[i].reserve(horizon);
			for (int t = 0; t < horizon; ++t)
				ep.power[i].push_back(fresh_bitvec(b, fmt));
		}
	});
	tagged("capacity", [&] {
		if (opts.capacity == CapacityMode::Specialized)
			encode_capacity_specialized(ep);
		else
			encode_capacity_generic(ep);
	});
	tagged("balance", [&] { encode_balance(ep); });
	tagged("min_up_down", [&] { encode_min_up_down(ep); });
	tagged("reserve", [&] { encode_reserve(ep); });
	tagged("startup_shutdown", [&] { encode_startup_shutdown_link(ep); });
	tagged("cold_indicator", [&] { encode_cold_indicator(ep); });
	if (inst.has_ramping())
		tagged("ramping", [&] { encode_ramping(ep); });
	tagged("objective", [&] { encode_objective(ep); });
	return ep;
}

// Sidecar map from problem entities to DIMACS literals. Power and
// objective entries carry signed literal codes (circuit outputs may be
// negations); bit index 0 is the most significant bit.
inline void export_var_map(const EncodedProblem &ep, std::ostream &out) {
	const int n = ep.instance.n_units, horizon = ep.instance.horizon;
	for (int i = 1; i <= n; ++i)
		for (int t = 1; t <= horizon; ++t)
			out << "S " << i << ' ' << t << ' ' << ep.status[i - 1][t - 1].code << '\n';
	for (int i = 1; i <= n; ++i)
		for (int t = 1; t <= horizon; ++t)
			out << "Y " << i << ' ' << t << ' ' << ep.startup[i - 1][t - 1].code << '\n';
	for (int i = 1; i <= n; ++i)
		for (int t = 1; t <= horizon; ++t)
			out << "Z " << i << ' ' << t << ' ' << ep.shutdown[i - 1][t - 1].code << '\n';
	for (int i = 1; i <= n; ++i)
		for (int t = 1; t <= horizon; ++t)
			out << "C " << i << ' ' << t << ' ' << ep.cold[i - 1][t - 1].code << '\n';
	for (int i = 1; i <= n; ++i) {
		for (int t = 1; t <= horizon; ++t) {
			const BitVec &p = ep.power[i - 1][t - 1];
			for (std::size_t k = 0; k < p.bits.size(); ++k)
				out << "P " << i << ' ' << t << ' ' << k << ' ' << p.bits[k].code << '\n';
		}
	}
	for (std::size_t k = 0; k < ep.objective.bits.size(); ++k)
		out << "O " << k << ' ' << ep.objective.bits[k].code << '\n';
}

} // namespace ucsat
