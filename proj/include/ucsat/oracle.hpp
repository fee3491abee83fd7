#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ucsat/discretize.hpp"
#include "ucsat/model.hpp"

namespace ucsat {

// Exhaustive reference solver over the same discretized model the
// encoder targets. Deliberately written against different machinery:
// run-length scans instead of duration counters, explicit enumeration
// instead of constraints, so agreement with the main path means
// something.

struct OracleOptions {
	uint64_t max_points = 50'000'000; // work ceiling, DFS nodes + DP pairs
	std::optional<int> power_frac_bits;
	int cost_frac_bits = 7;
};

struct OracleResult {
	bool feasible = false;
	Schedule best;         // valid when feasible
	uint64_t matrices = 0; // status matrices examined
	uint64_t points = 0;   // work spent against the ceiling
};

// Minimum up/down legality by scanning runs of equal state; the first
// run extends the initial state, the run touching the horizon end is
// never constrained.
inline bool oracle_commitment_feasible(const UcInstance &inst, const StatusMatrix &status) {
	for (int i = 0; i < inst.n_units; ++i) {
		const UnitParams &u = inst.units[i];
		bool state = u.init_on;
		long len = u.init_duration;
		for (int t = 0; t < inst.horizon; ++t) {
			const bool on = static_cast<bool>(status[i][t]);
			if (on == state) {
				++len;
				continue;
			}
			if (state ? len < u.h_on : len < u.h_off)
				return false;
			state = on;
			len = 1;
		}
	}
	return true;
}

// Cost of the starts alone, with each start classified hot or cold by
// the length of the off-run it ends.
inline Rational oracle_startup_cost(const UcInstance &inst, const CostGrid &grid,
                                    const StatusMatrix &status) {
	Rational total = 0;
	for (int i = 0; i < inst.n_units; ++i) {
		const UnitParams &u = inst.units[i];
		bool state = u.init_on;
		long len = u.init_duration;
		for (int t = 0; t < inst.horizon; ++t) {
			const bool on = static_cast<bool>(status[i][t]);
			if (on == state) {
				++len;
				continue;
			}
			if (on)
				total += (len >= u.h_off + u.t_cold) ? grid.units[i].c_cold
				                                     : grid.units[i].c_hot;
			state = on;
			len = 1;
		}
	}
	return total;
}

// Full feasibility verdict in the oracle's own terms: commitment runs,
// capacity, grid membership, exact balance, the rounded-up reserve
// threshold, and the ramp cases. Used to cross-check evaluate_exact.
inline bool oracle_schedule_feasible(const UcInstance &inst, int frac_bits,
                                     const StatusMatrix &status, const PowerMatrix &power) {
	if (!oracle_commitment_feasible(inst, status))
		return false;
	const BigInt scale = pow2(frac_bits);
	for (int t = 0; t < inst.horizon; ++t) {
		Rational delivered = 0, cap = 0;
		for (int i = 0; i < inst.n_units; ++i) {
			const UnitParams &u = inst.units[i];
			const Rational &p = power[i][t];
			if (status[i][t]) {
				if (p < u.p_min || p > u.p_max)
					return false;
				if (boost::multiprecision::denominator(p * Rational(scale)) != 1)
					return false;
				delivered += p;
				cap += u.p_max;
			} else if (p != 0) {
				return false;
			}
		}
		if (delivered != inst.load[t])
			return false;
		if (cap < reserve_threshold(inst.load[t], inst.reserve_factor, frac_bits))
			return false;
	}
	if (inst.has_ramping()) {
		for (int t = 1; t < inst.horizon; ++t) {
			for (int i = 0; i < inst.n_units; ++i) {
				const UnitParams &u = inst.units[i];
				const RampParams &rp = *u.ramp;
				const bool on = status[i][t], pon = status[i][t - 1];
				if (on && pon) {
					if (power[i][t] - power[i][t - 1] > rp.r_up)
						return false;
					if (power[i][t - 1] - power[i][t] > rp.r_down)
						return false;
				} else if (on && !pon) {
					if (power[i][t] > rp.p_up)
						return false;
				} else if (!on && pon) {
					if (power[i][t - 1] > rp.p_down)
						return false;
				}
			}
		}
	}
	return true;
}

namespace detail {

struct DispatchSet {
	std::vector<std::vector<long long>> vectors; // scaled power, full unit length
	std::vector<Rational> costs;                 // b*p + c*p^2 per vector
};

} // namespace detail

inline OracleResult oracle_solve(const UcInstance &inst, const OracleOptions &opts = {}) {
	validate_instance(inst);
	const int n = inst.n_units, horizon = inst.horizon;
	if (n * horizon > 26)
		throw DataError("oracle: " + std::to_string(n * horizon) +
		                " status bits are beyond exhaustive enumeration");
	const FixedPointFormat pf = power_format(inst, opts.power_frac_bits);
	const int m = pf.frac_bits;
	const CostGrid grid = discretize_costs(inst, opts.cost_frac_bits);
	const Rational scale(pow2(m));

	OracleResult res;
	auto charge = [&](uint64_t k) {
		res.points += k;
		if (res.points > opts.max_points)
			throw DataError("oracle: work ceiling exceeded");
	};
	auto scaled_ll = [&](const Rational &v) {
		const Rational s = v * scale;
		return boost::multiprecision::numerator(s).convert_to<long long>();
	};

	std::vector<long long> lo(n), hi(n), rup(n), rdn(n);
	for (int i = 0; i < n; ++i) {
		lo[i] = scaled_ll(inst.units[i].p_min);
		hi[i] = scaled_ll(inst.units[i].p_max);
		if (inst.units[i].ramp) {
			rup[i] = scaled_ll(inst.units[i].ramp->r_up);
			rdn[i] = scaled_ll(inst.units[i].ramp->r_down);
		}
	}
	std::vector<long long> target(horizon);
	std::vector<Rational> resv(horizon);
	for (int t = 0; t < horizon; ++t) {
		target[t] = scaled_ll(inst.load[t]);
		resv[t] = reserve_threshold(inst.load[t], inst.reserve_factor, m);
	}

	// Dispatch sets keyed by (target, on-mask); masks repeat a lot
	// across status matrices.
	std::map<std::pair<long long, uint32_t>, std::shared_ptr<const detail::DispatchSet>> cache;
	auto dispatch_for = [&](int t, uint32_t mask) {
		const auto key = std::make_pair(target[t], mask);
		if (const auto it = cache.find(key); it != cache.end())
			return it->second;
		auto set = std::make_shared<detail::DispatchSet>();
		std::vector<int> on;
		for (int i = 0; i < n; ++i)
			if (mask & (1u << i))
				on.push_back(i);
		std::vector<long long> lo_suffix(on.size() + 1, 0), hi_suffix(on.size() + 1, 0);
		for (std::size_t k = on.size(); k-- > 0;) {
			lo_suffix[k] = lo_suffix[k + 1] + lo[on[k]];
			hi_suffix[k] = hi_suffix[k + 1] + hi[on[k]];
		}
		std::vector<long long> pick(n, 0);
		auto dfs = [&](auto &&self, std::size_t k, long long rest) -> void {
			charge(1);
			if (k == on.size()) {
				if (rest == 0) {
					Rational cost = 0;
					for (int i : on) {
						const Rational p(BigInt(pick[i]), pow2(m));
						cost += grid.units[i].b * p + grid.units[i].c * p * p;
					}
					set->vectors.push_back(pick);
					set->costs.push_back(cost);
				}
				return;
			}
			const int i = on[k];
			const long long vmin = std::max(lo[i], rest - hi_suffix[k + 1]);
			const long long vmax = std::min(hi[i], rest - lo_suffix[k + 1]);
			for (long long v = vmin; v <= vmax; ++v) {
				pick[i] = v;
				self(self, k + 1, rest - v);
			}
			pick[i] = 0;
		};
		if (on.empty()) {
			charge(1);
			if (target[t] == 0) {
				set->vectors.push_back(pick);
				set->costs.push_back(Rational(0));
			}
		} else {
			dfs(dfs, 0, target[t]);
		}
		cache.emplace(key, set);
		return std::shared_ptr<const detail::DispatchSet>(set);
	};

	const bool ramping = inst.has_ramping();
	auto ramp_ok = [&](const std::vector<long long> &prev, const std::vector<long long> &cur,
	                   const StatusMatrix &status, int t) {
		for (int i = 0; i < n; ++i) {
			const bool on = status[i][t], pon = status[i][t - 1];
			if (on && pon) {
				if (cur[i] - prev[i] > rup[i] || prev[i] - cur[i] > rdn[i])
					return false;
			} else if (on && !pon) {
				if (cur[i] > lo[i]) // startup ramp power = p_min
					return false;
			} else if (!on && pon) {
				if (prev[i] > lo[i])
					return false;
			}
		}
		return true;
	};

	std::optional<Rational> best_cost;
	StatusMatrix best_status;
	std::vector<std::vector<long long>> best_power;

	StatusMatrix status(n, std::vector<uint8_t>(horizon, 0));
	const uint64_t limit = uint64_t(1) << (n * horizon);
	for (uint64_t mask = 0; mask < limit; ++mask) {
		charge(1);
		++res.matrices;
		for (int i = 0; i < n; ++i)
			for (int t = 0; t < horizon; ++t)
				status[i][t] = (mask >> (i * horizon + t)) & 1;
		if (!oracle_commitment_feasible(inst, status))
			continue;
		bool viable = true;
		std::vector<uint32_t> on_mask(horizon, 0);
		for (int t = 0; t < horizon && viable; ++t) {
			Rational cap = 0;
			long long lo_sum = 0, hi_sum = 0;
			for (int i = 0; i < n; ++i) {
				if (status[i][t]) {
					on_mask[t] |= (1u << i);
					cap += inst.units[i].p_max;
					lo_sum += lo[i];
					hi_sum += hi[i];
				}
			}
			if (cap < resv[t] || target[t] < lo_sum || target[t] > hi_sum)
				viable = false;
		}
		if (!viable)
			continue;
		std::vector<std::shared_ptr<const detail::DispatchSet>> sets(horizon);
		for (int t = 0; t < horizon && viable; ++t) {
			sets[t] = dispatch_for(t, on_mask[t]);
			if (sets[t]->vectors.empty())
				viable = false;
		}
		if (!viable)
			continue;

		Rational fixed = oracle_startup_cost(inst, grid, status);
		for (int i = 0; i < n; ++i)
			for (int t = 0; t < horizon; ++t)
				if (status[i][t])
					fixed += grid.units[i].a;

		Rational total;
		std::vector<std::vector<long long>> chosen(horizon);
		if (!ramping) {
			total = fixed;
			bool any = true;
			for (int t = 0; t < horizon; ++t) {
				const auto &ds = *sets[t];
				std::size_t arg = 0;
				for (std::size_t v = 1; v < ds.costs.size(); ++v)
					if (ds.costs[v] < ds.costs[arg])
						arg = v;
				charge(ds.costs.size());
				total += ds.costs[arg];
				chosen[t] = ds.vectors[arg];
			}
			(void)any;
		} else {
			// DP over dispatch vectors with ramp-legal transitions.
			std::vector<std::optional<Rational>> dp(sets[0]->vectors.size());
			std::vector<std::vector<int>> parent(horizon);
			for (std::size_t v = 0; v < dp.size(); ++v)
				dp[v] = sets[0]->costs[v];
			for (int t = 1; t < horizon; ++t) {
				const auto &prev = *sets[t - 1];
				const auto &cur = *sets[t];
				std::vector<std::optional<Rational>> dp2(cur.vectors.size());
				parent[t].assign(cur.vectors.size(), -1);
				charge(prev.vectors.size() * cur.vectors.size());
				for (std::size_t v = 0; v < cur.vectors.size(); ++v) {
					for (std::size_t u2 = 0; u2 < prev.vectors.size(); ++u2) {
						if (!dp[u2])
							continue;
						if (!ramp_ok(prev.vectors[u2], cur.vectors[v], status, t))
							continue;
						const Rational c = *dp[u2] + cur.costs[v];
						if (!dp2[v] || c < *dp2[v]) {
							dp2[v] = c;
							parent[t][v] = static_cast<int>(u2);
						}
					}
				}
				dp = std::move(dp2);
			}
			int arg = -1;
			for (std::size_t v = 0; v < dp.size(); ++v)
				if (dp[v] && (arg < 0 || *dp[v] < *dp[arg]))
					arg = static_cast<int>(v);
			if (arg < 0)
				continue;
			total = fixed + *dp[arg];
			for (int t = horizon - 1; t >= 0; --t) {
				chosen[t] = sets[t]->vectors[arg];
				if (t > 0)
					arg = parent[t][arg];
			}
		}

		if (!best_cost || total < *best_cost) {
			best_cost = total;
			best_status = status;
			best_power = chosen;
		}
	}

	if (!best_cost)
		return res;
	res.feasible = true;
	res.best.status = best_status;
	res.best.power.assign(n, std::vector<Rational>(horizon, Rational(0)));
	for (int i = 0; i < n; ++i)
		for (int t = 0; t < horizon; ++t)
			res.best.power[i][t] = Rational(BigInt(best_power[t][i]), pow2(m));
	res.best.obj_discrete = *best_cost;
	const EvalResult ev = evaluate_exact(inst, res.best.status, res.best.power);
	if (ev.violation)
		throw std::logic_error("oracle produced an infeasible schedule: " +
		                       ev.violation->constraint + " " + ev.violation->detail);
	res.best.obj_exact = ev.cost;
	return res;
}

} // namespace ucsat
