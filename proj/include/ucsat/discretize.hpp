#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucsat/circuits.hpp"
#include "ucsat/model.hpp"

namespace ucsat {

// Power-side quantities (loads, capacity bounds, ramp rates) are never
// rounded: they must land exactly on the 2^-m grid or the instance is
// rejected. Cost coefficients are the only values we round.
inline int required_power_frac_bits(const UcInstance &inst) {
	int need = 0;
	auto account = [&](const Rational &v, const std::string &what) {
		const int m = frac_bits_required(v);
		if (m < 0)
			throw DataError(what + " = " + to_decimal_string(v) +
			                " is not representable on any binary grid");
		need = std::max(need, m);
	};
	for (std::size_t t = 0; t < inst.load.size(); ++t)
		account(inst.load[t], "load at period " + std::to_string(t + 1));
	for (std::size_t i = 0; i < inst.units.size(); ++i) {
		const UnitParams &u = inst.units[i];
		const std::string who = "unit " + std::to_string(i + 1) + " ";
		account(u.p_min, who + "p_min");
		account(u.p_max, who + "p_max");
		if (u.ramp) {
			account(u.ramp->r_up, who + "r_up");
			account(u.ramp->r_down, who + "r_down");
		}
	}
	return need;
}

// Common power format: fractional bits cover every power-side constant
// (auto mode picks exactly that many), integer bits cover the largest
// p_max. Individual power vectors may use fewer integer bits.
inline FixedPointFormat power_format(const UcInstance &inst,
                                     std::optional<int> frac_override,
                                     std::vector<std::string> *notes = nullptr) {
	const int need = required_power_frac_bits(inst);
	int m = need;
	if (frac_override) {
		if (*frac_override < need)
			throw DataError("frac bits " + std::to_string(*frac_override) +
			                " too small: this instance needs at least " +
			                std::to_string(need));
		m = *frac_override;
	} else if (notes) {
		notes->push_back("power grid: auto-selected m=" + std::to_string(need));
	}
	int n = 1;
	for (const UnitParams &u : inst.units)
		n = std::max(n, int_bits_needed(u.p_max));
	return {n, m};
}

struct CoefficientRounding {
	std::string name;
	Rational original;
	Rational rounded;
};

struct CostGrid {
	int frac_bits = 0;
	struct UnitCosts {
		Rational a, b, c, c_hot, c_cold;
	};
	std::vector<UnitCosts> units;
	std::vector<CoefficientRounding> report; // only coefficients that moved
};

// Nearest rounding, ties up, onto the 2^-m_cost grid. The exact
// re-evaluation downstream absorbs whatever error this introduces.
inline CostGrid discretize_costs(const UcInstance &inst, int m_cost) {
	CostGrid grid;
	grid.frac_bits = m_cost;
	const FixedPointFormat wide{62, m_cost}; // overflow handled at sizing
	for (std::size_t i = 0; i < inst.units.size(); ++i) {
		const UnitParams &u = inst.units[i];
		const std::string who = "unit " + std::to_string(i + 1) + " ";
		auto snap = [&](const Rational &v, const char *name) {
			const Rational r = round_to_grid(v, wide, RoundMode::Nearest);
			if (r != v)
				grid.report.push_back({who + name, v, r});
			return r;
		};
		CostGrid::UnitCosts c;
		c.a = snap(u.a, "a");
		c.b = snap(u.b, "b");
		c.c = snap(u.c, "c");
		c.c_hot = snap(u.c_hot, "c_hot");
		c.c_cold = snap(u.c_cold, "c_cold");
		grid.units.push_back(c);
	}
	return grid;
}

// Discretized cost of a schedule: rounded coefficients, exact
// arithmetic. This is the value the objective bit vector takes.
inline Rational discretized_cost(const UcInstance &inst, const CostGrid &grid,
                                 const StatusMatrix &status, const PowerMatrix &power) {
	Rational cost = 0;
	for (int i = 0; i < inst.n_units; ++i) {
		const UnitParams &u = inst.units[i];
		const CostGrid::UnitCosts &c = grid.units[i];
		long off_run = u.init_on ? 0 : u.init_duration;
		bool prev_on = u.init_on;
		for (int t = 1; t <= inst.horizon; ++t) {
			const bool on = status[i][t - 1];
			if (on) {
				const Rational &p = power[i][t - 1];
				cost += c.a + c.b * p + c.c * p * p;
				if (!prev_on)
					cost += (off_run >= u.h_off + u.t_cold) ? c.c_cold : c.c_hot;
				off_run = 0;
			} else {
				++off_run;
			}
			prev_on = on;
		}
	}
	return cost;
}

// Spinning reserve thresholds are the one place rounding touches the
// power side, and they only ever round up: a nearest-rounded threshold
// could admit schedules the exact constraint rejects.
inline Rational reserve_threshold(const Rational &load, const Rational &factor,
                                  int frac_bits) {
	const Rational exact = load * factor;
	const FixedPointFormat wide{62, frac_bits};
	return round_to_grid(exact, wide, RoundMode::Up);
}

} // namespace ucsat
