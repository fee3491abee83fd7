#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ucsat/errors.hpp"
#include "ucsat/rational.hpp"

namespace ucsat {

// Limits on power movement between adjacent periods. The startup and
// shutdown ramp powers are pinned to the owning unit's p_min.
struct RampParams {
	Rational r_up;
	Rational r_down;
	Rational p_up;
	Rational p_down;
};

struct UnitParams {
	Rational p_min;
	Rational p_max;
	Rational a, b, c; // running cost a + b*P + c*P^2 while committed
	Rational c_hot;
	Rational c_cold;
	int t_cold = 0;   // extra off-periods after h_off before a start counts as cold
	int h_on = 1;     // minimum up time
	int h_off = 1;    // minimum down time
	bool init_on = false;
	int init_duration = 1; // periods already spent in the initial state
	std::optional<RampParams> ramp;
};

struct UcInstance {
	int n_units = 0;
	int horizon = 0;
	Rational reserve_factor; // E: spinning reserve as a load multiple
	std::vector<Rational> load;
	std::vector<UnitParams> units;

	bool has_ramping() const {
		return !units.empty() && units.front().ramp.has_value();
	}
};

using StatusMatrix = std::vector<std::vector<uint8_t>>;  // [unit][period]
using PowerMatrix = std::vector<std::vector<Rational>>;

struct Schedule {
	StatusMatrix status;
	PowerMatrix power;
	Rational obj_discrete; // objective in the discretized cost model
	Rational obj_exact;    // objective re-evaluated with original coefficients
};

struct Violation {
	std::string constraint; // capacity, balance, min_up, min_down, reserve, ramp_up, ramp_down
	int unit = 0;           // 1-based; 0 for system-wide constraints
	int period = 0;         // 1-based
	std::string detail;
};

struct EvalResult {
	std::optional<Violation> violation;
	Rational cost; // meaningful only when no violation
};

inline void validate_instance(const UcInstance &inst) {
	if (inst.n_units < 1)
		throw DataError("instance needs at least one unit");
	if (inst.horizon < 1)
		throw DataError("instance needs at least one period");
	if (static_cast<int>(inst.units.size()) != inst.n_units)
		throw DataError("unit count mismatch");
	if (static_cast<int>(inst.load.size()) != inst.horizon)
		throw DataError("LOAD gives " + std::to_string(inst.load.size()) +
		                " values, expected T=" + std::to_string(inst.horizon));
	if (inst.reserve_factor < 0)
		throw DataError("reserve factor E must be nonnegative");
	for (const Rational &r : inst.load) {
		if (r < 0)
			throw DataError("negative load");
	}
	std::size_t with_ramp = 0;
	for (std::size_t i = 0; i < inst.units.size(); ++i) {
		const UnitParams &u = inst.units[i];
		const std::string who = "unit " + std::to_string(i + 1) + ": ";
		if (u.p_min < 0 || u.p_max < 0 || u.p_min > u.p_max)
			throw DataError(who + "need 0 <= p_min <= p_max");
		if (u.a < 0 || u.b < 0 || u.c < 0)
			throw DataError(who + "negative cost coefficient");
		if (u.c_hot < 0 || u.c_cold < u.c_hot)
			throw DataError(who + "need 0 <= c_hot <= c_cold");
		if (u.t_cold < 0)
			throw DataError(who + "t_cold must be nonnegative");
		if (u.h_on < 1 || u.h_off < 1)
			throw DataError(who + "minimum up/down times must be at least 1");
		if (u.init_duration < 1)
			throw DataError(who + "initial state duration must be at least 1");
		if (u.ramp) {
			++with_ramp;
			if (u.ramp->r_up < 0 || u.ramp->r_down < 0)
				throw DataError(who + "negative ramp rate");
			if (u.ramp->p_up != u.p_min || u.ramp->p_down != u.p_min)
				throw DataError(who + "startup/shutdown ramp power must equal p_min");
		}
	}
	if (with_ramp != 0 && with_ramp != inst.units.size())
		throw DataError("RAMP lines must cover every unit or none");
}

// Feasibility and exact cost in one deterministic sweep: per period,
// capacity for each unit, then the up/down-time transition checks, then
// ramping, then balance and reserve. First violation wins.
inline EvalResult evaluate_exact(const UcInstance &inst, const StatusMatrix &status,
                                 const PowerMatrix &power) {
	const int n = inst.n_units, horizon = inst.horizon;
	if (static_cast<int>(status.size()) != n || static_cast<int>(power.size()) != n)
		throw std::invalid_argument("schedule has wrong unit count");
	for (int i = 0; i < n; ++i) {
		if (static_cast<int>(status[i].size()) != horizon ||
		    static_cast<int>(power[i].size()) != horizon)
			throw std::invalid_argument("schedule has wrong horizon");
	}

	EvalResult res;
	res.cost = 0;
	// Duration counters carried across periods: how long each unit has
	// been in its current state as of the period just finished.
	std::vector<long> x_on(n), x_off(n);
	for (int i = 0; i < n; ++i) {
		x_on[i] = inst.units[i].init_on ? inst.units[i].init_duration : 0;
		x_off[i] = inst.units[i].init_on ? 0 : inst.units[i].init_duration;
	}
	auto fail = [&](std::string what, int unit, int period, std::string detail) {
		res.violation = Violation{std::move(what), unit, period, std::move(detail)};
		return res;
	};

	for (int t = 1; t <= horizon; ++t) {
		for (int i = 0; i < n; ++i) {
			const UnitParams &u = inst.units[i];
			const bool on = status[i][t - 1];
			const Rational &p = power[i][t - 1];
			if (on) {
				if (p < u.p_min)
					return fail("capacity", i + 1, t,
					            "power " + to_decimal_string(p) + " below p_min " +
					                to_decimal_string(u.p_min));
				if (p > u.p_max)
					return fail("capacity", i + 1, t,
					            "power " + to_decimal_string(p) + " above p_max " +
					                to_decimal_string(u.p_max));
			} else if (p != 0) {
				return fail("capacity", i + 1, t,
				            "unit is off but delivers " + to_decimal_string(p));
			}
		}
		for (int i = 0; i < n; ++i) {
			const UnitParams &u = inst.units[i];
			const bool on = status[i][t - 1];
			const bool prev_on = (t == 1) ? u.init_on : static_cast<bool>(status[i][t - 2]);
			if (on && !prev_on) {
				if (x_off[i] < u.h_off)
					return fail("min_down", i + 1, t,
					            "restarted after " + std::to_string(x_off[i]) +
					                " periods, h_off=" + std::to_string(u.h_off));
				res.cost += (x_off[i] >= u.h_off + u.t_cold) ? u.c_cold : u.c_hot;
			}
			if (!on && prev_on) {
				if (x_on[i] < u.h_on)
					return fail("min_up", i + 1, t,
					            "stopped after " + std::to_string(x_on[i]) +
					                " periods, h_on=" + std::to_string(u.h_on));
			}
			if (on) {
				x_on[i] = prev_on ? x_on[i] + 1 : 1;
				x_off[i] = 0;
			} else {
				x_off[i] = prev_on ? 1 : x_off[i] + 1;
				x_on[i] = 0;
			}
			res.cost += on ? u.a + u.b * power[i][t - 1] +
			                     u.c * power[i][t - 1] * power[i][t - 1]
			               : Rational(0);
		}
		if (inst.has_ramping() && t >= 2) {
			for (int i = 0; i < n; ++i) {
				const UnitParams &u = inst.units[i];
				const RampParams &rp = *u.ramp;
				const bool on = status[i][t - 1], prev_on = status[i][t - 2];
				const bool started = on && !prev_on;
				const bool stopped = !on && prev_on;
				const Rational up_room =
				    (prev_on ? rp.r_up : Rational(0)) + (started ? rp.p_up : Rational(0));
				const Rational down_room =
				    (on ? rp.r_down : Rational(0)) + (stopped ? rp.p_down : Rational(0));
				if (power[i][t - 1] - power[i][t - 2] > up_room)
					return fail("ramp_up", i + 1, t,
					            "climb " + to_decimal_string(power[i][t - 1] - power[i][t - 2]) +
					                " exceeds " + to_decimal_string(up_room));
				if (power[i][t - 2] - power[i][t - 1] > down_room)
					return fail("ramp_down", i + 1, t,
					            "descent " + to_decimal_string(power[i][t - 2] - power[i][t - 1]) +
					                " exceeds " + to_decimal_string(down_room));
			}
		}
		Rational delivered = 0, committed_cap = 0;
		for (int i = 0; i < n; ++i) {
			if (status[i][t - 1]) {
				delivered += power[i][t - 1];
				committed_cap += inst.units[i].p_max;
			}
		}
		if (delivered != inst.load[t - 1])
			return fail("balance", 0, t,
			            "delivered " + to_decimal_string(delivered) + ", load " +
			                to_decimal_string(inst.load[t - 1]));
		if (committed_cap < inst.load[t - 1] * inst.reserve_factor)
			return fail("reserve", 0, t,
			            "committed capacity " + to_decimal_string(committed_cap) +
			                " below " + to_decimal_string(inst.load[t - 1] * inst.reserve_factor));
	}
	return res;
}

inline bool validate_solution(const UcInstance &inst, const Schedule &sched) {
	const EvalResult r = evaluate_exact(inst, sched.status, sched.power);
	return !r.violation && r.cost == sched.obj_exact;
}

namespace detail {

inline long parse_int_field(const std::string &tok, const char *what, int lineno) {
	try {
		std::size_t pos = 0;
		const long v = std::stol(tok, &pos);
		if (pos != tok.size())
			throw std::invalid_argument(tok);
		return v;
	} catch (const std::exception &) {
		throw DataError("line " + std::to_string(lineno) + ": bad " + what + " '" + tok + "'");
	}
}

inline Rational parse_rat_field(const std::string &tok, const char *what, int lineno) {
	try {
		return parse_decimal(tok);
	} catch (const DataError &) {
		throw DataError("line " + std::to_string(lineno) + ": bad " + what + " '" + tok + "'");
	}
}

} // namespace detail

// Instance grammar, one record per line, '#' starts a comment:
//   UC 1
//   N <units>  T <periods>  E <reserve factor>
//   LOAD <value...>              (repeatable, appended until T values)
//   UNIT <idx> <p_min> <p_max> <a> <b> <c> <c_hot> <c_cold>
//        <t_cold> <h_on> <h_off> <init_on> <init_duration>
//   RAMP <idx> <r_up> <r_down>   (all units or none)
inline UcInstance parse_instance(std::istream &in) {
	UcInstance inst;
	bool saw_magic = false, saw_n = false, saw_t = false, saw_e = false;
	std::vector<bool> unit_seen, ramp_seen;
	std::string line;
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (const auto hash = line.find('#'); hash != std::string::npos)
			line.erase(hash);
		std::istringstream ls(line);
		std::string key;
		if (!(ls >> key))
			continue;
		auto want_tokens = [&](int k) {
			std::vector<std::string> toks(k);
			for (int j = 0; j < k; ++j) {
				if (!(ls >> toks[j]))
					throw DataError("line " + std::to_string(lineno) + ": " + key +
					                " needs " + std::to_string(k) + " fields");
			}
			std::string extra;
			if (ls >> extra)
				throw DataError("line " + std::to_string(lineno) + ": trailing '" + extra + "'");
			return toks;
		};
		if (key == "UC") {
			const auto toks = want_tokens(1);
			if (toks[0] != "1")
				throw DataError("line " + std::to_string(lineno) +
				                ": unsupported format version " + toks[0]);
			saw_magic = true;
		} else if (key == "N") {
			inst.n_units = static_cast<int>(detail::parse_int_field(want_tokens(1)[0], "N", lineno));
			saw_n = true;
		} else if (key == "T") {
			inst.horizon = static_cast<int>(detail::parse_int_field(want_tokens(1)[0], "T", lineno));
			saw_t = true;
		} else if (key == "E") {
			inst.reserve_factor = detail::parse_rat_field(want_tokens(1)[0], "E", lineno);
			saw_e = true;
		} else if (key == "LOAD") {
			std::string tok;
			bool any = false;
			while (ls >> tok) {
				inst.load.push_back(detail::parse_rat_field(tok, "load", lineno));
				any = true;
			}
			if (!any)
				throw DataError("line " + std::to_string(lineno) + ": LOAD needs values");
		} else if (key == "UNIT") {
			if (!saw_n)
				throw DataError("line " + std::to_string(lineno) + ": UNIT before N");
			const auto toks = want_tokens(13);
			const long idx = detail::parse_int_field(toks[0], "unit index", lineno);
			if (idx < 1 || idx > inst.n_units)
				throw DataError("line " + std::to_string(lineno) + ": unit index " +
				                std::to_string(idx) + " out of range 1.." +
				                std::to_string(inst.n_units));
			unit_seen.resize(inst.n_units, false);
			if (unit_seen[idx - 1])
				throw DataError("line " + std::to_string(lineno) + ": duplicate UNIT " +
				                std::to_string(idx));
			unit_seen[idx - 1] = true;
			inst.units.resize(inst.n_units);
			UnitParams &u = inst.units[idx - 1];
			u.p_min = detail::parse_rat_field(toks[1], "p_min", lineno);
			u.p_max = detail::parse_rat_field(toks[2], "p_max", lineno);
			u.a = detail::parse_rat_field(toks[3], "a", lineno);
			u.b = detail::parse_rat_field(toks[4], "b", lineno);
			u.c = detail::parse_rat_field(toks[5], "c", lineno);
			u.c_hot = detail::parse_rat_field(toks[6], "c_hot", lineno);
			u.c_cold = detail::parse_rat_field(toks[7], "c_cold", lineno);
			u.t_cold = static_cast<int>(detail::parse_int_field(toks[8], "t_cold", lineno));
			u.h_on = static_cast<int>(detail::parse_int_field(toks[9], "h_on", lineno));
			u.h_off = static_cast<int>(detail::parse_int_field(toks[10], "h_off", lineno));
			if (toks[11] != "0" && toks[11] != "1")
				throw DataError("line " + std::to_string(lineno) + ": init_on must be 0 or 1");
			u.init_on = toks[11] == "1";
			u.init_duration =
			    static_cast<int>(detail::parse_int_field(toks[12], "init_duration", lineno));
		} else if (key == "RAMP") {
			if (!saw_n)
				throw DataError("line " + std::to_string(lineno) + ": RAMP before N");
			const auto toks = want_tokens(3);
			const long idx = detail::parse_int_field(toks[0], "unit index", lineno);
			if (idx < 1 || idx > inst.n_units)
				throw DataError("line " + std::to_string(lineno) + ": unit index " +
				                std::to_string(idx) + " out of range 1.." +
				                std::to_string(inst.n_units));
			ramp_seen.resize(inst.n_units, false);
			if (ramp_seen[idx - 1])
				throw DataError("line " + std::to_string(lineno) + ": duplicate RAMP " +
				                std::to_string(idx));
			ramp_seen[idx - 1] = true;
			inst.units.resize(inst.n_units);
			RampParams rp;
			rp.r_up = detail::parse_rat_field(toks[1], "r_up", lineno);
			rp.r_down = detail::parse_rat_field(toks[2], "r_down", lineno);
			inst.units[idx - 1].ramp = rp;
		} else {
			throw DataError("line " + std::to_string(lineno) + ": unknown record '" + key + "'");
		}
	}
	if (!saw_magic)
		throw DataError("missing UC header");
	if (!saw_n || !saw_t || !saw_e)
		throw DataError("missing N, T or E record");
	for (int i = 0; i < inst.n_units; ++i) {
		if (i >= static_cast<int>(unit_seen.size()) || !unit_seen[i])
			throw DataError("missing UNIT " + std::to_string(i + 1));
	}
	for (UnitParams &u : inst.units) {
		if (u.ramp) {
			u.ramp->p_up = u.p_min;
			u.ramp->p_down = u.p_min;
		}
	}
	validate_instance(inst);
	return inst;
}

inline UcInstance parse_instance_text(const std::string &text) {
	std::istringstream in(text);
	return parse_instance(in);
}

inline UcInstance load_instance_file(const std::string &path) {
	std::ifstream in(path);
	if (!in)
		throw DataError("cannot open instance file " + path);
	return parse_instance(in);
}

inline void write_instance(const UcInstance &inst, std::ostream &out) {
	out << "UC 1\n";
	out << "N " << inst.n_units << "\n";
	out << "T " << inst.horizon << "\n";
	out << "E " << to_decimal_string(inst.reserve_factor) << "\n";
	out << "LOAD";
	for (const Rational &r : inst.load)
		out << ' ' << to_decimal_string(r);
	out << "\n";
	for (int i = 0; i < inst.n_units; ++i) {
		const UnitParams &u = inst.units[i];
		out << "UNIT " << (i + 1) << ' ' << to_decimal_string(u.p_min) << ' '
		    << to_decimal_string(u.p_max) << ' ' << to_decimal_string(u.a) << ' '
		    << to_decimal_string(u.b) << ' ' << to_decimal_string(u.c) << ' '
		    << to_decimal_string(u.c_hot) << ' ' << to_decimal_string(u.c_cold) << ' '
		    << u.t_cold << ' ' << u.h_on << ' ' << u.h_off << ' '
		    << (u.init_on ? 1 : 0) << ' ' << u.init_duration << "\n";
	}
	for (int i = 0; i < inst.n_units; ++i) {
		if (inst.units[i].ramp) {
			out << "RAMP " << (i + 1) << ' ' << to_decimal_string(inst.units[i].ramp->r_up)
			    << ' ' << to_decimal_string(inst.units[i].ramp->r_down) << "\n";
		}
	}
}

} // namespace ucsat
