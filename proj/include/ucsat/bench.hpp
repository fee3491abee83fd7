#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ucsat/model.hpp"
#include "ucsat/optimizer.hpp"
#include "ucsat/reduction.hpp"

namespace ucsat {

// Deterministic generator RNG (splitmix64 core, rejection-sampled
// ranges): identical streams on every platform, unlike the standard
// library distributions.
class Rng {
public:
	explicit Rng(uint64_t seed) : s_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

	uint64_t next() {
		uint64_t z = (s_ += 0x9E3779B97F4A7C15ULL);
		z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
		z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
		return z ^ (z >> 31);
	}

	long uniform(long lo, long hi) { // inclusive, unbiased
		const uint64_t n = static_cast<uint64_t>(hi - lo + 1);
		const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
		uint64_t x;
		do {
			x = next();
		} while (x >= limit);
		return lo + static_cast<long>(x % n);
	}

private:
	uint64_t s_;
};

struct IntRange {
	long lo = 0, hi = 0;
};

struct GeneratorConfig {
	int n_units = 2;
	int horizon = 8;
	uint64_t seed = 1;
	bool with_ramp = false;
	IntRange p_min{10, 40};
	IntRange p_max_add{10, 120}; // p_max = p_min + draw
	IntRange a{0, 80};
	IntRange b{1, 30};
	IntRange c_cents{0, 5}; // quadratic coefficient in hundredths
	IntRange c_hot{20, 100};
	IntRange c_cold_add{0, 100}; // c_cold = c_hot + draw
	IntRange t_cold{0, 2};
	IntRange h_on{1, 3};
	IntRange h_off{1, 3};
};

inline std::string instance_name(const GeneratorConfig &cfg) {
	return "unit_" + std::to_string(cfg.n_units) + "_" + std::to_string(cfg.horizon) +
	       (cfg.with_ramp ? "_r" : "");
}

// Every generated instance is feasible by construction: the loads are
// the trace of a hidden all-on dispatch path that respects capacity and
// (when enabled) the ramp rates, the initial off durations allow a cold
// start at period 1, and the reserve factor is capped so total capacity
// always covers it. Ramp rates are grid points of [0.9, 1.1] times half
// of p_max, so the recovered margin lies in [0.9, 1.1] exactly.
inline UcInstance generate_instance(const GeneratorConfig &cfg) {
	if (cfg.n_units < 1 || cfg.horizon < 1)
		throw DataError("generator: need at least one unit and one period");
	Rng rng(cfg.seed ^ (static_cast<uint64_t>(cfg.n_units) << 40) ^
	        (static_cast<uint64_t>(cfg.horizon) << 20) ^ (cfg.with_ramp ? 1 : 0));
	UcInstance inst;
	inst.n_units = cfg.n_units;
	inst.horizon = cfg.horizon;
	inst.units.resize(cfg.n_units);
	std::vector<long> pmin(cfg.n_units), pmax(cfg.n_units), rup(cfg.n_units), rdn(cfg.n_units);
	for (int i = 0; i < cfg.n_units; ++i) {
		UnitParams &u = inst.units[i];
		pmin[i] = rng.uniform(cfg.p_min.lo, cfg.p_min.hi);
		pmax[i] = pmin[i] + rng.uniform(cfg.p_max_add.lo, cfg.p_max_add.hi);
		u.p_min = pmin[i];
		u.p_max = pmax[i];
		u.a = rng.uniform(cfg.a.lo, cfg.a.hi);
		u.b = rng.uniform(cfg.b.lo, cfg.b.hi);
		u.c = Rational(rng.uniform(cfg.c_cents.lo, cfg.c_cents.hi), 100);
		u.c_hot = rng.uniform(cfg.c_hot.lo, cfg.c_hot.hi);
		u.c_cold = u.c_hot + rng.uniform(cfg.c_cold_add.lo, cfg.c_cold_add.hi);
		u.t_cold = static_cast<int>(rng.uniform(cfg.t_cold.lo, cfg.t_cold.hi));
		u.h_on = static_cast<int>(rng.uniform(cfg.h_on.lo, cfg.h_on.hi));
		u.h_off = static_cast<int>(rng.uniform(cfg.h_off.lo, cfg.h_off.hi));
		u.init_on = false;
		u.init_duration = u.h_off + u.t_cold;
		if (cfg.with_ramp) {
			const long lo = (9 * pmax[i] + 19) / 20;  // ceil(0.45 p_max)
			const long hi = (11 * pmax[i]) / 20;      // floor(0.55 p_max)
			rup[i] = lo <= hi ? rng.uniform(lo, hi) : (pmax[i] + 1) / 2;
			rdn[i] = lo <= hi ? rng.uniform(lo, hi) : (pmax[i] + 1) / 2;
			RampParams rp;
			rp.r_up = rup[i];
			rp.r_down = rdn[i];
			rp.p_up = u.p_min;
			rp.p_down = u.p_min;
			u.ramp = rp;
		}
	}
	// Hidden witness dispatch: all units on, powers walking inside their
	// bands; its per-period sums become the loads.
	std::vector<long> p(cfg.n_units);
	for (int i = 0; i < cfg.n_units; ++i)
		p[i] = rng.uniform(pmin[i], pmax[i]);
	long cap_total = 0, load_max = 0;
	for (int i = 0; i < cfg.n_units; ++i)
		cap_total += pmax[i];
	inst.load.reserve(cfg.horizon);
	for (int t = 0; t < cfg.horizon; ++t) {
		if (t > 0) {
			for (int i = 0; i < cfg.n_units; ++i) {
				const long lo = cfg.with_ramp ? std::max(pmin[i], p[i] - rdn[i]) : pmin[i];
				const long hi = cfg.with_ramp ? std::min(pmax[i], p[i] + rup[i]) : pmax[i];
				p[i] = rng.uniform(lo, hi);
			}
		}
		long sum = 0;
		for (int i = 0; i < cfg.n_units; ++i)
			sum += p[i];
		inst.load.push_back(sum);
		load_max = std::max(load_max, sum);
	}
	// Largest reserve factor (hundredths, at most 1.1) that total
	// capacity can honor at the peak load.
	Rational e_cap = load_max > 0 ? Rational(cap_total, load_max) : Rational(11, 10);
	Rational e = Rational(floor_rat(e_cap * 100), 100);
	if (e > Rational(11, 10))
		e = Rational(11, 10);
	inst.reserve_factor = e;
	validate_instance(inst);
	return inst;
}

struct NamedInstance {
	std::string name;
	UcInstance inst;
};

struct SolverConfig {
	std::string label = "default";
	ReduceOptions reduce;
	CmpMode cut_cmp = CmpMode::Binary;
};

struct RunRecord {
	std::string instance;
	std::string config;
	int run = 0; // 1-based
	uint64_t seed = 0;
	OptStatus status = OptStatus::Infeasible;
	bool has_value = false;
	Rational obj_discrete;
	Rational obj_exact;
	long iterations = 0;
	double time_s = 0.0;
	std::string error;
};

struct SuiteOptions {
	int runs = 1;
	std::optional<double> budget_s;
	uint64_t base_seed = 1;
	int workers = 1;
	std::vector<SolverConfig> configs{SolverConfig{}};
};

struct SuiteResult {
	std::vector<RunRecord> records; // config-major, then instance, then run
};

inline const char *opt_status_name(OptStatus s) {
	switch (s) {
	case OptStatus::ProvedOptimal:
		return "optimal";
	case OptStatus::TimeLimitBestKnown:
		return "time_limit";
	case OptStatus::Infeasible:
		return "infeasible";
	}
	return "?";
}

// Fixed worker pool over a fixed task list, results land by task index:
// the record order never depends on scheduling.
inline SuiteResult run_suite(const std::vector<NamedInstance> &instances,
                             const SuiteOptions &opts) {
	const std::size_t per_config = instances.size() * static_cast<std::size_t>(opts.runs);
	const std::size_t total = per_config * opts.configs.size();
	SuiteResult res;
	res.records.assign(total, {});
	std::atomic<std::size_t> cursor{0};
	auto work = [&] {
		for (;;) {
			const std::size_t idx = cursor.fetch_add(1);
			if (idx >= total)
				return;
			const std::size_t ci = idx / per_config;
			const std::size_t rest = idx % per_config;
			const std::size_t ii = rest / opts.runs;
			const int run = static_cast<int>(rest % opts.runs);
			const SolverConfig &cfg = opts.configs[ci];
			RunRecord rec;
			rec.instance = instances[ii].name;
			rec.config = cfg.label;
			rec.run = run + 1;
			Rng mix(opts.base_seed);
			rec.seed = mix.next() ^ (static_cast<uint64_t>(ci) << 48) ^
			           (static_cast<uint64_t>(ii) << 24) ^ static_cast<uint64_t>(run + 1);
			const auto t0 = std::chrono::steady_clock::now();
			try {
				EncodedProblem ep = reduce(instances[ii].inst, cfg.reduce);
				InternalBackend backend(rec.seed);
				OptimizeOptions oo;
				oo.budget_s = opts.budget_s;
				oo.cut_cmp = cfg.cut_cmp;
				const OptimizationResult r = solve_optimal(ep, backend, oo);
				rec.status = r.status;
				rec.iterations = static_cast<long>(r.iterations.size());
				if (r.best) {
					rec.has_value = true;
					rec.obj_discrete = r.best->obj_discrete;
					rec.obj_exact = r.best->obj_exact;
				}
			} catch (const std::exception &e) {
				rec.error = e.what();
			}
			rec.time_s =
			    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
			res.records[idx] = std::move(rec);
		}
	};
	const int nthreads = std::max(1, std::min<int>(opts.workers, static_cast<int>(total)));
	if (nthreads == 1) {
		work();
	} else {
		std::vector<std::thread> pool;
		pool.reserve(nthreads);
		for (int k = 0; k < nthreads; ++k)
			pool.emplace_back(work);
		for (auto &th : pool)
			th.join();
	}
	return res;
}

// Pinned record schema; callers with several configurations write one
// file per configuration to keep it.
inline void write_csv(const std::vector<RunRecord> &records, std::ostream &out) {
	out << "instance,run,seed,status,obj_discrete,obj_exact,iterations,time_s\n";
	for (const RunRecord &r : records) {
		out << r.instance << ',' << r.run << ',' << r.seed << ','
		    << (r.error.empty() ? opt_status_name(r.status) : "error") << ','
		    << (r.has_value ? to_decimal_string(r.obj_discrete) : "") << ','
		    << (r.has_value ? to_decimal_string(r.obj_exact) : "") << ','
		    << r.iterations << ',' << std::fixed << std::setprecision(3) << r.time_s
		    << '\n';
	}
	out.unsetf(std::ios::fixed);
}

// Average rank with ties sharing the mean position; absent values rank
// behind everything.
inline std::vector<double> fractional_ranks(const std::vector<std::optional<double>> &vals) {
	const std::size_t n = vals.size();
	std::vector<std::size_t> order(n);
	for (std::size_t i = 0; i < n; ++i)
		order[i] = i;
	auto key = [&](std::size_t i) {
		return vals[i] ? *vals[i] : std::numeric_limits<double>::infinity();
	};
	std::sort(order.begin(), order.end(),
	          [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
	std::vector<double> ranks(n, 0.0);
	std::size_t i = 0;
	while (i < n) {
		std::size_t j = i;
		while (j + 1 < n && key(order[j + 1]) == key(order[i]))
			++j;
		const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
		for (std::size_t k = i; k <= j; ++k)
			ranks[order[k]] = shared;
		i = j + 1;
	}
	return ranks;
}

// Per instance and configuration: AVG and BEST of the exact objective
// over runs that produced a schedule, then average ranks across
// instances as the closing rows.
inline std::string summary_table(const SuiteResult &res,
                                 const std::vector<SolverConfig> &configs) {
	std::vector<std::string> instances;
	std::map<std::pair<std::string, std::string>, std::vector<double>> values;
	for (const RunRecord &r : res.records) {
		if (std::find(instances.begin(), instances.end(), r.instance) == instances.end())
			instances.push_back(r.instance);
		if (r.has_value)
			values[{r.instance, r.config}].push_back(r.obj_exact.convert_to<double>());
	}
	auto cell = [](std::optional<double> v) {
		if (!v)
			return std::string("-");
		std::ostringstream os;
		os << std::fixed << std::setprecision(2) << *v;
		return os.str();
	};
	std::ostringstream out;
	std::vector<int> width(configs.size());
	for (std::size_t ci = 0; ci < configs.size(); ++ci)
		width[ci] = std::max<int>(14, static_cast<int>(configs[ci].label.size()) + 7);
	out << std::left << std::setw(18) << "instance";
	for (std::size_t ci = 0; ci < configs.size(); ++ci)
		out << std::right << std::setw(width[ci]) << (configs[ci].label + ".avg")
		    << std::setw(width[ci]) << (configs[ci].label + ".best");
	out << '\n';
	std::vector<double> rank_avg_sum(configs.size(), 0.0), rank_best_sum(configs.size(), 0.0);
	for (const std::string &name : instances) {
		std::vector<std::optional<double>> avgs(configs.size()), bests(configs.size());
		for (std::size_t ci = 0; ci < configs.size(); ++ci) {
			const auto it = values.find({name, configs[ci].label});
			if (it == values.end() || it->second.empty())
				continue;
			double sum = 0.0, low = it->second.front();
			for (double v : it->second) {
				sum += v;
				low = std::min(low, v);
			}
			avgs[ci] = sum / static_cast<double>(it->second.size());
			bests[ci] = low;
		}
		const auto ra = fractional_ranks(avgs);
		const auto rb = fractional_ranks(bests);
		out << std::left << std::setw(18) << name;
		for (std::size_t ci = 0; ci < configs.size(); ++ci) {
			out << std::right << std::setw(width[ci]) << cell(avgs[ci])
			    << std::setw(width[ci]) << cell(bests[ci]);
			rank_avg_sum[ci] += ra[ci];
			rank_best_sum[ci] += rb[ci];
		}
		out << '\n';
	}
	if (!instances.empty() && configs.size() > 1) {
		out << std::left << std::setw(18) << "rank.avg";
		for (std::size_t ci = 0; ci < configs.size(); ++ci) {
			std::ostringstream r1;
			r1 << std::fixed << std::setprecision(2)
			   << rank_avg_sum[ci] / static_cast<double>(instances.size());
			out << std::right << std::setw(width[ci]) << r1.str() << std::setw(width[ci])
			    << "";
		}
		out << '\n';
		out << std::left << std::setw(18) << "rank.best";
		for (std::size_t ci = 0; ci < configs.size(); ++ci) {
			std::ostringstream r2;
			r2 << std::fixed << std::setprecision(2)
			   << rank_best_sum[ci] / static_cast<double>(instances.size());
			out << std::right << std::setw(width[ci]) << r2.str() << std::setw(width[ci])
			    << "";
		}
		out << '\n';
	}
	return out.str();
}

} // namespace ucsat
