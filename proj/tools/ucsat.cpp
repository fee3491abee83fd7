#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ucsat/bench.hpp"
#include "ucsat/model.hpp"
#include "ucsat/optimizer.hpp"
#include "ucsat/oracle.hpp"
#include "ucsat/reduction.hpp"

using nlohmann::json;
using namespace ucsat;

namespace {

constexpr int kExitOptimal = 0;
constexpr int kExitTimeLimit = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

struct EncodeFlags {
	std::string capacity = "specialized";
	std::string cmp = "binary";
	std::optional<int> frac_bits;
	int cost_frac_bits = 7;
};

ReduceOptions to_reduce_options(const EncodeFlags &f) {
	ReduceOptions r;
	r.capacity = f.capacity == "generic" ? CapacityMode::Generic : CapacityMode::Specialized;
	r.cmp = f.cmp == "tseitin" ? CmpMode::Tseitin : CmpMode::Binary;
	r.power_frac_bits = f.frac_bits;
	r.cost_frac_bits = f.cost_frac_bits;
	return r;
}

void add_encode_flags(CLI::App *cmd, EncodeFlags &f) {
	cmd->add_option("--capacity", f.capacity, "capacity constraint encoding")
	    ->check(CLI::IsMember({"specialized", "generic"}));
	cmd->add_option("--cmp", f.cmp, "comparator encoding")
	    ->check(CLI::IsMember({"binary", "tseitin"}));
	cmd->add_option("--frac-bits", f.frac_bits,
	                "fractional bits of the power grid (default: smallest exact)");
	cmd->add_option("--cost-frac-bits", f.cost_frac_bits,
	                "fractional bits of the cost grid");
}

UcInstance read_instance(const std::string &path) {
	if (path == "-")
		return parse_instance(std::cin);
	return load_instance_file(path);
}

std::unique_ptr<SatBackend> make_backend(const std::string &sel, uint64_t seed) {
	if (sel == "internal")
		return std::make_unique<InternalBackend>(seed);
	if (sel.rfind("exec:", 0) == 0 && sel.size() > 5)
		return std::make_unique<DimacsBackend>(sel.substr(5));
	return nullptr;
}

void print_schedule(const Schedule &s, std::ostream &out) {
	for (std::size_t i = 0; i < s.status.size(); ++i) {
		out << "unit " << (i + 1) << " status:";
		for (uint8_t v : s.status[i])
			out << ' ' << int(v);
		out << "\nunit " << (i + 1) << " power: ";
		for (std::size_t t = 0; t < s.power[i].size(); ++t)
			out << (t ? " " : "") << to_decimal_string(s.power[i][t]);
		out << '\n';
	}
}

json schedule_json(const Schedule &s) {
	json j;
	j["objective_discrete"] = to_decimal_string(s.obj_discrete);
	j["objective_exact"] = to_decimal_string(s.obj_exact);
	json st = json::array(), pw = json::array();
	for (const auto &row : s.status) {
		json r = json::array();
		for (uint8_t v : row)
			r.push_back(int(v));
		st.push_back(std::move(r));
	}
	for (const auto &row : s.power) {
		json r = json::array();
		for (const Rational &v : row)
			r.push_back(to_decimal_string(v));
		pw.push_back(std::move(r));
	}
	j["status_matrix"] = std::move(st);
	j["power_matrix"] = std::move(pw);
	return j;
}

void print_encoding_notes(const EncodedProblem &ep) {
	// rounding entries already land in ep.notes during reduce()
	for (const std::string &n : ep.notes)
		std::cerr << "note: " << n << "\n";
}

struct SolveArgs {
	std::string instance;
	EncodeFlags enc;
	std::string cut_cmp = "binary";
	std::optional<double> time_limit;
	std::string backend = "internal";
	uint64_t seed = 0;
	bool json_out = false;
	bool trace = false;
};

int run_solve(const SolveArgs &args) {
	const UcInstance inst = read_instance(args.instance);
	EncodedProblem ep = reduce(inst, to_reduce_options(args.enc));
	auto backend = make_backend(args.backend, args.seed);
	if (!backend) {
		std::cerr << "unknown backend '" << args.backend << "' (internal | exec:PATH)\n";
		return kExitUsage;
	}
	if (!args.json_out)
		print_encoding_notes(ep);
	OptimizeOptions oo;
	oo.budget_s = args.time_limit;
	oo.cut_cmp = args.cut_cmp == "tseitin" ? CmpMode::Tseitin : CmpMode::Binary;
	if (args.trace)
		oo.on_improvement = [](const Schedule &s, double t) {
			std::cerr << "o " << to_decimal_string(s.obj_discrete) << " t=" << t << "s\n";
		};
	const auto t0 = std::chrono::steady_clock::now();
	const OptimizationResult res = solve_optimal(ep, *backend, oo);
	const double elapsed =
	    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

	if (args.json_out) {
		json j;
		j["status"] = opt_status_name(res.status);
		j["iterations"] = json::array();
		for (const IterationRecord &it : res.iterations)
			j["iterations"].push_back(
			    {{"objective", to_decimal_string(it.objective)}, {"time_s", it.time_s}});
		j["backend_calls"] = res.backend_calls;
		j["stats"] = {{"conflicts", res.total.conflicts},
		              {"decisions", res.total.decisions},
		              {"propagations", res.total.propagations}};
		j["power_frac_bits"] = ep.power_format.frac_bits;
		j["cost_frac_bits"] = ep.costs.frac_bits;
		j["notes"] = ep.notes;
		json rr = json::array();
		for (const CoefficientRounding &r : ep.costs.report)
			rr.push_back({{"name", r.name},
			              {"original", to_decimal_string(r.original)},
			              {"rounded", to_decimal_string(r.rounded)}});
		j["rounding"] = std::move(rr);
		j["vars"] = ep.builder.var_count();
		j["clauses"] = ep.builder.clause_count();
		j["time_s"] = elapsed;
		if (!res.diagnostic.empty())
			j["diagnostic"] = res.diagnostic;
		if (res.best)
			j.update(schedule_json(*res.best));
		std::cout << j.dump(2) << "\n";
	} else {
		std::cout << "status: " << opt_status_name(res.status) << "\n";
		if (res.best) {
			std::cout << "objective: " << to_decimal_string(res.best->obj_exact)
			          << "\ndiscrete objective: " << to_decimal_string(res.best->obj_discrete)
			          << "\n";
		}
		std::cout << "iterations: " << res.iterations.size()
		          << "\nbackend calls: " << res.backend_calls
		          << "\nconflicts: " << res.total.conflicts << "\ntime: " << std::fixed
		          << std::setprecision(3) << elapsed << " s\n";
		std::cout.unsetf(std::ios::fixed);
		if (!res.diagnostic.empty())
			std::cout << "diagnostic: " << res.diagnostic << "\n";
		if (res.best)
			print_schedule(*res.best, std::cout);
	}
	switch (res.status) {
	case OptStatus::ProvedOptimal:
		return kExitOptimal;
	case OptStatus::TimeLimitBestKnown:
		return kExitTimeLimit;
	case OptStatus::Infeasible:
		return kExitInfeasible;
	}
	return kExitInternal;
}

struct EncodeArgs {
	std::string instance;
	EncodeFlags enc;
	std::string output = "-";
	std::string map_path;
};

int run_encode(const EncodeArgs &args) {
	const UcInstance inst = read_instance(args.instance);
	EncodedProblem ep = reduce(inst, to_reduce_options(args.enc));
	if (args.output == "-") {
		ep.builder.export_dimacs(std::cout);
	} else {
		std::ofstream f(args.output, std::ios::binary);
		if (!f)
			throw DataError("cannot open output file: " + args.output);
		ep.builder.export_dimacs(f);
	}
	if (!args.map_path.empty()) {
		std::ofstream f(args.map_path, std::ios::binary);
		if (!f)
			throw DataError("cannot open map file: " + args.map_path);
		export_var_map(ep, f);
	}
	std::cerr << "vars " << ep.builder.var_count() << " clauses " << ep.builder.clause_count()
	          << " literals " << ep.builder.literal_count() << "\n";
	for (const TagStats &ts : ep.tag_stats)
		std::cerr << "  " << ts.tag << ": vars " << ts.vars << " clauses " << ts.clauses
		          << "\n";
	print_encoding_notes(ep);
	return 0;
}

struct GenArgs {
	GeneratorConfig cfg;
	std::string output = "-";
};

int run_gen(const GenArgs &args) {
	const UcInstance inst = generate_instance(args.cfg);
	std::ostringstream body;
	body << "# " << instance_name(args.cfg) << " seed " << args.cfg.seed << "\n";
	write_instance(inst, body);
	if (args.output == "-") {
		std::cout << body.str();
	} else {
		std::ofstream f(args.output, std::ios::binary);
		if (!f)
			throw DataError("cannot open output file: " + args.output);
		f << body.str();
	}
	return 0;
}

std::optional<SolverConfig> parse_config_token(const std::string &token,
                                               const std::optional<int> &frac_bits,
                                               int cost_frac_bits) {
	const auto dash = token.find('-');
	if (dash == std::string::npos)
		return std::nullopt;
	const std::string cap = token.substr(0, dash), cmp = token.substr(dash + 1);
	SolverConfig sc;
	sc.label = token;
	if (cap == "specialized")
		sc.reduce.capacity = CapacityMode::Specialized;
	else if (cap == "generic")
		sc.reduce.capacity = CapacityMode::Generic;
	else
		return std::nullopt;
	if (cmp == "binary")
		sc.reduce.cmp = CmpMode::Binary;
	else if (cmp == "tseitin")
		sc.reduce.cmp = CmpMode::Tseitin;
	else
		return std::nullopt;
	sc.reduce.power_frac_bits = frac_bits;
	sc.reduce.cost_frac_bits = cost_frac_bits;
	sc.cut_cmp = sc.reduce.cmp;
	return sc;
}

struct BenchArgs {
	std::vector<std::string> grids;
	bool ramp = false;
	std::vector<std::string> files;
	int runs = 1;
	std::optional<double> budget;
	int workers = 1;
	uint64_t seed = 1;
	std::vector<std::string> config_tokens{"specialized-binary"};
	std::string csv_prefix;
	std::optional<int> frac_bits;
	int cost_frac_bits = 7;
};

int run_bench(const BenchArgs &args) {
	std::vector<NamedInstance> instances;
	for (const std::string &g : args.grids) {
		const auto x = g.find('x');
		if (x == std::string::npos)
			throw DataError("bad grid '" + g + "', expected NxT");
		GeneratorConfig cfg;
		try {
			cfg.n_units = std::stoi(g.substr(0, x));
			cfg.horizon = std::stoi(g.substr(x + 1));
		} catch (const std::exception &) {
			throw DataError("bad grid '" + g + "', expected NxT");
		}
		cfg.seed = args.seed;
		cfg.with_ramp = args.ramp;
		instances.push_back({instance_name(cfg), generate_instance(cfg)});
	}
	for (const std::string &path : args.files)
		instances.push_back(
		    {std::filesystem::path(path).stem().string(), load_instance_file(path)});
	if (instances.empty())
		throw DataError("bench: no instances (use --grid or --instance)");

	SuiteOptions so;
	so.runs = args.runs;
	so.budget_s = args.budget;
	so.base_seed = args.seed;
	so.workers = args.workers;
	so.configs.clear();
	for (const std::string &tok : args.config_tokens) {
		const auto sc = parse_config_token(tok, args.frac_bits, args.cost_frac_bits);
		if (!sc) {
			std::cerr << "unknown config '" << tok
			          << "' (capacity-cmp, e.g. specialized-binary)\n";
			return kExitUsage;
		}
		so.configs.push_back(*sc);
	}

	const SuiteResult res = run_suite(instances, so);
	std::cout << summary_table(res, so.configs);
	if (!args.csv_prefix.empty()) {
		for (const SolverConfig &cfg : so.configs) {
			std::vector<RunRecord> mine;
			for (const RunRecord &r : res.records)
				if (r.config == cfg.label)
					mine.push_back(r);
			const std::string path = so.configs.size() == 1
			                             ? args.csv_prefix + ".csv"
			                             : args.csv_prefix + "-" + cfg.label + ".csv";
			std::ofstream f(path, std::ios::binary);
			if (!f)
				throw DataError("cannot open csv file: " + path);
			write_csv(mine, f);
			std::cerr << "wrote " << path << "\n";
		}
	}
	for (const RunRecord &r : res.records)
		if (!r.error.empty())
			std::cerr << r.instance << " run " << r.run << " (" << r.config
			          << "): " << r.error << "\n";
	return 0;
}

struct OracleArgs {
	std::string instance;
	std::optional<int> frac_bits;
	int cost_frac_bits = 7;
	uint64_t max_points = 50'000'000;
	bool json_out = false;
};

int run_oracle(const OracleArgs &args) {
	const UcInstance inst = read_instance(args.instance);
	OracleOptions oo;
	oo.max_points = args.max_points;
	oo.power_frac_bits = args.frac_bits;
	oo.cost_frac_bits = args.cost_frac_bits;
	const OracleResult r = oracle_solve(inst, oo);
	if (args.json_out) {
		json j;
		j["feasible"] = r.feasible;
		j["matrices"] = r.matrices;
		j["points"] = r.points;
		if (r.feasible)
			j.update(schedule_json(r.best));
		std::cout << j.dump(2) << "\n";
	} else if (r.feasible) {
		std::cout << "objective: " << to_decimal_string(r.best.obj_exact)
		          << "\ndiscrete objective: " << to_decimal_string(r.best.obj_discrete)
		          << "\n";
		print_schedule(r.best, std::cout);
	} else {
		std::cout << "infeasible\n";
	}
	return r.feasible ? kExitOptimal : kExitInfeasible;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"unit commitment scheduling by reduction to propositional satisfiability"};
	app.require_subcommand(1);

	SolveArgs sargs;
	CLI::App *solve_cmd = app.add_subcommand("solve", "find a cost-optimal schedule");
	solve_cmd->add_option("--instance", sargs.instance, "instance file, - for stdin")
	    ->required();
	add_encode_flags(solve_cmd, sargs.enc);
	solve_cmd->add_option("--cut-cmp", sargs.cut_cmp, "comparator for objective cuts")
	    ->check(CLI::IsMember({"binary", "tseitin"}));
	solve_cmd->add_option("--time-limit", sargs.time_limit, "budget in seconds");
	solve_cmd->add_option("--backend", sargs.backend, "internal | exec:PATH");
	solve_cmd->add_option("--seed", sargs.seed, "internal backend seed");
	solve_cmd->add_flag("--json", sargs.json_out, "machine readable output");
	solve_cmd->add_flag("--trace", sargs.trace, "print each improvement to stderr");

	EncodeArgs eargs;
	CLI::App *encode_cmd = app.add_subcommand("encode", "emit the CNF without solving");
	encode_cmd->add_option("--instance", eargs.instance, "instance file, - for stdin")
	    ->required();
	add_encode_flags(encode_cmd, eargs.enc);
	encode_cmd->add_option("--output", eargs.output, "CNF path, - for stdout");
	encode_cmd->add_option("--map", eargs.map_path, "variable map path");

	GenArgs gargs;
	CLI::App *gen_cmd = app.add_subcommand("gen", "generate a random feasible instance");
	gen_cmd->add_option("--units", gargs.cfg.n_units, "unit count");
	gen_cmd->add_option("--horizon", gargs.cfg.horizon, "period count");
	gen_cmd->add_option("--seed", gargs.cfg.seed, "generator seed");
	gen_cmd->add_flag("--ramp", gargs.cfg.with_ramp, "add ramp rate limits");
	gen_cmd->add_option("--output", gargs.output, "instance path, - for stdout");

	BenchArgs bargs;
	CLI::App *bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
	bench_cmd->add_option("--grid", bargs.grids, "generated instance NxT (repeatable)");
	bench_cmd->add_flag("--ramp", bargs.ramp, "generated instances get ramp limits");
	bench_cmd->add_option("--instance", bargs.files, "instance file (repeatable)");
	bench_cmd->add_option("--runs", bargs.runs, "runs per instance and config")
	    ->check(CLI::PositiveNumber);
	bench_cmd->add_option("--budget", bargs.budget, "per-run budget in seconds");
	bench_cmd->add_option("--workers", bargs.workers, "worker threads")
	    ->check(CLI::PositiveNumber);
	bench_cmd->add_option("--seed", bargs.seed, "base seed");
	bench_cmd->add_option("--configs", bargs.config_tokens,
	                      "capacity-cmp tokens, e.g. specialized-binary generic-tseitin");
	bench_cmd->add_option("--csv", bargs.csv_prefix, "CSV path prefix");
	bench_cmd->add_option("--frac-bits", bargs.frac_bits, "power grid fractional bits");
	bench_cmd->add_option("--cost-frac-bits", bargs.cost_frac_bits,
	                      "cost grid fractional bits");

	OracleArgs oargs;
	CLI::App *oracle_cmd =
	    app.add_subcommand("oracle", "exhaustive reference solver for tiny instances");
	oracle_cmd->add_option("--instance", oargs.instance, "instance file, - for stdin")
	    ->required();
	oracle_cmd->add_option("--frac-bits", oargs.frac_bits, "power grid fractional bits");
	oracle_cmd->add_option("--cost-frac-bits", oargs.cost_frac_bits,
	                       "cost grid fractional bits");
	oracle_cmd->add_option("--max-points", oargs.max_points, "work ceiling");
	oracle_cmd->add_flag("--json", oargs.json_out, "machine readable output");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : kExitUsage;
	}

	try {
		if (solve_cmd->parsed())
			return run_solve(sargs);
		if (encode_cmd->parsed())
			return run_encode(eargs);
		if (gen_cmd->parsed())
			return run_gen(gargs);
		if (bench_cmd->parsed())
			return run_bench(bargs);
		if (oracle_cmd->parsed())
			return run_oracle(oargs);
	} catch (const DataError &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitData;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kExitInternal;
	}
	return kExitUsage;
}
