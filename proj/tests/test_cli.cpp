#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "ucsat/model.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
	int exit_code = -1;
	std::string out, err;
};

std::string slurp(const fs::path &p) {
	std::ifstream f(p, std::ios::binary);
	std::ostringstream s;
	s << f.rdbuf();
	return s.str();
}

fs::path scratch_dir() {
	static const fs::path dir = [] {
		fs::path d = fs::temp_directory_path() /
		             ("ucsat_cli_test_" + std::to_string(::getpid()));
		fs::create_directories(d);
		return d;
	}();
	return dir;
}

CmdResult run_cmd(const std::string &cmd) {
	static std::atomic<int> k{0};
	const int id = k++;
	const fs::path outp = scratch_dir() / ("out_" + std::to_string(id));
	const fs::path errp = scratch_dir() / ("err_" + std::to_string(id));
	const std::string full = cmd + " >" + outp.string() + " 2>" + errp.string();
	const int rc = std::system(full.c_str());
	CmdResult r;
	r.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
	r.out = slurp(outp);
	r.err = slurp(errp);
	return r;
}

std::string tool() {
	const char *bin = std::getenv("UCSAT_BIN");
	REQUIRE(bin);
	return std::string("'") + bin + "'";
}

fs::path write_file(const std::string &name, const std::string &content) {
	const fs::path p = scratch_dir() / name;
	std::ofstream f(p, std::ios::binary);
	f << content;
	return p;
}

const char *kTinyInstance = "UC 1\nN 2\nT 2\nE 1\nLOAD 6 8\n"
                            "UNIT 1 1 5 2 1 0 3 4 1 1 1 0 1\n"
                            "UNIT 2 1 6 1 2 0.5 2 2 0 1 1 1 2\n";

} // namespace

TEST_CASE("instances can be generated, solved and cross-checked", "[cli]") {
	const fs::path inst = scratch_dir() / "gen.uc";
	const CmdResult gen =
	    run_cmd(tool() + " gen --units 2 --horizon 3 --seed 7 --output " + inst.string());
	REQUIRE(gen.exit_code == 0);
	CHECK(ucsat::load_instance_file(inst.string()).n_units == 2);

	const CmdResult solve = run_cmd(tool() + " solve --instance " + inst.string() + " --json");
	REQUIRE(solve.exit_code == 0);
	const json s = json::parse(solve.out);
	CHECK(s["status"] == "optimal");
	REQUIRE(s.contains("objective_discrete"));

	const CmdResult oracle =
	    run_cmd(tool() + " oracle --instance " + inst.string() + " --json");
	REQUIRE(oracle.exit_code == 0);
	const json o = json::parse(oracle.out);
	CHECK(o["feasible"] == true);
	CHECK(o["objective_discrete"] == s["objective_discrete"]);
}

TEST_CASE("solving reads from standard input", "[cli]") {
	const fs::path inst = write_file("stdin.uc", kTinyInstance);
	const CmdResult r =
	    run_cmd(tool() + " solve --instance - --json < " + inst.string());
	REQUIRE(r.exit_code == 0);
	CHECK(json::parse(r.out)["status"] == "optimal");
}

TEST_CASE("exit codes separate outcome classes", "[cli]") {
	const fs::path inst = write_file("tiny.uc", kTinyInstance);
	CHECK(run_cmd(tool() + " solve --instance " + inst.string()).exit_code == 0);
	CHECK(run_cmd(tool() + " solve --instance " + inst.string() + " --time-limit 0")
	          .exit_code == 2);
	const fs::path bad = write_file(
	    "impossible.uc", "UC 1\nN 1\nT 1\nE 0\nLOAD 10\nUNIT 1 1 5 0 1 0 0 0 0 1 1 1 1\n");
	CHECK(run_cmd(tool() + " solve --instance " + bad.string()).exit_code == 3);
	CHECK(run_cmd(tool() + " frobnicate").exit_code == 64);
	CHECK(run_cmd(tool() + " solve --instance " + inst.string() + " --capacity bogus")
	          .exit_code == 64);
	CHECK(run_cmd(tool() + " solve --instance /no/such/file.uc").exit_code == 65);
	const fs::path malformed = write_file("broken.uc", "UC 2\n");
	CHECK(run_cmd(tool() + " solve --instance " + malformed.string()).exit_code == 65);
	CHECK(run_cmd(tool() + " oracle --instance " + bad.string()).exit_code == 3);
}

TEST_CASE("formula export is reproducible and mapped", "[cli]") {
	const fs::path inst = write_file("enc.uc", kTinyInstance);
	const fs::path map = scratch_dir() / "enc.map";
	const CmdResult a = run_cmd(tool() + " encode --instance " + inst.string() + " --map " +
	                            map.string());
	REQUIRE(a.exit_code == 0);
	CHECK(a.out.rfind("p cnf ", 0) == 0);
	CHECK(a.err.find("vars ") != std::string::npos);
	const std::string mapped = slurp(map);
	CHECK(mapped.rfind("S 1 1 ", 0) == 0);
	CHECK(mapped.find("\nO 0 ") != std::string::npos);
	const CmdResult b = run_cmd(tool() + " encode --instance " + inst.string());
	CHECK(a.out == b.out);
	const CmdResult t = run_cmd(tool() + " encode --instance " + inst.string() +
	                            " --cmp tseitin --capacity generic");
	CHECK(t.exit_code == 0);
	CHECK(t.out != a.out);
}

TEST_CASE("an external solver binary can do the searching", "[cli]") {
	const char *dimacs = std::getenv("DIMACS_BIN");
	if (!dimacs || !*dimacs) {
		WARN("DIMACS_BIN not set, skipping the external backend run");
		return;
	}
	const fs::path inst = write_file("ext.uc", kTinyInstance);
	const CmdResult internal =
	    run_cmd(tool() + " solve --instance " + inst.string() + " --json");
	const CmdResult external = run_cmd(tool() + " solve --instance " + inst.string() +
	                                   " --json --backend exec:" + std::string(dimacs));
	REQUIRE(internal.exit_code == 0);
	REQUIRE(external.exit_code == 0);
	CHECK(json::parse(internal.out)["objective_discrete"] ==
	      json::parse(external.out)["objective_discrete"]);
}

TEST_CASE("the solver protocol tool answers on files and exit codes", "[cli]") {
	const char *dimacs = std::getenv("DIMACS_BIN");
	if (!dimacs || !*dimacs) {
		WARN("DIMACS_BIN not set, skipping the protocol check");
		return;
	}
	const fs::path sat = write_file("sat.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
	const CmdResult a = run_cmd(std::string("'") + dimacs + "' " + sat.string());
	CHECK(a.exit_code == 10);
	CHECK(a.out.find("s SATISFIABLE") != std::string::npos);
	CHECK(a.out.find("v ") != std::string::npos);
	const fs::path unsat = write_file("unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
	const CmdResult b = run_cmd(std::string("'") + dimacs + "' " + unsat.string());
	CHECK(b.exit_code == 20);
	CHECK(b.out.find("s UNSATISFIABLE") != std::string::npos);
}

TEST_CASE("benchmark runs write summaries and per-run records", "[cli]") {
	const fs::path prefix = scratch_dir() / "bench";
	const CmdResult r = run_cmd(tool() +
	                            " bench --grid 2x3 --runs 2 --workers 2 --seed 3 --csv " +
	                            prefix.string());
	REQUIRE(r.exit_code == 0);
	CHECK(r.out.find("unit_2_3") != std::string::npos);
	const std::string csv = slurp(prefix.string() + ".csv");
	CHECK(csv.rfind("instance,run,seed,status,", 0) == 0);
	CHECK(csv.find("unit_2_3,1,") != std::string::npos);
	CHECK(csv.find("unit_2_3,2,") != std::string::npos);

	const CmdResult two = run_cmd(
	    tool() + " bench --grid 2x3 --seed 3 --configs specialized-binary generic-tseitin --csv " +
	    prefix.string());
	REQUIRE(two.exit_code == 0);
	CHECK(fs::exists(prefix.string() + "-specialized-binary.csv"));
	CHECK(fs::exists(prefix.string() + "-generic-tseitin.csv"));
	CHECK(two.out.find("rank.avg") != std::string::npos);
}
