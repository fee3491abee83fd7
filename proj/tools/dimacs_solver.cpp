#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ucsat/sat/solver.hpp"

// DIMACS CNF front end for the bundled CDCL core. Reads a file (or
// stdin), prints the s line and, when satisfiable, v lines with every
// variable's polarity. Exit 10 sat, 20 unsat.
int main(int argc, char **argv) {
	uint64_t seed = 0;
	const char *path = nullptr;
	for (int i = 1; i < argc; ++i) {
		const std::string a = argv[i];
		if (a == "--seed" && i + 1 < argc) {
			seed = std::strtoull(argv[++i], nullptr, 10);
		} else if (a == "--help" || a == "-h") {
			std::cout << "usage: dimacs_solver [--seed N] [file.cnf]\n";
			return 0;
		} else {
			path = argv[i];
		}
	}
	std::ifstream file;
	std::istream *in = &std::cin;
	if (path) {
		file.open(path);
		if (!file) {
			std::cerr << "cannot open " << path << "\n";
			return 1;
		}
		in = &file;
	}

	ucsat::CdclSolver solver(seed);
	std::vector<ucsat::Lit> clause;
	std::string tok;
	bool empty_clause = false;
	while (*in >> tok) {
		if (tok[0] == 'c' || tok[0] == 'p') {
			std::string rest;
			std::getline(*in, rest);
			continue;
		}
		long v;
		try {
			v = std::stol(tok);
		} catch (const std::exception &) {
			std::cerr << "bad token '" << tok << "'\n";
			return 1;
		}
		if (v == 0) {
			if (clause.empty())
				empty_clause = true;
			else
				solver.add_clause(clause);
			clause.clear();
		} else {
			const int var = static_cast<int>(v < 0 ? -v : v);
			solver.ensure_vars(var);
			clause.push_back(ucsat::Lit{static_cast<int32_t>(v)});
		}
	}
	if (!clause.empty())
		solver.add_clause(clause);

	if (empty_clause) {
		std::cout << "s UNSATISFIABLE\n";
		return 20;
	}
	switch (solver.solve()) {
	case ucsat::SatResult::Sat: {
		std::cout << "s SATISFIABLE\n";
		int on_line = 0;
		for (int var = 1; var <= solver.var_count(); ++var) {
			if (on_line == 0)
				std::cout << 'v';
			std::cout << ' ' << (solver.model_value(var) ? var : -var);
			if (++on_line == 25) {
				std::cout << '\n';
				on_line = 0;
			}
		}
		if (on_line)
			std::cout << '\n';
		std::cout << "v 0\n";
		return 10;
	}
	case ucsat::SatResult::Unsat:
		std::cout << "s UNSATISFIABLE\n";
		return 20;
	case ucsat::SatResult::Unknown:
		break;
	}
	std::cout << "s UNKNOWN\n";
	return 0;
}
