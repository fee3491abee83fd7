#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ucsat/cnf.hpp"

namespace ucsat {

struct PropagationCheck {
	bool conflict = false;
	std::size_t satisfied_clauses = 0;
	std::size_t clause_total = 0;
	std::vector<int8_t> value; // per var: -1 false, 0 unassigned, 1 true

	// True when propagation alone finished the job: no decisions needed.
	bool all_satisfied() const {
		return !conflict && satisfied_clauses == clause_total;
	}
};

// Unit propagation to fixpoint from the given assumptions, no decisions.
// Deliberately naive (repeated full scans): this is a measuring
// instrument, not a solver.
inline PropagationCheck propagate_only(const CnfBuilder &cnf,
                                       std::span<const Lit> assumptions) {
	PropagationCheck r;
	r.clause_total = cnf.clause_count();
	r.value.assign(static_cast<std::size_t>(cnf.var_count()) + 1, 0);
	auto val = [&](Lit l) -> int {
		const int8_t v = r.value[l.var()];
		return l.code > 0 ? v : -v;
	};
	for (Lit a : assumptions) {
		if (val(a) == -1) {
			r.conflict = true;
			return r;
		}
		r.value[a.var()] = a.code > 0 ? 1 : -1;
	}
	bool changed = true;
	while (changed && !r.conflict) {
		changed = false;
		for (std::size_t k = 0; k < cnf.clause_count(); ++k) {
			Lit unassigned(0);
			int free_count = 0;
			bool sat = false;
			for (Lit l : cnf.clause(k)) {
				const int v = val(l);
				if (v == 1) {
					sat = true;
					break;
				}
				if (v == 0) {
					++free_count;
					unassigned = l;
				}
			}
			if (sat)
				continue;
			if (free_count == 0) {
				r.conflict = true;
				break;
			}
			if (free_count == 1) {
				r.value[unassigned.var()] = unassigned.code > 0 ? 1 : -1;
				changed = true;
			}
		}
	}
	if (r.conflict)
		return r;
	for (std::size_t k = 0; k < cnf.clause_count(); ++k) {
		for (Lit l : cnf.clause(k)) {
			if (val(l) == 1) {
				++r.satisfied_clauses;
				break;
			}
		}
	}
	return r;
}

} // namespace ucsat
