#pragma once

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ucsat/errors.hpp"

namespace ucsat {

// Signed DIMACS-style literal: +v is the variable, -v its negation.
// Code 0 is reserved for "no literal".
struct Lit {
	int32_t code = 0;

	constexpr Lit() = default;
	constexpr explicit Lit(int32_t c) : code(c) {}

	constexpr int32_t var() const { return code < 0 ? -code : code; }
	constexpr bool positive() const { return code > 0; }
	constexpr Lit operator~() const { return Lit(-code); }
	friend constexpr bool operator==(Lit a, Lit b) { return a.code == b.code; }
	friend constexpr bool operator!=(Lit a, Lit b) { return a.code != b.code; }
};

// Clause store with stable insertion order. Clauses are kept in one
// flat arena; clause k is lits[offsets[k]..offsets[k+1]).
class CnfBuilder {
public:
	CnfBuilder() { offsets_.push_back(0); }

	Lit fresh_var() { return Lit(++nvars_); }

	int var_count() const { return nvars_; }
	std::size_t clause_count() const { return offsets_.size() - 1; }
	std::size_t literal_count() const { return lits_.size(); }

	void add_clause(std::span<const Lit> lits) {
		if (lits.empty())
			throw std::invalid_argument("empty clause");
		for (Lit l : lits) {
			if (l.var() < 1 || l.var() > nvars_)
				throw std::invalid_argument(
				    "clause uses unallocated variable " + std::to_string(l.var()));
		}
		lits_.insert(lits_.end(), lits.begin(), lits.end());
		offsets_.push_back(static_cast<uint32_t>(lits_.size()));
	}

	void add_clause(std::initializer_list<Lit> lits) {
		add_clause(std::span<const Lit>(lits.begin(), lits.size()));
	}

	std::span<const Lit> clause(std::size_t k) const {
		return {lits_.data() + offsets_[k],
		        lits_.data() + offsets_[k + 1]};
	}

	// Lazily allocated constant-true variable, pinned by a unit clause.
	Lit true_lit() {
		if (const_var_ == 0) {
			const_var_ = fresh_var().var();
			add_clause({Lit(const_var_)});
		}
		return Lit(const_var_);
	}
	Lit false_lit() { return ~true_lit(); }

	bool has_const() const { return const_var_ != 0; }
	bool is_true_lit(Lit l) const { return const_var_ != 0 && l.code == const_var_; }
	bool is_false_lit(Lit l) const { return const_var_ != 0 && l.code == -const_var_; }
	bool is_const(Lit l) const { return const_var_ != 0 && l.var() == const_var_; }

	// Exact emission order = insertion order, so equal builds give
	// byte-identical files.
	void export_dimacs(std::ostream &out) const {
		out << "p cnf " << nvars_ << ' ' << clause_count() << '\n';
		char buf[16];
		std::string line;
		for (std::size_t k = 0; k < clause_count(); ++k) {
			line.clear();
			for (Lit l : clause(k)) {
				auto [p, ec] = std::to_chars(buf, buf + sizeof buf, l.code);
				(void)ec;
				line.append(buf, p);
				line.push_back(' ');
			}
			line += "0\n";
			out << line;
		}
	}

private:
	int nvars_ = 0;
	int const_var_ = 0;
	std::vector<Lit> lits_;
	std::vector<uint32_t> offsets_;
};

} // namespace ucsat
