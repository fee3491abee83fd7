#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ucsat/cnf.hpp"

namespace ucsat {

enum class SatResult { Sat, Unsat, Unknown };

// Conflict-driven clause learning over watched literals: 1UIP learning
// with local minimization, VSIDS decisions, phase saving, Luby restarts,
// LBD-based learnt clause reduction. Clauses only ever get added, so a
// solver object can be reused across the cut loop and keeps what it
// learned. A nonzero seed perturbs initial activities and phases.
class CdclSolver {
	using CRef = uint32_t;
	static constexpr CRef CREF_NONE = UINT32_MAX;

public:
	explicit CdclSolver(uint64_t seed = 0) : rng_state_(seed), seeded_(seed != 0) {
		ensure_vars(0);
	}

	void ensure_vars(int n) {
		while (nvars_ < n) {
			const int v = ++nvars_;
			val_.push_back(0);
			level_.push_back(0);
			reason_.push_back(CREF_NONE);
			phase_.push_back(seeded_ ? static_cast<uint8_t>(rng_next() & 1) : 0);
			activity_.push_back(seeded_ ? 1e-6 * static_cast<double>(rng_next() >> 40) : 0.0);
			seen_.push_back(0);
			(void)v;
		}
		val_.resize(static_cast<std::size_t>(nvars_) + 1);
		watches_.resize(2 * static_cast<std::size_t>(nvars_) + 2);
		heap_pos_.resize(static_cast<std::size_t>(nvars_) + 1, -1);
		for (int v = heap_known_ + 1; v <= nvars_; ++v)
			heap_insert(v);
		heap_known_ = nvars_;
	}

	int var_count() const { return nvars_; }
	uint64_t conflicts() const { return conflicts_; }
	uint64_t decisions() const { return decisions_; }
	uint64_t propagations() const { return propagations_; }

	// Clauses are simplified against the level-0 trail on entry; a clause
	// that empties out makes the solver permanently unsat.
	void add_clause(std::span<const Lit> lits) {
		assert(decision_level() == 0);
		int maxv = 0;
		for (Lit l : lits)
			maxv = std::max(maxv, static_cast<int>(l.var()));
		ensure_vars(maxv);
		if (!ok_)
			return;
		tmp_clause_.assign(lits.begin(), lits.end());
		std::sort(tmp_clause_.begin(), tmp_clause_.end(),
		          [](Lit a, Lit b) { return a.var() != b.var() ? a.var() < b.var() : a.code < b.code; });
		std::size_t out = 0;
		Lit prev(0);
		for (Lit l : tmp_clause_) {
			if (l == prev)
				continue;
			if (l == ~prev)
				return; // tautology
			const int v = value(l);
			if (v == 1)
				return; // satisfied at level 0
			if (v == -1)
				continue; // falsified at level 0, drop
			tmp_clause_[out++] = l;
			prev = l;
		}
		tmp_clause_.resize(out);
		if (tmp_clause_.empty()) {
			ok_ = false;
			return;
		}
		if (tmp_clause_.size() == 1) {
			enqueue(tmp_clause_[0], CREF_NONE);
			if (propagate() != CREF_NONE)
				ok_ = false;
			return;
		}
		const CRef c = store_clause(tmp_clause_, false, 0);
		attach(c);
	}

	SatResult solve(std::optional<double> budget_s = {}) {
		if (!ok_)
			return SatResult::Unsat;
		const bool timed = budget_s.has_value();
		const auto deadline = std::chrono::steady_clock::now() +
		    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
		        std::chrono::duration<double>(timed ? *budget_s : 0.0));
		if (timed && *budget_s <= 0.0)
			return SatResult::Unknown;

		uint64_t restart_seq = 0;
		uint64_t restart_bound = luby(restart_seq) * restart_unit_;
		uint64_t conflicts_here = 0;

		for (;;) {
			const CRef confl = propagate();
			if (confl != CREF_NONE) {
				++conflicts_;
				++conflicts_here;
				if (decision_level() == 0) {
					ok_ = false;
					return SatResult::Unsat;
				}
				int btlevel = 0;
				int lbd = 0;
				analyze(confl, learnt_, btlevel, lbd);
				cancel_until(btlevel);
				if (learnt_.size() == 1) {
					enqueue(learnt_[0], CREF_NONE);
				} else {
					const CRef c = store_clause(learnt_, true, lbd);
					attach(c);
					learnts_.push_back(c);
					enqueue(learnt_[0], c);
				}
				var_inc_ *= (1.0 / 0.95);
				if ((conflicts_ & 255) == 0 && timed &&
				    std::chrono::steady_clock::now() >= deadline) {
					cancel_until(0);
					return SatResult::Unknown;
				}
				if (conflicts_ >= next_reduce_)
					reduce_db();
			} else {
				if (conflicts_here >= restart_bound) {
					conflicts_here = 0;
					restart_bound = luby(++restart_seq) * restart_unit_;
					cancel_until(0);
					continue;
				}
				if (!decide()) {
					model_.assign(static_cast<std::size_t>(nvars_) + 1, 0);
					for (int v = 1; v <= nvars_; ++v)
						model_[v] = (val_[v] == 1);
					cancel_until(0);
					return SatResult::Sat;
				}
			}
		}
	}

	// Valid after the last solve() returned Sat.
	const std::vector<uint8_t> &model() const { return model_; }
	bool model_value(int var) const { return model_[var] != 0; }

private:
	struct Watch {
		CRef cref;
		int32_t blocker;
	};

	// Arena clause layout: [size][info][lit codes...]; info packs the
	// learned bit, the dead bit and the LBD.
	static constexpr int32_t INFO_LEARNT = 1;
	static constexpr int32_t INFO_DEAD = 2;

	int clause_size(CRef c) const { return arena_[c]; }
	int32_t *clause_lits(CRef c) { return arena_.data() + c + 2; }
	const int32_t *clause_lits(CRef c) const { return arena_.data() + c + 2; }
	bool clause_learnt(CRef c) const { return arena_[c + 1] & INFO_LEARNT; }
	bool clause_dead(CRef c) const { return arena_[c + 1] & INFO_DEAD; }
	int clause_lbd(CRef c) const { return arena_[c + 1] >> 2; }

	CRef store_clause(const std::vector<Lit> &lits, bool learnt, int lbd) {
		const CRef c = static_cast<CRef>(arena_.size());
		arena_.push_back(static_cast<int32_t>(lits.size()));
		arena_.push_back((learnt ? INFO_LEARNT : 0) | (std::min(lbd, 1 << 20) << 2));
		for (Lit l : lits)
			arena_.push_back(l.code);
		return c;
	}

	static std::size_t widx(Lit l) {
		return 2 * static_cast<std::size_t>(l.var()) + (l.code < 0 ? 1 : 0);
	}

	void attach(CRef c) {
		const int32_t *cl = clause_lits(c);
		watches_[widx(Lit(cl[0]))].push_back({c, cl[1]});
		watches_[widx(Lit(cl[1]))].push_back({c, cl[0]});
	}

	void detach(CRef c) {
		const int32_t *cl = clause_lits(c);
		for (int k = 0; k < 2; ++k) {
			auto &ws = watches_[widx(Lit(cl[k]))];
			for (std::size_t i = 0; i < ws.size(); ++i) {
				if (ws[i].cref == c) {
					ws[i] = ws.back();
					ws.pop_back();
					break;
				}
			}
		}
	}

	int value(Lit l) const {
		const int8_t v = val_[l.var()];
		return l.code > 0 ? v : -v;
	}
	int value_code(int32_t code) const { return value(Lit(code)); }

	int decision_level() const { return static_cast<int>(trail_lim_.size()); }

	void enqueue(Lit l, CRef reason) {
		assert(value(l) == 0);
		const int v = l.var();
		val_[v] = l.code > 0 ? 1 : -1;
		level_[v] = decision_level();
		reason_[v] = reason;
		trail_.push_back(l);
	}

	CRef propagate() {
		CRef confl = CREF_NONE;
		while (qhead_ < trail_.size()) {
			const Lit p = trail_[qhead_++];
			++propagations_;
			auto &ws = watches_[widx(~p)];
			std::size_t i = 0, j = 0;
			while (i < ws.size()) {
				const Watch w = ws[i];
				if (value_code(w.blocker) == 1) {
					ws[j++] = w;
					++i;
					continue;
				}
				const CRef c = w.cref;
				int32_t *cl = clause_lits(c);
				const int sz = clause_size(c);
				const int32_t np = (~p).code;
				if (cl[0] == np)
					std::swap(cl[0], cl[1]);
				assert(cl[1] == np);
				const Lit first(cl[0]);
				if (value(first) == 1) {
					ws[j++] = {c, cl[0]};
					++i;
					continue;
				}
				int k = 2;
				while (k < sz && value_code(cl[k]) == -1)
					++k;
				if (k < sz) {
					std::swap(cl[1], cl[k]);
					watches_[widx(Lit(cl[1]))].push_back({c, cl[0]});
					++i;
					continue;
				}
				ws[j++] = {c, cl[0]};
				++i;
				if (value(first) == -1) {
					confl = c;
					qhead_ = trail_.size();
					break;
				}
				enqueue(first, c);
			}
			while (i < ws.size())
				ws[j++] = ws[i++];
			ws.resize(j);
			if (confl != CREF_NONE)
				break;
		}
		return confl;
	}

	// 1UIP with local minimization. Reason clauses keep their asserted
	// literal at position 0, which propagate() preserves for locked clauses.
	void analyze(CRef confl, std::vector<Lit> &out, int &btlevel, int &lbd) {
		out.clear();
		out.push_back(Lit(0));
		int pathc = 0;
		Lit p(0);
		std::size_t idx = trail_.size();
		toclear_.clear();
		do {
			assert(confl != CREF_NONE);
			const int sz = clause_size(confl);
			const int32_t *cl = clause_lits(confl);
			for (int k = (p.code == 0 ? 0 : 1); k < sz; ++k) {
				const Lit q(cl[k]);
				const int v = q.var();
				if (!seen_[v] && level_[v] > 0) {
					seen_[v] = 1;
					toclear_.push_back(v);
					bump_var(v);
					if (level_[v] >= decision_level())
						++pathc;
					else
						out.push_back(q);
				}
			}
			while (!seen_[trail_[idx - 1].var()])
				--idx;
			--idx;
			p = trail_[idx];
			confl = reason_[p.var()];
			seen_[p.var()] = 0;
			--pathc;
		} while (pathc > 0);
		out[0] = ~p;

		std::size_t keep = 1;
		for (std::size_t i = 1; i < out.size(); ++i) {
			if (!redundant(out[i]))
				out[keep++] = out[i];
		}
		out.resize(keep);

		if (out.size() == 1) {
			btlevel = 0;
		} else {
			std::size_t max_i = 1;
			for (std::size_t i = 2; i < out.size(); ++i) {
				if (level_[out[i].var()] > level_[out[max_i].var()])
					max_i = i;
			}
			std::swap(out[1], out[max_i]);
			btlevel = level_[out[1].var()];
		}

		levels_tmp_.clear();
		for (Lit l : out)
			levels_tmp_.push_back(level_[l.var()]);
		std::sort(levels_tmp_.begin(), levels_tmp_.end());
		lbd = static_cast<int>(
		    std::unique(levels_tmp_.begin(), levels_tmp_.end()) - levels_tmp_.begin());

		for (int v : toclear_)
			seen_[v] = 0;
	}

	bool redundant(Lit l) const {
		const CRef r = reason_[l.var()];
		if (r == CREF_NONE)
			return false;
		const int sz = clause_size(r);
		const int32_t *cl = clause_lits(r);
		for (int k = 1; k < sz; ++k) {
			const int v = Lit(cl[k]).var();
			if (!seen_[v] && level_[v] > 0)
				return false;
		}
		return true;
	}

	void cancel_until(int lvl) {
		if (decision_level() <= lvl)
			return;
		const std::size_t bound = static_cast<std::size_t>(trail_lim_[lvl]);
		for (std::size_t k = trail_.size(); k > bound; --k) {
			const int v = trail_[k - 1].var();
			phase_[v] = (val_[v] == 1);
			val_[v] = 0;
			reason_[v] = CREF_NONE;
			if (heap_pos_[v] < 0)
				heap_insert(v);
		}
		trail_.resize(bound);
		trail_lim_.resize(lvl);
		qhead_ = trail_.size();
	}

	bool decide() {
		int v = 0;
		while (!heap_.empty()) {
			v = heap_pop();
			if (val_[v] == 0)
				break;
			v = 0;
		}
		if (v == 0)
			return false;
		++decisions_;
		trail_lim_.push_back(static_cast<int>(trail_.size()));
		enqueue(Lit(phase_[v] ? v : -v), CREF_NONE);
		return true;
	}

	// Keeps glue clauses and the better half by (LBD, size); locked
	// clauses stay because they anchor the current trail.
	void reduce_db() {
		next_reduce_ += reduce_step_;
		reduce_step_ += 300;
		std::vector<CRef> cand;
		cand.reserve(learnts_.size());
		std::vector<CRef> kept;
		for (CRef c : learnts_) {
			if (clause_dead(c))
				continue;
			if (clause_lbd(c) <= 2 || locked(c))
				kept.push_back(c);
			else
				cand.push_back(c);
		}
		std::sort(cand.begin(), cand.end(), [this](CRef a, CRef b) {
			if (clause_lbd(a) != clause_lbd(b))
				return clause_lbd(a) < clause_lbd(b);
			if (clause_size(a) != clause_size(b))
				return clause_size(a) < clause_size(b);
			return a < b;
		});
		const std::size_t keep_n = cand.size() / 2;
		for (std::size_t i = 0; i < cand.size(); ++i) {
			if (i < keep_n) {
				kept.push_back(cand[i]);
			} else {
				detach(cand[i]);
				arena_[cand[i] + 1] |= INFO_DEAD;
			}
		}
		learnts_.swap(kept);
	}

	bool locked(CRef c) const {
		const Lit first(clause_lits(c)[0]);
		return value(first) == 1 && reason_[first.var()] == c;
	}

	void bump_var(int v) {
		activity_[v] += var_inc_;
		if (activity_[v] > 1e100) {
			for (int u = 1; u <= nvars_; ++u)
				activity_[u] *= 1e-100;
			var_inc_ *= 1e-100;
		}
		if (heap_pos_[v] >= 0)
			heap_sift_up(heap_pos_[v]);
	}

	// Binary max-heap on activity with a position map.
	void heap_insert(int v) {
		heap_pos_[v] = static_cast<int>(heap_.size());
		heap_.push_back(v);
		heap_sift_up(heap_pos_[v]);
	}

	int heap_pop() {
		const int v = heap_[0];
		heap_pos_[v] = -1;
		const int last = heap_.back();
		heap_.pop_back();
		if (!heap_.empty()) {
			heap_[0] = last;
			heap_pos_[last] = 0;
			heap_sift_down(0);
		}
		return v;
	}

	void heap_sift_up(int i) {
		const int v = heap_[i];
		while (i > 0) {
			const int parent = (i - 1) / 2;
			if (activity_[heap_[parent]] >= activity_[v])
				break;
			heap_[i] = heap_[parent];
			heap_pos_[heap_[i]] = i;
			i = parent;
		}
		heap_[i] = v;
		heap_pos_[v] = i;
	}

	void heap_sift_down(int i) {
		const int v = heap_[i];
		const int n = static_cast<int>(heap_.size());
		for (;;) {
			int child = 2 * i + 1;
			if (child >= n)
				break;
			if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]])
				++child;
			if (activity_[heap_[child]] <= activity_[v])
				break;
			heap_[i] = heap_[child];
			heap_pos_[heap_[i]] = i;
			i = child;
		}
		heap_[i] = v;
		heap_pos_[v] = i;
	}

	static uint64_t luby(uint64_t i) {
		// Knuth's formulation: find the subsequence block containing i.
		uint64_t size = 1, seq = 0;
		while (size < i + 1) {
			++seq;
			size = 2 * size + 1;
		}
		while (size - 1 != i) {
			size = (size - 1) / 2;
			--seq;
			i = i % size;
		}
		return uint64_t(1) << seq;
	}

	uint64_t rng_next() {
		uint64_t z = (rng_state_ += 0x9E3779B97F4A7C15ULL);
		z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
		z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
		return z ^ (z >> 31);
	}

	int nvars_ = 0;
	bool ok_ = true;
	std::vector<int8_t> val_{0};
	std::vector<int> level_{0};
	std::vector<CRef> reason_{CREF_NONE};
	std::vector<uint8_t> phase_{0};
	std::vector<double> activity_{0.0};
	std::vector<uint8_t> seen_{0};
	std::vector<int32_t> arena_;
	std::vector<std::vector<Watch>> watches_;
	std::vector<CRef> learnts_;
	std::vector<Lit> trail_;
	std::vector<int> trail_lim_;
	std::size_t qhead_ = 0;
	std::vector<int> heap_;
	std::vector<int> heap_pos_{-1};
	int heap_known_ = 0;
	double var_inc_ = 1.0;
	uint64_t conflicts_ = 0;
	uint64_t decisions_ = 0;
	uint64_t propagations_ = 0;
	uint64_t next_reduce_ = 4000;
	uint64_t reduce_step_ = 2000;
	uint64_t restart_unit_ = 64;
	std::vector<Lit> learnt_;
	std::vector<Lit> tmp_clause_;
	std::vector<int> toclear_;
	std::vector<int> levels_tmp_;
	std::vector<uint8_t> model_;
	uint64_t rng_state_;
	bool seeded_;
};

} // namespace ucsat
