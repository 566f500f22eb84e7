//! A conflict-driven clause-learning decision procedure.
//!
//! The design is the classic one: two watched literals per clause,
//! activity-ordered decisions with phase saving, first-UIP conflict
//! analysis, Luby restarts, and periodic deletion of low-activity learnt
//! clauses. Decisions are fully deterministic for a fixed seed; the seed
//! only picks the initial saved phases.
//!
//! Wall-clock budgets are honored at conflict granularity; running out is
//! reported as a distinct outcome, never as UNSAT.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNDEF: i8 = 0;

/// Internal literal: `var << 1 | negated`, vars 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn from_dimacs(l: i32) -> Lit {
        debug_assert!(l != 0);
        let var = (l.unsigned_abs() - 1) << 1;
        Lit(if l > 0 { var } else { var | 1 })
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
    deleted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: usize,
    blocker: Lit,
}

/// Max-heap over variable activity with index tie-breaking, so the
/// branching order is reproducible.
#[derive(Debug, Default)]
struct OrderHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl OrderHeap {
    fn new(n: usize) -> Self {
        OrderHeap {
            heap: (0..n).collect(),
            pos: (0..n).map(Some).collect(),
        }
    }

    fn gt(activity: &[f64], a: usize, b: usize) -> bool {
        activity[a] > activity[b] || (activity[a] == activity[b] && a < b)
    }

    fn up(&mut self, activity: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) >> 1;
            if !Self::gt(activity, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, activity: &[f64], mut i: usize) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && Self::gt(activity, self.heap[right], self.heap[left])
            {
                right
            } else {
                left
            };
            if !Self::gt(activity, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn push(&mut self, activity: &[f64], v: usize) {
        if self.pos[v].is_some() {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.up(activity, self.heap.len() - 1);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        self.pos[top] = None;
        let last = self.heap.pop().expect("nonempty");
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.down(activity, 0);
        }
        Some(top)
    }

    fn bumped(&mut self, activity: &[f64], v: usize) {
        if let Some(i) = self.pos[v] {
            self.up(activity, i);
        }
    }
}

/// Outcome of a single solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SolveResult {
    /// Satisfying assignment, indexed by 1-based variable (entry 0 unused).
    Sat(Vec<bool>),
    Unsat,
    Budget,
}

pub(crate) struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    learnt_refs: Vec<usize>,
    watches: Vec<Vec<Watcher>>,

    assigns: Vec<i8>,
    polarity: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: OrderHeap,
    seen: Vec<bool>,

    ok: bool,
}

impl Solver {
    pub fn new(num_vars: usize, seed: u64) -> Solver {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Solver {
            num_vars,
            clauses: Vec::new(),
            learnt_refs: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            polarity: (0..num_vars).map(|_| rng.gen::<bool>()).collect(),
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            cla_inc: 1.0,
            order: OrderHeap::new(num_vars),
            seen: vec![false; num_vars],
            ok: true,
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assigns[l.var()];
        if l.negated() {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause in DIMACS literals; duplicate literals are dropped and
    /// tautologies ignored. Only legal before solving (decision level 0).
    pub fn add_clause(&mut self, lits: &[i32]) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = lits.iter().map(|&l| Lit::from_dimacs(l)).collect();
        c.sort_by_key(|l| l.0);
        c.dedup();
        if c.windows(2).any(|w| w[0].var() == w[1].var()) {
            return; // tautology: l and !l
        }
        // Top-level simplification against already-fixed variables.
        c.retain(|&l| self.value(l) != -1 || self.level[l.var()] != 0);
        if c.iter()
            .any(|&l| self.value(l) == 1 && self.level[l.var()] == 0)
        {
            return;
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                if self.value(c[0]) == -1 {
                    self.ok = false;
                } else if self.value(c[0]) == UNDEF {
                    self.enqueue(c[0], None);
                    if self.propagate().is_some() {
                        self.ok = false;
                    }
                }
            }
            _ => {
                let cref = self.clauses.len();
                self.watches[(!c[0]).index()].push(Watcher {
                    cref,
                    blocker: c[1],
                });
                self.watches[(!c[1]).index()].push(Watcher {
                    cref,
                    blocker: c[0],
                });
                self.clauses.push(Clause {
                    lits: c,
                    learnt: false,
                    activity: 0.0,
                    deleted: false,
                });
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        debug_assert_eq!(self.value(l), UNDEF);
        self.assigns[l.var()] = if l.negated() { -1 } else { 1 };
        self.level[l.var()] = self.decision_level();
        self.reason[l.var()] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            'watchers: while i < ws.len() {
                let w = ws[i];
                if self.value(w.blocker) == 1 {
                    i += 1;
                    continue;
                }
                if self.clauses[w.cref].deleted {
                    ws.swap_remove(i);
                    continue;
                }
                let false_lit = !p;
                {
                    let lits = &mut self.clauses[w.cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                    debug_assert_eq!(lits[1], false_lit);
                }
                let first = self.clauses[w.cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[i].blocker = first;
                    i += 1;
                    continue;
                }
                for j in 2..self.clauses[w.cref].lits.len() {
                    if self.value(self.clauses[w.cref].lits[j]) != -1 {
                        self.clauses[w.cref].lits.swap(1, j);
                        let new_watch = !self.clauses[w.cref].lits[1];
                        self.watches[new_watch.index()].push(Watcher {
                            cref: w.cref,
                            blocker: first,
                        });
                        ws.swap_remove(i);
                        continue 'watchers;
                    }
                }
                // No replacement watch: clause is unit or conflicting.
                if self.value(first) == -1 {
                    self.watches[p.index()] = ws;
                    self.qhead = self.trail.len();
                    return Some(w.cref);
                }
                self.enqueue(first, Some(w.cref));
                i += 1;
            }
            self.watches[p.index()] = ws;
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(&self.activity, v);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnt_refs {
                self.clauses[r].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backtrack level.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot 0 for the asserting literal
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut cref = confl;
        let mut trail_idx = self.trail.len();

        loop {
            self.bump_clause(cref);
            let start = usize::from(p.is_some());
            for j in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[j];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Walk the trail back to the next marked literal.
            loop {
                trail_idx -= 1;
                if self.seen[self.trail[trail_idx].var()] {
                    break;
                }
            }
            let lit = self.trail[trail_idx];
            self.seen[lit.var()] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !lit;
                break;
            }
            p = Some(lit);
            cref = self.reason[lit.var()].expect("non-decision literal has a reason");
            // The reason clause's first literal is `lit` itself; `start`
            // skips it on the next iteration.
            debug_assert_eq!(self.clauses[cref].lits[0], lit);
        }

        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }

        let bt_level = if learnt.len() == 1 {
            0
        } else {
            let (max_i, _) = learnt[1..]
                .iter()
                .enumerate()
                .max_by_key(|(_, l)| self.level[l.var()])
                .expect("nonempty");
            learnt.swap(1, max_i + 1);
            self.level[learnt[1].var()]
        };
        (learnt, bt_level)
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target as usize];
        for i in (bound..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.polarity[v] = self.assigns[v] == 1;
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.order.push(&self.activity, v);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(target as usize);
        self.qhead = bound;
    }

    fn record_learnt(&mut self, learnt: Vec<Lit>) {
        if learnt.len() == 1 {
            self.enqueue(learnt[0], None);
            return;
        }
        let cref = self.clauses.len();
        self.watches[(!learnt[0]).index()].push(Watcher {
            cref,
            blocker: learnt[1],
        });
        self.watches[(!learnt[1]).index()].push(Watcher {
            cref,
            blocker: learnt[0],
        });
        let first = learnt[0];
        self.clauses.push(Clause {
            lits: learnt,
            learnt: true,
            activity: self.cla_inc,
            deleted: false,
        });
        self.learnt_refs.push(cref);
        self.enqueue(first, Some(cref));
    }

    fn locked(&self, cref: usize) -> bool {
        let first = self.clauses[cref].lits[0];
        self.value(first) == 1 && self.reason[first.var()] == Some(cref)
    }

    /// Drops the lower-activity half of the learnt clauses.
    fn reduce_db(&mut self) {
        let mut refs = std::mem::take(&mut self.learnt_refs);
        refs.sort_by(|&a, &b| {
            self.clauses[b]
                .activity
                .partial_cmp(&self.clauses[a].activity)
                .expect("activities are finite")
                .then(a.cmp(&b))
        });
        let keep = refs.len() / 2;
        for (i, &cref) in refs.iter().enumerate() {
            if i >= keep && !self.locked(cref) && self.clauses[cref].lits.len() > 2 {
                self.clauses[cref].deleted = true;
            }
        }
        refs.retain(|&c| !self.clauses[c].deleted);
        self.learnt_refs = refs;
        // Deleted watchers are purged lazily during propagation.
    }

    fn decide(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                let lit = Lit((v as u32) << 1 | u32::from(!self.polarity[v]));
                return Some(lit);
            }
        }
        None
    }

    fn luby(mut x: u64) -> u64 {
        // Index of x in the Luby sequence 1 1 2 1 1 2 4 ...
        let mut size: u64 = 1;
        let mut seq: u32 = 0;
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    pub fn solve(&mut self, budget: Option<Duration>) -> SolveResult {
        let start = Instant::now();
        let over = |start: Instant| budget.is_some_and(|b| start.elapsed() >= b);
        if over(start) {
            return SolveResult::Budget;
        }
        if !self.ok {
            return SolveResult::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SolveResult::Unsat;
        }

        let mut total_conflicts: u64 = 0;
        let mut restarts: u64 = 0;
        let mut max_learnts = (self.clauses.len() / 3).max(512);

        loop {
            let restart_budget = 128 * Self::luby(restarts);
            let mut conflicts_here: u64 = 0;
            loop {
                if let Some(confl) = self.propagate() {
                    total_conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return SolveResult::Unsat;
                    }
                    let (learnt, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    self.record_learnt(learnt);
                    self.var_inc /= 0.95;
                    self.cla_inc /= 0.999;
                    if total_conflicts.is_multiple_of(256) && over(start) {
                        return SolveResult::Budget;
                    }
                } else {
                    if conflicts_here >= restart_budget {
                        restarts += 1;
                        self.cancel_until(0);
                        break;
                    }
                    if self.learnt_refs.len() > max_learnts {
                        max_learnts = max_learnts * 11 / 10;
                        self.reduce_db();
                    }
                    match self.decide() {
                        None => {
                            let mut model = vec![false; self.num_vars + 1];
                            for v in 0..self.num_vars {
                                model[v + 1] = self.assigns[v] == 1;
                            }
                            self.cancel_until(0);
                            return SolveResult::Sat(model);
                        }
                        Some(lit) => {
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(lit, None);
                        }
                    }
                }
            }
            if over(start) {
                return SolveResult::Budget;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(num_vars: usize, clauses: &[&[i32]]) -> SolveResult {
        let mut s = Solver::new(num_vars, 0);
        for c in clauses {
            s.add_clause(c);
        }
        s.solve(None)
    }

    #[test]
    fn empty_formula_is_sat() {
        assert_eq!(solve(0, &[]), SolveResult::Sat(vec![false]));
    }

    #[test]
    fn contradictory_units_are_unsat() {
        assert_eq!(solve(1, &[&[1], &[-1]]), SolveResult::Unsat);
    }

    #[test]
    fn simple_sat_model_satisfies_clauses() {
        let clauses: &[&[i32]] = &[&[1, 2], &[-1, 3], &[-2, 3], &[-3, 4]];
        match solve(4, clauses) {
            SolveResult::Sat(m) => {
                for c in clauses {
                    assert!(c.iter().any(|&l| m[l.unsigned_abs() as usize] == (l > 0)));
                }
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn pigeonhole_4_into_3_is_unsat() {
        // var(p, h) = pigeon p in hole h
        let v = |p: i32, h: i32| p * 3 + h + 1;
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        for p in 0..4 {
            clauses.push((0..3).map(|h| v(p, h)).collect());
        }
        for h in 0..3 {
            for p1 in 0..4 {
                for p2 in p1 + 1..4 {
                    clauses.push(vec![-v(p1, h), -v(p2, h)]);
                }
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        assert_eq!(solve(12, &refs), SolveResult::Unsat);
    }

    #[test]
    fn zero_budget_reports_budget() {
        let mut s = Solver::new(2, 0);
        s.add_clause(&[1, 2]);
        assert_eq!(s.solve(Some(Duration::ZERO)), SolveResult::Budget);
    }

    #[test]
    fn agrees_with_brute_force_on_random_3sat() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..200 {
            let num_vars = rng.gen_range(3..=8);
            let num_clauses = rng.gen_range(1..=32);
            let clauses: Vec<Vec<i32>> = (0..num_clauses)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=num_vars) as i32;
                            if rng.gen() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let brute_sat = (0..1u32 << num_vars).any(|bits| {
                clauses.iter().all(|c| {
                    c.iter().any(|&l| {
                        let val = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                        val == (l > 0)
                    })
                })
            });
            let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
            match solve(num_vars, &refs) {
                SolveResult::Sat(m) => {
                    assert!(brute_sat, "round {round}: solver SAT, oracle UNSAT");
                    for c in &clauses {
                        assert!(c.iter().any(|&l| m[l.unsigned_abs() as usize] == (l > 0)));
                    }
                }
                SolveResult::Unsat => {
                    assert!(!brute_sat, "round {round}: solver UNSAT, oracle SAT")
                }
                SolveResult::Budget => panic!("no budget set"),
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let run = |seed| {
            let mut s = Solver::new(6, seed);
            s.add_clause(&[1, 2, 3]);
            s.add_clause(&[-1, 4]);
            s.add_clause(&[-2, 5, -6]);
            s.add_clause(&[-4, -3]);
            match s.solve(None) {
                SolveResult::Sat(m) => m,
                other => panic!("{other:?}"),
            }
        };
        assert_eq!(run(3), run(3));
    }
}
