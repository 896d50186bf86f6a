//! Nontrivial common zeros of polynomial systems over F_q.
//!
//! Deterministic mode returns the lexicographically least nontrivial zero (first
//! coordinate most significant, values in canonical element order). It does not
//! walk F_q^n in order. Instead it keeps a witness and, coordinate by coordinate,
//! asks whether a smaller value still extends to a nontrivial zero. Each such
//! question is a complete backtracking search whose variable order is driven by
//! the equations, so small equations are closed off early. Within a search, every
//! term of every equation is tracked incrementally: a term dies as soon as one of
//! its variables is set to zero and is folded into its equation's running sum once
//! all of its variables are set. An equation whose terms are all settled with a
//! nonzero sum prunes the branch. Open equations that have become affine in the
//! unassigned variables are row reduced at every node: an inconsistent system
//! prunes, and a row with one unknown assigns it directly.
//!
//! The budget counts variable assignments across all searches.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::multipoly::MultiPoly;

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Deterministic,
    Parallel { workers: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Found(Vec<Fe>),
    NotFound,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub evaluations: u64,
    pub mode: SolveMode,
}

struct Term {
    eq: u32,
    coef: Fe,
    vars: Vec<(u32, u32)>,
}

/// A system flattened for incremental evaluation.
struct Compiled {
    field: Gf,
    n: usize,
    terms: Vec<Term>,
    occ: Vec<Vec<u32>>,
    eq_vars: Vec<Vec<usize>>,
    eq_terms: Vec<Vec<u32>>,
    /// Nonconstant terms per equation.
    eq_len: Vec<u32>,
    eq_const: Vec<Fe>,
}

impl Compiled {
    fn new(field: &Gf, system: &[MultiPoly<Fe>], n: usize) -> Result<Self> {
        let mut terms = Vec::new();
        let mut occ = vec![Vec::new(); n];
        let mut eq_vars = Vec::new();
        let mut eq_terms = Vec::new();
        let mut eq_len = Vec::new();
        let mut eq_const = Vec::new();
        for poly in system {
            if poly.nvars() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    got: poly.nvars(),
                });
            }
            if poly.field() != field {
                return Err(Error::FieldMismatch);
            }
            if poly.is_zero() {
                continue;
            }
            let eq = eq_vars.len() as u32;
            let mut konst = Fe::ZERO;
            let mut len = 0;
            let mut own = Vec::new();
            for (m, &c) in poly.terms() {
                let vars: Vec<(u32, u32)> = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| (k as u32, e))
                    .collect();
                if vars.is_empty() {
                    konst = field.add(konst, c);
                    continue;
                }
                let idx = terms.len() as u32;
                own.push(idx);
                for &(v, _) in &vars {
                    occ[v as usize].push(idx);
                }
                terms.push(Term { eq, coef: c, vars });
                len += 1;
            }
            eq_vars.push(poly.variables_used());
            eq_terms.push(own);
            eq_len.push(len);
            eq_const.push(konst);
        }
        Ok(Compiled {
            field: field.clone(),
            n,
            terms,
            occ,
            eq_vars,
            eq_terms,
            eq_len,
            eq_const,
        })
    }

    /// Free variables ordered equation by equation: repeatedly take the unfinished
    /// equation with the fewest unchosen variables and append those variables.
    fn search_order(&self, fixed: &[bool]) -> Vec<usize> {
        let mut chosen = fixed.to_vec();
        let mut order = Vec::with_capacity(self.n);
        let mut remaining: Vec<usize> = self
            .eq_vars
            .iter()
            .map(|vs| vs.iter().filter(|&&v| !chosen[v]).count())
            .collect();
        loop {
            let next = remaining
                .iter()
                .enumerate()
                .filter(|(_, &r)| r > 0)
                .min_by_key(|(i, &r)| (r, *i))
                .map(|(i, _)| i);
            let Some(eq) = next else { break };
            for &v in &self.eq_vars[eq] {
                if chosen[v] {
                    continue;
                }
                chosen[v] = true;
                order.push(v);
                for (e, vs) in self.eq_vars.iter().enumerate() {
                    if remaining[e] > 0 && vs.binary_search(&v).is_ok() {
                        remaining[e] -= 1;
                    }
                }
            }
        }
        order.extend((0..self.n).filter(|&v| !chosen[v]));
        order
    }
}

enum Undo {
    Dead(u32),
    Dec(u32),
    Done(u32, Fe),
    Assign(u32),
}

enum Affine {
    Conflict,
    Forced(Vec<(usize, Fe)>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Found,
    Exhausted,
    Stopped,
}

struct Search<'a> {
    sys: &'a Compiled,
    value: Vec<Fe>,
    assigned: Vec<bool>,
    pending: Vec<u32>,
    dead: Vec<bool>,
    unresolved: Vec<u32>,
    acc: Vec<Fe>,
    open_eqs: usize,
    bad: usize,
    nonzero: usize,
    log: Vec<Undo>,
    evaluations: u64,
    budget: u64,
    solution: Option<Vec<Fe>>,
    shared: Option<&'a Shared>,
    /// Scratch for `affine_conflict`: column of each variable (u32::MAX when unused) and the matrix.
    col_of: Vec<u32>,
    cols: Vec<u32>,
    matrix: Vec<Fe>,
}

struct Shared {
    stop: AtomicBool,
    evaluations: AtomicU64,
}

const FLUSH_EVERY: u64 = 1024;

impl<'a> Search<'a> {
    fn new(sys: &'a Compiled, budget: u64) -> Self {
        let f = &sys.field;
        let mut open_eqs = 0;
        let mut bad = 0;
        for (e, &len) in sys.eq_len.iter().enumerate() {
            if len > 0 {
                open_eqs += 1;
            } else if !sys.eq_const[e].is_zero() {
                bad += 1;
            }
        }
        let _ = f;
        Search {
            sys,
            value: vec![Fe::ZERO; sys.n],
            assigned: vec![false; sys.n],
            pending: sys.terms.iter().map(|t| t.vars.len() as u32).collect(),
            dead: vec![false; sys.terms.len()],
            unresolved: sys.eq_len.clone(),
            acc: sys.eq_const.clone(),
            open_eqs,
            bad,
            nonzero: 0,
            log: Vec::new(),
            evaluations: 0,
            budget,
            solution: None,
            shared: None,
            col_of: vec![u32::MAX; sys.n],
            cols: Vec::new(),
            matrix: Vec::new(),
        }
    }

    fn resolve(&mut self, eq: usize) {
        self.unresolved[eq] -= 1;
        if self.unresolved[eq] == 0 {
            self.open_eqs -= 1;
            if !self.acc[eq].is_zero() {
                self.bad += 1;
            }
        }
    }

    fn unresolve(&mut self, eq: usize) {
        if self.unresolved[eq] == 0 {
            self.open_eqs += 1;
            if !self.acc[eq].is_zero() {
                self.bad -= 1;
            }
        }
        self.unresolved[eq] += 1;
    }

    fn assign(&mut self, var: usize, v: Fe) {
        let sys = self.sys;
        let f = &sys.field;
        self.value[var] = v;
        self.assigned[var] = true;
        if !v.is_zero() {
            self.nonzero += 1;
        }
        self.log.push(Undo::Assign(var as u32));
        for &t in &sys.occ[var] {
            let ti = t as usize;
            if self.dead[ti] {
                continue;
            }
            let eq = sys.terms[ti].eq as usize;
            if v.is_zero() {
                self.dead[ti] = true;
                self.log.push(Undo::Dead(t));
                self.resolve(eq);
            } else {
                self.pending[ti] -= 1;
                if self.pending[ti] == 0 {
                    let term = &sys.terms[ti];
                    let val = term.vars.iter().fold(term.coef, |acc, &(x, e)| {
                        f.mul(acc, f.pow(self.value[x as usize], e as u64))
                    });
                    self.acc[eq] = f.add(self.acc[eq], val);
                    self.log.push(Undo::Done(t, val));
                    self.resolve(eq);
                } else {
                    self.log.push(Undo::Dec(t));
                }
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        let f = &self.sys.field;
        while self.log.len() > mark {
            match self.log.pop().unwrap() {
                Undo::Dead(t) => {
                    self.dead[t as usize] = false;
                    self.unresolve(self.sys.terms[t as usize].eq as usize);
                }
                Undo::Dec(t) => self.pending[t as usize] += 1,
                Undo::Done(t, val) => {
                    let eq = self.sys.terms[t as usize].eq as usize;
                    self.unresolve(eq);
                    self.acc[eq] = f.sub(self.acc[eq], val);
                    self.pending[t as usize] += 1;
                }
                Undo::Assign(var) => {
                    let var = var as usize;
                    if !self.value[var].is_zero() {
                        self.nonzero -= 1;
                    }
                    self.value[var] = Fe::ZERO;
                    self.assigned[var] = false;
                }
            }
        }
    }

    /// Gauss-Jordan elimination on the open equations that are already affine in
    /// the unassigned variables. Reports a conflict or the values those equations
    /// force. Both are consequences of the system, so results are unchanged.
    fn affine_check(&mut self) -> Affine {
        let sys = self.sys;
        let f = &sys.field;
        let q1 = f.q() - 1;
        // rows of (variable, coefficient) plus the constant, for `constant + sum = 0`
        let mut rows: Vec<(Vec<(u32, Fe)>, Fe)> = Vec::new();
        'eqs: for e in 0..sys.eq_terms.len() {
            if self.unresolved[e] == 0 {
                continue;
            }
            let mut row = Vec::new();
            for &t in &sys.eq_terms[e] {
                let ti = t as usize;
                if self.dead[ti] || self.pending[ti] == 0 {
                    continue;
                }
                if self.pending[ti] > 1 {
                    continue 'eqs;
                }
                let term = &sys.terms[ti];
                let mut c = term.coef;
                let mut free = 0;
                for &(x, ex) in &term.vars {
                    if self.assigned[x as usize] {
                        c = f.mul(c, f.pow(self.value[x as usize], ex as u64));
                    } else if (ex - 1) % q1 != 0 {
                        // y^ex is not the function y on F_q
                        continue 'eqs;
                    } else {
                        free = x;
                    }
                }
                row.push((free, c));
            }
            rows.push((row, self.acc[e]));
        }
        if rows.is_empty() {
            return Affine::Forced(Vec::new());
        }
        self.cols.clear();
        for (row, _) in &rows {
            for &(x, _) in row {
                if self.col_of[x as usize] == u32::MAX {
                    self.col_of[x as usize] = self.cols.len() as u32;
                    self.cols.push(x);
                }
            }
        }
        let width = self.cols.len() + 1;
        self.matrix.clear();
        self.matrix.resize(rows.len() * width, Fe::ZERO);
        for (r, (row, konst)) in rows.iter().enumerate() {
            let base = r * width;
            for &(x, c) in row {
                let k = base + self.col_of[x as usize] as usize;
                self.matrix[k] = f.add(self.matrix[k], c);
            }
            self.matrix[base + width - 1] = *konst;
        }
        for &x in &self.cols {
            self.col_of[x as usize] = u32::MAX;
        }
        let m = &mut self.matrix;
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..width - 1 {
            let Some(p) = (rank..rows.len()).find(|&r| !m[r * width + col].is_zero()) else {
                continue;
            };
            for k in 0..width {
                m.swap(rank * width + k, p * width + k);
            }
            let inv = f.inv(m[rank * width + col]).expect("nonzero pivot");
            for k in col..width {
                m[rank * width + k] = f.mul(m[rank * width + k], inv);
            }
            for r in 0..rows.len() {
                let factor = m[r * width + col];
                if r == rank || factor.is_zero() {
                    continue;
                }
                for k in col..width {
                    let v = f.mul(factor, m[rank * width + k]);
                    m[r * width + k] = f.sub(m[r * width + k], v);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        // a zero row with a nonzero constant
        if (rank..rows.len()).any(|r| !m[r * width + width - 1].is_zero()) {
            return Affine::Conflict;
        }
        // reduced rows with a single unknown fix that unknown
        let forced = pivots
            .iter()
            .enumerate()
            .filter(|&(r, &col)| (col + 1..width - 1).all(|k| m[r * width + k].is_zero()))
            .map(|(r, &col)| (self.cols[col] as usize, f.neg(m[r * width + width - 1])))
            .collect();
        Affine::Forced(forced)
    }

    /// Counts one assignment; false when the search must stop.
    fn tick(&mut self) -> bool {
        self.evaluations += 1;
        match self.shared {
            None => self.evaluations <= self.budget,
            Some(sh) => {
                if self.evaluations.is_multiple_of(FLUSH_EVERY) {
                    let total = sh.evaluations.fetch_add(FLUSH_EVERY, Ordering::Relaxed) + FLUSH_EVERY;
                    if total > self.budget {
                        sh.stop.store(true, Ordering::Relaxed);
                    }
                    !sh.stop.load(Ordering::Relaxed)
                } else {
                    true
                }
            }
        }
    }

    /// Completes the current assignment when every equation is settled, choosing the
    /// lexicographically least nontrivial completion.
    fn settled_completion(&self, order: &[usize], pos: usize) -> Option<Vec<Fe>> {
        let mut y = self.value.clone();
        if self.nonzero > 0 {
            return Some(y);
        }
        let last_free = order[pos..].iter().filter(|&&v| !self.assigned[v]).max()?;
        y[*last_free] = Fe::ONE;
        Some(y)
    }

    fn dfs(&mut self, order: &[usize], pos: usize) -> Step {
        if self.bad > 0 {
            return Step::Exhausted;
        }
        if self.open_eqs == 0 {
            return match self.settled_completion(order, pos) {
                Some(y) => {
                    self.solution = Some(y);
                    Step::Found
                }
                None => Step::Exhausted,
            };
        }
        match self.affine_check() {
            Affine::Conflict => return Step::Exhausted,
            Affine::Forced(forced) if !forced.is_empty() => {
                let mark = self.log.len();
                for (var, v) in forced {
                    self.assign(var, v);
                    if !self.tick() {
                        self.undo_to(mark);
                        return Step::Stopped;
                    }
                }
                let r = self.dfs(order, pos);
                self.undo_to(mark);
                return r;
            }
            Affine::Forced(_) => {}
        }
        // forced assignments may have taken variables out of order
        let mut pos = pos;
        while self.assigned[order[pos]] {
            pos += 1;
        }
        let var = order[pos];
        for v in 0..self.sys.field.q() {
            let mark = self.log.len();
            self.assign(var, Fe(v));
            if !self.tick() {
                self.undo_to(mark);
                return Step::Stopped;
            }
            let r = self.dfs(order, pos + 1);
            self.undo_to(mark);
            if r != Step::Exhausted {
                return r;
            }
        }
        Step::Exhausted
    }

    /// Searches for a nontrivial zero extending the current (partial) assignment.
    fn extend(&mut self) -> Step {
        if self.bad > 0 {
            return Step::Exhausted;
        }
        let order = self.sys.search_order(&self.assigned);
        self.dfs(&order, 0)
    }

    fn count(&mut self, order: &[usize], pos: usize, q: u64) -> u128 {
        if self.bad > 0 {
            return 0;
        }
        if self.open_eqs == 0 {
            return (q as u128).pow((order.len() - pos) as u32);
        }
        let var = order[pos];
        let mut total = 0;
        for v in 0..q as u32 {
            let mark = self.log.len();
            self.assign(var, Fe(v));
            self.evaluations += 1;
            total += self.count(order, pos + 1, q);
            self.undo_to(mark);
        }
        total
    }
}

fn space_size(q: u32, n: usize) -> Option<u64> {
    (q as u64).checked_pow(n as u32)
}

fn verify(system: &[MultiPoly<Fe>], y: &[Fe]) -> bool {
    y.iter().any(|c| !c.is_zero())
        && system
            .iter()
            .all(|p| p.eval(y).map(|v| v.is_zero()).unwrap_or(false))
}

/// Finds a nontrivial common zero in F_q^n of `system`.
pub fn solve_nontrivial(
    field: &Gf,
    system: &[MultiPoly<Fe>],
    n: usize,
    budget: u64,
    mode: SolveMode,
) -> Result<SolveReport> {
    if budget == 0 {
        return Err(Error::Invalid("budget must be at least 1".into()));
    }
    if n == 0 {
        return Ok(SolveReport {
            outcome: Outcome::NotFound,
            evaluations: 0,
            mode,
        });
    }
    let sys = Compiled::new(field, system, n)?;
    let report = match mode {
        SolveMode::Parallel { workers } if workers > 1 => solve_parallel(&sys, budget, workers),
        _ => solve_lex_first(&sys, budget),
    };
    let report = SolveReport { mode, ..report };
    if let Outcome::Found(y) = &report.outcome {
        assert!(verify(system, y), "solver returned a non-solution");
    }
    Ok(report)
}

fn solve_lex_first(sys: &Compiled, budget: u64) -> SolveReport {
    let mut s = Search::new(sys, budget);
    let done = |s: &Search, outcome| SolveReport {
        outcome,
        evaluations: s.evaluations.min(budget),
        mode: SolveMode::Deterministic,
    };
    let mut witness = match s.extend() {
        Step::Found => s.solution.take().unwrap(),
        Step::Exhausted => return done(&s, Outcome::NotFound),
        Step::Stopped => return done(&s, Outcome::BudgetExceeded),
    };
    // Invariant: coordinates before k are fixed to the lex-least solution's prefix.
    for k in 0..sys.n {
        for v in 0..witness[k].0 {
            let mark = s.log.len();
            s.assign(k, Fe(v));
            let r = s.extend();
            s.undo_to(mark);
            match r {
                Step::Found => {
                    witness = s.solution.take().unwrap();
                    break;
                }
                Step::Exhausted => {}
                Step::Stopped => return done(&s, Outcome::BudgetExceeded),
            }
        }
        s.assign(k, witness[k]);
        debug_assert_eq!(s.bad, 0);
    }
    done(&s, Outcome::Found(witness))
}

fn solve_parallel(sys: &Compiled, budget: u64, workers: usize) -> SolveReport {
    let q = sys.field.q() as u64;
    let mut prefix_len = 0usize;
    while prefix_len < sys.n && q.pow(prefix_len as u32) < 8 * workers as u64 {
        prefix_len += 1;
    }
    let blocks = q.pow(prefix_len as u32) as usize;
    let next = AtomicUsize::new(0);
    let shared = Shared {
        stop: AtomicBool::new(false),
        evaluations: AtomicU64::new(0),
    };
    let found: Mutex<Option<Vec<Fe>>> = Mutex::new(None);
    let exhausted_all = AtomicBool::new(true);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut s = Search::new(sys, budget);
                s.shared = Some(&shared);
                loop {
                    if shared.stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let b = next.fetch_add(1, Ordering::Relaxed);
                    if b >= blocks {
                        break;
                    }
                    // leading coordinates of block b, first coordinate most significant
                    let mut digits = vec![0u32; prefix_len];
                    let mut r = b as u64;
                    for d in digits.iter_mut().rev() {
                        *d = (r % q) as u32;
                        r /= q;
                    }
                    let mark = s.log.len();
                    for (k, &d) in digits.iter().enumerate() {
                        s.assign(k, Fe(d));
                    }
                    let step = s.extend();
                    s.undo_to(mark);
                    match step {
                        Step::Found => {
                            let mut slot = found.lock().unwrap();
                            if slot.is_none() {
                                *slot = s.solution.take();
                            }
                            shared.stop.store(true, Ordering::Relaxed);
                            break;
                        }
                        Step::Exhausted => {}
                        Step::Stopped => {
                            exhausted_all.store(false, Ordering::Relaxed);
                            break;
                        }
                    }
                }
                shared
                    .evaluations
                    .fetch_add(s.evaluations % FLUSH_EVERY, Ordering::Relaxed);
            });
        }
    });

    let evaluations = shared.evaluations.load(Ordering::Relaxed).min(budget);
    let outcome = match found.into_inner().unwrap() {
        Some(y) => Outcome::Found(y),
        None if exhausted_all.load(Ordering::Relaxed) && next.load(Ordering::Relaxed) >= blocks => {
            Outcome::NotFound
        }
        None => Outcome::BudgetExceeded,
    };
    SolveReport {
        outcome,
        evaluations,
        mode: SolveMode::Parallel { workers },
    }
}

/// Number of common zeros in F_q^n, the origin included.
pub fn count_zeros(field: &Gf, system: &[MultiPoly<Fe>], n: usize, budget: u64) -> Result<u128> {
    let size = space_size(field.q(), n).ok_or(Error::BudgetExceeded(budget))?;
    if size > budget {
        return Err(Error::BudgetExceeded(budget));
    }
    let sys = Compiled::new(field, system, n)?;
    let mut s = Search::new(&sys, budget);
    let order = sys.search_order(&vec![false; n]);
    Ok(s.count(&order, 0, field.q() as u64))
}
