//! CNF formulas over (row, parameter, value) variables.
//!
//! A propositional variable is allocated for every cell value of every row;
//! auxiliary variables introduced by the structural (Tseitin-style)
//! transformation of non-clausal subformulas come after all cell variables,
//! so decoding a satisfying assignment never consults an auxiliary variable.
//!
//! Literals use the DIMACS convention: variable indices start at 1, a
//! negative literal negates its variable.

use std::io::Write;

use crate::model::{ConstraintExpr, SutModel, TestCase};

/// A DIMACS-style literal; `abs` is the 1-based variable index.
pub type Lit = i32;

/// A CNF clause set plus the cell-variable layout used to decode models.
#[derive(Debug, Clone)]
pub struct PropFormula {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    /// `cell_base[row][param]` is the variable for value 0 of that cell.
    cell_base: Vec<Vec<usize>>,
    domain_sizes: Vec<usize>,
}

impl PropFormula {
    /// Lays out cell variables for `rows` rows of the model and adds the
    /// exactly-one clauses for every cell.
    pub fn for_rows(m: &SutModel, rows: usize) -> PropFormula {
        let domain_sizes: Vec<usize> = m.parameters.iter().map(|p| p.values.len()).collect();
        let mut cell_base = Vec::with_capacity(rows);
        let mut next = 1usize;
        for _ in 0..rows {
            let mut row_base = Vec::with_capacity(m.k());
            for &size in &domain_sizes {
                row_base.push(next);
                next += size;
            }
            cell_base.push(row_base);
        }
        let mut f = PropFormula {
            num_vars: next - 1,
            clauses: Vec::new(),
            cell_base,
            domain_sizes,
        };
        for row in 0..rows {
            for param in 0..m.k() {
                f.exactly_one_cell(row, param);
            }
        }
        f
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn rows(&self) -> usize {
        self.cell_base.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// The positive literal for "row `row` assigns `value` to `param`".
    pub fn cell(&self, row: usize, param: usize, value: usize) -> Lit {
        debug_assert!(value < self.domain_sizes[param]);
        (self.cell_base[row][param] + value) as Lit
    }

    pub fn fresh_aux(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn add_clause(&mut self, lits: Vec<Lit>) {
        self.clauses.push(lits);
    }

    /// One at-least-one clause plus pairwise at-most-one; domains here are
    /// small, so no ladder encoding is needed.
    fn exactly_one_cell(&mut self, row: usize, param: usize) {
        let size = self.domain_sizes[param];
        let all: Vec<Lit> = (0..size).map(|v| self.cell(row, param, v)).collect();
        self.add_clause(all.clone());
        for a in 0..size {
            for b in a + 1..size {
                self.add_clause(vec![-all[a], -all[b]]);
            }
        }
    }

    /// Structurally encodes `expr` over the given row's cell variables and
    /// returns a literal equivalent to the expression.
    ///
    /// One auxiliary variable is introduced per non-atomic subformula; the
    /// defining clauses assert full equivalence, so every model of the
    /// formula evaluates the expression exactly.
    pub fn encode_expr(&mut self, row: usize, expr: &ConstraintExpr) -> Lit {
        match expr {
            ConstraintExpr::True => {
                let v = self.fresh_aux();
                self.add_clause(vec![v]);
                v
            }
            ConstraintExpr::False => {
                let v = self.fresh_aux();
                self.add_clause(vec![-v]);
                v
            }
            ConstraintExpr::Eq(p, val) => self.cell(row, *p, *val),
            ConstraintExpr::Neq(p, val) => -self.cell(row, *p, *val),
            ConstraintExpr::Not(inner) => -self.encode_expr(row, inner),
            ConstraintExpr::And(a, b) => {
                let (la, lb) = (self.encode_expr(row, a), self.encode_expr(row, b));
                self.define_and(la, lb)
            }
            ConstraintExpr::Or(a, b) => {
                let (la, lb) = (self.encode_expr(row, a), self.encode_expr(row, b));
                self.define_or(la, lb)
            }
            ConstraintExpr::Implies(a, b) => {
                let (la, lb) = (self.encode_expr(row, a), self.encode_expr(row, b));
                self.define_or(-la, lb)
            }
        }
    }

    /// Fresh `v` with `v <-> a && b`.
    pub fn define_and(&mut self, a: Lit, b: Lit) -> Lit {
        let v = self.fresh_aux();
        self.add_clause(vec![-v, a]);
        self.add_clause(vec![-v, b]);
        self.add_clause(vec![v, -a, -b]);
        v
    }

    /// Fresh `v` with `v <-> a || b`.
    pub fn define_or(&mut self, a: Lit, b: Lit) -> Lit {
        let v = self.fresh_aux();
        self.add_clause(vec![v, -a]);
        self.add_clause(vec![v, -b]);
        self.add_clause(vec![-v, a, b]);
        v
    }

    /// Fresh `v` with `v <-> (l1 && l2 && ... && ln)`.
    pub fn define_conj(&mut self, lits: &[Lit]) -> Lit {
        let v = self.fresh_aux();
        let mut back: Vec<Lit> = lits.iter().map(|&l| -l).collect();
        for &l in lits {
            self.add_clause(vec![-v, l]);
        }
        back.push(v);
        self.add_clause(back);
        v
    }

    /// Fresh `v` with `v <-> (l1 || l2 || ... || ln)`.
    pub fn define_disj(&mut self, lits: &[Lit]) -> Lit {
        let v = self.fresh_aux();
        let mut fwd: Vec<Lit> = lits.to_vec();
        for &l in lits {
            self.add_clause(vec![v, -l]);
        }
        fwd.insert(0, -v);
        self.add_clause(fwd);
        v
    }

    /// Asserts the model constraints for every row.
    pub fn assert_valid_rows(&mut self, m: &SutModel) {
        for row in 0..self.rows() {
            for c in &m.constraints {
                let lit = self.encode_expr(row, c);
                self.add_clause(vec![lit]);
            }
        }
    }

    /// Reads the cell variables of a satisfying assignment back into rows.
    ///
    /// `assignment[v]` is the value of 1-based variable `v`; index 0 is
    /// unused. The exactly-one clauses guarantee a unique value per cell.
    pub fn decode_rows(&self, assignment: &[bool]) -> Vec<TestCase> {
        (0..self.rows())
            .map(|row| {
                let values = (0..self.domain_sizes.len())
                    .map(|param| {
                        (0..self.domain_sizes[param])
                            .find(|&v| assignment[self.cell(row, param, v) as usize])
                            .expect("exactly-one cell clauses guarantee a set value")
                    })
                    .collect();
                TestCase::new(values)
            })
            .collect()
    }

    /// Writes the clause set in DIMACS format: `p cnf <vars> <clauses>`,
    /// then one 0-terminated clause per line.
    pub fn write_dimacs<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for lit in clause {
                write!(w, "{lit} ")?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}
