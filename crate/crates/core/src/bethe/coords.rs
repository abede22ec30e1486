use nalgebra::{DMatrix, DVector};

use crate::beta::Beta;
use crate::nfg::Nfg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarKind {
    Factor,
    FullEdge,
    HalfEdge,
}

/// Flat coordinates for the Bethe free energy: factor entries over the local code, then
/// edge entries. Entries left out of the layout are fixed at zero.
#[derive(Debug, Clone)]
pub struct BetheCoordinates {
    /// `(support position, variable)` per factor.
    pub(crate) factor_vars: Vec<Vec<(usize, usize)>>,
    pub(crate) edge_vars: Vec<Vec<Option<usize>>>,
    pub(crate) costs: Vec<f64>,
    pub(crate) kinds: Vec<VarKind>,
}

impl BetheCoordinates {
    /// Every local-code entry and every edge symbol.
    pub fn new(nfg: &Nfg) -> Self {
        let factors = nfg.factors().iter().map(|f| vec![true; f.table.support_len()]).collect();
        let edges = nfg.edges().iter().map(|e| vec![true; e.alphabet as usize]).collect();
        Self::with_masks(nfg, factors, edges)
    }

    /// Drops entries that are zero on the whole local marginal polytope by arc-consistency
    /// pruning: an edge symbol survives only if every incident factor still has a live
    /// entry using it, and a factor entry survives only if all its symbols do.
    pub(crate) fn pruned(nfg: &Nfg) -> Self {
        let mut factors: Vec<Vec<bool>> =
            nfg.factors().iter().map(|f| vec![true; f.table.support_len()]).collect();
        let mut edges: Vec<Vec<bool>> = nfg.edges().iter().map(|e| vec![true; e.alphabet as usize]).collect();
        loop {
            let mut changed = false;
            for (f, factor) in nfg.factors().iter().enumerate() {
                for (p, &i) in factor.table.support().iter().enumerate() {
                    if factors[f][p]
                        && factor.edges.iter().enumerate().any(|(slot, &e)| !edges[e][factor.table.symbol_at(i, slot) as usize])
                    {
                        factors[f][p] = false;
                        changed = true;
                    }
                }
            }
            for (e, edge) in nfg.edges().iter().enumerate() {
                for s in 0..edge.alphabet as usize {
                    if !edges[e][s] {
                        continue;
                    }
                    let supported = edge.ends.iter().all(|end| {
                        let table = &nfg.factor(end.factor).table;
                        table
                            .support()
                            .iter()
                            .enumerate()
                            .any(|(p, &i)| factors[end.factor][p] && table.symbol_at(i, end.slot) as usize == s)
                    });
                    if !supported {
                        edges[e][s] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Self::with_masks(nfg, factors, edges)
    }

    /// Keeps only the variables with `keep[v]` set.
    pub(crate) fn restrict(&self, nfg: &Nfg, keep: &[bool]) -> Self {
        let factors = self
            .factor_vars
            .iter()
            .enumerate()
            .map(|(f, vars)| {
                let mut mask = vec![false; nfg.factor(f).table.support_len()];
                vars.iter().for_each(|&(p, v)| mask[p] = keep[v]);
                mask
            })
            .collect();
        let edges = self
            .edge_vars
            .iter()
            .map(|vars| vars.iter().map(|v| v.is_some_and(|v| keep[v])).collect())
            .collect();
        Self::with_masks(nfg, factors, edges)
    }

    fn with_masks(nfg: &Nfg, factors: Vec<Vec<bool>>, edges: Vec<Vec<bool>>) -> Self {
        let mut costs = Vec::new();
        let mut kinds = Vec::new();
        let mut factor_vars = Vec::new();
        for (f, mask) in factors.iter().enumerate() {
            let values = nfg.factor(f).table.values();
            let mut vars = Vec::new();
            for (p, &live) in mask.iter().enumerate() {
                if live {
                    vars.push((p, costs.len()));
                    costs.push(-values[p].ln());
                    kinds.push(VarKind::Factor);
                }
            }
            factor_vars.push(vars);
        }
        let mut edge_vars = Vec::new();
        for (e, mask) in edges.iter().enumerate() {
            let kind = if nfg.edge(e).is_full() { VarKind::FullEdge } else { VarKind::HalfEdge };
            let vars = mask
                .iter()
                .map(|&live| {
                    live.then(|| {
                        costs.push(0.0);
                        kinds.push(kind);
                        costs.len() - 1
                    })
                })
                .collect();
            edge_vars.push(vars);
        }
        BetheCoordinates { factor_vars, edge_vars, costs, kinds }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// Normalization and edge-consistency constraints `A x = b`.
    pub(crate) fn constraints(&self, nfg: &Nfg) -> (DMatrix<f64>, DVector<f64>) {
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for vars in &self.factor_vars {
            rows.push((vars.iter().map(|&(_, v)| (v, 1.0)).collect(), 1.0));
        }
        for vars in &self.edge_vars {
            rows.push((vars.iter().flatten().map(|&v| (v, 1.0)).collect(), 1.0));
        }
        for (f, factor) in nfg.factors().iter().enumerate() {
            for (slot, &e) in factor.edges.iter().enumerate() {
                for (s, edge_var) in self.edge_vars[e].iter().enumerate() {
                    let mut row: Vec<(usize, f64)> = self.factor_vars[f]
                        .iter()
                        .filter(|&&(p, _)| factor.table.symbol_at(factor.table.support()[p], slot) as usize == s)
                        .map(|&(_, v)| (v, 1.0))
                        .collect();
                    if let Some(v) = edge_var {
                        row.push((*v, -1.0));
                    }
                    rows.push((row, 0.0));
                }
            }
        }
        let mut a = DMatrix::zeros(rows.len(), self.len());
        let mut b = DVector::zeros(rows.len());
        for (r, (entries, rhs)) in rows.into_iter().enumerate() {
            for (c, v) in entries {
                a[(r, c)] += v;
            }
            b[r] = rhs;
        }
        (a, b)
    }

    pub fn flatten(&self, nfg: &Nfg, beta: &Beta) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        for (f, vars) in self.factor_vars.iter().enumerate() {
            let support = nfg.factor(f).table.support();
            for &(p, v) in vars {
                x[v] = beta.factor_weight(f, support[p]);
            }
        }
        for (e, vars) in self.edge_vars.iter().enumerate() {
            for (s, v) in vars.iter().enumerate() {
                if let Some(v) = v {
                    x[*v] = beta.edges[e][s];
                }
            }
        }
        x
    }

    pub fn unflatten(&self, nfg: &Nfg, x: &[f64]) -> Beta {
        let mut beta = Beta::zeros(nfg);
        for (f, factor) in nfg.factors().iter().enumerate() {
            for &i in factor.table.support() {
                beta.factors[f].insert(i, 0.0);
            }
            for &(p, v) in &self.factor_vars[f] {
                beta.factors[f].insert(factor.table.support()[p], x[v]);
            }
        }
        for (e, vars) in self.edge_vars.iter().enumerate() {
            for (s, v) in vars.iter().enumerate() {
                if let Some(v) = v {
                    beta.edges[e][s] = x[*v];
                }
            }
        }
        beta
    }

    /// `F_B` extended to every positive vector, in or out of the polytope.
    pub fn free_energy(&self, x: &[f64], t: f64) -> f64 {
        let xlogx = crate::gibbs::xlogx;
        x.iter()
            .zip(&self.costs)
            .zip(&self.kinds)
            .map(|((&v, &c), kind)| match kind {
                VarKind::Factor => v * c + t * xlogx(v),
                VarKind::FullEdge => -t * xlogx(v),
                VarKind::HalfEdge => 0.0,
            })
            .sum()
    }

    pub fn gradient(&self, x: &[f64], t: f64) -> Vec<f64> {
        x.iter()
            .zip(&self.costs)
            .zip(&self.kinds)
            .map(|((&v, &c), kind)| match kind {
                VarKind::Factor => c + t * (v.ln() + 1.0),
                VarKind::FullEdge => -t * (v.ln() + 1.0),
                VarKind::HalfEdge => 0.0,
            })
            .collect()
    }

    pub(crate) fn hessian_diag(&self, x: &[f64], t: f64) -> Vec<f64> {
        x.iter()
            .zip(&self.kinds)
            .map(|(&v, kind)| match kind {
                VarKind::Factor => t / v,
                VarKind::FullEdge => -t / v,
                VarKind::HalfEdge => 0.0,
            })
            .collect()
    }
}
