//! The acceptance criteria as library functions, shared by the test suite and
//! the `verify` subcommand.

use crate::amplitude::{amplitude_bruteforce, amplitude_facesum, check_melonic_bounds, EvalOptions, FaceSumOptions};
use crate::ensemble::{ensemble_sobolev, EnsembleConfig};
use crate::error::{Error, Result};
use crate::graph::{ExpansionGraph, GraphFamily};
use crate::melonic::{elementary_melons, find_reductions, is_melonic, melonic_family, reduce, MoveType};
use crate::series::{order2_reference, sobolev_coefficient, Scope};
use crate::stranded::{incidence, to_stranded};
use crate::trees::{count_heap_trees_1rooted, fuss_catalan, scalar_flow_coefficients};
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

/// Pinned tolerances.
pub mod tol {
    /// Engine against closed forms at order two.
    pub const ORDER2: f64 = 1e-6;
    /// Conserved norms at order two.
    pub const ORDER2_CONSERVED: f64 = 1e-8;
    /// `|s_{2,2}/N^2 - 3/32|` at `p = 0.99`.
    pub const ASYMPTOTIC: f64 = 0.02;
    /// Invariant drift per trajectory.
    pub const DRIFT: f64 = 1e-8;
    /// Standard errors allowed between ensemble and series.
    pub const SIGMAS: f64 = 3.0;
    /// Tree sums against Taylor coefficients.
    pub const SCALAR_FLOW: f64 = 1e-12;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Order-two oracles and small samples; seconds.
    Quick,
    /// Everything at the stated sizes; minutes.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {:<28} {:>8.2}s  {}", self.id, self.name, self.seconds, self.detail)
    }
}

pub const NAMES: [&str; 10] = [
    "counting fixtures",
    "order-two oracle",
    "asymptotic coefficient",
    "melonic iff degree zero",
    "face bound",
    "amplitude bounds",
    "brute vs face sum",
    "incidence fixture",
    "monte carlo consistency",
    "scalar flow",
];

fn outcome(id: u8, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let t = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name: NAMES[id as usize - 1],
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

pub fn counting_fixtures() -> Outcome {
    outcome(1, || {
        let cases = [
            ("T", 3, 3, 15u32),
            ("T", 3, 4, 105),
            ("T", 2, 3, 6),
            ("T", 2, 4, 24),
            ("C", 3, 3, 12),
            ("C", 3, 4, 55),
        ];
        let mut bad = Vec::new();
        for (kind, q, h, want) in cases {
            let got = if kind == "T" { count_heap_trees_1rooted(q, h)? } else { fuss_catalan(q, h)? };
            if got != want.into() {
                bad.push(format!("{kind}({q},{h})={got}"));
            }
        }
        Ok((bad.is_empty(), if bad.is_empty() { "6/6 exact".into() } else { bad.join(" ") }))
    })
}

pub fn order2_oracle() -> Outcome {
    outcome(2, || {
        let mut worst = 0.0f64;
        let mut worst_err = 0.0f64;
        let mut conserved = 0.0f64;
        for p in [0.3, 0.5, 0.9] {
            for g in [0.0, 1.0, 2.0, 3.0] {
                let c = sobolev_coefficient(2, g, p, Scope::Full, None)?;
                let (d, r) = order2_reference(g, p)?;
                worst = worst.max((c.value - d - r).abs());
                worst_err = worst_err.max(c.error);
                if g < 2.0 {
                    conserved = conserved.max(c.value.abs());
                }
            }
        }
        let ok = worst <= tol::ORDER2 && worst_err <= tol::ORDER2 && conserved <= tol::ORDER2_CONSERVED;
        Ok((ok, format!("max|engine-closed|={worst:.1e} max err={worst_err:.1e} max|s_0,s_1|={conserved:.1e}")))
    })
}

pub fn asymptotic_coefficient() -> Outcome {
    outcome(3, || {
        let target = 3.0 / 32.0;
        let mut vals = Vec::new();
        for p in [0.9, 0.95, 0.99] {
            let c = sobolev_coefficient(2, 2.0, p, Scope::Melonic, None)?;
            let n = 1.0 / (1.0 - p);
            vals.push(c.value / (n * n));
        }
        let monotone = vals.windows(2).all(|w| (w[1] - target).abs() < (w[0] - target).abs() && w[1] > w[0]);
        let last = (vals[2] - target).abs();
        Ok((monotone && last < tol::ASYMPTOTIC, format!("s/N^2 = {:.6} {:.6} {:.6}, 3/32 = {target}", vals[0], vals[1], vals[2])))
    })
}

/// Per-graph classification used by the degree and face checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanStats {
    pub graphs: u64,
    pub melonic: u64,
    /// `melonic != (d == 0)`.
    pub degree_exceptions: u64,
    pub face_violations: u64,
    /// `F = 3n/2 + 1` but not melonic, or melonic with fewer faces.
    pub equality_exceptions: u64,
}

fn scan_one(g: &ExpansionGraph) -> Result<ScanStats> {
    let gs = to_stranded(g)?;
    let inc = incidence(&gs);
    let n = g.n();
    let f = gs.face_count();
    let d = n - inc.free_faces();
    let m = is_melonic(g);
    let max = 3 * n / 2 + 1;
    Ok(ScanStats {
        graphs: 1,
        melonic: m as u64,
        degree_exceptions: (m != (d == 0)) as u64,
        face_violations: (f > max) as u64,
        equality_exceptions: (m != (f == max)) as u64,
    })
}

fn merge(a: ScanStats, b: ScanStats) -> ScanStats {
    ScanStats {
        graphs: a.graphs + b.graphs,
        melonic: a.melonic + b.melonic,
        degree_exceptions: a.degree_exceptions + b.degree_exceptions,
        face_violations: a.face_violations + b.face_violations,
        equality_exceptions: a.equality_exceptions + b.equality_exceptions,
    }
}

/// Every `stride`-th graph of order `n`.
pub fn scan(n: usize, stride: usize) -> Result<ScanStats> {
    let fam = GraphFamily::new(n)?;
    let idx: Vec<usize> = (0..fam.len()).step_by(stride.max(1)).collect();
    idx.par_iter()
        .map(|&i| scan_one(&fam.get(i)))
        .try_reduce(ScanStats::default, |a, b| Ok(merge(a, b)))
}

/// Stride giving at least `1e5` graphs at order four.
pub const ORDER4_STRIDE: usize = 41;

/// The order-two family, plus at order four a strided sample together with
/// every melonic graph (the sample alone holds few of them).
fn scans(level: Level) -> Result<(ScanStats, Option<ScanStats>)> {
    let two = scan(2, 1)?;
    let four = match level {
        Level::Quick => None,
        Level::Full => {
            let fam: Vec<ExpansionGraph> = melonic_family(4)?.into_values().collect();
            let mel = fam.par_iter().map(scan_one).try_reduce(ScanStats::default, |a, b| Ok(merge(a, b)))?;
            Some(merge(scan(4, ORDER4_STRIDE)?, mel))
        }
    };
    Ok((two, four))
}

pub fn melonic_iff_degree_zero(level: Level) -> Outcome {
    outcome(4, || {
        let (two, four) = scans(level)?;
        let mut detail = format!("n=2: {} graphs, {} melonic, {} exceptions", two.graphs, two.melonic, two.degree_exceptions);
        let mut ok = two.degree_exceptions == 0;
        if let Some(s) = four {
            ok &= s.degree_exceptions == 0 && s.graphs >= 100_000;
            detail += &format!("; n=4 sample and melonic family: {} graphs, {} melonic, {} exceptions", s.graphs, s.melonic, s.degree_exceptions);
        }
        Ok((ok, detail))
    })
}

pub fn face_bound(level: Level) -> Outcome {
    outcome(5, || {
        let (two, four) = scans(level)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (n, s) in [(2, Some(two)), (4, four)] {
            if let Some(s) = s {
                ok &= s.face_violations == 0 && s.equality_exceptions == 0;
                parts.push(format!("n={n}: {} over bound, {} equality exceptions", s.face_violations, s.equality_exceptions));
            }
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn amplitude_bounds(level: Level) -> Outcome {
    outcome(6, || {
        let mut graphs = elementary_melons();
        if level == Level::Full {
            graphs.extend(melonic_family(4)?.into_values());
        }
        let points = [(0usize, 0.5f64), (0, 0.9), (2, 0.5), (2, 0.9)];
        let jobs: Vec<(&ExpansionGraph, usize, f64)> =
            graphs.iter().flat_map(|g| points.iter().map(move |&(r, p)| (g, r, p))).collect();
        let res: Vec<_> = jobs
            .par_iter()
            .map(|&(g, r, p)| check_melonic_bounds(g, r, p).map(|b| (g.canonical_key(), r, p, b)))
            .collect::<Result<_>>()?;
        let bad: Vec<String> = res
            .iter()
            .filter(|x| !x.3.lower || !x.3.upper)
            .map(|x| format!("{} r={} p={}: {:?}", x.0, x.1, x.2, x.3))
            .collect();
        let n4 = graphs.len() - 14;
        Ok((
            bad.is_empty(),
            if bad.is_empty() {
                format!("14 elementary + {n4} order-4 melonic graphs, {} evaluations, 0 violations", res.len())
            } else {
                bad.join("; ")
            },
        ))
    })
}

pub fn brute_vs_face() -> Outcome {
    outcome(7, || {
        let fam = GraphFamily::new(2)?;
        let graphs: Vec<ExpansionGraph> = fam.iter().collect();
        let eval = EvalOptions::default();
        let fo = FaceSumOptions::default();
        let res: Vec<(f64, bool)> = graphs
            .par_iter()
            .flat_map(|g| {
                let mut out = Vec::new();
                for r in [0, 1, 3] {
                    for p in [0.3, 0.6, 0.9] {
                        out.push((g, r, p));
                    }
                }
                out
            })
            .map(|(g, r, p)| {
                let b = amplitude_bruteforce::<f64>(g, r, p, &eval)?;
                let f = amplitude_facesum(g, r, p, &eval, &fo)?;
                let d = (b.value - f.value).abs();
                Ok((d, d <= b.tail + f.tail && b.converged && f.converged))
            })
            .collect::<Result<_>>()?;
        let bad = res.iter().filter(|x| !x.1).count();
        let worst = res.iter().map(|x| x.0).fold(0.0, f64::max);
        Ok((bad == 0, format!("{} comparisons, {bad} outside tails, max |diff| = {worst:.1e}", res.len())))
    })
}

/// The order-four example with one type I reduction to an order-two graph of degree one.
pub const INCIDENCE_FIXTURE: &str = "g4|ta,1.2,b,3.2|w3,2,4,0,1|c1-3:1,2-4:1";
pub const INCIDENCE_REDUCED: &str = "g2|ta,b|w2,1,0|c1-2:1";
/// Reference matrices, faces numbered as drawn.
pub const INCIDENCE_E: [[i64; 6]; 2] = [[1, 1, -2, 0, 0, 0], [0, -1, 0, 1, 1, -1]];
pub const INCIDENCE_E_REDUCED: [[i64; 3]; 1] = [[1, 1, -2]];
/// The same matrix with faces numbered in traversal order.
pub const INCIDENCE_E_TRAVERSAL: [[i64; 6]; 2] = [[1, 1, -2, 0, 0, 0], [0, 1, 0, 1, -1, -1]];

fn all_perms(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// A relabeling of the non-root faces and a sign per row taking `got` to
/// `want`, if one exists. Face numbering and node orientation are conventions.
pub fn match_up_to_labels<const C: usize>(got: &[Vec<i64>], want: &[[i64; C]]) -> Option<Vec<usize>> {
    if got.len() != want.len() || got.iter().any(|r| r.len() != C) || C == 0 {
        return None;
    }
    all_perms(C - 1).into_iter().find_map(|p| {
        let perm: Vec<usize> = std::iter::once(0).chain(p.into_iter().map(|x| x + 1)).collect();
        let ok = got.iter().zip(want).all(|(g, w)| {
            let s = (0..C).map(|c| g[perm[c]]);
            s.clone().zip(w).all(|(a, b)| a == *b) || s.zip(w).all(|(a, b)| a == -b)
        });
        ok.then_some(perm)
    })
}

pub fn incidence_fixture() -> Outcome {
    outcome(8, || {
        let g = ExpansionGraph::from_key(INCIDENCE_FIXTURE)?;
        let inc = incidence(&to_stranded(&g)?);
        let mv = find_reductions(&g)
            .into_iter()
            .find(|m| m.kind == MoveType::I)
            .ok_or_else(|| Error::Internal("fixture has no type I melon".into()))?;
        let gr = reduce(&g, &mv)?;
        let incr = incidence(&to_stranded(&gr)?);
        let d = g.n() - inc.free_faces();
        let exact = inc.e.iter().zip(&INCIDENCE_E_TRAVERSAL).all(|(a, b)| a[..] == b[..]);
        let perm = match_up_to_labels(&inc.e, &INCIDENCE_E);
        let ok = exact
            && perm.is_some()
            && inc.rank == 2
            && gr.canonical_key() == INCIDENCE_REDUCED
            && incr.e.iter().zip(&INCIDENCE_E_REDUCED).all(|(a, b)| a[..] == b[..])
            && incr.rank == 1
            && d == 1;
        Ok((ok, format!("E={:?} (faces {:?}) R={} E'={:?} R'={} d={d}", inc.e, perm.unwrap_or_default(), inc.rank, incr.e, incr.rank)))
    })
}

pub fn monte_carlo(level: Level, seed: u64) -> Outcome {
    outcome(9, || {
        let mut cfg = EnsembleConfig::new(0.5, seed);
        if level == Level::Quick {
            cfg.samples = 400;
        }
        let tab = ensemble_sobolev(&cfg)?;
        let s22 = sobolev_coefficient(2, 2.0, 0.5, Scope::Full, None)?;
        let fit = |g: f64| tab.fits.iter().find(|f| f.gamma == g).copied();
        let (f2, f3) = (fit(2.0).unwrap(), fit(3.0).unwrap());
        let sigma = (f2.c2_err.powi(2) + s22.error.powi(2)).sqrt();
        let z = (f2.c2 - s22.value).abs() / sigma;
        let ok = tab.max_drift <= tol::DRIFT && z <= tol::SIGMAS && f2.c2 > 0.0 && f3.c2 > 0.0;
        Ok((
            ok,
            format!(
                "M={} drift={:.1e} c2(g=2)={:.4}+-{:.4} vs {:.4} ({z:.2} sigma) c2(g=3)={:.3}+-{:.3}",
                cfg.samples, tab.max_drift, f2.c2, f2.c2_err, s22.value, f3.c2, f3.c2_err
            ),
        ))
    })
}

pub fn scalar_flow() -> Outcome {
    outcome(10, || {
        let mut worst = 0.0f64;
        for (q, lambda, x0) in [(2, 1.0, 1.0), (3, 1.0, 1.0), (3, 0.7, -1.3), (4, -0.5, 0.8), (5, 1.5, 0.6)] {
            let (tree, taylor) = scalar_flow_coefficients::<f64>(q, lambda, x0, 6)?;
            for (a, b) in tree.iter().zip(&taylor) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        Ok((worst <= tol::SCALAR_FLOW, format!("5 flows through order 6, max rel diff {worst:.1e}")))
    })
}

/// Seed for the ensemble check.
pub const DEFAULT_SEED: u64 = 20_240_611;

pub fn run(ids: &[u8], level: Level, seed: u64) -> Vec<Outcome> {
    ids.iter()
        .filter_map(|&id| {
            Some(match id {
                1 => counting_fixtures(),
                2 => order2_oracle(),
                3 => asymptotic_coefficient(),
                4 => melonic_iff_degree_zero(level),
                5 => face_bound(level),
                6 => amplitude_bounds(level),
                7 => brute_vs_face(),
                8 => incidence_fixture(),
                9 => monte_carlo(level, seed),
                10 => scalar_flow(),
                _ => return None,
            })
        })
        .collect()
}
