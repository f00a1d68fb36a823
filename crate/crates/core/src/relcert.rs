//! Batch certification of the relations R^d_{g,A}, pairing matrices between
//! complementary degrees, and their exact ranks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::cohft::stable_types;
use crate::error::{Result, TautError};
use crate::graphs::StableGraph;
use crate::integrals::{certify_zero, pairing};
use crate::scalar::{clear_denominators, parse_rational, Rational};
use crate::spin3::{ptilde_enumerate, relation_class};
use crate::strata::{basis, DecoratedGraph, TautClass};

/// Entry (i, j) is ∫ rows[i] · cols[j]; only nonzero entries are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingMatrix {
    pub g: u32,
    pub n: usize,
    pub d: u32,
    pub rows: Vec<DecoratedGraph>,
    pub cols: Vec<DecoratedGraph>,
    pub entries: BTreeMap<(usize, usize), Rational>,
}

impl PairingMatrix {
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn dense(&self) -> Vec<Vec<Rational>> {
        let mut m = vec![vec![Rational::zero(); self.cols.len()]; self.rows.len()];
        for (&(i, j), c) in &self.entries {
            m[i][j] = c.clone();
        }
        m
    }

    pub fn rank(&self) -> usize {
        exact_rank(&self.dense())
    }

    /// `<rows> <cols>` followed by one `i j p/q` line per nonzero entry.
    pub fn to_sparse(&self) -> String {
        let mut s = format!("{} {}\n", self.rows.len(), self.cols.len());
        for (&(i, j), c) in &self.entries {
            let _ = writeln!(s, "{i} {j} {c}");
        }
        s
    }
}

/// Reads the sparse export back into (rows, cols, entries).
pub fn parse_sparse(text: &str) -> Result<(usize, usize, BTreeMap<(usize, usize), Rational>)> {
    let bad = |l: &str| TautError::Parse(format!("sparse matrix line `{l}`"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| TautError::Parse("empty matrix".into()))?;
    let dims: Vec<usize> = head.split_whitespace().map(|t| t.parse().map_err(|_| bad(head))).collect::<Result<_>>()?;
    let [r, c] = dims[..] else { return Err(bad(head)) };
    let mut entries = BTreeMap::new();
    for l in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        let [i, j, q] = t[..] else { return Err(bad(l)) };
        let (i, j): (usize, usize) = (i.parse().map_err(|_| bad(l))?, j.parse().map_err(|_| bad(l))?);
        let q = parse_rational(q).ok_or_else(|| bad(l))?;
        if i >= r || j >= c {
            return Err(bad(l));
        }
        entries.insert((i, j), q);
    }
    Ok((r, c, entries))
}

/// Pairing of the degree-d basis of S_{g,n} against the basis of degree
/// 3g - 3 + n - d.
pub fn pairing_matrix(g: u32, n: usize, d: u32) -> Result<PairingMatrix> {
    let dim = StableGraph::trivial(g, n)?.dim();
    if d > dim {
        return Err(TautError::InvalidArgument(format!("degree {d} exceeds dimension {dim}")));
    }
    let rows = basis(g, n, d)?;
    let cols = basis(g, n, dim - d)?;
    let found = rows
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let x = TautClass::from_graph(b.clone(), Rational::from_integer(1.into()));
            let mut out = Vec::new();
            for (j, c) in cols.iter().enumerate() {
                let p = pairing(&x, c)?;
                if !p.is_zero() {
                    out.push(((i, j), p));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairingMatrix {
        g,
        n,
        d,
        rows,
        cols,
        entries: found.into_iter().flatten().collect(),
    })
}

/// Rank over ℚ by fraction-free (Bareiss) elimination.
pub fn exact_rank(m: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .filter(|row| row.iter().any(|x| !x.is_zero()))
        .map(|row| clear_denominators(row))
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..cols {
        if rank == a.len() {
            break;
        }
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot = &top[rank];
        rest.par_iter_mut().for_each(|row| {
            let f = row[col].clone();
            for k in col..cols {
                row[k] = (&pivot[col] * &row[k] - &f * &pivot[k]) / &prev;
            }
        });
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertRecord {
    pub g: u32,
    pub n: usize,
    pub d: u32,
    pub a: Vec<u8>,
    pub certified: bool,
    /// Number of complementary basis elements paired against.
    pub pairings: usize,
    pub elapsed: Duration,
}

impl CertRecord {
    pub fn id(&self) -> String {
        let a: Vec<String> = self.a.iter().map(u8::to_string).collect();
        if a.is_empty() {
            "-".into()
        } else {
            a.join(",")
        }
    }

    /// `CERTIFIED g n d id` or `FAILED g n d id`.
    pub fn line(&self) -> String {
        let tag = if self.certified { "CERTIFIED" } else { "FAILED" };
        format!("{tag} {} {} {} {}", self.g, self.n, self.d, self.id())
    }
}

/// Certifies the single relation R^d_{g,A}; the class itself is returned
/// alongside so a failure can be serialized.
pub fn certify_relation(g: u32, a: &[u8], d: u32) -> Result<(CertRecord, TautClass<Rational>)> {
    let start = Instant::now();
    let r = relation_class(g, a.len(), a, d)?;
    let report = certify_zero(&r)?;
    let rec = CertRecord {
        g,
        n: a.len(),
        d,
        a: a.to_vec(),
        certified: report.certified(),
        pairings: report.pairings.len(),
        elapsed: start.elapsed(),
    };
    Ok((rec, r))
}

#[derive(Clone, Debug, Default)]
pub struct BatchReport {
    pub budget: u32,
    pub records: Vec<CertRecord>,
    /// Set when the time limit stopped the run early.
    pub truncated: bool,
    /// The first failing relation, serialized.
    pub counterexample: Option<String>,
    pub elapsed: Duration,
}

impl BatchReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.records.iter().all(|r| r.certified)
    }

    /// One line per relation; identical across runs with the same budget.
    pub fn log(&self) -> String {
        self.records.iter().map(|r| r.line() + "\n").collect()
    }

    pub fn summary(&self) -> String {
        let ok = self.records.iter().filter(|r| r.certified).count();
        format!(
            "summary budget={} relations={} certified={} failed={} complete={} seconds={:.3}",
            self.budget,
            self.records.len(),
            ok,
            self.records.len() - ok,
            !self.truncated,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs `certify_zero` on every R^d_{g,A} in P̃ with 3g - 3 + n ≤ budget.
///
/// Relations for A and a permutation of A differ by relabeling markings, so
/// only nondecreasing A are generated. The run stops at the first failure or
/// once `time_limit` has passed; both leave a valid partial report.
pub fn batch_certify(budget: u32, time_limit: Option<Duration>) -> Result<BatchReport> {
    let start = Instant::now();
    let mut report = BatchReport {
        budget,
        ..Default::default()
    };
    'outer: for (g, n) in stable_types(budget) {
        for (a, d) in ptilde_enumerate(g, n)? {
            if a.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            if time_limit.is_some_and(|t| start.elapsed() > t) {
                report.truncated = true;
                break 'outer;
            }
            let (rec, class) = certify_relation(g, &a, d)?;
            let failed = !rec.certified;
            if failed {
                report.counterexample = Some(format!("{}\n{}", rec.line(), class));
            }
            report.records.push(rec);
            if failed {
                break 'outer;
            }
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}
