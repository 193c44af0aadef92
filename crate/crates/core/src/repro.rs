//! Reproduction of the three ℤ² membership lattices and the gap-bound table
//! for the powers-of-two complement.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::report::{Certificate, DecisionReport, Scope, Verdict};
use crate::set_algebra::{SetExpr, Subset};
use crate::syndetic::{decide_n_syndetic, gap_scan_range, SyndeticWitness};

pub const GRID_SIDE: i64 = 20;
/// Right end of the coordinate window `[1, 2^20]` used for the gap scan.
pub const KSTAR_WINDOW: i64 = 1 << 20;
pub const KSTAR_MAX_N: usize = 5;

/// Membership of `(i, j)` in `A × A` for `1 ≤ i, j ≤ 20`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FigureGrid {
    pub name: String,
    pub set: SetExpr,
    /// `marked[j - 1][i - 1]`.
    pub marked: Vec<Vec<bool>>,
}

impl FigureGrid {
    pub fn new(name: &str, set: SetExpr) -> Result<Self> {
        let a = Subset::new(&GroupModel::integers(), &set)?;
        let row: Vec<bool> = (1..=GRID_SIDE).map(|x| a.contains(&GroupElement::Int(x))).collect();
        let marked = row.iter().map(|&yj| row.iter().map(|&xi| xi && yj).collect()).collect();
        Ok(FigureGrid { name: name.into(), set, marked })
    }

    pub fn count(&self) -> usize {
        self.marked.iter().flatten().filter(|&&m| m).count()
    }

    /// One row per `j`, a header of `i` values, cells `1`/`0`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> =
            std::iter::once("j\\i".to_string()).chain((1..=GRID_SIDE).map(|i| i.to_string())).collect();
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(&header).map_err(csv_err)?;
        for (j, row) in self.marked.iter().enumerate() {
            let rec: Vec<String> =
                std::iter::once((j + 1).to_string()).chain(row.iter().map(|&m| u8::from(m).to_string())).collect();
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }
}

pub fn figure_grids() -> Result<Vec<FigureGrid>> {
    Ok(vec![
        FigureGrid::new("fig1", SetExpr::multiples(2))?,
        FigureGrid::new("fig2", SetExpr::non_multiples(3))?,
        FigureGrid::new("fig3", SetExpr::PowersOfTwoComplement)?,
    ])
}

/// Least gap bound for one `n`, next to the two closed forms it is
/// compared with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KStarRow {
    pub n: usize,
    pub k_star: Option<u32>,
    /// `2^(n-1) + 1`.
    pub stated_k: u64,
    /// `2^n + 1`.
    pub upper_k: u64,
    pub stated_k_passes: bool,
    pub upper_k_passes: bool,
    /// A tuple defeating `{0..stated_k}` on the window, when it fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated_k_refutation: Option<Vec<i64>>,
}

/// Brute-force gap bounds for the powers-of-two complement over `[1, 2^20]`.
pub fn k_star_table(max_n: usize, cfg: &RunConfig) -> Result<Vec<KStarRow>> {
    let a = Subset::new(&GroupModel::integers(), &SetExpr::PowersOfTwoComplement)?;
    (1..=max_n)
        .map(|n| {
            let scan = gap_scan_range(&a, n, 1, KSTAR_WINDOW, cfg.max_k)?;
            let stated_k = (1u64 << (n - 1)) + 1;
            let upper_k = (1u64 << n) + 1;
            let passes = |k: u64| u32::try_from(k).is_ok_and(|k| scan.passes(k));
            let stated_k_refutation =
                scan.refutations.iter().find(|(k, _)| u64::from(*k) == stated_k).map(|(_, t)| t.clone());
            Ok(KStarRow {
                n,
                k_star: scan.k_star,
                stated_k,
                upper_k,
                stated_k_passes: passes(stated_k),
                upper_k_passes: passes(upper_k),
                stated_k_refutation,
            })
        })
        .collect()
}

/// Expected n-syndetic verdicts per figure: `(name, set, [(n, verdict)])`.
fn figure_claims() -> Vec<(&'static str, SetExpr, Vec<(usize, Verdict)>)> {
    vec![
        ("fig1", SetExpr::multiples(2), vec![(1, Verdict::Proved), (2, Verdict::Refuted)]),
        ("fig2", SetExpr::non_multiples(3), vec![(2, Verdict::Proved), (3, Verdict::Refuted)]),
    ]
}

/// Builds the grids, decides each figure's claims and tabulates the gap
/// bounds. The report is proved when every claim is confirmed and every
/// `n ≤ 5` has a gap bound on the window.
pub fn repro_figures(cfg: &RunConfig) -> Result<(DecisionReport, Vec<FigureGrid>)> {
    let grids = figure_grids()?;
    let g = GroupModel::integers();
    let mut items = Vec::new();
    let mut ok = true;
    let mut report = DecisionReport::new("repro-figures", "z", Verdict::Proved, Scope::Exact);
    for grid in &grids {
        report = report.with_scale(&format!("{}_marked", grid.name), grid.count());
    }
    for (name, set, claims) in figure_claims() {
        let a = Subset::new(&g, &set)?;
        for (n, expected) in claims {
            let r = decide_n_syndetic(&a, n, cfg)?;
            let good = r.verdict == expected && r.scope.is_exact();
            ok &= good;
            report = report.with_scale(&format!("{name}_n{n}"), r.verdict);
            if !good {
                report =
                    report.note(format!("{name}: expected {expected} for n = {n}, got {} ({})", r.verdict, r.scope));
            }
            items.extend(r.certificate);
        }
    }
    let table = k_star_table(KSTAR_MAX_N, cfg)?;
    let window = Scope::Window { radius: KSTAR_WINDOW as u64 };
    for row in &table {
        match row.k_star {
            Some(k) => items.push(Certificate::Syndetic(SyndeticWitness {
                n: row.n,
                f: (0..=k as i64).map(GroupElement::Int).collect(),
                scope: window,
            })),
            None => {
                ok = false;
                report = report.note(format!("fig3: no gap bound up to {} for n = {}", cfg.max_k, row.n));
            }
        }
        if !row.stated_k_passes {
            report = report.note(format!(
                "fig3: k = 2^(n-1)+1 = {} fails for n = {} (least passing k is {})",
                row.stated_k,
                row.n,
                row.k_star.map_or("none".into(), |k| k.to_string())
            ));
        }
    }
    report = report.with_scale("k_star", &table).with_scale("k_star_window", [1, KSTAR_WINDOW]);
    report.scope = window;
    report.verdict = if ok { Verdict::Proved } else { Verdict::Refuted };
    Ok((report.with_certificate(Certificate::Bundle { items }), grids))
}

/// Writes `fig1.csv`, `fig2.csv`, `fig3.csv` into `dir`.
pub fn write_grids(grids: &[FigureGrid], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    grids
        .iter()
        .map(|g| {
            let p = dir.join(format!("{}.csv", g.name));
            std::fs::write(&p, g.to_csv()?)?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let counts: Vec<usize> = figure_grids().unwrap().iter().map(FigureGrid::count).collect();
        assert_eq!(counts, [100, 196, 256]);
    }

    #[test]
    fn csv_layout() {
        let g = FigureGrid::new("fig1", SetExpr::multiples(2)).unwrap();
        let text = g.to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[1].starts_with("1,0,0,0"));
        assert!(lines[2].starts_with("2,0,1,0,1"));
    }
}
