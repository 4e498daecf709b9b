//! Information-theoretic evaluation and attack optimization: mutual
//! informations, QBER, secret-key rate, the optimal (p, Lambda^2) search,
//! and the security map with its zero-key-rate contour.

use rayon::prelude::*;

use crate::cloner::{success_probability, ClonerParams, OpticalModel};
use crate::eavesdropper::{joint_distribution, JointDistribution, Party};
use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::protocols::Protocol;

/// Key-rate residual accepted as "R = 0" by the constrained search.
pub const KEY_RATE_TOL: f64 = 1e-6;
/// Coarse grid step of the two-stage optimizer.
const COARSE_STEP: f64 = 0.005;

/// Security figures for one attack configuration.
#[derive(Clone, Copy, Debug)]
pub struct SecurityReport {
    pub qber: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_be: f64,
    /// R = I_AB - min(I_AE, I_BE); negative means the key is compromised.
    pub key_rate: f64,
    pub params: ClonerParams,
    pub success_probability: Option<f64>,
}

impl SecurityReport {
    pub fn from_distribution(
        dist: &JointDistribution,
        params: ClonerParams,
        success_probability: Option<f64>,
    ) -> Self {
        let i_ab = mutual_information(dist, Party::Alice, Party::Bob);
        let i_ae = mutual_information(dist, Party::Alice, Party::Eve);
        let i_be = mutual_information(dist, Party::Bob, Party::Eve);
        SecurityReport {
            qber: dist.qber(),
            i_ab,
            i_ae,
            i_be,
            key_rate: i_ab - i_ae.min(i_be),
            params,
            success_probability,
        }
    }
}

/// Shannon mutual information (bits) between two parties of a joint
/// distribution, marginalizing the third; 0 log 0 terms contribute 0.
pub fn mutual_information(dist: &JointDistribution, x: Party, y: Party) -> f64 {
    let pxy = dist.pair_marginal(x, y);
    let px = [pxy[0][0] + pxy[0][1], pxy[1][0] + pxy[1][1]];
    let py = [pxy[0][0] + pxy[1][0], pxy[0][1] + pxy[1][1]];
    let mut info = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let p = pxy[i][j];
            if p > 0.0 {
                info += p * (p / (px[i] * py[j])).log2();
            }
        }
    }
    info
}

/// Full security evaluation of one attack configuration. When an optics
/// model is supplied the cloner's post-selection success probability is
/// attached to the report.
pub fn analyze(
    protocol: Protocol,
    params: &ClonerParams,
    optics: Option<&OpticalModel>,
) -> Result<SecurityReport> {
    let dist = joint_distribution(protocol, params)?;
    let p_s = match optics {
        Some(model) => Some(success_probability(params, model)?),
        None => None,
    };
    Ok(SecurityReport::from_distribution(&dist, *params, p_s))
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    p: f64,
    lambda_sq: f64,
    report: SecurityReport,
}

impl Candidate {
    /// Ordering key: larger I_AB first, then smaller QBER, then smaller p.
    fn beats(&self, other: &Candidate) -> bool {
        const INFO_TIE: f64 = 1e-9;
        if (self.report.i_ab - other.report.i_ab).abs() > INFO_TIE {
            return self.report.i_ab > other.report.i_ab;
        }
        if (self.report.qber - other.report.qber).abs() > 1e-12 {
            return self.report.qber < other.report.qber;
        }
        self.p < other.p
    }
}

fn report_at(protocol: Protocol, p: f64, lambda_sq: f64) -> Result<SecurityReport> {
    let params = ClonerParams::from_lambda_sq(p, lambda_sq)?;
    let dist = joint_distribution(protocol, &params)?;
    Ok(SecurityReport::from_distribution(&dist, params, None))
}

/// Boundary candidates of the R = 0 set within one p-column, located as
/// roots of I_AE - I_AB and I_BE - I_AB over Lambda^2 and filtered by
/// |key_rate| <= KEY_RATE_TOL.
fn column_candidates(protocol: Protocol, p: f64, steps: usize) -> Result<Vec<Candidate>> {
    let xs: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let reports: Vec<SecurityReport> = xs
        .iter()
        .map(|&x| report_at(protocol, p, x))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for which in 0..2 {
        let gap = |r: &SecurityReport| -> f64 {
            if which == 0 {
                r.i_ae - r.i_ab
            } else {
                r.i_be - r.i_ab
            }
        };
        for i in 0..steps {
            let (g0, g1) = (gap(&reports[i]), gap(&reports[i + 1]));
            if g0 == 0.0 || g0 * g1 < 0.0 {
                // Flat (plateau) stretches sit on the boundary already; skip
                // the bisection when both ends are numerically zero.
                let (cand_x, cand_report) = if g0.abs() < 1e-13 && g1.abs() < 1e-13 {
                    (xs[i], reports[i])
                } else {
                    let (mut lo, mut hi, mut glo) = (xs[i], xs[i + 1], g0);
                    let mut mid_report = reports[i];
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        mid_report = report_at(protocol, p, mid)?;
                        let gm = gap(&mid_report);
                        if glo * gm <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            glo = gm;
                        }
                        if hi - lo < 1e-13 {
                            break;
                        }
                    }
                    (0.5 * (lo + hi), mid_report)
                };
                if cand_report.key_rate.abs() <= KEY_RATE_TOL {
                    out.push(Candidate {
                        p,
                        lambda_sq: cand_x,
                        report: cand_report,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn best_candidate(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in cands {
        if best.as_ref().map_or(true, |b| c.beats(b)) {
            best = Some(c);
        }
    }
    best
}

/// Optimal individual attack: maximize I_AB subject to key_rate = 0 over
/// (p, Lambda^2) in [0,1]^2. Two-stage search: a coarse 0.005 grid of
/// per-column boundary roots, then a fine local scan around the best column;
/// every returned point satisfies |key_rate| <= 1e-6.
pub fn optimize_attack(protocol: Protocol) -> Result<(ClonerParams, SecurityReport)> {
    let coarse = (1.0 / COARSE_STEP).round() as usize;
    let columns: Vec<Result<Vec<Candidate>>> = (0..=coarse)
        .into_par_iter()
        .map(|i| column_candidates(protocol, i as f64 * COARSE_STEP, coarse))
        .collect();
    let mut all = Vec::new();
    for col in columns {
        all.extend(col?);
    }
    let coarse_best = best_candidate(all)
        .expect("key_rate is positive at the pass-through point and negative at strong cloning; the boundary is nonempty");

    // Local refinement: p sweep at 1/20 of the coarse step, doubled
    // lambda^2 resolution.
    let fine_step = COARSE_STEP / 20.0;
    let lo = (coarse_best.p - COARSE_STEP).max(0.0);
    let hi = (coarse_best.p + COARSE_STEP).min(1.0);
    let n = ((hi - lo) / fine_step).round() as usize;
    let fine: Vec<Result<Vec<Candidate>>> = (0..=n)
        .into_par_iter()
        .map(|i| column_candidates(protocol, lo + i as f64 * fine_step, 2 * coarse))
        .collect();
    let mut all = vec![coarse_best];
    for col in fine {
        all.extend(col?);
    }
    let best = best_candidate(all).expect("nonempty by construction");
    let params = ClonerParams::from_lambda_sq(best.p, best.lambda_sq)?;
    Ok((params, best.report))
}

/// QBER bound on the privacy of directly transmitted information: the
/// minimal QBER along the locus I_AB = I_AE, root-bracketed along p for a
/// dense sweep of Lambda^2 rows.
pub fn privacy_bound(protocol: Protocol) -> Result<f64> {
    const ROWS: usize = 400;
    const P_SAMPLES: usize = 400;
    let rows: Vec<Result<Option<f64>>> = (1..ROWS)
        .into_par_iter()
        .map(|j| {
            let lambda_sq = j as f64 / ROWS as f64;
            let mut best: Option<f64> = None;
            let gap = |r: &SecurityReport| r.i_ab - r.i_ae;
            let mut prev = report_at(protocol, 0.0, lambda_sq)?;
            for i in 1..=P_SAMPLES {
                let p = i as f64 / P_SAMPLES as f64;
                let cur = report_at(protocol, p, lambda_sq)?;
                let (g0, g1) = (gap(&prev), gap(&cur));
                if g0 == 0.0 || g0 * g1 < 0.0 {
                    let (mut lo, mut hi, mut glo) = (p - 1.0 / P_SAMPLES as f64, p, g0);
                    let mut root_report = prev;
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        root_report = report_at(protocol, mid, lambda_sq)?;
                        let gm = gap(&root_report);
                        if gm.abs() <= 1e-9 {
                            break;
                        }
                        if glo * gm <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            glo = gm;
                        }
                    }
                    if gap(&root_report).abs() <= KEY_RATE_TOL {
                        best = Some(best.map_or(root_report.qber, |b: f64| b.min(root_report.qber)));
                    }
                }
                prev = cur;
            }
            Ok(best)
        })
        .collect();
    let mut best: Option<f64> = None;
    for row in rows {
        if let Some(q) = row? {
            best = Some(best.map_or(q, |b| b.min(q)));
        }
    }
    best.ok_or_else(|| Error::MalformedAnnouncement("privacy locus not found".into()))
}

/// Grid resolution for the security map (points per axis, inclusive of both
/// endpoints; at least 2 per axis).
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub p_points: usize,
    pub lambda_sq_points: usize,
}

impl GridSpec {
    pub fn square(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidConfig(vec![format!(
                "grid resolution {points} must be at least 2 per axis"
            )]));
        }
        Ok(Self {
            p_points: points,
            lambda_sq_points: points,
        })
    }
}

/// One grid evaluation row of the security map.
#[derive(Clone, Copy, Debug)]
pub struct MapPoint {
    pub p: f64,
    pub lambda_sq: f64,
    pub qber: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_be: f64,
    pub key_rate: f64,
}

/// Dense security evaluation plus the extracted R = 0 contour polylines.
#[derive(Clone, Debug)]
pub struct SecurityMap {
    pub protocol: Protocol,
    pub grid: GridSpec,
    pub points: Vec<MapPoint>,
    /// Zero-key-rate contour as (p, Lambda^2) polylines.
    pub contour: Vec<Vec<(f64, f64)>>,
}

/// Evaluate the key rate over a dense (p, Lambda^2) grid and extract the
/// R = 0 contour by marching on sign changes with linear interpolation.
pub fn security_map(protocol: Protocol, grid: GridSpec) -> Result<SecurityMap> {
    if grid.p_points < 2 || grid.lambda_sq_points < 2 {
        return Err(Error::InvalidConfig(vec![
            "grid resolution must be at least 2 per axis".into(),
        ]));
    }
    let (np, nx) = (grid.p_points, grid.lambda_sq_points);
    let ps: Vec<f64> = (0..np).map(|i| i as f64 / (np - 1) as f64).collect();
    let xs: Vec<f64> = (0..nx).map(|j| j as f64 / (nx - 1) as f64).collect();
    let points: Vec<MapPoint> = ps
        .par_iter()
        .map(|&p| -> Result<Vec<MapPoint>> {
            xs.iter()
                .map(|&x| {
                    let r = report_at(protocol, p, x)?;
                    Ok(MapPoint {
                        p,
                        lambda_sq: x,
                        qber: r.qber,
                        i_ab: r.i_ab,
                        i_ae: r.i_ae,
                        i_be: r.i_be,
                        key_rate: r.key_rate,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let rate = |i: usize, j: usize| points[i * nx + j].key_rate;
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i in 0..np - 1 {
        for j in 0..nx - 1 {
            let corners = [
                (ps[i], xs[j], rate(i, j)),
                (ps[i + 1], xs[j], rate(i + 1, j)),
                (ps[i + 1], xs[j + 1], rate(i + 1, j + 1)),
                (ps[i], xs[j + 1], rate(i, j + 1)),
            ];
            let mut crossings = Vec::new();
            for e in 0..4 {
                let (pa, xa, ra) = corners[e];
                let (pb, xb, rb) = corners[(e + 1) % 4];
                let (sa, sb) = (ra > 0.0, rb > 0.0);
                if sa != sb {
                    let t = ra / (ra - rb);
                    crossings.push((pa + t * (pb - pa), xa + t * (xb - xa)));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0], crossings[1])),
                4 => {
                    // saddle cell: split by edge order
                    segments.push((crossings[0], crossings[1]));
                    segments.push((crossings[2], crossings[3]));
                }
                _ => {}
            }
        }
    }
    let contour = chain_segments(segments);
    Ok(SecurityMap {
        protocol,
        grid,
        points,
        contour,
    })
}

/// Join crossing segments that share endpoints into ordered polylines.
fn chain_segments(segments: Vec<((f64, f64), (f64, f64))>) -> Vec<Vec<(f64, f64)>> {
    use std::collections::HashMap;
    let quant = |p: (f64, f64)| -> (i64, i64) {
        ((p.0 * 1e9).round() as i64, (p.1 * 1e9).round() as i64)
    };
    let mut adjacency: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (idx, seg) in segments.iter().enumerate() {
        adjacency.entry(quant(seg.0)).or_default().push(idx);
        adjacency.entry(quant(seg.1)).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = vec![segments[start].0, segments[start].1];
        // extend forward from the tail, then backward from the head
        for dir in 0..2 {
            loop {
                let tip = if dir == 0 {
                    *line.last().expect("nonempty")
                } else {
                    line[0]
                };
                let Some(next) = adjacency
                    .get(&quant(tip))
                    .and_then(|ids| ids.iter().copied().find(|&i| !used[i]))
                else {
                    break;
                };
                used[next] = true;
                let (a, b) = segments[next];
                let far = if quant(a) == quant(tip) { b } else { a };
                if dir == 0 {
                    line.push(far);
                } else {
                    line.insert(0, far);
                }
            }
        }
        polylines.push(line);
    }
    polylines
}

impl SecurityMap {
    /// Tab-separated table, one row per grid point, header row first.
    pub fn table_tsv(&self) -> String {
        let mut out = String::from("p\tlambda_sq\tqber\ti_ab\ti_ae\ti_be\tkey_rate\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                sig6(pt.p),
                sig6(pt.lambda_sq),
                sig6(pt.qber),
                sig6(pt.i_ab),
                sig6(pt.i_ae),
                sig6(pt.i_be),
                sig6(pt.key_rate),
            ));
        }
        out
    }

    /// Contour polylines as two-column (p, Lambda^2) text; polylines are
    /// separated by blank lines.
    pub fn contour_text(&self) -> String {
        let mut out = String::from("p\tlambda_sq\n");
        for (i, line) in self.contour.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for (p, x) in line {
                out.push_str(&format!("{}\t{}\n", sig6(*p), sig6(*x)));
            }
        }
        out
    }

    /// Smallest Euclidean distance from any contour vertex to a target
    /// point, used to check that the boundary passes through a reference.
    pub fn contour_distance_to(&self, p: f64, lambda_sq: f64) -> f64 {
        self.contour
            .iter()
            .flatten()
            .map(|&(a, b)| ((a - p).powi(2) + (b - lambda_sq).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}
