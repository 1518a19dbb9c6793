use std::io::Write;

use crate::error::{Error, Result};
use crate::fbm::JointPath;
use crate::frac::{cov_rh, HurstParam};
use crate::stats::compensated_sum;

/// Sample versus target covariance on a set of times.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub times: Vec<f64>,
    /// Row-major `m * m`.
    pub sample: Vec<f64>,
    pub target: Vec<f64>,
    /// `|sample - target| / standard error`, entrywise.
    pub deviation_se: Vec<f64>,
    pub max_deviation_se: f64,
    /// Some coordinate has zero sample variance while its target does not.
    pub degenerate: bool,
}

/// `paths[p][i]` is the value of path `p` at `times[i]`.
pub fn covariance_report(paths: &[Vec<f64>], times: &[f64], h: HurstParam) -> Result<CovarianceReport> {
    let n = paths.len();
    if n < 2 {
        return Err(Error::Config(format!("covariance needs at least 2 paths, got {n}")));
    }
    let m = times.len();
    if let Some(p) = paths.iter().find(|p| p.len() != m) {
        return Err(Error::Dimension { expected: m, got: p.len() });
    }
    let means: Vec<f64> = (0..m)
        .map(|i| compensated_sum(paths.iter().map(|p| p[i])) / n as f64)
        .collect();
    let mut sample = vec![0.0; m * m];
    let mut target = vec![0.0; m * m];
    let mut dev = vec![0.0; m * m];
    let mut degenerate = false;
    let nf = n as f64;
    for i in 0..m {
        for j in 0..=i {
            let prods: Vec<f64> = paths.iter().map(|p| (p[i] - means[i]) * (p[j] - means[j])).collect();
            let c = compensated_sum(prods.iter().copied()) / (nf - 1.0);
            let pm = compensated_sum(prods.iter().copied()) / nf;
            let var = compensated_sum(prods.iter().map(|x| (x - pm) * (x - pm))) / (nf - 1.0);
            let se = (var / nf).sqrt();
            let tgt = cov_rh(h, times[i], times[j])?;
            if i == j && c == 0.0 && tgt > 0.0 {
                degenerate = true;
            }
            let z = if (c - tgt).abs() == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                (c - tgt).abs() / se
            };
            for (a, b) in [(i, j), (j, i)] {
                sample[a * m + b] = c;
                target[a * m + b] = tgt;
                dev[a * m + b] = z;
            }
        }
    }
    let max_deviation_se = dev.iter().copied().fold(0.0, f64::max);
    Ok(CovarianceReport {
        times: times.to_vec(),
        sample,
        target,
        deviation_se: dev,
        max_deviation_se,
        degenerate,
    })
}

/// CSV dump with columns `path_index,k,t_k,dW_1..dW_d,bh_1..bh_d`; the
/// increment columns are empty on the last row.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[(u64, JointPath)]) -> std::io::Result<()> {
    let d = paths.first().map_or(1, |(_, p)| p.dim());
    let mut header = String::from("path_index,k,t_k");
    for c in 1..=d {
        header.push_str(&format!(",dW_{c}"));
    }
    for c in 1..=d {
        header.push_str(&format!(",bh_{c}"));
    }
    writeln!(out, "{header}")?;
    for (idx, p) in paths {
        let g = p.grid();
        let n = g.n_steps();
        for k in 0..=n {
            let mut line = format!("{idx},{k},{}", g.time(k));
            for c in 0..d {
                if k < n {
                    line.push_str(&format!(",{}", p.dw(k, c)));
                } else {
                    line.push(',');
                }
            }
            for c in 0..d {
                line.push_str(&format!(",{}", p.bh(k, c)));
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{GridSpec, PathSeed, VolterraWeights};

    #[test]
    fn duplicated_path_is_flagged_degenerate() {
        let h = HurstParam::new(0.1).unwrap();
        let p = vec![0.3, -0.2];
        let r = covariance_report(&[p.clone(), p], &[0.5, 1.0], h).unwrap();
        assert!(r.degenerate);
        assert!(r.sample.iter().all(|&c| c == 0.0));
        assert!(covariance_report(&[vec![0.0, 1.0]], &[0.5, 1.0], h).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec::new(1.0, 2).unwrap();
        let w = VolterraWeights::new(g, HurstParam::new(0.2).unwrap());
        let p = w.sample(1, PathSeed::new(0, 0)).unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &[(0, p)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path_index,k,t_k,dW_1,bh_1");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0,0,") && lines[1].ends_with(",0"));
        assert!(lines[3].starts_with("0,2,1,,"));
    }
}
