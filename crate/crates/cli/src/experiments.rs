//! Table builders behind the figure subcommands.

use rayon::prelude::*;

use gkp_osc::analytic::{gkp_rep_stds, tms_asymptotic_optimum};
use gkp_osc::montecarlo::{run, TrialReport};
use gkp_osc::noise::gkp_sigma_from_db;
use gkp_osc::optimizer::{optimize, Objective};
use gkp_osc::{CodeSpec, DecoderKind, GKP_PERIOD};

use crate::table::{Cell, Table};
use crate::{validate_run, AppendixArgs, CliError, Grid, RunArgs, SweepArgs, SweepCode};

pub const FIG3_GRID: Grid = Grid { min: 0.02, max: 0.6, points: 30, log: false };
pub const FIG45_GRID: Grid = Grid { min: 0.01, max: 0.6, points: 60, log: false };
pub const FIG8_GRID: Grid = Grid { min: 0.02, max: 0.6, points: 30, log: false };
pub const APPENDIX_D_GRID: Grid = Grid { min: 0.01, max: 0.05, points: 6, log: true };
pub const SWEEP_GRID: Grid = Grid { min: 0.05, max: 0.5, points: 10, log: false };

/// GKP squeezing levels of the finite-squeezing figure, in dB.
pub const FIG8_DB: [f64; 7] = [11.0, 12.8, 15.0, 20.0, 25.0, 30.0, f64::INFINITY];

/// Seed of the Monte Carlo at grid point `index`, so that neighbouring
/// points draw independent noise.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn setup(run_args: &RunArgs, default: Grid) -> Result<(Grid, Vec<f64>), CliError> {
    validate_run(run_args)?;
    let grid = Grid::resolve(&run_args.grid, default)?;
    let sigmas = grid.values();
    Ok((grid, sigmas))
}

fn mc_columns(r: &TrialReport) -> [Cell; 4] {
    [r.std_q().into(), r.std_p().into(), r.se_std_q().into(), r.se_std_p().into()]
}

pub fn fig3(a: &RunArgs) -> Result<(Table, Grid), CliError> {
    let (grid, sigmas) = setup(a, FIG3_GRID)?;
    let analytic = sigmas.par_iter().map(|&s| gkp_rep_stds(s)).collect::<Result<Vec<_>, _>>()?;
    let code = CodeSpec::gkp_repetition();
    let mut t = Table::new(
        "fig3",
        &["sigma", "sigma_q_analytic", "sigma_p_analytic", "sigma_q_mc", "sigma_p_mc", "se_q", "se_p"],
    );
    for (i, (&s, &(aq, ap))) in sigmas.iter().zip(&analytic).enumerate() {
        let r = run(&code, DecoderKind::GkpRepetition, s, a.trials, point_seed(a.seed, i as u64), a.shards)?;
        let mut row = vec![s.into(), aq.into(), ap.into()];
        row.extend(mc_columns(&r));
        t.push(row);
    }
    Ok((t, grid))
}

pub fn fig45(a: &RunArgs) -> Result<(Table, Grid), CliError> {
    let (grid, sigmas) = setup(a, FIG45_GRID)?;
    let rows = sigmas
        .par_iter()
        .map(|&s| -> Result<Vec<Cell>, CliError> {
            let o = optimize(s, 0.0, Objective::Exact)?;
            // the asymptotic expansion only exists at small noise
            let asym = tms_asymptotic_optimum(s).ok();
            Ok(vec![
                s.into(),
                o.g_star.into(),
                o.squeeze_db.into(),
                o.sigma_l_star.into(),
                asym.map(|(_, sl)| sl).into(),
                asym.map(|(g, _)| g).into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "fig45",
        &["sigma", "g_star", "squeeze_db", "sigma_L_star", "sigma_L_asymptotic", "g_star_asymptotic"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, grid))
}

pub fn fig8(a: &RunArgs) -> Result<(Table, Grid), CliError> {
    let (grid, sigmas) = setup(a, FIG8_GRID)?;
    let levels = if a.gkp_db.is_empty() { FIG8_DB.to_vec() } else { a.gkp_db.clone() };
    let jobs: Vec<(f64, f64)> = levels.iter().flat_map(|&db| sigmas.iter().map(move |&s| (db, s))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(db, s)| -> Result<Vec<Cell>, CliError> {
            let o = optimize(s, gkp_sigma_from_db(db), Objective::NoisyGkp)?;
            Ok(vec![db.into(), s.into(), o.qec_gain.into(), o.g_star.into(), o.squeeze_db.into()])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("fig8", &["s_gkp_db", "sigma", "qec_gain", "g_star", "squeeze_db"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, grid))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn squeezed_lambda(c: f64, sigma: f64) -> Result<f64, CliError> {
    let lam = GKP_PERIOD * c / sigma;
    if !(lam > 1.0 && lam.is_finite()) {
        return Err(CliError::Config(format!("c = {c} gives squeezing λ = {lam} <= 1 at sigma = {sigma}")));
    }
    Ok(lam)
}

pub fn appendix_d(a: &AppendixArgs) -> Result<(Table, Grid), CliError> {
    let (grid, sigmas) = setup(&a.run, APPENDIX_D_GRID)?;
    let mut t = Table::new(
        "appendix-d",
        &["n", "sigma", "lambda", "sigma_q_mc", "sigma_p_mc", "se_q", "se_p", "sigma_L_mc", "slope_q", "slope_p", "slope"],
    );
    for n in [2usize, 3] {
        let mut rows = Vec::new();
        let (mut sq, mut sp, mut sl) = (Vec::new(), Vec::new(), Vec::new());
        for (i, &s) in sigmas.iter().enumerate() {
            let lam = squeezed_lambda(a.c, s)?;
            let code = CodeSpec::gkp_squeezed_repetition(n, lam)?;
            let seed = point_seed(a.run.seed, (n * sigmas.len() + i) as u64);
            let r = run(&code, DecoderKind::GkpSqueezedRepetition, s, a.run.trials, seed, a.run.shards)?;
            let l = (0.5 * (r.moments_q.variance() + r.moments_p.variance())).sqrt();
            sq.push(r.std_q());
            sp.push(r.std_p());
            sl.push(l);
            let mut row = vec![n.into(), s.into(), lam.into()];
            row.extend(mc_columns(&r));
            row.push(l.into());
            rows.push(row);
        }
        let slopes = [loglog_slope(&sigmas, &sq), loglog_slope(&sigmas, &sp), loglog_slope(&sigmas, &sl)];
        for mut row in rows {
            row.extend(slopes.map(Cell::Num));
            t.push(row);
        }
    }
    Ok((t, grid))
}

pub fn sweep(a: &SweepArgs) -> Result<(Table, Grid), CliError> {
    let (grid, sigmas) = setup(&a.run, SWEEP_GRID)?;
    if a.run.gkp_db.len() > 1 {
        return Err(CliError::Config("sweep takes at most one --gkp-db value".into()));
    }
    let sigma_gkp = a.run.gkp_db.first().map(|&db| gkp_sigma_from_db(db));
    if let Some(g) = a.gain {
        if !(g >= 1.0 && g.is_finite()) {
            return Err(CliError::Config(format!("gain must be >= 1, got {g}")));
        }
    }
    let mut t = Table::new(
        "sweep",
        &["sigma", "parameter", "sigma_q_mc", "sigma_p_mc", "se_q", "se_p", "mean_q", "mean_p"],
    );
    for (i, &s) in sigmas.iter().enumerate() {
        let (code, kind, parameter) = match a.code {
            SweepCode::GaussianRepetition => {
                (CodeSpec::gaussian_repetition(a.n)?, DecoderKind::GaussianRepetition, None)
            }
            SweepCode::GkpRepetition => (CodeSpec::gkp_repetition(), DecoderKind::GkpRepetition, None),
            SweepCode::GkpTms => {
                let gain = match a.gain {
                    Some(g) => g,
                    None => optimize(s, sigma_gkp.unwrap_or(0.0), Objective::NoisyGkp)?.g_star,
                };
                (CodeSpec::gkp_tms(gain)?, DecoderKind::GkpTwoModeSqueezing, Some(gain))
            }
            SweepCode::GkpSqueezedRepetition => {
                let lam = squeezed_lambda(a.c, s)?;
                (CodeSpec::gkp_squeezed_repetition(a.n, lam)?, DecoderKind::GkpSqueezedRepetition, Some(lam))
            }
        };
        let code = match sigma_gkp {
            Some(sg) => code.with_gkp_noise(sg)?,
            None => code,
        };
        let r = run(&code, kind, s, a.run.trials, point_seed(a.run.seed, i as u64), a.run.shards)?;
        let mut row = vec![s.into(), parameter.into()];
        row.extend(mc_columns(&r));
        row.extend([Cell::Num(r.mean_q()), Cell::Num(r.mean_p())]);
        t.push(row);
    }
    Ok((t, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GridArgs;

    fn args(min: f64, max: f64, points: usize, trials: u64) -> RunArgs {
        RunArgs {
            grid: GridArgs { sigma_min: Some(min), sigma_max: Some(max), points: Some(points), log: false },
            trials,
            seed: 5,
            shards: 2,
            gkp_db: Vec::new(),
            out: None,
            metadata: None,
        }
    }

    fn num(c: Cell) -> f64 {
        match c {
            Cell::Num(x) => x,
            other => panic!("not a number: {other:?}"),
        }
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn fig3_small_noise_row() {
        let (t, _) = fig3(&args(0.1, 0.2, 2, 20_000)).unwrap();
        let q = num(t.column("sigma_q_analytic").unwrap()[0]);
        let p = num(t.column("sigma_p_analytic").unwrap()[0]);
        assert!((q - 0.0707).abs() < 5e-4, "{q}");
        assert!((p - 0.100).abs() < 1e-3, "{p}");
        let mc = num(t.column("sigma_q_mc").unwrap()[0]);
        let se = num(t.column("se_q").unwrap()[0]);
        assert!((mc - q).abs() < 4.0 * se);
    }

    #[test]
    fn fig45_headline_and_asymptotic_columns() {
        let (t, _) = fig45(&args(0.1, 0.4, 4, 1)).unwrap();
        assert!((num(t.column("g_star").unwrap()[0]) - 4.806).abs() < 0.03);
        assert!((num(t.column("sigma_L_star").unwrap()[0]) - 0.036).abs() < 0.001);
        // σ = 0.3 and 0.4 lie outside the expansion's range
        let asym = t.column("sigma_L_asymptotic").unwrap();
        assert!(matches!(asym[0], Cell::Num(_)));
        assert_eq!(asym[2], Cell::Empty);
        assert_eq!(asym[3], Cell::Empty);
    }

    #[test]
    fn fig8_ideal_level_matches_fig45() {
        let mut a = args(0.1, 0.2, 2, 1);
        a.gkp_db = vec![f64::INFINITY, 30.0];
        let (t, _) = fig8(&a).unwrap();
        assert_eq!(t.rows.len(), 4);
        let (f, _) = fig45(&args(0.1, 0.2, 2, 1)).unwrap();
        let ideal = num(t.column("qec_gain").unwrap()[0]);
        let sl = num(f.column("sigma_L_star").unwrap()[0]);
        assert!((ideal - 0.01 / (sl * sl)).abs() < 1e-9);
        let thirty = num(t.column("qec_gain").unwrap()[2]);
        assert!((thirty - 4.41).abs() < 0.05, "{thirty}");
    }

    #[test]
    fn squeezed_sweep_rejects_weak_squeezing() {
        let a = AppendixArgs { run: args(0.1, 0.3, 2, 10), c: 0.08 };
        assert!(matches!(appendix_d(&a), Err(CliError::Config(_))));
    }
}
