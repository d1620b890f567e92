//! The four subcommands. Exit-code contract: 0 success (for `solve`,
//! convergence by rule; for `check`, every asserted property passed),
//! 1 error, 2 iteration cap reached.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use afmin::diagnostics::{
    at_induced_prox_check, euclid_summa2_reading_probe, euclid_summa_gap_identity,
    first_monotonicity, hellinger_inequality_comparison, hrr_probe,
    landweber_equivalence_deviation, limit_characterization_euclid, limit_characterization_smart,
    ls_min_norm, oracle_minimize, second_monotonicity, summa2_candidate_probe, summa2_check_emml,
    summa2_with_g_check, summa_check_euclid, summa_check_smart, weighted_ls_projection,
};
use afmin::distances::{hellinger, kl_vec, pearson, validate_phi, PhiSpec};
use afmin::framework::{sample_around_trace, IterationTrace, SampleDomain, StopReason, SLACK_TOL};
use afmin::model::{Family, NonnegMatrix, ProblemMatrix, RealMatrix};
use afmin::report::{write_reports_csv, CheckReport};
use afmin::solvers::{
    emml_am, emml_step, euclid_am, hellinger_am, hellinger_t_step, pearson_am, pearson_r_step,
    smart_am, smart_step, solve, solve_emml, solve_hellinger, solve_pearson, solve_smart, KlRun,
    SolverConfig,
};
use afmin::synth;

use crate::problem::ProblemFile;

fn default_out(file: &Path, suffix: &str) -> PathBuf {
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    file.with_file_name(format!("{stem}.{suffix}"))
}

fn load(file: &Path) -> anyhow::Result<ProblemFile> {
    let text = fs::read_to_string(file)
        .with_context(|| format!("cannot read problem file {}", file.display()))?;
    ProblemFile::parse(&text).map_err(|e| anyhow!("{}: {e}", file.display()))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_solve(
    file: &Path,
    out: Option<PathBuf>,
    gamma: Option<f64>,
    max_iters: Option<usize>,
    f_tol: Option<f64>,
    step_tol: Option<f64>,
    strict_positivity: bool,
) -> anyhow::Result<i32> {
    let pf = load(file)?;
    let inst = pf.to_instance()?;
    warn_on_zero_entries(&inst, strict_positivity);
    let cfg = SolverConfig {
        gamma: gamma.or(pf.gamma),
        rule: pf.rule(max_iters, f_tol, step_tol)?,
        require_positive_matrix: strict_positivity,
    };
    let outcome = solve(&inst, &cfg)?;
    let out_path = out.unwrap_or_else(|| default_out(file, "trace.csv"));
    let mut buf = Vec::new();
    outcome.trace.write_csv(&mut buf)?;
    fs::write(&out_path, buf).with_context(|| format!("cannot write {}", out_path.display()))?;

    let last = outcome.trace.last().ok_or_else(|| anyhow!("empty trace"))?;
    let x_str: Vec<String> = outcome.x_final.iter().map(|v| v.to_string()).collect();
    println!("final_f={}", last.f);
    println!("iterations={}", last.k);
    println!("stop={:?}", outcome.trace.stop);
    println!("x_final={}", x_str.join(" "));
    println!("trace={}", out_path.display());
    Ok(match outcome.trace.stop {
        StopReason::MaxIters => 2,
        _ => 0,
    })
}

/// Warn-only positivity policy: zero matrix entries in a KL-family system
/// are legal but can produce degenerate ratios; say so once on stderr.
fn warn_on_zero_entries(inst: &afmin::model::ProblemInstance, strict: bool) {
    if strict || !inst.family.is_kl_family() {
        return;
    }
    if let Ok(p) = inst.matrix.as_nonneg() {
        if !p.all_positive() {
            eprintln!(
                "warning: system matrix has zero entries; ratio steps may hit singular rows \
                 (pass --strict-positivity to refuse such instances)"
            );
        }
    }
}

/// What the check command solved, in the solver's working coordinates.
enum Solved {
    Kl(KlRun),
    Real {
        family: Family,
        a: RealMatrix,
        b: Vec<f64>,
        x0: Vec<f64>,
        trace: IterationTrace,
    },
}

impl Solved {
    fn trace(&self) -> &IterationTrace {
        match self {
            Solved::Kl(run) => &run.trace,
            Solved::Real { trace, .. } => trace,
        }
    }
}

struct PropSpec {
    name: &'static str,
    families: &'static [Family],
}

const KL_FAMILIES: &[Family] = &[
    Family::Smart,
    Family::Emml,
    Family::Hellinger,
    Family::Pearson,
];

const PROPS: &[PropSpec] = &[
    PropSpec {
        name: "pythagorean",
        families: &[
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Pearson,
            Family::Euclid,
            Family::Landweber,
        ],
    },
    PropSpec {
        name: "first_monotonicity",
        families: &[
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Euclid,
        ],
    },
    PropSpec {
        name: "second_monotonicity",
        families: &[
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Euclid,
        ],
    },
    PropSpec {
        name: "summa",
        families: &[Family::Smart, Family::Euclid],
    },
    PropSpec {
        name: "summa2",
        families: &[Family::Smart, Family::Emml, Family::Euclid],
    },
    PropSpec {
        name: "threepp",
        families: &[Family::Smart, Family::Euclid],
    },
    PropSpec {
        name: "w3pp",
        families: &[
            Family::Smart,
            Family::Emml,
            Family::Hellinger,
            Family::Euclid,
        ],
    },
    PropSpec {
        name: "mass",
        families: KL_FAMILIES,
    },
    PropSpec {
        name: "contraction",
        families: KL_FAMILIES,
    },
    PropSpec {
        name: "induced_prox",
        families: &[Family::Hellinger],
    },
    PropSpec {
        name: "limit",
        families: &[
            Family::Smart,
            Family::Emml,
            Family::Euclid,
            Family::Landweber,
        ],
    },
    PropSpec {
        name: "phi_conditions",
        families: &[Family::Hellinger],
    },
    PropSpec {
        name: "hrr_probe",
        families: &[Family::Hellinger],
    },
    PropSpec {
        name: "summa2_probe",
        families: &[Family::Hellinger, Family::Pearson],
    },
    PropSpec {
        name: "euclid_summa2_reading",
        families: &[Family::Euclid],
    },
];

fn prop_by_name(name: &str) -> Option<&'static PropSpec> {
    PROPS.iter().find(|p| p.name == name)
}

/// A minimizer of the family objective, if one is independently computable:
/// derivative/grid oracles for narrow systems, or an exact nonnegative
/// solution when the system is consistent.
fn find_kl_minimizer(family: Family, p: &NonnegMatrix, y: &[f64]) -> Option<Vec<f64>> {
    if p.cols() <= 2 {
        if let Ok(sol) = oracle_minimize(family, &ProblemMatrix::Nonneg(p.clone()), y) {
            return Some(sol.minimizer);
        }
    }
    let ar = RealMatrix::new(p.rows(), p.cols(), p.entries().to_vec()).ok()?;
    let x = ls_min_norm(&ar, y).ok()?;
    let resid: f64 = p
        .mul(&x)
        .ok()?
        .iter()
        .zip(y)
        .map(|(&u, &v)| (u - v) * (u - v))
        .sum();
    let scale: f64 = y.iter().map(|v| v * v).sum();
    if resid.sqrt() <= 1e-10 * (1.0 + scale.sqrt()) && x.iter().all(|&v| v >= -1e-10) {
        Some(x.iter().map(|&v| v.max(0.0)).collect())
    } else {
        None
    }
}

fn monitor_extras(solved: &Solved) -> Vec<Vec<f64>> {
    match solved {
        // KL-family monitors step their samples, which needs strict
        // positivity; boundary minimizers stay out of the sample set
        Solved::Kl(run) => find_kl_minimizer(run.family, &run.p, &run.y)
            .filter(|x| x.iter().all(|&v| v > 0.0))
            .map(|x| vec![x])
            .unwrap_or_default(),
        Solved::Real { a, b, .. } => {
            ls_min_norm(a, b).map(|x| vec![x]).unwrap_or_default()
        }
    }
}

fn run_prop(
    prop: &PropSpec,
    solved: &Solved,
    n: usize,
    seed: u64,
) -> anyhow::Result<Option<Vec<CheckReport>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let note_seed = format!("seed={seed}; samples={n}");
    let reports = match (prop.name, solved) {
        ("pythagorean", Solved::Kl(run)) => {
            let mut slacks = Vec::new();
            for _ in 0..n {
                let x = synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0);
                let z = synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0);
                match run.family {
                    Family::Smart => {
                        let (a, b) = afmin::diagnostics::pythagorean_smart(&run.p, &run.y, &x, &z)?;
                        slacks.extend([-a, -b]);
                    }
                    Family::Emml => {
                        let (a, b) = afmin::diagnostics::pythagorean_emml(&run.p, &run.y, &x, &z)?;
                        slacks.extend([-a, -b]);
                    }
                    Family::Hellinger => slacks.push(-afmin::diagnostics::pythagorean_hellinger(
                        &run.p, &run.y, &x, &z,
                    )?),
                    Family::Pearson => {
                        let (a, b) =
                            afmin::diagnostics::pythagorean_pearson(&run.p, &run.y, &x, &z)?;
                        slacks.extend([-a, -b]);
                    }
                    _ => unreachable!(),
                }
            }
            vec![CheckReport::from_slacks(
                format!("pythagorean_{}", run.family.name()),
                &slacks,
                1e-10,
                &note_seed,
            )]
        }
        ("pythagorean", Solved::Real { a, b, .. }) => {
            let mut slacks = Vec::new();
            for _ in 0..n {
                let x = synth::real_vec(&mut rng, a.cols(), -2.0, 2.0);
                let z = synth::real_vec(&mut rng, a.cols(), -2.0, 2.0);
                let (r1, r2) = afmin::diagnostics::pythagorean_euclid(a, b, &x, &z)?;
                slacks.extend([-r1, -r2]);
            }
            vec![CheckReport::from_slacks(
                "pythagorean_euclid",
                &slacks,
                1e-10,
                &note_seed,
            )]
        }
        ("first_monotonicity", Solved::Kl(run)) => {
            let pm = ProblemMatrix::Nonneg(run.p.clone());
            vec![first_monotonicity(run.family, &pm, &run.trace, SLACK_TOL)?]
        }
        ("first_monotonicity", Solved::Real { a, trace, .. }) => {
            let pm = ProblemMatrix::Real(a.clone());
            vec![first_monotonicity(Family::Euclid, &pm, trace, SLACK_TOL)?]
        }
        ("second_monotonicity", Solved::Kl(run)) => {
            let Some(x_hat) = find_kl_minimizer(run.family, &run.p, &run.y) else {
                return Ok(None);
            };
            let pm = ProblemMatrix::Nonneg(run.p.clone());
            vec![second_monotonicity(
                run.family, &pm, &run.y, &x_hat, &run.trace, 1e-8,
            )?]
        }
        ("second_monotonicity", Solved::Real { a, b, trace, .. }) => {
            let x_hat = ls_min_norm(a, b)?;
            let pm = ProblemMatrix::Real(a.clone());
            vec![second_monotonicity(
                Family::Euclid,
                &pm,
                b,
                &x_hat,
                trace,
                1e-8,
            )?]
        }
        ("summa", Solved::Kl(run)) => {
            let samples = sample_around_trace(&run.trace, n, SampleDomain::Positive, &[], &mut rng);
            vec![summa_check_smart(
                &run.p, &run.y, &run.trace, &samples, SLACK_TOL,
            )?]
        }
        ("summa", Solved::Real { a, b, trace, .. }) => {
            let samples = sample_around_trace(trace, n, SampleDomain::Real, &[], &mut rng);
            vec![
                summa_check_euclid(a, b, trace, &samples, SLACK_TOL)?,
                euclid_summa_gap_identity(a, b, trace, &samples[..n.min(20)], 1e-10)?,
            ]
        }
        ("summa2", Solved::Kl(run)) => {
            let extras = monitor_extras(solved);
            let samples =
                sample_around_trace(&run.trace, n, SampleDomain::Positive, &extras, &mut rng);
            match run.family {
                Family::Emml => {
                    vec![summa2_check_emml(
                        &run.p, &run.y, &run.trace, &samples, SLACK_TOL,
                    )?]
                }
                Family::Smart => {
                    let pm = ProblemMatrix::Nonneg(run.p.clone());
                    vec![summa2_with_g_check(
                        Family::Smart,
                        &pm,
                        &run.y,
                        &run.trace,
                        &samples,
                        SLACK_TOL,
                    )?]
                }
                _ => unreachable!("registry guards families"),
            }
        }
        ("summa2", Solved::Real { a, b, trace, .. }) => {
            let extras = monitor_extras(solved);
            let samples = sample_around_trace(trace, n, SampleDomain::Real, &extras, &mut rng);
            let pm = ProblemMatrix::Real(a.clone());
            vec![summa2_with_g_check(
                Family::Euclid,
                &pm,
                b,
                trace,
                &samples,
                SLACK_TOL,
            )?]
        }
        ("threepp" | "w3pp", _) => {
            let (am, domain, trace) = match solved {
                Solved::Kl(run) => (
                    match run.family {
                        Family::Smart => smart_am(&run.p, &run.y)?,
                        Family::Emml => emml_am(&run.p, &run.y)?,
                        Family::Hellinger => hellinger_am(&run.p, &run.y)?,
                        Family::Pearson => pearson_am(&run.p, &run.y)?,
                        _ => unreachable!(),
                    },
                    SampleDomain::Positive,
                    &run.trace,
                ),
                Solved::Real { a, b, trace, .. } => (euclid_am(a, b)?, SampleDomain::Real, trace),
            };
            let extras = monitor_extras(solved);
            let samples = sample_around_trace(trace, n, domain, &extras, &mut rng);
            if prop.name == "threepp" {
                vec![afmin::framework::check_3pp(
                    &am, trace, &samples, SLACK_TOL,
                )?]
            } else {
                vec![afmin::framework::check_w3pp(
                    &am, trace, &samples, SLACK_TOL,
                )?]
            }
        }
        ("mass", Solved::Kl(run)) => {
            let y_total: f64 = run.y.iter().sum();
            let mut slacks = Vec::new();
            for _ in 0..n {
                let x = synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0);
                let stepped = match run.family {
                    Family::Smart => smart_step(&run.p, &run.y, &x)?,
                    Family::Emml => emml_step(&run.p, &run.y, &x)?,
                    Family::Hellinger => hellinger_t_step(&run.p, &run.y, &x)?,
                    Family::Pearson => pearson_r_step(&run.p, &run.y, &x)?,
                    _ => unreachable!(),
                };
                let total: f64 = stepped.iter().sum();
                let norm = 1.0 + y_total;
                slacks.push(match run.family {
                    Family::Emml => -(total - y_total).abs() / norm,
                    Family::Pearson => (total - y_total) / norm,
                    _ => (y_total - total) / norm,
                });
            }
            vec![CheckReport::from_slacks(
                format!("mass_{}", run.family.name()),
                &slacks,
                1e-12,
                &note_seed,
            )]
        }
        ("contraction", Solved::Kl(run)) => {
            let mut reports = Vec::new();
            type DistFn = fn(&[f64], &[f64]) -> afmin::Result<f64>;
            let cases: [(&str, DistFn); 3] = [
                ("contraction_kl", kl_vec),
                ("contraction_hellinger", hellinger),
                ("contraction_pearson", pearson),
            ];
            for (name, dist) in cases {
                let mut slacks = Vec::new();
                for _ in 0..n {
                    let x = synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0);
                    let z = synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0);
                    let dxz = dist(&x, &z)?;
                    let dp = dist(&run.p.mul(&x)?, &run.p.mul(&z)?)?;
                    slacks.push((dxz - dp) / (1.0 + dxz));
                }
                reports.push(CheckReport::from_slacks(name, &slacks, 1e-12, &note_seed));
            }
            reports
        }
        ("induced_prox", Solved::Kl(run)) => {
            let Some(x_hat) = find_kl_minimizer(run.family, &run.p, &run.y) else {
                return Ok(None);
            };
            let p = &run.p;
            let y = &run.y;
            let f = |x: &[f64]| hellinger(y, &p.mul(x)?);
            vec![at_induced_prox_check(
                &PhiSpec::hellinger(),
                &run.trace,
                &x_hat,
                f,
                1e-8,
            )?]
        }
        ("limit", Solved::Kl(run)) => match run.family {
            Family::Smart => {
                // the characterization is about the limit point: drive the
                // run to convergence regardless of the user's stopping rule
                let tight = afmin::framework::StoppingRule::new(50_000, 0.0, 1e-26)?;
                let tight_run = solve_smart(&run.p, &run.y, &run.x0, &tight)?;
                match limit_characterization_smart(
                    &tight_run.p,
                    &tight_run.y,
                    &tight_run.x0,
                    &tight_run.trace,
                ) {
                    Ok(r) => vec![r],
                    Err(afmin::Error::OracleUnavailable(_)) => return Ok(None),
                    Err(e) => return Err(e.into()),
                }
            }
            Family::Emml => {
                // the limit's dependence on the start is unresolved: report
                // the spread of limits across starts, assert nothing
                let mut limits = Vec::new();
                let rule = afmin::framework::StoppingRule::new(2000, 0.0, 1e-24)?;
                for _ in 0..4 {
                    let x0 = synth::positive_vec(&mut rng, run.p.cols(), 0.3, 3.0);
                    let alt = solve_emml(&run.p, &run.y, &x0, &rule)?;
                    limits.push(alt.trace.final_x().unwrap().to_vec());
                }
                let mut spread = 0.0f64;
                for i in 0..limits.len() {
                    for j in (i + 1)..limits.len() {
                        let d = limits[i]
                            .iter()
                            .zip(&limits[j])
                            .map(|(&u, &v)| (u - v).abs())
                            .fold(0.0f64, f64::max);
                        spread = spread.max(d);
                    }
                }
                vec![CheckReport::probe(
                    "limit_spread_emml",
                    &[-spread],
                    format!("max pairwise deviation across 4 starts={spread:.3e}; {note_seed}"),
                )]
            }
            _ => return Ok(None),
        },
        (
            "limit",
            Solved::Real {
                family, a, b, x0, ..
            },
        ) => {
            // drive the run to convergence before comparing with the
            // projection the limit is supposed to be
            let tight = afmin::framework::StoppingRule::new(100_000, 0.0, 1e-28)?;
            match family {
                // the relaxation converges to the column-weighted projection
                Family::Euclid => {
                    let trace = afmin::solvers::solve_euclid(a, b, x0, &tight)?;
                    vec![limit_characterization_euclid(a, b, x0, &trace)?]
                }
                // the gradient iteration converges to the plain projection
                Family::Landweber => {
                    let trace = afmin::solvers::solve_landweber(a, b, x0, None, &tight)?;
                    let x_star = trace.final_x().ok_or_else(|| anyhow!("empty trace"))?;
                    let ones = vec![1.0; a.cols()];
                    let xh = weighted_ls_projection(a, b, &ones, x0)?;
                    let max_dev = x_star
                        .iter()
                        .zip(&xh)
                        .map(|(&u, &v)| (u - v).abs())
                        .fold(0.0f64, f64::max);
                    vec![CheckReport::from_slacks(
                        "limit_landweber",
                        &[-max_dev],
                        1e-8,
                        "slack is minus the max coordinate deviation from the plain projection",
                    )]
                }
                _ => unreachable!("registry guards families"),
            }
        }
        ("phi_conditions", _) => {
            let grid = synth::log_spaced(0.01, 100.0, 200);
            vec![validate_phi(&PhiSpec::hellinger(), &grid)?]
        }
        ("hrr_probe", Solved::Kl(run)) => {
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n.max(4) / 4)
                .map(|_| {
                    (
                        synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0),
                        synth::positive_vec(&mut rng, run.p.cols(), 0.2, 2.0),
                    )
                })
                .collect();
            vec![hrr_probe(&run.p, &run.y, &pairs)?]
        }
        ("summa2_probe", Solved::Kl(run)) => {
            let samples = sample_around_trace(&run.trace, n, SampleDomain::Positive, &[], &mut rng);
            vec![summa2_candidate_probe(
                run.family, &run.p, &run.y, &run.trace, &samples,
            )?]
        }
        ("euclid_summa2_reading", Solved::Real { a, b, trace, .. }) => {
            let samples = sample_around_trace(trace, n, SampleDomain::Real, &[], &mut rng);
            vec![euclid_summa2_reading_probe(a, b, trace, &samples)?]
        }
        (name, _) => bail!("property `{name}` does not apply to this family"),
    };
    Ok(Some(reports))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_check(
    file: &Path,
    out: Option<PathBuf>,
    props: Option<String>,
    all: bool,
    samples: Option<usize>,
    seed: Option<u64>,
    max_iters: Option<usize>,
    f_tol: Option<f64>,
    step_tol: Option<f64>,
    strict_positivity: bool,
) -> anyhow::Result<i32> {
    let pf = load(file)?;
    let family = pf.family;
    let rule = pf.rule(max_iters, f_tol, step_tol)?;
    let n = samples.unwrap_or(200);
    let seed = seed.or(pf.seed).unwrap_or(42);

    let selected: Vec<(&'static PropSpec, bool)> = if let Some(list) = props {
        let mut v = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let p = prop_by_name(name)
                .ok_or_else(|| anyhow!(afmin::Error::UnknownProperty(name.to_string())))?;
            if !p.families.contains(&family) {
                bail!(
                    "property `{name}` does not apply to family `{}`",
                    family.name()
                );
            }
            v.push((p, true)); // explicitly requested: unavailability is an error
        }
        if v.is_empty() {
            bail!("--props got an empty list");
        }
        v
    } else if all {
        PROPS
            .iter()
            .filter(|p| p.families.contains(&family))
            .map(|p| (p, false))
            .collect()
    } else {
        bail!("check needs --all or --props <list>");
    };

    let inst = pf.to_instance()?;
    warn_on_zero_entries(&inst, strict_positivity);
    if strict_positivity && family.is_kl_family() && !inst.matrix.as_nonneg()?.all_positive() {
        bail!("system matrix has zero entries and strict positivity was requested");
    }
    let solved = match family {
        Family::Smart => Solved::Kl(solve_smart(
            inst.matrix.as_nonneg()?,
            &inst.data,
            &inst.start,
            &rule,
        )?),
        Family::Emml => Solved::Kl(solve_emml(
            inst.matrix.as_nonneg()?,
            &inst.data,
            &inst.start,
            &rule,
        )?),
        Family::Hellinger => Solved::Kl(solve_hellinger(
            inst.matrix.as_nonneg()?,
            &inst.data,
            &inst.start,
            &rule,
        )?),
        Family::Pearson => Solved::Kl(solve_pearson(
            inst.matrix.as_nonneg()?,
            &inst.data,
            &inst.start,
            &rule,
        )?),
        Family::Euclid => {
            let a = inst.matrix.as_real()?.clone();
            let trace = afmin::solvers::solve_euclid(&a, &inst.data, &inst.start, &rule)?;
            Solved::Real {
                family,
                a,
                b: inst.data.clone(),
                x0: inst.start.clone(),
                trace,
            }
        }
        Family::Landweber => {
            let a = inst.matrix.as_real()?.clone();
            let trace =
                afmin::solvers::solve_landweber(&a, &inst.data, &inst.start, pf.gamma, &rule)?;
            Solved::Real {
                family,
                a,
                b: inst.data.clone(),
                x0: inst.start.clone(),
                trace,
            }
        }
    };

    if solved.trace().len() < 2 {
        bail!("the run converged in under two iterations; nothing to check — lower step_tol");
    }

    let mut reports = Vec::new();
    let mut all_pass = true;
    for (prop, explicit) in selected {
        match run_prop(prop, &solved, n, seed)? {
            Some(rs) => {
                for r in rs {
                    let verdict = if r.is_probe() {
                        "PROBE"
                    } else if r.pass {
                        "PASS"
                    } else {
                        all_pass = false;
                        "FAIL"
                    };
                    println!("{}: {verdict} worst_slack={:.3e}", r.name, r.worst_slack);
                    reports.push(r);
                }
            }
            None if explicit => {
                bail!(
                    "property `{}` needs an oracle minimizer unavailable for this instance",
                    prop.name
                )
            }
            None => eprintln!(
                "note: skipping `{}` (no oracle minimizer for this instance)",
                prop.name
            ),
        }
    }

    let out_path = out.unwrap_or_else(|| default_out(file, "report.csv"));
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &reports)?;
    fs::write(&out_path, buf).with_context(|| format!("cannot write {}", out_path.display()))?;
    println!("report={}", out_path.display());
    Ok(if all_pass { 0 } else { 1 })
}

pub fn cmd_compare(file: &Path, out: Option<PathBuf>, iters: Option<usize>) -> anyhow::Result<i32> {
    let pf = load(file)?;
    let inst = pf.to_instance()?;
    let out_path = out.unwrap_or_else(|| default_out(file, "compare.csv"));
    match pf.family {
        Family::Euclid => {
            let a = inst.matrix.as_real()?;
            let iters = iters.unwrap_or(50);
            let (devs, gram_trace) =
                landweber_equivalence_deviation(a, &inst.data, &inst.start, iters)?;
            let mut text = String::from("k,deviation\n");
            for (k, d) in devs.iter().enumerate() {
                text.push_str(&format!("{},{}\n", k + 1, d));
            }
            fs::write(&out_path, text)?;
            let max_dev = devs.iter().cloned().fold(0.0f64, f64::max);
            println!("max_deviation={max_dev}");
            println!("gram_trace={gram_trace}");
            println!("comparison={}", out_path.display());
        }
        Family::Hellinger => {
            let p = inst.matrix.as_nonneg()?;
            let rule = pf.rule(iters, None, None)?;
            let run = solve_hellinger(p, &inst.data, &inst.start, &rule)?;
            let x_hat = find_kl_minimizer(Family::Hellinger, &run.p, &run.y)
                .ok_or_else(|| anyhow!("no oracle minimizer for this instance"))?;
            let cmp = hellinger_inequality_comparison(&run.p, &run.y, &run.trace, &x_hat)?;
            fs::write(&out_path, cmp.csv())?;
            let (a, b) = cmp.reports();
            println!("{}: min_slack={:.3e}", a.name, a.worst_slack);
            println!("{}: min_slack={:.3e}", b.name, b.worst_slack);
            println!("comparison={}", out_path.display());
        }
        other => bail!(
            "compare covers the euclid and hellinger families, not `{}`",
            other.name()
        ),
    }
    Ok(0)
}

pub fn cmd_gen(
    rows: usize,
    cols: usize,
    family: &str,
    seed: u64,
    consistent: bool,
    out: &Path,
) -> anyhow::Result<i32> {
    if rows == 0 || cols == 0 {
        bail!("rows and cols must be >= 1");
    }
    let family = Family::parse(family)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pf = if family.is_kl_family() {
        let p = synth::random_normalized_matrix(&mut rng, rows, cols);
        let data = if consistent {
            let x_true = synth::positive_vec(&mut rng, cols, 0.5, 2.0);
            p.mul(&x_true)?
        } else {
            synth::positive_vec(&mut rng, rows, 0.5, 2.0)
        };
        let start = synth::positive_vec(&mut rng, cols, 0.5, 2.0);
        ProblemFile {
            family,
            rows,
            cols,
            gamma: None,
            max_iters: None,
            f_tol: None,
            step_tol: None,
            seed: Some(seed),
            matrix: p.entries().to_vec(),
            data,
            start,
        }
    } else {
        let a = synth::random_real_matrix(&mut rng, rows, cols);
        let data = if consistent {
            let x_true: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
            a.mul(&x_true)?
        } else {
            synth::real_vec(&mut rng, rows, -2.0, 2.0)
        };
        let start = synth::real_vec(&mut rng, cols, -1.0, 1.0);
        ProblemFile {
            family,
            rows,
            cols,
            gamma: None,
            max_iters: None,
            f_tol: None,
            step_tol: None,
            seed: Some(seed),
            matrix: a.entries().to_vec(),
            data,
            start,
        }
    };
    fs::write(out, pf.render()).with_context(|| format!("cannot write {}", out.display()))?;
    println!("problem={}", out.display());
    Ok(0)
}
