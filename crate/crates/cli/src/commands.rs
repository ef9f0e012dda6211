use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qadv_core::bell;
use qadv_core::circuit::{
    build_cnew, random_brickwork, to_json, Circuit, CnewParams, PairingScheme, PromiseCircuit, PromiseKind,
};
use qadv_core::dequant::{self, SQVector};
use qadv_core::detect::{self, DetectOptions, ExactMode, SuiteOptions};
use qadv_core::sensing::{self, Decision, Protocol, SensingConfig, SweepCell, TrialOutcome};
use qadv_core::{propagation, seed, Pauli, PauliMap, PauliString, PropagationConfig, StateVector};

use crate::config::*;
use crate::output::{fmt_num, Run};
use crate::CliError;

fn flag(b: bool) -> String {
    b.to_string()
}

pub fn decay(cfg: &DecayConfig, run: &mut Run) -> Result<(), CliError> {
    let report = detect::decay_experiment(cfg.n, cfg.layers, cfg.trials, cfg.seed)?;
    let last = cfg.layers;
    let deviation = if report.std_errors[last] > 0.0 {
        (report.means[last] - report.predicted[last]) / report.std_errors[last]
    } else {
        0.0
    };
    let rows: Vec<Vec<String>> = (0..=last)
        .map(|j| {
            vec![
                j.to_string(),
                fmt_num(report.means[j]),
                fmt_num(report.std_errors[j]),
                if j == 0 { String::new() } else { fmt_num(report.ratios[j - 1]) },
                fmt_num(report.predicted[j]),
            ]
        })
        .collect();
    run.write_csv("decay.csv", &["layer", "mean", "std_error", "ratio", "predicted"], &rows)?;
    run.write_json(
        "report.json",
        &json!({
            "decay": report,
            "final_deviation_in_std_errors": deviation,
        }),
    )?;
    let ratios: Vec<String> = report.ratios.iter().map(|r| format!("{r:.4}")).collect();
    println!("per-layer ratios: {}", ratios.join(" "));
    println!(
        "after {last} layers: mean {:.6e} ± {:.2e}, predicted {:.6e}",
        report.means[last], report.std_errors[last], report.predicted[last]
    );
    Ok(())
}

fn promise_kind(name: PromiseName, p: f64) -> PromiseKind {
    match name {
        PromiseName::Flip => PromiseKind::Flip,
        PromiseName::Idle => PromiseKind::Idle,
        PromiseName::Rotation => PromiseKind::rotation_for(p),
        PromiseName::EntangledRotation => PromiseKind::EntangledRotation {
            angle: 2.0 * p.sqrt().asin(),
        },
    }
}

fn propagation_config(k: usize, dense_block_limit: usize) -> Result<PropagationConfig, CliError> {
    let cfg = PropagationConfig {
        k,
        dense_block_limit,
        ..PropagationConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn stamp(c: &Circuit, hash: &str) -> Circuit {
    let mut c = c.clone();
    c.metadata.params.insert("manifest_hash".into(), Value::String(hash.into()));
    c
}

pub fn detect(cfg: &DetectConfig, run: &mut Run) -> Result<(), CliError> {
    let (circuit, id, promise) = match &cfg.circuit {
        Some(path) => {
            let c = qadv_core::circuit::read_circuit(path)?;
            let id = path.file_stem().map_or("circuit".into(), |s| s.to_string_lossy().into_owned());
            (c, id, Value::Null)
        }
        None => {
            let kind = promise_kind(cfg.promise, cfg.p);
            let pc = PromiseCircuit::new(kind, cfg.m)?;
            let circuit_seed = cfg.circuit_seed.unwrap_or(cfg.seed);
            let params = CnewParams {
                n: cfg.n,
                depth: cfg.depth,
                copies: cfg.copies,
                seed: circuit_seed,
                pairing: PairingScheme::Brickwork,
            };
            let c = build_cnew(&pc.circuit, &params)?;
            let info = json!({
                "kind": kind.name(),
                "probability": pc.probability,
                "label": pc.label,
            });
            (c, format!("cnew-{}-{circuit_seed}", kind.name()), info)
        }
    };
    let opts = DetectOptions {
        samples: cfg.samples,
        propagation: propagation_config(cfg.k, cfg.dense_block_limit)?,
        seed: cfg.seed,
        exact: cfg.shots.map_or(ExactMode::Exact, |shots| ExactMode::Shots { shots }),
        ..DetectOptions::default()
    };
    let report = detect::detect(&circuit, &id, &opts)?;
    run.write_text("circuit.json", &to_json(&stamp(&circuit, run.hash())))?;
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.x.clone(),
                fmt_num(r.exact),
                fmt_num(r.heuristic),
                fmt_num(r.difference),
                flag(r.difference >= detect::DISAGREEMENT_THRESHOLD),
            ]
        })
        .collect();
    run.write_csv("records.csv", &["x", "exact", "heuristic", "difference", "disagree"], &rows)?;
    run.write_json(
        "report.json",
        &json!({
            "detection": report,
            "width": circuit.n_qubits(),
            "depth": circuit.depth(),
            "promise": promise,
        }),
    )?;
    println!(
        "{id}: {} of {} inputs disagree ({:.4}) -> {:?}{}",
        report.disagreements,
        report.samples,
        report.disagree_fraction,
        report.verdict,
        if report.promise_violated { " (fraction inside (1/3, 2/3))" } else { "" }
    );
    Ok(())
}

pub fn suite(cfg: &SuiteConfig, run: &mut Run) -> Result<(), CliError> {
    let instances = detect::standard_suite(cfg.yes, cfg.no, cfg.n, cfg.m, cfg.copies, cfg.depth, cfg.seed);
    let opts = SuiteOptions {
        samples: cfg.samples,
        propagation: propagation_config(cfg.k, PropagationConfig::default().dense_block_limit)?,
        seed: cfg.seed,
    };
    let report = detect::instance_suite(&instances, &opts)?;
    let rows: Vec<Vec<String>> = report
        .instances
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                r.label.as_str().to_string(),
                fmt_num(r.promise_probability),
                r.width.to_string(),
                r.depth.to_string(),
                r.report.disagreements.to_string(),
                fmt_num(r.report.disagree_fraction),
                format!("{:?}", r.report.verdict),
                flag(r.report.promise_violated),
                flag(r.correct),
            ]
        })
        .collect();
    run.write_csv(
        "suite.csv",
        &[
            "id",
            "label",
            "promise_probability",
            "width",
            "depth",
            "disagreements",
            "disagree_fraction",
            "verdict",
            "promise_violated",
            "correct",
        ],
        &rows,
    )?;
    run.write_json("report.json", &report)?;
    let c = report.confusion;
    println!(
        "{}/{} correct; YES→advantage {}, YES→none {}, NO→advantage {}, NO→none {}",
        c.correct(),
        c.total(),
        c.yes_advantage,
        c.yes_no_advantage,
        c.no_advantage,
        c.no_no_advantage
    );
    Ok(())
}

fn load_or_random(path: &Option<std::path::PathBuf>, dim: usize, seed: u64, stream: u64) -> Result<Vec<f64>, CliError> {
    match path {
        Some(p) => Ok(dequant::read_vector(p)?),
        None => Ok(dequant::random_unit(dim, &mut seed::stream(seed, stream))),
    }
}

#[derive(Serialize)]
struct PairEstimate {
    pair: usize,
    exact: f64,
    estimate: f64,
    std_error: f64,
    sample_variance: f64,
    abs_error: f64,
    within_three_over_sqrt_s: bool,
}

pub fn dequant(cfg: &DequantConfig, run: &mut Run) -> Result<(), CliError> {
    match cfg.action {
        DequantAction::Build => {
            let v = load_or_random(&cfg.input, cfg.dim, cfg.seed, 0)?;
            let sq = SQVector::build(&v, cfg.normalize)?;
            sq.check_invariants()?;
            run.write_json(
                "tree.json",
                &json!({
                    "dim": sq.dim(),
                    "root": sq.root(),
                    "values": sq.values(),
                    "probabilities": sq.probabilities(),
                    "tree": sq.tree(),
                }),
            )?;
            println!("built sample access over {} entries (root {})", sq.dim(), sq.root());
        }
        DequantAction::Sample => {
            let v = load_or_random(&cfg.input, cfg.dim, cfg.seed, 0)?;
            let sq = SQVector::build(&v, cfg.normalize)?;
            if cfg.draws == 0 {
                return Err(CliError::Config("draws must be at least 1".into()));
            }
            let mut rng = seed::stream(cfg.seed, 1);
            let mut counts = vec![0usize; sq.dim()];
            for _ in 0..cfg.draws {
                counts[sq.draw(&mut rng)] += 1;
            }
            let n = cfg.draws as f64;
            let tv = counts
                .iter()
                .zip(sq.probabilities())
                .map(|(&c, &p)| (c as f64 / n - p).abs())
                .sum::<f64>()
                / 2.0;
            let rows: Vec<Vec<String>> = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| vec![i.to_string(), c.to_string(), fmt_num(c as f64 / n), fmt_num(sq.probability(i))])
                .collect();
            run.write_csv("samples.csv", &["index", "count", "empirical", "exact"], &rows)?;
            run.write_json("report.json", &json!({"dim": sq.dim(), "draws": cfg.draws, "tv_distance": tv}))?;
            println!("{} draws over {} entries: TV distance {tv:.5}", cfg.draws, sq.dim());
        }
        DequantAction::Estimate => {
            let explicit = cfg.input.is_some() || cfg.query.is_some();
            if explicit && (cfg.input.is_none() || cfg.query.is_none()) {
                return Err(CliError::Config("estimate needs both --input and --query, or neither".into()));
            }
            let pairs = if explicit { 1 } else { cfg.pairs };
            let results = (0..pairs)
                .into_par_iter()
                .map(|i| {
                    let (x, y) = if explicit {
                        let norm = |v: Vec<f64>| -> Vec<f64> {
                            let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                            if cfg.normalize && s > 0.0 {
                                v.into_iter().map(|a| a / s).collect()
                            } else {
                                v
                            }
                        };
                        (
                            norm(load_or_random(&cfg.input, 0, 0, 0)?),
                            norm(load_or_random(&cfg.query, 0, 0, 0)?),
                        )
                    } else {
                        let mut rng = seed::stream(cfg.seed, 2 * i as u64);
                        (dequant::random_unit(cfg.dim, &mut rng), dequant::random_unit(cfg.dim, &mut rng))
                    };
                    let sq = SQVector::build(&x, false)?;
                    let exact: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
                    let mut rng = seed::stream(cfg.seed, 2 * i as u64 + 1);
                    let e = dequant::inner_product_estimate(&sq, &y, cfg.samples, &mut rng)?;
                    let abs_error = (e.mean - exact).abs();
                    Ok(PairEstimate {
                        pair: i,
                        exact,
                        estimate: e.mean,
                        std_error: e.std_error,
                        sample_variance: e.sample_variance,
                        abs_error,
                        within_three_over_sqrt_s: abs_error <= 3.0 / (cfg.samples as f64).sqrt(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let within = results.iter().filter(|r| r.within_three_over_sqrt_s).count() as f64 / pairs as f64;
            let pooled = results.iter().map(|r| r.sample_variance).sum::<f64>() / pairs as f64;
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.pair.to_string(),
                        fmt_num(r.exact),
                        fmt_num(r.estimate),
                        fmt_num(r.std_error),
                        fmt_num(r.sample_variance),
                        fmt_num(r.abs_error),
                        flag(r.within_three_over_sqrt_s),
                    ]
                })
                .collect();
            run.write_csv(
                "estimates.csv",
                &["pair", "exact", "estimate", "std_error", "sample_variance", "abs_error", "within_3_over_sqrt_s"],
                &rows,
            )?;
            run.write_json(
                "report.json",
                &json!({
                    "pairs": pairs,
                    "samples": cfg.samples,
                    "fraction_within_3_over_sqrt_s": within,
                    "pooled_sample_variance": pooled,
                    "estimates": results,
                }),
            )?;
            println!("{pairs} pairs: {:.1}% within 3/√S, pooled variance {pooled:.4}", 100.0 * within);
        }
    }
    Ok(())
}

pub fn sense(cfg: &SenseConfig, run: &mut Run) -> Result<(), CliError> {
    let sc = SensingConfig {
        n: cfg.n,
        theta: cfg.theta,
        gamma: cfg.gamma,
        t: cfg.t,
        k: cfg.k,
        seed: cfg.seed,
    };
    sc.validate()?;
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let r = cfg.r.unwrap_or_else(|| sensing::default_r(cfg.gamma));
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(cfg.seed, i as u64);
            match cfg.protocol {
                ProtocolName::Ghz => sensing::ghz_protocol(&sc, cfg.noisy, &mut rng),
                ProtocolName::Separable => sensing::separable_protocol(&sc, r, cfg.theta, &mut rng),
            }
        })
        .collect();
    let n = cfg.trials as f64;
    let detected = outcomes.iter().filter(|o| o.decision() == Decision::SignalPresent).count() as f64 / n;
    let mut summary = json!({
        "protocol": cfg.protocol,
        "trials": cfg.trials,
        "detection_rate": detected,
        "kl_bound": sensing::kl_sample_bound(cfg.theta, cfg.gamma).ok(),
    });
    let rows: Vec<Vec<String>> = match cfg.protocol {
        ProtocolName::Ghz => {
            let uses = (cfg.n * cfg.t) as f64;
            let damping = if cfg.noisy { (-uses * cfg.gamma / 2.0).exp() } else { 1.0 };
            let p_minus = (1.0 - (uses * cfg.theta).cos() * damping) / 2.0;
            summary["predicted_detection_rate"] = json!(1.0 - (1.0 - p_minus).powi(cfg.k as i32));
            summary["noisy"] = json!(cfg.noisy);
            outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| match o {
                    TrialOutcome::Ghz { minus, decision, .. } => {
                        vec![i.to_string(), minus.to_string(), format!("{decision:?}")]
                    }
                    TrialOutcome::Separable { .. } => unreachable!(),
                })
                .collect()
        }
        ProtocolName::Separable => {
            let f: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    TrialOutcome::Separable { f_hat, .. } => *f_hat,
                    TrialOutcome::Ghz { .. } => unreachable!(),
                })
                .collect();
            let (mean, se) = detect::mean_stderr(&f);
            let predicted = sensing::separable_bias(cfg.theta, cfg.gamma, r);
            summary["r"] = json!(r);
            summary["shots_per_trial"] = json!(cfg.k * cfg.n);
            summary["mean_f_hat"] = json!(mean);
            summary["f_hat_std_error"] = json!(se);
            summary["bias"] = json!(mean - 0.5);
            summary["predicted_bias"] = json!(predicted);
            summary["bias_deviation_in_std_errors"] = json!(if se > 0.0 { (mean - 0.5 - predicted) / se } else { 0.0 });
            outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| vec![i.to_string(), fmt_num(f[i]), format!("{:?}", o.decision())])
                .collect()
        }
    };
    let header: &[&str] = match cfg.protocol {
        ProtocolName::Ghz => &["trial", "minus_outcomes", "decision"],
        ProtocolName::Separable => &["trial", "f_hat", "decision"],
    };
    run.write_csv("trials.csv", header, &rows)?;
    run.write_json("report.json", &summary)?;
    println!("{:?}: detection rate {detected:.4} over {} trials", cfg.protocol, cfg.trials);
    if let Some(bias) = summary.get("bias") {
        println!("bias {bias} (predicted {})", summary["predicted_bias"]);
    }
    Ok(())
}

pub fn sweep(cfg: &SweepConfig, run: &mut Run) -> Result<(), CliError> {
    let protocol = match cfg.protocol {
        ProtocolName::Ghz => Protocol::Ghz { noisy: cfg.noisy },
        ProtocolName::Separable => Protocol::Separable { r: cfg.r },
    };
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for &theta in &cfg.theta {
            for &gamma in &cfg.gamma {
                for &t in &cfg.t {
                    for &k in &cfg.k {
                        cells.push(SweepCell {
                            protocol,
                            n,
                            theta,
                            gamma,
                            t,
                            k,
                        });
                    }
                }
            }
        }
    }
    let rows = sensing::scaling_sweep(&cells, cfg.trials, cfg.seed)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let c = row.cell;
            let r = match c.protocol {
                Protocol::Separable { r } => r.unwrap_or_else(|| sensing::default_r(c.gamma)).to_string(),
                Protocol::Ghz { .. } => String::new(),
            };
            vec![
                format!("{:?}", cfg.protocol).to_lowercase(),
                c.n.to_string(),
                fmt_num(c.theta),
                fmt_num(c.gamma),
                c.t.to_string(),
                c.k.to_string(),
                r,
                row.nt.to_string(),
                fmt_num(row.success),
                fmt_num(row.std_error),
                row.trials.to_string(),
            ]
        })
        .collect();
    run.write_csv(
        "sweep.csv",
        &["protocol", "n", "theta", "gamma", "t", "k", "r", "nt", "success", "std_error", "trials"],
        &table,
    )?;
    run.write_json(
        "report.json",
        &json!({
            "rows": rows,
            "calibration": {
                "omega_constant": 1.0,
                "noise_floor_window": 4.0,
                "note": "scaling windows and Ω-constants are calibration choices, not derived constants",
            },
        }),
    )?;
    println!("{} cells written to sweep.csv", rows.len());
    Ok(())
}

pub fn bell(cfg: &BellConfig, run: &mut Run) -> Result<(), CliError> {
    let angles: [f64; 4] = cfg
        .angles
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config(format!("angles needs 4 values, got {}", cfg.angles.len())))?;
    let strategies = bell::all_strategies();
    let rows: Vec<Vec<String>> = strategies
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                i.to_string(),
                s.alice[0].to_string(),
                s.alice[1].to_string(),
                s.bob[0].to_string(),
                s.bob[1].to_string(),
                s.chsh().to_string(),
            ]
        })
        .collect();
    let classical = bell::classical_chsh_max();
    let quantum = bell::quantum_chsh_value(angles)?;
    let optimum = bell::quantum_chsh_value(bell::OPTIMAL_ANGLES)?;
    let socks = bell::socks_simulation(cfg.trials, &mut seed::stream(cfg.seed, 0))?;
    let q_joint = bell::quantum_single_basis_joint()?;
    let tv = bell::tv_distance(&socks.joint, &q_joint);
    run.write_csv("strategies.csv", &["strategy", "a0", "a1", "b0", "b1", "chsh"], &rows)?;
    run.write_json(
        "report.json",
        &json!({
            "classical_chsh_max": classical,
            "angles": angles,
            "quantum_chsh": quantum,
            "quantum_optimum": optimum,
            "optimal_angles": bell::OPTIMAL_ANGLES,
            "socks": socks,
            "quantum_single_basis_joint": q_joint,
            "socks_tv_distance": tv,
        }),
    )?;
    println!(" #  a0 a1 b0 b1   S");
    for r in &rows {
        println!("{:>2} {:>3} {:>2} {:>2} {:>2} {:>3}", r[0], r[1], r[2], r[3], r[4], r[5]);
    }
    println!("classical max {classical}; quantum {quantum:.10} at the given angles, optimum {optimum:.10}");
    println!("socks vs quantum single-basis TV distance {tv:.5} over {} trials", cfg.trials);
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    circuit: usize,
    n: usize,
    layers: usize,
    inputs: usize,
    max_abs_diff: f64,
}

pub fn oracle_check(cfg: &OracleConfig, run: &mut Run) -> Result<(), CliError> {
    if cfg.max_n < 2 || cfg.max_n > 12 || cfg.max_layers == 0 {
        return Err(CliError::Config("need 2 ≤ max_n ≤ 12 and max_layers ≥ 1".into()));
    }
    let rows = (0..cfg.circuits)
        .into_par_iter()
        .map(|i| {
            let h = seed::derive_seed(cfg.seed, i as u64);
            let n = 2 + (h % (cfg.max_n as u64 - 1)) as usize;
            let layers = 1 + ((h >> 20) % cfg.max_layers as u64) as usize;
            let scheme = if i % 2 == 0 {
                PairingScheme::Brickwork
            } else {
                PairingScheme::RandomMatching
            };
            let c = random_brickwork(n, layers, scheme, h)?;
            let z1 = PauliMap::from_term(PauliString::single(n, 0, Pauli::Z)?, 1.0);
            let o = propagation::backpropagate(&c, &z1, &PropagationConfig::with_k(n))?;
            let mut max_abs_diff = 0.0f64;
            for x in 0..1usize << n {
                let bits: Vec<bool> = (0..n).map(|q| x >> (n - 1 - q) & 1 == 1).collect();
                let mut s = StateVector::prepare_basis(n, &bits)?;
                s.apply(&c)?;
                let exact = s.expectation(&z1)?;
                let heuristic = propagation::evaluate_product_state(&o, &bits)?;
                max_abs_diff = max_abs_diff.max((exact - heuristic).abs());
            }
            Ok(OracleRow {
                circuit: i,
                n,
                layers,
                inputs: 1 << n,
                max_abs_diff,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let worst = rows.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.circuit.to_string(),
                r.n.to_string(),
                r.layers.to_string(),
                r.inputs.to_string(),
                format!("{:e}", r.max_abs_diff),
            ]
        })
        .collect();
    run.write_csv("oracle.csv", &["circuit", "n", "layers", "inputs", "max_abs_diff"], &table)?;
    run.write_json(
        "report.json",
        &json!({"circuits": rows.len(), "tolerance": cfg.tolerance, "max_abs_diff": worst, "rows": rows}),
    )?;
    println!("{} circuits, worst |heuristic − exact| = {worst:e}", rows.len());
    if worst > cfg.tolerance {
        return Err(CliError::Invariant(format!(
            "heuristic with k = n differs from the statevector by {worst:e} > {}",
            cfg.tolerance
        )));
    }
    Ok(())
}
