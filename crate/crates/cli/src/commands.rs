use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cbtest::asymptotics::{gaussian_power, inner_product, project_lstar};
use cbtest::montecarlo::{simulate, test_report, SimMeta};
use cbtest::statistics::{cone_membership, KsWorkspace};
use cbtest::{
    inequality_chain, parse_alt, q_direction, snr_linear, snr_maxima, tv_power, AltSpec, DistributionSpec, EcdfTable,
    LabeledSample, Model, SimConfig, Statistic, SymmetricKernel, Tail,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{Command, FiguresArgs, ModelName, SimulateArgs, SnrArgs, StatisticName, TailName, TestArgs, Variant};
use crate::data::{read_pairs, rescale};
use crate::error::CliError;
use crate::manifest::{manifest_path, RunManifest};

const REPORT_LEVELS: [f64; 3] = [0.10, 0.05, 0.01];
const FIG1_POINTS: usize = 201;

/// An output document that points at its manifest.
#[derive(Serialize)]
struct Referenced<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    manifest: &'a Path,
}

pub fn run(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Test(a) => cmd_test(cmd, a),
        Command::Simulate(a) => cmd_simulate(cmd, a),
        Command::Snr(a) => cmd_snr(a),
        Command::Figures(a) => cmd_figures(cmd, a),
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest)?;
            if let Command::Replay(_) = m.config {
                return Err(CliError::usage("a manifest cannot replay another replay"));
            }
            run(&m.config)
        }
    }
}

fn load_alt(alt: Option<&str>, epsilon: Option<f64>) -> Result<Option<AltSpec>, CliError> {
    let Some(text) = alt else { return Ok(None) };
    let spec = parse_alt(text)?;
    Ok(Some(match epsilon {
        Some(e) => spec.with_epsilon(e)?,
        None => spec,
    }))
}

fn require_alt<'a>(alt: &'a Option<AltSpec>, what: &str) -> Result<&'a AltSpec, CliError> {
    alt.as_ref()
        .ok_or_else(|| CliError::usage(format!("{what} requires --alt")))
}

fn build_statistic(name: StatisticName, alt: &Option<AltSpec>) -> Result<Statistic, CliError> {
    Ok(match name {
        StatisticName::KsSym => Statistic::KsSym,
        StatisticName::KsFull => Statistic::KsFull,
        StatisticName::CrossProb => Statistic::CrossProb,
        StatisticName::Linear => {
            let spec = require_alt(alt, "--statistic linear")?;
            let eq = spec
                .equality()
                .ok_or_else(|| CliError::usage(format!("{} is not an equality alternative", spec.name())))?;
            Statistic::Linear {
                label: spec.name().to_string(),
                h: eq.h_fn(),
            }
        }
        StatisticName::Maxima => {
            let spec = require_alt(alt, "--statistic maxima")?;
            let (label, alpha) = spec
                .maxima_weight()
                .ok_or_else(|| CliError::usage(format!("{} is not an equality alternative", spec.name())))?;
            Statistic::Maxima { label, alpha }
        }
    })
}

fn resolve_tail(stat: &Statistic, tail: Option<TailName>) -> Tail {
    let default = stat.default_tail();
    match tail {
        None => default,
        Some(TailName::Right) => Tail::Right,
        Some(TailName::Left) => Tail::Left,
        Some(TailName::TwoSided) => match default {
            Tail::TwoSided { centre } => Tail::TwoSided { centre },
            _ => Tail::TwoSided { centre: 0.0 },
        },
    }
}

fn cmd_test(cmd: &Command, a: &TestArgs) -> Result<(), CliError> {
    if a.statistic == StatisticName::KsFull {
        return Err(CliError::usage(
            "ks-full needs labelled pairs; colour-blind data supports ks-sym, linear, maxima, cross-prob",
        ));
    }
    let alt = load_alt(a.alt.as_deref(), None)?;
    let stat = build_statistic(a.statistic, &alt)?;
    let tail = resolve_tail(&stat, a.tail);

    let mut pairs = read_pairs(&a.data)?;
    if pairs.len() < 2 {
        return Err(CliError::data(format!(
            "{}: need at least 2 pairs, found {}",
            a.data.display(),
            pairs.len()
        )));
    }
    let outside = pairs
        .iter()
        .any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y));
    let data_range = outside.then(|| rescale(&mut pairs));
    let n = pairs.len();
    let sample = LabeledSample::new(pairs)?;
    let observed = stat.evaluate(&sample, &mut KsWorkspace::new(), a.grid)?;
    if !observed.is_finite() {
        return Err(CliError {
            code: crate::error::EXIT_NUMERIC,
            message: format!("observed statistic is {observed}"),
        });
    }

    let q = match a.statistic {
        StatisticName::Linear | StatisticName::Maxima => require_alt(&alt, "linear/maxima")?.base().clone(),
        _ => DistributionSpec::uniform(),
    };
    let mut cfg = SimConfig::new(stat, Model::Null(q), n, a.reps, a.seed);
    cfg.max_cells = a.grid;
    cfg.workers = a.workers;
    let null = simulate(&cfg)?;

    let mut levels = REPORT_LEVELS.to_vec();
    if let Some(l) = a.level {
        if !levels.contains(&l) {
            levels.push(l);
        }
    }
    let mut report = test_report(observed, &null, tail, &levels)?;
    report.data_range = data_range;
    println!("{}", serde_json::to_string_pretty(&report)?);

    if let Some(out) = &a.out {
        let mpath = manifest_path(out);
        write_json(
            out,
            &Referenced {
                body: &report,
                manifest: &mpath,
            },
        )?;
        let mut m = RunManifest::new(cmd, a.seed);
        m.inputs.push(a.data.clone());
        m.outputs.push(out.clone());
        m.write(&mpath)?;
    }
    Ok(())
}

fn build_model(name: ModelName, alt: &Option<AltSpec>) -> Result<Model, CliError> {
    Ok(match name {
        ModelName::NullUniform => Model::Null(DistributionSpec::uniform()),
        ModelName::NullMix => Model::Null(DistributionSpec::uniform_square_mix()),
        ModelName::NullSquare => Model::Null(DistributionSpec::power(2)),
        ModelName::NullAlt => Model::Null(require_alt(alt, "--model null-alt")?.base().clone()),
        ModelName::Alt => match require_alt(alt, "--model alt")? {
            AltSpec::Equality { alt, .. } => Model::Equality(alt.clone()),
            AltSpec::Dependence(d) => Model::Dependence(d.clone()),
        },
    })
}

fn cmd_simulate(cmd: &Command, a: &SimulateArgs) -> Result<(), CliError> {
    let alt = load_alt(a.alt.as_deref(), a.epsilon)?;
    let stat = build_statistic(a.statistic, &alt)?;
    let model = build_model(a.model, &alt)?;
    let mut cfg = SimConfig::new(stat, model, a.n, a.reps, a.seed);
    cfg.max_cells = a.grid;
    cfg.workers = a.workers;
    let table = simulate(&cfg)?;

    let mpath = manifest_path(&a.out);
    let side = cbtest::montecarlo::sidecar_path(&a.out);
    write_text(&a.out, &table.to_csv_string())?;
    write_json(
        &side,
        &Referenced {
            body: &table.meta,
            manifest: &mpath,
        },
    )?;
    let mut m = RunManifest::new(cmd, a.seed);
    m.outputs = vec![a.out.clone(), side];
    m.write(&mpath)?;
    println!(
        "{}: {} values of {} under {}, mean {:.4}, sd {:.4}, seed {}",
        a.out.display(),
        table.len(),
        table.meta.statistic,
        table.meta.model,
        table.mean(),
        table.sd(),
        a.seed
    );
    Ok(())
}

fn cmd_snr(a: &SnrArgs) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::usage("--n must be >= 1"));
    }
    let spec = load_alt(Some(&a.alt), a.epsilon)?.expect("alt given");
    let eq = spec.equality().ok_or_else(|| {
        CliError::usage(format!(
            "{} is a dependence alternative; snr covers equality alternatives",
            spec.name()
        ))
    })?;
    let q = eq.base();
    let root_n = (a.n as f64).sqrt();
    let eps2 = eq.epsilon() * eq.epsilon();
    let mut out = serde_json::Map::new();
    out.insert("alt".into(), json!(spec.name()));
    out.insert("n".into(), json!(a.n));
    out.insert("epsilon".into(), json!(eq.epsilon()));
    let snr = match a.variant {
        Variant::Linear => {
            let hh = SymmetricKernel::product(eq.h_fn());
            let proj = project_lstar(&hh, q);
            let variance = inner_product(&proj, &proj, q)?;
            let inner = inner_product(&proj, &hh, q)?;
            let snr = snr_linear(eq, a.n)?;
            out.insert("variant".into(), json!("linear"));
            out.insert("variance".into(), json!(variance));
            out.insert("shift".into(), json!(-root_n * eps2 * inner));
            out.insert("shift_per_root_n".into(), json!(-eps2 * inner));
            snr
        }
        Variant::Maxima => {
            let (label, alpha) = spec.maxima_weight().expect("equality alternative");
            let m = snr_maxima(&alpha, eq, a.n)?;
            let cone = cone_membership(q_direction(eq), q)?;
            out.insert("variant".into(), json!("maxima"));
            out.insert("weight".into(), json!(label));
            out.insert("variance".into(), json!(m.variance));
            out.insert("shift".into(), json!(root_n * m.shift_per_root_n));
            out.insert("shift_per_root_n".into(), json!(m.shift_per_root_n));
            out.insert("inner".into(), json!(m.inner));
            out.insert("cubic_moment".into(), json!(m.cubic_moment));
            out.insert(
                "cone".into(),
                json!({
                    "is_member": cone.is_member,
                    "min_running": cone.min_running,
                    "exceptional_points": cone.exceptional.len(),
                }),
            );
            m.snr
        }
    };
    if !snr.is_finite() {
        return Err(CliError {
            code: crate::error::EXIT_NUMERIC,
            message: format!("signal-to-noise ratio is {snr}"),
        });
    }
    out.insert("snr".into(), json!(snr));
    out.insert("tv_power".into(), json!(tv_power(snr.abs())?));
    out.insert("level".into(), json!(a.level));
    out.insert("gaussian_power".into(), json!(gaussian_power(snr.abs(), a.level)?));
    out.insert("seed".into(), json!(a.seed));
    println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out))?);
    Ok(())
}

fn fig1_csv() -> Result<String, CliError> {
    let (p1, p2) = (DistributionSpec::uniform(), DistributionSpec::power(2));
    let mut s = String::from("x,lo,mid,hi\n");
    for k in 0..FIG1_POINTS {
        let x = k as f64 / (FIG1_POINTS - 1) as f64;
        let (lo, mid, hi) = inequality_chain(&p1, &p2, x)?;
        s.push_str(&format!("{x:?},{lo:?},{mid:?},{hi:?}\n"));
    }
    Ok(s)
}

fn series_csv(series: &[(&str, &EcdfTable)]) -> String {
    let mut s = String::from("series,value,probability\n");
    for (name, t) in series {
        for (v, p) in t.values().iter().zip(t.probabilities()) {
            s.push_str(&format!("{name},{v:?},{p:?}\n"));
        }
    }
    s
}

/// Largest vertical distance between two ECDFs.
pub fn ecdf_gap(a: &EcdfTable, b: &EcdfTable) -> f64 {
    a.values()
        .iter()
        .chain(b.values())
        .map(|&x| (a.ecdf(x) - b.ecdf(x)).abs())
        .fold(0.0, f64::max)
}

fn cmd_figures(cmd: &Command, a: &FiguresArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::data(format!("{}: {e}", a.out.display())))?;
    let sim = |stat: Statistic, model: Model, n: usize, seed: u64| -> Result<EcdfTable, CliError> {
        let mut cfg = SimConfig::new(stat, model, n, a.reps, seed);
        cfg.max_cells = a.grid;
        cfg.workers = a.workers;
        Ok(simulate(&cfg)?)
    };
    let emit = |file: &str, body: &str, metas: &[(&str, &SimMeta)]| -> Result<PathBuf, CliError> {
        let path = a.out.join(file);
        write_text(&path, body)?;
        let mut m = RunManifest::new(cmd, a.seed);
        m.outputs.push(path.clone());
        let series: BTreeMap<&str, &SimMeta> = metas.iter().copied().collect();
        if !series.is_empty() {
            m.details = json!({ "series": series });
        }
        m.write(&manifest_path(&path))?;
        Ok(path)
    };

    emit("fig1.csv", &fig1_csv()?, &[])?;

    let uniform = || Model::Null(DistributionSpec::uniform());
    let d3 = sim(Statistic::KsFull, uniform(), 1000, a.seed)?;
    let ds3 = sim(Statistic::KsSym, uniform(), 1000, a.seed)?;
    emit(
        "fig3.csv",
        &series_csv(&[("D", &d3), ("Ds", &ds3)]),
        &[("D", &d3.meta), ("Ds", &ds3.meta)],
    )?;
    let violations = d3
        .values()
        .iter()
        .chain(ds3.values())
        .filter(|&&x| ds3.ecdf(x) + 1e-12 < d3.ecdf(x))
        .count();

    let mix = || Model::Null(DistributionSpec::uniform_square_mix());
    let alt = || Model::Equality(cbtest::EqualityAlternative::uniform_vs_square());
    let null4 = sim(Statistic::KsSym, mix(), 500, a.seed)?;
    let alt4 = sim(Statistic::KsSym, alt(), 500, a.seed.wrapping_add(1))?;
    emit(
        "fig4.csv",
        &series_csv(&[("null", &null4), ("alt", &alt4)]),
        &[("null", &null4.meta), ("alt", &alt4.meta)],
    )?;
    let null5 = sim(Statistic::KsFull, mix(), 500, a.seed)?;
    let alt5 = sim(Statistic::KsFull, alt(), 500, a.seed.wrapping_add(1))?;
    emit(
        "fig5.csv",
        &series_csv(&[("null", &null5), ("alt", &alt5)]),
        &[("null", &null5.meta), ("alt", &alt5.meta)],
    )?;

    println!("wrote fig1.csv fig3.csv fig4.csv fig5.csv to {}", a.out.display());
    println!("fig3: ECDF(Ds) below ECDF(D) at {violations} abscissae");
    println!(
        "fig4 gap {:.4}, fig5 gap {:.4}, seed {}",
        ecdf_gap(&null4, &alt4),
        ecdf_gap(&null5, &alt5),
        a.seed
    );
    Ok(())
}

fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}
