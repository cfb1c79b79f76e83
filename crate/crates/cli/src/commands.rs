use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use coxf_core::analysis::{
    full_rank_experiment, lower_bound_audit, probabilistic_threshold_estimate, McReport, AuditRecord,
};
use coxf_core::block::{partition, DataMatrix, Vector};
use coxf_core::codes::{encode, regenerate_until_valid, CodingMatrix};
use coxf_core::decoder::{diagonal_decode, hybrid_decode, inverse_decode, ReceivedSet};
use coxf_core::rng::derive_seed;
use coxf_core::simulator::{
    compare_schemes, default_step_size, gaussian_matrix, gaussian_vector, least_squares_problem, run_coded_gd,
    sparse_gaussian_matrix, ExperimentConfig, TransformJob,
};
use serde::Serialize;

use crate::{
    usage, AuditArgs, Cli, Command, CompareArgs, DataArgs, DecodeArgs, EncodeArgs, Format, GdArgs, GenCodeArgs,
    McRankArgs, MethodArg, SimulateArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::GenCode(a) => gen_code(a, seed),
        Command::Encode(a) => encode_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::McRank(a) => mc_rank(a, seed),
        Command::Audit(a) => audit(a, seed),
        Command::Simulate(a) => simulate(a, seed),
        Command::Gd(a) => gd(a, seed),
        Command::Compare(a) => compare(a, cli.seed),
    }
}

/// Write to `path`, or stdout when absent or `-`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn read_code(path: &Path) -> Result<CodingMatrix> {
    CodingMatrix::from_json(&read_text(path)?).with_context(|| format!("coding matrix {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<DataMatrix> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let m = match ext {
        "csv" => DataMatrix::read_csv(open(path)?),
        "mtx" | "mm" => DataMatrix::read_matrix_market(open(path)?),
        _ => return Err(usage(format!("{}: expected a .mtx or .csv matrix", path.display()))),
    };
    m.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<Vector> {
    Vector::read_csv(open(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn vector_text(v: &[f64]) -> String {
    let mut buf = Vec::new();
    Vector::new(v.to_vec()).write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(j) => Ok(rayon::ThreadPoolBuilder::new().num_threads(j).build()?.install(f)),
        None => Ok(f()),
    }
}

fn gen_code(a: GenCodeArgs, seed: u64) -> Result<()> {
    let spec = a.code.to_spec(seed)?;
    let code = if a.verify {
        let (code, trials) = regenerate_until_valid(&spec, a.max_trials)?;
        eprintln!("verified: every {n}x{n} submatrix is full rank; trials_used = {trials}", n = spec.n);
        code
    } else {
        spec.build()?
    };
    emit(a.out.as_deref(), &code.to_json())
}

#[derive(Serialize)]
struct Manifest {
    n: usize,
    m: usize,
    source_rows: usize,
    cols: usize,
    block_rows: usize,
    pad_rows: usize,
    workers: Vec<ManifestWorker>,
}

#[derive(Serialize)]
struct ManifestWorker {
    worker: usize,
    support: Vec<usize>,
    nnz: usize,
    file: String,
}

fn encode_cmd(a: EncodeArgs) -> Result<()> {
    let code = read_code(&a.code)?;
    let data = read_matrix(&a.matrix)?;
    let part = partition(&data, code.blocks())?;
    let encoded = encode(&part, &code)?;
    for w in &encoded.warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let mut workers = Vec::new();
    for asg in &encoded.assignments {
        let file = format!("worker_{}.mtx", asg.worker_id + 1);
        let mut buf = Vec::new();
        asg.coded_block.write_matrix_market(&mut buf)?;
        fs::write(a.out_dir.join(&file), buf)?;
        workers.push(ManifestWorker {
            worker: asg.worker_id + 1,
            support: asg.support.iter().map(|j| j + 1).collect(),
            nnz: asg.coded_block.nnz(),
            file,
        });
    }
    let manifest = Manifest {
        n: code.blocks(),
        m: code.workers(),
        source_rows: part.source_rows(),
        cols: part.cols(),
        block_rows: part.block_rows(),
        pad_rows: part.pad_rows(),
        workers,
    };
    emit(Some(&a.out_dir.join("manifest.json")), &json_line(&manifest)?)
}

fn parse_result_arg(text: &str) -> Result<(usize, PathBuf)> {
    let (w, p) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("--result {text:?}: expected WORKER=FILE")))?;
    match w.trim().parse::<usize>() {
        Ok(w) if w >= 1 => Ok((w - 1, PathBuf::from(p))),
        _ => Err(usage(format!("--result {text:?}: worker must be a 1-based integer"))),
    }
}

fn decode_cmd(a: DecodeArgs) -> Result<()> {
    let code = read_code(&a.code)?;
    let mut workers = Vec::new();
    let mut results = Vec::new();
    for r in &a.results {
        let (w, path) = parse_result_arg(r)?;
        workers.push(w);
        results.push(read_vector(&path)?.into_inner());
    }
    let mut received = ReceivedSet::new(&code, &workers, results)?;
    if let Some(rows) = a.source_rows {
        received = received.with_source_rows(rows);
    }
    let report = match a.method {
        MethodArg::Auto => match code.diagonal_s() {
            Some(s) => diagonal_decode(&received, s)?,
            None => hybrid_decode(&received)?,
        },
        MethodArg::Hybrid => hybrid_decode(&received)?,
        MethodArg::Diagonal => {
            let s = code
                .diagonal_s()
                .ok_or_else(|| usage("--method diagonal needs an s-diagonal or one-diagonal code"))?;
            diagonal_decode(&received, s)?
        }
        MethodArg::Inverse => inverse_decode(&received)?,
    };
    if let Some(p) = &a.report {
        emit(Some(p), &report.to_json())?;
    }
    emit(a.out.as_deref(), &vector_text(&report.output))
}

fn mc_rank(a: McRankArgs, seed: u64) -> Result<()> {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let ns: Vec<Option<usize>> = if a.sweep_n.is_empty() {
        vec![None]
    } else {
        a.sweep_n.iter().map(|&n| Some(n)).collect()
    };
    let mut specs = Vec::new();
    for n in ns {
        let p = if a.p_auto {
            let n = n.or(a.code.n).ok_or_else(|| usage("--n is required"))? as f64;
            Some((2.0 * n.ln() / n).min(1.0))
        } else {
            None
        };
        specs.push(a.code.to_spec_with(n, p, seed)?);
    }
    let reports: Vec<McReport> = with_pool(a.jobs, || {
        specs
            .iter()
            .map(|spec| {
                if a.fixed_code {
                    probabilistic_threshold_estimate(&spec.build()?, a.trials, seed).map(|mut r| {
                        r.family_params = Some(*spec);
                        r
                    })
                } else {
                    full_rank_experiment(spec, a.trials, seed)
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()
    })??;
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("{}\n", McReport::CSV_HEADER);
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json if reports.len() == 1 => json_line(&reports[0])?,
        Format::Json => json_line(&reports)?,
    };
    emit(a.out.as_deref(), &text)
}

fn code_from(file: Option<&Path>, args: &crate::spec::CodeArgs, seed: u64) -> Result<CodingMatrix> {
    match file {
        Some(p) => read_code(p),
        None if args.has_family() => Ok(args.to_spec(seed)?.build()?),
        None => Err(usage("give --code-file or the code flags (--family, --n, ...)")),
    }
}

fn audit(a: AuditArgs, seed: u64) -> Result<()> {
    let code = code_from(a.code_file.as_deref(), &a.code, seed)?;
    let s = a
        .resist
        .or(code.diagonal_s())
        .ok_or_else(|| usage("--resist is required for non-diagonal codes"))?;
    let record = lower_bound_audit(&code, s)?;
    let text = match a.format {
        Format::Csv => format!("{}\n{}\n", AuditRecord::CSV_HEADER, record.csv_row()),
        Format::Json => json_line(&record)?,
    };
    emit(a.out.as_deref(), &text)
}

fn data_matrix(d: &DataArgs, seed: u64) -> Result<DataMatrix> {
    if let Some(p) = &d.matrix {
        return read_matrix(p);
    }
    if d.rows == 0 || d.cols == 0 {
        return Err(usage("--rows and --cols must be at least 1"));
    }
    let data_seed = derive_seed(seed, u64::MAX);
    Ok(match d.density {
        Some(rho) => sparse_gaussian_matrix(d.rows, d.cols, rho, data_seed)?,
        None => gaussian_matrix(d.rows, d.cols, data_seed)?,
    })
}

fn simulate(a: SimulateArgs, seed: u64) -> Result<()> {
    let code = code_from(a.code_file.as_deref(), &a.code, seed)?;
    let model = a.stragglers.model()?;
    let data = data_matrix(&a.data, seed)?;
    let x = match &a.x {
        Some(p) => read_vector(p)?,
        None => gaussian_vector(data.cols(), derive_seed(seed, u64::MAX - 1)),
    };
    if x.len() != data.cols() {
        return Err(usage(format!("x has {} entries, A has {} columns", x.len(), data.cols())));
    }
    let trace = TransformJob::new(&data, &x, &code)?.run(&model, seed)?;
    if let Some(p) = &a.csv {
        emit(Some(p), &trace.to_csv())?;
    }
    if let Some(p) = &a.y_out {
        emit(Some(p), &vector_text(&trace.output))?;
    }
    emit(a.out.as_deref(), &trace.to_json())
}

fn gd(a: GdArgs, seed: u64) -> Result<()> {
    let code = if a.uncoded {
        if a.code_file.is_some() {
            return Err(usage("--uncoded replaces the code; drop --code-file"));
        }
        let n = a.code.n.ok_or_else(|| usage("--uncoded needs --n"))?;
        if n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        CodingMatrix::identity(n)
    } else {
        code_from(a.code_file.as_deref(), &a.code, seed)?
    };
    let model = a.stragglers.model()?;
    let (data, b) = match (&a.matrix, &a.rhs) {
        (Some(m), Some(r)) => (read_matrix(m)?, read_vector(r)?),
        _ => {
            if a.rows == 0 || a.cols == 0 {
                return Err(usage("--rows and --cols must be at least 1"));
            }
            let (data, _, b) = least_squares_problem(a.rows, a.cols, derive_seed(seed, u64::MAX))?;
            (data, b)
        }
    };
    let eta = match a.eta {
        Some(e) if !(e.is_finite() && e >= 0.0) => return Err(usage(format!("--eta must be ≥ 0, got {e}"))),
        Some(e) => e,
        None => default_step_size(&data)?,
    };
    let trace = run_coded_gd(&data, &b, &code, eta, a.iters, &model, seed)?;
    if let Some(p) = &a.csv {
        emit(Some(p), &trace.to_csv())?;
    }
    emit(a.out.as_deref(), &trace.to_json())
}

fn compare(a: CompareArgs, seed: Option<u64>) -> Result<()> {
    let text = read_text(&a.config)?;
    let ext = a.config.extension().and_then(|e| e.to_str()).unwrap_or("");
    let mut config: ExperimentConfig = match ext {
        "toml" => toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", a.config.display())))?,
        "json" => serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", a.config.display())))?,
        _ => return Err(usage(format!("{}: expected a .json or .toml config", a.config.display()))),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let report = with_pool(a.jobs, || compare_schemes(&config))??;
    if let Some(p) = &a.csv {
        emit(Some(p), &report.trials_csv())?;
    }
    if let Some(p) = &a.summary_csv {
        emit(Some(p), &report.summary_csv())?;
    }
    emit(a.out.as_deref(), &report.to_json())
}
