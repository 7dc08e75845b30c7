use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use flatness_core::flatness::{
    nonflat_residual, restricted_omega, CertificateCheck, FlatnessCertificate, PipelineConfig, Verdict,
};
use flatness_core::poly_matrix::{smith_decompose, OreMatrix, SmithOptions};
use flatness_core::symexpr::ExprContext;
use flatness_core::sysdsl::{fixtures, parse_system, SystemSource};
use flatness_core::flatness_pipeline;

#[derive(Parser)]
#[command(name = "flatness", version, about = "Decide differential flatness of implicit control systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full test and print a certificate.
    Check {
        system: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Smith decomposition of a matrix file.
    Smith {
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        pivot_seed: u32,
        #[arg(long)]
        json: bool,
    },
    /// Eliminate the inputs of an explicit system.
    Implicitize { system: PathBuf },
    /// Re-check a JSON certificate against its system.
    Verify {
        certificate: PathBuf,
        system: PathBuf,
        #[arg(long)]
        verify_numeric_samples: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// The curvature residual of `omega` for a given matrix `M`.
    Residual {
        system: PathBuf,
        matrix: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write the worked examples into a directory.
    Examples {
        #[arg(default_value = ".")]
        dir: PathBuf,
        /// Also write the extra test systems and matrices.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Args, Default)]
struct PipelineArgs {
    #[arg(long)]
    pivot_seed: Option<u32>,
    #[arg(long)]
    mu_degree: Option<usize>,
    #[arg(long)]
    jet_order: Option<u32>,
    #[arg(long)]
    m_degree: Option<usize>,
    /// Comma-separated `name = value` pairs.
    #[arg(long)]
    base_point: Option<String>,
    #[arg(long)]
    verify_numeric_samples: Option<usize>,
    #[arg(long)]
    order_reduction: bool,
}

impl PipelineArgs {
    /// File options first, flags on top.
    fn config(&self, src: &SystemSource) -> Result<PipelineConfig> {
        let mut cfg = src.pipeline_config();
        if let Some(v) = self.pivot_seed {
            cfg.pivot_seed = v;
        }
        if let Some(v) = self.mu_degree {
            cfg.mu_degree = v;
        }
        if let Some(v) = self.jet_order {
            cfg.jet_order = v;
        }
        if let Some(v) = self.m_degree {
            cfg.m_degree = v;
        }
        if let Some(v) = self.verify_numeric_samples {
            cfg.numeric_samples = v;
        }
        if self.order_reduction {
            cfg.order_reduction = true;
        }
        if let Some(p) = &self.base_point {
            cfg.base_point = Some(src.parse_point(p).map_err(|e| anyhow!("--base-point: {e}"))?);
        }
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_system(path: &Path) -> Result<SystemSource> {
    parse_system(&read(path)?).map_err(|e| anyhow!("{}:\n{e}", path.display()))
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Flat => 0,
        Verdict::NotFlat => 2,
        Verdict::Inconclusive => 3,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn print_certificate(c: &FlatnessCertificate) {
    println!("system {}: {}", c.system, c.verdict.as_str());
    if !c.flat_output.is_empty() {
        println!("flat output: {}", c.flat_output_text().join(", "));
    }
    if let Some(phi) = &c.trivialization {
        for (k, v) in phi.components() {
            println!("  {k} = {v}");
        }
    }
    if let Some(check) = &c.check {
        println!("check: {}", check_text(check));
    }
    if let Some(lin) = c.static_linearizable {
        println!(
            "sigma: {:?}, N = {}, static feedback linearizable: {}",
            c.sigma,
            c.n_total(),
            if lin { "yes" } else { "no" }
        );
    }
    if let Some(e) = &c.evidence {
        println!("evidence: {}", e.to_json());
    }
    for r in &c.residual {
        println!("residual: {r}");
    }
    let a = c.assumption_texts();
    if !a.is_empty() {
        println!("assuming: {}", a.join(", "));
    }
    for n in &c.notes {
        println!("note: {n}");
    }
}

fn check_text(c: &CertificateCheck) -> String {
    match c {
        CertificateCheck::Valid => "valid".into(),
        CertificateCheck::ValidNumericOnly { max_residual } => format!("valid at sample points (max residual {max_residual:e})"),
        CertificateCheck::Invalid { max_residual } => format!("invalid (max residual {max_residual:e})"),
    }
}

fn check(path: &Path, opts: &PipelineArgs, json: bool) -> Result<u8> {
    let src = load_system(path)?;
    let cfg = opts.config(&src)?;
    let sys = src.to_implicit()?;
    let mut cert = flatness_pipeline(&sys, &cfg)?;
    cert.system_hash = Some(src.hash());
    if json {
        print_json(&cert.to_json());
    } else {
        print_certificate(&cert);
    }
    Ok(verdict_code(&cert.verdict))
}

fn smith(path: &Path, pivot_seed: u32, json: bool) -> Result<u8> {
    let a = OreMatrix::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let r = smith_decompose(
        &a,
        &SmithOptions {
            pivot_seed,
            ..Default::default()
        },
    )?;
    if json {
        print_json(&r.to_json());
    } else {
        let d: Vec<String> = r.delta.iter().map(|d| d.to_string()).collect();
        println!("delta: [{}]", d.join(", "));
        println!("hyper_regular: {}", r.is_hyper_regular());
        print!("V:\n{}", r.v.matrix());
        print!("U:\n{}", r.u.matrix());
    }
    Ok(0)
}

fn implicitize(path: &Path) -> Result<u8> {
    let src = load_system(path)?;
    print!("{}", SystemSource::from_implicit(&src.to_implicit()?));
    Ok(0)
}

fn verify(cert_path: &Path, sys_path: &Path, samples: Option<usize>, json: bool) -> Result<u8> {
    let cert: Value = serde_json::from_str(&read(cert_path)?).with_context(|| format!("parsing {}", cert_path.display()))?;
    let src = load_system(sys_path)?;
    let result = src.verify_json(&cert, samples)?;
    if json {
        print_json(&json!({"system": src.name, "check": check_text(&result), "valid": result.is_valid()}));
    } else {
        println!("{}", check_text(&result));
    }
    Ok(if result.is_valid() { 0 } else { 3 })
}

fn residual(sys_path: &Path, mat_path: &Path, opts: &PipelineArgs, json: bool) -> Result<u8> {
    let src = load_system(sys_path)?;
    let cfg = opts.config(&src)?;
    let sys = src.to_implicit()?;
    let params: Vec<String> = src.param_names().iter().map(|s| s.to_string()).collect();
    let rows: Vec<String> = read(mat_path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with("params"))
        .collect();
    let ctx = ExprContext {
        params: params.into_iter().collect(),
        vars: Some(sys.states.iter().map(|s| s.to_string()).collect()),
    };
    let m = OreMatrix::parse_rows(&rows, &ctx).with_context(|| format!("parsing {}", mat_path.display()))?;
    let (omega, x0, ledger) = restricted_omega(&sys, &cfg)?;
    if m.rows() != omega.len() || m.cols() != omega.len() {
        bail!("M must be {0}x{0}", omega.len());
    }
    let r = nonflat_residual(&m, &omega, &x0, &ledger)?;
    let zero = r.iter().all(|f| f.is_zero());
    if json {
        print_json(&json!({
            "omega": omega.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "residual": r.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "zero": zero,
        }));
    } else {
        for (w, f) in omega.iter().zip(&r) {
            println!("omega: {w}");
            println!("  residual: {f}");
        }
    }
    Ok(0)
}

fn examples(dir: &Path, all: bool) -> Result<u8> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files: Vec<(&str, &str)> = if all { fixtures::ALL.to_vec() } else { fixtures::EXAMPLES.to_vec() };
    if all {
        files.push(("torsion.mat", fixtures::TORSION_MAT));
    }
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        println!("{}", p.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Check { system, opts, json } => check(&system, &opts, json),
        Cmd::Smith { matrix, pivot_seed, json } => smith(&matrix, pivot_seed, json),
        Cmd::Implicitize { system } => implicitize(&system),
        Cmd::Verify {
            certificate,
            system,
            verify_numeric_samples,
            json,
        } => verify(&certificate, &system, verify_numeric_samples, json),
        Cmd::Residual { system, matrix, opts, json } => residual(&system, &matrix, &opts, json),
        Cmd::Examples { dir, all } => examples(&dir, all),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let mut msg = String::new();
            for part in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&part) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&part);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
